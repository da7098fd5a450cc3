"""Shared test utilities: random instance generators and tiny independent
oracles (assignment enumeration over the full domain) used to cross-check the
dynamic-programming tables.
"""

from __future__ import annotations

import itertools
import random
from typing import Sequence

from diverseq.model import Assignment, Database
from diverseq.queries import Atom, Conjunct, Literal, Query, Variable
from diverseq.structure import tree_decompose


def random_acyclic_query(rng: random.Random, *, max_atoms: int = 4,
                         max_arity: int = 3, max_dom: int = 4,
                         max_rows: int = 12) -> tuple[Query, Database]:
    """A random acyclic query with a random database.

    Atoms are generated along a random tree so a join tree exists by
    construction: each child shares a subset of its parent's variables and may
    add fresh ones.
    """
    n_atoms = rng.randint(1, max_atoms)
    parent = [None] + [rng.randrange(i) for i in range(1, n_atoms)]
    fresh = itertools.count()
    atom_vars: list[list[str]] = []
    for i in range(n_atoms):
        arity = rng.randint(1, max_arity)
        if parent[i] is None:
            variables = [f"v{next(fresh)}" for _ in range(arity)]
        else:
            inherited = rng.sample(
                atom_vars[parent[i]],
                k=rng.randint(0, min(arity, len(atom_vars[parent[i]]))),
            )
            variables = inherited + [
                f"v{next(fresh)}" for _ in range(arity - len(inherited))
            ]
            rng.shuffle(variables)
        atom_vars.append(variables)

    dom_size = rng.randint(2, max_dom)
    db = Database()
    literals = []
    for i, variables in enumerate(atom_vars):
        arity = len(variables)
        n_rows = rng.randint(1, max_rows)
        rows = {
            tuple(rng.randint(1, dom_size) for _ in range(arity))
            for _ in range(n_rows)
        }
        db.add_relation(f"R{i}", arity, sorted(rows))
        literals.append(Literal(Atom(f"R{i}", tuple(Variable(v) for v in variables))))

    all_vars = sorted({v for vs in atom_vars for v in vs})
    n_free = rng.randint(1, len(all_vars))
    free = rng.sample(all_vars, k=n_free)
    query = Query("Q", tuple(free), (Conjunct(tuple(literals)),))
    return query, db


def random_cqneg_query(rng: random.Random, *, max_vars: int = 5,
                       dom_size: int = 3, max_positive: int = 3,
                       max_width: int = 2) -> tuple[Query, Database]:
    """A random single-disjunct query with negation, treewidth-bounded.

    Regenerates until the primal graph's exact width fits under max_width.
    """
    while True:
        n_vars = rng.randint(1, max_vars)
        variables = [f"v{i}" for i in range(n_vars)]
        n_pos = rng.randint(1, max_positive)
        groups: list[list[str]] = []
        covered: set[str] = set()
        for i in range(n_pos):
            size = rng.randint(1, min(3, n_vars))
            group = rng.sample(variables, k=size)
            groups.append(group)
            covered |= set(group)
        uncovered = [v for v in variables if v not in covered]
        while uncovered:
            slot = rng.randrange(len(groups))
            if len(groups[slot]) < 3:
                groups[slot].append(uncovered.pop())
            else:
                groups.append([uncovered.pop()])

        literals = []
        db = Database()
        for i, group in enumerate(groups):
            arity = len(group)
            n_rows = rng.randint(1, dom_size ** arity)
            rows = {
                tuple(rng.randint(1, dom_size) for _ in range(arity))
                for _ in range(n_rows)
            }
            db.add_relation(f"P{i}", arity, sorted(rows))
            literals.append(Literal(Atom(f"P{i}", tuple(Variable(v) for v in group))))

        n_neg = rng.randint(0, max(0, len(groups) // 2))
        for i in range(n_neg):
            size = rng.randint(1, min(2, n_vars))
            group = rng.sample(variables, k=size)
            rows = {
                tuple(rng.randint(1, dom_size) for _ in range(size))
                for _ in range(rng.randint(0, dom_size ** size))
            }
            db.add_relation(f"N{i}", size, sorted(rows))
            literals.append(
                Literal(Atom(f"N{i}", tuple(Variable(v) for v in group)), positive=False)
            )

        free = rng.sample(variables, k=rng.randint(1, n_vars))
        query = Query("Q", tuple(free), (Conjunct(tuple(literals)),))
        if tree_decompose(query, "exact").width <= max_width:
            return query, db


def random_general_query(rng: random.Random, *, max_atoms: int = 5,
                         max_vars: int = 5, max_arity: int = 3,
                         max_dom: int = 3, max_rows: int = 6
                         ) -> tuple[Query, Database]:
    """A random positive query with no acyclicity guarantee."""
    n_vars = rng.randint(1, max_vars)
    variables = [f"v{i}" for i in range(n_vars)]
    n_atoms = rng.randint(1, max_atoms)
    db = Database()
    literals = []
    covered: set[str] = set()
    for i in range(n_atoms):
        arity = rng.randint(1, min(max_arity, n_vars))
        group = rng.sample(variables, k=arity)
        covered |= set(group)
        rows = {
            tuple(rng.randint(1, max_dom) for _ in range(arity))
            for _ in range(rng.randint(1, max_rows))
        }
        db.add_relation(f"R{i}", arity, sorted(rows))
        literals.append(Literal(Atom(f"R{i}", tuple(Variable(v) for v in group))))
    usable = sorted(covered)
    free = rng.sample(usable, k=rng.randint(1, len(usable)))
    query = Query("Q", tuple(free), (Conjunct(tuple(literals)),))
    return query, db


def random_assignment(rng: random.Random, db: Database,
                      variables: Sequence[str]) -> Assignment:
    domain = list(db.domain)
    return Assignment({v: rng.choice(domain) for v in variables})


def conjunction_solutions(atoms: Sequence[Atom], db: Database) -> list[Assignment]:
    """All assignments of the atoms' variables satisfying every atom.

    Deliberately naive (full domain enumeration) so it stays independent of
    the join machinery it is used to check.
    """
    variables = sorted({v for a in atoms for v in a.variables})
    domain = list(db.domain)
    out = []
    for combo in itertools.product(domain, repeat=len(variables)):
        assignment = Assignment(dict(zip(variables, combo)))
        ok = True
        for atom in atoms:
            row = tuple(assignment[t.name] for t in atom.terms)
            if row not in db.relations[atom.relation].rows:
                ok = False
                break
        if ok:
            out.append(assignment)
    return out


def literal_solutions(literals: Sequence[Literal], variables: Sequence[str],
                      db: Database) -> list[Assignment]:
    """All assignments over the given variables satisfying every literal."""
    from diverseq.queries import satisfies_literal

    domain = list(db.domain)
    out = []
    for combo in itertools.product(domain, repeat=len(variables)):
        assignment = Assignment(dict(zip(variables, combo)))
        if all(satisfies_literal(lit, assignment, db) for lit in literals):
            out.append(assignment)
    return out


def all_graphs(max_n: int):
    """Every labeled simple graph on 1..max_n vertices."""
    from diverseq.oracle import Graph

    for n in range(1, max_n + 1):
        possible = list(itertools.combinations(range(1, n + 1), 2))
        for bits in range(1 << len(possible)):
            edges = [e for i, e in enumerate(possible) if (bits >> i) & 1]
            yield Graph.from_edges(n, edges)


def small_answer_instances(rng: random.Random, count: int, *, max_answers: int = 24,
                           **kwargs) -> list[tuple[Query, Database]]:
    """Random acyclic instances filtered to a manageable answer count."""
    from diverseq.oracle import enumerate_answers

    out = []
    while len(out) < count:
        query, db = random_acyclic_query(rng, **kwargs)
        if len(enumerate_answers(query, db)) <= max_answers:
            out.append((query, db))
    return out
