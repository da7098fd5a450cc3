"""Diversity solver for acyclic conjunctive queries.

The solver runs a dynamic program over a join tree. A table entry pairs a
k-tuple of partial solutions (answers to one atom) with the vector of pairwise
Hamming distances over the free variables that some extension to the whole
subtree realizes. Extensions merge bottom-up with the inclusion-exclusion rule

    combined = d_parent + d_child - distance(shared parts)

and provenance links let a concrete witness be rebuilt afterwards.

Two specialized sum-aggregator paths exist: one keeps, per partial-solution
tuple and per vector of "this pair differs somewhere" flags, only the maximum
achievable sum; the other additionally allows duplicate answers, which lets
tables shrink to sorted partial-solution tuples.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

from .errors import CorruptProvenance, NotAcyclic, TableGuardExceeded
from .model import Aggregator, Assignment, Database, Outcome, hamming_distance
from .queries import Atom, Query, sols_atom
from .structure import JoinTree, gyo_join_tree

DEFAULT_TABLE_CAP = 10_000_000


def _pairs(k: int) -> list[tuple[int, int]]:
    # Ordered so extending a tuple by one slot appends distances at the end.
    return [(i, j) for j in range(k) for i in range(j)]


def _sorted_sols(atom: Atom, db: Database) -> list[Assignment]:
    var_order = sorted(atom.variables)
    return sorted(
        sols_atom(atom, db),
        key=lambda a: tuple(a[v].index for v in var_order),
    )


def _distance_matrix(sols: Sequence[Assignment], variables: frozenset[str]) -> list[list[int]]:
    xs = sorted(variables)
    n = len(sols)
    matrix = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            d = hamming_distance(sols[i], sols[j], xs)
            matrix[i][j] = matrix[j][i] = d
    return matrix


@dataclass
class DPTable:
    """DP table at one join-tree node.

    entries maps (partial-index tuple, distance vector) to provenance: one
    (child node, child entry key) link per already-merged child.
    """

    node: int
    atom: Atom
    sols: list[Assignment]
    k: int
    entries: dict[tuple, tuple] = field(default_factory=dict)

    def check_bound(self, db: Database, free_count: int) -> None:
        k, npairs = self.k, len(_pairs(self.k))
        bound = db.max_relation_size() ** k * (free_count + 1) ** npairs
        assert len(self.entries) <= bound, (
            f"table at node {self.node} holds {len(self.entries)} entries, "
            f"bound is {bound}"
        )

    def is_permutation_closed(self) -> bool:
        pairs = _pairs(self.k)
        pos = {p: n for n, p in enumerate(pairs)}
        for (ptuple, dvec) in self.entries:
            for perm in itertools.permutations(range(self.k)):
                permuted = tuple(ptuple[perm[i]] for i in range(self.k))
                pdvec = []
                for (i, j) in pairs:
                    a, b = perm[i], perm[j]
                    pdvec.append(dvec[pos[(a, b) if a < b else (b, a)]])
                if (permuted, tuple(pdvec)) not in self.entries:
                    return False
        return True


def dp_init(node: int, atom: Atom, db: Database, k: int,
            free_vars: Sequence[str], *, table_cap: int = DEFAULT_TABLE_CAP) -> DPTable:
    """Initial table: every k-tuple of the atom's solutions with its distances."""
    sols = _sorted_sols(atom, db)
    n = len(sols)
    if n ** k > table_cap:
        raise TableGuardExceeded(f"initial table would hold {n ** k} entries")
    dist = _distance_matrix(sols, frozenset(free_vars) & atom.variables)
    table = DPTable(node=node, atom=atom, sols=sols, k=k)
    keys: list[tuple[tuple, tuple]] = [((), ())]
    for _ in range(k):
        keys = [
            (ptuple + (idx,), dvec + tuple([dist[idx][p] for p in ptuple]))
            for ptuple, dvec in keys
            for idx in range(n)
        ]
    table.entries = {key: () for key in keys}
    table.check_bound(db, len(free_vars))
    return table


def _shared_projection(table: DPTable, shared: Sequence[str]) -> list[tuple]:
    return [tuple(a[v].index for v in shared) for a in table.sols]


def dp_merge(parent: DPTable, child: DPTable, db: Database,
             free_vars: Sequence[str], *, table_cap: int = DEFAULT_TABLE_CAP) -> DPTable:
    """Merge a completed child table into its parent's table.

    Compatible entry pairs combine their distance vectors, subtracting the
    distance already counted on the shared variables. When several pairs
    produce the same entry, the first in iteration order donates provenance.
    """
    shared = sorted(parent.atom.variables & child.atom.variables)
    x_shared = frozenset(free_vars) & frozenset(shared)
    proj_p = _shared_projection(parent, shared)
    proj_c = _shared_projection(child, shared)
    corr = _distance_matrix(parent.sols, x_shared)
    pairs = _pairs(parent.k)

    buckets: dict[tuple, list[tuple]] = {}
    for key in child.entries:
        ctuple = key[0]
        bucket_key = tuple([proj_c[c] for c in ctuple])
        buckets.setdefault(bucket_key, []).append(key)

    merged = DPTable(node=parent.node, atom=parent.atom, sols=parent.sols, k=parent.k)
    out = merged.entries
    tuple_cache: dict[tuple, tuple] = {}
    for (ptuple, dvec), refs in parent.entries.items():
        cached = tuple_cache.get(ptuple)
        if cached is None:
            cached = (
                tuple([proj_p[p] for p in ptuple]),
                tuple([corr[ptuple[i]][ptuple[j]] for i, j in pairs]),
            )
            tuple_cache[ptuple] = cached
        bucket_key, corrvec = cached
        matches = buckets.get(bucket_key)
        if not matches:
            continue
        for ckey in matches:
            combined = tuple(
                [a + b - c for a, b, c in zip(dvec, ckey[1], corrvec)]
            )
            new_key = (ptuple, combined)
            if new_key not in out:
                out[new_key] = refs + ((child.node, ckey),)
                if len(out) > table_cap:
                    raise TableGuardExceeded(
                        f"merge at node {parent.node} exceeded {table_cap} entries"
                    )
    merged.check_bound(db, len(free_vars))
    return merged


def dp_finalize(root: DPTable, aggregator: Aggregator, threshold: float | None,
                allow_duplicates: bool) -> tuple[bool, tuple | None, float | None]:
    """Decision at the root: (decision, best entry key, best diversity).

    Entries with a zero pairwise distance are dropped unless duplicates are
    allowed; the best entry maximizes the aggregate (first such entry wins).
    A threshold of None asks only for the maximum.
    """
    best_key = None
    best_val = None
    for key in root.entries:
        dvec = key[1]
        if not allow_duplicates and any(d == 0 for d in dvec):
            continue
        value = aggregator.aggregate(dvec)
        if best_val is None or value > best_val:
            best_key, best_val = key, value
    if best_val is None:
        return False, None, None
    if threshold is None:
        return True, best_key, best_val
    return best_val >= threshold, best_key, best_val


def extract_witness(tables: dict[int, DPTable], root_key: tuple, jt: JoinTree,
                    free_vars: Sequence[str]) -> tuple[Assignment, ...]:
    """Rebuild k full answers realizing a kept root entry, via provenance."""
    k = tables[jt.root].k
    collected: list[dict] = [dict() for _ in range(k)]

    def absorb(node: int, key: tuple) -> None:
        table = tables[node]
        ptuple = key[0]
        for i in range(k):
            for v, value in table.sols[ptuple[i]].items():
                prior = collected[i].get(v)
                if prior is not None and prior != value:
                    raise CorruptProvenance(
                        f"conflicting bindings for {v} while extending entry"
                    )
                collected[i][v] = value
        for child_node, child_key in table.entries[key]:
            absorb(child_node, child_key)

    absorb(jt.root, root_key)
    xs = list(free_vars)
    witness = tuple(Assignment(b).restrict(xs) for b in collected)
    dvec = root_key[1]
    pairs = _pairs(k)
    for n, (i, j) in enumerate(pairs):
        if hamming_distance(witness[i], witness[j], xs) != dvec[n]:
            raise CorruptProvenance("witness distances disagree with the kept entry")
    return witness


def _traverse(query: Query, db: Database, k: int, free_vars: Sequence[str],
              init, merge, table_cap: int):
    jt = gyo_join_tree(query)
    if jt is None:
        raise NotAcyclic(f"query {query.head} admits no join tree")
    atoms = query.conjuncts[0].positive_atoms
    tables: dict[int, object] = {}
    max_table = 0
    for node in jt.postorder():
        table = init(node, atoms[jt.label[node]])
        for child in jt.children.get(node, ()):
            table = merge(table, tables[child])
        tables[node] = table
        max_table = max(max_table, len(table.entries))
    stats = {"nodes": len(atoms), "max_table": max_table, "k": k}
    return jt, tables, stats


def solve_acq(query: Query, db: Database, k: int, d: float | None,
              aggregator: Aggregator, *, witness: bool = False,
              allow_duplicates: bool = False,
              table_cap: int = DEFAULT_TABLE_CAP) -> Outcome:
    """Decide whether k pairwise-distinct answers reach diversity d.

    Needs an acyclic positive query; d = None reports the maximum achievable
    diversity instead of deciding against a threshold.
    """
    free_vars = query.free_vars
    jt, tables, stats = _traverse(
        query, db, k, free_vars,
        init=lambda node, atom: dp_init(node, atom, db, k, free_vars, table_cap=table_cap),
        merge=lambda parent, child: dp_merge(parent, child, db, free_vars, table_cap=table_cap),
        table_cap=table_cap,
    )
    decision, best_key, best = dp_finalize(tables[jt.root], aggregator, d, allow_duplicates)
    solution = None
    if decision and witness and best_key is not None:
        solution = extract_witness(tables, best_key, jt, free_vars)
    return Outcome(decision, best, solution, routing="acq", stats=stats)


# --- sum aggregator fast path (pairwise distinct answers) ---------------------


@dataclass
class SumTable:
    """Sum-aggregator table: (partials, distinctness flags) -> best sum.

    entries maps (partial-index tuple, flag vector) to (value, provenance).
    A flag of 1 for pair (i, j) means the recorded extensions differ on at
    least one free variable.
    """

    node: int
    atom: Atom
    sols: list[Assignment]
    k: int
    entries: dict[tuple, tuple] = field(default_factory=dict)


def sum_init(node: int, atom: Atom, db: Database, k: int,
             free_vars: Sequence[str], *, table_cap: int = DEFAULT_TABLE_CAP) -> SumTable:
    sols = _sorted_sols(atom, db)
    n = len(sols)
    if n ** k > table_cap:
        raise TableGuardExceeded(f"initial table would hold {n ** k} entries")
    dist = _distance_matrix(sols, frozenset(free_vars) & atom.variables)
    pairs = _pairs(k)
    table = SumTable(node=node, atom=atom, sols=sols, k=k)
    for ptuple in itertools.product(range(n), repeat=k):
        ds = [dist[ptuple[i]][ptuple[j]] for i, j in pairs]
        flags = tuple(1 if x > 0 else 0 for x in ds)
        table.entries[(ptuple, flags)] = (sum(ds), ())
    return table


def sum_merge(parent: SumTable, child: SumTable, db: Database,
              free_vars: Sequence[str], *, table_cap: int = DEFAULT_TABLE_CAP) -> SumTable:
    shared = sorted(parent.atom.variables & child.atom.variables)
    x_shared = frozenset(free_vars) & frozenset(shared)
    proj_p = _shared_projection(parent, shared)
    proj_c = _shared_projection(child, shared)
    corr = _distance_matrix(parent.sols, x_shared)
    pairs = _pairs(parent.k)

    buckets: dict[tuple, list[tuple]] = {}
    for key in child.entries:
        bucket_key = tuple(proj_c[c] for c in key[0])
        buckets.setdefault(bucket_key, []).append(key)

    merged = SumTable(node=parent.node, atom=parent.atom, sols=parent.sols, k=parent.k)
    out = merged.entries
    for (ptuple, flags), (value, refs) in parent.entries.items():
        matches = buckets.get(tuple(proj_p[p] for p in ptuple))
        if not matches:
            continue
        corr_sum = sum(corr[ptuple[i]][ptuple[j]] for i, j in pairs)
        for ckey in matches:
            cvalue, _ = child.entries[ckey]
            cflags = ckey[1]
            combined_flags = tuple(a | b for a, b in zip(flags, cflags))
            combined_value = value + cvalue - corr_sum
            new_key = (ptuple, combined_flags)
            prior = out.get(new_key)
            if prior is None or combined_value > prior[0]:
                out[new_key] = (combined_value, refs + ((child.node, ckey),))
                if len(out) > table_cap:
                    raise TableGuardExceeded(
                        f"merge at node {parent.node} exceeded {table_cap} entries"
                    )
    return merged


def solve_acq_sum(query: Query, db: Database, k: int, d: float | None, *,
                  witness: bool = False,
                  table_cap: int = DEFAULT_TABLE_CAP) -> Outcome:
    """Sum-diversity decision via the flagged max-sum tables.

    Matches solve_acq with the sum aggregator on decisions and values.
    """
    free_vars = query.free_vars
    jt, tables, stats = _traverse(
        query, db, k, free_vars,
        init=lambda node, atom: sum_init(node, atom, db, k, free_vars, table_cap=table_cap),
        merge=lambda parent, child: sum_merge(parent, child, db, free_vars, table_cap=table_cap),
        table_cap=table_cap,
    )
    best_key, best = None, None
    for key, (value, _) in tables[jt.root].entries.items():
        if any(flag == 0 for flag in key[1]):
            continue
        if best is None or value > best:
            best_key, best = key, value
    decision = best is not None and (d is None or best >= d)
    solution = None
    if decision and witness and best_key is not None:
        solution = _extract_sum_witness(tables, best_key, jt, free_vars, best)
    return Outcome(decision, best, solution, routing="acq-sum", stats=stats)


def _extract_sum_witness(tables: dict[int, SumTable], root_key: tuple, jt: JoinTree,
                         free_vars: Sequence[str], expect: int) -> tuple[Assignment, ...]:
    k = tables[jt.root].k
    collected: list[dict] = [dict() for _ in range(k)]

    def absorb(node: int, key: tuple) -> None:
        table = tables[node]
        for i in range(k):
            for v, value in table.sols[key[0][i]].items():
                prior = collected[i].get(v)
                if prior is not None and prior != value:
                    raise CorruptProvenance(f"conflicting bindings for {v}")
                collected[i][v] = value
        for child_node, child_key in table.entries[key][1]:
            absorb(child_node, child_key)

    absorb(jt.root, root_key)
    xs = list(free_vars)
    witness = tuple(Assignment(b).restrict(xs) for b in collected)
    total = sum(
        hamming_distance(witness[i], witness[j], xs)
        for i, j in _pairs(k)
    )
    if total != expect:
        raise CorruptProvenance("witness sum-diversity disagrees with the table value")
    return witness


# --- sum aggregator with duplicates allowed ------------------------------------


@dataclass
class DupSumTable:
    """Duplicates-allowed sum tables: sorted partial tuples -> best sum.

    Partial-solution tuples are kept sorted under the node's solution order;
    provenance records, per merged child, the entry and the index permutation
    aligning parent slots with the child's sorted tuple.
    """

    node: int
    atom: Atom
    sols: list[Assignment]
    k: int
    entries: dict[tuple, tuple] = field(default_factory=dict)

    def check_bound(self) -> None:
        bound = math.comb(len(self.sols) + self.k - 1, self.k)
        assert len(self.entries) <= bound, (
            f"duplicate-mode table at node {self.node} holds {len(self.entries)} "
            f"entries, bound is {bound}"
        )
        assert all(tuple(sorted(p)) == p for p in self.entries), "unsorted entry key"


def dup_init(node: int, atom: Atom, db: Database, k: int,
             free_vars: Sequence[str], *, table_cap: int = DEFAULT_TABLE_CAP) -> DupSumTable:
    sols = _sorted_sols(atom, db)
    n = len(sols)
    dist = _distance_matrix(sols, frozenset(free_vars) & atom.variables)
    pairs = _pairs(k)
    table = DupSumTable(node=node, atom=atom, sols=sols, k=k)
    for ptuple in itertools.combinations_with_replacement(range(n), k):
        value = sum(dist[ptuple[i]][ptuple[j]] for i, j in pairs)
        table.entries[ptuple] = (value, ())
        if len(table.entries) > table_cap:
            raise TableGuardExceeded(f"initial table exceeded {table_cap} entries")
    table.check_bound()
    return table


def dup_merge(parent: DupSumTable, child: DupSumTable, db: Database,
              free_vars: Sequence[str], *, table_cap: int = DEFAULT_TABLE_CAP) -> DupSumTable:
    shared = sorted(parent.atom.variables & child.atom.variables)
    x_shared = frozenset(free_vars) & frozenset(shared)
    proj_p = _shared_projection(parent, shared)
    proj_c = _shared_projection(child, shared)
    corr = _distance_matrix(parent.sols, x_shared)
    pairs = _pairs(parent.k)
    k = parent.k

    # Sorted child keys bucketed by their sorted projection multiset; the
    # per-index alignment is recovered by trying index permutations.
    buckets: dict[tuple, list[tuple]] = {}
    for ckey in child.entries:
        bucket_key = tuple(sorted(proj_c[c] for c in ckey))
        buckets.setdefault(bucket_key, []).append(ckey)

    perms = list(itertools.permutations(range(k)))
    merged = DupSumTable(node=parent.node, atom=parent.atom, sols=parent.sols, k=k)
    out = merged.entries
    for ptuple, (value, refs) in parent.entries.items():
        projections = [proj_p[p] for p in ptuple]
        matches = buckets.get(tuple(sorted(projections)))
        if not matches:
            continue
        corr_sum = sum(corr[ptuple[i]][ptuple[j]] for i, j in pairs)
        best = None
        for ckey in matches:
            cvalue = child.entries[ckey][0]
            for perm in perms:
                if all(proj_c[ckey[perm[i]]] == projections[i] for i in range(k)):
                    combined = value + cvalue - corr_sum
                    if best is None or combined > best[0]:
                        best = (combined, refs + ((child.node, ckey, perm),))
                    break  # the child value is permutation-invariant
        if best is not None:
            out[ptuple] = best
    merged.check_bound()
    return merged


def solve_acq_sum_dup(query: Query, db: Database, k: int, d: float | None, *,
                      witness: bool = False,
                      table_cap: int = DEFAULT_TABLE_CAP) -> Outcome:
    """Sum-diversity over multisets of answers (duplicates permitted)."""
    free_vars = query.free_vars
    jt, tables, stats = _traverse(
        query, db, k, free_vars,
        init=lambda node, atom: dup_init(node, atom, db, k, free_vars, table_cap=table_cap),
        merge=lambda parent, child: dup_merge(parent, child, db, free_vars, table_cap=table_cap),
        table_cap=table_cap,
    )
    best_key, best = None, None
    for key, (value, _) in tables[jt.root].entries.items():
        if best is None or value > best:
            best_key, best = key, value
    decision = best is not None and (d is None or best >= d)
    solution = None
    if decision and witness and best_key is not None:
        solution = _extract_dup_witness(tables, best_key, jt, free_vars, best)
    return Outcome(decision, best, solution, routing="acq-sum-dup", stats=stats)


def _extract_dup_witness(tables: dict[int, DupSumTable], root_key: tuple, jt: JoinTree,
                         free_vars: Sequence[str], expect: int) -> tuple[Assignment, ...]:
    k = tables[jt.root].k
    collected: list[dict] = [dict() for _ in range(k)]

    def absorb(node: int, key: tuple, slots: Sequence[int]) -> None:
        # slots[i]: which position of `key` feeds witness slot i.
        table = tables[node]
        for i in range(k):
            for v, value in table.sols[key[slots[i]]].items():
                prior = collected[i].get(v)
                if prior is not None and prior != value:
                    raise CorruptProvenance(f"conflicting bindings for {v}")
                collected[i][v] = value
        for child_node, child_key, perm in table.entries[key][1]:
            absorb(child_node, child_key, [perm[slots[i]] for i in range(k)])

    absorb(jt.root, root_key, list(range(k)))
    xs = list(free_vars)
    witness = tuple(Assignment(b).restrict(xs) for b in collected)
    total = sum(
        hamming_distance(witness[i], witness[j], xs) for i, j in _pairs(k)
    )
    if total != expect:
        raise CorruptProvenance("witness sum-diversity disagrees with the table value")
    return witness
