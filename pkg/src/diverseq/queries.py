"""Query ASTs (conjunctive, unions, negation), a rule-text parser, and
single-atom evaluation.

Rule syntax, one rule per line, `#` starts a comment:

    Q(x, y) :- R(x, y), !S(x, 5), T("a", y).

Lowercase-initial identifiers are variables; integers and quoted strings are
constants. Several rules with the same head form a union. The head's variable
order is semantic: it fixes the column order of every answer.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

from .errors import (
    ArityMismatch,
    MismatchedHeads,
    NegationInUnion,
    QuerySyntaxError,
    UnknownRelation,
    UnsafeQuery,
)
from .model import Assignment, Database, Payload


@dataclass(frozen=True)
class Variable:
    name: str


@dataclass(frozen=True)
class Constant:
    payload: Payload


Term = Union[Variable, Constant]


@dataclass(frozen=True)
class Atom:
    relation: str
    terms: tuple[Term, ...]

    @property
    def variables(self) -> frozenset[str]:
        return frozenset(t.name for t in self.terms if isinstance(t, Variable))

    def variable_list(self) -> tuple[str, ...]:
        """Variable names in first-occurrence order."""
        seen: dict[str, None] = {}
        for t in self.terms:
            if isinstance(t, Variable):
                seen.setdefault(t.name, None)
        return tuple(seen)


@dataclass(frozen=True)
class Literal:
    atom: Atom
    positive: bool = True

    @property
    def variables(self) -> frozenset[str]:
        return self.atom.variables


@dataclass(frozen=True)
class Conjunct:
    """One disjunct: a sequence of literals sharing the query's free variables."""

    literals: tuple[Literal, ...]

    @property
    def variables(self) -> frozenset[str]:
        out: set[str] = set()
        for lit in self.literals:
            out |= lit.variables
        return frozenset(out)

    @property
    def positive_variables(self) -> frozenset[str]:
        out: set[str] = set()
        for lit in self.literals:
            if lit.positive:
                out |= lit.variables
        return frozenset(out)

    @property
    def positive_atoms(self) -> tuple[Atom, ...]:
        return tuple(lit.atom for lit in self.literals if lit.positive)

    @property
    def negative_literals(self) -> tuple[Literal, ...]:
        return tuple(lit for lit in self.literals if not lit.positive)

    def has_negation(self) -> bool:
        return any(not lit.positive for lit in self.literals)


@dataclass(frozen=True)
class Query:
    head: str
    free_vars: tuple[str, ...]
    conjuncts: tuple[Conjunct, ...]

    def __post_init__(self) -> None:
        if not self.conjuncts:
            raise ValueError("a query needs at least one disjunct")
        if len(set(self.free_vars)) != len(self.free_vars):
            raise ValueError(f"repeated variable in head of {self.head}")
        negated = any(c.has_negation() for c in self.conjuncts)
        if negated and len(self.conjuncts) > 1:
            raise NegationInUnion(f"query {self.head} mixes union and negation")
        for conjunct in self.conjuncts:
            covered = conjunct.positive_variables
            for v in sorted(set(self.free_vars) | conjunct.variables):
                if v not in covered:
                    raise UnsafeQuery(
                        f"variable {v} has no positive occurrence in a disjunct of {self.head}"
                    )

    @property
    def kind(self) -> str:
        """One of "cq", "ucq", "cqneg", derived from the shape."""
        if any(c.has_negation() for c in self.conjuncts):
            return "cqneg"
        return "cq" if len(self.conjuncts) == 1 else "ucq"

    def existential_vars(self, conjunct: Conjunct) -> frozenset[str]:
        return conjunct.variables - frozenset(self.free_vars)

    @property
    def is_single_positive(self) -> bool:
        return self.kind == "cq"


# --- parsing ---------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>\#.*)
  | (?P<implies>:-)
  | (?P<string>"(?:[^"\\]|\\.)*")
  | (?P<int>-?\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<sym>[(),.!])
    """,
    re.VERBOSE,
)


def _tokenize_line(line: str, lineno: int) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(line):
        m = _TOKEN_RE.match(line, pos)
        if m is None:
            raise QuerySyntaxError(f"unexpected character {line[pos]!r}", lineno, pos + 1)
        kind = m.lastgroup
        if kind == "comment":
            break
        if kind != "ws":
            tokens.append((kind, m.group(), m.start() + 1))
        pos = m.end()
    return tokens


class _RuleParser:
    def __init__(self, tokens: list[tuple[str, str, int]], lineno: int):
        self.tokens = tokens
        self.lineno = lineno
        self.i = 0

    def error(self, message: str) -> QuerySyntaxError:
        col = self.tokens[self.i][2] if self.i < len(self.tokens) else (
            self.tokens[-1][2] + len(self.tokens[-1][1]) if self.tokens else 1
        )
        return QuerySyntaxError(message, self.lineno, col)

    def peek(self) -> tuple[str, str, int] | None:
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def expect(self, kind: str, text: str | None = None) -> str:
        tok = self.peek()
        if tok is None or tok[0] != kind or (text is not None and tok[1] != text):
            want = text or kind
            raise self.error(f"expected {want!r}")
        self.i += 1
        return tok[1]

    def parse_rule(self) -> tuple[str, tuple[str, ...], Conjunct]:
        head = self.expect("ident")
        self.expect("sym", "(")
        head_vars: list[str] = []
        if self.peek() and self.peek()[1] != ")":
            while True:
                name = self.expect("ident")
                if not name[0].islower():
                    raise self.error(f"head term {name!r} must be a variable")
                head_vars.append(name)
                if self.peek() and self.peek()[1] == ",":
                    self.i += 1
                    continue
                break
        self.expect("sym", ")")
        self.expect("implies")
        literals = [self.parse_literal()]
        while self.peek() and self.peek()[1] == ",":
            self.i += 1
            literals.append(self.parse_literal())
        self.expect("sym", ".")
        if self.peek() is not None:
            raise self.error("trailing input after rule")
        return head, tuple(head_vars), Conjunct(tuple(literals))

    def parse_literal(self) -> Literal:
        positive = True
        if self.peek() and self.peek()[1] == "!":
            positive = False
            self.i += 1
        name = self.expect("ident")
        self.expect("sym", "(")
        terms: list[Term] = []
        if self.peek() and self.peek()[1] != ")":
            while True:
                terms.append(self.parse_term())
                if self.peek() and self.peek()[1] == ",":
                    self.i += 1
                    continue
                break
        self.expect("sym", ")")
        return Literal(Atom(name, tuple(terms)), positive)

    def parse_term(self) -> Term:
        tok = self.peek()
        if tok is None:
            raise self.error("expected a term")
        kind, text, _ = tok
        if kind == "int":
            self.i += 1
            return Constant(int(text))
        if kind == "string":
            self.i += 1
            return Constant(_unquote(text))
        if kind == "ident":
            if not text[0].islower():
                raise self.error(
                    f"term {text!r} is neither a variable (lowercase-initial) nor a constant"
                )
            self.i += 1
            return Variable(text)
        raise self.error(f"unexpected token {text!r} in term position")


def _unquote(text: str) -> str:
    body = text[1:-1]
    return body.replace('\\"', '"').replace("\\\\", "\\")


def _quote(payload: str) -> str:
    return '"' + payload.replace("\\", "\\\\").replace('"', '\\"') + '"'


def parse_query(text: str) -> Query:
    """Parse rule text into a query AST.

    Multiple rules with an identical head form a union; the derived kind
    (cq / ucq / cqneg) follows from the parsed shape.
    """
    rules: list[tuple[str, tuple[str, ...], Conjunct]] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        tokens = _tokenize_line(line, lineno)
        if not tokens:
            continue
        parser = _RuleParser(tokens, lineno)
        rules.append(parser.parse_rule())
    if not rules:
        raise QuerySyntaxError("no rule found", 1, 1)
    head, free_vars, _ = rules[0]
    for other_head, other_vars, _ in rules[1:]:
        if other_head != head or other_vars != free_vars:
            raise MismatchedHeads(
                f"rule head {other_head}({', '.join(other_vars)}) does not match "
                f"{head}({', '.join(free_vars)})"
            )
    return Query(head, free_vars, tuple(c for _, _, c in rules))


def render_term(term: Term) -> str:
    if isinstance(term, Variable):
        return term.name
    if isinstance(term.payload, int):
        return str(term.payload)
    return _quote(term.payload)


def render_query(query: Query) -> str:
    """Text form of a query; parse_query(render_query(q)) is structurally q."""
    lines = []
    head = f"{query.head}({', '.join(query.free_vars)})"
    for conjunct in query.conjuncts:
        body = ", ".join(
            ("" if lit.positive else "!")
            + f"{lit.atom.relation}({', '.join(render_term(t) for t in lit.atom.terms)})"
            for lit in conjunct.literals
        )
        lines.append(f"{head} :- {body}.")
    return "\n".join(lines) + "\n"


# --- single-atom evaluation --------------------------------------------------


def sols_atom(atom: Atom, db: Database) -> set[Assignment]:
    """All assignments of the atom's variables that send it into the database.

    Repeated variables impose equality between positions; constants act as
    selections.
    """
    relation = db.relations.get(atom.relation)
    if relation is None:
        raise UnknownRelation(f"relation {atom.relation} not in database")
    if relation.arity != len(atom.terms):
        raise ArityMismatch(
            f"atom {atom.relation}/{len(atom.terms)} vs relation arity {relation.arity}"
        )
    out: set[Assignment] = set()
    for row in relation.rows:
        bindings: dict[str, object] = {}
        ok = True
        for term, value in zip(atom.terms, row):
            if isinstance(term, Constant):
                interned = db.value(term.payload)
                if interned is None or interned != value:
                    ok = False
                    break
            else:
                bound = bindings.get(term.name)
                if bound is None:
                    bindings[term.name] = value
                elif bound != value:
                    ok = False
                    break
        if ok:
            out.add(Assignment(bindings))
    return out


def satisfies_literal(literal: Literal, assignment: Assignment, db: Database) -> bool:
    """Check one fully-bound literal against the database.

    A constant outside the active domain makes a positive literal false and a
    negative literal true.
    """
    relation = db.relations.get(literal.atom.relation)
    if relation is None:
        raise UnknownRelation(f"relation {literal.atom.relation} not in database")
    if relation.arity != len(literal.atom.terms):
        raise ArityMismatch(
            f"atom {literal.atom.relation}/{len(literal.atom.terms)} vs relation "
            f"arity {relation.arity}"
        )
    row = []
    for term in literal.atom.terms:
        if isinstance(term, Constant):
            value = db.value(term.payload)
            if value is None:
                return not literal.positive
        else:
            value = assignment[term.name]
        row.append(value)
    present = tuple(row) in relation.rows
    return present if literal.positive else not present
