#!/usr/bin/env python3
"""Instance generators that embed classic hard problems into diversity.

Three constructions, each paired with the brute-force check it encodes:

  * independent set -> one binary relation per edge (query grows with the
    graph); reaching the threshold means answers pairwise differ everywhere;
  * independent set -> a single 5-column relation (fixed query shape), for
    graphs of maximum degree three;
  * list coloring -> a union of two disjuncts over a fixed database, k = 2.
"""

import random

from diverseq import (
    MIN,
    Graph,
    independent_set_to_diverse_query,
    independent_set_to_wide_relation,
    list_coloring_to_union_query,
    materialize_answers,
    solve_acq,
    solve_fo_diverse,
)
from diverseq.oracle import has_admissible_coloring, has_independent_set

pentagon = Graph.from_edges(5, [(1, 2), (2, 3), (3, 4), (4, 5), (1, 5)])

print("--- per-edge construction ---")
for s in (2, 3):
    fx = independent_set_to_diverse_query(pentagon, s)
    out = solve_acq(fx.query, fx.db, fx.k, fx.d_min, MIN)
    expected = has_independent_set(pentagon, s)
    print(f"independent set of size {s}: graph says {expected}, "
          f"diversity engine says {out.decision}")

print("--- wide-relation construction (degree <= 3) ---")
fx = independent_set_to_wide_relation(pentagon, 2)
for row in fx.db.relations["R"].sorted_rows():
    print("  row:", tuple(v.payload for v in row))
out = solve_acq(fx.query, fx.db, 2, fx.d_min, MIN, witness=True)
print("two rows differing in all 5 slots exist:", out.decision)

print("--- list-coloring construction ---")
rng = random.Random(12)
k33 = Graph.from_edges(6, [(u, v) for u in (1, 2, 3) for v in (4, 5, 6)])
for trial in range(3):
    lists = {v: frozenset(rng.sample([1, 2, 3], k=rng.randint(1, 3)))
             for v in range(1, 7)}
    fx = list_coloring_to_union_query(k33, lists)
    answers = materialize_answers(fx.query, fx.db)
    out = solve_fo_diverse(answers, fx.k, fx.d_sum, MIN)
    expected = has_admissible_coloring(k33, lists)
    shown = {v: sorted(c) for v, c in sorted(lists.items())}
    print(f"lists {shown}")
    print(f"  colorable={expected}, two answers at distance {fx.d_sum} "
          f"exist={out.decision}, answers={len(answers.rows)}")
