#!/usr/bin/env python3
"""Values, assignments, Hamming distances, and diversity aggregators.

The whole library is built on one notion: the diversity of k answers is an
aggregate (sum or min, usually) of the Hamming distances of all k(k-1)/2
pairs, counted over the query's free variables.
"""

from diverseq import (
    MIN,
    SUM,
    Assignment,
    Database,
    custom_aggregator,
    diversity_of_set,
    hamming_distance,
)

# Values live inside a database and are interned: equal payloads are the same
# value, and iteration order follows load order.
db = Database.from_rows({"Cars": [
    ("suv", "red", 2021),
    ("suv", "blue", 2021),
    ("van", "red", 2024),
]})
print("active domain:", [v.payload for v in db.domain])

# Assignments map variables to values. These three could be query answers
# over the free variables (model, color, year).
rows = db.relations["Cars"].sorted_rows()
answers = [
    Assignment(dict(zip(("model", "color", "year"), row))) for row in rows
]
for a in answers:
    print("answer:", a)

xs = ("model", "color", "year")
print("distance answer0 vs answer1:", hamming_distance(answers[0], answers[1], xs))
print("distance answer0 vs answer2:", hamming_distance(answers[0], answers[2], xs))

# Diversity of the whole set, under both standard aggregators.
print("sum diversity:", diversity_of_set(SUM, answers, xs))
print("min diversity:", diversity_of_set(MIN, answers, xs))

# Custom aggregators receive the sorted distance multiset, so they are
# symmetric by construction. Flag them monotone to use the kernel pipeline.
median = custom_aggregator(lambda ds: ds[len(ds) // 2], monotone=True, name="median")
print("median pairwise distance:", diversity_of_set(median, answers, xs))

# A single answer has no pairs: sum says 0, min says positive infinity.
print("k=1 sum:", diversity_of_set(SUM, answers[:1], xs))
print("k=1 min:", diversity_of_set(MIN, answers[:1], xs))
