"""Regenerate the golden corpus under tests/golden/.

Usage: python3 tests/make_goldens.py

Each case gets db.facts, query.dq, config.json, and expected.json (the CLI's
canonical JSON output with the volatile timing field removed).
"""

from __future__ import annotations

import json
import os
import sys

sys.path.insert(0, os.path.dirname(__file__))

from diverseq.cli import RunConfig, canonical_json, run
from diverseq.dbio import dump_database, dump_query
from golden_fixtures import golden_cases

GOLDEN_DIR = os.path.join(os.path.dirname(__file__), "golden")


def main() -> None:
    for case in golden_cases():
        case_dir = os.path.join(GOLDEN_DIR, case.name)
        os.makedirs(case_dir, exist_ok=True)
        db_path = os.path.join(case_dir, "db.facts")
        query_path = os.path.join(case_dir, "query.dq")
        dump_database(case.db, db_path)
        dump_query(case.query, query_path)
        config = {
            "k": case.k,
            "d": case.d,
            "aggregator": case.aggregator,
            "witness": case.witness,
            "modes": list(case.modes),
        }
        with open(os.path.join(case_dir, "config.json"), "w", encoding="utf-8") as fh:
            json.dump(config, fh, indent=2, sort_keys=True)
            fh.write("\n")
        code, report = run(RunConfig(
            db_path=db_path,
            query_path=query_path,
            k=case.k,
            d=case.d,
            aggregator=case.aggregator,
            witness=case.witness,
        ))
        if "error" in report:
            raise SystemExit(f"{case.name}: {report['error']}")
        with open(os.path.join(case_dir, "expected.json"), "w", encoding="utf-8") as fh:
            fh.write(canonical_json(report, drop_volatile=True))
        print(f"{case.name}: exit={code} decision={report['decision']} "
              f"diversity={report['diversity']}")


if __name__ == "__main__":
    main()
