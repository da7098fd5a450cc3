#!/usr/bin/env python3
"""Driving the command-line frontend.

Writes a database and a query to a temporary directory, then runs the same
decision through several engines. Exit codes: 0 = yes, 1 = no, 2 = error.
"""

import json
import subprocess
import sys
import tempfile
from pathlib import Path

workdir = Path(tempfile.mkdtemp(prefix="diverseq-demo-"))
(workdir / "db.facts").write_text(
    "\n".join([
        "# people and the teams they can join",
        'Person("ana").', 'Person("bo").', 'Person("cy").',
        'CanJoin("ana", 1).', 'CanJoin("ana", 2).',
        'CanJoin("bo", 1).', 'CanJoin("cy", 3).',
    ]) + "\n"
)
(workdir / "query.dq").write_text("Q(p, t) :- Person(p), CanJoin(p, t).\n")

base = [sys.executable, "-m", "diverseq.cli",
        "--db", str(workdir / "db.facts"),
        "--query", str(workdir / "query.dq")]

print("--- decide: two answers with sum diversity >= 4? ---")
proc = subprocess.run(base + ["--k", "2", "--d", "4", "--output", "json"],
                      capture_output=True, text=True)
print("exit code:", proc.returncode)
print(json.dumps(json.loads(proc.stdout), indent=2))

print("--- maximize with a witness, text output ---")
proc = subprocess.run(base + ["--k", "3", "--d", "max", "--witness"],
                      capture_output=True, text=True)
print(proc.stdout, end="")

print("--- force a specific engine ---")
for mode in ("acq", "fo-kernel", "bruteforce"):
    proc = subprocess.run(
        base + ["--k", "2", "--d", "3", "--mode", mode, "--output", "json"],
        capture_output=True, text=True,
    )
    report = json.loads(proc.stdout)
    print(f"{mode:11s} decision={report['decision']} "
          f"diversity={report['diversity']}")
