"""Latency of the baseline on its two most demanding synthetic utterances.

Uses the budget and duration from ``[tool.incnlu.bench]`` in pyproject.toml
unless overridden.

    python3 scripts/bench_baseline.py --duration 900 --cpu 0
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from incnlu.adapter import bench_latency, pin_to_cpu
from incnlu.baseline import train_baseline
from incnlu.synthetic import long_utterance, make_corpus

PYPROJECT = Path(__file__).resolve().parents[1] / "pyproject.toml"


def main(argv=None) -> int:
    cfg = tomllib.loads(PYPROJECT.read_text())["tool"]["incnlu"]["bench"]
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--duration", type=float, default=cfg["duration_s"], help="seconds")
    ap.add_argument("--budget-ms", type=float, default=cfg["budget_ms"])
    ap.add_argument("--train-size", type=int, default=4478)
    ap.add_argument("--cpu", type=int)
    args = ap.parse_args(argv)

    if args.cpu is not None:
        pin_to_cpu(args.cpu)
    model = train_baseline(make_corpus(args.train_size, seed=0))
    utts = [long_utterance(46, seed=1), long_utterance(38, seed=2)]
    report = bench_latency(
        lambda _uid, toks: model.predict(toks),
        [(u.id, list(u.tokens)) for u in utts],
        args.duration,
        budget_ms=args.budget_ms,
    )
    json.dump(report.to_dict(), sys.stdout, indent=2)
    sys.stdout.write("\n")
    return 0 if report.within_budget else 1


if __name__ == "__main__":
    raise SystemExit(main())
