"""End-to-end experiment: clean vs. noisy training, partial and confidence evaluation.

Builds synthetic splits (unless --data points at existing train/test files),
then drives the ``incnlu`` CLI through every stage and prints the report
tables.  All artifacts land in the work directory.

    python3 scripts/run_pipeline.py work/ --seed 0
"""

from __future__ import annotations

import argparse
import logging
import shutil
import sys
from pathlib import Path

from incnlu.cli import main as incnlu

log = logging.getLogger("run_pipeline")

HERE = Path(__file__).resolve().parent


def run(*args) -> None:
    argv = [str(a) for a in args]
    log.info("incnlu %s", " ".join(argv))
    code = incnlu(argv)
    if code:
        sys.exit(code)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("workdir", type=Path)
    ap.add_argument("--data", type=Path, help="directory with train.tsv, test.tsv and external.txt")
    ap.add_argument("--train-size", type=int, default=1000)
    ap.add_argument("--test-size", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--tau", type=float, default=0.08)
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    w = args.workdir
    w.mkdir(parents=True, exist_ok=True)
    if args.data:
        for name in ("train.tsv", "test.tsv", "external.txt"):
            shutil.copyfile(args.data / name, w / name)
    else:
        sys.path.insert(0, str(HERE))
        from make_synthetic_corpus import main as make_data

        make_data([str(w), "--train", str(args.train_size), "--valid", "0",
                   "--test", str(args.test_size), "--seed", str(args.seed)])

    run("convert", w / "test.tsv", "--src", w / "test.src", "--tgt", w / "test.tgt")
    run("gen-incremental", w / "train.tsv", "-o", w / "train.inc.jsonl")
    run("gen-incremental", w / "test.tsv", "-o", w / "test.inc.jsonl")
    run("build-vocab", "--train", w / "train.tsv", "--external", w / "external.txt", "-o", w / "vocab.txt")
    run("add-noise", w / "train.inc.jsonl", "-o", w / "train.noisy.jsonl",
        "--vocab", w / "vocab.txt", "--seed", args.seed, "--tau", args.tau)

    for variant, train in [("clean", "train.inc.jsonl"), ("noisy", "train.noisy.jsonl")]:
        hyps = w / f"hyps.{variant}.jsonl"
        run("run-baseline", "--train", w / train, "--lexicon", w / "train.tsv",
            "--input", w / "test.inc.jsonl", "-o", hyps, "--save-model", w / f"model.{variant}.jsonl")
        print(f"\n== trained on {variant} incremental data: first p % of tokens")
        run("eval-partial", "--gold", w / "test.inc.jsonl", "--hyps", hyps, "--lexicon", w / "train.tsv",
            "-o", w / f"partial.{variant}.json", "--table")
        print(f"\n== trained on {variant} incremental data: confidence thresholds")
        run("eval-confidence", "--gold", w / "test.inc.jsonl", "--hyps", hyps,
            "-o", w / f"confidence.{variant}.json", "--table")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
