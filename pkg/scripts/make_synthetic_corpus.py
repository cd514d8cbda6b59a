"""Write seeded ATIS-style train/valid/test splits plus an external filler stream.

    python3 scripts/make_synthetic_corpus.py work/ --train 4478 --valid 500 --test 893
"""

from __future__ import annotations

import argparse
import logging
from pathlib import Path

from incnlu.corpus import format_tsv
from incnlu.synthetic import external_stream, make_corpus

log = logging.getLogger("make_synthetic_corpus")


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("outdir", type=Path)
    ap.add_argument("--train", type=int, default=4478)
    ap.add_argument("--valid", type=int, default=500)
    ap.add_argument("--test", type=int, default=893)
    ap.add_argument("--external", type=int, default=200_000, help="tokens in the filler stream")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    args.outdir.mkdir(parents=True, exist_ok=True)
    for k, (split, size) in enumerate([("train", args.train), ("valid", args.valid), ("test", args.test)]):
        records = make_corpus(size, seed=args.seed * 10 + k, prefix=split)
        (args.outdir / f"{split}.tsv").write_text(format_tsv(records), encoding="utf-8")
        log.info("%s: %d utterances", split, size)
    tokens = external_stream(args.external, seed=args.seed * 10 + 9)
    (args.outdir / "external.txt").write_text(" ".join(tokens) + "\n", encoding="utf-8")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
