"""Serve a saved baseline model over the line protocol on stdin/stdout.

    python -m incnlu.serve model.jsonl
"""

from __future__ import annotations

import argparse
import json
import sys

from incnlu.baseline import BaselineModel


def serve(model: BaselineModel, stdin=sys.stdin, stdout=sys.stdout) -> int:
    for line in stdin:
        if not line.strip():
            continue
        req = json.loads(line)
        hyp = model.predict(req["tokens"])
        resp = {
            "utterance_id": req["utterance_id"],
            "prefix_len": req["prefix_len"],
            "target": hyp.target_text,
            "intent_confidence": hyp.intent_confidence,
        }
        stdout.write(json.dumps(resp, ensure_ascii=False) + "\n")
        stdout.flush()
    return 0


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="python -m incnlu.serve", description=__doc__)
    ap.add_argument("model", help="baseline model dump")
    args = ap.parse_args(argv)
    return serve(BaselineModel.load(args.model))


if __name__ == "__main__":
    sys.exit(main())
