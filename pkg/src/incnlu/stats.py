from __future__ import annotations

from collections import Counter
from collections.abc import Sequence

from incnlu.corpus import AnnotatedUtterance, slot_lexicon
from incnlu.seq2seq import iob_chunks


def intent_distribution(records: Sequence[AnnotatedUtterance]) -> list[tuple[str, int, float]]:
    """``(label, count, percent)`` per ``#``-joined intent label, most frequent first.

    Labels are kept as written, so ``a#b`` and ``b#a`` are counted apart.
    """
    counts = Counter(r.intent_label for r in records)
    n = len(records)
    return [
        (label, c, round(100.0 * c / n, 2))
        for label, c in sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    ]


def corpus_stats(records: Sequence[AnnotatedUtterance]) -> dict:
    n = len(records)
    if not n:
        return {"utterances": 0}
    n_params = [len(iob_chunks(r.tokens, r.tags)) for r in records]
    by_intent_count = Counter(len(r.intents) for r in records)
    return {
        "utterances": n,
        "avg_tokens": round(sum(len(r) for r in records) / n, 2),
        "unique_intents": len({i for r in records for i in r.intents}),
        "utterances_by_intent_count": {str(k): by_intent_count[k] for k in sorted(by_intent_count)},
        "slots": len(slot_lexicon(records)),
        "avg_params": round(sum(n_params) / n, 2),
        "rows": [
            {"intent": label, "count": c, "percent": p}
            for label, c, p in intent_distribution(records)
        ],
    }
