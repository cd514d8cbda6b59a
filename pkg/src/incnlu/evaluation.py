"""Partial-utterance and confidence-based evaluation schemes."""

from __future__ import annotations

import math
from collections.abc import Container, Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from pathlib import Path

from incnlu._io import dumps_line, iter_jsonl, write_atomic
from incnlu.corpus import CorpusError
from incnlu.incremental import EXACT, IncrementalSeries, select_prefix
from incnlu.metrics import CorpusScores, co_mc_scores, intents_accuracy
from incnlu.seq2seq import parse_target, target_intents

DEFAULT_PERCENTS = (100, 75, 50, 25)
DEFAULT_THRESHOLDS = (0.95, 0.90, 0.85, 0.80)


def pct(x: float) -> float:
    """Fraction -> percentage with two decimals, as printed in result tables."""
    return round(100.0 * x, 2)


@dataclass(frozen=True)
class Hypothesis:
    target_text: str
    intent_confidence: float

    def __post_init__(self):
        if not 0.0 <= self.intent_confidence <= 1.0:
            raise ValueError(f"intent_confidence out of [0, 1]: {self.intent_confidence}")


@dataclass(frozen=True)
class HypothesisRecord:
    utterance_id: str
    prefix_len: int
    hypothesis: Hypothesis

    def to_dict(self) -> dict:
        return {
            "utterance_id": self.utterance_id,
            "prefix_len": self.prefix_len,
            "target": self.hypothesis.target_text,
            "intent_confidence": self.hypothesis.intent_confidence,
        }


def format_hypotheses(records: Iterable[HypothesisRecord]) -> str:
    return "".join(dumps_line(r.to_dict()) for r in records)


def write_hypotheses(path: str | Path, records: Iterable[HypothesisRecord]) -> None:
    write_atomic(path, format_hypotheses(records))


def hypothesis_from_dict(obj: Mapping) -> Hypothesis:
    conf = obj["intent_confidence"]
    if isinstance(conf, bool) or not isinstance(conf, (int, float)):
        raise TypeError(f"intent_confidence must be a number, got {conf!r}")
    target = obj["target"]
    if not isinstance(target, str):
        raise TypeError(f"target must be a string, got {target!r}")
    return Hypothesis(target, float(conf))


def read_hypotheses(path: str | Path) -> list[HypothesisRecord]:
    """Hypothesis file lines in file (= emission) order."""
    out = []
    try:
        for lineno, obj in iter_jsonl(path):
            try:
                out.append(
                    HypothesisRecord(str(obj["utterance_id"]), int(obj["prefix_len"]), hypothesis_from_dict(obj))
                )
            except (KeyError, TypeError, ValueError) as e:
                raise CorpusError(f"bad hypothesis record: {e}", lineno) from None
    except ValueError as e:
        if isinstance(e, CorpusError):
            raise
        raise CorpusError(f"{path}: {e}") from None
    return out


def hypothesis_map(records: Iterable[HypothesisRecord]) -> dict[tuple[str, int], Hypothesis]:
    """Key by ``(utterance_id, prefix_len)``; the first record of a repeated key wins."""
    table: dict[tuple[str, int], Hypothesis] = {}
    for r in records:
        table.setdefault((r.utterance_id, r.prefix_len), r.hypothesis)
    return table


# -- partial utterances processing


class MissingHypotheses(LookupError):
    def __init__(self, missing: list[tuple[str, int]]):
        self.missing = missing
        super().__init__(f"missing hypotheses for {len(missing)} prefix(es): {missing}")


@dataclass(frozen=True)
class PartialRow:
    percent: int
    scores: CorpusScores
    intents_accuracy: float

    def to_dict(self) -> dict:
        s = self.scores
        return {
            "percent": self.percent,
            "tp": s.true_positives,
            "ref_len": s.ref_len,
            "hyp_len": s.hyp_len,
            "precision": pct(s.precision),
            "recall": pct(s.recall),
            "f1": pct(s.f1),
            "intents_accuracy": pct(self.intents_accuracy),
            "pairs": s.pairs,
        }


@dataclass(frozen=True)
class ConfidenceRow:
    threshold: float
    intents_accuracy: float
    token_usage: float  # mean percentage of tokens used, in (0, 100]
    utterances: int

    def to_dict(self) -> dict:
        return {
            "threshold": self.threshold,
            "intents_accuracy": pct(self.intents_accuracy),
            "token_usage": round(self.token_usage, 2),
            "utterances": self.utterances,
        }


@dataclass(frozen=True)
class EvalReport:
    scheme: str
    rows: tuple = ()
    meta: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"scheme": self.scheme, **self.meta, "rows": [r.to_dict() for r in self.rows]}

    def render_table(self) -> str:
        return render_table(self.to_dict())


def render_table(report: Mapping) -> str:
    """Aligned plain-text table for a report dict (``rows`` list or single row)."""
    rows = report.get("rows") or [{k: v for k, v in report.items() if not isinstance(v, (list, dict))}]
    cols = list(rows[0])
    cells = [[_cell(r.get(c)) for c in cols] for r in rows]
    widths = [max(len(c), *(len(row[k]) for row in cells)) for k, c in enumerate(cols)]
    lines = ["  ".join(c.rjust(w) for c, w in zip(cols, widths))]
    lines.append("  ".join("-" * w for w in widths))
    lines += ["  ".join(v.rjust(w) for v, w in zip(row, widths)) for row in cells]
    return "\n".join(lines) + "\n"


def _cell(v) -> str:
    if isinstance(v, float):
        return f"{v:.2f}"
    return str(v)


def evaluate_partial(
    gold: Sequence[IncrementalSeries],
    hyps: Mapping[tuple[str, int], Hypothesis],
    percents: Sequence[int] = DEFAULT_PERCENTS,
    mode: str = EXACT,
    lex: Container[str] = frozenset(),
) -> EvalReport:
    """Score the hypotheses for the first p % of every utterance, for each p.

    Raises:
        MissingHypotheses: listing every ``(utterance_id, prefix_len)`` that was
            selected but has no hypothesis.
    """
    selected = {p: [(s, select_prefix(s, p, mode)) for s in gold] for p in percents}
    missing = sorted(
        {(s.utterance_id, len(r)) for picks in selected.values() for s, r in picks}
        - set(hyps)
    )
    if missing:
        raise MissingHypotheses(missing)
    rows = []
    for p in percents:
        pairs = []
        intent_pairs = []
        for s, rec in selected[p]:
            hyp = hyps[(s.utterance_id, len(rec))]
            ref_cls = parse_target(rec.target, lex)
            hyp_cls = parse_target(hyp.target_text, lex)
            pairs.append((ref_cls, hyp_cls))
            intent_pairs.append((ref_cls.intents, hyp_cls.intents))
        acc = intents_accuracy(intent_pairs) if intent_pairs else 0.0
        rows.append(PartialRow(p, co_mc_scores(pairs), acc))
    return EvalReport("partial", tuple(rows), {"mode": mode})


# -- confidence based processing


@dataclass(frozen=True)
class ConfidenceTrace:
    """Hypotheses for successive partials of one utterance, in emission order."""

    utterance_id: str
    entries: tuple[tuple[int, Hypothesis], ...]
    n: int

    def __post_init__(self):
        if not self.entries:
            raise ValueError(f"trace {self.utterance_id!r} is empty")
        if self.entries[-1][0] != self.n:
            raise ValueError(
                f"trace {self.utterance_id!r} lacks its full-utterance entry "
                f"(last length {self.entries[-1][0]}, expected {self.n})"
            )

    def decide(self, threshold: float) -> tuple[int, Hypothesis]:
        """First entry confident enough, else the full utterance."""
        for length, hyp in self.entries:
            if hyp.intent_confidence >= threshold:
                return length, hyp
        return self.entries[-1]


def build_traces(
    records: Iterable[HypothesisRecord], gold: Sequence[IncrementalSeries]
) -> list[ConfidenceTrace]:
    """Group hypothesis records per utterance (file order kept) into traces.

    The full length of each trace is the token length of the gold series'
    last record.
    """
    grouped: dict[str, list[tuple[int, Hypothesis]]] = {}
    for r in records:
        grouped.setdefault(r.utterance_id, []).append((r.prefix_len, r.hypothesis))
    traces = []
    for s in gold:
        if s.utterance_id not in grouped:
            raise ValueError(f"no hypotheses for utterance {s.utterance_id!r}")
        traces.append(ConfidenceTrace(s.utterance_id, tuple(grouped[s.utterance_id]), s.n))
    return traces


def evaluate_confidence(
    traces: Sequence[ConfidenceTrace],
    gold_intents: Mapping[str, Sequence[str]],
    thresholds: Sequence[float] = DEFAULT_THRESHOLDS,
) -> EvalReport:
    """Intents accuracy and mean token usage when stopping at the first confident partial."""
    if not traces:
        raise ValueError("no traces")
    rows = []
    for theta in thresholds:
        intent_pairs = []
        usage = []
        for t in traces:
            length, hyp = t.decide(theta)
            intent_pairs.append((gold_intents[t.utterance_id], target_intents(hyp.target_text)))
            usage.append(min(100.0, 100.0 * length / t.n))
        rows.append(
            ConfidenceRow(theta, intents_accuracy(intent_pairs), math.fsum(usage) / len(traces), len(traces))
        )
    return EvalReport("confidence", tuple(rows))
