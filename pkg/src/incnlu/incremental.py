"""Prefix (partial-utterance) datasets and ASR partial alignment."""

from __future__ import annotations

import logging
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from pathlib import Path

from incnlu._io import dumps_line, iter_jsonl, write_atomic
from incnlu.corpus import AnnotatedUtterance, CorpusError
from incnlu.seq2seq import chunks_to_target, iob_chunks

log = logging.getLogger(__name__)

EXACT = "exact"
AT_LEAST = "at_least"


@dataclass(frozen=True)
class PartialRecord:
    tokens: tuple[str, ...]
    target: str
    is_full: bool = False

    def __len__(self) -> int:
        return len(self.tokens)


@dataclass(frozen=True)
class IncrementalSeries:
    """Ordered partials of one utterance; the last one is the full utterance."""

    utterance_id: str
    records: tuple[PartialRecord, ...]
    skipped: int = field(default=0, compare=False)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def __getitem__(self, k) -> PartialRecord:
        return self.records[k]

    @property
    def lengths(self) -> list[int]:
        return [len(r) for r in self.records]

    @property
    def full(self) -> PartialRecord:
        return self.records[-1]

    @property
    def n(self) -> int:
        return len(self.records[-1])


def generate_prefixes(u: AnnotatedUtterance) -> IncrementalSeries:
    """Split an utterance of n tokens into its n prefixes with truncated targets.

    A chunk cut by the prefix boundary contributes only the tokens present.
    Every prefix carries the full gold intents.
    """
    n = len(u.tokens)
    records = []
    for i in range(1, n + 1):
        target = chunks_to_target(u.intents, iob_chunks(u.tokens[:i], u.tags[:i]))
        records.append(PartialRecord(u.tokens[:i], target, is_full=i == n))
    return IncrementalSeries(u.id, tuple(records))


def align_asr_partials(
    asr_partials: Sequence[Sequence[str]], human_series: IncrementalSeries
) -> IncrementalSeries:
    """Give each ASR partial the target of the human prefix of equal length.

    Partials longer than the human transcript get the full target, as does
    the last partial, which is the recognizer's final transcript.  Empty
    partials are dropped and counted in ``skipped``.
    """
    by_len = {len(r): r.target for r in human_series.records}
    full_target = human_series.full.target
    kept = [tuple(p) for p in asr_partials if len(p) > 0]
    skipped = len(asr_partials) - len(kept)
    if skipped:
        log.warning("%s: skipped %d empty ASR partial(s)", human_series.utterance_id, skipped)
    records = []
    for k, toks in enumerate(kept):
        last = k == len(kept) - 1
        target = full_target if last else by_len.get(len(toks), full_target)
        records.append(PartialRecord(toks, target, is_full=last))
    return IncrementalSeries(human_series.utterance_id, tuple(records), skipped=skipped)


def prefix_length(n: int, percent: int) -> int:
    """Number of tokens in the first ``percent`` % of ``n``, floored, at least 1."""
    if not 0 < percent <= 100:
        raise ValueError(f"percent must be in (0, 100], got {percent}")
    return max(1, percent * n // 100)


def select_prefix(series: IncrementalSeries, percent: int, mode: str = EXACT) -> PartialRecord:
    """Pick the record representing the first ``percent`` % of the utterance.

    ``exact`` returns the record of length i (prefix series); ``at_least``
    returns the first record whose length is >= i, falling back to the last
    record (ASR series).
    """
    if not series.records:
        raise ValueError("empty series")
    i = prefix_length(series.n, percent)
    if mode == EXACT:
        for r in series.records:
            if len(r) == i:
                return r
        raise ValueError(
            f"series {series.utterance_id!r} has no record of length {i} (not a prefix series?)"
        )
    if mode == AT_LEAST:
        for r in series.records:
            if len(r) >= i:
                return r
        return series.records[-1]
    raise ValueError(f"unknown mode {mode!r}")


# -- incremental dataset file: {utterance_id, index, tokens, target, is_full} per line


def series_to_dicts(series: IncrementalSeries) -> list[dict]:
    return [
        {
            "utterance_id": series.utterance_id,
            "index": k,
            "tokens": list(r.tokens),
            "target": r.target,
            "is_full": r.is_full,
        }
        for k, r in enumerate(series.records, 1)
    ]


def format_series(all_series: Iterable[IncrementalSeries]) -> str:
    return "".join(dumps_line(d) for s in all_series for d in series_to_dicts(s))


def write_series(path: str | Path, all_series: Iterable[IncrementalSeries]) -> None:
    write_atomic(path, format_series(all_series))


def read_series(path: str | Path) -> list[IncrementalSeries]:
    """Read an incremental dataset file, grouping lines by utterance in file order."""
    grouped: dict[str, list[PartialRecord]] = {}
    try:
        for lineno, obj in iter_jsonl(path):
            try:
                toks = obj["tokens"]
                if isinstance(toks, str):
                    toks = toks.split()
                rec = PartialRecord(tuple(toks), obj["target"], bool(obj.get("is_full", False)))
                grouped.setdefault(str(obj["utterance_id"]), []).append(rec)
            except (KeyError, TypeError) as e:
                raise CorpusError(f"bad incremental record: {e}", lineno) from None
    except ValueError as e:
        if isinstance(e, CorpusError):
            raise
        raise CorpusError(f"{path}: {e}") from None
    return [IncrementalSeries(uid, tuple(recs)) for uid, recs in grouped.items()]
