"""Training-free-dependency baseline: unigram naive Bayes intents plus tag lookup.

Deliberately weak.  It exists so that every pipeline stage (incremental
hypotheses, confidence traces, latency measurement) can run end to end
without a neural model.
"""

from __future__ import annotations

import math
from collections import Counter
from collections.abc import Container, Iterable, Sequence
from dataclasses import dataclass, field
from pathlib import Path

from incnlu._io import dumps_line, iter_jsonl, write_atomic
from incnlu.corpus import INTENT_SEP, AnnotatedUtterance, CorpusError, SlotLexicon
from incnlu.evaluation import Hypothesis, HypothesisRecord
from incnlu.incremental import IncrementalSeries
from incnlu.seq2seq import chunks_to_target, iob_chunks, parse_target

FORMAT = "incnlu-baseline"
VERSION = 1


def repair_iob(tags: Sequence[str]) -> list[str]:
    """Rewrite any ``I-x`` that does not continue an ``x`` chunk as ``B-x``."""
    out = []
    prev = "O"
    for tag in tags:
        if tag.startswith("I-") and prev[2:] != tag[2:]:
            tag = "B-" + tag[2:]
        out.append(tag)
        prev = tag
    return out


@dataclass
class BaselineModel:
    alpha: float
    intent_counts: dict[str, int]
    token_counts: dict[str, Counter]
    tag_counts: dict[str, Counter]
    _log_prior: dict[str, float] = field(init=False, repr=False)
    _log_lik: dict[str, dict[str, float]] = field(init=False, repr=False)
    _tag_of: dict[str, str] = field(init=False, repr=False)

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError(f"alpha must be > 0, got {self.alpha}")
        if not self.intent_counts:
            raise ValueError("model has no intent classes")
        self.classes = sorted(self.intent_counts)
        n = sum(self.intent_counts.values())
        vocab = sorted({w for c in self.token_counts.values() for w in c})
        self.vocab = frozenset(vocab)
        self._log_prior = {c: math.log(self.intent_counts[c] / n) for c in self.classes}
        self._log_lik = {}
        for c in self.classes:
            counts = self.token_counts.get(c, Counter())
            denom = math.log(sum(counts.values()) + self.alpha * len(vocab))
            self._log_lik[c] = {w: math.log(counts[w] + self.alpha) - denom for w in vocab}
        # most frequent tag per token, ties -> lexicographically smallest
        self._tag_of = {
            tok: min(tags, key=lambda t: (-tags[t], t)) for tok, tags in self.tag_counts.items()
        }

    @property
    def slots(self) -> SlotLexicon:
        return SlotLexicon(frozenset(t[2:] for tags in self.tag_counts.values() for t in tags if t != "O"))

    def posterior(self, tokens: Sequence[str]) -> dict[str, float]:
        """Intent-label posterior. Tokens never seen in training are ignored."""
        known = [w for w in tokens if w in self.vocab]
        scores = {c: self._log_prior[c] + sum(self._log_lik[c][w] for w in known) for c in self.classes}
        top = max(scores.values())
        z = sum(math.exp(s - top) for s in scores.values())
        return {c: math.exp(s - top) / z for c, s in scores.items()}

    def tags(self, tokens: Sequence[str]) -> list[str]:
        return repair_iob([self._tag_of.get(w, "O") for w in tokens])

    def predict(self, tokens: Sequence[str]) -> Hypothesis:
        post = self.posterior(tokens)
        # classes are sorted, so max() keeps the lexicographically first on ties
        label = max(self.classes, key=lambda c: post[c])
        target = chunks_to_target(label.split(INTENT_SEP), iob_chunks(tokens, self.tags(tokens)))
        return Hypothesis(target, min(1.0, post[label]))

    def dump(self) -> str:
        lines = [dumps_line({"format": FORMAT, "version": VERSION, "alpha": self.alpha})]
        for c in self.classes:
            lines.append(dumps_line({"kind": "intent", "label": c, "count": self.intent_counts[c]}))
        for c in self.classes:
            counts = self.token_counts.get(c, Counter())
            for w in sorted(counts):
                lines.append(dumps_line({"kind": "token", "label": c, "token": w, "count": counts[w]}))
        for w in sorted(self.tag_counts):
            for t in sorted(self.tag_counts[w]):
                lines.append(dumps_line({"kind": "tag", "token": w, "tag": t, "count": self.tag_counts[w][t]}))
        return "".join(lines)

    def save(self, path: str | Path) -> None:
        write_atomic(path, self.dump())

    @classmethod
    def load(cls, path: str | Path) -> BaselineModel:
        header = None
        intents: dict[str, int] = {}
        tokens: dict[str, Counter] = {}
        tags: dict[str, Counter] = {}
        for lineno, obj in iter_jsonl(path):
            if header is None:
                if obj.get("format") != FORMAT or obj.get("version") != VERSION:
                    raise CorpusError(f"not a {FORMAT} v{VERSION} model dump", lineno)
                header = obj
                continue
            kind = obj.get("kind")
            if kind == "intent":
                intents[obj["label"]] = obj["count"]
            elif kind == "token":
                tokens.setdefault(obj["label"], Counter())[obj["token"]] = obj["count"]
            elif kind == "tag":
                tags.setdefault(obj["token"], Counter())[obj["tag"]] = obj["count"]
            else:
                raise CorpusError(f"unknown record kind {kind!r}", lineno)
        if header is None:
            raise CorpusError(f"{path}: empty model file")
        return cls(header["alpha"], intents, tokens, tags)


def train_baseline(records: Iterable[AnnotatedUtterance], alpha: float = 1.0) -> BaselineModel:
    """Count intents, per-intent tokens and per-token tags in one pass.

    Multi-intent utterances form their own class under the ``#``-joined label.
    """
    if alpha <= 0:
        raise ValueError(f"alpha must be > 0, got {alpha}")
    intents: Counter = Counter()
    tokens: dict[str, Counter] = {}
    tags: dict[str, Counter] = {}
    for r in records:
        label = r.intent_label
        intents[label] += 1
        tokens.setdefault(label, Counter()).update(r.tokens)
        for w, t in zip(r.tokens, r.tags):
            tags.setdefault(w, Counter())[t] += 1
    if not intents:
        raise ValueError("cannot train on an empty corpus")
    return BaselineModel(alpha, dict(intents), tokens, tags)


def train_baseline_from_series(
    all_series: Iterable[IncrementalSeries], lex: Container[str], alpha: float = 1.0
) -> BaselineModel:
    """Train on parallel (tokens, target) records, e.g. noisy or ASR datasets.

    Intent labels come from the target's first token.  Tag statistics are
    recovered from the target: a source token equal to a not-yet-used slot
    value gets that value's ``B-``/``I-`` tag, every other token counts as
    ``O``.
    """
    if alpha <= 0:
        raise ValueError(f"alpha must be > 0, got {alpha}")
    intents: Counter = Counter()
    tokens: dict[str, Counter] = {}
    tags: dict[str, Counter] = {}
    for s in all_series:
        for r in s.records:
            seq = parse_target(r.target, lex)
            label = INTENT_SEP.join(seq.intents)
            if not label:
                continue
            intents[label] += 1
            tokens.setdefault(label, Counter()).update(r.tokens)
            pending: dict[str, list[str]] = {}
            for p in seq.params:
                for k, v in enumerate(p.values):
                    pending.setdefault(v, []).append(("B-" if k == 0 else "I-") + p.slot)
            for w in r.tokens:
                tag = pending[w].pop(0) if pending.get(w) else "O"
                tags.setdefault(w, Counter())[tag] += 1
    if not intents:
        raise ValueError("cannot train on an empty corpus")
    return BaselineModel(alpha, dict(intents), tokens, tags)


def predict(model: BaselineModel, prefix: Sequence[str]) -> Hypothesis:
    return model.predict(prefix)


def run_on_series(model: BaselineModel, all_series: Iterable[IncrementalSeries]) -> list[HypothesisRecord]:
    """One hypothesis per partial record, in series order."""
    return [
        HypothesisRecord(s.utterance_id, len(r), model.predict(r.tokens))
        for s in all_series
        for r in s.records
    ]
