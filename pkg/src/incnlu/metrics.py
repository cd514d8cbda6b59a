"""Order-aware class F1 (CO-MC F1) and intents accuracy.

True positives between a reference and a hypothesis class sequence are
counted with a Levenshtein-style table that only grows on a match and keeps
the best (maximum) of its three moves.  With zero boundaries this is the
longest common subsequence of the two sequences, so matches must appear in
the same order on both sides.

Note: the boundary cells are 0.  Initialising them to the row/column index,
as in the usual Levenshtein table, would count every unmatched class as a
true positive and push precision above 1.
"""

from __future__ import annotations

from collections import Counter
from collections.abc import Iterable, Sequence
from dataclasses import dataclass

from incnlu.seq2seq import ClassSequence


def true_positives(ref: Sequence, hyp: Sequence) -> int:
    """Number of in-order class matches between ``ref`` and ``hyp``."""
    r = list(ref)
    prev = [0] * (len(r) + 1)
    for h in hyp:
        cur = [0]
        for j, rj in enumerate(r, 1):
            cur.append(max(prev[j - 1] + (rj == h), prev[j], cur[j - 1]))
        prev = cur
    return prev[-1]


def _ratio(num: int, den: int, other_den: int) -> float:
    if den:
        return num / den
    # nothing predicted / nothing expected: perfect only if both sides are empty
    return 1.0 if other_den == 0 else 0.0


@dataclass(frozen=True)
class CorpusScores:
    """Micro-averaged counts; ``+`` merges two corpora."""

    true_positives: int = 0
    ref_len: int = 0
    hyp_len: int = 0
    pairs: int = 0

    def __add__(self, other: CorpusScores) -> CorpusScores:
        return CorpusScores(
            self.true_positives + other.true_positives,
            self.ref_len + other.ref_len,
            self.hyp_len + other.hyp_len,
            self.pairs + other.pairs,
        )

    @property
    def precision(self) -> float:
        return _ratio(self.true_positives, self.hyp_len, self.ref_len)

    @property
    def recall(self) -> float:
        return _ratio(self.true_positives, self.ref_len, self.hyp_len)

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r > 0 else 0.0


def pair_scores(ref: ClassSequence, hyp: ClassSequence) -> CorpusScores:
    return CorpusScores(true_positives(ref, hyp), len(ref), len(hyp), 1)


def co_mc_scores(pairs: Iterable[tuple[ClassSequence, ClassSequence]]) -> CorpusScores:
    """Sum true positives and lengths over ``(reference, hypothesis)`` pairs."""
    total = CorpusScores()
    for ref, hyp in pairs:
        total = total + pair_scores(ref, hyp)
    return total


def multiset_overlap(ref: Sequence, hyp: Sequence) -> int:
    """Order-free counterpart of ``true_positives`` (bag intersection size)."""
    return sum((Counter(ref) & Counter(hyp)).values())


def multiset_scores(pairs: Iterable[tuple[Sequence, Sequence]]) -> CorpusScores:
    total = CorpusScores()
    for ref, hyp in pairs:
        total = total + CorpusScores(multiset_overlap(ref, hyp), len(ref), len(hyp), 1)
    return total


def intents_match(ref: Iterable[str], hyp: Iterable[str]) -> bool:
    """All-or-nothing intent comparison, ignoring order."""
    return Counter(ref) == Counter(hyp)


def intents_accuracy(pairs: Iterable[tuple[Iterable[str], Iterable[str]]]) -> float:
    hits = total = 0
    for ref, hyp in pairs:
        hits += intents_match(ref, hyp)
        total += 1
    if not total:
        raise ValueError("intents accuracy of an empty corpus is undefined")
    return hits / total
