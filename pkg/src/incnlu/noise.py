"""ASR-like artificial noise: word substitution, insertion and deletion.

Each token position is touched with probability ``tau`` on average.  Shorter
words are chosen more often for substitution and deletion; replacement and
inserted words are sampled from a vocabulary, favouring words that sound like
(here: are spelled like) the word they stand next to.
"""

from __future__ import annotations

import hashlib
from collections import Counter
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from incnlu._io import write_atomic

SUBSTITUTE = "sub"
INSERT = "ins"
DELETE = "del"
OPS = (SUBSTITUTE, INSERT, DELETE)

# Floor on sampling weight so acoustically unrelated words stay reachable.
MIN_WEIGHT = 0.01
DEFAULT_VOCAB_SIZE = 10_000


@dataclass(frozen=True)
class NoiseConfig:
    tau: float = 0.08
    op_weights: tuple[float, float, float] = (5.0, 1.0, 1.0)
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.tau <= 1.0:
            raise ValueError(f"tau must be in [0, 1], got {self.tau}")
        if len(self.op_weights) != 3 or any(w <= 0 for w in self.op_weights):
            raise ValueError(f"op_weights must be three positive numbers, got {self.op_weights}")

    @property
    def op_probs(self) -> tuple[float, float, float]:
        total = sum(self.op_weights)
        return tuple(w / total for w in self.op_weights)


@dataclass(frozen=True)
class Vocabulary:
    """Word pool for substitutions and insertions.

    The first ``n_in_domain`` words come from the training corpus, the rest
    are filler words from an external token stream.
    """

    words: tuple[str, ...]
    n_in_domain: int | None = None
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "words", tuple(self.words))
        index = {w: k for k, w in enumerate(self.words)}
        if len(index) != len(self.words):
            raise ValueError("vocabulary contains duplicates")
        object.__setattr__(self, "_index", index)
        if self.n_in_domain is None:
            object.__setattr__(self, "n_in_domain", len(self.words))

    def __len__(self) -> int:
        return len(self.words)

    def __contains__(self, word: object) -> bool:
        return word in self._index

    def in_domain(self, word: str) -> bool:
        return self._index.get(word, len(self.words)) < self.n_in_domain

    def save(self, path: str | Path) -> None:
        write_atomic(path, "".join(w + "\n" for w in self.words))

    @classmethod
    def load(cls, path: str | Path) -> Vocabulary:
        with open(path, encoding="utf-8") as f:
            words = [line.strip() for line in f]
        return cls(tuple(w for w in words if w))


def build_vocabulary(
    train_tokens: Iterable[str],
    external_tokens: Mapping[str, int] | Iterable[str] = (),
    target_size: int = DEFAULT_VOCAB_SIZE,
) -> Vocabulary:
    """All training tokens, topped up with the most frequent unseen external tokens.

    Training tokens are never dropped, even if they alone exceed
    ``target_size``.  Both groups are ordered by descending frequency with
    ties broken lexicographically.
    """
    if target_size < 0:
        raise ValueError("target_size must be >= 0")
    train = Counter(train_tokens)
    external = external_tokens if isinstance(external_tokens, Mapping) else Counter(external_tokens)
    words = sorted(train, key=lambda w: (-train[w], w))
    room = target_size - len(words)
    if room > 0:
        fillers = sorted((w for w in external if w not in train), key=lambda w: (-external[w], w))
        words.extend(fillers[:room])
    return Vocabulary(tuple(words), n_in_domain=len(train))


def edit_distance(a: str, b: str) -> int:
    """Unit-cost character Levenshtein distance."""
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def acoustic_similarity(a: str, b: str) -> float:
    """Similarity in [0, 1] from normalized character edit distance.

    A spelling-based stand-in for acoustic confusability; 1 means identical.
    """
    if not a or not b:
        raise ValueError("tokens must be nonempty")
    return 1.0 - edit_distance(a, b) / max(len(a), len(b))


def derive_seed(seed: int, *keys: object) -> int:
    """Stable 64-bit seed for one item, independent of processing order."""
    h = hashlib.blake2b(digest_size=8)
    h.update(str(int(seed)).encode())
    for k in keys:
        h.update(b"\x1f" + str(k).encode("utf-8"))
    return int.from_bytes(h.digest(), "little")


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


@dataclass(frozen=True)
class NoiseOp:
    kind: str
    position: int  # index into the input tokens
    word: str | None = None


@dataclass
class NoiseGenerator:
    """Applies noise with a fixed vocabulary; caches per-anchor sampling tables."""

    vocab: Vocabulary
    config: NoiseConfig = field(default_factory=NoiseConfig)
    _tables: dict = field(default_factory=dict, init=False, repr=False)

    def __post_init__(self):
        if not len(self.vocab):
            raise ValueError("vocabulary is empty")

    def _table(self, anchor: str, exclude_anchor: bool) -> tuple[np.ndarray, tuple[str, ...]]:
        key = (anchor, exclude_anchor)
        if key not in self._tables:
            words = self.vocab.words
            if exclude_anchor and anchor in self.vocab and len(words) > 1:
                words = tuple(w for w in words if w != anchor)
            weights = np.array(
                [max(acoustic_similarity(w, anchor), MIN_WEIGHT) for w in words]
            )
            self._tables[key] = (np.cumsum(weights), words)
        return self._tables[key]

    def sample_word(self, anchor: str, rng: np.random.Generator, exclude_anchor: bool = False) -> str:
        cum, words = self._table(anchor, exclude_anchor)
        k = int(np.searchsorted(cum, rng.random() * cum[-1], side="right"))
        return words[min(k, len(words) - 1)]

    def position_probs(self, tokens: Sequence[str]) -> np.ndarray:
        """Per-position probabilities of (sub, ins, del), shape ``(n, 3)``.

        Sub/del rates are scaled by inverse word length relative to the
        utterance mean, which keeps the expected operation count at tau * n.
        """
        tau = self.config.tau
        p_sub, p_ins, p_del = self.config.op_probs
        inv = np.array([1.0 / len(t) for t in tokens])
        scale = inv / inv.mean()
        probs = np.stack(
            [tau * p_sub * scale, np.full(len(tokens), tau * p_ins), tau * p_del * scale],
            axis=1,
        )
        total = probs.sum(axis=1, keepdims=True)
        return np.where(total > 1.0, probs / np.maximum(total, 1e-300), probs)

    def apply(self, tokens: Sequence[str], rng: np.random.Generator) -> tuple[list[str], list[NoiseOp]]:
        """Noise one token list. Draw order per position: select, op type, word."""
        if not tokens:
            raise ValueError("tokens must be nonempty")
        if self.config.tau == 0.0:
            return list(tokens), []
        probs = self.position_probs(tokens)
        out: list[str] = []
        ops: list[NoiseOp] = []
        for p, tok in enumerate(tokens):
            row = probs[p]
            total = row.sum()
            if rng.random() >= total:
                out.append(tok)
                continue
            u = rng.random() * total
            kind = OPS[0] if u < row[0] else OPS[1] if u < row[0] + row[1] else OPS[2]
            if kind == SUBSTITUTE:
                word = self.sample_word(tok, rng, exclude_anchor=True)
                out.append(word)
            elif kind == INSERT:
                anchor = tokens[p - 1] if p > 0 else tokens[0]
                word = self.sample_word(anchor, rng)
                out.extend((word, tok))
            else:
                word = None
            ops.append(NoiseOp(kind, p, word))
        if not out:
            keep = int(rng.integers(len(tokens)))
            out.append(tokens[keep])
        return out, ops


def inject_noise(tokens: Sequence[str], vocab: Vocabulary, cfg: NoiseConfig) -> list[str]:
    """Noised copy of ``tokens``; deterministic in ``cfg.seed``."""
    out, _ = NoiseGenerator(vocab, cfg).apply(tokens, make_rng(cfg.seed))
    return out
