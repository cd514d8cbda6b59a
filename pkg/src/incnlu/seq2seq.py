"""Flat target sequences: ``<intents> <slot> <value...> <slot> <value...> ...``.

``iob_to_target`` turns an IOB2 annotation into the target string;
``parse_target`` reads a target string back into scoring classes.
"""

from __future__ import annotations

from collections.abc import Container, Iterator, Sequence
from dataclasses import dataclass

from incnlu.corpus import INTENT_SEP, AnnotatedUtterance

DANGLING = "<dangling>"


@dataclass(frozen=True)
class Intent:
    name: str


@dataclass(frozen=True)
class Param:
    slot: str
    values: tuple[str, ...] = ()


Class = Intent | Param


@dataclass(frozen=True)
class ClassSequence:
    """Ordered scoring classes of one target: intents first, then parameters."""

    classes: tuple[Class, ...] = ()

    def __len__(self) -> int:
        return len(self.classes)

    def __iter__(self) -> Iterator[Class]:
        return iter(self.classes)

    def __getitem__(self, k):
        return self.classes[k]

    @property
    def intents(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.classes if isinstance(c, Intent))

    @property
    def params(self) -> tuple[Param, ...]:
        return tuple(c for c in self.classes if isinstance(c, Param))


def iob_chunks(tokens: Sequence[str], tags: Sequence[str]) -> list[tuple[str, list[str]]]:
    """Maximal IOB2 chunks as ``(slot, tokens)`` in order; ``O`` tokens dropped.

    A ``B-`` tag always opens a new chunk, so two adjacent chunks of the same
    slot stay separate.  Tags are assumed well formed.
    """
    chunks: list[tuple[str, list[str]]] = []
    for tok, tag in zip(tokens, tags):
        if tag == "O":
            continue
        if tag.startswith("B-") or not chunks or chunks[-1][0] != tag[2:]:
            chunks.append((tag[2:], [tok]))
        else:
            chunks[-1][1].append(tok)
    return chunks


def chunks_to_target(intents: Sequence[str], chunks: Sequence[tuple[str, Sequence[str]]]) -> str:
    parts = [INTENT_SEP.join(intents)]
    for slot, toks in chunks:
        parts.append(slot)
        parts.extend(toks)
    return " ".join(parts)


def iob_to_target(u: AnnotatedUtterance) -> str:
    return chunks_to_target(u.intents, iob_chunks(u.tokens, u.tags))


def parse_target(text: str, lex: Container[str]) -> ClassSequence:
    """Segment a target string into classes.

    Any token found in ``lex`` opens a new parameter, even where it was meant
    as a slot value (e.g. a value ``or`` when ``or`` is also a slot name).
    Value tokens seen before the first slot name are gathered under the
    synthetic slot ``<dangling>``.  Never raises; an empty string gives an
    empty sequence.
    """
    toks = text.split()
    if not toks:
        return ClassSequence()
    classes: list[Class] = [Intent(name) for name in toks[0].split(INTENT_SEP) if name]
    slot: str | None = None
    values: list[str] = []
    for tok in toks[1:]:
        if tok in lex:
            if slot is not None:
                classes.append(Param(slot, tuple(values)))
            slot, values = tok, []
        else:
            if slot is None:
                slot = DANGLING
            values.append(tok)
    if slot is not None:
        classes.append(Param(slot, tuple(values)))
    return ClassSequence(tuple(classes))


def target_intents(text: str) -> tuple[str, ...]:
    """Intents of a target string (its first token split on ``#``)."""
    toks = text.split(maxsplit=1)
    if not toks:
        return ()
    return tuple(name for name in toks[0].split(INTENT_SEP) if name)
