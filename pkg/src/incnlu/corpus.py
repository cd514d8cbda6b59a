"""Annotated-utterance data model and the TSV / JSONL corpus formats.

A corpus line in TSV form has three (optionally four) tab-separated fields::

    which flights go to boston<TAB>O O O O B-toloc<TAB>atis_flight[<TAB>id]

Tokens and tags are space-joined, intents are joined by ``#``.  The JSONL form
carries the same record as one object per line with keys ``id``, ``tokens``,
``tags`` and ``intents``.
"""

from __future__ import annotations

import json
from collections.abc import Iterable, Iterator
from dataclasses import dataclass
from pathlib import Path

INTENT_SEP = "#"


class CorpusError(ValueError):
    """Raised for malformed corpus input. Carries the 1-based line number if known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


def _has_space(s: str) -> bool:
    return any(c.isspace() for c in s)


def tag_slot(tag: str) -> str | None:
    """Return the slot name of a ``B-``/``I-`` tag, or None for ``O``."""
    if tag == "O":
        return None
    return tag[2:]


def check_tags(tags: Iterable[str]) -> None:
    """Validate an IOB2 tag sequence, raising ValueError on the first problem."""
    prev_slot = None
    for k, tag in enumerate(tags):
        if tag == "O":
            prev_slot = None
            continue
        if len(tag) < 3 or tag[:2] not in ("B-", "I-") or _has_space(tag):
            raise ValueError(f"bad IOB2 tag {tag!r} at position {k}")
        slot = tag[2:]
        if tag[0] == "I" and slot != prev_slot:
            raise ValueError(
                f"tag {tag!r} at position {k} does not continue a {slot!r} chunk"
            )
        prev_slot = slot


@dataclass(frozen=True)
class AnnotatedUtterance:
    """Tokens with parallel IOB2 tags and one or more intents."""

    id: str
    tokens: tuple[str, ...]
    tags: tuple[str, ...]
    intents: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        object.__setattr__(self, "tags", tuple(self.tags))
        object.__setattr__(self, "intents", tuple(self.intents))
        if len(self.tokens) != len(self.tags):
            raise ValueError(
                f"{len(self.tokens)} tokens vs {len(self.tags)} tags"
            )
        if not self.tokens:
            raise ValueError("utterance has no tokens")
        for tok in self.tokens:
            if not tok or _has_space(tok):
                raise ValueError(f"bad token {tok!r}")
        check_tags(self.tags)
        if not self.intents:
            raise ValueError("utterance has no intents")
        for intent in self.intents:
            if not intent or _has_space(intent) or INTENT_SEP in intent:
                raise ValueError(f"bad intent {intent!r}")

    def __len__(self) -> int:
        return len(self.tokens)

    @property
    def intent_label(self) -> str:
        """Intents joined by ``#``, order preserved."""
        return INTENT_SEP.join(self.intents)

    def to_tsv(self, with_id: bool = True) -> str:
        fields = [" ".join(self.tokens), " ".join(self.tags), self.intent_label]
        if with_id:
            fields.append(self.id)
        return "\t".join(fields)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "tokens": list(self.tokens),
            "tags": list(self.tags),
            "intents": list(self.intents),
        }


@dataclass(frozen=True)
class SlotLexicon:
    """The set of slot (parameter) names known to a corpus."""

    slots: frozenset[str]

    def __contains__(self, token: object) -> bool:
        return token in self.slots

    def __len__(self) -> int:
        return len(self.slots)

    def __iter__(self) -> Iterator[str]:
        return iter(sorted(self.slots))

    def __or__(self, other: SlotLexicon) -> SlotLexicon:
        return SlotLexicon(self.slots | other.slots)


def slot_lexicon(records: Iterable[AnnotatedUtterance]) -> SlotLexicon:
    return SlotLexicon(
        frozenset(tag[2:] for r in records for tag in r.tags if tag != "O")
    )


def _split_tokens(field: str) -> list[str]:
    return field.split()


def parse_iob_tsv(text: str | Iterable[str], lowercase: bool = True) -> list[AnnotatedUtterance]:
    """Parse TSV corpus text into utterances.

    Args:
        text: whole file contents, or an iterable of lines.
        lowercase: lowercase tokens on import (tags and intents are untouched).

    Returns:
        One record per nonblank line. Without a fourth field the id is the
        0-based line index.

    Raises:
        CorpusError: on a wrong field count, a token/tag length mismatch,
            an empty token field or an ill-formed IOB2 transition.
    """
    lines = text.splitlines() if isinstance(text, str) else text
    records = []
    for idx, line in enumerate(lines):
        line = line.rstrip("\r\n")
        if not line.strip():
            continue
        fields = line.split("\t")
        if len(fields) not in (3, 4):
            raise CorpusError(f"expected 3 or 4 tab-separated fields, got {len(fields)}", idx + 1)
        tokens = _split_tokens(fields[0])
        if not tokens:
            raise CorpusError("empty token field", idx + 1)
        if lowercase:
            tokens = [t.lower() for t in tokens]
        tags = _split_tokens(fields[1])
        if len(tokens) != len(tags):
            raise CorpusError(f"{len(tokens)} tokens vs {len(tags)} tags", idx + 1)
        intents = fields[2].strip().split(INTENT_SEP)
        uid = fields[3].strip() if len(fields) == 4 else str(idx)
        try:
            records.append(AnnotatedUtterance(uid, tokens, tags, intents))
        except ValueError as e:
            raise CorpusError(str(e), idx + 1) from None
    return records


def parse_jsonl(text: str | Iterable[str], lowercase: bool = True) -> list[AnnotatedUtterance]:
    lines = text.splitlines() if isinstance(text, str) else text
    records = []
    for idx, line in enumerate(lines):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
            tokens = obj["tokens"]
            tags = obj["tags"]
            intents = obj["intents"]
            if isinstance(tokens, str):
                tokens = tokens.split()
            if isinstance(tags, str):
                tags = tags.split()
            if isinstance(intents, str):
                intents = intents.split(INTENT_SEP)
            if lowercase:
                tokens = [t.lower() for t in tokens]
            uid = str(obj.get("id", idx))
            records.append(AnnotatedUtterance(uid, tokens, tags, intents))
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
            raise CorpusError(f"{type(e).__name__}: {e}", idx + 1) from None
    return records


def _looks_like_jsonl(text: str) -> bool:
    for line in text.splitlines():
        if line.strip():
            return line.lstrip().startswith("{")
    return False


def parse_corpus(text: str, lowercase: bool = True) -> list[AnnotatedUtterance]:
    """Parse either corpus format, sniffed from the first nonblank line."""
    if _looks_like_jsonl(text):
        return parse_jsonl(text, lowercase=lowercase)
    return parse_iob_tsv(text, lowercase=lowercase)


def read_corpus(path: str | Path, lowercase: bool = True) -> list[AnnotatedUtterance]:
    return parse_corpus(Path(path).read_text(encoding="utf-8"), lowercase=lowercase)


def format_tsv(records: Iterable[AnnotatedUtterance], with_id: bool = True) -> str:
    return "".join(r.to_tsv(with_id) + "\n" for r in records)


def format_jsonl(records: Iterable[AnnotatedUtterance]) -> str:
    return "".join(json.dumps(r.to_dict(), ensure_ascii=False) + "\n" for r in records)
