"""Seeded ATIS-style toy corpora for tests, demos and the latency harness."""

from __future__ import annotations

import random

from incnlu.corpus import AnnotatedUtterance

CITIES = [
    "boston", "denver", "pittsburgh", "atlanta", "dallas", "baltimore", "oakland",
    "philadelphia", "milwaukee", "orlando", "chicago", "tacoma", "new york",
    "san francisco", "salt lake city", "kansas city", "washington", "st. louis",
]
DAYS = ["monday", "tuesday", "wednesday", "thursday", "friday", "saturday", "sunday"]
PERIODS = ["morning", "afternoon", "evening", "night"]
AIRLINES = ["united", "delta", "american airlines", "us air", "continental", "twa"]
CLASSES = ["first class", "coach", "business"]
TRANSPORT = ["limousine", "taxi", "rental car", "bus"]
AIRCRAFT = ["boeing 737", "dc10", "md80", "757"]
ABBREVS = ["ap", "ewr", "fyi", "qx", "yn", "ua"]

FILLER = (
    "the you i to a it and that of is what in me this know i'm for no have my don't just not "
    "do be on your was we it's with so but all well are he oh about right you're get here out "
    "going like yeah if her she can up want think that's now go him at how got there one did "
    "why see come good they really as would look when time will okay back can't mean tell i'll "
    "from hey were he's could didn't yes his been or something who because some had then say "
    "ok take an way us little make need gonna never we're too she's i've sure them more over "
    "our sorry where what's let thing am maybe down man has uh very by there's should anything"
).split()


def _chunk(words: str, slot: str) -> tuple[list[str], list[str]]:
    toks = words.split()
    return toks, ["B-" + slot] + ["I-" + slot] * (len(toks) - 1)


def _plain(words: str) -> tuple[list[str], list[str]]:
    toks = words.split()
    return toks, ["O"] * len(toks)


def _join(*parts: tuple[list[str], list[str]]) -> tuple[list[str], list[str]]:
    toks: list[str] = []
    tags: list[str] = []
    for t, g in parts:
        toks += t
        tags += g
    return toks, tags


def _flight(rng: random.Random):
    a, b = rng.sample(CITIES, 2)
    parts = [
        _plain(rng.choice(["show me flights", "i want a flight", "which flights go", "list flights", "flights"])),
        _plain("from"), _chunk(a, "fromloc.city_name"),
        _plain("to"), _chunk(b, "toloc.city_name"),
    ]
    if rng.random() < 0.5:
        parts += [_plain("on"), _chunk(rng.choice(DAYS), "depart_date.day_name")]
    if rng.random() < 0.4:
        parts += [_plain("in the"), _chunk(rng.choice(PERIODS), "depart_time.period_of_day")]
    if rng.random() < 0.2:
        parts += [_plain("on"), _chunk(rng.choice(AIRLINES), "airline_name")]
    return _join(*parts)


def _airfare(rng: random.Random):
    a, b = rng.sample(CITIES, 2)
    parts = [_plain(rng.choice(["how much is a", "what is the cost of a", "show me fares for a"]))]
    if rng.random() < 0.5:
        parts.append(_chunk(rng.choice(CLASSES), "class_type"))
    parts += [_plain("ticket from"), _chunk(a, "fromloc.city_name"), _plain("to"), _chunk(b, "toloc.city_name")]
    return _join(*parts)


def _ground(rng: random.Random):
    return _join(
        _plain(rng.choice(["what ground transportation is available in", "is there a", "i need a"])),
        *([_chunk(rng.choice(TRANSPORT), "transport_type"), _plain("in")] if rng.random() < 0.5 else []),
        _chunk(rng.choice(CITIES), "city_name"),
    )


def _airline(rng: random.Random):
    a, b = rng.sample(CITIES, 2)
    return _join(
        _plain(rng.choice(["which airlines fly from", "what airlines go from"])),
        _chunk(a, "fromloc.city_name"), _plain("to"), _chunk(b, "toloc.city_name"),
    )


def _abbrev(rng: random.Random):
    return _join(_plain(rng.choice(["what does", "what is", "explain"])), _chunk(rng.choice(ABBREVS), "fare_basis_code"),
                 _plain(rng.choice(["mean", "stand for", ""]) or "please"))


def _aircraft(rng: random.Random):
    return _join(_plain("what type of aircraft is"), _chunk(rng.choice(AIRCRAFT), "aircraft_code"))


def _flight_no(rng: random.Random):
    return _join(_plain("what is the flight number of the"), _chunk(rng.choice(AIRLINES), "airline_name"),
                 _plain("flight to"), _chunk(rng.choice(CITIES), "toloc.city_name"))


GENERATORS = [
    (("atis_flight",), _flight, 70),
    (("atis_airfare",), _airfare, 9),
    (("atis_ground_service",), _ground, 6),
    (("atis_airline",), _airline, 4),
    (("atis_abbreviation",), _abbrev, 4),
    (("atis_aircraft",), _aircraft, 2),
    (("atis_flight_no",), _flight_no, 2),
    (("atis_flight", "atis_airfare"), _airfare, 1),
]


def make_corpus(size: int, seed: int = 0, prefix: str = "syn") -> list[AnnotatedUtterance]:
    """``size`` utterances with ATIS-like intent skew."""
    rng = random.Random(seed)
    weights = [w for _, _, w in GENERATORS]
    out = []
    for k in range(size):
        intents, gen, _ = rng.choices(GENERATORS, weights)[0]
        toks, tags = gen(rng)
        out.append(AnnotatedUtterance(f"{prefix}-{k:05d}", toks, tags, intents))
    return out


def long_utterance(n_tokens: int, seed: int = 0, uid: str | None = None) -> AnnotatedUtterance:
    """An ``atis_flight`` utterance of exactly ``n_tokens`` tokens (chained legs)."""
    rng = random.Random(seed)
    toks, tags = _flight(rng)
    while len(toks) < n_tokens:
        a, b = rng.sample(CITIES, 2)
        more = _join(_plain("and then from"), _chunk(a, "fromloc.city_name"), _plain("to"),
                     _chunk(b, "toloc.city_name"), _plain("on"), _chunk(rng.choice(DAYS), "depart_date.day_name"))
        toks, tags = toks + more[0], tags + more[1]
    return AnnotatedUtterance(uid or f"long-{n_tokens}", toks[:n_tokens], tags[:n_tokens], ("atis_flight",))


def external_stream(size: int, seed: int = 0) -> list[str]:
    """Zipf-ish filler token stream standing in for a subtitle corpus."""
    rng = random.Random(seed)
    weights = [1.0 / (r + 1) for r in range(len(FILLER))]
    return rng.choices(FILLER, weights, k=size)


def asr_partials(u: AnnotatedUtterance, seed: int = 0, error_rate: float = 0.1) -> list[list[str]]:
    """Simulated incremental recognizer output: growing, occasionally revised prefixes.

    The final entry is the (possibly erroneous) full transcript.
    """
    rng = random.Random(seed)
    final = [rng.choice(FILLER) if rng.random() < error_rate else t for t in u.tokens]
    if rng.random() < error_rate and len(final) > 2:
        del final[rng.randrange(len(final))]
    partials = []
    i = 0
    while i < len(final):
        i = min(len(final), i + rng.choice([1, 1, 2, 3]))
        partials.append(final[:i])
        if rng.random() < 0.15:
            partials.append(final[:i])  # revision without growth
    return partials
