import random
import sys
from pathlib import Path

import pytest
from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).parent))

from incnlu.corpus import AnnotatedUtterance  # noqa: E402

WORDS = ["flights", "to", "from", "boston", "new", "york", "denver", "on", "monday", "cheap", "me", "show"]
SLOTS = ["fromloc.city_name", "toloc.city_name", "depart_date.day_name", "cost_relative"]
INTENTS = ["atis_flight", "atis_airfare", "atis_airline", "atis_ground_service"]


def random_tags(rng: random.Random, n: int, slots=SLOTS) -> list[str]:
    tags = []
    for _ in range(n):
        prev = tags[-1] if tags else "O"
        r = rng.random()
        if prev != "O" and r < 0.35:
            tags.append("I-" + prev[2:])
        elif r < 0.65:
            tags.append("B-" + rng.choice(slots))
        else:
            tags.append("O")
    return tags


def random_utterance(rng: random.Random, max_len: int = 20, uid: str = "u") -> AnnotatedUtterance:
    n = rng.randint(1, max_len)
    tokens = [rng.choice(WORDS) for _ in range(n)]
    intents = rng.sample(INTENTS, rng.choice([1, 1, 1, 2, 3]))
    return AnnotatedUtterance(uid, tokens, random_tags(rng, n), intents)


@st.composite
def utterances(draw, max_len: int = 20):
    seed = draw(st.integers(0, 2**32 - 1))
    return random_utterance(random.Random(seed), max_len)


# -- one PASS/FAIL line per acceptance criterion in the terminal summary

_acceptance: list[tuple[str, str, str]] = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if item.module.__name__.endswith("test_acceptance") and (
        rep.when == "call" or (rep.when == "setup" and rep.skipped)
    ):
        doc = (item.function.__doc__ or item.name).strip().splitlines()[0]
        status = "PASS" if rep.passed else "SKIP" if rep.skipped else "FAIL"
        _acceptance.append((item.name, status, doc))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name, status, doc in sorted(_acceptance):
        terminalreporter.write_line(f"{status:4}  {doc}")
