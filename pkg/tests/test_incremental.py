import logging

import pytest
from conftest import utterances
from hypothesis import given
from hypothesis import strategies as st

from incnlu.corpus import AnnotatedUtterance, slot_lexicon
from incnlu.incremental import (
    AT_LEAST,
    EXACT,
    IncrementalSeries,
    PartialRecord,
    align_asr_partials,
    generate_prefixes,
    prefix_length,
    read_series,
    select_prefix,
    write_series,
)
from incnlu.seq2seq import iob_to_target, parse_target


def _u(text, tags, intents=("atis_flight",), uid="u"):
    return AnnotatedUtterance(uid, text.split(), tags.split(), intents)


def is_truncation(shorter, longer):
    """``shorter`` = ``longer`` minus trailing params and/or trailing values of its last param."""
    if shorter.intents != longer.intents:
        return False
    ps, pl = shorter.params, longer.params
    if len(ps) > len(pl):
        return False
    if not ps:
        return True
    if ps[:-1] != pl[: len(ps) - 1]:
        return False
    last, other = ps[-1], pl[len(ps) - 1]
    return last.slot == other.slot and other.values[: len(last.values)] == last.values


def test_fig1_prefixes():
    s = generate_prefixes(_u("flights to pittsburgh", "O O B-toloc"))
    assert [r.target for r in s] == ["atis_flight", "atis_flight", "atis_flight toloc pittsburgh"]
    assert [r.is_full for r in s] == [False, False, True]


def test_cut_chunk_keeps_present_tokens():
    u = _u(
        "i want a flight from new york to san francisco",
        "O O O O O B-fromloc.city_name I-fromloc.city_name O B-toloc.city_name I-toloc.city_name",
    )
    s = generate_prefixes(u)
    assert s[8].tokens == tuple("i want a flight from new york to san".split())
    assert s[8].target == "atis_flight fromloc.city_name new york toloc.city_name san"


def test_single_token():
    u = _u("boston", "B-toloc")
    s = generate_prefixes(u)
    assert len(s) == 1 and s[0].target == iob_to_target(u) and s[0].is_full


@given(utterances())
def test_prefix_properties(u):
    s = generate_prefixes(u)
    n = len(u.tokens)
    assert s.lengths == list(range(1, n + 1))
    assert s.full.target == iob_to_target(u)
    lex = slot_lexicon([u])
    parsed = [parse_target(r.target, lex) for r in s]
    assert all(is_truncation(a, b) for a, b in zip(parsed, parsed[1:]))


def human_series(n=10):
    toks = [f"w{k}" for k in range(n)]
    tags = ["B-s"] + ["I-s"] * (n - 1)
    return generate_prefixes(AnnotatedUtterance("h", toks, tags, ["i"]))


def test_align_same_length():
    h = human_series()
    out = align_asr_partials([["a", "b", "c"], ["a"], list("abcdefghijkl")], h)
    assert out[0].target == h[2].target
    assert out[1].target == h[0].target
    assert out[2].target == h.full.target
    assert [r.is_full for r in out] == [False, False, True]


def test_align_longer_than_human_gets_full_target():
    h = human_series()
    out = align_asr_partials([list("abcdefghijkl"), ["a"]], h)
    assert out[0].target == h.full.target


def test_align_last_partial_gets_full_target():
    h = human_series()
    out = align_asr_partials([["a"], ["a", "b"]], h)
    assert out[1].target == h.full.target and out[1].is_full


def test_align_skips_empty_and_keeps_duplicates(caplog):
    h = human_series()
    with caplog.at_level(logging.WARNING):
        out = align_asr_partials([["a"], [], ["a", "b"], ["a", "c"], ["a", "b", "c"]], h)
    assert out.skipped == 1
    assert "skipped 1 empty" in caplog.text
    assert out.lengths == [1, 2, 2, 3]
    assert out[1].target == out[2].target == h[1].target


@given(st.lists(st.integers(0, 15), min_size=1, max_size=12))
def test_align_length_matches_nonempty_count(lengths):
    out = align_asr_partials([["x"] * n for n in lengths], human_series())
    assert len(out) == sum(1 for n in lengths if n)


@pytest.mark.parametrize("n, percent, expected", [(10, 75, 7), (10, 100, 10), (10, 25, 2), (3, 25, 1), (4, 50, 2), (1, 25, 1)])
def test_prefix_length(n, percent, expected):
    assert prefix_length(n, percent) == expected


def test_select_exact():
    s = human_series(10)
    assert len(select_prefix(s, 75, EXACT)) == 7
    assert len(select_prefix(human_series(3), 25, EXACT)) == 1


def test_select_at_least_asr():
    recs = tuple(PartialRecord(tuple("x" * n), f"t{n}") for n in (2, 5, 9))
    s = IncrementalSeries("a", recs)
    assert len(select_prefix(s, 50, AT_LEAST)) == 5
    assert len(select_prefix(s, 25, AT_LEAST)) == 2
    assert len(select_prefix(s, 100, AT_LEAST)) == 9


def test_select_at_least_takes_first_long_enough_even_if_later_revised_shorter():
    recs = tuple(PartialRecord(tuple("x" * n), "") for n in (6, 4))
    assert select_prefix(IncrementalSeries("a", recs), 100, AT_LEAST) is recs[0]


def test_select_exact_on_non_prefix_series_errors():
    recs = tuple(PartialRecord(tuple("x" * n), "") for n in (2, 5, 9))
    with pytest.raises(ValueError, match="no record of length 4"):
        select_prefix(IncrementalSeries("a", recs), 50, EXACT)


@pytest.mark.parametrize("percent", [0, -5, 101])
def test_select_rejects_bad_percent(percent):
    with pytest.raises(ValueError):
        select_prefix(human_series(), percent)


@given(utterances())
def test_select_100_is_full_in_both_modes(u):
    s = generate_prefixes(u)
    assert select_prefix(s, 100, EXACT) == s.full == select_prefix(s, 100, AT_LEAST)


def test_series_file_round_trip(tmp_path):
    series = [generate_prefixes(_u("flights to pittsburgh", "O O B-toloc", uid="a")), human_series(4)]
    path = tmp_path / "inc.jsonl"
    write_series(path, series)
    assert read_series(path) == series
    first = path.read_text().splitlines()[0]
    assert first == '{"utterance_id": "a", "index": 1, "tokens": ["flights"], "target": "atis_flight", "is_full": false}'
