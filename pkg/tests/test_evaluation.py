import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from incnlu.corpus import AnnotatedUtterance
from incnlu.evaluation import (
    ConfidenceTrace,
    Hypothesis,
    HypothesisRecord,
    MissingHypotheses,
    build_traces,
    evaluate_confidence,
    evaluate_partial,
    hypothesis_map,
    read_hypotheses,
    render_table,
    write_hypotheses,
)
from incnlu.incremental import AT_LEAST, IncrementalSeries, PartialRecord, generate_prefixes

LEX = {"toloc.city_name", "fromloc.city_name"}


def toy_gold():
    u1 = AnnotatedUtterance("u1", "flights to new york".split(), "O O B-toloc.city_name I-toloc.city_name".split(), ["atis_flight"])
    u2 = AnnotatedUtterance("u2", "boston fares".split(), "B-fromloc.city_name O".split(), ["atis_airfare"])
    return [generate_prefixes(u1), generate_prefixes(u2)]


def gold_echo(gold):
    return {(s.utterance_id, len(r)): Hypothesis(r.target, 1.0) for s in gold for r in s}


def test_identical_hypotheses_score_one():
    gold = toy_gold()
    rep = evaluate_partial(gold, gold_echo(gold), [100, 75, 50, 25], lex=LEX)
    assert [r.percent for r in rep.rows] == [100, 75, 50, 25]
    row = rep.rows[0]
    assert row.scores.f1 == 1.0 and row.intents_accuracy == 1.0


def test_hand_composed_fifty_percent():
    # 50 %: u1 (n=4) -> 2 tokens, gold "atis_flight"; u2 (n=2) -> 1 token, gold "atis_airfare fromloc.city_name boston"
    gold = toy_gold()
    hyps = gold_echo(gold)
    hyps[("u1", 2)] = Hypothesis("atis_flight toloc.city_name new", 0.7)  # tp 1, |r| 1, |h| 2
    hyps[("u2", 1)] = Hypothesis("atis_flight fromloc.city_name boston", 0.6)  # tp 1, |r| 2, |h| 2
    [row] = evaluate_partial(gold, hyps, [50], lex=LEX).rows
    s = row.scores
    assert (s.true_positives, s.ref_len, s.hyp_len, s.pairs) == (2, 3, 4, 2)
    assert s.precision == 0.5
    assert s.recall == pytest.approx(2 / 3)
    assert s.f1 == pytest.approx(4 / 7)
    assert row.intents_accuracy == 0.5
    d = row.to_dict()
    assert (d["precision"], d["recall"], d["f1"], d["intents_accuracy"]) == (50.0, 66.67, 57.14, 50.0)


def test_missing_hypotheses_listed():
    gold = toy_gold()
    hyps = gold_echo(gold)
    del hyps[("u1", 3)]
    del hyps[("u2", 1)]
    with pytest.raises(MissingHypotheses) as e:
        evaluate_partial(gold, hyps, [75, 50], lex=LEX)
    assert e.value.missing == [("u1", 3), ("u2", 1)]


def test_at_least_mode_on_asr_series():
    s = IncrementalSeries("a", tuple(PartialRecord(tuple("x" * n), f"i t{n}") for n in (2, 5, 9)))
    hyps = {("a", n): Hypothesis(f"i t{n}", 1.0) for n in (2, 5, 9)}
    rep = evaluate_partial([s], hyps, [50], mode=AT_LEAST, lex=set())
    assert rep.rows[0].scores.f1 == 1.0
    assert rep.meta == {"mode": "at_least"}


def trace(confs, uid="u", lengths=None):
    lengths = lengths or list(range(1, len(confs) + 1))
    return ConfidenceTrace(uid, tuple((n, Hypothesis("atis_flight", c)) for n, c in zip(lengths, confs)), lengths[-1])


def test_confidence_single_utterance():
    rep = evaluate_confidence([trace([0.6, 0.93, 0.99])], {"u": ["atis_flight"]}, [0.90])
    assert rep.rows[0].token_usage == pytest.approx(200 / 3)
    assert rep.rows[0].to_dict()["token_usage"] == 66.67


def test_confidence_fallback_and_zero():
    traces = [trace([0.2, 0.5, 0.7], "a"), trace([0.1, 0.3], "b")]
    intents = {"a": ["atis_flight"], "b": ["atis_airfare"]}
    high, zero = evaluate_confidence(traces, intents, [0.99, 0.0]).rows
    assert high.token_usage == 100.0 and high.intents_accuracy == 0.5
    assert zero.token_usage == pytest.approx((100 / 3 + 50) / 2)


def test_confidence_usage_capped_for_asr_revisions():
    t = ConfidenceTrace("a", ((6, Hypothesis("x", 0.99)), (4, Hypothesis("x", 0.5))), 4)
    assert evaluate_confidence([t], {"a": ["x"]}, [0.9]).rows[0].token_usage == 100.0


def test_trace_without_full_entry_is_rejected():
    with pytest.raises(ValueError, match="full-utterance"):
        ConfidenceTrace("a", ((1, Hypothesis("x", 0.5)),), 3)
    with pytest.raises(ValueError):
        ConfidenceTrace("a", (), 3)


@given(st.lists(st.lists(st.floats(0, 1), min_size=1, max_size=8), min_size=1, max_size=8), st.randoms())
def test_confidence_monotone_and_permutation_invariant(conf_lists, rnd):
    traces = [trace(c, f"u{k}") for k, c in enumerate(conf_lists)]
    intents = {t.utterance_id: ["atis_flight"] for t in traces}
    thetas = [0.0, 0.5, 0.8, 0.85, 0.9, 0.95, 1.0, math.nextafter(1.0, 2.0)]
    rows = evaluate_confidence(traces, intents, thetas).rows
    usage = [r.token_usage for r in rows]
    assert usage == sorted(usage)
    assert rows[-1].token_usage == 100.0
    shuffled = list(traces)
    rnd.shuffle(shuffled)
    assert evaluate_confidence(shuffled, intents, thetas).rows == rows


def test_hypothesis_file_round_trip_and_traces(tmp_path):
    gold = toy_gold()
    recs = [HypothesisRecord(s.utterance_id, len(r), Hypothesis(r.target, 0.25 * len(r))) for s in gold for r in s]
    write_hypotheses(tmp_path / "h.jsonl", recs)
    back = read_hypotheses(tmp_path / "h.jsonl")
    assert back == recs
    assert hypothesis_map(back)[("u1", 4)].intent_confidence == 1.0
    traces = build_traces(back, gold)
    assert [t.n for t in traces] == [4, 2]
    assert traces[0].decide(0.5)[0] == 2


def test_hypothesis_map_first_wins():
    a = HypothesisRecord("u", 2, Hypothesis("a", 0.1))
    b = HypothesisRecord("u", 2, Hypothesis("b", 0.9))
    assert hypothesis_map([a, b])[("u", 2)].target_text == "a"


def test_bad_hypothesis_confidence():
    with pytest.raises(ValueError):
        Hypothesis("x", 1.5)


def test_render_table():
    gold = toy_gold()
    text = render_table(evaluate_partial(gold, gold_echo(gold), [100, 25], lex=LEX).to_dict())
    lines = text.splitlines()
    assert lines[0].split()[:2] == ["percent", "tp"]
    assert "100.00" in lines[2]
    assert len({len(ln) for ln in lines}) == 1
