import json
import sys

import pytest

from incnlu.cli import main
from incnlu.corpus import format_jsonl, format_tsv, read_corpus
from incnlu.incremental import read_series
from incnlu.synthetic import asr_partials, external_stream, long_utterance, make_corpus


@pytest.fixture
def data(tmp_path):
    train = tmp_path / "train.tsv"
    test = tmp_path / "test.tsv"
    train.write_text(format_tsv(make_corpus(150, seed=1, prefix="tr")))
    test.write_text(format_tsv(make_corpus(30, seed=2, prefix="te")))
    return tmp_path


def run(*argv):
    return main([str(a) for a in argv])


def test_convert_outputs(data):
    d = data
    assert run("convert", d / "test.tsv", "--src", d / "s.txt", "--tgt", d / "t.txt", "--records", d / "r.jsonl", "--tsv", d / "r.tsv") == 0
    src = (d / "s.txt").read_text().splitlines()
    tgt = (d / "t.txt").read_text().splitlines()
    assert len(src) == len(tgt) == 30
    assert tgt[0].split()[0].startswith("atis_")
    assert read_corpus(d / "r.jsonl") == read_corpus(d / "test.tsv") == read_corpus(d / "r.tsv")


def test_convert_needs_an_output(data, capsys):
    assert run("convert", data / "test.tsv") == 1


def test_usage_errors_exit_1(data, capsys):
    with pytest.raises(SystemExit) as e:
        main(["no-such-command"])
    assert e.value.code == 1
    with pytest.raises(SystemExit) as e:
        main(["add-noise", str(data / "test.tsv"), "-o", "x", "--vocab", "v"])  # --seed missing
    assert e.value.code == 1
    assert run("gen-incremental", data / "missing.tsv", "-o", data / "x") == 1


def test_data_error_exit_2(data, capsys):
    bad = data / "bad.tsv"
    bad.write_text("a b\tO\tatis_flight\n")
    assert run("gen-incremental", bad, "-o", data / "x.jsonl") == 2
    assert "line 1" in capsys.readouterr().err


def test_incremental_noise_and_determinism(data):
    d = data
    assert run("gen-incremental", d / "test.tsv", "-o", d / "inc.jsonl") == 0
    (d / "ext.txt").write_text(" ".join(external_stream(3000, 0)))
    assert run("build-vocab", "--train", d / "train.tsv", "--external", d / "ext.txt", "--size", 300, "-o", d / "v.txt") == 0
    words = (d / "v.txt").read_text().splitlines()
    train_words = {t for u in read_corpus(d / "train.tsv") for t in u.tokens}
    assert len(words) == min(300, len(train_words | set(external_stream(3000, 0))))
    assert train_words <= set(words)
    for out in ("n1.jsonl", "n2.jsonl"):
        assert run("add-noise", d / "inc.jsonl", "-o", d / out, "--vocab", d / "v.txt", "--seed", 5, "--tau", 0.2) == 0
    assert (d / "n1.jsonl").read_bytes() == (d / "n2.jsonl").read_bytes()
    clean, noisy = read_series(d / "inc.jsonl"), read_series(d / "n1.jsonl")
    assert [r.target for s in clean for r in s] == [r.target for s in noisy for r in s]
    assert [r.tokens for s in clean for r in s] != [r.tokens for s in noisy for r in s]
    run("add-noise", d / "inc.jsonl", "-o", d / "n3.jsonl", "--vocab", d / "v.txt", "--seed", 5, "--tau", 0)
    assert [r.tokens for s in read_series(d / "n3.jsonl") for r in s] == [r.tokens for s in clean for r in s]


def test_add_noise_on_plain_corpus(data):
    d = data
    (d / "v.txt").write_text("boston\ndenver\n")
    assert run("add-noise", d / "test.tsv", "-o", d / "n.jsonl", "--vocab", d / "v.txt", "--seed", 1) == 0
    series = read_series(d / "n.jsonl")
    assert len(series) == 30 and all(len(s) == 1 and s[0].is_full for s in series)


def test_align_asr(data):
    d = data
    corpus = read_corpus(d / "test.tsv")
    lines = []
    for u in corpus:
        for p in asr_partials(u, seed=3):
            lines.append(json.dumps({"utterance_id": u.id, "tokens": p}))
    lines.append(json.dumps({"utterance_id": corpus[0].id, "tokens": []}))
    (d / "asr.jsonl").write_text("\n".join(lines) + "\n")
    assert run("align-asr", "--human", d / "test.tsv", "--asr", d / "asr.jsonl", "-o", d / "a.jsonl") == 0
    series = read_series(d / "a.jsonl")
    assert len(series) == 30 and all(s.records[-1].is_full for s in series)


def test_run_baseline_and_evaluations(data, capsys):
    d = data
    run("gen-incremental", d / "test.tsv", "-o", d / "inc.jsonl")
    assert run("run-baseline", "--train", d / "train.tsv", "--save-model", d / "m.jsonl", "--input", d / "inc.jsonl", "-o", d / "h.jsonl") == 0
    assert run("run-baseline", "--model", d / "m.jsonl", "--input", d / "inc.jsonl", "-o", d / "h2.jsonl") == 0
    assert (d / "h.jsonl").read_bytes() == (d / "h2.jsonl").read_bytes()
    assert run("eval-partial", "--gold", d / "inc.jsonl", "--hyps", d / "h.jsonl", "--lexicon", d / "train.tsv", "-o", d / "p.json") == 0
    rep = json.loads((d / "p.json").read_text())
    assert [r["percent"] for r in rep["rows"]] == [100, 75, 50, 25]
    assert run("eval-confidence", "--gold", d / "inc.jsonl", "--hyps", d / "h.jsonl", "-o", d / "c.json", "--table") == 0
    rep = json.loads((d / "c.json").read_text())
    assert [r["threshold"] for r in rep["rows"]] == [0.95, 0.9, 0.85, 0.8]
    assert "token_usage" in capsys.readouterr().out


def test_run_model_via_serve(data):
    d = data
    run("gen-incremental", d / "test.tsv", "-o", d / "inc.jsonl")
    run("run-baseline", "--train", d / "train.tsv", "--save-model", d / "m.jsonl", "--input", d / "inc.jsonl", "-o", d / "h.jsonl")
    cmd = f"{sys.executable} -m incnlu.serve {d / 'm.jsonl'}"
    assert run("run-model", "--cmd", cmd, "--input", d / "inc.jsonl", "-o", d / "hm.jsonl") == 0
    assert (d / "hm.jsonl").read_bytes() == (d / "h.jsonl").read_bytes()


def test_run_model_protocol_error_exit_3(data, capsys):
    d = data
    run("gen-incremental", d / "test.tsv", "-o", d / "inc.jsonl")
    cmd = f"{sys.executable} -c \"import sys; sys.stdin.readline(); print('garbage', flush=True)\""
    assert run("run-model", "--cmd", cmd, "--input", d / "inc.jsonl", "-o", d / "hm.jsonl") == 3
    assert (d / "hm.jsonl.partial").exists()


def test_eval_partial_missing_hypotheses_exit_2(data, capsys):
    d = data
    run("gen-incremental", d / "test.tsv", "-o", d / "inc.jsonl")
    (d / "h.jsonl").write_text("")
    assert run("eval-partial", "--gold", d / "inc.jsonl", "--hyps", d / "h.jsonl", "--lexicon", d / "train.tsv") == 2
    assert "missing hypotheses" in capsys.readouterr().err


def test_score(data, capsys):
    d = data
    run("convert", d / "test.tsv", "--tgt", d / "t.txt")
    (d / "slots.txt").write_text("fromloc.city_name\ntoloc.city_name\n")
    assert run("score", "--ref", d / "t.txt", "--hyp", d / "t.txt", "--lexicon", d / "slots.txt") == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["f1"] == 100.0 and rep["intents_accuracy"] == 100.0 and rep["pairs"] == 30
    (d / "h.txt").write_text("\n".join(["atis_flight"] * 29) + "\n")
    assert run("score", "--ref", d / "t.txt", "--hyp", d / "h.txt", "--lexicon", d / "slots.txt") == 2


def test_stats(data, capsys):
    assert run("stats", data / "train.tsv") == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["utterances"] == 150
    assert rep["rows"][0]["intent"] == "atis_flight"
    assert sum(r["count"] for r in rep["rows"]) == 150


def test_bench_latency_cli(data, capsys):
    d = data
    (d / "long.jsonl").write_text(format_jsonl([long_utterance(46), long_utterance(38, seed=1)] + make_corpus(5, 3)))
    assert run("bench-latency", "--corpus", d / "long.jsonl", "--train", d / "train.tsv", "--duration", 0.1, "-o", d / "b.json") == 0
    rep = json.loads((d / "b.json").read_text())
    assert rep["rows"][0]["n_tokens"] == 46
    assert rep["within_budget"] is True
    assert run("bench-latency", "--corpus", d / "long.jsonl", "--ids", "nope", "--train", d / "train.tsv", "--duration", 0.1) == 2
