"""Command-line front end.

Every subcommand reads files and writes one artifact, so dataset variants
(clean / noisy, full / incremental, human / ASR) are built by chaining calls.
Exit codes: 0 ok, 1 usage, 2 data error, 3 child-protocol error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from incnlu import __version__
from incnlu._io import iter_jsonl, write_atomic
from incnlu.adapter import BenchAborted, ExternalModel, ProtocolError, bench_latency, pin_to_cpu, run_external_model
from incnlu.baseline import BaselineModel, run_on_series, train_baseline, train_baseline_from_series
from incnlu.corpus import CorpusError, SlotLexicon, format_jsonl, format_tsv, parse_corpus, read_corpus, slot_lexicon
from incnlu.evaluation import (
    DEFAULT_PERCENTS,
    DEFAULT_THRESHOLDS,
    MissingHypotheses,
    build_traces,
    evaluate_confidence,
    evaluate_partial,
    hypothesis_map,
    read_hypotheses,
    render_table,
    write_hypotheses,
)
from incnlu.incremental import (
    AT_LEAST,
    EXACT,
    IncrementalSeries,
    PartialRecord,
    align_asr_partials,
    generate_prefixes,
    read_series,
    write_series,
)
from incnlu.metrics import co_mc_scores, intents_accuracy
from incnlu.noise import NoiseConfig, NoiseGenerator, Vocabulary, build_vocabulary, derive_seed, make_rng
from incnlu.seq2seq import iob_to_target, parse_target
from incnlu.stats import corpus_stats

log = logging.getLogger("incnlu")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_PROTOCOL = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# -- loading helpers


def _first_object(path: Path) -> dict | None:
    with open(path, encoding="utf-8") as f:
        for line in f:
            if line.strip():
                if not line.lstrip().startswith("{"):
                    return None
                try:
                    return json.loads(line)
                except json.JSONDecodeError as e:
                    raise CorpusError(f"{path}: {e}", 1) from None
    return None


def is_incremental_file(path: Path) -> bool:
    obj = _first_object(path)
    return obj is not None and "target" in obj


def load_series(path: Path, lowercase: bool = True, prefixes: bool = False) -> list[IncrementalSeries]:
    """Incremental dataset file as is; an annotated corpus as prefix series or full-only series."""
    if is_incremental_file(path):
        return read_series(path)
    records = read_corpus(path, lowercase=lowercase)
    if prefixes:
        return [generate_prefixes(r) for r in records]
    return [
        IncrementalSeries(r.id, (PartialRecord(r.tokens, iob_to_target(r), is_full=True),))
        for r in records
    ]


def load_lexicon(path: Path) -> SlotLexicon:
    """Slots from an annotated corpus, or from a plain list (one slot per line)."""
    text = path.read_text(encoding="utf-8")
    first = next((ln for ln in text.splitlines() if ln.strip()), "")
    if first.lstrip().startswith("{") or "\t" in first:
        return slot_lexicon(parse_corpus(text))
    return SlotLexicon(frozenset(ln.strip() for ln in text.splitlines() if ln.strip()))


def read_lines(path: Path) -> list[str]:
    return path.read_text(encoding="utf-8").splitlines()


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _require_files(*paths: Path | None) -> None:
    for p in paths:
        if p is not None and not p.is_file():
            raise UsageError(f"no such file: {p}")


def emit_report(report: dict, args) -> None:
    text = json.dumps(report, indent=2, ensure_ascii=False) + "\n"
    if args.output:
        write_atomic(args.output, text)
    if args.table:
        sys.stdout.write(render_table(report))
    elif not args.output:
        sys.stdout.write(text)


# -- subcommands


def cmd_convert(args) -> int:
    _require_files(args.input)
    if not (args.src or args.tgt or args.records or args.tsv):
        raise UsageError("convert needs at least one of --src, --tgt, --records, --tsv")
    records = read_corpus(args.input, lowercase=not args.keep_case)
    if args.src:
        write_atomic(args.src, "".join(" ".join(r.tokens) + "\n" for r in records))
    if args.tgt:
        write_atomic(args.tgt, "".join(iob_to_target(r) + "\n" for r in records))
    if args.records:
        write_atomic(args.records, format_jsonl(records))
    if args.tsv:
        write_atomic(args.tsv, format_tsv(records))
    log.info("converted %d utterances", len(records))
    return EXIT_OK


def cmd_gen_incremental(args) -> int:
    _require_files(args.input)
    records = read_corpus(args.input, lowercase=not args.keep_case)
    series = [generate_prefixes(r) for r in records]
    write_series(args.output, series)
    log.info("%d utterances -> %d partial records", len(records), sum(len(s) for s in series))
    return EXIT_OK


def cmd_build_vocab(args) -> int:
    _require_files(args.train, *(args.external or []))
    records = read_corpus(args.train, lowercase=not args.keep_case)
    external: list[str] = []
    for p in args.external or []:
        toks = p.read_text(encoding="utf-8").split()
        external += toks if args.keep_case else [t.lower() for t in toks]
    vocab = build_vocabulary((t for r in records for t in r.tokens), external, args.size)
    vocab.save(args.output)
    log.info("vocabulary: %d words (%d from training data)", len(vocab), vocab.n_in_domain)
    return EXIT_OK


def cmd_add_noise(args) -> int:
    _require_files(args.input, args.vocab)
    cfg = NoiseConfig(tau=args.tau, op_weights=tuple(args.weights), seed=args.seed)
    gen = NoiseGenerator(Vocabulary.load(args.vocab), cfg)
    series = load_series(args.input, lowercase=not args.keep_case)
    out = []
    n_ops = 0
    for s in series:
        recs = []
        for k, r in enumerate(s.records, 1):
            rng = make_rng(derive_seed(cfg.seed, s.utterance_id, k))
            toks, ops = gen.apply(r.tokens, rng)
            n_ops += len(ops)
            recs.append(PartialRecord(tuple(toks), r.target, r.is_full))
        out.append(IncrementalSeries(s.utterance_id, tuple(recs)))
    write_series(args.output, out)
    log.info("added %d noise operations to %d records", n_ops, sum(len(s) for s in out))
    return EXIT_OK


def read_asr_partials(path: Path) -> dict[str, list[list[str]]]:
    """ASR partial file: ``{"utterance_id", "tokens"}`` per line, in emission order."""
    grouped: dict[str, list[list[str]]] = {}
    for lineno, obj in iter_jsonl(path):
        try:
            toks = obj["tokens"]
            toks = toks.split() if isinstance(toks, str) else list(toks)
            grouped.setdefault(str(obj["utterance_id"]), []).append(toks)
        except (KeyError, TypeError) as e:
            raise CorpusError(f"bad ASR partial: {e}", lineno) from None
    return grouped


def cmd_align_asr(args) -> int:
    _require_files(args.human, args.asr)
    human = {s.utterance_id: s for s in load_series(args.human, lowercase=not args.keep_case, prefixes=True)}
    partials = read_asr_partials(args.asr)
    out = []
    skipped = 0
    for uid, parts in partials.items():
        if uid not in human:
            raise CorpusError(f"ASR partials for unknown utterance {uid!r}")
        if not args.keep_case:
            parts = [[t.lower() for t in p] for p in parts]
        s = align_asr_partials(parts, human[uid])
        skipped += s.skipped
        if s.records:
            out.append(s)
    write_series(args.output, out)
    if skipped:
        log.warning("skipped %d empty ASR partial(s) in total", skipped)
    return EXIT_OK


def _baseline_from_args(args) -> BaselineModel:
    if args.model:
        _require_files(args.model)
        return BaselineModel.load(args.model)
    if args.train:
        _require_files(args.train)
        if is_incremental_file(args.train):
            if not getattr(args, "lexicon", None):
                raise UsageError("training on an incremental dataset needs --lexicon")
            _require_files(args.lexicon)
            model = train_baseline_from_series(read_series(args.train), load_lexicon(args.lexicon), alpha=args.alpha)
        else:
            model = train_baseline(read_corpus(args.train, lowercase=not args.keep_case), alpha=args.alpha)
        if getattr(args, "save_model", None):
            model.save(args.save_model)
        return model
    raise UsageError("need --model or --train")


def cmd_run_baseline(args) -> int:
    _require_files(args.input)
    model = _baseline_from_args(args)
    series = load_series(args.input, lowercase=not args.keep_case)
    write_hypotheses(args.output, run_on_series(model, series))
    return EXIT_OK


def cmd_run_model(args) -> int:
    _require_files(args.input)
    series = load_series(args.input, lowercase=not args.keep_case)
    n = run_external_model(args.cmd, series, args.output)
    log.info("wrote %d hypotheses", n)
    return EXIT_OK


def cmd_score(args) -> int:
    _require_files(args.ref, args.hyp, args.lexicon)
    lex = load_lexicon(args.lexicon)
    refs, hyps = read_lines(args.ref), read_lines(args.hyp)
    if len(refs) != len(hyps):
        raise CorpusError(f"{len(refs)} reference lines vs {len(hyps)} hypothesis lines")
    pairs = [(parse_target(r, lex), parse_target(h, lex)) for r, h in zip(refs, hyps)]
    s = co_mc_scores(pairs)
    acc = intents_accuracy((r.intents, h.intents) for r, h in pairs) if pairs else 0.0
    report = {
        "tp": s.true_positives,
        "ref_len": s.ref_len,
        "hyp_len": s.hyp_len,
        "precision": round(100 * s.precision, 2),
        "recall": round(100 * s.recall, 2),
        "f1": round(100 * s.f1, 2),
        "intents_accuracy": round(100 * acc, 2),
        "pairs": s.pairs,
    }
    emit_report(report, args)
    return EXIT_OK


def cmd_eval_partial(args) -> int:
    _require_files(args.gold, args.hyps, args.lexicon)
    gold = read_series(args.gold)
    hyps = hypothesis_map(read_hypotheses(args.hyps))
    report = evaluate_partial(gold, hyps, args.percents, args.mode, load_lexicon(args.lexicon))
    emit_report(report.to_dict(), args)
    return EXIT_OK


def cmd_eval_confidence(args) -> int:
    _require_files(args.gold, args.hyps)
    gold = read_series(args.gold)
    traces = build_traces(read_hypotheses(args.hyps), gold)
    gold_intents = {s.utterance_id: parse_target(s.full.target, ()).intents for s in gold}
    report = evaluate_confidence(traces, gold_intents, args.thresholds)
    emit_report(report.to_dict(), args)
    return EXIT_OK


def cmd_stats(args) -> int:
    _require_files(args.input)
    emit_report(corpus_stats(read_corpus(args.input, lowercase=not args.keep_case)), args)
    return EXIT_OK


def stress_selection(records) -> list:
    """The longest utterance and the one with the longest target, as in the reference protocol."""
    longest = max(records, key=lambda r: (len(r.tokens), r.id))
    longest_target = max(records, key=lambda r: (len(iob_to_target(r).split()), r.id))
    return [longest] if longest_target is longest else [longest, longest_target]


def cmd_bench_latency(args) -> int:
    _require_files(args.corpus)
    records = read_corpus(args.corpus, lowercase=not args.keep_case)
    if args.ids:
        by_id = {r.id: r for r in records}
        missing = [i for i in args.ids if i not in by_id]
        if missing:
            raise CorpusError(f"unknown utterance ids: {missing}")
        chosen = [by_id[i] for i in args.ids]
    else:
        chosen = stress_selection(records)
    if args.cpu is not None:
        pin_to_cpu(args.cpu)
    utterances = [(r.id, list(r.tokens)) for r in chosen]
    if args.cmd:
        with ExternalModel(args.cmd) as child:
            report = _bench(child.predict, utterances, args)
    else:
        model = _baseline_from_args(args)
        report = _bench(lambda _uid, toks: model.predict(toks), utterances, args)
    emit_report(report.to_dict(), args)
    return EXIT_OK


def _bench(predict, utterances, args):
    try:
        return bench_latency(predict, utterances, args.duration, budget_ms=args.budget_ms)
    except BenchAborted as e:
        sys.stderr.write(json.dumps(e.report.to_dict(), indent=2) + "\n")
        raise


# -- parser


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="incnlu", description="Incremental NLU dataset and evaluation toolkit.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_, description=help_)
        p.set_defaults(func=func)
        p.add_argument("--keep-case", action="store_true", help="do not lowercase tokens on import")
        return p

    def report_opts(p):
        p.add_argument("-o", "--output", type=Path, help="write the JSON report here")
        p.add_argument("--table", action="store_true", help="print an aligned text table")

    p = add("convert", cmd_convert, "IOB2 corpus -> parallel source/target files")
    p.add_argument("input", type=Path)
    p.add_argument("--src", type=Path, help="source utterances, one per line")
    p.add_argument("--tgt", type=Path, help="target sequences, one per line")
    p.add_argument("--records", type=Path, help="normalized corpus as JSONL")
    p.add_argument("--tsv", type=Path, help="normalized corpus as TSV")

    p = add("gen-incremental", cmd_gen_incremental, "annotated corpus -> prefix dataset")
    p.add_argument("input", type=Path)
    p.add_argument("-o", "--output", type=Path, required=True)

    p = add("build-vocab", cmd_build_vocab, "noise vocabulary from training tokens plus external fillers")
    p.add_argument("--train", type=Path, required=True)
    p.add_argument("--external", type=Path, nargs="*", help="plain-text token streams")
    p.add_argument("--size", type=int, default=10_000)
    p.add_argument("-o", "--output", type=Path, required=True)

    p = add("add-noise", cmd_add_noise, "inject artificial ASR-like noise into source tokens")
    p.add_argument("input", type=Path, help="incremental dataset or annotated corpus")
    p.add_argument("-o", "--output", type=Path, required=True)
    p.add_argument("--vocab", type=Path, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--tau", type=float, default=0.08)
    p.add_argument("--weights", type=_float_list, default=[5.0, 1.0, 1.0], help="sub,ins,del (default 5,1,1)")

    p = add("align-asr", cmd_align_asr, "attach human-prefix targets to ASR partials by length")
    p.add_argument("--human", type=Path, required=True, help="human corpus or human incremental dataset")
    p.add_argument("--asr", type=Path, required=True, help="JSONL of {utterance_id, tokens} in emission order")
    p.add_argument("-o", "--output", type=Path, required=True)

    p = add("run-baseline", cmd_run_baseline, "hypotheses from the built-in baseline model")
    p.add_argument("--input", type=Path, required=True)
    p.add_argument("-o", "--output", type=Path, required=True)
    p.add_argument("--model", type=Path, help="saved baseline model")
    p.add_argument("--train", type=Path, help="train on this corpus or incremental dataset instead")
    p.add_argument("--lexicon", type=Path, help="slot names, needed when --train is an incremental dataset")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--save-model", type=Path)

    p = add("run-model", cmd_run_model, "hypotheses from an external model over the line protocol")
    p.add_argument("--cmd", required=True, help="child command line")
    p.add_argument("--input", type=Path, required=True)
    p.add_argument("-o", "--output", type=Path, required=True)

    p = add("score", cmd_score, "CO-MC F1 and intents accuracy of aligned target files")
    p.add_argument("--ref", type=Path, required=True)
    p.add_argument("--hyp", type=Path, required=True)
    p.add_argument("--lexicon", type=Path, required=True, help="annotated corpus or slot list")
    report_opts(p)

    p = add("eval-partial", cmd_eval_partial, "partial utterances processing")
    p.add_argument("--gold", type=Path, required=True)
    p.add_argument("--hyps", type=Path, required=True)
    p.add_argument("--lexicon", type=Path, required=True)
    p.add_argument("--percents", type=_int_list, default=list(DEFAULT_PERCENTS))
    p.add_argument("--mode", choices=[EXACT, AT_LEAST], default=EXACT)
    report_opts(p)

    p = add("eval-confidence", cmd_eval_confidence, "confidence based processing")
    p.add_argument("--gold", type=Path, required=True)
    p.add_argument("--hyps", type=Path, required=True)
    p.add_argument("--thresholds", type=_float_list, default=list(DEFAULT_THRESHOLDS))
    report_opts(p)

    p = add("stats", cmd_stats, "corpus size and intent distribution")
    p.add_argument("input", type=Path)
    report_opts(p)

    p = add("bench-latency", cmd_bench_latency, "per-prefix latency of a model")
    p.add_argument("--corpus", type=Path, required=True)
    p.add_argument("--ids", nargs="*", help="utterances to time (default: longest + longest target)")
    p.add_argument("--model", type=Path)
    p.add_argument("--train", type=Path)
    p.add_argument("--lexicon", type=Path)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--cmd", help="time an external model instead")
    p.add_argument("--duration", type=float, default=900.0, help="seconds (default 900)")
    p.add_argument("--budget-ms", type=float, default=50.0)
    p.add_argument("--cpu", type=int, help="pin to this CPU")
    report_opts(p)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    if getattr(args, "percents", None) is not None and any(not 0 < p <= 100 for p in args.percents):
        parser.error("--percents must be in (0, 100]")
    try:
        return args.func(args)
    except UsageError as e:
        sys.stderr.write(f"incnlu {args.command}: {e}\n")
        return EXIT_USAGE
    except ProtocolError as e:
        sys.stderr.write(f"incnlu {args.command}: protocol error: {e}\n")
        return EXIT_PROTOCOL
    except BenchAborted as e:
        sys.stderr.write(f"incnlu {args.command}: {e}\n")
        return EXIT_PROTOCOL if isinstance(e.__cause__, ProtocolError) else EXIT_DATA
    except (CorpusError, MissingHypotheses, ValueError, KeyError, OSError) as e:
        sys.stderr.write(f"incnlu {args.command}: {e}\n")
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
