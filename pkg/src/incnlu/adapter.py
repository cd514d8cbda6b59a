"""External model line protocol and the per-prefix latency harness.

Protocol (one JSON object per line, UTF-8, strictly lock-step)::

    parent -> child   {"utterance_id": ..., "prefix_len": ..., "tokens": [...]}
    child  -> parent  {"target": ..., "intent_confidence": ...}

A response may echo ``utterance_id`` / ``prefix_len``; if it does they must
match the request it answers.
"""

from __future__ import annotations

import json
import logging
import os
import shlex
import subprocess
import time
from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from incnlu.evaluation import Hypothesis, HypothesisRecord, hypothesis_from_dict
from incnlu.incremental import IncrementalSeries

log = logging.getLogger(__name__)


class ProtocolError(RuntimeError):
    """The child process broke the line protocol or died."""


class ExternalModel:
    """A child process answering one request line with one response line."""

    def __init__(self, command: str | Sequence[str]):
        argv = shlex.split(command) if isinstance(command, str) else list(command)
        self.argv = argv
        self.proc = subprocess.Popen(
            argv,
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            text=True,
            encoding="utf-8",
            bufsize=1,
        )
        self.requests = 0

    def __enter__(self) -> ExternalModel:
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc_type is None:
            self.close()
        else:
            self.kill()

    def predict(self, utterance_id: str, tokens: Sequence[str]) -> Hypothesis:
        request = {"utterance_id": utterance_id, "prefix_len": len(tokens), "tokens": list(tokens)}
        self.requests += 1
        try:
            self.proc.stdin.write(json.dumps(request, ensure_ascii=False) + "\n")
            self.proc.stdin.flush()
        except (BrokenPipeError, OSError):
            raise ProtocolError(self._died(f"request {self.requests}")) from None
        line = self.proc.stdout.readline()
        if not line:
            raise ProtocolError(self._died(f"request {self.requests}"))
        try:
            obj = json.loads(line)
            if not isinstance(obj, dict):
                raise TypeError("response is not an object")
            hyp = hypothesis_from_dict(obj)
        except (ValueError, KeyError, TypeError) as e:
            raise ProtocolError(
                f"malformed response to request {self.requests} "
                f"({utterance_id!r}, {len(tokens)}): {e}; line: {line.rstrip()!r}"
            ) from None
        for key in ("utterance_id", "prefix_len"):
            if key in obj and obj[key] != request[key]:
                raise ProtocolError(
                    f"response {self.requests} is for {key}={obj[key]!r}, "
                    f"expected {request[key]!r}; line: {line.rstrip()!r}"
                )
        return hyp

    def _died(self, where: str) -> str:
        try:
            status = self.proc.wait(timeout=5)
        except subprocess.TimeoutExpired:
            self.proc.kill()
            status = self.proc.wait()
        return f"child {self.argv[0]!r} exited with status {status} at {where}"

    def close(self) -> int:
        """Close the child's input and wait; a nonzero exit status raises."""
        if self.proc.stdin and not self.proc.stdin.closed:
            try:
                self.proc.stdin.close()
            except OSError:
                pass
        status = self.proc.wait()
        if self.proc.stdout:
            self.proc.stdout.close()
        if status != 0:
            raise ProtocolError(f"child {self.argv[0]!r} exited with status {status}")
        return status

    def kill(self) -> None:
        if self.proc.poll() is None:
            self.proc.kill()
        self.proc.wait()
        for f in (self.proc.stdin, self.proc.stdout):
            if f:
                try:
                    f.close()
                except OSError:
                    pass


def run_external_model(
    command: str | Sequence[str],
    all_series: Iterable[IncrementalSeries],
    out_path: str | Path,
) -> int:
    """Send every partial record to the child and write its hypotheses.

    Lines go to ``<out>.partial`` as they arrive; the file is renamed to
    ``out_path`` only after the child exits cleanly, so a crash leaves the
    ``.partial`` file behind.  Returns the number of hypotheses written.
    """
    out_path = Path(out_path)
    partial = out_path.with_name(out_path.name + ".partial")
    count = 0
    with open(partial, "w", encoding="utf-8", newline="\n") as f, ExternalModel(command) as child:
        for s in all_series:
            for r in s.records:
                hyp = child.predict(s.utterance_id, r.tokens)
                rec = HypothesisRecord(s.utterance_id, len(r), hyp)
                f.write(json.dumps(rec.to_dict(), ensure_ascii=False) + "\n")
                count += 1
    os.replace(partial, out_path)
    return count


# -- latency


@dataclass
class UtteranceLatency:
    utterance_id: str
    n_tokens: int
    prefix_ms: list[float] = field(default_factory=list, repr=False)
    run_ms: list[float] = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        a = np.asarray(self.prefix_ms)
        return {
            "utterance_id": self.utterance_id,
            "n_tokens": self.n_tokens,
            "runs": len(self.run_ms),
            "prefixes": len(self.prefix_ms),
            "max_ms": round(float(a.max()), 3) if a.size else None,
            "mean_ms": round(float(a.mean()), 3) if a.size else None,
            "p99_ms": round(float(np.percentile(a, 99)), 3) if a.size else None,
            "max_run_ms": round(max(self.run_ms), 3) if self.run_ms else None,
        }

    @property
    def max_ms(self) -> float:
        return max(self.prefix_ms)

    @property
    def mean_ms(self) -> float:
        return float(np.mean(self.prefix_ms))

    @property
    def p99_ms(self) -> float:
        return float(np.percentile(self.prefix_ms, 99))


@dataclass
class LatencyReport:
    utterances: list[UtteranceLatency]
    duration_s: float
    threads: int = 1
    budget_ms: float | None = None

    @property
    def within_budget(self) -> bool | None:
        if self.budget_ms is None:
            return None
        return all(u.max_ms < self.budget_ms for u in self.utterances)

    def to_dict(self) -> dict:
        return {
            "duration_s": round(self.duration_s, 3),
            "threads": self.threads,
            "budget_ms": self.budget_ms,
            "within_budget": self.within_budget,
            "rows": [u.to_dict() for u in self.utterances],
        }


class BenchAborted(RuntimeError):
    def __init__(self, message: str, report: LatencyReport):
        super().__init__(message)
        self.report = report


def bench_latency(
    predict: Callable[[str, Sequence[str]], object],
    utterances: Sequence[tuple[str, Sequence[str]]],
    duration: float,
    budget_ms: float | None = None,
    clock: Callable[[], float] = time.perf_counter,
) -> LatencyReport:
    """Feed every prefix of every utterance, over and over, for ``duration`` seconds.

    Each prefix is processed from scratch, one at a time on the calling
    thread.  At least one full pass is always made.  The statistic of
    interest is the per-utterance maximum.
    """
    if duration <= 0:
        raise ValueError("duration must be > 0")
    stats = [UtteranceLatency(uid, len(toks)) for uid, toks in utterances]
    start = clock()
    report = LatencyReport(stats, 0.0, budget_ms=budget_ms)
    while True:
        for st, (uid, toks) in zip(stats, utterances):
            run_start = clock()
            for i in range(1, len(toks) + 1):
                t0 = clock()
                try:
                    predict(uid, toks[:i])
                except Exception as e:
                    report.duration_s = clock() - start
                    raise BenchAborted(f"model failed on {uid!r} prefix {i}: {e}", report) from e
                st.prefix_ms.append((clock() - t0) * 1000.0)
            st.run_ms.append((clock() - run_start) * 1000.0)
        elapsed = clock() - start
        if elapsed >= duration:
            report.duration_s = elapsed
            return report


def pin_to_cpu(cpu: int) -> None:
    """Restrict this process to one CPU (Linux only)."""
    os.sched_setaffinity(0, {cpu})
