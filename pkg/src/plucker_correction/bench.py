"""Timing harness comparing the correction methods on random 6-vectors.

All methods see the same inputs: one seeded generator produces them in
batches of ``batch`` rows. Each batch is converted to Python floats outside
the timed region, then the kernel is called once per row inside it. Per-call
time for a batch is ``batch time / rows``; the reported median is over batches.

Outputs are folded into a checksum (``math.fsum`` per batch, then over
batches). That keeps results observable and lets a timing run be compared
with an untimed correctness run.
"""
from __future__ import annotations

import csv
import gc
import io
import json
import math
import os
import platform
import statistics
import threading
import time
from dataclasses import asdict, dataclass, field
from typing import Dict, Iterator, List, Sequence

import numpy as np

from .bs import bs3, bs_iter3, bs_lsvd3
from .errors import ConfigError
from .geometry import Method, VecPair
from .lmpc import correct_lmpc, lmpc3

KERNELS = {
    Method.LMPC: lmpc3,
    Method.BS: bs3,
    Method.BS_LSVD: bs_lsvd3,
    Method.BS_ITER: bs_iter3,
}

DISTRIBUTIONS = ("uniform", "normal")
MAX_INPUT_BYTES = 1 << 31

_timing_lock = threading.Lock()


@dataclass(frozen=True)
class BenchConfig:
    trials: int = 10 ** 6
    seed: int = 0
    methods: Sequence[Method] = (Method.LMPC, Method.BS, Method.BS_LSVD, Method.BS_ITER)
    warmup: int = 10 ** 4
    distribution: str = "uniform"  # uniform on [-1, 1]^6, or standard normal
    batch: int = 1000
    stream: bool = False  # generate each batch on the fly instead of up front
    pin_cpu: bool = True

    def __post_init__(self):
        if not isinstance(self.trials, int) or self.trials < 1:
            raise ConfigError("trials must be a positive integer")
        if self.warmup < 0:
            raise ConfigError("warmup must be >= 0")
        if self.batch < 1:
            raise ConfigError("batch must be >= 1")
        if self.distribution not in DISTRIBUTIONS:
            raise ConfigError(f"distribution must be one of {DISTRIBUTIONS}")
        try:
            methods = tuple(Method(m) for m in self.methods)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if not methods:
            raise ConfigError("at least one method is required")
        object.__setattr__(self, "methods", methods)
        if not self.stream and self.trials * 6 * 8 > MAX_INPUT_BYTES:
            raise ConfigError(
                f"{self.trials} trials need {self.trials * 48 / 2**30:.1f} GiB of inputs; "
                "use streaming mode (stream=True, --stream) instead"
            )


@dataclass
class MethodTiming:
    total_seconds: float
    median_call_microseconds: float
    mean_call_microseconds: float
    calls: int
    checksum: float


@dataclass
class BenchReport:
    trials: int
    seed: int
    distribution: str
    warmup: int
    methods: Dict[str, MethodTiming]
    ratios: Dict[str, float]  # "SLOW/FAST" -> median(SLOW) / median(FAST)
    environment: Dict[str, str] = field(default_factory=dict)

    def speedup(self, fast: str, slow: str) -> float:
        return self.ratios[f"{slow}/{fast}"]


def _batches(config: BenchConfig) -> Iterator[np.ndarray]:
    rng = np.random.default_rng(config.seed)
    left = config.trials
    while left > 0:
        m = min(left, config.batch)
        if config.distribution == "uniform":
            yield rng.uniform(-1.0, 1.0, (m, 6))
        else:
            yield rng.standard_normal((m, 6))
        left -= m


def generate_inputs(config: BenchConfig) -> List[List[List[float]]]:
    """All input batches as nested Python lists (rows of 6 floats)."""
    return [b.tolist() for b in _batches(config)]


def checksum(batches_of_outputs) -> float:
    return math.fsum(math.fsum(c for row in out for c in row) for out in batches_of_outputs)


def reference_checksum(config: BenchConfig, method: Method = Method.LMPC) -> float:
    """Checksum from the object API on the benchmark inputs, with no timing involved."""
    if method is not Method.LMPC:
        return checksum([[KERNELS[method](*r) for r in rows] for rows in generate_inputs(config)])
    outs = []
    for rows in generate_inputs(config):
        outs.append([tuple(correct_lmpc(VecPair.from_flat(r), form="direct").flat()) for r in rows])
    return checksum(outs)


def environment() -> Dict[str, str]:
    cpu = platform.processor() or platform.machine()
    try:
        with open("/proc/cpuinfo") as fh:
            for line in fh:
                if line.startswith("model name"):
                    cpu = line.split(":", 1)[1].strip()
                    break
    except OSError:
        pass
    build = (f"{platform.python_implementation()} {platform.python_version()}, "
             f"numpy {np.__version__}")
    return {"cpu": cpu, "build": build, "platform": platform.platform()}


def _time_method(kernel, batches, config: BenchConfig) -> MethodTiming:
    if config.warmup:
        rows = batches[0] if isinstance(batches, list) else next(_batches(config)).tolist()
        done = 0
        while done < config.warmup:
            chunk = rows[: config.warmup - done]
            for r in chunk:
                kernel(*r)
            done += len(chunk)
    per_call, total, outs = [], 0, []
    source = batches if isinstance(batches, list) else (b.tolist() for b in _batches(config))
    for rows in source:
        t0 = time.perf_counter_ns()
        out = [kernel(*r) for r in rows]
        t1 = time.perf_counter_ns()
        total += t1 - t0
        per_call.append((t1 - t0) / len(rows) / 1e3)
        outs.append(math.fsum(c for row in out for c in row))
    return MethodTiming(
        total_seconds=total / 1e9,
        median_call_microseconds=statistics.median(per_call),
        mean_call_microseconds=total / config.trials / 1e3,
        calls=config.trials,
        checksum=math.fsum(outs),
    )


def _ratios(methods: Dict[str, MethodTiming]) -> Dict[str, float]:
    return {
        f"{slow}/{fast}": methods[slow].median_call_microseconds / methods[fast].median_call_microseconds
        for slow in methods for fast in methods if slow != fast
    }


def run_benchmark(config: BenchConfig) -> BenchReport:
    """Time every configured method; single-threaded, one benchmark at a time per process."""
    if not _timing_lock.acquire(blocking=False):
        raise RuntimeError("a benchmark is already running in this process")
    affinity = None
    gc_was_enabled = gc.isenabled()
    try:
        if config.pin_cpu and hasattr(os, "sched_getaffinity"):
            affinity = os.sched_getaffinity(0)
            os.sched_setaffinity(0, {min(affinity)})
        batches = None if config.stream else generate_inputs(config)
        results = {}
        for m in config.methods:
            gc.disable()
            try:
                results[m.value] = _time_method(KERNELS[m], batches, config)
            finally:
                if gc_was_enabled:
                    gc.enable()
    finally:
        if affinity is not None:
            os.sched_setaffinity(0, affinity)
        _timing_lock.release()
    return BenchReport(
        trials=config.trials,
        seed=config.seed,
        distribution=config.distribution,
        warmup=config.warmup,
        methods=results,
        ratios=_ratios(results),
        environment=environment(),
    )


_FIELDS = ("total_seconds", "median_call_microseconds", "mean_call_microseconds", "calls", "checksum")
_HEADER_KEYS = ("trials", "seed", "distribution", "warmup")


def emit_report(report: BenchReport, fmt: str = "markdown") -> str:
    """Render as ``markdown`` (method | total | median table), ``csv`` or ``json``.

    CSV carries run parameters and ratios (environment under ``env.``) as leading
    ``# key=value`` lines, then one row per method.
    """
    fmt = fmt.lower()
    if fmt == "json":
        return json.dumps(asdict(report), indent=2) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        for key in _HEADER_KEYS:
            buf.write(f"# {key}={getattr(report, key)}\n")
        for key, value in report.environment.items():
            buf.write(f"# env.{key}={value}\n")
        for key, value in report.ratios.items():
            buf.write(f"# ratio.{key}={value!r}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(("method",) + _FIELDS)
        for name, t in report.methods.items():
            writer.writerow([name] + [repr(getattr(t, f)) for f in _FIELDS])
        return buf.getvalue()
    if fmt == "markdown":
        lines = [
            f"Trials: {report.trials} ({report.distribution}, seed {report.seed}, "
            f"warmup {report.warmup})",
            "",
            "| Algorithm | For all trials | For each trial (median) | Mean per trial |",
            "|---|---|---|---|",
        ]
        for name, t in report.methods.items():
            lines.append(f"| {name} | {t.total_seconds:.4f} s | "
                         f"{t.median_call_microseconds:.3f} µs | {t.mean_call_microseconds:.3f} µs |")
        if report.ratios:
            lines += ["", "| Slower/faster (median) | Ratio |", "|---|---|"]
            for key, value in report.ratios.items():
                if value >= 1.0:
                    lines.append(f"| {key} | {value:.2f}x |")
        if report.environment:
            lines += ["", *(f"- {k}: {v}" for k, v in report.environment.items())]
        return "\n".join(lines) + "\n"
    raise ConfigError(f"unknown report format {fmt!r}")


def parse_report(text: str, fmt: str) -> BenchReport:
    """Inverse of :func:`emit_report` for ``csv`` and ``json``."""
    fmt = fmt.lower()
    if fmt == "json":
        d = json.loads(text)
        d["methods"] = {k: MethodTiming(**v) for k, v in d["methods"].items()}
        return BenchReport(**d)
    if fmt != "csv":
        raise ConfigError(f"cannot parse {fmt!r} reports")
    header, env, ratios, body = {}, {}, {}, []
    for line in text.splitlines():
        if line.startswith("# "):
            key, _, value = line[2:].partition("=")
            if key.startswith("env."):
                env[key[4:]] = value
            elif key.startswith("ratio."):
                ratios[key[6:]] = float(value)
            else:
                header[key] = value
        elif line:
            body.append(line)
    methods = {}
    for row in csv.DictReader(body):
        methods[row["method"]] = MethodTiming(
            total_seconds=float(row["total_seconds"]),
            median_call_microseconds=float(row["median_call_microseconds"]),
            mean_call_microseconds=float(row["mean_call_microseconds"]),
            calls=int(row["calls"]),
            checksum=float(row["checksum"]),
        )
    return BenchReport(
        trials=int(header["trials"]), seed=int(header["seed"]),
        distribution=header["distribution"], warmup=int(header["warmup"]),
        methods=methods, ratios=ratios, environment=env,
    )
