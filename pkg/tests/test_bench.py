import json
import threading
import warnings

import pytest

from plucker_correction.bench import (
    BenchConfig, BenchReport, emit_report, generate_inputs, parse_report, reference_checksum,
    run_benchmark,
)
from plucker_correction.errors import ConfigError
from plucker_correction.geometry import Method


@pytest.fixture(scope="module")
def small_report():
    return run_benchmark(BenchConfig(trials=2500, seed=7, warmup=100))


def test_config_validation():
    with pytest.raises(ConfigError):
        BenchConfig(trials=0)
    with pytest.raises(ConfigError):
        BenchConfig(warmup=-1)
    with pytest.raises(ConfigError):
        BenchConfig(methods=["NOPE"])
    with pytest.raises(ConfigError):
        BenchConfig(distribution="cauchy")
    with pytest.raises(ConfigError, match="stream"):
        BenchConfig(trials=10 ** 9)
    BenchConfig(trials=10 ** 9, stream=True)


def test_single_trial():
    rep = run_benchmark(BenchConfig(trials=1, warmup=0, methods=["LMPC"]))
    assert rep.methods["LMPC"].calls == 1
    assert rep.ratios == {}


def test_report_structure(small_report):
    assert list(small_report.methods) == ["LMPC", "BS", "BS_LSVD", "BS_ITER"]
    for name, t in small_report.methods.items():
        assert t.calls == 2500
        assert t.total_seconds > 0
        assert t.mean_call_microseconds == pytest.approx(t.total_seconds / 2500 * 1e6)
    for key, ratio in small_report.ratios.items():
        slow, fast = key.split("/")
        m = small_report.methods
        assert ratio == pytest.approx(
            m[slow].median_call_microseconds / m[fast].median_call_microseconds, rel=1e-9)


def test_same_inputs_for_all_methods(small_report):
    sums = {k: t.checksum for k, t in small_report.methods.items()}
    # all methods compute the same minimiser on random inputs
    for v in sums.values():
        assert v == pytest.approx(sums["LMPC"], rel=1e-9)


def test_inputs_deterministic():
    cfg = BenchConfig(trials=1500, seed=3)
    assert generate_inputs(cfg) == generate_inputs(cfg)
    assert generate_inputs(cfg) != generate_inputs(BenchConfig(trials=1500, seed=4))
    normal = generate_inputs(BenchConfig(trials=10, distribution="normal"))
    assert len(normal[0]) == 10


def test_checksum_matches_untimed_run():
    cfg = BenchConfig(trials=3000, seed=11, warmup=50, methods=["LMPC"])
    r1 = run_benchmark(cfg)
    r2 = run_benchmark(cfg)
    assert r1.methods["LMPC"].checksum == r2.methods["LMPC"].checksum
    assert r1.methods["LMPC"].checksum == reference_checksum(cfg)


def test_streaming_matches_pregenerated():
    base = dict(trials=2100, seed=5, warmup=10, methods=["LMPC", "BS_LSVD"])
    a = run_benchmark(BenchConfig(**base))
    b = run_benchmark(BenchConfig(stream=True, **base))
    for m in a.methods:
        assert a.methods[m].checksum == b.methods[m].checksum


def test_refuses_concurrent_runs():
    from plucker_correction import bench
    assert bench._timing_lock.acquire(blocking=False)
    try:
        with pytest.raises(RuntimeError):
            run_benchmark(BenchConfig(trials=10, warmup=0))
    finally:
        bench._timing_lock.release()


@pytest.mark.parametrize("fmt", ["csv", "json"])
def test_round_trip(small_report, fmt):
    text = emit_report(small_report, fmt)
    assert parse_report(text, fmt) == small_report


def test_markdown(small_report):
    md = emit_report(small_report, "markdown")
    for name in small_report.methods:
        assert sum(line.startswith(f"| {name} |") for line in md.splitlines()) == 1
    assert "For each trial (median)" in md


def test_json_has_environment(small_report):
    d = json.loads(emit_report(small_report, "json"))
    assert {"cpu", "build"} <= set(d["environment"])


def test_unknown_format(small_report):
    with pytest.raises(ConfigError):
        emit_report(small_report, "xml")


def test_warmup_soft_check():
    # informational only: warm caches should not make calls slower
    cold = run_benchmark(BenchConfig(trials=20000, warmup=0, methods=["LMPC"]))
    warm = run_benchmark(BenchConfig(trials=20000, warmup=10 ** 4, methods=["LMPC"]))
    c = cold.methods["LMPC"].median_call_microseconds
    w = warm.methods["LMPC"].median_call_microseconds
    if w > 1.2 * c:
        warnings.warn(f"warm median {w:.3f} us exceeds cold {c:.3f} us by more than 20%")
