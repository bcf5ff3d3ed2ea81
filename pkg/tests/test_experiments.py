import math

import numpy as np
import pytest

from neckflow.bands import band_midpoint
from neckflow.experiments import (
    ExperimentConfig,
    chunk_rng,
    default_thresholds,
    distortion_suite,
    entry_scales,
    entry_window,
    scaling_suite,
    tail_estimate,
    upsilon0_batch,
)
from neckflow.transition import entry_data, upsilon0


def test_chunk_rng_reproducible():
    a = chunk_rng(7, 3).uniform(size=10)
    b = chunk_rng(7, 3).uniform(size=10)
    c = chunk_rng(7, 4).uniform(size=10)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_entry_window_spans_both_sides(prof4):
    lo, hi = entry_window(prof4)
    psi0 = prof4.asymptotic_angle()
    assert lo < psi0 < hi
    # the edges map back to |c| - 1 = 1/n0^2 on either side
    assert prof4.clairaut_constant(-1.0, lo) == pytest.approx(1.01, abs=1e-15)
    assert prof4.clairaut_constant(-1.0, hi) == pytest.approx(0.99, abs=1e-15)
    with pytest.raises(ValueError):
        entry_window(prof4, n0=0)


def test_entry_scales_matches_scalar_path(prof4):
    psi0 = prof4.asymptotic_angle()
    psi = psi0 + np.array([-1e-2, -1e-5, -1e-9, 1e-9, 1e-5, 1e-2])
    u, bounce = entry_scales(prof4, psi)
    for k in range(psi.size):
        ent = entry_data(prof4, float(psi[k]))
        assert u[k] == ent.u
        assert bounce[k] == (ent.c > 1.0)


def test_upsilon0_batch_matches_adaptive(prof4):
    psis = []
    for n in (12, 40, 200, 1000):
        for side in ("bouncing", "crossing"):
            psis.append(band_midpoint(prof4, n, side)[1])
    batch = upsilon0_batch(prof4, np.array(psis))
    for k, psi in enumerate(psis):
        assert batch[k] == pytest.approx(upsilon0(prof4, psi), rel=1e-10)


def test_upsilon0_batch_asymptotic_is_inf(prof4):
    psi0 = prof4.asymptotic_angle()
    # entry_scales can return u = 0 only exactly at a root of the product
    # form; feed psi0 itself, whose gap is the one-ulp residual or zero
    vals = upsilon0_batch(prof4, np.array([psi0]))
    assert vals[0] > 100.0 or math.isinf(vals[0])


def test_default_thresholds_monotone(prof4):
    thr = default_thresholds(prof4)
    assert thr.size >= 5
    assert np.all(np.diff(thr) > 0.0)
    # each threshold is an actual residence time of a crossing midpoint
    assert thr[0] == pytest.approx(
        2.0 * upsilon0(prof4, band_midpoint(prof4, 50, "crossing")[1]), rel=1e-12
    )


def test_tail_estimate_small_run_exponent():
    cfg = ExperimentConfig(r=4.0, samples=100_000, seed=0)
    est = tail_estimate(cfg)
    assert est.total == 100_000
    assert 3.5 <= est.exponent <= 4.5  # the 1e6 acceptance run pins +-0.2
    assert np.all(est.counts >= est.min_survivors)
    assert np.all(np.diff(est.counts) <= 0)  # survival is nonincreasing
    assert est.exponent == -est.fit.exponent


def test_tail_estimate_serial_parallel_identical():
    base = dict(r=4.0, samples=60_000, seed=5)
    serial = tail_estimate(ExperimentConfig(**base, threads=1))
    para = tail_estimate(ExperimentConfig(**base, threads=8))
    assert np.array_equal(serial.counts, para.counts)
    assert serial.exponent == para.exponent


def test_tail_estimate_rejects_tiny_runs():
    with pytest.raises(ValueError):
        tail_estimate(ExperimentConfig(samples=5_000))


def test_tail_estimate_drops_thin_thresholds():
    cfg = ExperimentConfig(r=4.0, samples=100_000, seed=1)
    # add a threshold far beyond the sampled tail: <20 survivors, dropped
    thr = np.append(default_thresholds(cfg.profile()), 5_000.0)
    est = tail_estimate(cfg, thresholds=thr)
    assert 5_000.0 in est.dropped
    # the record keeps the full grid; the fit just skips dropped entries
    assert len(est.thresholds) == len(thr)
    assert est.counts[-1] < 20
    assert est.min_survivors >= 20


def test_scaling_suite_exponent_windows(prof4):
    suite = scaling_suite(ExperimentConfig(r=4.0, n_min=25, n_max=800))
    fits = suite.fits
    assert 0.40 <= fits["upsilon0_pooled"].exponent <= 0.60
    for side in ("bouncing", "crossing"):
        assert 2.3 <= fits[f"zeta_prime_{side}"].exponent <= 2.7
        assert 2.3 <= fits[f"growth_0_{side}"].exponent <= 2.7
    assert 4.2 <= fits["zeta_second_crossing"].exponent <= 4.8
    assert len(suite.rows) == 2 * len({row["n"] for row in suite.rows})


def test_scaling_suite_deterministic(prof4):
    cfg = ExperimentConfig(r=4.0, n_min=25, n_max=400)
    a = scaling_suite(cfg)
    b = scaling_suite(cfg)
    assert a.rows == b.rows
    assert a.fits["upsilon0_pooled"].exponent == b.fits["upsilon0_pooled"].exponent


def test_distortion_suite_flat_trend(prof4):
    res = distortion_suite(ExperimentConfig(r=4.0, n_min=25, n_max=400))
    ms = [row["m_n"] for row in res.rows]
    assert all(1.0 <= m <= 5.0 for m in ms)
    assert abs(res.fits["m_n_trend"].exponent) <= 0.1


def test_experiment_config_roundtrip():
    cfg = ExperimentConfig(r=6.0, seed=11, samples=50_000)
    prof = cfg.profile()
    assert prof.r == 6.0 and prof.eps0 == 1.0
    d = cfg.as_dict()
    assert d["seed"] == 11 and d["samples"] == 50_000
    assert ExperimentConfig(**d) == cfg
