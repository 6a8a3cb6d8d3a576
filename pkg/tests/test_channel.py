"""Channel model, Monte Carlo harness, and the outage estimator.

Statistical assertions use 3-standard-error bands around analytically
known moments (unit-variance complex fading, half-variance real noise,
the scalar Rayleigh outage closed form); everything else is structural
or a frozen-seed reproducibility check.
"""

import json
import math
import os

import numpy as np
import pytest

from slast.channel import (ChannelRealization, SimConfig, SimResult,
                           build_sim_code, draw_noise, outage_curve,
                           outage_probability, realize_channel,
                           run_montecarlo)
from slast.reim import mat_to_real_vec


# -- channel realizations ---------------------------------------------------------

def test_real_matrix_block_structure():
    rng = np.random.default_rng(61)
    ch = realize_channel(2, 3, rng)
    K = np.kron(np.eye(2), ch.complex_matrix)
    h, w = K.shape
    R = ch.real
    assert R.shape == (2 * h, 2 * w)
    assert np.allclose(R[:h, :w], K.real, atol=1e-12)
    assert np.allclose(R[h:, w:], K.real, atol=1e-12)
    assert np.allclose(R[:h, w:], -K.imag, atol=1e-12)
    assert np.allclose(R[h:, :w], K.imag, atol=1e-12)


def test_scalar_channel_is_rotation_blocks():
    rng = np.random.default_rng(62)
    ch = realize_channel(1, 1, rng, blocks=3)
    a = ch.complex_matrix[0, 0]
    block = np.array([[a.real, -a.imag], [a.imag, a.real]])
    assert ch.real.shape == (6, 6)
    assert np.allclose(ch.real, np.kron(np.eye(3), block), atol=1e-12)


def test_real_complex_transmission_equivalence():
    rng = np.random.default_rng(63)
    for m, n, blocks in ((2, 2, 1), (2, 3, 2), (1, 1, 3)):
        ch = realize_channel(m, n, rng, blocks=blocks)
        X = (rng.standard_normal((m, m * blocks))
             + 1j * rng.standard_normal((m, m * blocks)))
        lhs = ch.real @ mat_to_real_vec(X, block_cols=m)
        rhs = mat_to_real_vec(ch.complex_matrix @ X, block_cols=m)
        assert np.max(np.abs(lhs - rhs)) < 1e-10


def test_channel_entries_unit_variance():
    rng = np.random.default_rng(64)
    sq = np.concatenate([np.abs(realize_channel(2, 2, rng).complex_matrix
                                ).ravel() ** 2 for _ in range(25_000)])
    se = float(np.std(sq) / math.sqrt(sq.size))
    assert abs(float(np.mean(sq)) - 1.0) <= 3.0 * se


def test_channel_draws_deterministic():
    a = [realize_channel(2, 2, np.random.default_rng(99)).complex_matrix
         for _ in range(1)]
    b = [realize_channel(2, 2, np.random.default_rng(99)).complex_matrix
         for _ in range(1)]
    assert np.array_equal(a[0], b[0])
    assert isinstance(realize_channel(2, 2, np.random.default_rng(0)),
                      ChannelRealization)


def test_noise_variance_half_per_real_dimension():
    rng = np.random.default_rng(65)
    w = draw_noise(1, 50_000, rng)
    assert w.shape == (100_000,)
    sq = w * w
    se = float(np.std(sq) / math.sqrt(sq.size))
    assert abs(float(np.mean(sq)) - 0.5) <= 3.0 * se


# -- configuration -----------------------------------------------------------------

def test_config_validation_errors():
    good = dict(code="golden", q=2, snr_db=(10.0,), trials=10, seed=1)
    SimConfig(**good).validate()
    bad = [dict(code="nope"), dict(decoder="zf"), dict(q=0), dict(l=0),
           dict(n_rx=0), dict(snr_db=()), dict(trials=0)]
    for kw in bad:
        cfg = SimConfig(**{**good, **kw})
        with pytest.raises(ValueError):
            cfg.validate()


def test_build_sim_code_variants():
    golden = build_sim_code(SimConfig(code="golden", q=4, snr_db=(10,)))
    assert (golden.m, golden.t, golden.dim) == (2, 2, 8)
    assert golden.rate == pytest.approx(8.0)
    ident = build_sim_code(SimConfig(code="identity", q=4, l=2, snr_db=(10,)))
    assert (ident.m, ident.t, ident.dim) == (1, 2, 4)
    plus = build_sim_code(SimConfig(code="golden-plus", q=2, snr_db=(10,)))
    assert plus.dim == 8
    with pytest.raises(ValueError):
        build_sim_code(SimConfig(code="golden-plus", base_lattice="Zn(8)",
                                 snr_db=(10,)))
    with pytest.raises(ValueError):
        build_sim_code(SimConfig(code="golden-plus", l=2, snr_db=(10,)))


# -- Monte Carlo harness --------------------------------------------------------------

def test_run_montecarlo_rejects_bad_configs():
    with pytest.raises(ValueError):
        run_montecarlo(SimConfig(snr_db=(10,), trials=0))
    with pytest.raises(ValueError):
        run_montecarlo(SimConfig(q=8, snr_db=(10,), trials=10))   # 8^8 for ML


def test_error_rate_drops_with_snr():
    cfg = SimConfig(code="golden", q=2, snr_db=(10.0, 14.0), trials=10_000,
                    seed=1234, decoder="ml")
    res = run_montecarlo(cfg)
    assert res.bler[1] < res.bler[0]
    assert res.ser[1] < res.ser[0]
    for i in range(2):
        assert 0.0 <= res.bler[i] <= 1.0
        assert res.ser[i] <= res.bler[i]
        assert res.stderr[i] == pytest.approx(
            math.sqrt(res.bler[i] * (1 - res.bler[i]) / res.trials[i]))


def test_results_reproducible_and_serializable(tmp_path):
    cfg = SimConfig(code="golden", q=2, snr_db=(12.0,), trials=200, seed=7,
                    decoder="mmse-gdfe-lattice", dither=True)
    r1 = run_montecarlo(cfg)
    r2 = run_montecarlo(cfg)
    assert (r1.snr_db, r1.bler, r1.ser, r1.trials, r1.stderr) \
        == (r2.snr_db, r2.bler, r2.ser, r2.trials, r2.stderr)
    p1 = os.path.join(tmp_path, "a.csv")
    p2 = os.path.join(tmp_path, "b.csv")
    r1.save(p1)
    r2.save(p2)
    with open(p1, "rb") as fh:
        b1 = fh.read()
    with open(p2, "rb") as fh:
        b2 = fh.read()
    assert b1 == b2
    assert b1.decode().splitlines()[0] == "snr_db, bler, ser, trials, stderr"
    with open(p1 + ".json") as fh:
        meta = json.load(fh)
    # everything but the wall clock is reproducible
    assert meta["config"] == {**meta["config"], **{"seed": 7, "trials": 200}}
    m2 = json.load(open(p2 + ".json"))
    meta.pop("wall_time_s")
    m2.pop("wall_time_s")
    assert meta == m2


def test_disjoint_seed_runs_agree_statistically():
    base = dict(code="golden", q=2, snr_db=(10.0,), trials=4000, decoder="ml")
    r1 = run_montecarlo(SimConfig(seed=1, **base))
    r2 = run_montecarlo(SimConfig(seed=2, **base))
    gap = abs(r1.bler[0] - r2.bler[0])
    assert gap <= 3.0 * math.hypot(r1.stderr[0], r2.stderr[0])


# -- outage ------------------------------------------------------------------------------

def test_outage_zero_rate_is_zero():
    p, se = outage_probability(2, 2, 0.0, 10.0, 1000,
                               np.random.default_rng(71))
    assert p == 0.0 and se == 0.0


def test_outage_matches_scalar_rayleigh_closed_form():
    rate = 2.0
    for i, db in enumerate((6.0, 10.0, 14.0)):
        snr = 10.0 ** (db / 10.0)
        p, se = outage_probability(1, 1, rate, snr, 20_000,
                                   np.random.default_rng([72, i]))
        exact = 1.0 - math.exp(-(2.0 ** rate - 1.0) / snr)
        assert abs(p - exact) <= 3.0 * max(se, 1e-12)


def test_outage_curve_monotone_with_shared_draws():
    snrs = [10.0 ** (db / 10.0) for db in (0, 4, 8, 12, 16)]
    pts = outage_curve(2, 2, 4.0, snrs, 5000, seed=73)
    vals = [p for p, _ in pts]
    assert all(a >= b for a, b in zip(vals, vals[1:]))
    with pytest.raises(ValueError):
        outage_probability(1, 1, 1.0, 1.0, 0, np.random.default_rng(0))
