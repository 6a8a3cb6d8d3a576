"""Acceptance checklist: twelve end-to-end criteria, one test each.

Every test prints a single `criterion NN: PASS/FAIL` line (visible with
-s, or in the captured output on failure) and also enforces the wall
time budget the criterion carries.  Statistical criteria use frozen
seeds so reruns are bit-identical.
"""

import math
import time
from fractions import Fraction

import numpy as np

from slast import clps
from slast.cda import (GaussianRational as Gq, golden_generator,
                       golden_plus_ideal_generator, golden_plus_order,
                       min_det_sample, order_index)
from slast.channel import (SimConfig, draw_noise, outage_probability,
                           realize_channel, run_montecarlo)
from slast.codec import build_code, power_normalize
from slast.lattice import Lattice, catalog
from slast.mmse import compute_filters
from slast.tcm import (build_partition_maxorder, build_partition_perfect,
                       build_scheme, tcm_encode, ml_sequence_decode,
                       viterbi_decode)
from slast.tcm import power_normalize as tcm_power_normalize


def _report(num: int, ok: bool, detail: str) -> None:
    print("criterion %02d: %s — %s" % (num, "PASS" if ok else "FAIL", detail))
    assert ok, detail


def test_criterion_01_golden_generator_orthonormal():
    t0 = time.time()
    g = golden_generator()
    err = float(np.max(np.abs(g.T @ g - np.eye(8))))
    dt = time.time() - t0
    _report(1, err <= 1e-9 and dt < 1.0,
            "|G^T G - I|_inf = %.3g, %.2fs" % (err, dt))


def test_criterion_02_catalog_coding_gains():
    t0 = time.time()
    checks = []
    for n in (2, 4, 8):
        checks.append(abs(catalog("Zn(%d)" % n).coding_gain - 1.0) <= 1e-9)
    for name in ("E8-unimodular", "E8-constructionA"):
        checks.append(abs(catalog(name).coding_gain - 2.0) <= 1e-9)
    bw = catalog("BW16").coding_gain
    checks.append(abs(bw - 2.8284) <= 1e-3)
    leech = catalog("Leech24").coding_gain
    checks.append(abs(leech - 4.0) <= 1e-3)
    dt = time.time() - t0
    _report(2, all(checks) and dt < 60.0,
            "Zn=1, E8=2 (both), BW16=%.6g, Leech24=%.6g, %.1fs" % (bw, leech, dt))


def _cvp_oracle(basis, target):
    # every integer vector that can possibly beat Babai rounding
    zf = np.linalg.solve(basis, target)
    zb = np.round(zf)
    r = np.linalg.norm(target - basis @ zb)
    sigma_min = np.linalg.svd(basis, compute_uv=False)[-1]
    w = int(np.ceil(r / sigma_min + 1e-12))
    ranges = [np.arange(int(c) - w, int(c) + w + 1) for c in zb]
    grids = np.meshgrid(*ranges, indexing="ij")
    Z = np.stack([g.ravel() for g in grids], axis=1)
    R = target[None, :] - Z @ basis.T
    mets = np.einsum("ij,ij->i", R, R)
    j = int(np.argmin(mets))
    return Z[j], float(mets[j])


def _random_cvp_problem(rng, n):
    while True:
        B = rng.integers(-4, 5, (n, n)).astype(float)
        if abs(np.linalg.det(B)) < 0.5:
            continue
        t = rng.integers(-40, 41, n) / 4.0
        # keep the oracle box tractable
        zb = np.round(np.linalg.solve(B, t))
        r = np.linalg.norm(t - B @ zb)
        sigma_min = np.linalg.svd(B, compute_uv=False)[-1]
        if (2 * np.ceil(r / sigma_min) + 1) ** n <= 2e4:
            return B, t


def test_criterion_03_closest_point_exactness():
    t0 = time.time()
    rng = np.random.default_rng(303)
    per_dim = {2: 300, 3: 300, 4: 200, 5: 120, 6: 80}
    oracle_matches = 0
    total = sum(per_dim.values())
    for dim, count in per_dim.items():
        for _ in range(count):
            B, target = _random_cvp_problem(rng, dim)
            z_o, m_o = _cvp_oracle(B, target)
            z, m = clps.closest_point(B, target)
            if m == m_o:
                oracle_matches += 1
    L = catalog("E8-constructionA")
    consistent = 0
    for _ in range(1000):
        y = rng.standard_normal(8) * 5.0
        q = L.quantize(y)
        x = L.mod(y)
        if (np.allclose(x, y - q, atol=1e-9)
                and float(x @ x) <= float((y - q) @ (y - q)) + 1e-9
                and float(np.sum(L.quantize(x) ** 2)) < 1e-12):
            consistent += 1
    dt = time.time() - t0
    _report(3, oracle_matches == total and consistent == 1000 and dt < 60.0,
            "%d/%d exact metrics, %d/1000 mod checks, %.1fs"
            % (oracle_matches, total, consistent, dt))


def test_criterion_04_hexagonal_shaping_gain():
    t0 = time.time()
    code = build_code(None, catalog("hexagonal"), 16)
    D, X = code._codebook_for(code.u0)
    sph = float(np.mean(np.sum(X * X, axis=0)))
    XL = code.coding_lattice.generator @ (D.astype(float) - 7.5)
    lin = float(np.mean(np.sum(XL * XL, axis=0)))
    ratio = sph / lin
    dt = time.time() - t0
    _report(4, sph < lin and abs(ratio - 0.838235) < 1e-6 and dt < 1.0,
            "mean energy ratio (shaped/linear) = %.6f, %.2fs" % (ratio, dt))


def _module_index_oracle(order, beta):
    rows = []
    for b in order.z_basis():
        coords = order.to_coords(beta * b)
        rows.append([c.re for c in coords] + [c.im for c in coords])
    n = len(rows)
    M = [[Fraction(v) for v in row] for row in rows]
    det = Fraction(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if M[r][col] != 0), None)
        assert piv is not None
        if piv != col:
            M[col], M[piv] = M[piv], M[col]
            det = -det
        det *= M[col][col]
        inv = 1 / M[col][col]
        for r in range(col + 1, n):
            f = M[r][col] * inv
            if f:
                for cc in range(col, n):
                    M[r][cc] -= f * M[col][cc]
    assert det.denominator == 1
    return abs(int(det))


def test_criterion_05_order_index_equals_module_index():
    t0 = time.time()
    order = golden_plus_order()
    rng = np.random.default_rng(505)
    matched = 0
    trials = 50
    for _ in range(trials):
        while True:
            c = rng.integers(-2, 3, 8)
            if np.any(c):
                break
        coords = [Gq(int(c[2 * i]), int(c[2 * i + 1])) for i in range(4)]
        beta = order.element(coords)
        if order_index(order, beta) == _module_index_oracle(order, beta):
            matched += 1
    dt = time.time() - t0
    _report(5, matched == trials and dt < 60.0,
            "%d/%d exact index matches (nu = 2), %.1fs" % (matched, trials, dt))


def test_criterion_06_partition_indices():
    p = build_partition_perfect(2)
    W = np.linalg.solve(p.top.generator, p.middle.generator)
    idx_gosset = abs(round(float(np.linalg.det(np.rint(W)))))
    order = golden_plus_order()
    b0 = order.element([Gq(-1), Gq(-1), Gq(1, -1), Gq(-1, -1)])
    pm = build_partition_maxorder(b0, 2)
    Wm = np.linalg.solve(pm.top.generator, pm.middle.generator)
    idx_plus = abs(round(float(np.linalg.det(np.rint(Wm)))))
    idx_ideal = order_index(order, golden_plus_ideal_generator())
    ok = idx_gosset == 16 and idx_plus == 16 and idx_ideal == 64
    _report(6, ok, "Gosset chain %d, order chain %d, ideal index %d"
            % (idx_gosset, idx_plus, idx_ideal))


def test_criterion_07_min_det_witness():
    t0 = time.time()
    lat = Lattice(golden_generator() @ catalog("E8-constructionA").generator)
    w = min_det_sample(lat, 800_000, 3.0 * lat.min_dist)
    witnesses = {}
    for q in (2, 4):
        code = build_code(golden_generator(), catalog("E8-constructionA"), q)
        a = power_normalize(code, 10.0)
        scaled = code.coding_lattice.scale(a)
        wq = min_det_sample(scaled, 800_000, 3.0 * scaled.min_dist) / a ** 4
        witnesses[q] = wq
    dt = time.time() - t0
    ok = (w > 0 and abs(witnesses[2] - w) < 1e-9 * max(1.0, w)
          and abs(witnesses[4] - w) < 1e-9 * max(1.0, w) and dt < 300.0)
    _report(7, ok, "min |det dX|^2 = %.6g within 3 d_min; unscaled Q=2/Q=4 "
            "agree to %.1e, %.1fs"
            % (w, max(abs(witnesses[2] - w), abs(witnesses[4] - w)), dt))


def test_criterion_08_filter_identities():
    rng = np.random.default_rng(808)
    worst_gram = worst_fb = 0.0
    for _ in range(100):
        m = int(rng.integers(2, 9))
        n = int(rng.integers(2, 9))
        H = rng.standard_normal((m, n)) * float(rng.uniform(0.3, 3.0))
        eta = float(rng.uniform(0.01, 10.0))
        fp = compute_filters(H, 1.0 / eta)
        B, F = fp.backward, fp.forward
        worst_gram = max(worst_gram, float(np.max(np.abs(
            B.T @ B - H.T @ H - eta * np.eye(n)))))
        worst_fb = max(worst_fb, float(np.max(np.abs(
            B - F @ H - eta * np.linalg.inv(B.T)))))
    ok = worst_gram <= 1e-9 and worst_fb <= 1e-9
    _report(8, ok, "max |B'B - H'H - nI| = %.2e, max |B - FH - nB^-T| = %.2e"
            % (worst_gram, worst_fb))


def test_criterion_09_viterbi_equals_sequence_search():
    t0 = time.time()
    part = build_partition_perfect(2)
    sch = build_scheme(part, 4)
    sch = sch.with_power(tcm_power_normalize(sch, 10.0 ** 1.4))
    a = sch.power_scale
    box = 2.0 * float(np.max(np.linalg.norm(part.bottom.generator, axis=0)))
    identical = 0
    packets = 200
    for ti in range(packets):
        rng = np.random.default_rng([9, ti])
        ch = realize_channel(2, 2, rng)
        bits = sch.random_bits(rng)
        dithers = rng.random((sch.total_sections(), 8)) * box
        xs = tcm_encode(sch, bits, dithers)
        ys = np.stack([ch.real @ (a * x) + draw_noise(2, 2, rng) for x in xs])
        vit = viterbi_decode(sch, ch.real, ys, dithers, "exhaustive")
        ml = ml_sequence_decode(sch, ch.real, ys, dithers, "exhaustive")
        identical += int(np.array_equal(vit, ml))
    dt = time.time() - t0
    _report(9, identical == packets and dt < 600.0,
            "%d/%d packets identical to brute force, %.1fs"
            % (identical, packets, dt))


def test_criterion_10_error_rate_trend_and_near_ml():
    t0 = time.time()
    grid = (8.0, 10.0, 12.0, 14.0)
    trials = 20_000
    cfg = SimConfig(code="golden", q=2, snr_db=grid, trials=trials,
                    seed=1234, decoder="ml")
    res = run_montecarlo(cfg)
    decreasing = all(a > b for a, b in zip(res.bler, res.bler[1:]))

    code0 = build_code(golden_generator(), catalog("Zn(8)"), 2, name="golden")
    snr = 10.0 ** (grid[3] / 10.0)
    code = code0.with_power(power_normalize(code0, snr))
    u0 = code.centering_translate()
    agree = 0
    for ti in range(trials):
        rng = np.random.default_rng([1234, 3, ti])
        ch = realize_channel(code.m, 2, rng)
        msg = code.random_message(rng)
        y = ch.real @ (code.power_scale * code.sphere_encode(msg, u0)) \
            + draw_noise(2, code.t, rng)
        ml = code.decode_ml(ch.real, y, u0)
        lat = code.decode_lattice(ch.real, y, u0)
        agree += int(ml == lat)
    frac = agree / trials
    dt = time.time() - t0
    ok = decreasing and frac >= 0.99 and res.bler[3] < 0.05 and dt < 1800.0
    _report(10, ok, "bler %s decreasing; lattice/ML agreement %.4f at %g dB "
            "(P_e = %.3g), %.0fs"
            % (tuple("%.4g" % b for b in res.bler), frac, grid[3],
               res.bler[3], dt))


def test_criterion_11_outage_closed_form():
    t0 = time.time()
    rate = 2.0
    worst = 0.0
    ok = True
    for i, db in enumerate((2.0, 6.0, 10.0, 14.0, 18.0)):
        snr = 10.0 ** (db / 10.0)
        p, se = outage_probability(1, 1, rate, snr, 100_000,
                                   np.random.default_rng([1111, i]))
        exact = 1.0 - math.exp(-(2.0 ** rate - 1.0) / snr)
        dev = abs(p - exact) / max(se, 1e-12)
        worst = max(worst, dev)
        ok = ok and dev <= 3.0
    dt = time.time() - t0
    _report(11, ok and dt < 60.0,
            "M=N=1 vs closed form: worst deviation %.2f se over 5 points, %.1fs"
            % (worst, dt))


def test_criterion_12_tcm_packet_accounting():
    t0 = time.time()
    part = build_partition_perfect(2)
    sch = build_scheme(part, 130)
    accounting = (sch.rate == 5.0 and sch.info_bits() == 1300
                  and sch.t == 260 and sch.termination_bits() == 4
                  and sch.total_sections() == 132)
    run = sch.with_power(tcm_power_normalize(sch, 100.0))
    a = run.power_scale
    box = 2.0 * float(np.max(np.linalg.norm(part.bottom.generator, axis=0)))
    ok_packets = 0
    packets = 100
    for ti in range(packets):
        rng = np.random.default_rng([2026, ti])
        ch = realize_channel(2, 2, rng)
        bits = run.random_bits(rng)
        dithers = rng.random((run.total_sections(), 8)) * box
        xs = tcm_encode(run, bits, dithers)
        ys = np.stack([ch.real @ (a * x) for x in xs])
        out = viterbi_decode(run, ch.real, ys, dithers, "lattice")
        ok_packets += int(np.array_equal(out, bits))
    dt = time.time() - t0
    _report(12, accounting and ok_packets == packets and dt < 300.0,
            "1300 info bits + 4 tail bits over 132 sections; noiseless "
            "loopback %d/%d, %.1fs" % (ok_packets, packets, dt))
