"""Catalog values, density figures, and persistence for Lattice."""

import math
import os

import numpy as np
import pytest

from slast.lattice import (Lattice, catalog, catalog_names, load_lattice,
                           save_lattice)


def test_catalog_names_cover_the_expected_set():
    names = catalog_names()
    for want in ("hexagonal", "D4", "E8-unimodular", "E8-constructionA",
                 "BW16", "Leech24"):
        assert want in names


def test_cubic_lattices():
    for n in (2, 4, 8):
        L = catalog("Zn(%d)" % n)
        assert L.dim == n
        assert abs(L.volume - 1.0) < 1e-12
        assert abs(L.min_dist_sq - 1.0) < 1e-12
        assert abs(L.coding_gain - 1.0) < 1e-12


def test_hexagonal_lattice():
    L = catalog("hexagonal")
    assert abs(L.volume - math.sqrt(3.0) / 2) < 1e-12
    assert abs(L.min_dist_sq - 1.0) < 1e-12
    assert abs(L.coding_gain - 2.0 / math.sqrt(3.0)) < 1e-12


def test_d4_lattice():
    L = catalog("D4")
    assert abs(L.volume - 2.0) < 1e-12
    assert abs(L.min_dist_sq - 2.0) < 1e-12
    assert abs(L.coding_gain - 2.0 / math.sqrt(2.0)) < 1e-12


def test_e8_both_variants():
    uni = catalog("E8-unimodular")
    assert abs(uni.volume - 1.0) < 1e-9
    assert abs(uni.min_dist_sq - 2.0) < 1e-9
    assert abs(uni.coding_gain - 2.0) < 1e-9
    ca = catalog("E8-constructionA")
    assert abs(ca.volume - 16.0) < 1e-9
    assert abs(ca.min_dist_sq - 4.0) < 1e-9
    assert abs(ca.coding_gain - 2.0) < 1e-9


def test_e8_construction_a_mod2_residues_form_a_selfdual_code():
    # reduced mod 2, the generator columns must span a rank-4 binary code
    G = catalog("E8-constructionA").generator.astype(np.int64)
    cols = [int("".join(str(b) for b in np.mod(G[:, j], 2)), 2) for j in range(8)]
    basis = []
    for w in cols:
        for b in basis:
            w = min(w, w ^ b)
        if w:
            basis.append(w)
    assert len(basis) == 4
    # every codeword of the span has even weight >= 4 except zero
    span = {0}
    for b in basis:
        span |= {v ^ b for v in span}
    weights = sorted(bin(v).count("1") for v in span)
    assert weights == [0] + [4] * 14 + [8]


def test_bw16_lattice():
    L = catalog("BW16")
    assert abs(L.volume - 4096.0) < 1e-6
    assert abs(L.min_dist_sq - 8.0) < 1e-9
    assert abs(L.coding_gain - 2.8284271) < 1e-6


def test_leech_lattice():
    L = catalog("Leech24")
    assert abs(L.volume - 1.0) < 1e-9
    assert abs(L.min_dist_sq - 4.0) < 1e-9
    assert abs(L.coding_gain - 4.0) < 1e-6


def test_catalog_rejects_unknown_name():
    with pytest.raises(ValueError):
        catalog("A17")


def test_scale_laws():
    L = catalog("D4")
    for k in (2.0, 0.5, -1.0):
        Lk = L.scale(k)
        assert abs(Lk.volume - abs(k) ** 4 * L.volume) < 1e-9
        assert abs(Lk.min_dist_sq - k * k * L.min_dist_sq) < 1e-9
        assert abs(Lk.coding_gain - L.coding_gain) < 1e-9


def test_rotate_preserves_geometry():
    from slast.cda import golden_generator

    L = catalog("E8-constructionA")
    R = L.rotate(golden_generator())
    assert abs(R.volume - L.volume) < 1e-6
    assert abs(R.min_dist_sq - L.min_dist_sq) < 1e-9
    assert abs(R.coding_gain - L.coding_gain) < 1e-9
    with pytest.raises(ValueError):
        L.rotate(np.ones((8, 8)))


def test_scale_zero_rejected():
    with pytest.raises(ValueError):
        catalog("D4").scale(0.0)


def test_save_load_roundtrip(tmp_path):
    L = catalog("hexagonal")
    path = os.path.join(tmp_path, "hex.lattice")
    save_lattice(L, path)
    L2 = load_lattice(path)
    assert np.array_equal(L.generator, L2.generator)
    assert abs(L2.coding_gain - L.coding_gain) < 1e-12


def test_load_rejects_garbage(tmp_path):
    path = os.path.join(tmp_path, "bad.lattice")
    with open(path, "w") as fh:
        fh.write("not a matrix\n")
    with pytest.raises((ValueError, OSError)):
        load_lattice(path)


def test_singular_generator_rejected():
    with pytest.raises(ValueError):
        Lattice(np.zeros((3, 3)))


def test_density_formulas_consistent():
    L = catalog("E8-unimodular")
    r = 0.5 * L.min_dist
    vn = math.pi ** 4 / math.gamma(5.0)
    assert abs(L.center_density - r ** 8 / L.volume) < 1e-12
    assert abs(L.density - L.center_density * vn) < 1e-12
