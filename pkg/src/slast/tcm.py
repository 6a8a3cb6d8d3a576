"""Trellis-coded modulation over a three-level lattice partition.

A partition chain fixes a top lattice, an index-16 middle sublattice and
a bottom lattice Q times the middle one.  A 16-state rate-2/4 selector
picks one of the 16 middle-lattice cosets per trellis section; the
remaining bits choose a point inside the coset, and each section is
sphere-encoded into the bottom lattice's cell.  Decoding runs a Viterbi
recursion whose branch metrics are either exhaustive minima over the
per-coset transmit alphabet or regularized closest-point searches.

Bit packing per section: the selector input (2 bits, most significant
first), then 2M^2 digits of log2(Q) bits each, also most significant
first.  Two all-zero tail sections force the trellis back to state 0;
they are transmitted but carry no information bits.
"""

import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from . import clps
from .cda import (AlgebraElement, golden_generator, golden_plus_code_lattice,
                  golden_plus_ideal_generator, golden_plus_order)
from .lattice import Lattice, catalog
from .mmse import FilterPair, compute_filters

_M2_SAMPLES = 1 << 17
_M2_SEED = 0x7CE11
_TAIL_SECTIONS = 2          # memory of the default selector
_SELECTOR_STATES = 16
_SELECTOR_INPUTS = 4        # 2 input bits per section
_D0_CAP = 2_000_000


class IndexMismatch(ValueError):
    """A partition level does not have the required sublattice index."""


class AlphabetTooLarge(RuntimeError):
    """Exhaustive per-coset enumeration exceeds the configured cap."""


# -- GF(2) helpers (vectors as bit masks, coordinate j <-> bit j) -------------

def _xor_basis(vectors):
    basis = []
    for v in vectors:
        cur = int(v)
        for b in basis:
            cur = min(cur, cur ^ b)
        if cur:
            basis.append(cur)
    return basis


def _mask_from_column(col) -> int:
    m = 0
    for i, v in enumerate(col):
        if int(round(v)) & 1:
            m |= 1 << i
    return m


def _vector_from_mask(mask: int, n: int) -> np.ndarray:
    return np.array([(mask >> i) & 1 for i in range(n)], dtype=float)


# -- partition chains ----------------------------------------------------------

@dataclass(frozen=True)
class PartitionChain:
    """Top/middle/bottom lattices with labeled middle-lattice cosets.

    reps[i] is the representative of coset i; labels are XOR-additive:
    reps[i ^ j] is congruent to reps[i] + reps[j] modulo the middle
    lattice, and reps[0] = 0.
    """

    top: Lattice
    middle: Lattice
    bottom: Lattice
    reps: np.ndarray            # m_count x dim
    m_count: int
    n_count: int
    q: int

    def __post_init__(self):
        vt, vm, vb = self.top.volume, self.middle.volume, self.bottom.volume
        if abs(vm / vt - self.m_count) > 1e-6 * self.m_count:
            raise IndexMismatch("middle/top volume ratio %.6g != %d"
                                % (vm / vt, self.m_count))
        if abs(vb / vm - self.n_count) > 1e-6 * self.n_count:
            raise IndexMismatch("bottom/middle volume ratio %.6g != %d"
                                % (vb / vm, self.n_count))
        for i in range(self.m_count):
            for j in range(i + 1, self.m_count):
                d = self.middle.mod(self.reps[i] - self.reps[j])
                if float(d @ d) < 1e-9:
                    raise IndexMismatch("coset representatives %d and %d "
                                        "collide" % (i, j))


def _sublattice_coords(top: Lattice, middle: Lattice) -> np.ndarray:
    """Integer matrix W with G_middle = G_top W, or raise."""
    W = np.linalg.solve(top.generator, middle.generator)
    if np.max(np.abs(W - np.rint(W))) > 1e-6:
        raise IndexMismatch("middle lattice is not a sublattice of the top")
    return np.rint(W).astype(np.int64)


def build_partition_perfect(q: int) -> PartitionChain:
    """Rotation of Z^8 over its index-16 Construction-A sublattice.

    The middle lattice's mod-2 residues form a self-dual [8,4,4] binary
    code; coset labels are the 4 syndrome bits, and representatives are
    the minimum-weight leaders, so labels add under XOR.
    """
    if q < 1:
        raise ValueError("Q must be positive")
    gp = golden_generator()
    base = catalog("E8-constructionA")
    top = Lattice(gp @ np.eye(8), name="tcm-top")
    middle = Lattice(gp @ base.generator, name="tcm-middle")
    W = _sublattice_coords(top, middle)
    det = abs(round(float(np.linalg.det(W.astype(float)))))
    if det != 16:
        raise IndexMismatch("expected index 16, got %d" % det)

    code_basis = _xor_basis(_mask_from_column(base.generator[:, j])
                            for j in range(8))
    if len(code_basis) != 4:
        raise IndexMismatch("mod-2 residue code does not have rank 4")
    for a in code_basis:
        for b in code_basis:
            if bin(a & b).count("1") % 2 != 0:
                raise IndexMismatch("mod-2 residue code is not self-dual")

    def syndrome(v: int) -> int:
        s = 0
        for r, row in enumerate(code_basis):
            s |= (bin(v & row).count("1") & 1) << r
        return s

    leaders = {}
    for v in sorted(range(256), key=lambda v: (bin(v).count("1"), v)):
        s = syndrome(v)
        if s not in leaders:
            leaders[s] = v
            if len(leaders) == 16:
                break
    reps = np.array([gp @ _vector_from_mask(leaders[i], 8) for i in range(16)])
    return PartitionChain(top=top, middle=middle, bottom=middle.scale(q),
                          reps=reps, m_count=16, n_count=q ** 8, q=q)


def build_partition_maxorder(beta: AlgebraElement, q: int,
                             side: str = "right") -> PartitionChain:
    """Ideal-lattice chain: order ideal over its beta^2 sub-ideal.

    side picks the multiplication convention for the ideal ({x m} or
    {m x}); the relative index must come out 16 or the chain is refused.
    Coset labels come from unit vectors completing the sublattice's
    mod-2 column space, which makes them XOR-additive (the quotient is
    elementary abelian).
    """
    if q < 1:
        raise ValueError("Q must be positive")
    order = golden_plus_order()
    m = golden_plus_ideal_generator()
    b2 = beta * beta
    top = golden_plus_code_lattice(side)
    if side == "right":
        middle = order.lattice(left=b2, right=m, name="tcm-maxorder-middle")
    else:
        middle = order.lattice(left=m * b2, name="tcm-maxorder-middle")
    W = _sublattice_coords(top, middle)
    det = abs(round(float(np.linalg.det(W.astype(float)))))
    if det != 16:
        raise IndexMismatch("relative index is %d, need 16 "
                            "(beta of order index 4 required)" % det)

    col_masks = [_mask_from_column(W[:, j]) for j in range(8)]
    basis = _xor_basis(col_masks)
    if len(basis) != 4:
        raise IndexMismatch("sublattice mod-2 column space has rank %d, "
                            "need 4 (quotient must be elementary abelian)"
                            % len(basis))
    # 2 Z^8 must sit inside W Z^8 for XOR labels to be well defined
    Winv2 = 2.0 * np.linalg.inv(W.astype(float))
    if np.max(np.abs(Winv2 - np.rint(Winv2))) > 1e-6:
        raise IndexMismatch("quotient is not elementary abelian")
    chosen = []
    for k in range(8):
        cur = 1 << k
        for b in basis:
            cur = min(cur, cur ^ b)
        if cur:
            basis.append(cur)
            chosen.append(k)
    if len(chosen) != 4:
        raise IndexMismatch("could not complete coset label basis")
    reps = []
    for lbl in range(16):
        v = np.zeros(8)
        for j in range(4):
            if (lbl >> j) & 1:
                v[chosen[j]] += 1.0
        reps.append(top.generator @ v)
    return PartitionChain(top=top, middle=middle, bottom=middle.scale(q),
                          reps=np.array(reps), m_count=16, n_count=q ** 8, q=q)


# -- coset selector -------------------------------------------------------------

class CosetSelector:
    """16-state feedback-free machine emitting a 4-bit coset label per step.

    next_state and label are 16 x 4 integer tables indexed by (state,
    input).  Labels leaving a state are pairwise distinct, as are labels
    on the transitions merging into a state.
    """

    def __init__(self, next_state, label):
        ns = np.asarray(next_state, dtype=np.int64)
        lb = np.asarray(label, dtype=np.int64)
        if ns.shape != (_SELECTOR_STATES, _SELECTOR_INPUTS) or lb.shape != ns.shape:
            raise ValueError("tables must be 16 x 4")
        if ns.min() < 0 or ns.max() >= _SELECTOR_STATES:
            raise ValueError("next-state entries out of range")
        if lb.min() < 0 or lb.max() >= 16:
            raise ValueError("label entries out of range")
        for s in range(_SELECTOR_STATES):
            if len(set(lb[s])) != _SELECTOR_INPUTS:
                raise ValueError("labels diverging from state %d collide" % s)
        # merging distinctness applies to the trellis actually traversed,
        # so unreachable rows (e.g. in a collapsed one-state table) are
        # exempt
        reach = {0}
        frontier = [0]
        while frontier:
            s = frontier.pop()
            for u in range(_SELECTOR_INPUTS):
                t = int(ns[s, u])
                if t not in reach:
                    reach.add(t)
                    frontier.append(t)
        merge = {}
        for s in sorted(reach):
            for u in range(_SELECTOR_INPUTS):
                merge.setdefault(int(ns[s, u]), []).append(int(lb[s, u]))
        for t, labels in merge.items():
            if len(labels) != len(set(labels)):
                raise ValueError("labels merging into state %d collide" % t)
        ns.setflags(write=False)
        lb.setflags(write=False)
        self.next_state = ns
        self.label = lb

    @property
    def num_states(self) -> int:
        return _SELECTOR_STATES

    @property
    def input_bits(self) -> int:
        return 2

    @property
    def output_bits(self) -> int:
        return 4

    def save(self, path: str) -> None:
        with open(path, "w") as fh:
            fh.write("# state, input_bits, next_state, coset_index\n")
            for s in range(_SELECTOR_STATES):
                for u in range(_SELECTOR_INPUTS):
                    fh.write("%d, %d, %d, %d\n"
                             % (s, u, self.next_state[s, u], self.label[s, u]))

    @classmethod
    def load(cls, path: str) -> "CosetSelector":
        ns = np.full((_SELECTOR_STATES, _SELECTOR_INPUTS), -1, dtype=np.int64)
        lb = np.full((_SELECTOR_STATES, _SELECTOR_INPUTS), -1, dtype=np.int64)
        with open(path) as fh:
            for line in fh:
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                s, u, t, c = (int(tok) for tok in line.split(","))
                ns[s, u] = t
                lb[s, u] = c
        if (ns < 0).any() or (lb < 0).any():
            raise ValueError("selector table %r is incomplete" % path)
        return cls(ns, lb)


def coset_min_dets(partition: PartitionChain, radius_scale: float = 3.0):
    """Per-label minimum |det| over top-lattice points in each coset.

    Label e collects the points of reps[e] + middle within radius_scale
    times the top lattice's minimum distance (the origin excluded for
    e = 0); these are exactly the short codeword differences whose coset
    labels differ by e.
    """
    if partition.top.dim != 8:
        raise ValueError("determinant scoring needs the 2x2 code dimension")
    r = radius_scale * partition.top.min_dist
    gm = partition.middle.generator
    d0 = np.empty(16)
    for e in range(16):
        v = partition.middle.mod(partition.reps[e])
        Z, _ = clps.enumerate_within(gm, -v, r, cap=_D0_CAP,
                                     exclude_origin=(e == 0))
        if Z.shape[0] == 0:
            d0[e] = np.inf
            continue
        pts = v[None, :] + Z @ gm.T
        c = pts[:, :4] + 1j * pts[:, 4:]
        d0[e] = float(np.min(np.abs(c[:, 0] * c[:, 3] - c[:, 1] * c[:, 2])))
    return d0


def _two_dim_subspaces():
    """All 35 two-dimensional subspaces of GF(2)^4, canonically ordered."""
    seen = {}
    for a in range(1, 16):
        for b in range(a + 1, 16):
            key = tuple(sorted((a, b, a ^ b)))
            seen.setdefault(key, key)
    return sorted(seen)


def default_coset_selector(partition: PartitionChain) -> CosetSelector:
    """Label assignment maximizing the sampled per-branch |det| floor.

    The state is the last two inputs; the emitted label is a GF(2)-linear
    combination phi(input) ^ psi(newer memory) ^ chi(older memory).
    Injective phi separates diverging branches, injective chi separates
    merging ones; both use the best-scoring 2-dim label subspace, psi the
    second best, with deterministic tie-breaks.
    """
    d0 = coset_min_dets(partition)
    scored = []
    for key in _two_dim_subspaces():
        scored.append((min(d0[e] for e in key), tuple(-k for k in key), key))
    scored.sort(reverse=True)
    best, second = scored[0][2], scored[1][2]

    def linear_map(key):
        e1, e2 = key[0], key[1]
        return [0, e1, e2, e1 ^ e2]

    phi = linear_map(best)
    chi = linear_map(best)
    psi = linear_map(second)
    ns = np.zeros((_SELECTOR_STATES, _SELECTOR_INPUTS), dtype=np.int64)
    lb = np.zeros_like(ns)
    for s in range(_SELECTOR_STATES):
        p, qmem = s >> 2, s & 3
        for u in range(_SELECTOR_INPUTS):
            ns[s, u] = ((qmem << 2) | u) & 15
            lb[s, u] = phi[u] ^ psi[qmem] ^ chi[p]
    return CosetSelector(ns, lb)


# -- scheme and encoder ----------------------------------------------------------

class TcmScheme:
    """Partition + selector + block count; immutable once built."""

    def __init__(self, partition: PartitionChain, selector: CosetSelector,
                 blocks: int, name: str = "tcm"):
        if blocks < 1:
            raise ValueError("block count must be >= 1")
        if partition.q & (partition.q - 1):
            raise ValueError("Q must be a power of two for bit packing")
        self.partition = partition
        self.selector = selector
        self.blocks = blocks
        self.name = name
        self.dim = partition.top.dim             # 2 M^2
        self.m = math.isqrt(self.dim // 2)
        self.t = blocks * self.m
        self.q = partition.q
        self.bits_per_digit = int(math.log2(partition.q)) if partition.q > 1 else 0
        self.digit_bits = self.dim * self.bits_per_digit
        self.section_bits = selector.input_bits + self.digit_bits
        self.power_scale = 1.0
        self._m2: Optional[Tuple[float, float, int]] = None

    @property
    def rate(self) -> float:
        """Information bits per channel use (tail overhead excluded)."""
        return self.section_bits / self.m

    def info_bits(self) -> int:
        return self.blocks * self.section_bits

    @property
    def termination_sections(self) -> int:
        return _TAIL_SECTIONS

    def termination_bits(self) -> int:
        """Tail overhead: forced selector inputs beyond the information bits."""
        return _TAIL_SECTIONS * self.selector.input_bits

    def total_sections(self) -> int:
        return self.blocks + _TAIL_SECTIONS

    def second_moment(self) -> Tuple[float, float, int]:
        if self._m2 is None:
            rng = np.random.default_rng([_M2_SEED, self.dim, self.q])
            U = rng.random((self.dim, _M2_SAMPLES))
            Y = self.partition.bottom.generator @ U
            X = self.partition.bottom.mod_many(Y)
            e = np.sum(X * X, axis=0)
            self._m2 = (float(np.mean(e)),
                        float(np.std(e) / math.sqrt(e.size)), int(e.size))
        return self._m2

    def with_power(self, scale: float) -> "TcmScheme":
        if not (scale > 0):
            raise ValueError("power scale must be positive")
        s = object.__new__(TcmScheme)
        s.__dict__.update(self.__dict__)
        s.power_scale = float(scale)
        return s

    def snr_per_dim(self) -> float:
        m2, _, _ = self.second_moment()
        return self.power_scale ** 2 * m2 / (self.m * self.m)

    def random_bits(self, rng) -> np.ndarray:
        return rng.integers(0, 2, self.info_bits()).astype(np.int64)


def build_scheme(partition: PartitionChain, blocks: int,
                 selector: Optional[CosetSelector] = None,
                 name: str = "tcm") -> TcmScheme:
    if selector is None:
        selector = default_coset_selector(partition)
    return TcmScheme(partition, selector, blocks, name)


def power_normalize(scheme: TcmScheme, snr: float) -> float:
    """Scale making the per-block energy average M * snr."""
    if not (snr > 0):
        raise ValueError("snr must be positive")
    m2, _, _ = scheme.second_moment()
    return math.sqrt(scheme.m * snr / m2)


def _bits_to_int(bits) -> int:
    v = 0
    for b in bits:
        v = (v << 1) | int(b)
    return v


def _int_to_bits(v: int, width: int) -> List[int]:
    return [(v >> (width - 1 - i)) & 1 for i in range(width)]


def tcm_encode(scheme: TcmScheme, bits, dithers=None) -> np.ndarray:
    """Encode an information packet into total_sections() cell vectors.

    bits must have exactly info_bits() entries; dithers, when given, one
    vector per transmitted section (tail included).  Returns an array of
    shape (total_sections(), 2 M^2).
    """
    bits = np.asarray(bits, dtype=np.int64)
    if bits.shape != (scheme.info_bits(),):
        raise ValueError("packet must carry exactly %d bits" % scheme.info_bits())
    total = scheme.total_sections()
    if dithers is None:
        dithers = np.zeros((total, scheme.dim))
    else:
        dithers = np.asarray(dithers, dtype=float)
        if dithers.shape != (total, scheme.dim):
            raise ValueError("need one dither per transmitted section")
    part, sel = scheme.partition, scheme.selector
    gm = part.middle.generator
    xs = np.empty((total, scheme.dim))
    state = 0
    pos = 0
    for k in range(total):
        if k < scheme.blocks:
            u = _bits_to_int(bits[pos:pos + sel.input_bits])
            pos += sel.input_bits
            digits = np.zeros(scheme.dim, dtype=np.int64)
            for j in range(scheme.dim):
                w = scheme.bits_per_digit
                digits[j] = _bits_to_int(bits[pos:pos + w])
                pos += w
        else:
            u = 0
            digits = np.zeros(scheme.dim, dtype=np.int64)
        i = int(sel.label[state, u])
        state = int(sel.next_state[state, u])
        xs[k] = part.bottom.mod(gm @ digits + part.reps[i] + dithers[k])
    if state != 0:
        raise AssertionError("tail failed to terminate the trellis")
    return xs


# -- branch metrics ----------------------------------------------------------------

def _coset_alphabet(partition: PartitionChain, cap: int):
    count = partition.n_count
    if count > cap:
        raise AlphabetTooLarge("coset alphabet has %d points (cap %d)"
                               % (count, cap))
    n = partition.top.dim
    D = np.stack(np.unravel_index(np.arange(count),
                                  (partition.q,) * n)).astype(np.int64)
    return D, partition.middle.generator @ D


def branch_metric_exhaustive(partition: PartitionChain, H, y_k, v_i, u_k,
                             cap: int = 4096) -> float:
    """Minimum |y - H x|^2 over the coset's sphere-encoded alphabet."""
    m, _ = _section_exhaustive_one(partition, np.asarray(H, dtype=float),
                                   np.asarray(y_k, dtype=float),
                                   np.asarray(v_i, dtype=float),
                                   np.asarray(u_k, dtype=float), cap)
    return m


def _section_exhaustive_one(partition, H, y, v, u, cap):
    D, base = _coset_alphabet(partition, cap)
    X = partition.bottom.mod_many(base + (v + u)[:, None])
    R = y[:, None] - H @ X
    met = np.sum(R * R, axis=0)
    j = int(np.argmin(met))
    return float(met[j]), D[:, j]


def branch_metric_lattice(partition: PartitionChain, fp: FilterPair,
                          y_k, v_i, u_k, scale: float = 1.0):
    """Closest-point metric on the filtered middle lattice.

    fp must come from the unscaled channel; scale carries the power
    normalization so the regularizer sees transmit-domain energies.
    Returns (metric, surviving middle-lattice point); the point encodes
    the winning parallel transition.
    """
    basis = fp.backward @ (scale * partition.middle.generator)
    target = fp.forward @ np.asarray(y_k, dtype=float) \
        - fp.backward @ (scale * (np.asarray(v_i, dtype=float)
                                  + np.asarray(u_k, dtype=float)))
    z, met = clps.closest_point(basis, target)
    return float(met), partition.middle.generator @ z


# -- Viterbi ------------------------------------------------------------------------

def _section_tables_exhaustive(partition, Ha, y, u, cap):
    D, base = _coset_alphabet(partition, cap)
    mets = np.empty(16)
    digs = np.empty((16, partition.top.dim), dtype=np.int64)
    for i in range(16):
        X = partition.bottom.mod_many(base + (partition.reps[i] + u)[:, None])
        R = y[:, None] - Ha @ X
        met = np.sum(R * R, axis=0)
        j = int(np.argmin(met))
        mets[i] = met[j]
        digs[i] = D[:, j]
    return mets, digs


def _section_tables_lattice(partition, fp, prep, y, u, q, scale):
    fy = fp.forward @ y
    offs = fp.backward @ (scale * (partition.reps + u[None, :]).T)  # dim x 16
    T = fy[:, None] - offs
    Z = prep.closest_many(T)
    R = T - prep.basis @ Z
    mets = np.sum(R * R, axis=0)
    return mets, np.mod(Z.T, q)


def _incoming(selector: CosetSelector):
    """Padded per-state lists of incoming (state, input, label) transitions."""
    inc = [[] for _ in range(16)]
    for s in range(16):
        for u in range(4):
            inc[int(selector.next_state[s, u])].append(
                (s, u, int(selector.label[s, u])))
    width = max(len(v) for v in inc)
    inc_state = np.zeros((16, width), dtype=np.int64)
    inc_u = np.zeros((16, width), dtype=np.int64)
    inc_label = np.zeros((16, width), dtype=np.int64)
    pad = np.zeros((16, width), dtype=bool)
    for t, lst in enumerate(inc):
        for j, (s, u, lbl) in enumerate(lst):
            inc_state[t, j] = s
            inc_u[t, j] = u
            inc_label[t, j] = lbl
        pad[t, len(lst):] = True
    return inc_state, inc_u, inc_label, pad


def _viterbi_tables(scheme, H, ys, dithers, metric_mode, cap):
    part = scheme.partition
    total = scheme.total_sections()
    ys = np.asarray(ys, dtype=float)
    if dithers is None:
        dithers = np.zeros((total, scheme.dim))
    else:
        dithers = np.asarray(dithers, dtype=float)
    Ha = scheme.power_scale * np.asarray(H, dtype=float)
    mets = np.empty((total, 16))
    digs = np.empty((total, 16, scheme.dim), dtype=np.int64)
    if metric_mode == "exhaustive":
        for k in range(total):
            mets[k], digs[k] = _section_tables_exhaustive(
                part, Ha, ys[k], dithers[k], cap)
    elif metric_mode == "lattice":
        a = scheme.power_scale
        fp = compute_filters(np.asarray(H, dtype=float), scheme.snr_per_dim())
        prep = clps.PreparedBasis(fp.backward @ (a * part.middle.generator))
        for k in range(total):
            mets[k], digs[k] = _section_tables_lattice(
                part, fp, prep, ys[k], dithers[k], scheme.q, a)
    else:
        raise ValueError("metric_mode must be 'exhaustive' or 'lattice'")
    return mets, digs


def _bits_from_path(scheme, us, digs_chosen):
    bits = np.empty(scheme.info_bits(), dtype=np.int64)
    pos = 0
    for k in range(scheme.blocks):
        for b in _int_to_bits(us[k], scheme.selector.input_bits):
            bits[pos] = b
            pos += 1
        for j in range(scheme.dim):
            for b in _int_to_bits(int(digs_chosen[k][j]), scheme.bits_per_digit):
                bits[pos] = b
                pos += 1
    return bits


def viterbi_decode(scheme: TcmScheme, H, ys, dithers=None,
                   metric_mode: str = "lattice", cap: int = 4096) -> np.ndarray:
    """Terminated Viterbi decoding; returns the info_bits() bit array."""
    mets, digs = _viterbi_tables(scheme, H, ys, dithers, metric_mode, cap)
    total = scheme.total_sections()
    inc_state, inc_u, inc_label, pad = _incoming(scheme.selector)
    cost = np.full(16, np.inf)
    cost[0] = 0.0
    prev = np.empty((total, 16), dtype=np.int64)
    for k in range(total):
        cand = cost[inc_state] + mets[k][inc_label]       # 16 x width
        cand[pad] = np.inf
        if k >= scheme.blocks:
            cand[inc_u != 0] = np.inf                     # tail forces input 0
        picks = np.argmin(cand, axis=1)
        prev[k] = picks
        cost = cand[np.arange(16), picks]
    state = 0
    us = np.empty(total, dtype=np.int64)
    chosen = [None] * total
    for k in range(total - 1, -1, -1):
        p = int(prev[k, state])
        us[k] = int(inc_u[state, p])
        chosen[k] = digs[k][int(inc_label[state, p])]
        state = int(inc_state[state, p])
    if state != 0:
        raise AssertionError("traceback did not reach the zero state")
    return _bits_from_path(scheme, us, chosen)


def ml_sequence_decode(scheme: TcmScheme, H, ys, dithers=None,
                       metric_mode: str = "exhaustive",
                       cap: int = 4096) -> np.ndarray:
    """Brute-force minimum-metric sequence search (testing oracle).

    Enumerates every selector input sequence; within a section the best
    coset point is folded into the branch metric, so this equals the
    exhaustive search over all message packets.
    """
    mets, digs = _viterbi_tables(scheme, H, ys, dithers, metric_mode, cap)
    total = scheme.total_sections()
    sel = scheme.selector
    best_cost = np.inf
    best = None
    for idx in range(4 ** scheme.blocks):
        us = []
        rem = idx
        for _ in range(scheme.blocks):
            us.append(rem % 4)
            rem //= 4
        us = us[::-1] + [0] * _TAIL_SECTIONS
        state = 0
        cost = 0.0
        labels = []
        for k in range(total):
            lbl = int(sel.label[state, us[k]])
            labels.append(lbl)
            cost = cost + mets[k][lbl]
            state = int(sel.next_state[state, us[k]])
        if state == 0 and cost < best_cost:
            best_cost = cost
            best = (list(us), [digs[k][labels[k]] for k in range(total)])
    return _bits_from_path(scheme, best[0], best[1])
