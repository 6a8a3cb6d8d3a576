"""Degree-2 cyclic division algebras over the Gaussian rationals.

Elements live in a quadratic extension L = F(g) of F = Q(i); the algebra
adjoins z with z^2 = gamma and l z = z sigma(l).  All structural
arithmetic (products, reduced norms, coordinates over an order basis,
index computations) is exact: scalars are Gaussian rationals backed by
Fraction, so ring-closure and index checks carry no floating error.
Complex matrices and real generator matrices are derived views.

Two algebras are built in: the golden-ratio rotation (g = golden ratio,
sigma flips its sign pattern) and the maximal-order construction with
g^2 = 2 + i, sigma(g) = -g.
"""

import csv
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Tuple

import numpy as np

from . import clps
from .lattice import Lattice
from .reim import mat_to_real_vec, split_matrix


class NotAnOrderElement(ValueError):
    """Index formula evaluated on an element outside the order."""


class NoCandidateFound(RuntimeError):
    """Search box contained no element with the requested index."""


class GaussianRational:
    """Exact a + b*i with Fraction components."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = Fraction(re)
        self.im = Fraction(im)

    @staticmethod
    def _coerce(x):
        if isinstance(x, GaussianRational):
            return x
        if isinstance(x, complex):
            return GaussianRational(Fraction(x.real), Fraction(x.imag))
        return GaussianRational(x)

    def __add__(self, o):
        o = self._coerce(o)
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, o):
        o = self._coerce(o)
        return GaussianRational(self.re - o.re, self.im - o.im)

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __mul__(self, o):
        o = self._coerce(o)
        return GaussianRational(self.re * o.re - self.im * o.im,
                                self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, o):
        o = self._coerce(o)
        d = o.re * o.re + o.im * o.im
        if d == 0:
            raise ZeroDivisionError("division by zero Gaussian rational")
        return GaussianRational((self.re * o.re + self.im * o.im) / d,
                                (self.im * o.re - self.re * o.im) / d)

    def __eq__(self, o):
        o = self._coerce(o)
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash((self.re, self.im))

    def conj(self):
        return GaussianRational(self.re, -self.im)

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def is_gaussian_integer(self) -> bool:
        return self.re.denominator == 1 and self.im.denominator == 1

    def __complex__(self):
        return complex(self.re) + 1j * complex(self.im)

    def __repr__(self):
        sign = "+" if self.im >= 0 else "-"
        return "(%s%s%si)" % (self.re, sign, abs(self.im))


GI_ONE = GaussianRational(1)
GI_I = GaussianRational(0, 1)


def _half(p, q):
    """(p + q*i)/2 as an exact Gaussian rational."""
    return GaussianRational(Fraction(p, 2), Fraction(q, 2))


@dataclass(frozen=True)
class AlgebraSpec:
    """Defining data of the degree-2 algebra.

    gen_sq's pair (c0, c1) means g^2 = c0 + c1*g; sigma_gen's (s0, s1)
    means sigma(g) = s0 + s1*g.  gamma is the non-norm element defining
    z^2, and gen_value is the numeric embedding of g.
    """

    name: str
    gen_sq: Tuple[GaussianRational, GaussianRational]
    sigma_gen: Tuple[GaussianRational, GaussianRational]
    gamma: GaussianRational
    gen_value: complex


GOLDEN = AlgebraSpec(
    name="golden",
    gen_sq=(GaussianRational(1), GaussianRational(1)),     # g^2 = 1 + g
    sigma_gen=(GaussianRational(1), GaussianRational(-1)),  # sigma(g) = 1 - g
    gamma=GI_I,
    gen_value=complex((1.0 + math.sqrt(5.0)) / 2.0),
)

GOLDEN_PLUS = AlgebraSpec(
    name="golden-plus",
    gen_sq=(GaussianRational(2, 1), GaussianRational(0)),   # g^2 = 2 + i
    sigma_gen=(GaussianRational(0), GaussianRational(-1)),  # sigma(g) = -g
    gamma=GI_I,
    gen_value=complex(np.sqrt(complex(2.0, 1.0))),          # first-quadrant root
)


class FieldElement:
    """a + b*g in the quadratic extension of a given algebra spec."""

    __slots__ = ("spec", "a", "b")

    def __init__(self, spec: AlgebraSpec, a=0, b=0):
        self.spec = spec
        self.a = GaussianRational._coerce(a)
        self.b = GaussianRational._coerce(b)

    def _wrap(self, a, b):
        return FieldElement(self.spec, a, b)

    def _coerce(self, o):
        if isinstance(o, FieldElement):
            if o.spec is not self.spec:
                raise ValueError("mixing elements of different algebras")
            return o
        return FieldElement(self.spec, GaussianRational._coerce(o), 0)

    def __add__(self, o):
        o = self._coerce(o)
        return self._wrap(self.a + o.a, self.b + o.b)

    def __sub__(self, o):
        o = self._coerce(o)
        return self._wrap(self.a - o.a, self.b - o.b)

    def __neg__(self):
        return self._wrap(-self.a, -self.b)

    def __mul__(self, o):
        o = self._coerce(o)
        c0, c1 = self.spec.gen_sq
        a = self.a * o.a + self.b * o.b * c0
        b = self.a * o.b + self.b * o.a + self.b * o.b * c1
        return self._wrap(a, b)

    def sigma(self):
        s0, s1 = self.spec.sigma_gen
        return self._wrap(self.a + self.b * s0, self.b * s1)

    def is_zero(self) -> bool:
        return self.a.is_zero() and self.b.is_zero()

    def __eq__(self, o):
        o = self._coerce(o)
        return self.a == o.a and self.b == o.b

    def __complex__(self):
        return complex(self.a) + complex(self.b) * self.spec.gen_value

    def __repr__(self):
        return "[%s + %s g]" % (self.a, self.b)


class AlgebraElement:
    """l0 + z*l1 with l0, l1 in the quadratic extension."""

    __slots__ = ("spec", "l0", "l1")

    def __init__(self, spec: AlgebraSpec, l0=None, l1=None):
        self.spec = spec
        self.l0 = l0 if isinstance(l0, FieldElement) else FieldElement(spec, l0 or 0)
        self.l1 = l1 if isinstance(l1, FieldElement) else FieldElement(spec, l1 or 0)

    def _wrap(self, l0, l1):
        return AlgebraElement(self.spec, l0, l1)

    def __add__(self, o):
        return self._wrap(self.l0 + o.l0, self.l1 + o.l1)

    def __sub__(self, o):
        return self._wrap(self.l0 - o.l0, self.l1 - o.l1)

    def __neg__(self):
        return self._wrap(-self.l0, -self.l1)

    def __mul__(self, o):
        # (l0 + z l1)(m0 + z m1) = l0 m0 + gamma sigma(l1) m1
        #                        + z (sigma(l0) m1 + l1 m0)
        g = FieldElement(self.spec, self.spec.gamma)
        p0 = self.l0 * o.l0 + g * self.l1.sigma() * o.l1
        p1 = self.l0.sigma() * o.l1 + self.l1 * o.l0
        return self._wrap(p0, p1)

    def scale(self, s) -> "AlgebraElement":
        s = GaussianRational._coerce(s)
        return self._wrap(self.l0 * s, self.l1 * s)

    def is_zero(self) -> bool:
        return self.l0.is_zero() and self.l1.is_zero()

    def __eq__(self, o):
        return self.l0 == o.l0 and self.l1 == o.l1

    def reduced_norm(self) -> GaussianRational:
        g = FieldElement(self.spec, self.spec.gamma)
        d = self.l0 * self.l0.sigma() - g * self.l1.sigma() * self.l1
        if not d.b.is_zero():
            raise ArithmeticError("reduced norm left the base field")
        return d.a

    def reduced_trace(self) -> GaussianRational:
        t = self.l0 + self.l0.sigma()
        if not t.b.is_zero():
            raise ArithmeticError("reduced trace left the base field")
        return t.a

    def to_matrix(self) -> np.ndarray:
        return left_regular_rep(self.spec, self.l0, self.l1)

    def real_vector(self) -> np.ndarray:
        """Length-8 real stacking of the 2x2 matrix view."""
        return mat_to_real_vec(self.to_matrix())

    def field_coeffs(self):
        return (self.l0.a, self.l0.b, self.l1.a, self.l1.b)

    def __repr__(self):
        return "Alg(%r, %r)" % (self.l0, self.l1)


def left_regular_rep(spec: AlgebraSpec, l0, l1) -> np.ndarray:
    """2x2 complex matrix [[l0, gamma sigma(l1)], [l1, sigma(l0)]].

    Plain complex inputs are taken as base-field scalars (fixed by sigma).
    """
    def as_field(x):
        if isinstance(x, FieldElement):
            return x
        return FieldElement(spec, GaussianRational._coerce(x), 0)

    a0, a1 = as_field(l0), as_field(l1)
    gv = complex(spec.gamma)
    return np.array([
        [complex(a0), gv * complex(a1.sigma())],
        [complex(a1), complex(a0.sigma())],
    ])


def reduced_norm(x):
    """Determinant of the matrix view (exact for AlgebraElement inputs)."""
    if isinstance(x, AlgebraElement):
        return complex(x.reduced_norm())
    x = np.asarray(x)
    return complex(np.linalg.det(x))


def reduced_trace(x):
    if isinstance(x, AlgebraElement):
        return complex(x.reduced_trace())
    x = np.asarray(x)
    return complex(np.trace(x))


# -- golden rotation ----------------------------------------------------------

def golden_generator() -> np.ndarray:
    """Orthonormal 8x8 real generator of the golden-ratio rotation.

    Columns map integer coordinates to the stacked real form of the 2x2
    codeword matrices; the complex core is scaled by 1/sqrt(5).
    """
    th = (1.0 + math.sqrt(5.0)) / 2.0
    sth = 1.0 - th
    eta = 1.0 + 1.0j - 1.0j * th
    seta = 1.0 + 1.0j - 1.0j * sth
    g = 1.0j
    # rows are the codeword entries in column-major order (X11, X21, X12, X22);
    # the bottom row carries no gamma factor: placing gamma there as well
    # collapses difference determinants to zero (try coordinates e1 + e3)
    Gc = np.array([
        [eta, th * eta, 0.0, 0.0],
        [0.0, 0.0, eta, th * eta],
        [0.0, 0.0, g * seta, g * sth * seta],
        [seta, sth * seta, 0.0, 0.0],
    ]) / math.sqrt(5.0)
    return split_matrix(Gc)


# -- orders and ideals ---------------------------------------------------------

class OrderBasis:
    """Ordered 4-element basis of an order, with exact coordinate maps."""

    def __init__(self, spec: AlgebraSpec, elements: Sequence[AlgebraElement],
                 name: str = ""):
        if len(elements) != 4:
            raise ValueError("order basis must have 4 elements")
        self.spec = spec
        self.elements = tuple(elements)
        self.name = name or spec.name
        # columns of the coefficient matrix are the basis field coefficients
        self._cmat = [[elements[k].field_coeffs()[j] for k in range(4)]
                      for j in range(4)]

    def element(self, coords) -> AlgebraElement:
        """Exact combination sum_k coords[k] * basis[k]."""
        acc = AlgebraElement(self.spec)
        for c, b in zip(coords, self.elements):
            acc = acc + b.scale(GaussianRational._coerce(c))
        return acc

    def to_coords(self, x: AlgebraElement):
        """Exact coordinates of x over the basis (Gaussian rationals)."""
        m = [row[:] + [x.field_coeffs()[i]] for i, row in enumerate(self._cmat)]
        for col in range(4):
            piv = next((r for r in range(col, 4) if not m[r][col].is_zero()), None)
            if piv is None:
                raise ArithmeticError("order basis is degenerate")
            m[col], m[piv] = m[piv], m[col]
            inv = m[col][col]
            m[col] = [v / inv for v in m[col]]
            for r in range(4):
                if r != col and not m[r][col].is_zero():
                    f = m[r][col]
                    m[r] = [v - f * w for v, w in zip(m[r], m[col])]
        return tuple(m[r][4] for r in range(4))

    def contains(self, x: AlgebraElement) -> bool:
        return all(c.is_gaussian_integer() for c in self.to_coords(x))

    def z_basis(self):
        """The 8 generators over the rational integers: b_k and i b_k."""
        out = []
        for b in self.elements:
            out.append(b)
            out.append(b.scale(GI_I))
        return out

    def real_generator(self, left: Optional[AlgebraElement] = None,
                       right: Optional[AlgebraElement] = None) -> np.ndarray:
        """8x8 real generator of {left * x * right : x in the order}."""
        cols = []
        for b in self.z_basis():
            e = b
            if left is not None:
                e = left * e
            if right is not None:
                e = e * right
            cols.append(e.real_vector())
        return np.array(cols).T

    def lattice(self, left=None, right=None, name="") -> Lattice:
        return Lattice(self.real_generator(left, right),
                       name=name or self.name)


def golden_plus_order() -> OrderBasis:
    """Maximal order of the g^2 = 2+i algebra, as an ordered basis."""
    s = GOLDEN_PLUS
    b1 = AlgebraElement(s, FieldElement(s, GI_ONE, 0), FieldElement(s, 0, 0))
    b2 = AlgebraElement(s, FieldElement(s, 0, 0), FieldElement(s, GI_ONE, 0))
    b3 = AlgebraElement(s, FieldElement(s, _half(0, 1), _half(0, 1)),
                        FieldElement(s, _half(0, 1), _half(-1, 0)))
    b4 = AlgebraElement(s, FieldElement(s, _half(-1, 0), _half(0, -1)),
                        FieldElement(s, _half(0, 1), _half(0, 1)))
    return OrderBasis(s, (b1, b2, b3, b4), name="golden-plus-order")


def golden_plus_ideal_generator() -> AlgebraElement:
    """The cube (1 - g)^3 placed in the first slot; reduced norm 2 - 2i."""
    s = GOLDEN_PLUS
    one_minus = FieldElement(s, GI_ONE, GaussianRational(-1))
    return AlgebraElement(s, one_minus * one_minus * one_minus,
                          FieldElement(s, 0, 0))


def golden_plus_code_lattice(side: str = "right") -> Lattice:
    """Real lattice of the principal ideal generated by the cube element.

    side selects {x * m : x in order} ("right" multiplication, default) or
    {m * x : x in order}; both have index 64 in the order's lattice.
    """
    order = golden_plus_order()
    m = golden_plus_ideal_generator()
    if side == "right":
        return order.lattice(right=m, name="golden-plus-ideal")
    if side == "left":
        return order.lattice(left=m, name="golden-plus-ideal-left")
    raise ValueError("side must be 'right' or 'left'")


def order_index(order: OrderBasis, beta: AlgebraElement) -> int:
    """Index of beta*order inside the order: |N_r(beta)^2|^2, exactly."""
    if beta.is_zero():
        raise ValueError("beta must be nonzero")
    nr = beta.reduced_norm()
    v = nr * nr
    mag = v * v.conj()
    if not mag.im == 0:
        raise NotAnOrderElement("index magnitude is not real")
    if mag.re.denominator != 1:
        raise NotAnOrderElement("index %s is not an integer" % mag.re)
    return int(mag.re)


# -- beta search ---------------------------------------------------------------

def _norm_form(order: OrderBasis):
    """Symmetric 4x4 Gaussian-integer matrix S4 with g^T S4 g = 4 N_r(sum g_k b_k)."""
    b = order.elements
    diag = [x.reduced_norm() for x in b]
    S4 = [[None] * 4 for _ in range(4)]
    two = GaussianRational(2)
    four = GaussianRational(4)
    for j in range(4):
        for k in range(j, 4):
            if j == k:
                s = four * diag[j]
            else:
                cross = (b[j] + b[k]).reduced_norm() - diag[j] - diag[k]
                s = two * cross
            if not s.is_gaussian_integer():
                raise ArithmeticError("scaled norm form is not integral")
            S4[j][k] = s
            S4[k][j] = s
    sr = np.array([[int(S4[j][k].re) for k in range(4)] for j in range(4)],
                  dtype=np.int64)
    si = np.array([[int(S4[j][k].im) for k in range(4)] for j in range(4)],
                  dtype=np.int64)
    return sr, si


def beta_search(order: OrderBasis, target_index: int, nu: int,
                csv_path: Optional[str] = None) -> AlgebraElement:
    """Pick the index-matching element whose left ideal packs best.

    Enumerates all beta = sum g_k b_k with |Re g_k|, |Im g_k| <= nu,
    keeps those whose order index equals target_index, and returns the one
    maximizing the coding gain of the beta*order lattice (ties resolve to
    the first candidate in enumeration order).  Optionally logs the
    surviving candidates as CSV rows.
    """
    if nu < 1:
        raise ValueError("nu must be >= 1")
    if target_index < 1:
        raise ValueError("target_index must be >= 1")

    rng = np.arange(-nu, nu + 1, dtype=np.int64)
    axes = np.meshgrid(*([rng] * 8), indexing="ij")
    flat = [a.reshape(-1) for a in axes]
    # candidate order: lexicographic in (re g1, im g1, ..., re g4, im g4)
    gr = np.stack(flat[0::2], axis=1)
    gi = np.stack(flat[1::2], axis=1)

    sr, si = _norm_form(order)
    x = np.zeros(gr.shape[0], dtype=np.int64)
    y = np.zeros(gr.shape[0], dtype=np.int64)
    for j in range(4):
        for k in range(4):
            if sr[j, k] == 0 and si[j, k] == 0:
                continue
            pr = gr[:, j] * gr[:, k] - gi[:, j] * gi[:, k]
            pi = gr[:, j] * gi[:, k] + gi[:, j] * gr[:, k]
            x += sr[j, k] * pr - si[j, k] * pi
            y += sr[j, k] * pi + si[j, k] * pr
    mag = x * x + y * y                      # |4 N_r|^2 = 16 |N_r|^2
    keep = np.nonzero(mag * mag == 256 * target_index)[0]
    if keep.size == 0:
        raise NoCandidateFound("no element of index %d in the nu=%d box"
                               % (target_index, nu))

    base_mats = [np.asarray(b.to_matrix()) for b in order.elements]
    order_gen = order.real_generator()
    order_vol = abs(np.linalg.det(order_gen))
    vol = target_index * order_vol          # covolume is index * base volume
    eye2 = np.eye(2)

    def candidate_gen(i):
        bm = np.zeros((2, 2), dtype=complex)
        for k in range(4):
            bm += (gr[i, k] + 1j * gi[i, k]) * base_mats[k]
        return split_matrix(np.kron(eye2, bm)) @ order_gen

    # upper bound d_min^2 by the smallest column norm, visit best bounds first
    bounds = np.empty(keep.size)
    gens = {}
    for pos, i in enumerate(keep):
        G = candidate_gen(i)
        gens[i] = G
        bounds[pos] = np.min(np.sum(G * G, axis=0))
    visit = keep[np.argsort(-bounds)]

    tol = 1e-9
    best_d2 = -1.0
    results = {}
    for i in visit:
        G = gens[i]
        colmin = np.min(np.sum(G * G, axis=0))
        if colmin < best_d2 * (1.0 - tol):
            continue                         # cannot beat nor tie the best
        _, d2 = clps.PreparedBasis(G).shortest()
        results[i] = d2
        if d2 > best_d2:
            best_d2 = d2

    winners = [i for i, d2 in results.items() if d2 >= best_d2 * (1.0 - tol)]
    win = min(winners)                       # first in enumeration order

    if csv_path is not None:
        with open(csv_path, "w", newline="") as fh:
            wr = csv.writer(fh)
            fh.write("beta_coords, norm, index, coding_gain\n")
            for i in keep:
                coords = " ".join("%+d%+di" % (gr[i, k], gi[i, k])
                                  for k in range(4))
                nr = "%+d%+di" % (x[i] // 4, y[i] // 4)
                if i in results:
                    d2 = results[i]
                else:
                    _, d2 = clps.PreparedBasis(gens[i]).shortest()
                gain = d2 / vol ** 0.25
                wr.writerow([coords, nr, target_index, "%.12g" % gain])

    coords = [GaussianRational(int(gr[win, k]), int(gi[win, k]))
              for k in range(4)]
    return order.element(coords)


def min_det_sample(lat: Lattice, count: int, radius: float) -> float:
    """Smallest |det X|^2 over nonzero lattice points within the radius.

    The lattice must be the 8-real-dimensional form of a 2x2 complex code;
    a finite witness of determinant separation, not a proof.
    """
    if count <= 0:
        raise ValueError("sample budget must be positive")
    if lat.dim != 8:
        raise ValueError("expected the 8-dimensional real form of a 2x2 code")
    Z, _ = clps.enumerate_within(lat.generator, np.zeros(8), radius,
                                 cap=count, exclude_origin=True)
    if Z.shape[0] == 0:
        raise ValueError("no nonzero lattice point within the radius")
    pts = Z @ lat.generator.T
    c = pts[:, :4] + 1j * pts[:, 4:]
    dets = np.abs(c[:, 0] * c[:, 3] - c[:, 1] * c[:, 2]) ** 2
    return float(np.min(dets))
