"""Real lattices: generator matrices, figures of merit, quantization and
modulo reduction, plus a catalog of named constructions.

Conventions: columns of the generator G span the lattice {G u : u integer}.
The minimum squared distance is computed lazily by exact shortest-vector
enumeration and cached (thread safe; instances are otherwise immutable).
"""

import math
import re
import threading
from typing import Optional

import numpy as np

from . import clps


class Lattice:
    """Full-rank real lattice described by a square generator matrix."""

    def __init__(self, generator, integral: Optional[bool] = None, name: str = ""):
        G = np.array(generator, dtype=np.float64)
        if G.ndim != 2 or G.shape[0] != G.shape[1]:
            raise ValueError("generator must be square (columns generate)")
        if not np.all(np.isfinite(G)):
            raise ValueError("generator entries must be finite")
        A = G.T @ G
        det = float(np.linalg.det(A))
        if not np.isfinite(det) or det <= 0:
            raise ValueError("generator is singular or ill posed")
        gram_integer = bool(np.all(np.abs(A - np.rint(A)) <= 1e-9))
        if integral is None:
            integral = gram_integer
        elif integral and not gram_integer:
            raise ValueError("integral flag set but Gram matrix is not integer")
        G.setflags(write=False)
        A.setflags(write=False)
        self.generator = G
        self.gram = A
        self.integral = bool(integral)
        self.name = name or "lattice-%dd" % G.shape[0]
        self._volume = math.sqrt(det)
        self._min_dist_sq: Optional[float] = None
        self._prep: Optional[clps.PreparedBasis] = None
        self._lock = threading.RLock()

    # -- geometry -----------------------------------------------------------

    @property
    def dim(self) -> int:
        return self.generator.shape[0]

    @property
    def volume(self) -> float:
        """Fundamental volume sqrt(det(G^T G))."""
        return self._volume

    def _prepared(self) -> clps.PreparedBasis:
        if self._prep is None:
            with self._lock:
                if self._prep is None:
                    self._prep = clps.PreparedBasis(self.generator)
        return self._prep

    @property
    def min_dist_sq(self) -> float:
        # compute-once contract: first caller fills the cache, others wait
        if self._min_dist_sq is None:
            with self._lock:
                if self._min_dist_sq is None:
                    _, m = self._prepared().shortest()
                    self._min_dist_sq = float(m)
        return self._min_dist_sq

    @property
    def min_dist(self) -> float:
        return math.sqrt(self.min_dist_sq)

    @property
    def coding_gain(self) -> float:
        """d_min^2 / V_f^(2/n); invariant to scaling and rotation."""
        n = self.dim
        return self.min_dist_sq / self.volume ** (2.0 / n)

    @property
    def center_density(self) -> float:
        n = self.dim
        return (self.min_dist / 2.0) ** n / self.volume

    @property
    def density(self) -> float:
        """Fraction of space covered by packing spheres of radius d_min/2."""
        n = self.dim
        vn = math.pi ** (n / 2.0) / math.gamma(n / 2.0 + 1.0)
        return self.center_density * vn

    # -- quantization -------------------------------------------------------

    def quantize_coords(self, y):
        """Integer coordinates of the nearest lattice point to y."""
        z, _ = self._prepared().closest(np.asarray(y, dtype=float))
        return z

    def quantize(self, y):
        """Nearest lattice point to y (ties: lexicographically smallest z)."""
        return self.generator @ self.quantize_coords(y)

    def mod(self, y):
        """y reduced into the fundamental Voronoi cell: y - quantize(y)."""
        y = np.asarray(y, dtype=float)
        return y - self.quantize(y)

    def quantize_coords_many(self, Y):
        """Batched quantize_coords; Y holds targets as columns (n x K)."""
        return self._prepared().closest_many(Y)

    def mod_many(self, Y):
        Y = np.asarray(Y, dtype=float)
        return Y - self.generator @ self.quantize_coords_many(Y)

    # -- derived lattices ---------------------------------------------------

    def scale(self, k: float) -> "Lattice":
        if k == 0:
            raise ValueError("scale factor must be nonzero")
        return Lattice(k * self.generator, name="%s*%g" % (self.name, k))

    def rotate(self, U) -> "Lattice":
        U = np.asarray(U, dtype=float)
        if np.max(np.abs(U.T @ U - np.eye(U.shape[1]))) > 1e-10:
            raise ValueError("rotation matrix is not orthogonal")
        return Lattice(U @ self.generator, name="%s-rotated" % self.name)

    def __repr__(self):
        return "Lattice(%s, dim=%d, volume=%.6g)" % (self.name, self.dim, self.volume)


# -- module-level operation forms -------------------------------------------

def fundamental_volume(L: Lattice) -> float:
    return L.volume


def coding_gain(L: Lattice) -> float:
    return L.coding_gain


def center_density(L: Lattice) -> float:
    return L.center_density


def density(L: Lattice) -> float:
    return L.density


def quantize(L: Lattice, y):
    return L.quantize(y)


def mod_lattice(L: Lattice, y):
    return L.mod(y)


def scale(L: Lattice, k: float) -> Lattice:
    return L.scale(k)


def rotate(L: Lattice, U) -> Lattice:
    return L.rotate(U)


# -- catalog -----------------------------------------------------------------

# Index-16 sublattice of Z^8 whose residues mod 2 form the length-8
# first-order Reed-Muller code (the extended [8,4,4] Hamming code).
# Upper-triangular Hermite-normal-form rows; columns generate; volume 16,
# squared minimum distance 4.
_E8A_ROWS = (
    (2, 0, 0, 1, 0, 1, 1, 0),
    (0, 2, 0, 1, 0, 1, 0, 1),
    (0, 0, 2, 1, 0, 0, 1, 1),
    (0, 0, 0, 1, 0, 0, 0, 0),
    (0, 0, 0, 0, 2, 1, 1, 1),
    (0, 0, 0, 0, 0, 1, 0, 0),
    (0, 0, 0, 0, 0, 0, 1, 0),
    (0, 0, 0, 0, 0, 0, 0, 1),
)

# Unimodular E8 basis; rows as listed, columns generate.
_E8_UNIMODULAR_ROWS = (
    (2, -1, 0, 0, 0, 0, 0, 0.5),
    (0, 1, -1, 0, 0, 0, 0, 0.5),
    (0, 0, 1, -1, 0, 0, 0, 0.5),
    (0, 0, 0, 1, -1, 0, 0, 0.5),
    (0, 0, 0, 0, 1, -1, 0, 0.5),
    (0, 0, 0, 0, 0, 1, -1, 0.5),
    (0, 0, 0, 0, 0, 0, 1, 0.5),
    (0, 0, 0, 0, 0, 0, 0, 0.5),
)

# Leech lattice basis times sqrt(8); rows listed one per line,
# columns generate.
# Reduced offline from the standard construction (doubled Golay codewords,
# scaled even-sum vectors, and the (-3, 1^23) glue vector); every column
# has squared norm 32 and |det| = 8^12, so dividing by sqrt(8) gives the
# even unimodular lattice with squared minimum distance 4.
_LEECH_ROWS_X8 = (
    (-2, -2, -2, -2, -1, 0, 0, 0, 0, 0, 0, 0, 2, 2, 2, 2, 2, 3, 3, 4, 4, 4, 4, 4),
    (-2, -2, 0, 0, -3, -4, -2, -2, -2, -2, 0, 2, -2, 0, 2, 2, 2, -1, 1, 0, 0, 0, 0, 4),
    (-2, 2, 0, 2, -1, -4, -2, 2, 2, 2, 2, 2, 0, 0, 2, 2, 2, 1, 1, 0, 0, 0, 4, 0),
    (0, 0, 2, 2, 1, 0, -2, -2, -2, 2, 2, 2, -2, 2, -2, -2, 2, -1, 1, 0, 0, 4, 0, 0),
    (0, 0, 2, 0, -1, 0, 0, -2, -2, 0, 2, 2, 0, 2, -2, -2, 2, 1, 1, 0, 4, 0, 0, 0),
    (2, -2, 2, -2, -1, 0, 0, -2, -2, 0, 2, 2, 2, 2, 0, 0, 0, -1, -1, 4, 0, 0, 0, 0),
    (2, 2, 0, 0, 1, 0, 0, 0, 0, 2, 2, 0, 0, 0, 0, 0, 0, -1, 1, 0, 0, 0, 0, 0),
    (0, 0, 2, 0, 1, 0, 0, 0, 0, 2, 0, 0, 0, 0, -2, 2, 2, 1, -1, 0, 0, 0, 0, 0),
    (0, 0, 0, 0, -1, 0, 0, -2, 2, 0, 0, 2, 0, 2, 0, 0, 0, 1, 1, 0, 0, 0, 0, 0),
    (0, 0, 2, -2, 1, 0, 0, 0, 0, 0, 2, 0, 0, 0, 0, 0, 0, 1, 1, 0, 0, 0, 0, 0),
    (0, 0, 0, 2, 1, 0, 0, 0, 0, 0, 0, 0, -2, -2, 2, -2, 2, 1, -1, 0, 0, 0, 0, 0),
    (0, 0, -2, 0, 1, 0, -2, 2, -2, 0, 0, 2, 2, 0, 0, 0, 0, 1, 1, 0, 0, 0, 0, 0),
    (2, 2, 0, 0, -1, 0, 2, 0, 0, 0, 2, 0, 0, 0, -2, -2, 2, -1, -1, 0, 0, 0, 0, 0),
    (2, -2, 0, -2, 1, 0, 0, -2, -2, 2, 0, 2, 0, 0, 0, 0, 0, -1, -1, 0, 0, 0, 0, 0),
    (0, 0, 0, 0, 1, 0, -2, 0, 0, -2, 2, 0, 0, -2, 0, 0, 0, 1, 1, 0, 0, 0, 0, 0),
    (-2, 2, 0, 0, 1, 0, -2, 0, 0, 0, 0, 0, -2, 0, 0, 0, 0, 1, 1, 0, 0, 0, 0, 0),
    (0, 0, 0, 2, -1, 0, 0, 0, 0, 2, 0, 0, 0, 0, 0, 0, 0, 1, 1, 0, 0, 0, 0, 0),
    (0, 0, 2, 0, -1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, -1, -1, 0, 0, 0, 0, 0),
    (0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0, 2, 0, 0, 0, 0, 1, -1, 0, 0, 0, 0, 0),
    (0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 2, 0, 0, 0, -1, -1, 0, 0, 0, 0, 0),
    (0, 0, 0, 0, 1, 0, 2, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, -1, -1, 0, 0, 0, 0, 0),
    (0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, -1, 1, 0, 0, 0, 0, 0),
    (0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1, -1, 0, 0, 0, 0, 0),
    (0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, -1, -1, 0, 0, 0, 0, 0),
)

_ZN_RE = re.compile(r"^Zn\((\d+)\)$")


def catalog_names():
    return ("Zn(n)", "hexagonal", "D4", "E8-unimodular", "E8-constructionA",
            "BW16", "Leech24")


def catalog(name: str) -> Lattice:
    """Named lattice constructions used throughout the package."""
    m = _ZN_RE.match(name)
    if m:
        n = int(m.group(1))
        if n < 1:
            raise ValueError("Zn dimension must be positive")
        return Lattice(np.eye(n), name=name)
    if name == "hexagonal":
        G = np.array([[1.0, 0.5], [0.0, math.sqrt(3.0) / 2.0]])
        return Lattice(G, name=name)
    if name == "D4":
        rows = [(1, -1, 0, 0), (0, 1, -1, 0), (0, 0, 1, -1), (0, 0, 1, 1)]
        return Lattice(np.array(rows, dtype=float).T, name=name)
    if name == "E8-unimodular":
        return Lattice(np.array(_E8_UNIMODULAR_ROWS, dtype=float), name=name)
    if name == "E8-constructionA":
        return Lattice(np.array(_E8A_ROWS, dtype=float), name=name)
    if name == "BW16":
        G8 = np.array(_E8A_ROWS, dtype=float)
        # norm-doubling map: T^T T = 2 I and T maps the base lattice into itself
        T = np.kron(np.eye(4), np.array([[1.0, 1.0], [1.0, -1.0]]))
        G = np.block([[G8, np.zeros((8, 8))], [G8, T @ G8]])
        return Lattice(G, name=name)
    if name == "Leech24":
        G = np.array(_LEECH_ROWS_X8, dtype=float) / math.sqrt(8.0)
        return Lattice(G, name=name)
    raise ValueError("unknown lattice name %r (known: %s)"
                     % (name, ", ".join(catalog_names())))


# -- plain-text import/export -------------------------------------------------

def save_lattice(L: Lattice, path: str) -> None:
    """Write dimension then the generator rows; '#' starts a comment."""
    with open(path, "w") as fh:
        fh.write("# lattice %s\n" % L.name)
        fh.write("%d\n" % L.dim)
        for row in L.generator:
            fh.write(" ".join("%.17g" % v for v in row) + "\n")


def load_lattice(path: str) -> Lattice:
    rows = []
    n = None
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if n is None:
                n = int(line)
                continue
            rows.append([float(tok) for tok in line.split()])
    if n is None or len(rows) != n or any(len(r) != n for r in rows):
        raise ValueError("malformed lattice file %r" % path)
    return Lattice(np.array(rows), name=path)
