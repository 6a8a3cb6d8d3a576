"""Closest-lattice-point search by depth-first bounded enumeration.

The basis is triangularized once by QR; the integer search then walks
candidate coordinates in a zig-zag order around the conditional rounding
center, pruning subtrees whose partial metric already exceeds the best
metric found so far.  Three query modes share the same compiled core:
nearest point, shortest nonzero vector, and listing of all points in a
ball.  Reported metrics are always recomputed from the original basis so
they match a direct evaluation bit for bit.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
from numba import njit


class SearchRadiusExhausted(RuntimeError):
    """No lattice point found inside the caller-supplied radius."""


class ResultTooLarge(RuntimeError):
    """Ball enumeration produced more points than the caller's cap."""


@dataclass(frozen=True)
class SearchProblem:
    """A single search instance; columns of basis generate the lattice."""

    basis: np.ndarray
    target: Optional[np.ndarray] = None
    radius: Optional[float] = None
    mode: str = "closest"  # "closest" | "shortest"


@njit(cache=True)
def _enum(R, w, mode, bound, exclude_zero, cap, out_z, out_metric):
    """Zig-zag depth-first enumeration over upper-triangular R.

    mode 0: nearest point to w (radius shrinks on every improvement)
    mode 1: shortest nonzero vector (w must be zero, exclude_zero set)
    mode 2: collect every z with |w - R z|^2 <= bound into out_z

    Returns the number of stored solutions, or -1 if cap was exceeded.
    """
    n = R.shape[0]
    E = np.zeros((n, n))
    for j in range(n):
        E[n - 1, j] = w[j]
    dist = np.zeros(n)
    z = np.zeros(n, dtype=np.int64)
    step = np.zeros(n, dtype=np.int64)
    best = bound
    have = False
    count = 0

    k = n - 1
    c = E[k, k] / R[k, k]
    z[k] = int(np.floor(c + 0.5))
    step[k] = 1 if c - z[k] >= 0 else -1

    while True:
        e = E[k, k] - z[k] * R[k, k]
        newdist = dist[k] + e * e
        # near-ties (cell-boundary targets) must reach the lexicographic
        # comparison below, whatever rounding path produced the target
        slack = 1e-9 * (1.0 + best)
        if newdist <= best + slack:
            if k > 0:
                for j in range(k):
                    E[k - 1, j] = E[k, j] - z[k] * R[j, k]
                k -= 1
                dist[k] = newdist
                c = E[k, k] / R[k, k]
                z[k] = int(np.floor(c + 0.5))
                step[k] = 1 if c - z[k] >= 0 else -1
                continue
            skip = False
            if exclude_zero:
                skip = True
                for j in range(n):
                    if z[j] != 0:
                        skip = False
                        break
            if not skip:
                if mode == 2:
                    if count < cap:
                        for j in range(n):
                            out_z[count, j] = z[j]
                        out_metric[count] = newdist
                        count += 1
                    else:
                        return -1
                else:
                    take = False
                    if not have or newdist < best - slack:
                        take = True
                    else:
                        # tie window: keep the lexicographically smaller z
                        for j in range(n):
                            if z[j] < out_z[0, j]:
                                take = True
                                break
                            elif z[j] > out_z[0, j]:
                                break
                    if take:
                        for j in range(n):
                            out_z[0, j] = z[j]
                        out_metric[0] = newdist
                        have = True
                        count = 1
                    if newdist < best:
                        best = newdist
            z[0] += step[0]
            step[0] = -step[0] - (1 if step[0] >= 0 else -1)
        else:
            if k == n - 1:
                return count
            k += 1
            z[k] += step[k]
            step[k] = -step[k] - (1 if step[k] >= 0 else -1)


@njit(cache=True)
def _closest_batch(R, W, out_z):
    """Nearest-point search for every column of W (projected targets)."""
    n = R.shape[0]
    buf_z = np.zeros((1, n), dtype=np.int64)
    buf_m = np.zeros(1)
    w = np.zeros(n)
    for t in range(W.shape[1]):
        for j in range(n):
            w[j] = W[j, t]
        _enum(R, w, 0, np.inf, False, 1, buf_z, buf_m)
        for j in range(n):
            out_z[j, t] = buf_z[0, j]


class PreparedBasis:
    """QR factorization of a basis, reused across many queries."""

    def __init__(self, basis):
        B = np.ascontiguousarray(basis, dtype=np.float64)
        if B.ndim != 2 or B.shape[0] < B.shape[1]:
            raise ValueError("basis must be m x n with m >= n")
        q, r = np.linalg.qr(B)
        d = np.abs(np.diag(r))
        if np.min(d) <= 1e-12 * max(np.max(d), 1.0):
            raise ValueError("basis is numerically rank deficient")
        s = np.sign(np.diag(r))
        s[s == 0] = 1.0
        self.basis = B
        self.q = q * s[None, :]
        self.r = np.ascontiguousarray(r * s[:, None])
        self.n = B.shape[1]
        self.min_col_norm_sq = float(np.min(np.sum(B * B, axis=0)))

    def _project(self, target):
        y = np.asarray(target, dtype=np.float64)
        w = self.q.T @ y
        # energy in the orthogonal complement (tall bases only)
        offset = max(float(y @ y - w @ w), 0.0)
        return w, offset

    def closest(self, target, radius=None):
        w, offset = self._project(target)
        if radius is None:
            bound = np.inf
        else:
            bound = radius * radius - offset
            if bound < 0:
                raise SearchRadiusExhausted("radius smaller than projection residual")
        out_z = np.zeros((1, self.n), dtype=np.int64)
        out_m = np.zeros(1)
        cnt = _enum(self.r, w, 0, bound, False, 1, out_z, out_m)
        if cnt == 0:
            raise SearchRadiusExhausted("no lattice point within the given radius")
        z = out_z[0].copy()
        diff = np.asarray(target, dtype=np.float64) - self.basis @ z
        return z, float(diff @ diff)

    def closest_many(self, targets):
        """Nearest-point coordinates for every column of targets (m x K)."""
        T = np.ascontiguousarray(targets, dtype=np.float64)
        W = np.ascontiguousarray(self.q.T @ T)
        out = np.zeros((self.n, T.shape[1]), dtype=np.int64)
        _closest_batch(self.r, W, out)
        return out

    def shortest(self, radius=None):
        # the shortest vector never beats the best basis column
        bound = self.min_col_norm_sq * (1.0 + 1e-9)
        if radius is not None:
            bound = min(bound, radius * radius)
        out_z = np.zeros((1, self.n), dtype=np.int64)
        out_m = np.zeros(1)
        w = np.zeros(self.n)
        cnt = _enum(self.r, w, 1, bound, True, 1, out_z, out_m)
        if cnt == 0:
            raise SearchRadiusExhausted("no nonzero vector within the given radius")
        z = out_z[0].copy()
        v = self.basis @ z
        return z, float(v @ v)

    def within(self, target, radius, cap=1_000_000, exclude_origin=False):
        if not np.isfinite(radius) or radius <= 0:
            raise ValueError("radius must be positive and finite")
        w, offset = self._project(target)
        bound = radius * radius - offset
        out_z = np.zeros((max(int(cap), 1), self.n), dtype=np.int64)
        out_m = np.zeros(max(int(cap), 1))
        cnt = _enum(self.r, w, 2, bound, exclude_origin, int(cap), out_z, out_m)
        if cnt < 0:
            raise ResultTooLarge("enumeration exceeded cap=%d" % cap)
        Z = out_z[:cnt]
        y = np.asarray(target, dtype=np.float64)
        diff = y[:, None] - self.basis @ Z.T
        met = np.sum(diff * diff, axis=0)
        order = np.lexsort(tuple(Z[:, j] for j in range(self.n - 1, -1, -1)) + (met,))
        return Z[order].copy(), met[order].copy()


def _as_parts(problem, target, radius):
    if isinstance(problem, SearchProblem):
        return problem.basis, problem.target, problem.radius
    return problem, target, radius


def closest_point(problem, target=None, radius=None):
    """Integer coordinates z minimizing |target - basis z|^2, plus the metric.

    Accepts a SearchProblem or a plain (basis, target) pair.  Ties are
    broken toward the lexicographically smallest z.  A finite radius that
    contains no lattice point raises SearchRadiusExhausted; the default
    unbounded search always succeeds.
    """
    basis, target, radius = _as_parts(problem, target, radius)
    return PreparedBasis(basis).closest(target, radius)


def shortest_vector(problem, radius=None):
    """Nonzero z minimizing |basis z|^2, plus the metric."""
    basis, _, radius = _as_parts(problem, None, radius)
    return PreparedBasis(basis).shortest(radius)


def enumerate_within(problem, target=None, radius=None, cap=1_000_000,
                     exclude_origin=False):
    """All lattice points with |target - basis z|^2 <= radius^2.

    Returns (Z, metrics) sorted by metric (coordinate-lexicographic within
    equal metrics).  Raises ResultTooLarge when more than cap points fit.
    """
    basis, target, _ = _as_parts(problem, target, None)
    if radius is None:
        raise ValueError("enumerate_within requires a radius")
    return PreparedBasis(basis).within(target, radius, cap, exclude_origin)


def solve(problem: SearchProblem):
    """Dispatch a SearchProblem on its mode field."""
    if problem.mode == "closest":
        return closest_point(problem)
    if problem.mode == "shortest":
        return shortest_vector(problem)
    raise ValueError("unknown search mode %r" % problem.mode)
