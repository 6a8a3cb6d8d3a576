"""Regularized decision-feedback factorization for lattice decoding.

Given a real channel matrix H and an SNR per dimension, the backward
filter B is the upper-triangular Cholesky factor of H^T H + eta I with
eta = 1/snr, and the forward filter is F = B^{-T} H^T.  The pair turns
y = H x + w into F y = B x + e with a well-conditioned B even when H is
rank deficient, so a closest-point search on B can stand in for ML
decoding of x.
"""

from dataclasses import dataclass

import numpy as np
from numpy.linalg import cholesky, solve


@dataclass(frozen=True)
class FilterPair:
    forward: np.ndarray
    backward: np.ndarray
    regularizer: float


def compute_filters(channel: np.ndarray, snr_per_dim: float) -> FilterPair:
    """Forward/backward filter pair for a real channel matrix.

    channel may be any m x n real matrix (m >= 1); snr_per_dim must be
    positive.  backward is upper triangular with positive diagonal and
    satisfies B^T B = H^T H + eta I; forward = B^{-T} H^T.
    """
    H = np.asarray(channel, dtype=float)
    if H.ndim != 2:
        raise ValueError("channel must be a matrix")
    if not np.isfinite(H).all():
        raise ValueError("channel must be finite")
    if not (snr_per_dim > 0):
        raise ValueError("snr_per_dim must be positive")
    eta = 1.0 / float(snr_per_dim)
    n = H.shape[1]
    M = H.T @ H + eta * np.eye(n)
    # numpy gives the lower factor L with L L^T = M; take B = L^T
    L = cholesky(M)
    B = L.T
    F = solve(L, H.T)                   # B^{-T} H^T since B^T = L
    return FilterPair(forward=F, backward=B, regularizer=eta)


def modified_observation(filters: FilterPair, received: np.ndarray,
                         offset: np.ndarray = None) -> np.ndarray:
    """Apply the forward filter, optionally removing a known lattice offset.

    Returns F (received) - B offset when an offset is given, so the
    result is searched against the backward-filtered lattice directly.
    """
    y = filters.forward @ np.asarray(received, dtype=float)
    if offset is not None:
        y = y - filters.backward @ np.asarray(offset, dtype=float)
    return y
