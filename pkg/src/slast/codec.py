"""Short-block nested-lattice space-time codes.

A code is a pair of lattices: a coding lattice built from a rotation
applied per time block to a base integer lattice, and a shaping lattice
that is the coding lattice scaled by Q.  Messages index the Q^n cosets;
the sphere encoder reduces a coset representative (plus dither) into the
shaping cell, so the constellation inherits the cell's shape instead of
the cubic shape of the plain linear map.  Decoding is either exhaustive
ML over the finite codebook or a regularized closest-point search.
"""

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from . import clps
from .lattice import Lattice
from .mmse import compute_filters, modified_observation
from .reim import real_vec_to_mat

_M2_SAMPLES = 1 << 17            # >= 1e5 second-moment samples
_M2_SEED = 0x5EED


class CodebookTooLarge(RuntimeError):
    """Exhaustive enumeration of Q^n messages exceeds the caller cap."""


@dataclass(frozen=True)
class Message:
    """Coset index of the shaping lattice: n digits in {0, ..., Q-1}."""

    digits: Tuple[int, ...]

    @staticmethod
    def of(values) -> "Message":
        return Message(tuple(int(v) for v in values))

    def array(self) -> np.ndarray:
        return np.array(self.digits, dtype=np.int64)


class SLaSTCode:
    """Immutable code instance; build with build_code."""

    def __init__(self, rotation: Optional[np.ndarray], base: Lattice,
                 q: int, blocks: int = 1, name: str = ""):
        if q < 1:
            raise ValueError("Q must be a positive integer")
        if blocks < 1:
            raise ValueError("block count must be >= 1")
        n = base.dim
        if n % (2 * blocks) != 0:
            raise ValueError("base lattice dim must be 2*M^2*L")
        msq = n // (2 * blocks)
        m = math.isqrt(msq)
        if m * m != msq:
            raise ValueError("base lattice dim %d is not 2*M^2*L" % n)
        if rotation is None:
            rot = np.eye(n)
        else:
            rot = np.asarray(rotation, dtype=float)
            if rot.shape != (2 * m * m, 2 * m * m):
                raise ValueError("rotation must act on one 2*M^2 block")
            if np.max(np.abs(rot.T @ rot - np.eye(rot.shape[0]))) > 1e-9:
                raise ValueError("rotation must be orthonormal")
            rot = np.kron(np.eye(blocks), rot)
        self.m = m
        self.blocks = blocks
        self.t = blocks * m
        self.q = int(q)
        gen = rot @ base.generator
        self.coding_lattice = Lattice(gen, name=(name or "code") + "-coding")
        self.shaping_lattice = Lattice(q * gen, name=(name or "code") + "-shaping")
        self.u0 = np.zeros(n)
        self.power_scale = 1.0
        self.name = name or "code"
        self._m2: Optional[Tuple[float, float, int]] = None
        self._codebook = None

    # -- basic facts ---------------------------------------------------------

    @property
    def dim(self) -> int:
        return self.coding_lattice.dim

    @property
    def rate(self) -> float:
        """Information bits per channel use: 2M log2 Q."""
        return 2.0 * self.m * math.log2(self.q)

    def num_messages(self) -> int:
        return self.q ** self.dim

    def random_message(self, rng) -> Message:
        return Message(tuple(int(v) for v in rng.integers(0, self.q, self.dim)))

    def _digits(self, msg) -> np.ndarray:
        d = msg.array() if isinstance(msg, Message) else np.asarray(msg, dtype=np.int64)
        if d.shape != (self.dim,):
            raise ValueError("message needs %d digits" % self.dim)
        if d.min() < 0 or d.max() >= self.q:
            raise ValueError("digits must lie in [0, %d)" % self.q)
        return d

    # -- encoding ------------------------------------------------------------

    def sphere_encode(self, msg, u0: Optional[np.ndarray] = None) -> np.ndarray:
        """Coset representative plus dither, reduced into the shaping cell."""
        d = self._digits(msg)
        if u0 is None:
            u0 = self.u0
        lam = self.coding_lattice.generator @ d
        return self.shaping_lattice.mod(lam + u0)

    def linear_map(self, msg) -> np.ndarray:
        """Unshaped baseline: the origin-centered cubic constellation."""
        d = self._digits(msg).astype(float) - (self.q - 1) / 2.0
        return self.coding_lattice.generator @ d

    def codeword_matrix(self, x: np.ndarray) -> np.ndarray:
        """M x T complex matrix view of an encoded real vector."""
        return real_vec_to_mat(x, self.m, self.m)

    def draw_dither(self, rng) -> np.ndarray:
        """Uniform dither over a hypercube much larger than the cell."""
        side = 100.0 * self.q * float(
            np.max(np.linalg.norm(self.coding_lattice.generator, axis=0)))
        return rng.random(self.dim) * side

    def centering_translate(self) -> np.ndarray:
        """Fixed translate placing the codebook mean at the origin.

        Shifts every digit by (q-1)/2, so the coset representatives sit
        symmetrically around zero (at q = 2 they all share one energy).
        """
        shift = np.full(self.dim, -(self.q - 1) / 2.0)
        return self.coding_lattice.generator @ shift

    # -- power ----------------------------------------------------------------

    def second_moment(self) -> Tuple[float, float, int]:
        """(E|x|^2 over the shaping cell, standard error, sample count)."""
        if self._m2 is None:
            rng = np.random.default_rng([_M2_SEED, self.dim, self.q])
            U = rng.random((self.dim, _M2_SAMPLES))
            Y = self.shaping_lattice.generator @ U
            X = self.shaping_lattice.mod_many(Y)
            e = np.sum(X * X, axis=0)
            m2 = float(np.mean(e))
            se = float(np.std(e) / math.sqrt(e.size))
            self._m2 = (m2, se, int(e.size))
        return self._m2

    def with_power(self, scale: float) -> "SLaSTCode":
        """Copy of this code transmitting scale * x (caches shared)."""
        if not (scale > 0):
            raise ValueError("power scale must be positive")
        c = object.__new__(SLaSTCode)
        c.__dict__.update(self.__dict__)
        c.power_scale = float(scale)
        return c

    def snr_per_dim(self) -> float:
        """Transmit SNR per real dimension against unit-variance complex noise."""
        m2, _, _ = self.second_moment()
        return self.power_scale ** 2 * m2 / (self.m * self.t)

    # -- decoding --------------------------------------------------------------

    def decode_lattice(self, H: np.ndarray, y: np.ndarray,
                       u0: Optional[np.ndarray] = None) -> Message:
        """Regularized closest-point decoding on the filtered code lattice.

        Filters come from the channel itself so the regularization
        penalizes the transmit-domain point, whose per-dimension power
        is what snr_per_dim describes.
        """
        if u0 is None:
            u0 = self.u0
        a = self.power_scale
        # reduce the dither into the shaping cell first: subtracting the raw
        # translate would leave huge integer coordinates in the search
        u0r = self.shaping_lattice.mod(np.asarray(u0, dtype=float))
        fp = compute_filters(np.asarray(H, dtype=float), self.snr_per_dim())
        target = modified_observation(fp, np.asarray(y, dtype=float), a * u0r)
        basis = fp.backward @ (a * self.coding_lattice.generator)
        z, _ = clps.closest_point(basis, target)
        return Message(tuple(int(v) for v in np.mod(z, self.q)))

    def _codebook_for(self, u0: np.ndarray):
        count = self.num_messages()
        cached = self._codebook
        if cached is not None and np.array_equal(cached[2], u0):
            return cached[0], cached[1]
        D = np.stack(np.unravel_index(np.arange(count),
                                      (self.q,) * self.dim)).astype(np.int64)
        Y = self.coding_lattice.generator @ D + u0[:, None]
        X = self.shaping_lattice.mod_many(Y)
        if cached is None and np.array_equal(u0, self.u0):
            self._codebook = (D, X, u0.copy())
        return D, X

    def decode_ml(self, H: np.ndarray, y: np.ndarray,
                  u0: Optional[np.ndarray] = None, cap: int = 65536) -> Message:
        """Exhaustive minimum-distance decoding over all Q^n codewords."""
        if self.num_messages() > cap:
            raise CodebookTooLarge("codebook has %d entries (cap %d)"
                                   % (self.num_messages(), cap))
        if u0 is None:
            u0 = self.u0
        D, X = self._codebook_for(np.asarray(u0, dtype=float))
        R = np.asarray(y, dtype=float)[:, None] \
            - (self.power_scale * np.asarray(H, dtype=float)) @ X
        j = int(np.argmin(np.sum(R * R, axis=0)))
        return Message(tuple(int(v) for v in D[:, j]))


def build_code(rotation, base: Lattice, q: int, blocks: int = 1,
               name: str = "") -> SLaSTCode:
    """Assemble a code from a per-block rotation and a base lattice.

    rotation of None means the trivial (identity) rotation.  The base
    lattice dimension must equal 2*M^2*blocks; M is inferred.
    """
    return SLaSTCode(rotation, base, q, blocks, name)


def sphere_encode(code: SLaSTCode, msg, u0=None) -> np.ndarray:
    return code.sphere_encode(msg, u0)


def power_normalize(code: SLaSTCode, snr: float) -> float:
    """Scale making the dithered codeword energy average T * snr."""
    if not (snr > 0):
        raise ValueError("snr must be positive")
    m2, _, _ = code.second_moment()
    return math.sqrt(code.t * snr / m2)


def decode_lattice(code: SLaSTCode, H, y, u0=None) -> Message:
    return code.decode_lattice(H, y, u0)


def decode_ml(code: SLaSTCode, H, y, u0=None, cap: int = 65536) -> Message:
    return code.decode_ml(H, y, u0, cap)


def dump_codebook(code: SLaSTCode, path: str, cap: int = 65536) -> None:
    """CSV rows `msg_digits, x_coords, energy` for every message."""
    if code.num_messages() > cap:
        raise CodebookTooLarge("codebook has %d entries (cap %d)"
                               % (code.num_messages(), cap))
    D, X = code._codebook_for(code.u0)
    with open(path, "w") as fh:
        fh.write("msg_digits, x_coords, energy\n")
        for j in range(D.shape[1]):
            digits = " ".join(str(int(v)) for v in D[:, j])
            coords = " ".join("%.12g" % v for v in X[:, j])
            fh.write("%s, %s, %.12g\n" % (digits, coords, float(X[:, j] @ X[:, j])))
