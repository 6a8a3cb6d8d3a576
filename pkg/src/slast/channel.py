"""Quasi-static Rayleigh MIMO model and the Monte Carlo harness.

The complex channel stays fixed over a codeword; its real expansion acts
on the block-stacked real vectors used by the codecs.  Every trial owns
an independent generator seeded from (seed, snr_index, trial_index), so
results do not depend on execution order or worker count.  Per trial the
draw order is: channel, message, dither (when enabled), noise.
"""

import json
import math
import time
from dataclasses import asdict, dataclass, field
from typing import Sequence, Tuple

import numpy as np

from . import __version__
from .cda import golden_generator, golden_plus_code_lattice
from .codec import SLaSTCode, build_code, power_normalize
from .lattice import catalog
from .reim import split_matrix

_DECODERS = ("ml", "mmse-gdfe-lattice")
_CODES = ("golden", "identity", "golden-plus")
_ML_CAP = 65536


@dataclass(frozen=True, eq=False)
class ChannelRealization:
    """One channel draw: N x M complex matrix plus its real block form."""

    complex_matrix: np.ndarray
    real: np.ndarray


def realize_channel(m: int, n: int, rng, blocks: int = 1) -> ChannelRealization:
    """i.i.d. unit-variance complex Gaussian channel with real expansion."""
    hr = rng.standard_normal((n, m))
    hi = rng.standard_normal((n, m))
    hc = (hr + 1j * hi) * math.sqrt(0.5)
    block = split_matrix(np.kron(np.eye(m), hc))
    real = block if blocks == 1 else np.kron(np.eye(blocks), block)
    return ChannelRealization(complex_matrix=hc, real=real)


def draw_noise(n: int, t: int, rng) -> np.ndarray:
    """Real noise vector for t channel uses; 1/2 variance per dimension."""
    return rng.standard_normal(2 * n * t) * math.sqrt(0.5)


# -- configuration and results --------------------------------------------------

@dataclass
class SimConfig:
    code: str = "golden"
    base_lattice: str = ""
    q: int = 2
    l: int = 1
    n_rx: int = 2
    snr_db: Tuple[float, ...] = ()
    trials: int = 1000
    seed: int = 1
    decoder: str = "ml"
    dither: bool = False

    def validate(self) -> None:
        if self.code not in _CODES:
            raise ValueError("code must be one of %s" % (_CODES,))
        if self.decoder not in _DECODERS:
            raise ValueError("decoder must be one of %s" % (_DECODERS,))
        if self.q < 1:
            raise ValueError("q must be a positive integer")
        if self.l < 1:
            raise ValueError("l must be a positive integer")
        if self.n_rx < 1:
            raise ValueError("n_rx must be a positive integer")
        if len(self.snr_db) == 0:
            raise ValueError("snr_db grid must be nonempty")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")


@dataclass
class SimResult:
    snr_db: Tuple[float, ...]
    bler: Tuple[float, ...]
    ser: Tuple[float, ...]
    trials: Tuple[int, ...]
    stderr: Tuple[float, ...]
    metadata: dict = field(default_factory=dict)

    def save(self, csv_path: str) -> None:
        """CSV table plus a JSON sidecar (csv_path + '.json')."""
        with open(csv_path, "w") as fh:
            fh.write("snr_db, bler, ser, trials, stderr\n")
            for i in range(len(self.snr_db)):
                fh.write("%g, %.8g, %.8g, %d, %.8g\n"
                         % (self.snr_db[i], self.bler[i], self.ser[i],
                            self.trials[i], self.stderr[i]))
        with open(csv_path + ".json", "w") as fh:
            json.dump(self.metadata, fh, indent=2, sort_keys=True)
            fh.write("\n")


def build_sim_code(cfg: SimConfig) -> SLaSTCode:
    """Instantiate the code a config describes (power scale not yet set)."""
    if cfg.code == "golden":
        base = catalog(cfg.base_lattice or "Zn(%d)" % (8 * cfg.l))
        return build_code(golden_generator(), base, cfg.q, cfg.l, name="golden")
    if cfg.code == "identity":
        base = catalog(cfg.base_lattice or "Zn(%d)" % (2 * cfg.l))
        return build_code(None, base, cfg.q, cfg.l, name="identity")
    if cfg.base_lattice:
        raise ValueError("the golden-plus code fixes its own lattice")
    if cfg.l != 1:
        raise ValueError("the golden-plus code does not stack")
    return build_code(None, golden_plus_code_lattice(), cfg.q, 1,
                      name="golden-plus")


def run_montecarlo(cfg: SimConfig) -> SimResult:
    """Block/symbol error rates over the config's SNR grid."""
    cfg.validate()
    code0 = build_sim_code(cfg)
    if cfg.decoder == "ml" and code0.num_messages() > _ML_CAP:
        raise ValueError("ml decoding infeasible: %d codewords"
                         % code0.num_messages())
    t0 = time.time()
    # without random dithering, transmit the origin-centered constellation
    u0_fixed = code0.centering_translate()
    blers, sers, errs = [], [], []
    for si, db in enumerate(cfg.snr_db):
        snr = 10.0 ** (db / 10.0)
        code = code0.with_power(power_normalize(code0, snr))
        nblk = 0
        nsym = 0
        for ti in range(cfg.trials):
            rng = np.random.default_rng([cfg.seed, si, ti])
            ch = realize_channel(code.m, cfg.n_rx, rng, blocks=code.blocks)
            msg = code.random_message(rng)
            u0 = code.draw_dither(rng) if cfg.dither else u0_fixed
            x = code.sphere_encode(msg, u0)
            y = ch.real @ (code.power_scale * x) + draw_noise(cfg.n_rx, code.t, rng)
            if cfg.decoder == "ml":
                dec = code.decode_ml(ch.real, y, u0)
            else:
                dec = code.decode_lattice(ch.real, y, u0)
            if dec != msg:
                nblk += 1
                nsym += sum(a != b for a, b in zip(dec.digits, msg.digits))
        p = nblk / cfg.trials
        blers.append(p)
        sers.append(nsym / (cfg.trials * code.dim))
        errs.append(math.sqrt(p * (1.0 - p) / cfg.trials))
    meta = {
        "config": asdict(cfg),
        "code_dim": code0.dim,
        "rate_bpcu": code0.rate,
        "wall_time_s": round(time.time() - t0, 3),
        "versions": {"numpy": np.__version__, "slast": __version__},
    }
    return SimResult(tuple(cfg.snr_db), tuple(blers), tuple(sers),
                     tuple([cfg.trials] * len(cfg.snr_db)), tuple(errs), meta)


# -- outage -----------------------------------------------------------------------

def _mutual_information_eigs(m: int, n: int, rng, trials: int) -> np.ndarray:
    hr = rng.standard_normal((trials, n, m))
    hi = rng.standard_normal((trials, n, m))
    hc = (hr + 1j * hi) * math.sqrt(0.5)
    gram = hc @ hc.conj().transpose(0, 2, 1)
    return np.maximum(np.linalg.eigvalsh(gram), 0.0)


def outage_probability(m: int, n: int, rate: float, snr: float, trials: int,
                       rng) -> Tuple[float, float]:
    """Probability that the instantaneous mutual information is below rate."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    lam = _mutual_information_eigs(m, n, rng, trials)
    info = np.sum(np.log2(1.0 + (snr / m) * lam), axis=1)
    p = float(np.mean(info < rate))
    return p, math.sqrt(p * (1.0 - p) / trials)


def outage_curve(m: int, n: int, rate: float, snr_list: Sequence[float],
                 trials: int, seed: int):
    """Outage estimates over an SNR grid with shared channel draws.

    Sharing the draws makes the curve monotone nonincreasing in SNR by
    construction; returns a list of (estimate, stderr) pairs.
    """
    lam = _mutual_information_eigs(m, n, np.random.default_rng([seed]), trials)
    out = []
    for snr in snr_list:
        info = np.sum(np.log2(1.0 + (snr / m) * lam), axis=1)
        p = float(np.mean(info < rate))
        out.append((p, math.sqrt(p * (1.0 - p) / trials)))
    return out
