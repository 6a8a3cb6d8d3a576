"""Lattice coset space-time codes: constructions, shaping, decoding, and a
Monte Carlo fading-channel harness."""

__version__ = "0.1.0"

from .lattice import Lattice, catalog, catalog_names  # noqa: F401
from .codec import build_code, sphere_encode, power_normalize  # noqa: F401
from .channel import SimConfig, run_montecarlo, outage_probability  # noqa: F401
