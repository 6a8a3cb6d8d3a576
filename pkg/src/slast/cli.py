"""Command line front end: simulations, lattice inspection, beta search.

Config files for `simulate` are line-oriented `key = value` text; `#`
starts a comment.  Keys mirror SimConfig: code, base_lattice, q, l,
n_rx, snr_db (comma separated dB list), trials, seed, decoder
(ml | mmse-gdfe-lattice), dither (on | off).
"""

import argparse
import sys

import numpy as np

from .cda import beta_search, golden_plus_order, order_index
from .channel import SimConfig, run_montecarlo
from .lattice import catalog, save_lattice


def parse_config_file(path: str) -> SimConfig:
    text = {}
    with open(path) as fh:
        for ln, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError("%s:%d: expected key = value" % (path, ln))
            key, val = (tok.strip() for tok in line.split("=", 1))
            text[key] = val
    cfg = SimConfig()
    for key, val in text.items():
        if key in ("code", "base_lattice", "decoder"):
            setattr(cfg, key, val)
        elif key in ("q", "l", "n_rx", "trials", "seed"):
            setattr(cfg, key, int(val))
        elif key == "snr_db":
            cfg.snr_db = tuple(float(tok) for tok in val.split(","))
        elif key == "dither":
            if val not in ("on", "off"):
                raise ValueError("dither must be on or off")
            cfg.dither = val == "on"
        else:
            raise ValueError("unknown config key %r" % key)
    return cfg


def _cmd_simulate(args) -> int:
    cfg = parse_config_file(args.config)
    cfg.validate()
    result = run_montecarlo(cfg)
    result.save(args.out)
    print("snr_db, bler, ser, trials, stderr")
    for i in range(len(result.snr_db)):
        print("%g, %.8g, %.8g, %d, %.8g"
              % (result.snr_db[i], result.bler[i], result.ser[i],
                 result.trials[i], result.stderr[i]))
    print("wrote %s and %s.json" % (args.out, args.out))
    return 0


def _cmd_lattice(args) -> int:
    lat = catalog(args.name)
    print("name: %s" % lat.name)
    print("dim: %d" % lat.dim)
    print("volume: %.12g" % lat.volume)
    print("d_min: %.12g" % lat.min_dist)
    print("coding_gain: %.12g" % lat.coding_gain)
    if args.action == "export":
        save_lattice(lat, args.file)
        print("wrote %s" % args.file)
    return 0


def _cmd_beta_search(args) -> int:
    order = golden_plus_order()
    beta = beta_search(order, args.target, args.nu, csv_path=args.out)
    coords = order.to_coords(beta)
    lat = order.lattice(left=beta)
    print("beta coords: %s" % ", ".join(repr(c) for c in coords))
    print("reduced norm: %r" % beta.reduced_norm())
    print("index: %d" % order_index(order, beta))
    print("coding_gain: %.12g" % lat.coding_gain)
    if args.out:
        print("wrote %s" % args.out)
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="slast",
        description="lattice coset space-time codes: simulate, inspect, search")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a Monte Carlo error-rate sweep")
    sim.add_argument("--config", required=True, help="key = value config file")
    sim.add_argument("--out", default="results.csv", help="output CSV path")

    lat = sub.add_parser("lattice", help="inspect or export a catalog lattice")
    lat.add_argument("action", choices=("info", "export"))
    lat.add_argument("name", help="catalog name, e.g. Zn(8) or Leech24")
    lat.add_argument("file", nargs="?", help="output path for export")

    bs = sub.add_parser("beta-search",
                        help="search the maximal order for an index-matching element")
    bs.add_argument("--target", type=int, required=True, help="target index")
    bs.add_argument("--nu", type=int, default=2, help="coordinate box half width")
    bs.add_argument("--out", default="", help="CSV log of surviving candidates")

    args = parser.parse_args(argv)
    try:
        if args.command == "simulate":
            return _cmd_simulate(args)
        if args.command == "lattice":
            if args.action == "export" and not args.file:
                raise ValueError("export needs an output path")
            return _cmd_lattice(args)
        if args.command == "beta-search":
            if args.out == "":
                args.out = None
            return _cmd_beta_search(args)
        raise ValueError("unknown command %r" % args.command)
    except (ValueError, OSError, RuntimeError, np.linalg.LinAlgError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
