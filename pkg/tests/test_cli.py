"""Command line front end: config parsing, subcommands, exit codes."""

import os

import numpy as np
import pytest

from slast.cli import main, parse_config_file
from slast.lattice import catalog, load_lattice


def _write(tmp_path, name, text):
    path = os.path.join(tmp_path, name)
    with open(path, "w") as fh:
        fh.write(text)
    return path


def test_parse_config_file_full(tmp_path):
    path = _write(tmp_path, "sim.cfg", """
# golden code sweep
code = golden
q = 2
l = 1
n_rx = 2
snr_db = 8, 10, 12     # three points
trials = 50
seed = 9
decoder = mmse-gdfe-lattice
dither = on
""")
    cfg = parse_config_file(path)
    assert cfg.code == "golden" and cfg.q == 2 and cfg.l == 1
    assert cfg.snr_db == (8.0, 10.0, 12.0)
    assert cfg.trials == 50 and cfg.seed == 9
    assert cfg.decoder == "mmse-gdfe-lattice" and cfg.dither is True
    cfg.validate()


def test_parse_config_defaults_and_errors(tmp_path):
    cfg = parse_config_file(_write(tmp_path, "empty.cfg", "# nothing\n\n"))
    assert cfg.code == "golden" and cfg.dither is False
    with pytest.raises(ValueError):
        parse_config_file(_write(tmp_path, "bad1.cfg", "code golden\n"))
    with pytest.raises(ValueError):
        parse_config_file(_write(tmp_path, "bad2.cfg", "snr = 10\n"))
    with pytest.raises(ValueError):
        parse_config_file(_write(tmp_path, "bad3.cfg", "dither = yes\n"))


def test_simulate_smoke(tmp_path, capsys):
    cfg = _write(tmp_path, "run.cfg",
                 "code = identity\nq = 2\nsnr_db = 10\ntrials = 20\nseed = 3\n")
    out = os.path.join(tmp_path, "res.csv")
    assert main(["simulate", "--config", cfg, "--out", out]) == 0
    printed = capsys.readouterr().out
    assert "snr_db, bler, ser, trials, stderr" in printed
    with open(out) as fh:
        lines = fh.read().splitlines()
    assert lines[0] == "snr_db, bler, ser, trials, stderr"
    assert len(lines) == 2
    assert os.path.exists(out + ".json")


def test_simulate_invalid_config_exits_2(tmp_path, capsys):
    cfg = _write(tmp_path, "bad.cfg", "code = golden\ntrials = 0\nsnr_db = 10\n")
    assert main(["simulate", "--config", cfg, "--out",
                 os.path.join(tmp_path, "x.csv")]) == 2
    assert "error:" in capsys.readouterr().err
    missing = os.path.join(tmp_path, "nope.cfg")
    assert main(["simulate", "--config", missing]) == 2


def test_lattice_info_and_export(tmp_path, capsys):
    assert main(["lattice", "info", "E8-constructionA"]) == 0
    printed = capsys.readouterr().out
    assert "volume: 16" in printed and "coding_gain: 2" in printed
    path = os.path.join(tmp_path, "e8.lat")
    assert main(["lattice", "export", "E8-constructionA", path]) == 0
    back = load_lattice(path)
    assert np.allclose(back.generator, catalog("E8-constructionA").generator)
    assert main(["lattice", "export", "E8-constructionA"]) == 2  # no path
    assert main(["lattice", "info", "NoSuchLattice"]) == 2


def test_beta_search_command(tmp_path, capsys):
    out = os.path.join(tmp_path, "beta.csv")
    assert main(["beta-search", "--target", "16", "--nu", "1", "--out", out]) == 0
    printed = capsys.readouterr().out
    assert "index: 16" in printed
    with open(out) as fh:
        lines = fh.read().splitlines()
    assert lines[0] == "beta_coords, norm, index, coding_gain"
    assert len(lines) > 1
    assert main(["beta-search", "--target", "3", "--nu", "1"]) == 2
