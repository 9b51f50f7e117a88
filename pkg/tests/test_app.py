"""Tests for the command-line entry point."""

import json

import pytest

from qlattice.app import build_parser, config_from_args, main


def test_parser_requires_command():
    with pytest.raises(SystemExit):
        build_parser().parse_args([])


def test_config_from_args(data_dir):
    args = build_parser().parse_args([
        "tilde", "--spec", str(data_dir / "z2_dual.json"), "--max-len", "4", "--method", "oracle",
        "--seed", "3", "--threads", "2",
    ])
    cfg = config_from_args(args)
    assert cfg.command == "tilde"
    assert cfg.backend_path == data_dir / "z2_dual.json"
    assert cfg.max_len == 4
    assert cfg.method == "oracle"
    assert cfg.seed == 3
    assert cfg.threads == 2
    assert cfg.bound is None
    assert cfg.k_max == 12


def test_amenability_flags(data_dir):
    args = build_parser().parse_args([
        "amenability", "--spec", str(data_dir / "f2_dual.json"), "--test", "lattice",
        "--kmax", "10", "--margin", "0.05", "--strict",
    ])
    cfg = config_from_args(args)
    assert cfg.test == "lattice"
    assert cfg.k_max == 10
    assert cfg.margin == 0.05
    assert cfg.strict is True


def test_main_writes_report(data_dir, tmp_path):
    out = tmp_path / "moments.json"
    code = main(["moments", "--spec", str(data_dir / "f2_dual.json"), "--max-len", "4", "--out", str(out)])
    assert code == 0
    report = json.loads(out.read_text())
    assert report["moments"]["entries"]["abba"] == 4


def test_main_stdout(data_dir, capsys):
    code = main(["moments", "--spec", str(data_dir / "s3.json"), "--max-len", "2"])
    assert code == 0
    report = json.loads(capsys.readouterr().out)
    assert report["moments"]["entries"]["ab"] == 1


@pytest.mark.parametrize("argv", [
    [],
    ["moments"],
    ["tilde", "--spec", "x.json", "--method", "guess"],
    ["lattice", "--spec", "x.json", "--format", "svg"],
])
def test_main_usage_errors(argv):
    assert main(argv) == 2


def test_main_help():
    assert main(["--help"]) == 0


def test_main_invalid_config(data_dir):
    assert main(["moments", "--spec", str(data_dir / "s3.json"), "--max-len", "11"]) == 2


def test_main_strict_inconclusive(data_dir, tmp_path):
    argv = ["amenability", "--spec", str(data_dir / "z2_dual.json"), "--kmax", "4", "--strict",
            "--out", str(tmp_path / "out.json")]
    assert main(argv) == 3
