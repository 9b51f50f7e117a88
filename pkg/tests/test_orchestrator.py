"""End-to-end tests of the command runners on the bundled backend files."""

import json
from unittest.mock import patch

import pytest

from qlattice.bratteli import BratteliError
from qlattice.config import RunConfig
from qlattice.orchestrator import EXIT_FAILED, EXIT_INCONCLUSIVE, EXIT_OK, EXIT_USAGE, run, write_report


def _config(data_dir, name, tmp_path, **overrides) -> RunConfig:
    values = {"backend_path": data_dir / name, "output_path": tmp_path / "report.json", "threads": 1}
    values.update(overrides)
    return RunConfig(**values)


def _report(tmp_path) -> dict:
    return json.loads((tmp_path / "report.json").read_text())


class TestLattice:
    """The lattice command."""

    async def test_span_q_lattice(self, data_dir, tmp_path):
        cfg = _config(data_dir, "span_q_1.json", tmp_path, command="lattice", bound=4)
        assert await run(cfg) == EXIT_OK

        report = _report(tmp_path)
        assert [report["dims"][f"0,{j}"] for j in range(5)] == [1, 1, 2, 5, 14]
        assert report["passed"] is True
        assert report["axioms"]["passed"] is True
        assert report["index"] == pytest.approx(4.0)
        assert report["index_is_square"] is True
        assert report["bratteli"]["cells"]["0,4"]["dims"] == [1, 2, 3]

    async def test_s3_index(self, data_dir, tmp_path):
        cfg = _config(data_dir, "s3.json", tmp_path, command="lattice", bound=3)
        assert await run(cfg) == EXIT_OK
        report = _report(tmp_path)
        assert report["index"] == pytest.approx(4.0)
        assert report["dims"]["0,3"] == 11

    async def test_dot_output(self, data_dir, tmp_path):
        out = tmp_path / "row0.dot"
        cfg = _config(data_dir, "span_q_1.json", tmp_path, command="lattice", bound=3,
                      format="dot", output_path=out)
        assert await run(cfg) == EXIT_OK
        assert out.read_text().startswith("digraph bratteli_row_0 {")

    async def test_dot_falls_back_to_json(self, data_dir, tmp_path, caplog):
        out = tmp_path / "row0.dot"
        cfg = _config(data_dir, "span_q_1.json", tmp_path, command="lattice", bound=3,
                      format="dot", output_path=out)
        with patch("qlattice.orchestrator.bratteli", side_effect=BratteliError("no cells")):
            assert await run(cfg) == EXIT_FAILED
        report = json.loads(out.read_text())
        assert report["passed"] is False
        assert "No Bratteli data" in caplog.text

    async def test_default_bound_accepted(self, data_dir, tmp_path):
        cfg = _config(data_dir, "s3.json", tmp_path, command="lattice", bound=5)
        assert await run(cfg) == EXIT_OK
        report = _report(tmp_path)
        assert report["dims"]["0,5"] == 171
        assert report["bratteli"]["cells"]["0,5"]["dims"] == [5, 5, 11]

    async def test_bound_too_large(self, data_dir, tmp_path):
        cfg = _config(data_dir, "s3.json", tmp_path, command="lattice", bound=6)
        assert await run(cfg) == EXIT_USAGE
        assert not (tmp_path / "report.json").exists()

    async def test_deterministic(self, data_dir, tmp_path):
        first, second = tmp_path / "a", tmp_path / "b"
        for out, threads in ((first, 1), (second, 4)):
            cfg = _config(data_dir, "span_q_1_2.json", out, command="lattice", bound=3, threads=threads)
            assert await run(cfg) == EXIT_OK
        assert (first / "report.json").read_text() == (second / "report.json").read_text()


class TestMoments:
    """The moments command."""

    async def test_z2_moments(self, data_dir, tmp_path):
        cfg = _config(data_dir, "z2_dual.json", tmp_path, command="moments", max_len=4)
        assert await run(cfg) == EXIT_OK

        report = _report(tmp_path)
        entries = report["moments"]["entries"]
        assert report["label"] == "Z2-dual"
        assert entries[""] == 1
        assert entries["ab"] == 2
        assert entries["aa"] == 0
        assert entries["abab"] == 6

    async def test_malformed_backend(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        cfg = RunConfig(command="moments", backend_path=bad, output_path=tmp_path / "report.json", threads=1)
        assert await run(cfg) == EXIT_USAGE

    async def test_missing_backend(self, tmp_path):
        cfg = RunConfig(command="moments", backend_path=tmp_path / "nope.json", threads=1)
        assert await run(cfg) == EXIT_USAGE


class TestTilde:
    """The tilde command."""

    async def test_all_methods_agree(self, data_dir, tmp_path):
        cfg = _config(data_dir, "z2_dual.json", tmp_path, command="tilde", max_len=4, method="all")
        assert await run(cfg) == EXIT_OK

        report = _report(tmp_path)
        assert report["methods"] == ["cumulant", "oracle", "closure"]
        assert report["agreement"] is True
        assert report["first_difference"] is None
        assert report["alternating_mismatches"] == []
        assert report["tables"]["cumulant"]["entries"]["aabb"] == 4

    async def test_all_skips_oracle_for_span_q(self, data_dir, tmp_path):
        cfg = _config(data_dir, "span_q_1_2.json", tmp_path, command="tilde", max_len=4, method="all")
        assert await run(cfg) == EXIT_OK
        assert _report(tmp_path)["methods"] == ["cumulant", "closure"]

    async def test_oracle_needs_group_dual(self, data_dir, tmp_path):
        cfg = _config(data_dir, "span_q_1.json", tmp_path, command="tilde", max_len=4, method="oracle")
        assert await run(cfg) == EXIT_USAGE

    async def test_cumulant_only(self, data_dir, tmp_path):
        cfg = _config(data_dir, "f2_dual.json", tmp_path, command="tilde", max_len=6, method="cumulant")
        assert await run(cfg) == EXIT_OK
        assert _report(tmp_path)["tables"]["cumulant"]["entries"]["aabb"] == 4


class TestAmenability:
    """The amenability command."""

    @pytest.mark.parametrize("name, verdict", [
        ("z2_dual.json", "amenable"),
        ("f2_dual.json", "non_amenable"),
        ("s3.json", "amenable"),
    ])
    async def test_kesten(self, data_dir, tmp_path, name, verdict):
        cfg = _config(data_dir, name, tmp_path, command="amenability", test="kesten")
        assert await run(cfg) == EXIT_OK
        report = _report(tmp_path)
        assert report["verdict"] == verdict
        assert report["test"] == "kesten"

    async def test_lattice_test(self, data_dir, tmp_path):
        cfg = _config(data_dir, "span_q_1_2.json", tmp_path, command="amenability", test="lattice")
        assert await run(cfg) == EXIT_OK
        report = _report(tmp_path)
        assert report["verdict"] == "non_amenable"
        assert report["index_is_square"] is False

    async def test_strict_inconclusive(self, data_dir, tmp_path):
        cfg = _config(data_dir, "z2_dual.json", tmp_path, command="amenability", k_max=4, strict=True)
        assert await run(cfg) == EXIT_INCONCLUSIVE
        assert _report(tmp_path)["verdict"] == "inconclusive"

    async def test_inconclusive_without_strict(self, data_dir, tmp_path):
        cfg = _config(data_dir, "z2_dual.json", tmp_path, command="amenability", k_max=4)
        assert await run(cfg) == EXIT_OK


def test_write_report_to_stdout(capsys):
    write_report("hello\n", None)
    assert capsys.readouterr().out == "hello\n"


def test_write_report_creates_parents(tmp_path):
    out = tmp_path / "nested" / "dir" / "report.txt"
    write_report("x", out)
    assert out.read_text() == "x"


def test_exit_codes_are_distinct():
    assert len({EXIT_OK, EXIT_FAILED, EXIT_USAGE, EXIT_INCONCLUSIVE}) == 4
