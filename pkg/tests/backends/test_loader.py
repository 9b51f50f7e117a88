"""Tests for backend descriptor loading."""

import json

import pytest

from qlattice.backends import (
    BackendConfigError,
    DualGroupRep,
    FiniteGroupRep,
    SpanQRep,
    backend_from_dict,
    load_backend,
)
from qlattice.words import Word


class TestShippedBackends:
    """The descriptors under data/backends."""

    @pytest.mark.parametrize("name,kind,n", [
        ("s3", FiniteGroupRep, 2),
        ("z2_dual", DualGroupRep, 2),
        ("f2_dual", DualGroupRep, 2),
        ("span_q_1", SpanQRep, 2),
        ("span_q_1_2", SpanQRep, 2),
    ])
    def test_load(self, data_dir, name, kind, n):
        backend = load_backend(data_dir / f"{name}.json")
        assert isinstance(backend, kind)
        assert backend.n == n

    def test_s3_file_matches_builtin(self, data_dir, s3):
        loaded = load_backend(data_dir / "s3.json")
        for text in ("ab", "abab", "aaa", "ababab"):
            assert loaded.moment(Word.parse(text)) == s3.moment(Word.parse(text))

    def test_span_q_dimension(self, data_dir):
        backend = load_backend(data_dir / "span_q_1_2.json")
        assert backend.duality.d ** 2 == pytest.approx(4.5554, abs=1e-3)


class TestLoadErrors:
    """Malformed descriptors raise BackendConfigError."""

    def test_malformed_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        with pytest.raises(BackendConfigError, match="Failed to parse"):
            load_backend(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(BackendConfigError, match="Failed to read"):
            load_backend(tmp_path / "missing.json")

    def test_unknown_type(self):
        with pytest.raises(BackendConfigError, match="Unknown or missing backend type"):
            backend_from_dict({"type": "hopf"})

    def test_missing_field(self):
        with pytest.raises(BackendConfigError, match="missing field"):
            backend_from_dict({"type": "dual_group", "group": {"kind": "free", "rank": 2}})

    def test_not_an_object(self):
        with pytest.raises(BackendConfigError, match="must be an object"):
            backend_from_dict([1, 2])

    def test_invalid_q(self):
        with pytest.raises(BackendConfigError, match="Invalid span_q"):
            backend_from_dict({"type": "span_q", "q_diag": [1.0, -1.0]})


class TestDescriptors:
    """Descriptor variants."""

    def test_label_defaults_to_file_stem(self, tmp_path):
        path = tmp_path / "circle.json"
        path.write_text(json.dumps({
            "type": "dual_group",
            "group": {"kind": "free_abelian", "rank": 1},
            "generators": [[1]],
        }))
        assert load_backend(path).label == "circle"

    def test_span_q_from_F(self):
        backend = backend_from_dict({"type": "span_q", "F": [[0, 1], [-1, 0]]})
        assert backend.qdata.is_identity()

    def test_dict_source(self):
        backend = load_backend({"type": "span_q", "q_diag": [1.0, 1.0], "label": "o2"})
        assert backend.label == "o2"
