import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from photonmesh import (
    Crossing,
    DeadPhaseShifter,
    MeshLayout,
    RangeLimitedCrossing,
    Segment,
    SegmentLoss,
    SerializationError,
    StuckCrossing,
    build_mesh,
    parse_mesh,
    plan_single,
    serialize_mesh,
)
from photonmesh.interchange import read_matrix, write_matrix

from conftest import haar_unitary, random_settings


def all_defect_kinds():
    return [
        SegmentLoss(Segment(3, 2), 0.5),
        StuckCrossing(Crossing(2, 2), 0.3, 1.2),
        RangeLimitedCrossing(Crossing(1, 3), 0.1, 1.4),
        DeadPhaseShifter.at_crossing(Crossing(3, 1), 0.7),
        DeadPhaseShifter.at_output(4, 2.2),
    ]


class TestRoundtrip:
    def test_settings_roundtrip(self, rng):
        mesh = build_mesh(MeshLayout.rectangular(6))
        settings_in = random_settings(mesh, rng)
        doc = parse_mesh(serialize_mesh(mesh, settings_in))
        assert doc.mesh == mesh
        assert np.allclose(doc.settings.thetas, settings_in.thetas)
        assert np.allclose(doc.settings.phis, settings_in.phis)
        assert np.allclose(doc.settings.output_phases, settings_in.output_phases)
        assert doc.warnings == []

    def test_defects_roundtrip(self, rng):
        mesh = build_mesh(MeshLayout.rectangular(6))
        defects = all_defect_kinds()
        doc = parse_mesh(serialize_mesh(mesh, defects=defects))
        assert list(doc.defects) == defects

    def test_plan_and_target_roundtrip(self, rng):
        mesh = build_mesh(MeshLayout.rectangular(6))
        plan = plan_single(mesh, Segment(3, 2))
        target = haar_unitary(5, rng)
        doc = parse_mesh(serialize_mesh(mesh, plan=plan, target=target))
        assert doc.plan == plan
        assert np.max(np.abs(doc.target - target)) < 1e-15

    def test_shallow_layout_roundtrip(self, rng):
        mesh = build_mesh(MeshLayout.shallow(9, 3))
        doc = parse_mesh(serialize_mesh(mesh, random_settings(mesh, rng)))
        assert doc.mesh.layout == MeshLayout.shallow(9, 3)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(2, 9), st.integers(0, 2**32 - 1))
    def test_random_documents(self, n, seed):
        local = np.random.default_rng(seed)
        mesh = build_mesh(MeshLayout.rectangular(n))
        s = random_settings(mesh, local)
        doc = parse_mesh(serialize_mesh(mesh, s))
        assert np.allclose(doc.settings.thetas, s.thetas)
        assert np.allclose(doc.settings.output_phases, s.output_phases)


class TestParsingErrors:
    def test_parity_violation(self):
        raw = json.loads(serialize_mesh(build_mesh(MeshLayout.rectangular(4))))
        raw["crossings"][0]["c"], raw["crossings"][0]["m"] = 2, 1
        with pytest.raises(SerializationError, match="parity"):
            parse_mesh(raw)

    def test_unknown_layout_kind(self):
        with pytest.raises(Exception):
            parse_mesh({"layout": {"kind": "triangular", "n": 4, "d": 4}})

    def test_duplicate_crossing(self):
        raw = json.loads(serialize_mesh(build_mesh(MeshLayout.rectangular(4))))
        raw["crossings"].append(dict(raw["crossings"][0]))
        with pytest.raises(SerializationError, match="duplicate"):
            parse_mesh(raw)

    def test_invalid_json(self):
        with pytest.raises(SerializationError):
            parse_mesh("{not json")

    def test_wrong_output_phase_length(self):
        raw = json.loads(serialize_mesh(build_mesh(MeshLayout.rectangular(4))))
        raw["output_phases"] = [0.0, 0.0]
        with pytest.raises(SerializationError):
            parse_mesh(raw)


class TestDefaults:
    def test_missing_output_phases_warns(self):
        raw = json.loads(serialize_mesh(build_mesh(MeshLayout.rectangular(4))))
        del raw["output_phases"]
        doc = parse_mesh(raw)
        assert np.all(doc.settings.output_phases == 0.0)
        assert any("output_phases" in w for w in doc.warnings)

    def test_missing_crossings_default_to_bar(self):
        raw = json.loads(serialize_mesh(build_mesh(MeshLayout.rectangular(4))))
        raw["crossings"] = raw["crossings"][:2]
        doc = parse_mesh(raw)
        assert any("missing" in w for w in doc.warnings)
        assert np.all(doc.settings.thetas[2:] == 0.0)


class TestMatrixFiles:
    @pytest.mark.parametrize("suffix", [".json", ".csv"])
    def test_roundtrip(self, tmp_path, suffix, rng):
        u = haar_unitary(5, rng)
        path = tmp_path / f"matrix{suffix}"
        write_matrix(str(path), u)
        assert np.max(np.abs(read_matrix(str(path)) - u)) < 1e-15

    def test_bare_nested_list(self, tmp_path):
        path = tmp_path / "bare.json"
        path.write_text(json.dumps([[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]]))
        assert np.allclose(read_matrix(str(path)), np.eye(2))

    def test_malformed_csv(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("1.0,2.0,3.0\n")
        with pytest.raises(SerializationError):
            read_matrix(str(path))
