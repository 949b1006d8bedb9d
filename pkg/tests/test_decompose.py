import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from photonmesh import (
    Crossing,
    MeshLayout,
    MeshSettings,
    NonUnitaryError,
    Segment,
    SegmentLoss,
    SettingsError,
    build_mesh,
    clements_decompose,
    crossing_matrix,
    reconstruct,
    solve_reflected,
    transfer,
)
from photonmesh.decompose import asap_schedule, embed_crossing
from photonmesh.mesh import reflected_template_crossings

from conftest import haar_unitary, naive_transfer, random_settings


class TestCrossingMatrix:
    def test_bar_state_is_identity(self):
        assert np.allclose(crossing_matrix(0.0, 0.0), np.eye(2))

    def test_cross_state(self):
        expected = np.array([[0.0, -1.0], [1.0, 0.0]])
        assert np.max(np.abs(crossing_matrix(np.pi / 2, 0.0) - expected)) < 1e-15

    @given(st.floats(0, np.pi / 2), st.floats(0, 2 * np.pi))
    def test_always_unitary(self, theta, phi):
        t = crossing_matrix(theta, phi)
        assert np.max(np.abs(t.conj().T @ t - np.eye(2))) < 1e-12


class TestClementsDecompose:
    def test_identity_gives_all_bar(self):
        s = clements_decompose(np.eye(4))
        assert np.all(s.thetas == 0.0)
        assert np.all(s.phis == 0.0)
        assert np.all(s.output_phases == 0.0)

    def test_two_mode_cross(self):
        s = clements_decompose(np.array([[0.0, -1.0], [1.0, 0.0]], dtype=complex))
        theta, phi = s.get(Crossing(1, 1))
        assert theta == pytest.approx(np.pi / 2)
        assert phi == pytest.approx(0.0)
        assert np.all(s.output_phases == 0.0)

    def test_haar_roundtrip_against_naive_product(self, rng):
        u = haar_unitary(8, rng)
        s = clements_decompose(u)
        mesh = build_mesh(MeshLayout.rectangular(8))
        assert np.max(np.abs(naive_transfer(mesh, s) - u)) < 1e-10
        assert np.max(np.abs(reconstruct(mesh, s) - u)) < 1e-10

    @pytest.mark.parametrize("n", [2, 3, 5, 7, 12, 17, 24, 32])
    def test_roundtrip_sizes(self, n, rng):
        u = haar_unitary(n, rng)
        s = clements_decompose(u)
        mesh = build_mesh(MeshLayout.rectangular(n))
        assert np.max(np.abs(reconstruct(mesh, s) - u)) < 1e-10

    def test_angle_ranges(self, rng):
        s = clements_decompose(haar_unitary(9, rng))
        assert np.all((s.thetas >= 0) & (s.thetas <= np.pi / 2 + 1e-12))
        assert np.all((s.phis >= 0) & (s.phis < 2 * np.pi))

    def test_rejects_non_unitary(self):
        with pytest.raises(NonUnitaryError):
            clements_decompose(np.ones((3, 3)))

    def test_rejects_dimension_mismatch(self, rng):
        with pytest.raises(SettingsError):
            clements_decompose(haar_unitary(4, rng), n=5)


class TestReconstruct:
    def test_all_bar_gives_diagonal_phases(self, rng):
        mesh = build_mesh(MeshLayout.rectangular(5))
        s = MeshSettings.bar_state(mesh)
        s.output_phases = rng.uniform(0, 2 * np.pi, 5)
        u = reconstruct(mesh, s)
        assert np.max(np.abs(u - np.diag(np.exp(1j * s.output_phases)))) < 1e-12

    def test_single_cross(self):
        mesh = build_mesh(MeshLayout.rectangular(2))
        s = MeshSettings.bar_state(mesh)
        s.set(Crossing(1, 1), np.pi / 2, 0.0)
        assert np.max(np.abs(reconstruct(mesh, s) - np.array([[0, -1], [1, 0]]))) < 1e-15

    def test_lossy_bar_path_scales_entry(self):
        # hand product: bar mesh, amplitude transmissivity 0.5 on segment (1, 1)
        mesh = build_mesh(MeshLayout.rectangular(2))
        s = MeshSettings.bar_state(mesh)
        u = reconstruct(mesh, s, [SegmentLoss(Segment(1, 1), 0.5)])
        assert np.max(np.abs(u - np.diag([0.5, 1.0]))) < 1e-15

    def test_matches_naive_product_with_losses(self, rng):
        mesh = build_mesh(MeshLayout.rectangular(6))
        s = random_settings(mesh, rng)
        losses = [(Segment(3, 2), 0.7), (Segment(6, 0), 0.4), (Segment(1, 6), 0.9)]
        u = transfer(mesh, s, [SegmentLoss(seg, eta) for seg, eta in losses])
        assert np.max(np.abs(u - naive_transfer(mesh, s, losses))) < 1e-12

    def test_unitary_for_arbitrary_settings(self, rng):
        mesh = build_mesh(MeshLayout.shallow(9, 4))
        u = reconstruct(mesh, random_settings(mesh, rng))
        assert np.max(np.abs(u.conj().T @ u - np.eye(9))) < 1e-10

    def test_loss_cannot_increase_singular_values(self, rng):
        mesh = build_mesh(MeshLayout.rectangular(6))
        s = random_settings(mesh, rng)
        base = np.linalg.svd(reconstruct(mesh, s), compute_uv=False)
        lossy = reconstruct(mesh, s, [SegmentLoss(Segment(4, 3), 0.6)])
        assert np.all(np.linalg.svd(lossy, compute_uv=False) <= base.max() + 1e-10)
        assert np.all(np.linalg.svd(lossy, compute_uv=False) <= 1 + 1e-10)


class TestReflectedSolve:
    @pytest.mark.parametrize("n", [3, 4, 5, 6, 9, 10])
    def test_exact_and_anti_parity(self, n, rng):
        u = haar_unitary(n, rng)
        ops, out_phases = solve_reflected(u)
        v = np.eye(n, dtype=complex)
        for p, theta, phi in ops:
            v = embed_crossing(n, p, theta, phi) @ v
        v = np.diag(np.exp(1j * out_phases)) @ v
        assert np.max(np.abs(v - u)) < 1e-10
        cols = asap_schedule([p for p, _, _ in ops])
        scheduled = {(c, p) for c, (p, _, _) in zip(cols, ops)}
        assert scheduled == reflected_template_crossings(MeshLayout.rectangular(n))


class TestScheduler:
    def test_full_mesh_application_order_reproduces_columns(self):
        mesh = build_mesh(MeshLayout.rectangular(7))
        ordered = sorted(mesh.crossings)
        scheduled = asap_schedule([x.lower_mode for x in ordered])
        assert scheduled == [x.column for x in ordered]

    def test_disjoint_ops_share_a_column(self):
        assert asap_schedule([1, 3, 5]) == [1, 1, 1]
        assert asap_schedule([1, 2, 1]) == [1, 2, 3]
