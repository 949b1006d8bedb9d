"""Shared test helpers: Haar sampling and an independent forward-model oracle."""

import numpy as np
import pytest

from photonmesh import Mesh, MeshSettings


def haar_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR of a complex Gaussian with phase-fixed R diagonal."""
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d)).conj()


def naive_transfer(mesh: Mesh, settings: MeshSettings, losses=()) -> np.ndarray:
    """Reference forward model built from explicitly embedded dense factors.

    Independent of the package's event-stream kernels: one embedded matrix
    per crossing, multiplied column by column, with diagonal loss factors at
    their slot boundaries and the output phase layer last.
    """
    n = mesh.n
    u = np.eye(n, dtype=complex)

    def loss_diag(slot):
        d = np.eye(n, dtype=complex)
        for seg, eta in losses:
            if seg.slot == slot:
                d[seg.mode - 1, seg.mode - 1] *= eta
        return d

    u = loss_diag(0) @ u
    for c in range(1, mesh.d + 1):
        col = np.eye(n, dtype=complex)
        for x in mesh.column(c):
            theta, phi = settings.get(x)
            block = np.array(
                [
                    [np.exp(1j * phi) * np.cos(theta), -np.sin(theta)],
                    [np.exp(1j * phi) * np.sin(theta), np.cos(theta)],
                ]
            )
            emb = np.eye(n, dtype=complex)
            p = x.lower_mode - 1
            emb[p : p + 2, p : p + 2] = block
            col = emb @ col
        u = loss_diag(c) @ col @ u
    return np.diag(np.exp(1j * settings.output_phases)) @ u


def random_settings(mesh: Mesh, rng: np.random.Generator) -> MeshSettings:
    k = len(mesh.crossings)
    return MeshSettings(
        mesh,
        rng.uniform(0.0, np.pi / 2, k),
        rng.uniform(0.0, 2 * np.pi, k),
        rng.uniform(0.0, 2 * np.pi, mesh.n),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)
