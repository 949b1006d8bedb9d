"""Unitary <-> mesh-settings conversion for rectangular meshes.

The crossing convention is

    T(theta, phi) = [[exp(i*phi)*cos(theta), -sin(theta)],
                     [exp(i*phi)*sin(theta),  cos(theta)]]

with matrix index 0 on the crossing's lower mode, theta in [0, pi/2] and phi
in [0, 2*pi).  A full mesh realizes

    U = diag(exp(i*output_phases)) * M_d * ... * M_2 * M_1

where M_c is the product of the (commuting) crossing matrices in column c.

``clements_decompose`` factors a unitary into this form by alternately
nulling anti-diagonals of the lower triangle with right-multiplications by
T^dagger (peeling crossings off the input side) and left-multiplications by
T (output side), then commuting the leftover left factors through the final
diagonal.  ``solve_reflected`` produces settings for the left-right mirrored
(anti-parity) crossing pattern, which arises when a routing plan reflects
the surviving structure.
"""

from __future__ import annotations

import numpy as np

from . import _kernels as kernels
from .exceptions import EmbedStructureError, NonUnitaryError, SettingsError
from .mesh import Crossing, Mesh, MeshLayout, MeshSettings, build_mesh, template_crossings

TWO_PI = 2.0 * np.pi
_NULL_TOL = 1e-14


def crossing_matrix(theta: float, phi: float) -> np.ndarray:
    """2x2 transfer matrix of one crossing; row/column 0 is the lower mode."""
    c = np.cos(theta)
    s = np.sin(theta)
    e = np.exp(1j * phi)
    return np.array([[e * c, -s], [e * s, c]])


def embed_crossing(n: int, lower_mode: int, theta: float, phi: float) -> np.ndarray:
    """Crossing matrix embedded in an n-mode identity (1-based lower mode)."""
    u = np.eye(n, dtype=complex)
    p = lower_mode - 1
    u[p : p + 2, p : p + 2] = crossing_matrix(theta, phi)
    return u


def unitarity_defect(u: np.ndarray) -> float:
    u = np.asarray(u)
    return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))


def require_unitary(u: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise NonUnitaryError(f"expected a square matrix, got shape {u.shape}")
    defect = unitarity_defect(u)
    if defect > tol:
        raise NonUnitaryError(f"matrix is not unitary: max |U^dag U - I| = {defect:.3e}")
    return u


def _null_steps(u: np.ndarray):
    """Null the lower triangle of ``u`` in place.

    Returns (right_ops, left_ops, diagonal); ops are (pair, theta, phi) with
    1-based pair index, each list in application order.  Anti-diagonal i
    (counted from the bottom-left corner) is cleared with right-multiplications
    by T^dagger when i is odd and left-multiplications by T when i is even.
    """
    n = u.shape[0]
    right_ops = []
    left_ops = []
    for i in range(1, n):
        if i % 2 == 1:
            for j in range(i):
                r, c = n - j, i - j  # element (r, c), 1-based
                x = u[r - 1, c - 1]
                y = u[r - 1, c]
                if abs(x) < _NULL_TOL:
                    theta, phi = 0.0, 0.0
                else:
                    theta = np.arctan2(abs(x), abs(y))
                    phi = float(np.angle(x) - np.angle(y)) % TWO_PI
                kernels.right_rotate_dagger(u, c - 1, theta, phi)
                right_ops.append((c, theta, phi))
        else:
            for j in range(1, i + 1):
                r, c = n + j - i, j
                p = r - 1  # rows (p, p+1) mix; the lower row r is nulled
                x = u[r - 1, c - 1]
                y = u[r - 2, c - 1]
                if abs(x) < _NULL_TOL:
                    theta, phi = 0.0, 0.0
                else:
                    theta = np.arctan2(abs(x), abs(y))
                    phi = float(np.pi + np.angle(x) - np.angle(y)) % TWO_PI
                kernels.left_rotate(u, p - 1, theta, phi)
                left_ops.append((p, theta, phi))
    return right_ops, left_ops, np.diag(u).copy()


def _assemble(right_ops, left_ops, diag):
    """Commute the left factors through the diagonal.

    From T_lK..T_l1 U T_r1^dag..T_rQ^dag = D it follows that
    U = T_l1^dag..T_lK^dag D T_rQ..T_r1.  Each dagger adjacent to D obeys
    T(theta, phi)^dag diag(a, b) = diag(-exp(-i*phi)*b, b) T(theta, arg(-a/b)),
    which moves it to the other side with the same theta.  The returned op
    list is in application order (input side first).
    """
    d = np.asarray(diag, dtype=complex).copy()
    converted = []
    for p, theta, phi in reversed(left_ops):
        a = d[p - 1]
        b = d[p]
        if np.sin(theta) < _NULL_TOL:
            # Bar-like factor is itself diagonal; absorb the phase directly so
            # that identity-like inputs keep all-zero settings.
            d[p - 1] = np.exp(-1j * phi) * a
            converted.append((p, theta, 0.0))
        else:
            phi_new = float(np.angle(-a / b)) % TWO_PI
            d[p - 1] = -np.exp(-1j * phi) * b
            converted.append((p, theta, phi_new))
    return list(right_ops) + converted, d


def asap_schedule(pairs) -> list[int]:
    """Greedy column assignment for an application-ordered list of mode pairs.

    Each op lands in the earliest column after every earlier op sharing one of
    its two modes; only commuting ops are ever reordered, so the scheduled
    product is unchanged.
    """
    last: dict[int, int] = {}
    columns = []
    for p in pairs:
        col = max(last.get(p, 0), last.get(p + 1, 0)) + 1
        last[p] = col
        last[p + 1] = col
        columns.append(col)
    return columns


def _ops_to_settings(mesh: Mesh, ops, diag) -> MeshSettings:
    columns = asap_schedule([p for p, _, _ in ops])
    placed = {}
    for col, (p, theta, phi) in zip(columns, ops):
        placed[Crossing(col, p)] = (theta, phi)
    if set(placed) != set(mesh.crossings):
        raise EmbedStructureError(
            "scheduled factor pattern does not match the mesh crossing set"
        )
    settings = MeshSettings.bar_state(mesh)
    for crossing, (theta, phi) in placed.items():
        settings.set(crossing, theta, phi)
    mags = np.abs(diag)
    if np.max(np.abs(mags - 1.0)) > 1e-8:
        raise NonUnitaryError("residual diagonal is not unit modulus")
    settings.output_phases = np.angle(diag) % TWO_PI
    return settings


def clements_decompose(u: np.ndarray, n: int | None = None) -> MeshSettings:
    """Settings of the rectangular mesh realizing the unitary ``u``."""
    u = require_unitary(u)
    if n is not None and n != u.shape[0]:
        raise SettingsError(f"matrix is {u.shape[0]}x{u.shape[0]}, expected n={n}")
    mesh = build_mesh(MeshLayout.rectangular(u.shape[0]))
    right_ops, left_ops, diag = _null_steps(u.copy())
    ops, d = _assemble(right_ops, left_ops, diag)
    return _ops_to_settings(mesh, ops, d)


def solve_reflected(u: np.ndarray):
    """Factor ``u`` through the mirrored (anti-parity) full template.

    Returns (ops, output_phases) with ops = [(pair, theta, phi), ...] in
    application order; the realized matrix is
    diag(exp(i*output_phases)) * T_oplast * ... * T_opfirst.

    The mirror pattern is the canonical one with column order reversed.  For
    even sizes reversal is achieved by transposition: decomposing u^T as
    D * B_P..B_1 gives u = B_1^T..B_P^T * D with
    B^T(theta, phi) = diag(exp(i*phi), -1) * T(theta, 0) * diag(1, -1).
    For odd sizes the canonical column pattern is palindromic and mode
    reversal (conjugation by the flip permutation J) toggles the parity
    instead: decomposing J u J canonically and mapping each factor through
    J T_p(theta, phi) J = diag(1,-1) T_{n-p}(theta, phi) diag(e^{-i*phi},
    -e^{i*phi}) yields the mirror factorization.  Either way the interposed
    unit-modulus diagonals are pushed to the output side via
    T(theta, psi) diag(e^{ia}, e^{ib}) = diag(e^{ib}, e^{ib}) T(theta, psi+a-b).
    """
    u = require_unitary(u)
    n = u.shape[0]
    mirror_ops = []
    if n % 2 == 0:
        right_ops, left_ops, diag = _null_steps(np.ascontiguousarray(u.T))
        ops_c, d = _assemble(right_ops, left_ops, diag)
        kappa = d.astype(complex).copy()
        for p, theta, phi_c in reversed(ops_c):
            a, b = p - 1, p
            kappa[b] = -kappa[b]
            phi_new = float(np.angle(kappa[a]) - np.angle(kappa[b])) % TWO_PI
            kappa[a] = kappa[b] * np.exp(1j * phi_c)
            kappa[b] = -kappa[b]
            mirror_ops.append((p, theta, phi_new))
    else:
        right_ops, left_ops, diag = _null_steps(np.ascontiguousarray(u[::-1, ::-1]))
        ops_c, d = _assemble(right_ops, left_ops, diag)
        kappa = np.ones(n, dtype=complex)
        for p, theta, phi_c in ops_c:
            q = n - p
            a, b = q - 1, q
            ka = kappa[a] * np.exp(-1j * phi_c)
            kb = -kappa[b] * np.exp(1j * phi_c)
            phi_new = float(phi_c + np.angle(ka) - np.angle(kb)) % TWO_PI
            kappa[a] = kb
            kappa[b] = -kb
            mirror_ops.append((q, theta, phi_new))
        kappa *= d[::-1]
    return mirror_ops, np.angle(kappa) % TWO_PI


def reconstruct(mesh: Mesh, settings: MeshSettings, defects=None) -> np.ndarray:
    """Forward model: the transfer matrix realized by ``settings`` on ``mesh``."""
    from .simulate import transfer

    return transfer(mesh, settings, defects)
