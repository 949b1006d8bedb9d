"""NumPy implementations of the hot kernels.

The compiled extension (``photonmesh._kernels._core``) provides the same
functions with identical semantics; either backend may be selected at import
time.  All functions mutate their matrix argument in place.

Event encoding shared with the compiled backend:

* kind 0 -- crossing on rows (r, r+1): ``aval`` holds exp(i*phi), ``bval``
  holds theta,
* kind 1 -- scale row r by the complex factor ``aval``.
"""

from __future__ import annotations

import numpy as np

BACKEND = "pure"

_MASK = np.uint64(0xFFFFFFFFFFFFFFFF)
_K1 = np.uint64(0x9E3779B97F4A7C15)
_K2 = np.uint64(0xBF58476D1CE4E5B9)


def apply_events(u, kinds, rows, avals, bvals, start, stop):
    """Apply events[start:stop] to the matrix ``u`` in place."""
    for i in range(start, stop):
        r = rows[i]
        if kinds[i] == 0:
            c = np.cos(bvals[i])
            s = np.sin(bvals[i])
            e = avals[i]
            x = u[r].copy()
            y = u[r + 1]
            u[r] = e * c * x - s * y
            u[r + 1] = e * s * x + c * y
        else:
            u[r] *= avals[i]


def left_rotate(u, p, theta, phi):
    """u <- T(theta, phi) @ u acting on rows (p, p+1), zero-based p."""
    c = np.cos(theta)
    s = np.sin(theta)
    e = np.exp(1j * phi)
    x = u[p].copy()
    y = u[p + 1]
    u[p] = e * c * x - s * y
    u[p + 1] = e * s * x + c * y


def right_rotate_dagger(u, p, theta, phi):
    """u <- u @ T(theta, phi)^dagger acting on columns (p, p+1), zero-based p."""
    c = np.cos(theta)
    s = np.sin(theta)
    e = np.exp(-1j * phi)
    x = u[:, p].copy()
    y = u[:, p + 1]
    u[:, p] = e * c * x - s * y
    u[:, p + 1] = e * s * x + c * y


def _splitmix64(z):
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9) & _MASK
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB) & _MASK
    return z ^ (z >> np.uint64(31))


def mc_defect_counts(seed, n_components, eps, trials):
    """Defective-component count per trial, from a counter-based generator.

    Component j of trial t is defective iff the top 53 bits of
    splitmix64(splitmix64(seed ^ t*K1) ^ j*K2) fall below round(eps * 2^53).
    Trials are independent of evaluation order and safe to parallelize.
    """
    thresh = np.uint64(min(int(round(eps * 2.0**53)), 2**53))
    seed64 = np.uint64(int(seed) & 0xFFFFFFFFFFFFFFFF)
    counts = np.zeros(trials, dtype=np.int64)
    jmix = (np.arange(n_components, dtype=np.uint64) * _K2) & _MASK
    chunk = max(1, (1 << 22) // max(n_components, 1))
    with np.errstate(over="ignore"):
        for lo in range(0, trials, chunk):
            hi = min(lo + chunk, trials)
            t = np.arange(lo, hi, dtype=np.uint64)
            tmix = _splitmix64(seed64 ^ ((t * _K1) & _MASK))
            h = _splitmix64(tmix[:, None] ^ jmix[None, :])
            counts[lo:hi] = ((h >> np.uint64(11)) < thresh).sum(axis=1)
    return counts
