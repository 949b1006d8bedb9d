# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled implementations of the hot kernels.

Must stay bit-for-bit interchangeable with ``photonmesh._kernels.pure``; see
that module for the event encoding and the counter-based generator contract.
"""

import numpy as np

cimport cython
from libc.math cimport cos, sin

BACKEND = "compiled"

ctypedef unsigned long long u64


def apply_events(double complex[:, ::1] u, const signed char[::1] kinds,
                 const int[::1] rows, const double complex[::1] avals,
                 const double[::1] bvals, Py_ssize_t start, Py_ssize_t stop):
    """Apply events[start:stop] to the matrix ``u`` in place."""
    cdef Py_ssize_t i, j, n = u.shape[1]
    cdef int r
    cdef double c, s
    cdef double complex e, ac, asn, x, y
    for i in range(start, stop):
        r = rows[i]
        if kinds[i] == 0:
            c = cos(bvals[i])
            s = sin(bvals[i])
            e = avals[i]
            ac = e * c
            asn = e * s
            for j in range(n):
                x = u[r, j]
                y = u[r + 1, j]
                u[r, j] = ac * x - s * y
                u[r + 1, j] = asn * x + c * y
        else:
            e = avals[i]
            for j in range(n):
                u[r, j] = u[r, j] * e


def left_rotate(double complex[:, ::1] u, Py_ssize_t p, double theta, double phi):
    """u <- T(theta, phi) @ u acting on rows (p, p+1), zero-based p."""
    cdef Py_ssize_t j, n = u.shape[1]
    cdef double c = cos(theta), s = sin(theta)
    cdef double complex e = cos(phi) + 1j * sin(phi)
    cdef double complex ac = e * c, asn = e * s, x, y
    for j in range(n):
        x = u[p, j]
        y = u[p + 1, j]
        u[p, j] = ac * x - s * y
        u[p + 1, j] = asn * x + c * y


def right_rotate_dagger(double complex[:, ::1] u, Py_ssize_t p, double theta, double phi):
    """u <- u @ T(theta, phi)^dagger acting on columns (p, p+1), zero-based p."""
    cdef Py_ssize_t i, n = u.shape[0]
    cdef double c = cos(theta), s = sin(theta)
    cdef double complex e = cos(phi) - 1j * sin(phi)
    cdef double complex ec = e * c, es = e * s, x, y
    for i in range(n):
        x = u[i, p]
        y = u[i, p + 1]
        u[i, p] = ec * x - s * y
        u[i, p + 1] = es * x + c * y


cdef inline u64 _splitmix64(u64 z) nogil:
    z = (z ^ (z >> 30)) * <u64>0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * <u64>0x94D049BB133111EB
    return z ^ (z >> 31)


def mc_defect_counts(object seed, Py_ssize_t n_components, double eps, Py_ssize_t trials):
    """Defective-component count per trial; see the pure backend for the contract."""
    cdef u64 seed64 = <u64>(int(seed) & 0xFFFFFFFFFFFFFFFF)
    cdef u64 K1 = <u64>0x9E3779B97F4A7C15
    cdef u64 K2 = <u64>0xBF58476D1CE4E5B9
    cdef double scaled = eps * 9007199254740992.0  # 2**53
    cdef u64 thresh
    if scaled >= 9007199254740992.0:
        thresh = <u64>9007199254740992
    else:
        thresh = <u64>(scaled + 0.5)
    counts_arr = np.zeros(trials, dtype=np.int64)
    cdef long long[::1] counts = counts_arr
    cdef Py_ssize_t t, j
    cdef u64 tmix, h
    cdef long long acc
    with nogil:
        for t in range(trials):
            tmix = _splitmix64(seed64 ^ (<u64>t * K1))
            acc = 0
            for j in range(n_components):
                h = _splitmix64(tmix ^ (<u64>j * K2))
                if (h >> 11) < thresh:
                    acc += 1
            counts[t] = acc
    return counts_arr
