# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops for multi-step lattice propagation.

Signatures mirror :mod:`dtqw_lab._kernels_py` exactly; the selection between
the two happens in :mod:`dtqw_lab.kernels`.

Amplitudes are handled as interleaved (re, im) doubles with the complex
products written out by hand: C99 complex multiplication goes through a
NaN-recovering library call unless ``-fcx-limited-range`` is in effect.
"""

import numpy as np
cimport numpy as cnp

cnp.import_array()

BACKEND = "cython"


cdef inline void _coin_row(
    double* out, const double* p, const double* q,
    double ar, double ai, double br, double bi,
) noexcept nogil:
    # out = a * p + b * q
    out[0] = ar * p[0] - ai * p[1] + br * q[0] - bi * q[1]
    out[1] = ar * p[1] + ai * p[0] + br * q[1] + bi * q[0]


cdef inline void _rotate(double* z, const double* w) noexcept nogil:
    cdef double re = z[0] * w[0] - z[1] * w[1]
    z[1] = z[0] * w[1] + z[1] * w[0]
    z[0] = re


cdef inline void _walk_site(double* nu, double* nd, const double* u, const double* d,
                            Py_ssize_t x, Py_ssize_t xl, Py_ssize_t xr,
                            const double* c, bint ct) noexcept nogil:
    if ct:
        _coin_row(&nu[2 * x], &u[2 * xl], &d[2 * xr], c[0], c[1], c[2], c[3])
        _coin_row(&nd[2 * x], &u[2 * xl], &d[2 * xr], c[4], c[5], c[6], c[7])
    else:
        _coin_row(&nu[2 * x], &u[2 * xl], &d[2 * xl], c[0], c[1], c[2], c[3])
        _coin_row(&nd[2 * x], &u[2 * xr], &d[2 * xr], c[4], c[5], c[6], c[7])


cdef void _walk(double* u, double* d, double* nu, double* nd, const double* ph,
                Py_ssize_t n, Py_ssize_t steps, const double* c, bint ct) noexcept nogil:
    cdef Py_ssize_t t, x
    cdef double* tmp
    for t in range(steps):
        # ring edges first, then a branch-free interior the compiler can unroll
        _walk_site(nu, nd, u, d, 0, n - 1, 1, c, ct)
        _walk_site(nu, nd, u, d, n - 1, n - 2, 0, c, ct)
        if ct:
            for x in range(1, n - 1):
                _walk_site(nu, nd, u, d, x, x - 1, x + 1, c, True)
        else:
            for x in range(1, n - 1):
                _walk_site(nu, nd, u, d, x, x - 1, x + 1, c, False)
        if ph != NULL:
            for x in range(n):
                _rotate(&nu[2 * x], &ph[2 * x])
                _rotate(&nd[2 * x], &ph[2 * x])
        tmp = u
        u = nu
        nu = tmp
        tmp = d
        d = nd
        nd = tmp


def walk_steps(up, down, coin, phase, Py_ssize_t steps, bint ct=False):
    """Apply ``steps`` walk steps to the component arrays ``up``/``down``.

    ``coin`` holds (c11, c12, c21, c22); ``phase`` is the per-site factor
    exp(i*phi(x)) or ``None``. Inputs are not modified.
    """
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] u = np.array(up, dtype=np.complex128, copy=True)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] d = np.array(down, dtype=np.complex128, copy=True)
    cdef Py_ssize_t n = u.shape[0]
    if d.shape[0] != n:
        raise ValueError("component length mismatch")
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] nu = np.empty(n, dtype=np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] nd = np.empty(n, dtype=np.complex128)
    cdef double[::1] c = np.ascontiguousarray(coin, dtype=np.complex128).view(np.float64)
    if c.shape[0] != 8:
        raise ValueError("coin must have four entries")
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] ph
    cdef double* php = NULL
    if phase is not None:
        ph = np.ascontiguousarray(phase, dtype=np.complex128)
        if ph.shape[0] != n:
            raise ValueError("phase length does not match lattice")
        php = <double*> ph.data
    with nogil:
        _walk(<double*> u.data, <double*> d.data, <double*> nu.data, <double*> nd.data,
              php, n, steps, &c[0], ct)
    if steps % 2:
        return nu, nd
    return u, d


cdef void _dirac(double* u, double* d, double* nu, double* nd,
                 Py_ssize_t n, Py_ssize_t steps, double a, double b) noexcept nogil:
    cdef Py_ssize_t t, i, m = 2 * n
    cdef double* tmp
    for t in range(steps):
        # index i runs over interleaved doubles; neighbours sit 2 doubles away
        nu[0] = a * u[m - 2] - b * d[0]
        nu[1] = a * u[m - 1] - b * d[1]
        for i in range(2, m):
            nu[i] = a * u[i - 2] - b * d[i]
        for i in range(m - 2):
            nd[i] = a * d[i + 2] + b * u[i]
        nd[m - 2] = a * d[0] + b * u[m - 2]
        nd[m - 1] = a * d[1] + b * u[m - 1]
        tmp = u
        u = nu
        nu = tmp
        tmp = d
        d = nd
        nd = tmp


def dirac_steps(up, down, double a, double b, Py_ssize_t steps):
    """Apply ``steps`` iterations of the time-symmetric lattice Dirac update."""
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] u = np.array(up, dtype=np.complex128, copy=True)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] d = np.array(down, dtype=np.complex128, copy=True)
    cdef Py_ssize_t n = u.shape[0]
    if d.shape[0] != n:
        raise ValueError("component length mismatch")
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] nu = np.empty(n, dtype=np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] nd = np.empty(n, dtype=np.complex128)
    with nogil:
        _dirac(<double*> u.data, <double*> d.data, <double*> nu.data, <double*> nd.data,
               n, steps, a, b)
    if steps % 2:
        return nu, nd
    return u, d
