# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled double-precision kernels.

Same API and regime logic as ``_pykernels``; see that module for the
algorithmic notes.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log, lgamma, sqrt, cos, sin, fabs, floor, pow, M_PI

cnp.import_array()

cdef double SERIES_MIN = 6.0
cdef double HANKEL_MIN = 35.0
cdef double RESCALE = 1e200


cdef inline bint _use_series(double nu, double x) nogil:
    return x <= SERIES_MIN or x <= 0.5 * nu


cdef inline bint _use_hankel(double nu, double x) nogil:
    return x >= HANKEL_MIN and x >= nu * nu


cdef inline int _miller_start(double nu, double x) nogil:
    cdef double top = nu if nu > x else x
    cdef int m = <int>(top + 30.0 + 8.0 * pow(top, 1.0 / 3.0))
    return m + (m & 1)


cdef double _series1(double nu, double x, double lg) nogil:
    cdef double q, term, s
    cdef int m
    if x == 0.0:
        return 1.0 if nu == 0.0 else 0.0
    q = 0.25 * x * x
    term = exp(nu * log(0.5 * x) - lg)
    s = term
    for m in range(1, 600):
        term *= -q / (m * (m + nu))
        s += term
        if fabs(term) <= 1e-17 * fabs(s) or term == 0.0:
            break
    return s


cdef double _miller1(double nu, double x, const double[::1] w, int M) nogil:
    cdef int n = <int>floor(nu)
    cdef double al = nu - n
    cdef double p1 = 0.0, p = 1e-280, pm, S = 0.0, val = 0.0
    cdef int m
    for m in range(M, -1, -1):
        if (m & 1) == 0:
            S += w[m >> 1] * p
        if m == n:
            val = p
        if m == 0:
            break
        pm = (2.0 * (al + m) / x) * p - p1
        p1 = p
        p = pm
        if fabs(p) > RESCALE:
            p /= RESCALE
            p1 /= RESCALE
            S /= RESCALE
            val /= RESCALE
    return pow(0.5 * x, al) * val / S


cdef double _hankel1(double nu, double x) nogil:
    cdef double mu4 = 4.0 * nu * nu
    cdef double P = 1.0, Q = 0.0, term = 1.0, prev = 1e300, a, chi
    cdef int k
    for k in range(1, 200):
        a = 2.0 * k - 1.0
        term *= (mu4 - a * a) / (k * 8.0 * x)
        if fabs(term) > prev:
            break
        prev = fabs(term)
        if k % 4 == 1:
            Q += term
        elif k % 4 == 2:
            P -= term
        elif k % 4 == 3:
            Q -= term
        else:
            P += term
        if fabs(term) < 1e-17:
            break
    chi = x - (0.5 * nu + 0.25) * M_PI
    return sqrt(2.0 / (M_PI * x)) * (P * cos(chi) - Q * sin(chi))


def miller_weights(double nu, int M):
    """Normalization weights ``(a + 2k) Gamma(a + k) / k!`` with ``a = frac(nu)``."""
    cdef double al = nu - floor(nu)
    cdef int nk = M // 2 + 1
    cdef cnp.ndarray[cnp.float64_t, ndim=1] w = np.empty(nk)
    cdef int k
    w[0] = exp(lgamma(al + 1.0))
    for k in range(1, nk):
        w[k] = (al + 2.0 * k) * exp(lgamma(al + k) - lgamma(k + 1.0))
    return w


def jv_series(double nu, x):
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64).ravel()
    cdef Py_ssize_t i, n = xv.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n)
    cdef double lg = lgamma(nu + 1.0)
    for i in range(n):
        out[i] = _series1(nu, xv[i], lg)
    return out.reshape(np.shape(x))


def jv_miller(double nu, x):
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64).ravel()
    cdef Py_ssize_t i, n = xv.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n)
    cdef double xmax = 0.0
    for i in range(n):
        if xv[i] > xmax:
            xmax = xv[i]
    cdef const double[::1] w = miller_weights(nu, _miller_start(nu, xmax))
    for i in range(n):
        if xv[i] == 0.0:
            out[i] = 1.0 if nu == 0.0 else 0.0
        else:
            out[i] = _miller1(nu, xv[i], w, _miller_start(nu, xv[i]))
    return out.reshape(np.shape(x))


def jv_hankel(double nu, x):
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64).ravel()
    cdef Py_ssize_t i, n = xv.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n)
    for i in range(n):
        out[i] = _hankel1(nu, xv[i])
    return out.reshape(np.shape(x))


def jv(double nu, x):
    """``J_nu(x)`` for ``nu >= 0`` and ``x >= 0`` with regime dispatch."""
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64).ravel()
    cdef Py_ssize_t i, n = xv.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n)
    cdef double lg = lgamma(nu + 1.0)
    cdef double xmax = 0.0, xi
    for i in range(n):
        if xv[i] > xmax:
            xmax = xv[i]
    cdef const double[::1] w = miller_weights(nu, _miller_start(nu, xmax))
    for i in range(n):
        xi = xv[i]
        if _use_series(nu, xi):
            out[i] = _series1(nu, xi, lg)
        elif _use_hankel(nu, xi):
            out[i] = _hankel1(nu, xi)
        else:
            out[i] = _miller1(nu, xi, w, _miller_start(nu, xi))
    return out.reshape(np.shape(x))


def duhamel_final(lam, f, double h):
    """Trapezoid value of ``int_0^tau f(t) exp(-lam (tau - t)) dt`` at ``tau = (len(f)-1) h``."""
    cdef const double[::1] lv = np.ascontiguousarray(lam, dtype=np.float64)
    cdef const double[::1] fv = np.ascontiguousarray(f, dtype=np.float64)
    cdef Py_ssize_t K = lv.shape[0], n = fv.shape[0] - 1, k, m
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.zeros(K)
    cdef double e, s
    if n <= 0:
        return out
    for k in range(K):
        e = exp(-lv[k] * h)
        s = 0.5 * fv[0]
        for m in range(1, n):
            s = s * e + fv[m]
        s = s * e + 0.5 * fv[n]
        out[k] = s * h
    return out


def duhamel_path(lam, f, double h):
    """Trapezoid Duhamel integrals at every grid time, shape ``(K, len(f))``."""
    cdef const double[::1] lv = np.ascontiguousarray(lam, dtype=np.float64)
    cdef const double[::1] fv = np.ascontiguousarray(f, dtype=np.float64)
    cdef Py_ssize_t K = lv.shape[0], n = fv.shape[0], k, m
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.zeros((K, n))
    cdef double e, acc
    for k in range(K):
        e = exp(-lv[k] * h)
        acc = 0.0
        for m in range(1, n):
            acc = acc * e + 0.5 * h * (fv[m - 1] * e + fv[m])
            out[k, m] = acc
    return out
