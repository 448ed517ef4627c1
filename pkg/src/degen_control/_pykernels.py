"""Pure numpy kernels, the fallback for the compiled ``_ckernels``.

Bessel ``J_nu(x)`` for real ``nu >= 0``, ``x >= 0`` uses three regimes:

* power series with log-Gamma prefactor when ``x <= max(6, nu/2)``, where
  the alternating terms cancel by less than a few bits;
* the large-argument (Hankel) expansion once ``x >= max(35, nu**2)``;
* Miller's backward recurrence otherwise, normalized with
  ``(x/2)**a = sum_k (a + 2k) Gamma(a + k) / k! * J_{a+2k}(x)``,
  ``a = nu - floor(nu)``.

All three are vectorized over ``x``.
"""
from __future__ import annotations

import math

import numpy as np

SERIES_MIN = 6.0
HANKEL_MIN = 35.0
_RESCALE = 1e200


def _use_series(nu, x):
    return (x <= SERIES_MIN) | (x <= 0.5 * nu)


def _use_hankel(nu, x):
    return (x >= HANKEL_MIN) & (x >= nu * nu)


def _miller_start(nu, x):
    top = max(nu, float(x))
    m = int(top + 30.0 + 8.0 * top ** (1.0 / 3.0))
    return m + (m & 1)


def miller_weights(nu: float, M: int) -> np.ndarray:
    """Normalization weights ``(a + 2k) Gamma(a + k) / k!`` with ``a = frac(nu)``."""
    al = nu - math.floor(nu)
    nk = M // 2 + 1
    w = np.empty(nk)
    w[0] = math.exp(math.lgamma(al + 1.0))
    for k in range(1, nk):
        w[k] = (al + 2.0 * k) * math.exp(math.lgamma(al + k) - math.lgamma(k + 1.0))
    return w


def jv_series(nu: float, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    shape = x.shape
    x = x.ravel()
    out = np.zeros_like(x)
    zero = x == 0.0
    out[zero] = 1.0 if nu == 0.0 else 0.0
    xs = x[~zero]
    if xs.size:
        q = 0.25 * xs * xs
        term = np.exp(nu * np.log(0.5 * xs) - math.lgamma(nu + 1.0))
        s = term.copy()
        for m in range(1, 600):
            term = term * (-q / (m * (m + nu)))
            s += term
            if np.all((np.abs(term) <= 1e-17 * np.abs(s)) | (term == 0.0)):
                break
        out[~zero] = s
    return out.reshape(shape)


def jv_miller(nu: float, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    shape = x.shape
    x = x.ravel()
    out = np.zeros_like(x)
    zero = x == 0.0
    out[zero] = 1.0 if nu == 0.0 else 0.0
    xs = x[~zero]
    if xs.size:
        n = int(math.floor(nu))
        al = nu - n
        M = _miller_start(nu, xs.max())
        w = miller_weights(nu, M)
        p1 = np.zeros_like(xs)
        p = np.full_like(xs, 1e-280)
        S = np.zeros_like(xs)
        val = np.zeros_like(xs)
        for m in range(M, -1, -1):
            if m % 2 == 0:
                S += w[m // 2] * p
            if m == n:
                val = p.copy()
            if m == 0:
                break
            p1, p = p, (2.0 * (al + m) / xs) * p - p1
            big = np.abs(p) > _RESCALE
            if big.any():
                sc = np.where(big, 1.0 / _RESCALE, 1.0)
                p *= sc
                p1 *= sc
                S *= sc
                val *= sc
        out[~zero] = (0.5 * xs) ** al * val / S
    return out.reshape(shape)


def jv_hankel(nu: float, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    mu4 = 4.0 * nu * nu
    P = np.ones_like(x)
    Q = np.zeros_like(x)
    term = np.ones_like(x)
    prev = np.full_like(x, np.inf)
    live = np.ones(x.shape, dtype=bool)
    for k in range(1, 200):
        a = 2.0 * k - 1.0
        term = term * (mu4 - a * a) / (k * 8.0 * x)
        live &= np.abs(term) <= prev
        prev = np.abs(term)
        t = np.where(live, term, 0.0)
        r = k % 4
        if r == 1:
            Q += t
        elif r == 2:
            P -= t
        elif r == 3:
            Q -= t
        else:
            P += t
        live &= np.abs(term) >= 1e-17
        if not live.any():
            break
    chi = x - (0.5 * nu + 0.25) * math.pi
    return np.sqrt(2.0 / (math.pi * x)) * (P * np.cos(chi) - Q * np.sin(chi))


def jv(nu: float, x) -> np.ndarray:
    """``J_nu(x)`` for ``nu >= 0`` and ``x >= 0`` with regime dispatch."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    s = _use_series(nu, x)
    h = _use_hankel(nu, x) & ~s
    m = ~(s | h)
    if s.any():
        out[s] = jv_series(nu, x[s])
    if h.any():
        out[h] = jv_hankel(nu, x[h])
    if m.any():
        out[m] = jv_miller(nu, x[m])
    return out


def duhamel_final(lam, f, h: float) -> np.ndarray:
    """Trapezoid value of ``int_0^tau f(t) exp(-lam (tau - t)) dt`` at ``tau = (len(f)-1) h``."""
    lam = np.asarray(lam, dtype=float)
    f = np.asarray(f, dtype=float)
    n = f.size - 1
    if n <= 0:
        return np.zeros_like(lam)
    e = np.exp(-lam * h)
    s = 0.5 * f[0] * np.ones_like(lam)
    for m in range(1, n):
        s = s * e + f[m]
    s = s * e + 0.5 * f[n]
    return s * h


def duhamel_path(lam, f, h: float) -> np.ndarray:
    """Trapezoid Duhamel integrals at every grid time, shape ``(K, len(f))``."""
    lam = np.asarray(lam, dtype=float)
    f = np.asarray(f, dtype=float)
    out = np.zeros((lam.size, f.size))
    e = np.exp(-lam * h)
    acc = np.zeros_like(lam)
    for m in range(1, f.size):
        acc = acc * e + 0.5 * h * (f[m - 1] * e + f[m])
        out[:, m] = acc
    return out
