"""Entire functions of the moment construction, in double precision.

* ``Lambda(z) = 0F1(; nu+1; i z / (4 kappa^2))``, the Weierstrass product with
  simple zeros at ``i lambda_k``.
* ``H(z) = C_theta int_{-1}^{1} exp(-theta/(1-t^2)) exp(-i a t z) dt``, the
  multiplier that buys real-axis decay.
* ``F_k(z) = Lambda(z) H(z) / (Lambda'(i lambda_k) (z - i lambda_k) H(i lambda_k))``.

Every evaluator has a ``*_log`` twin returning the principal complex
logarithm, because the magnitudes leave the double range long before the
arguments become large. The high-precision family lives in
:mod:`degen_control.family`.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .mp import get_backend
from .params import ProblemParams
from .spectrum import Mode

__all__ = [
    "DEFAULT_DELTA",
    "Multiplier",
    "F_eval",
    "F_log",
    "lambda_eval",
    "lambda_log",
    "lambda_prime",
    "lambda_prime_at_pole",
    "lambda_prime_probe",
    "lambda_product",
    "make_multiplier",
    "multiplier_eval",
    "multiplier_log",
]

DEFAULT_DELTA = 0.5
_SERIES_RADIUS = 16.0
_GX, _GW = np.polynomial.legendre.leggauss(64)


# ---------------------------------------------------------------- Lambda

def _hyp0f1_series(b: float, zeta: complex) -> complex:
    term = 1.0 + 0.0j
    s = term
    for m in range(1, 400):
        term *= zeta / (m * (b + m - 1.0))
        s += term
        if abs(term) <= 1e-17 * abs(s):
            break
    return s


def _lambda_log_mp(nu: float, kappa: float, z: complex, backend=None) -> complex:
    # Gamma(nu+1) (2 kappa / w)^nu J_nu(w / kappa), w = sqrt(-i z), in log form
    bk = backend or get_backend()
    prec = 64
    while True:
        with bk.workprec(prec):
            w = bk.sqrt(bk.cplx(z.imag, -z.real))
            jv = bk.besselj(bk.real(nu), w / bk.real(kappa))
            la = (
                bk.to_float(bk.lgamma(nu + 1.0))
                + nu * (math.log(2.0 * kappa) - bk.log_abs(w))
                + bk.log_abs(jv)
            )
            ph = -nu * bk.to_float(bk.arg(w)) + bk.to_float(bk.arg(jv))
            ok = not bk.certified or (
                bk.radius(jv) == 0.0 or math.log(bk.radius(jv)) - bk.log_abs(jv) < math.log(1e-15))
            if ok:
                return complex(la, math.atan2(math.sin(ph), math.cos(ph)))
        prec *= 2
        if prec > 1 << 14:
            raise ArithmeticError("Lambda evaluation did not reach double accuracy")


def lambda_log(params: ProblemParams, z: complex, backend=None) -> complex:
    """Principal ``log Lambda(z)``; the real part is ``log|Lambda(z)|``."""
    zeta = 1j * complex(z) / (4.0 * params.kappa ** 2)
    b = params.nu + 1.0
    if abs(zeta) <= _SERIES_RADIUS:
        v = _hyp0f1_series(b, zeta)
        return cmath.log(v) if v != 0 else complex(-math.inf, 0.0)
    return _lambda_log_mp(params.nu, params.kappa, complex(z), backend)


def lambda_eval(params: ProblemParams, z: complex, backend=None) -> complex:
    """``Lambda(z) = Gamma(nu+1) (2 kappa / sqrt(-i z))^nu J_nu(sqrt(-i z)/kappa)``.

    Uses the entire series in ``w^2`` near the origin (``Lambda(0) = 1``) and
    the Bessel closed form in arbitrary precision beyond, where double-precision
    series cancellation would destroy every digit.
    """
    zeta = 1j * complex(z) / (4.0 * params.kappa ** 2)
    if abs(zeta) <= _SERIES_RADIUS:
        return _hyp0f1_series(params.nu + 1.0, zeta)
    lg = lambda_log(params, z, backend)
    return cmath.exp(lg) if lg.real < 709.0 else complex(math.inf, math.inf)


def lambda_product(params: ProblemParams, z: complex, zeros_table, tail: bool = True) -> complex:
    """Truncated Weierstrass product ``prod_k (1 + i z / lambda_k)``.

    Parameters
    ----------
    zeros_table : sequence of float
        Bessel zeros ``j_{nu,k}``, ``k = 1..K``.
    tail : bool
        Multiply by ``exp(i z sum_{k>K} 1/lambda_k)`` with the sum taken from
        the McMahon zero asymptotics, the leading term of the omitted factors.
    """
    lam = params.kappa ** 2 * np.asarray(zeros_table, dtype=float) ** 2
    logp = np.sum(np.log1p(1j * complex(z) / lam))
    if tail:
        K = len(lam)
        # sum_{k>K} 1/(kappa pi (k + nu/2 - 1/4))^2 via trigamma
        shift = K + 1 + params.nu / 2.0 - 0.25
        import mpmath

        s = float(mpmath.psi(1, shift)) / (params.kappa * math.pi) ** 2
        logp += 1j * complex(z) * s
    return complex(np.exp(logp))


def lambda_prime_at_pole(params: ProblemParams, mode: Mode) -> float:
    """``|Lambda'(i lambda_k)| = Gamma(nu+1) 2^nu / j^nu / (2 kappa^2 j) |J_nu'(j)|``."""
    nu, j = params.nu, mode.zero
    logv = (
        math.lgamma(nu + 1.0) + nu * math.log(2.0) - nu * math.log(j)
        - math.log(2.0 * params.kappa ** 2 * j) + math.log(abs(mode.jprime))
    )
    return math.exp(logv)


def lambda_prime(params: ProblemParams, mode: Mode) -> complex:
    """Complex ``Lambda'(i lambda_k) = -i Gamma(nu+1) 2^nu J_nu'(j) / (2 kappa^2 j^(nu+1))``.

    Differentiating the closed form gives a purely imaginary value, so the
    phase is ``-i sign(J_nu'(j_k))``.
    """
    return -1j * math.copysign(lambda_prime_at_pole(params, mode), mode.jprime)


def lambda_prime_probe(params: ProblemParams, mode: Mode, h: float | None = None, backend=None) -> complex:
    """Central difference of ``Lambda`` along the real direction at ``i lambda_k``."""
    h = h or 1e-4 * max(1.0, mode.lam)
    z0 = 1j * mode.lam
    bk = backend or get_backend()
    zeta = lambda z: 1j * z / (4.0 * params.kappa ** 2)
    with bk.workprec(128):
        b = bk.real(params.nu + 1.0)
        f = lambda z: bk.hyp0f1(b, bk.cplx(zeta(z).real, zeta(z).imag))
        d = (f(z0 + h) - f(z0 - h)) / (2 * h)
        return bk.to_complex(d)


# ---------------------------------------------------------------- multiplier

@dataclass(frozen=True)
class Multiplier:
    """Parameters of ``H_{a,theta}``.

    Attributes
    ----------
    a : float
        ``T (1 - delta) / 2``.
    theta : float
        ``(1 + delta)^2 / (kappa^2 T (1 - delta))``.
    delta_param : float
    log_C_theta : float
        ``-log int_{-1}^{1} exp(-theta/(1-t^2)) dt``.
    """

    a: float
    theta: float
    delta_param: float
    log_C_theta: float

    @property
    def C_theta(self) -> float:
        return math.exp(self.log_C_theta) if self.log_C_theta < 709.0 else math.inf


def _log_sigma_integral(theta: float) -> float:
    # int exp(-theta/(1-t^2)) = e^-theta int exp(-theta sinh^2 u) sech^2 u du, t = tanh u
    h = 0.01
    u = np.arange(-6.0, 6.0 + h / 2, h)
    g = np.exp(-theta * np.sinh(u) ** 2) / np.cosh(u) ** 2
    return -theta + math.log(h * g.sum())


def make_multiplier(params: ProblemParams, delta: float = DEFAULT_DELTA, T: float | None = None) -> Multiplier:
    """Multiplier for horizon ``T`` (default ``params.T``) and ``delta`` in (0, 1)."""
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    T = params.T if T is None else float(T)
    a = T * (1.0 - delta) / 2.0
    theta = (1.0 + delta) ** 2 / (params.kappa ** 2 * T * (1.0 - delta))
    return Multiplier(a, theta, float(delta), -_log_sigma_integral(theta))


#: Parts of a contour more than this far below its peak are dropped.
_CLIP_NATS = 60.0


def _phi(m: Multiplier, z: complex, t):
    return -m.theta / ((1.0 - t) * (1.0 + t)) - 1j * m.a * z * t


def _phi_on(m: Multiplier, z: complex, t0: complex, t1: complex, s):
    """``phi`` at ``t0 + (t1 - t0) s``; ``1 -+ t`` are interpolated so they stay accurate at the ends."""
    t = t0 + (t1 - t0) * s
    u = (1.0 - t0) * (1.0 - s) + (1.0 - t1) * s
    v = (1.0 + t0) * (1.0 - s) + (1.0 + t1) * s
    return -m.theta / (u * v) - 1j * m.a * z * t


def _dphi(m, z, t):
    return -2.0 * m.theta * t / (1.0 - t * t) ** 2 - 1j * m.a * z


def _d2phi(m, z, t):
    return -2.0 * m.theta * (1.0 + 3.0 * t * t) / (1.0 - t * t) ** 3


def _segment_nodes(t0: complex, t1: complex, nsub: int):
    e = np.linspace(0.0, 1.0, nsub + 1)
    lo, hi = e[:-1, None], e[1:, None]
    s = (0.5 * (hi - lo) * _GX + 0.5 * (hi + lo)).ravel()
    w = (0.5 * (hi - lo) * _GW).ravel()
    return s, w * (t1 - t0)


def _log_integral(m: Multiplier, z: complex, path: list[tuple[complex, complex, int]]) -> complex:
    phs, ws = [], []
    for t0, t1, n in path:
        sn, w = _segment_nodes(t0, t1, n)
        phs.append(_phi_on(m, z, t0, t1, sn))
        ws.append(w)
    ph = np.concatenate(phs)
    w = np.concatenate(ws)
    top = ph.real.max()
    s = np.sum(w * np.exp(ph - top))
    if s == 0:
        return complex(-math.inf, 0.0)
    return top + cmath.log(s)


def _real_peak(m: Multiplier, y: float) -> float:
    # maximiser of -theta/(1-t^2) + a y t on (-1, 1); derivative is decreasing
    lo, hi = -1.0, 1.0
    g = lambda t: -2.0 * m.theta * t / (1.0 - t * t) ** 2 + m.a * y
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if g(mid) > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-16:
            break
    return 0.5 * (lo + hi)


def _real_path(m: Multiplier, x: float, y: float):
    tp = _real_peak(m, y)
    w = 1.0 / math.sqrt(2.0 * m.theta * (1.0 + 3.0 * tp * tp) / (1.0 - tp * tp) ** 3)
    pts = {-1.0, 1.0}
    for i in range(60):
        d = w * 2.0 ** (i / 2.0)
        for s in (-1.0, 1.0):
            q = tp + s * d
            if -1.0 < q < 1.0:
                pts.add(q)
    pts.add(tp)
    pts = sorted(pts)
    path = []
    for t0, t1 in zip(pts[:-1], pts[1:]):
        n = max(1, math.ceil((t1 - t0) * m.a * x / (2.0 * math.pi * 6.0)))
        path.append((complex(t0), complex(t1), n))
    return path, w


def _saddles(m: Multiplier, z: complex) -> list[complex]:
    # phi'(t) = 0  <=>  i a z (1 - t^2)^2 + 2 theta t = 0
    c = 1j * m.a * z
    out = []
    for t in np.roots([c, 0.0, -2.0 * c, 2.0 * m.theta, c]):
        for _ in range(30):
            step = _dphi(m, z, t) / _d2phi(m, z, t)
            t = t - step
            if abs(step) < 1e-15 * max(1.0, abs(t)):
                break
        if t.imag < 0.0 and abs(t.real) < 1.0 and abs(1.0 - t * t) > 1e-12:
            out.append(complex(t))
    return out


_GEO = 2.0 ** -np.arange(1.0, 52.0)
_PEAK_S = np.unique(np.concatenate([np.linspace(0.0, 1.0, 129), _GEO, 1.0 - _GEO]))
_CLIP_S = np.unique(np.concatenate([np.linspace(0.0, 1.0, 257), _GEO, 1.0 - _GEO]))


def _leg(m: Multiplier, z: complex, t0: complex, t1: complex, floor: float = -math.inf):
    # clip to where Re phi > floor, then size panels by phase variation and Gaussian width
    s = _CLIP_S
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        ph = _phi_on(m, z, t0, t1, s)
    keep = np.nonzero(np.isfinite(ph) & (ph.real > floor))[0]
    if len(keep) == 0:
        return None
    i0, i1 = max(keep[0] - 1, 0), min(keep[-1] + 1, len(s) - 1)
    a = t0 if i0 == 0 else t0 + (t1 - t0) * s[i0]
    b = t1 if i1 == len(s) - 1 else t0 + (t1 - t0) * s[i1]
    ph = ph[i0:i1 + 1]
    ph = ph[np.isfinite(ph)]
    turns = np.sum(np.abs(np.diff(ph.imag))) / (2.0 * math.pi) if len(ph) > 1 else 0.0
    ends = [t for t in (a, b) if abs(1.0 - t * t) > 1e-12]
    width = min((abs(_d2phi(m, z, t)) ** -0.5 for t in ends), default=1.0)
    n = max(4, math.ceil(turns / 3.0), math.ceil(abs(b - a) / (3.0 * width)))
    return (a, b, min(n, 4000))


def _leg_peak(m: Multiplier, z: complex, t0: complex, t1: complex) -> float:
    # samples cluster at both ends (saddles, +-1); three zooms around the best sample
    s = _PEAK_S
    top = -math.inf
    for _ in range(4):
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            re = _phi_on(m, z, t0, t1, s).real
        re = np.where(np.isfinite(re), re, -math.inf)
        i = int(np.argmax(re))
        top = max(top, float(re[i]))
        lo, hi = s[max(i - 1, 0)], s[min(i + 1, len(s) - 1)]
        if hi <= lo:
            break
        s = np.linspace(lo, hi, 33)
    return top


def _path_peak(m: Multiplier, z: complex, pts: list[complex]) -> float:
    return max(_leg_peak(m, z, t0, t1) for t0, t1 in zip(pts[:-1], pts[1:]))


def _ray_candidate(m: Multiplier, z: complex, sad: list[complex]):
    """Endpoint saddles joined by parallel descent rays.

    For large ``a|z|`` the saddles sit near ``+-1`` and, with ``w = a z``,
    ``Re phi`` decreases monotonically from each saddle along the direction
    ``exp(-i (pi/2 + arg w))``; the two rays are joined where the integrand
    is negligible.
    """
    left = [t for t in sad if abs(1.0 + t) < 0.5]
    right = [t for t in sad if abs(1.0 - t) < 0.5]
    if not left or not right:
        return None
    sl = min(left, key=lambda t: abs(1.0 + t))
    sr = min(right, key=lambda t: abs(1.0 - t))
    w = m.a * z
    u = cmath.exp(-1j * (0.5 * math.pi + cmath.phase(w)))
    spread = abs((-1j * w * sl).real - (-1j * w * sr).real)
    R = (spread + m.theta + _CLIP_NATS + 30.0) / abs(w)
    return [complex(-1.0), sl, sl + R * u, sr + R * u, sr, complex(1.0)]


def _contour_path(m: Multiplier, z: complex):
    """Polyline through the saddles that minimises the peak of ``Re phi``."""
    x, y = z.real, z.imag
    sad = sorted(_saddles(m, z), key=lambda t: t.real)
    cands = [[complex(-1.0), t, complex(1.0)] for t in sad]
    for i in range(len(sad)):
        for j in range(i + 1, len(sad)):
            t1, t2 = sad[i], sad[j]
            if t2.real - t1.real < 1e-9:
                continue
            cands.append([complex(-1.0), t1, t2, complex(1.0)])
            top = max(_phi(m, z, t1).real, _phi(m, z, t2).real)
            Y = max((m.a * y + 45.0 - top) / (m.a * x), -t1.imag, -t2.imag)
            cands.append([complex(-1.0), t1, complex(t1.real, -Y), complex(t2.real, -Y), t2, complex(1.0)])
    ray = _ray_candidate(m, z, sad)
    if ray is not None:
        cands.append(ray)
    if not cands:
        return None
    peaks = [_path_peak(m, z, pts) for pts in cands]
    i = int(np.argmin(peaks))
    best, floor = cands[i], peaks[i] - _CLIP_NATS
    legs = [_leg(m, z, t0, t1, floor) for t0, t1 in zip(best[:-1], best[1:])]
    return [lg for lg in legs if lg is not None] or None


def multiplier_log(m: Multiplier, z: complex) -> complex:
    """Principal ``log H(z)``; relative accuracy about ``1e-11`` for ``|z| <= 1e6``.

    Small ``a |z|`` integrates along the real segment with panels clustered
    at the Laplace peak. Otherwise the segment is deformed into the lower
    half plane through the saddle points of the exponent, choosing among the
    candidate polylines the one whose largest ``Re phi`` is smallest, so the
    quadrature never has to cancel large oscillating contributions.
    """
    z = complex(z)
    conj = False
    if z.real < 0.0:
        z = -z
    if z.imag < 0.0:
        z = z.conjugate()
        conj = True
    x, y = z.real, z.imag
    path, w = _real_path(m, x, y)
    if m.a * x * w > 3.0:
        path = _contour_path(m, z) or path
    v = _log_integral(m, z, path) + m.log_C_theta
    return v.conjugate() if conj else v


def multiplier_eval(m: Multiplier, z: complex) -> complex:
    """``H_{a,theta}(z)``; ``H(0) = 1`` and ``|H(x)| <= 1`` on the real axis."""
    lg = multiplier_log(m, z)
    return cmath.exp(lg) if lg.real < 709.0 else complex(math.inf, 0.0)


# ---------------------------------------------------------------- F_k

def F_log(params: ProblemParams, m: Multiplier, mode_list, k: int, z: complex, backend=None) -> complex:
    """Principal ``log F_k(z)`` in double precision (``k`` is 1-based)."""
    mode = mode_list[k - 1]
    z = complex(z)
    zk = 1j * mode.lam
    if abs(z - zk) <= 1e-12 * max(1.0, mode.lam):
        return 0j
    return (
        lambda_log(params, z, backend)
        + multiplier_log(m, z)
        - cmath.log(lambda_prime(params, mode))
        - cmath.log(z - zk)
        - multiplier_log(m, zk)
    )


def F_eval(params: ProblemParams, m: Multiplier, mode_list, k: int, z: complex, backend=None) -> complex:
    """``F_k(z)`` in double precision.

    The value at ``z = i lambda_k`` is 1. Values at the other nodes
    ``i lambda_l`` are only as small as the zero of ``Lambda`` computed in
    double precision allows; use :class:`degen_control.family.MomentEngine`
    for the certified Kronecker property.
    """
    lg = F_log(params, m, mode_list, k, z, backend)
    return cmath.exp(lg) if lg.real < 709.0 else complex(math.inf, 0.0)
