"""Eigenpairs of the weighted operator and the transform to the classical problem.

The eigenfunctions in ``L^2_beta(0,1)`` are

    Phi_k(x) = (2 kappa)^(1/2) / |J_nu'(j_k)| * x^((1-alpha-beta)/2) * J_nu(j_k x^kappa)

with eigenvalues ``lambda_k = kappa^2 j_k^2``. The map
``U u(x) = kappa^(1/2) x^(-alpha/4 - beta/2) u(x^kappa)`` is unitary from
``L^2(0,1)`` onto ``L^2_beta(0,1)`` and sends the classical Bessel
eigenfunctions ``Psi_k(y) = sqrt(2)/|J_nu'(j_k)| y^(1/2) J_nu(j_k y)`` to
``Phi_k``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import kernels
from .bessel import eval_J, eval_J_prime, zeros
from .params import ProblemParams
from .quadrature import QuadratureRule, graded_rule, x_rule

__all__ = [
    "Mode",
    "BumpFunction",
    "RICHARDSON_POINTS",
    "classical_eigenfunction",
    "eigenfunction_derivative",
    "eigenfunction_eval",
    "gen_derivative",
    "gen_derivative_limit",
    "gram_matrix",
    "norm_constant",
    "hardy_check",
    "inner_product_beta",
    "inverse_unitary_transform",
    "modes",
    "poincare_check",
    "rule_for",
    "scaled_trace",
    "bump_family",
    "unitary_transform",
    "weak_residual",
]

#: Sample points of the generalized-derivative limit oracle.
RICHARDSON_POINTS = (1e-4, 1e-5, 1e-6, 1e-7, 1e-8)


@dataclass(frozen=True)
class Mode:
    """One eigentriple with its normalization data.

    Attributes
    ----------
    k : int
        1-based index.
    zero : float
        ``j_{nu,k}``.
    lam : float
        ``kappa**2 * zero**2``.
    gen_deriv : float
        Generalized derivative ``O_{alpha+beta+gamma}(Phi_k) > 0``.
    norm_check : float
        Quadrature value of ``||Phi_k||_beta`` (expected 1).
    jprime : float
        Signed ``J_nu'(j_k)``.
    """

    k: int
    zero: float
    lam: float
    gen_deriv: float
    norm_check: float
    jprime: float


def norm_constant(params: ProblemParams, mode: Mode) -> float:
    """``(2 kappa)^(1/2) / |J_nu'(j_k)|``."""
    return math.sqrt(2.0 * params.kappa) / abs(mode.jprime)


def rule_for(params: ProblemParams) -> QuadratureRule:
    """Default weighted-integral rule for ``params``."""
    return graded_rule(params.kappa)


def gen_derivative(params: ProblemParams, mode: Mode | None = None, *, zero: float | None = None,
                   jprime: float | None = None) -> float:
    """Generalized derivative of ``Phi_k`` at ``x = 0``.

    ``(2 kappa)^(1/2) (sqrt(mu_crit) + kappa nu) j^nu / (2^nu Gamma(nu+1) |J_nu'(j)|)``,
    assembled in log space.
    """
    if mode is not None:
        zero, jprime = mode.zero, mode.jprime
    nu, kap = params.nu, params.kappa
    logv = (
        0.5 * math.log(2.0 * kap)
        + math.log(params.sqrt_mu_crit + kap * nu)
        + nu * math.log(zero)
        - nu * math.log(2.0)
        - math.lgamma(nu + 1.0)
        - math.log(abs(jprime))
    )
    return math.exp(logv)


def _eigen_raw(params: ProblemParams, zero: float, jprime: float, x):
    x = np.asarray(x, dtype=float)
    c = math.sqrt(2.0 * params.kappa) / abs(jprime)
    e = 0.5 * (1.0 - params.alpha - params.beta)
    return c * x ** e * kernels.jv(params.nu, zero * x ** params.kappa)


def modes(params: ProblemParams, K: int, rule: QuadratureRule | None = None, tol: float = 1e-13) -> list[Mode]:
    """First ``K`` eigenmodes.

    Parameters
    ----------
    params : ProblemParams
    K : int
    rule : QuadratureRule, optional
        Used for the ``norm_check`` field; defaults to :func:`rule_for`.
    tol : float
        Zero refinement tolerance.
    """
    table = zeros(params.nu, int(K), tol)
    rule = rule or rule_for(params)
    out = []
    for k, j in enumerate(table.zeros, start=1):
        jp = float(eval_J_prime(params.nu, j))
        phi = _eigen_raw(params, j, jp, rule.x_nodes())
        nrm = math.sqrt(max(_weighted(params, rule, phi * phi), 0.0))
        out.append(Mode(k, j, params.kappa ** 2 * j * j, gen_derivative(params, zero=j, jprime=jp), nrm, jp))
    return out


def eigenfunction_eval(params: ProblemParams, mode: Mode, x):
    """``Phi_k(x)`` for ``x`` in ``[0, 1]`` (scalar or array)."""
    out = _eigen_raw(params, mode.zero, mode.jprime, x)
    return float(out) if np.ndim(x) == 0 else out


def eigenfunction_derivative(params: ProblemParams, mode: Mode, x):
    """``Phi_k'(x)`` for ``x`` in ``(0, 1]``."""
    x = np.asarray(x, dtype=float)
    nu, kap = params.nu, params.kappa
    e = 0.5 * (1.0 - params.alpha - params.beta)
    c = math.sqrt(2.0 * kap) / abs(mode.jprime)
    z = mode.zero * x ** kap
    out = c * x ** (e - 1.0) * ((e + kap * nu) * kernels.jv(nu, z) - kap * z * kernels.jv(nu + 1.0, z))
    return float(out) if out.ndim == 0 else out


def scaled_trace(params: ProblemParams, mode: Mode, x):
    """``x^(alpha+beta+gamma) Phi_k'(x)`` without the cancelling prefactors.

    The exponent collapses to ``-kappa nu``, so the value is
    ``c x^(-kappa nu) [(e + kappa nu) J_nu(z) - kappa z J_{nu+1}(z)]`` with
    ``z = j_k x^kappa``.
    """
    x = np.asarray(x, dtype=float)
    nu, kap = params.nu, params.kappa
    e = 0.5 * (1.0 - params.alpha - params.beta)
    c = math.sqrt(2.0 * kap) / abs(mode.jprime)
    z = mode.zero * x ** kap
    out = c * x ** (-kap * nu) * ((e + kap * nu) * kernels.jv(nu, z) - kap * z * kernels.jv(nu + 1.0, z))
    return float(out) if out.ndim == 0 else out


def gen_derivative_limit(params: ProblemParams, mode: Mode, xs: Sequence[float] = RICHARDSON_POINTS) -> float:
    """Limit of ``x^(alpha+beta+gamma) Phi_k'(x)`` as ``x -> 0+``.

    The scaled trace is a power series in ``s = x^(2 kappa)``; the samples at
    ``xs`` are extrapolated to ``s = 0`` with Neville's scheme.
    """
    s = [x ** (2.0 * params.kappa) for x in xs]
    p = [float(scaled_trace(params, mode, x)) for x in xs]
    n = len(s)
    for m in range(1, n):
        for i in range(n - m):
            p[i] = (-s[i + m] * p[i] + s[i] * p[i + 1]) / (s[i] - s[i + m])
    return p[0]


def classical_eigenfunction(params: ProblemParams, mode: Mode, y):
    """``Psi_k(y) = sqrt(2)/|J_nu'(j_k)| y^(1/2) J_nu(j_k y)``."""
    y = np.asarray(y, dtype=float)
    out = math.sqrt(2.0) / abs(mode.jprime) * np.sqrt(y) * kernels.jv(params.nu, mode.zero * y)
    return float(out) if out.ndim == 0 else out


def unitary_transform(params: ProblemParams, u: Callable) -> Callable:
    """``U u(x) = kappa^(1/2) x^(-alpha/4 - beta/2) u(x^kappa)``."""
    kap = params.kappa
    p = -params.alpha / 4.0 - params.beta / 2.0

    def Uu(x):
        x = np.asarray(x, dtype=float)
        return math.sqrt(kap) * x ** p * u(x ** kap)

    return Uu


def inverse_unitary_transform(params: ProblemParams, v: Callable) -> Callable:
    """``U^-1 v(y) = kappa^(-1/2) x^(alpha/4 + beta/2) v(x)`` with ``x = y^(1/kappa)``."""
    kap = params.kappa
    p = params.alpha / 4.0 + params.beta / 2.0

    def Uinv(y):
        x = np.asarray(y, dtype=float) ** (1.0 / kap)
        return x ** p * v(x) / math.sqrt(kap)

    return Uinv


def _weighted(params: ProblemParams, rule: QuadratureRule, uv: np.ndarray) -> float:
    # dx x^beta = kappa^-1 x^(alpha/2 + beta) dy with x = y^(1/kappa)
    x = rule.x_nodes()
    return rule.integrate(uv * x ** (0.5 * params.alpha + params.beta)) / params.kappa


def inner_product_beta(params: ProblemParams, u: Callable, v: Callable, rule: QuadratureRule | None = None) -> float:
    """``int_0^1 u v x^beta dx`` evaluated in the variable ``y = x^kappa``."""
    rule = rule or rule_for(params)
    x = rule.x_nodes()
    return _weighted(params, rule, np.asarray(u(x)) * np.asarray(v(x)))


def gram_matrix(params: ProblemParams, mode_list: Sequence[Mode], rule: QuadratureRule | None = None) -> np.ndarray:
    """``<Phi_k, Phi_l>_beta`` for the given modes."""
    rule = rule or rule_for(params)
    x = rule.x_nodes()
    phi = np.array([eigenfunction_eval(params, m, x) for m in mode_list])
    w = rule.weights * x ** (0.5 * params.alpha + params.beta) / params.kappa
    return (phi * w) @ phi.T


@dataclass(frozen=True)
class BumpFunction:
    """Polynomial ``x^p (1-x)^q T_n(2x-1)`` with its derivative.

    Attributes
    ----------
    p, q : int
        Vanishing orders at 0 and 1.
    n : int
        Chebyshev degree.
    """

    p: int
    q: int
    n: int

    def _poly(self):
        cheb = np.polynomial.Chebyshev.basis(self.n, domain=[0.0, 1.0]).convert(kind=np.polynomial.Polynomial)
        x = np.polynomial.Polynomial([0.0, 1.0])
        return x ** self.p * (1.0 - x) ** self.q * cheb

    def __call__(self, x):
        return self._poly()(np.asarray(x, dtype=float))

    def deriv(self, x):
        return self._poly().deriv()(np.asarray(x, dtype=float))


def bump_family(params: ProblemParams, count: int = 10, q: int = 2) -> list[BumpFunction]:
    """Test functions vanishing at both ends, admissible for the weighted Hardy setting.

    The order at 0 exceeds ``sqrt(mu_crit)`` so that ``x^(alpha+beta) u_x^2``
    and the boundary terms of the weak form stay integrable.
    """
    p = max(2, int(math.floor(params.sqrt_mu_crit)) + 2)
    return [BumpFunction(p if n % 2 == 0 else p - 1, q if n % 3 else q - 1, n) for n in range(count)]


def hardy_check(params: ProblemParams, u: Callable, du: Callable, rule: QuadratureRule | None = None):
    """Both sides of the generalized Hardy inequality.

    Returns
    -------
    (lhs, rhs) : tuple of float
        ``mu_crit * int u^2 x^(alpha+beta-2)`` and ``int x^(alpha+beta) u_x^2``.
    """
    rule = rule or x_rule()
    x = rule.nodes
    ab = params.alpha + params.beta
    uv, dv = np.asarray(u(x), dtype=float), np.asarray(du(x), dtype=float)
    lhs = params.mu_crit * rule.integrate(uv * uv * x ** (ab - 2.0))
    rhs = rule.integrate(x ** ab * dv * dv)
    return lhs, rhs


def poincare_check(params: ProblemParams, u: Callable, du: Callable, rule: QuadratureRule | None = None):
    """Both sides of the weighted Poincare inequality.

    Returns
    -------
    (lhs, rhs) : tuple of float
        ``int u^2 x^beta`` and ``((2-alpha)(1-alpha-beta))^-1 int x^(alpha+beta) u_x^2``.
    """
    rule = rule or x_rule()
    x = rule.nodes
    ab = params.alpha + params.beta
    uv, dv = np.asarray(u(x), dtype=float), np.asarray(du(x), dtype=float)
    lhs = rule.integrate(uv * uv * x ** params.beta)
    rhs = rule.integrate(x ** ab * dv * dv) / ((2.0 - params.alpha) * (1.0 - ab))
    return lhs, rhs


def weak_residual(params: ProblemParams, mode: Mode, v: Callable, dv: Callable,
                  rule: QuadratureRule | None = None) -> float:
    """Weak eigen-equation residual against a test function ``v``.

    ``int x^(a+b) Phi' v' - mu int x^(a+b-2) Phi v - lambda int Phi v x^beta``.
    """
    rule = rule or x_rule()
    x = rule.nodes
    ab = params.alpha + params.beta
    phi = eigenfunction_eval(params, mode, x)
    dphi = eigenfunction_derivative(params, mode, x)
    vv, dvv = np.asarray(v(x), dtype=float), np.asarray(dv(x), dtype=float)
    a = rule.integrate(x ** ab * dphi * dvv)
    b = rule.integrate(x ** (ab - 2.0) * phi * vv)
    c = rule.integrate(phi * vv * x ** params.beta)
    return a - params.mu * b - mode.lam * c
