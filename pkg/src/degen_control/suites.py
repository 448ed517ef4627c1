"""Property suites run by ``degen-control verify`` and the acceptance tests.

Each suite returns a :class:`SuiteResult` whose ``checks`` map a check name
to ``(passed, value, tolerance)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import moment
from .bessel import amplitude_gap, eval_J, eval_J_prime, mcmahon_zeros, zeros
from .params import ProblemParams
from .spectrum import (
    bump_family,
    classical_eigenfunction,
    eigenfunction_eval,
    gen_derivative_limit,
    gram_matrix,
    hardy_check,
    inner_product_beta,
    modes,
    poincare_check,
    unitary_transform,
)

__all__ = [
    "SuiteResult",
    "bessel_suite",
    "classical_suite",
    "gen_derivative_suite",
    "hardy_poincare_suite",
    "lambda_suite",
    "multiplier_suite",
    "orthonormality_suite",
    "unitary_suite",
]


@dataclass
class SuiteResult:
    name: str
    checks: dict = field(default_factory=dict)
    info: dict = field(default_factory=dict)

    def add(self, key: str, passed: bool, value: float, tol: float):
        self.checks[key] = (bool(passed), float(value), float(tol))

    def note(self, key: str, value: float):
        """Recorded value that does not enter ``passed``."""
        self.info[key] = float(value)

    @property
    def passed(self) -> bool:
        return all(v[0] for v in self.checks.values())

    def as_dict(self) -> dict:
        return {
            "passed": self.passed,
            "checks": {k: {"passed": v[0], "value": v[1], "tol": v[2]} for k, v in self.checks.items()},
            "info": dict(self.info),
        }


def bessel_suite(nus=(0.0, 0.25, 0.5, 1.0, 2.0), K: int = 40, seed: int = 8) -> SuiteResult:
    """Zero bounds, spacing monotonicity, recurrence, amplitude gap, closed forms."""
    res = SuiteResult("bessel")
    for nu in nus:
        z = zeros(nu, K).as_array()
        k = np.arange(1, K + 1)
        low = (k - 0.25) * math.pi if nu <= 0.5 else (k - 0.125) * math.pi
        res.add(f"zero_lower_bound_nu{nu:g}", bool(np.all(z >= low - 1e-12)), float(np.min(z - low)), 0.0)
        d = np.diff(z)
        if nu > 0.5:
            ok, v = bool(np.all(np.diff(d) < 0)), float(np.max(np.diff(d)))
        elif nu < 0.5:
            ok, v = bool(np.all(np.diff(d) > 0)), float(-np.min(np.diff(d)))
        else:
            v = float(np.max(np.abs(d - math.pi)))
            ok = v <= 1e-11
        res.add(f"spacing_monotone_nu{nu:g}", ok, v, 0.0)
        g10 = abs(amplitude_gap(nu, z[9]))
        g40 = abs(amplitude_gap(nu, z[min(39, K - 1)]))
        # the gap vanishes identically at nu = 1/2
        slack = 1e-14 if nu == 0.5 else 0.0
        ok = g40 <= g10 + slack if slack else g40 < g10
        res.add(f"amplitude_gap_shrinks_nu{nu:g}", ok, g40 - g10, slack)
    rng = np.random.default_rng(seed)
    nu = rng.uniform(0.0, 5.0, 500)
    x = rng.uniform(1e-6, 50.0, 500)
    r = np.array([abs(xi * eval_J_prime(n, xi) - n * eval_J(n, xi) + xi * eval_J(n + 1.0, xi))
                  for n, xi in zip(nu, x)])
    res.add("recurrence_residual", r.max() <= 1e-10, r.max(), 1e-10)
    xs = np.linspace(0.1, 60.0, 2000)
    half = np.max(np.abs(eval_J(0.5, xs) - np.sqrt(2.0 / (math.pi * xs)) * np.sin(xs)))
    res.add("half_integer_closed_form", half <= 1e-11, half, 1e-11)
    return res


def classical_suite(K: int = 12) -> SuiteResult:
    """Eigenvalues ``k^2 pi^2`` and eigenfunctions ``sqrt2 sin(k pi x)`` at the classical point."""
    from .params import derive

    p = derive(0.0, 0.0, 0.0, 1.0)
    ms = modes(p, K)
    lam_err = max(abs(m.lam - (m.k * math.pi) ** 2) for m in ms)
    x = np.linspace(1e-3, 1.0 - 1e-3, 200)
    phi_err = max(float(np.max(np.abs(eigenfunction_eval(p, m, x) - math.sqrt(2.0) * np.sin(m.k * math.pi * x))))
                  for m in ms)
    res = SuiteResult("classical")
    res.add("eigenvalues", lam_err <= 1e-9, lam_err, 1e-9)
    res.add("eigenfunctions", phi_err <= 1e-8, phi_err, 1e-8)
    return res


def orthonormality_suite(params: ProblemParams, K: int = 12, tol: float = 1e-7) -> SuiteResult:
    ms = modes(params, K)
    G = gram_matrix(params, ms)
    dev = float(np.max(np.abs(G - np.eye(K))))
    res = SuiteResult("orthonormality")
    res.add("gram_max_deviation", dev <= tol, dev, tol)
    return res


def hardy_poincare_suite(params: ProblemParams, count: int = 10, tol: float = 1e-10) -> SuiteResult:
    res = SuiteResult("hardy_poincare")
    for i, u in enumerate(bump_family(params, count)):
        lh, rh = hardy_check(params, u, u.deriv)
        res.add(f"hardy_{i}", lh <= rh + tol, lh - rh, tol)
        lp, rp = poincare_check(params, u, u.deriv)
        res.add(f"poincare_{i}", lp <= rp + tol, lp - rp, tol)
    return res


def _smooth_functions(count: int, seed: int):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        c = rng.normal(size=6) / (1.0 + np.arange(6)) ** 2
        out.append(np.polynomial.Chebyshev(c, domain=[0.0, 1.0]))
    return out


def unitary_suite(params: ProblemParams, K: int = 8, seed: int = 9) -> SuiteResult:
    """``U Psi_k = Phi_k`` on a 200-point grid and the isometry on smooth functions."""
    res = SuiteResult("unitary")
    ms = modes(params, K)
    x = np.linspace(1e-3, 1.0 - 1e-3, 200)
    gap = 0.0
    for m in ms:
        U = unitary_transform(params, lambda y, m=m: classical_eigenfunction(params, m, y))
        gap = max(gap, float(np.max(np.abs(U(x) - eigenfunction_eval(params, m, x)))))
    res.add("U_Psi_equals_Phi", gap <= 1e-9, gap, 1e-9)
    from .params import derive
    from .quadrature import graded_rule

    flat = derive(0.0, 0.0, 0.0, 1.0)
    worst = 0.0
    for g in _smooth_functions(10, seed):
        Ug = unitary_transform(params, g)
        lhs = inner_product_beta(params, Ug, Ug)
        rhs = inner_product_beta(flat, g, g, graded_rule(1.0))
        worst = max(worst, abs(lhs - rhs) / max(rhs, 1e-300))
    res.add("isometry_residual", worst <= 1e-8, worst, 1e-8)
    return res


def gen_derivative_suite(params: ProblemParams, K: int = 4) -> SuiteResult:
    """Closed-form generalized derivative versus the extrapolated limit, and the combined identity."""
    res = SuiteResult("gen_derivative")
    ms = modes(params, K)
    worst = 0.0
    for m in ms:
        lim = gen_derivative_limit(params, m)
        worst = max(worst, abs(lim - m.gen_deriv) / m.gen_deriv)
    res.add("richardson_limit", worst <= 1e-6, worst, 1e-6)
    ident = 0.0
    for m in ms:
        lhs = m.gen_deriv * m.lam * moment.lambda_prime_at_pole(params, m)
        rhs = 2 ** -0.5 * math.sqrt(params.kappa) * (params.sqrt_mu_crit + params.kappa * params.nu) * m.zero
        ident = max(ident, abs(lhs - rhs) / rhs)
    res.add("combined_identity", ident <= 1e-10, ident, 1e-10)
    return res


def product_zeros(nu: float, K: int, exact: int = 400) -> np.ndarray:
    """Refined zeros up to ``exact``, four-term McMahon values beyond."""
    head = zeros(nu, min(K, exact)).as_array()
    if K <= exact:
        return head
    return np.concatenate([head, mcmahon_zeros(nu, np.arange(exact + 1, K + 1))])


def lambda_suite(params: ProblemParams, K_product: int = 100000) -> SuiteResult:
    """Closed form of ``Lambda`` against the truncated product, zeros at the nodes, growth bound."""
    res = SuiteResult("lambda")
    z = product_zeros(params.nu, K_product)
    for w in (1.0, 1.0 + 1.0j, -3.0):
        a = moment.lambda_eval(params, w)
        # the bare product misses exp(i w sum_{k>K} 1/lambda_k), about |w|/(kappa pi)^2/K
        b = moment.lambda_product(params, w, z, tail=False)
        res.note(f"bare_product_gap_z={w}", abs(a - b))
        b = moment.lambda_product(params, w, z, tail=True)
        res.add(f"product_tail_z={w}", abs(a - b) <= 1e-9, abs(a - b), 1e-9)
    ms = modes(params, 6)
    worst = max(abs(moment.lambda_eval(params, 1j * m.lam)) for m in ms)
    res.add("zeros_at_nodes", worst <= 1e-10, worst, 1e-10)
    worst = -math.inf
    for x in np.logspace(-2, 6, 200):
        worst = max(worst, moment.lambda_log(params, x).real - math.sqrt(x) / (math.sqrt(2.0) * params.kappa))
    res.add("growth_real", worst <= 1e-10, worst, 1e-10)
    return res


def multiplier_suite(params: ProblemParams, delta: float = moment.DEFAULT_DELTA, seed: int = 30) -> SuiteResult:
    """``H(0) = 1``, ``|H(x)| <= 1`` on the real line, the lower bound on the imaginary axis."""
    res = SuiteResult("multiplier")
    m = moment.make_multiplier(params, delta)
    h0 = abs(moment.multiplier_eval(m, 0.0) - 1.0)
    res.add("H0_is_one", h0 <= 1e-12, h0, 1e-12)
    xs = np.linspace(-200.0, 200.0, 100)
    top = max(moment.multiplier_log(m, x).real for x in xs)
    res.add("real_axis_bounded", top <= 1e-12, top, 1e-12)
    ms = modes(params, 3)
    s = math.sqrt(m.theta + 1.0)
    worst = -math.inf
    for md in (ms[0], ms[2]):
        for x in (md.lam, -md.lam):
            worst = max(worst, m.a * abs(x) / (2 * s) - math.log(11 * s) - moment.multiplier_log(m, 1j * x).real)
    res.add("imag_axis_lower_bound", worst <= 0.0, worst, 0.0)
    rng = np.random.default_rng(seed)
    worst = -math.inf
    for _ in range(100):
        z = complex(10.0 ** rng.uniform(-1, 4) * np.exp(1j * rng.uniform(-math.pi, math.pi)))
        worst = max(worst, moment.multiplier_log(m, z).real - m.a * abs(z.imag))
    res.add("exponential_type_bound", worst <= 1e-10, worst, 1e-10)
    return res
