"""Cost-of-control bounds and numerical checks of the inequality chain.

Upper bound::

    K(T) <= c M(T, alpha, nu, delta) T^(1/2) kappa^(-1/2)
            / (sqrt(mu_c) + sqrt(mu_c - mu)) * exp(-T kappa^2 j_1^2 / 2)

    M = (1 + 1/((1-delta) kappa^2 T))
        * (exp(1/(sqrt 2 kappa)) + delta^-3 exp(3/((1-delta) kappa^2 T)))
        * exp(-(1-delta)^(3/2) T^(3/2) kappa^3 j_1^2 / (8 (1+T)^(1/2)))

Lower bound (constant 1)::

    2^nu Gamma(nu+1) |J_nu'(j_1)| exp((1/2 - log 2/pi) j_2)
    / ((2 T kappa)^(1/2) (sqrt(mu_c) + sqrt(mu_c - mu)) j_1^nu)
    * exp(-(j_1^2 + j_2^2/2) kappa^2 T)

Everything is assembled in log space.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import moment
from .bessel import eval_J_prime, zeros
from .evolution import ControlSignal
from .params import ProblemParams

__all__ = [
    "ChainItem",
    "CostReport",
    "ProofChainReport",
    "calibrate_constant",
    "control_chain_bound",
    "cost_report",
    "family_constant",
    "initial_first_mode",
    "log_lower_bound",
    "log_upper_bound",
    "lower_bound",
    "psi_sup_bound",
    "upper_bound",
    "upper_M",
    "verify_proof_chain",
]


def _first_zeros(params: ProblemParams):
    z = zeros(params.nu, 2)
    return z[0], z[1]


def _denominator(params: ProblemParams) -> float:
    return params.sqrt_mu_crit + params.sqrt_gap


# ---------------------------------------------------------------- bounds

def upper_M(params: ProblemParams, delta: float, T: float | None = None) -> float:
    """``log M(T, alpha, nu, delta)``."""
    T = params.T if T is None else float(T)
    k, j1 = params.kappa, _first_zeros(params)[0]
    q = (1.0 - delta) * k * k * T
    first = math.log1p(1.0 / q)
    second = np.logaddexp(1.0 / (math.sqrt(2.0) * k), -3.0 * math.log(delta) + 3.0 / q)
    third = -((1.0 - delta) ** 1.5) * T ** 1.5 * k ** 3 * j1 * j1 / (8.0 * math.sqrt(1.0 + T))
    return float(first + second + third)


def log_upper_bound(params: ProblemParams, delta: float = moment.DEFAULT_DELTA, c_cal: float = 1.0,
                    T: float | None = None) -> float:
    """Natural log of :func:`upper_bound`."""
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    if not c_cal > 0.0:
        raise ValueError("c_cal must be positive")
    T = params.T if T is None else float(T)
    k, j1 = params.kappa, _first_zeros(params)[0]
    return (
        math.log(c_cal) + upper_M(params, delta, T) + 0.5 * math.log(T) - 0.5 * math.log(k)
        - math.log(_denominator(params)) - 0.5 * T * k * k * j1 * j1
    )


def upper_bound(params: ProblemParams, delta: float = moment.DEFAULT_DELTA, c_cal: float = 1.0,
                T: float | None = None) -> float:
    """Upper bound on the control cost with calibration constant ``c_cal``.

    Returns ``inf`` when the value leaves the double range.
    """
    lg = log_upper_bound(params, delta, c_cal, T)
    return math.exp(lg) if lg < 709.0 else math.inf


def log_lower_bound(params: ProblemParams, T: float | None = None) -> float:
    """Natural log of :func:`lower_bound`."""
    T = params.T if T is None else float(T)
    nu, k = params.nu, params.kappa
    j1, j2 = _first_zeros(params)
    return (
        nu * math.log(2.0) + math.lgamma(nu + 1.0) + math.log(abs(eval_J_prime(nu, j1)))
        + (0.5 - math.log(2.0) / math.pi) * j2
        - 0.5 * math.log(2.0 * T * k) - math.log(_denominator(params)) - nu * math.log(j1)
        - (j1 * j1 + 0.5 * j2 * j2) * k * k * T
    )


def lower_bound(params: ProblemParams, T: float | None = None) -> float:
    """Lower bound on the control cost with the constant set to 1."""
    return math.exp(log_lower_bound(params, T))


def family_constant(params: ProblemParams, delta: float = moment.DEFAULT_DELTA, c: float = 1.0,
                    T: float | None = None) -> float:
    """``log C(T, alpha, delta)`` of the L1 bound on ``F_k``.

    ``C = c sqrt(theta+1) (exp(1/(sqrt 2 kappa)) + sqrt(theta+1) kappa^2 delta^-3 exp(3 theta / 4))``.
    """
    m = moment.make_multiplier(params, delta, T)
    k = params.kappa
    s = math.sqrt(m.theta + 1.0)
    inner = np.logaddexp(1.0 / (math.sqrt(2.0) * k),
                         math.log(s * k * k) - 3.0 * math.log(delta) + 0.75 * m.theta)
    return float(math.log(c) + math.log(s) + inner)


def psi_sup_bound(params: ProblemParams, mode, delta: float = moment.DEFAULT_DELTA, c: float = 1.0,
                  T: float | None = None) -> float:
    """``log`` of ``C/(lambda_k |Lambda'(i lambda_k)|) exp(T lambda_k/2 - a lambda_k/(2 sqrt(theta+1)))``."""
    T = params.T if T is None else float(T)
    m = moment.make_multiplier(params, delta, T)
    lam = mode.lam
    return (
        family_constant(params, delta, c, T) - math.log(lam)
        - math.log(moment.lambda_prime_at_pole(params, mode))
        + T * lam / 2.0 - m.a * lam / (2.0 * math.sqrt(m.theta + 1.0))
    )


def control_chain_bound(params: ProblemParams, u0_norm: float, delta: float = moment.DEFAULT_DELTA,
                        c: float = 1.0, T: float | None = None) -> float:
    """``log`` of the final sup-norm bound on the control for ``||u_0||_beta = u0_norm``."""
    T = params.T if T is None else float(T)
    m = moment.make_multiplier(params, delta, T)
    j1 = _first_zeros(params)[0]
    lam1 = params.kappa ** 2 * j1 * j1
    return (
        family_constant(params, delta, c, T) - 0.5 * math.log(params.kappa) - math.log(_denominator(params))
        - T * lam1 / 2.0 - m.a * lam1 / (2.0 * math.sqrt(m.theta + 1.0)) + math.log(u0_norm)
    )


def calibrate_constant(params: ProblemParams, family, mode_list, delta: float | None = None) -> float:
    """Smallest ``c`` for which the sampled ``||psi_k||_inf`` obey their bound, all ``k``."""
    delta = family.delta_param if delta is None else delta
    worst = -math.inf
    for k in range(1, family.K + 1):
        worst = max(worst, family.psi_sup_log(k) - psi_sup_bound(params, mode_list[k - 1], delta, 1.0, family.T))
    return math.exp(worst)


def initial_first_mode(params: ProblemParams, mode_list) -> np.ndarray:
    """Coefficients of ``u_0 = |J_nu'(j_1)| (2 kappa)^(-1/2) Phi_1``."""
    a = np.zeros(len(mode_list))
    a[0] = abs(mode_list[0].jprime) / math.sqrt(2.0 * params.kappa)
    return a


# ---------------------------------------------------------------- reports

@dataclass(frozen=True)
class CostReport:
    """Bounds and achieved control norms of one run."""

    upper_value: float
    lower_value: float
    achieved_L2: float
    achieved_sup: float
    u0_norm: float
    delta_param: float
    c_cal: float
    params: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return asdict(self)


def cost_report(params: ProblemParams, f: ControlSignal, u0_norm: float, delta: float = moment.DEFAULT_DELTA,
                c_cal: float = 1.0) -> CostReport:
    return CostReport(
        upper_value=upper_bound(params, delta, c_cal, f.T),
        lower_value=lower_bound(params, f.T),
        achieved_L2=f.l2_norm(),
        achieved_sup=f.sup_norm(),
        u0_norm=float(u0_norm),
        delta_param=float(delta),
        c_cal=float(c_cal),
        params=dict(alpha=params.alpha, beta=params.beta, mu=params.mu, T=f.T,
                    kappa=params.kappa, nu=params.nu, gamma=params.gamma, mu_crit=params.mu_crit),
    )


@dataclass(frozen=True)
class ChainItem:
    """One checked inequality; ``witness`` is the worst sample found."""

    name: str
    passed: bool
    worst_margin: float
    witness: str
    detail: str = ""


@dataclass
class ProofChainReport:
    items: list

    @property
    def passed(self) -> bool:
        return all(it.passed for it in self.items)

    def failures(self) -> list:
        return [it for it in self.items if not it.passed]

    def as_list(self) -> list:
        return [asdict(it) for it in self.items]


def _check_lambda_growth(params, backend=None):
    xs = np.logspace(-2, 6, 200)
    worst, wit = -math.inf, ""
    for x in xs:
        for sx in (x, -x):
            lg = moment.lambda_log(params, sx, backend).real
            bound = math.sqrt(abs(sx)) / (math.sqrt(2.0) * params.kappa)
            margin = lg - bound
            if margin > worst:
                worst, wit = margin, f"x={sx:.6g}"
    rng = np.random.default_rng(26)
    cworst, cwit = -math.inf, ""
    for _ in range(100):
        r = 10.0 ** rng.uniform(-1, 5)
        z = r * np.exp(1j * rng.uniform(-math.pi, math.pi))
        margin = moment.lambda_log(params, complex(z), backend).real - math.sqrt(abs(z)) / params.kappa
        if margin > cworst:
            cworst, cwit = margin, f"z={complex(z):.6g}"
    tol = 1e-10
    return [
        ChainItem("lambda_growth_real", bool(worst <= tol), worst, wit, "log|Lambda(x)| - sqrt|x|/(sqrt2 kappa)"),
        ChainItem("lambda_growth_complex", bool(cworst <= tol), cworst, cwit, "log|Lambda(z)| - sqrt|z|/kappa"),
    ]


def _check_multiplier(params, mode_list, delta, T):
    m = moment.make_multiplier(params, delta, T)
    s = math.sqrt(m.theta + 1.0)
    worst, wit = -math.inf, ""
    picks = [mode_list[0]] + ([mode_list[2]] if len(mode_list) > 2 else [])
    for md in picks:
        for x in (md.lam, -md.lam):
            lg = moment.multiplier_log(m, 1j * x).real
            low = m.a * abs(x) / (2.0 * s) - math.log(11.0 * s)
            margin = low - lg
            if margin > worst:
                worst, wit = margin, f"x={x:.6g}"
    rng = np.random.default_rng(30)
    uworst, uwit = -math.inf, ""
    for _ in range(100):
        r = 10.0 ** rng.uniform(-1, 4)
        z = complex(r * np.exp(1j * rng.uniform(-math.pi, math.pi)))
        margin = moment.multiplier_log(m, z).real - m.a * abs(z.imag)
        if margin > uworst:
            uworst, uwit = margin, f"z={z:.6g}"
    tol = 1e-10
    return [
        ChainItem("multiplier_lower_imag", bool(worst <= tol), worst, wit, "H(ix) >= exp(a|x|/(2 sqrt(theta+1)))/(11 sqrt(theta+1))"),
        ChainItem("multiplier_upper_complex", bool(uworst <= tol), uworst, uwit, "|H(z)| <= exp(a |Im z|)"),
    ]


def _check_moments(params, mode_list, coeffs, delta, T, engine, family=None):
    """Moments ``int f e^{lambda_l t}`` of the synthesized series, in ball arithmetic.

    ``int psi_k e^{-lambda_l (T-t)} = e^{(lambda_k - lambda_l) T/2} F_k(i lambda_l)``,
    so the moments follow from the values of ``F_k`` at the nodes.
    """
    bk = engine.bk
    K = len(engine.modes)
    a = np.zeros(K)
    n = min(K, len(coeffs))
    a[:n] = coeffs[:n]
    O = [md.gen_deriv for md in mode_list[:K]]
    jp1 = abs(mode_list[0].jprime)
    nu, k = params.nu, params.kappa
    j1 = mode_list[0].zero
    rhs1 = -math.exp(nu * math.log(2.0) + math.lgamma(nu + 1.0) + 2.0 * math.log(jp1)
                     - math.log(2.0 * k * (params.sqrt_mu_crit + k * nu)) - nu * math.log(j1))
    items = []
    with bk.workprec(engine.prec):
        lam_at = [bk.hyp0f1(engine.b, -engine.c * lk) for lk in engine.lam]
        for l in range(K):
            tot = bk.cplx(0)
            for kk in range(K):
                if a[kk] == 0.0:
                    continue
                if kk == l:
                    Fkl = bk.cplx(1)
                else:
                    num = lam_at[l] * engine.H_pole[l]
                    den = engine.lambda_prime[kk] * bk.cplx(0, engine.lam[l] - engine.lam[kk]) * engine.H_pole[kk]
                    Fkl = num / den
                w = bk.exp((engine.lam[l] - engine.lam[kk]) * engine.T / 2)
                tot += -bk.real(a[kk] / O[kk]) * w * Fkl
            val = bk.to_complex(tot)
            if l == 0:
                err = abs(val - rhs1) / abs(rhs1)
                items.append(ChainItem(f"moment_identity_k{l + 1}", bool(err <= 1e-6), err,
                                       f"value={val.real:.12g}", f"relative error against {rhs1:.12g}"))
                if family is not None and a[0] != 0.0:
                    # same moment through the sampled series: -a_1/O_1 * gram_11 plus the other rows
                    ser = -sum(a[kk] / O[kk] * math.exp((engine_lam(engine, 0) - engine_lam(engine, kk)) * T)
                               * family.gram[kk, 0] for kk in range(K) if a[kk] != 0.0)
                    serr = abs(ser - rhs1) / abs(rhs1)
                    items.append(ChainItem("moment_identity_k1_series", bool(serr <= 1e-6), serr,
                                           f"value={ser:.12g}", "through the sampled Gram column"))
            else:
                err = abs(val)
                items.append(ChainItem(f"moment_identity_k{l + 1}", bool(err <= 1e-6), err,
                                       f"value={val.real:.3g}", "absolute, expected 0"))
    return items


def engine_lam(engine, i: int) -> float:
    return engine.bk.to_float(engine.lam[i])


def verify_proof_chain(params: ProblemParams, family, mode_list, delta: float | None = None,
                       control: ControlSignal | None = None, coefficients=None, engine=None,
                       backend=None) -> ProofChainReport:
    """Check the inequalities the cost bounds rest on.

    Items
    -----
    * growth of ``Lambda`` on 200 log-spaced reals up to ``1e6`` and on
      100 complex samples;
    * lower bound of ``H`` at ``+-lambda_1, +-lambda_3`` and the upper bound
      ``|H(z)| <= exp(a|Im z|)`` at 100 complex samples;
    * Kronecker property of the ``F_k`` at the nodes (``<= 1e-8``);
    * the moment identity of the first-mode initial state, ``k = 1..K``;
    * ``||f||_{L^2} >= lower_bound`` for that state, both per unit
      ``||u_0||_beta`` and literally.

    Parameters
    ----------
    family : BiorthogonalFamily
    control : ControlSignal, optional
        The control synthesized for ``coefficients``; the moment and lower
        bound items need it.
    coefficients : array_like, optional
        Initial state, default the first-mode state.
    engine : MomentEngine, optional
        Ball-arithmetic engine at the family's precision; built if omitted.
    """
    from .family import MomentEngine

    delta = family.delta_param if delta is None else delta
    T = family.T
    K = family.K
    items = []
    items += _check_lambda_growth(params, backend)
    items += _check_multiplier(params, mode_list, delta, T)
    if engine is None:
        engine = MomentEngine(params, mode_list[:K], T, delta, prec=family.precision_bits, backend=backend)
    kron = engine.kronecker()
    kmax = float(kron.max()) if K > 1 else 0.0
    idx = np.unravel_index(int(np.argmax(kron)), kron.shape)
    items.append(ChainItem("kronecker", bool(kmax <= 1e-8), kmax, f"k={idx[0] + 1},l={idx[1] + 1}",
                           "|F_k(i lambda_l)| for k != l"))
    if coefficients is None:
        coefficients = initial_first_mode(params, mode_list[:K])
    coefficients = np.asarray(coefficients, dtype=float)
    items += _check_moments(params, mode_list, coefficients, delta, T, engine, family)
    if control is not None:
        u0n = float(np.linalg.norm(coefficients))
        low = lower_bound(params, T)
        l2 = control.l2_norm()
        items.append(ChainItem("lower_bound_per_unit_state", bool(l2 / u0n >= low), low - l2 / u0n,
                               f"L2/|u0|={l2 / u0n:.6g}", f"lower bound {low:.6g}"))
        items.append(ChainItem("lower_bound_literal", bool(l2 >= low), low - l2, f"L2={l2:.6g}",
                               f"lower bound {low:.6g}"))
    return ProofChainReport(items)
