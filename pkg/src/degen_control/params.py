"""Parameter algebra for the degenerate singular parabolic problem.

The operator is ``-(x^alpha u_x)_x - beta x^(alpha-1) u_x - mu x^(alpha-2) u``
on (0, 1), controlled through the weighted Neumann trace at ``x = 0``.
Admissibility and every derived constant used downstream live here.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "AdmissibilityError",
    "NU_MAX",
    "ProblemParams",
    "critical_coefficient",
    "derive",
]

#: Largest Bessel order accepted; beyond it the mode counts become meaningless.
NU_MAX = 150.0


class AdmissibilityError(ValueError):
    """Raised when (alpha, beta, mu, T) violates an admissibility constraint.

    Attributes
    ----------
    constraint : str
        Short tag of the violated condition, e.g. ``"alpha+beta<1"``.
    """

    def __init__(self, constraint: str, message: str):
        super().__init__(message)
        self.constraint = constraint


def critical_coefficient(delta: float) -> float:
    """Critical potential strength ``(1 - delta)**2 / 4``.

    Parameters
    ----------
    delta : float
        Combined exponent, usually ``alpha + beta``.

    Returns
    -------
    float
    """
    return (1.0 - delta) ** 2 / 4.0


@dataclass(frozen=True)
class ProblemParams:
    """Admissible parameters and their derived constants.

    Attributes
    ----------
    alpha, beta, mu : float
        Degeneracy, drift and potential coefficients.
    horizon_T : float
        Control horizon.
    kappa : float
        ``(2 - alpha) / 2``.
    nu : float
        Bessel order ``sqrt(mu_crit - mu) / kappa``.
    gamma : float
        Boundary weight shift ``sqrt(mu_crit) - sqrt(mu_crit - mu)``.
    mu_crit : float
        ``(1 - alpha - beta)**2 / 4``.
    """

    alpha: float
    beta: float
    mu: float
    horizon_T: float
    kappa: float
    nu: float
    gamma: float
    mu_crit: float

    @property
    def T(self) -> float:
        return self.horizon_T

    @property
    def sqrt_mu_crit(self) -> float:
        """``sqrt(mu_crit) = (1 - alpha - beta) / 2``."""
        return (1.0 - self.alpha - self.beta) / 2.0

    @property
    def sqrt_gap(self) -> float:
        """``sqrt(mu_crit - mu) = kappa * nu``."""
        return math.sqrt(self.mu_crit - self.mu)

    @property
    def trace_exponent(self) -> float:
        """Exponent ``alpha + beta + gamma`` of the generalized derivative."""
        return self.alpha + self.beta + self.gamma

    def with_horizon(self, T: float) -> "ProblemParams":
        """Same coefficients, different horizon."""
        return derive(self.alpha, self.beta, self.mu, T)


def derive(alpha: float, beta: float, mu: float, T: float = 1.0) -> ProblemParams:
    """Validate ``(alpha, beta, mu, T)`` and compute the derived constants.

    Parameters
    ----------
    alpha : float
        Degeneracy exponent, ``0 <= alpha < 2``.
    beta : float
        Drift exponent with ``alpha + beta < 1``.
    mu : float
        Potential strength, strictly below ``critical_coefficient(alpha + beta)``.
    T : float
        Horizon, ``T > 0``.

    Returns
    -------
    ProblemParams

    Raises
    ------
    AdmissibilityError
        Naming the violated constraint.
    """
    alpha, beta, mu, T = float(alpha), float(beta), float(mu), float(T)
    for name, v in (("alpha", alpha), ("beta", beta), ("mu", mu), ("T", T)):
        if not math.isfinite(v):
            raise AdmissibilityError(name, f"{name} must be finite, got {v!r}")
    if not 0.0 <= alpha < 2.0:
        raise AdmissibilityError(
            "0<=alpha<2", f"condition 0 <= alpha < 2 violated: alpha = {alpha}"
        )
    if not alpha + beta < 1.0:
        raise AdmissibilityError(
            "alpha+beta<1", f"condition alpha + beta < 1 violated: alpha + beta = {alpha + beta}"
        )
    mu_crit = critical_coefficient(alpha + beta)
    if not mu < mu_crit:
        raise AdmissibilityError(
            "mu<mu(alpha+beta)",
            f"condition mu < mu(alpha+beta) = {mu_crit} violated: mu = {mu}",
        )
    if not T > 0.0:
        raise AdmissibilityError("T>0", f"horizon must satisfy T > 0, got T = {T}")
    kappa = (2.0 - alpha) / 2.0
    root_gap = math.sqrt(mu_crit - mu)
    nu = root_gap / kappa
    if nu > NU_MAX:
        raise AdmissibilityError(
            "nu<=150",
            f"Bessel order nu = {nu:.6g} exceeds the supported cap {NU_MAX:g}; "
            "mu is too negative",
        )
    # conjugate form keeps gamma = 0 exact at mu = 0 and avoids cancellation
    gamma = mu / (math.sqrt(mu_crit) + root_gap)
    return ProblemParams(alpha, beta, mu, T, kappa, nu, gamma, mu_crit)
