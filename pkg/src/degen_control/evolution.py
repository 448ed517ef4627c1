"""Coefficient-space dynamics: free semigroup, controlled weak solution, norms.

A state is its coordinate vector in the orthonormal eigenbasis ``Phi_k``.
Testing the weak formulation with ``z = Phi_k`` gives, mode by mode,

    c_k(tau) = exp(-lambda_k tau) a_k + O_k int_0^tau f(t) exp(-lambda_k (tau - t)) dt,

with ``O_k`` the generalized derivative of ``Phi_k`` at 0. The integral is the
composite trapezoid rule on the signal grid.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .spectrum import Mode, eigenfunction_eval

__all__ = [
    "ControlSignal",
    "State",
    "controlled_evolve",
    "free_evolve",
    "negative_norm",
    "wellposedness_gap",
]


@dataclass(frozen=True)
class State:
    """Truncated coordinates ``a_1 .. a_K`` in the ``Phi_k`` basis.

    Attributes
    ----------
    coefficients : ndarray
    """

    coefficients: np.ndarray

    def __post_init__(self):
        c = np.array(self.coefficients, dtype=float)
        if c.ndim != 1 or c.size < 1:
            raise ValueError("a state needs a non-empty coefficient vector")
        c.flags.writeable = False
        object.__setattr__(self, "coefficients", c)

    @property
    def K(self) -> int:
        return self.coefficients.size

    def norm(self) -> float:
        """``||u||_beta`` by Parseval."""
        return float(np.linalg.norm(self.coefficients))

    def padded(self, K: int) -> np.ndarray:
        """Coefficients extended by zeros (or cut) to length ``K``."""
        out = np.zeros(K)
        n = min(K, self.K)
        out[:n] = self.coefficients[:n]
        return out

    @classmethod
    def single_mode(cls, k: int, K: int | None = None, amplitude: float = 1.0) -> "State":
        K = max(k, K or k)
        c = np.zeros(K)
        c[k - 1] = amplitude
        return cls(c)

    def evaluate(self, params, mode_list, x):
        """``u(x) = sum a_k Phi_k(x)``, a convenience evaluator on (0, 1)."""
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for a, md in zip(self.coefficients, mode_list):
            if a:
                out = out + a * eigenfunction_eval(params, md, x)
        return out


@dataclass(frozen=True)
class ControlSignal:
    """Samples ``f(t_i)`` on ``t_i = i T / N``, ``i = 0..N``.

    Attributes
    ----------
    samples : ndarray, shape (N+1,)
    T : float
    """

    samples: np.ndarray
    T: float

    def __post_init__(self):
        s = np.array(self.samples, dtype=float)
        if s.ndim != 1 or s.size < 65:
            raise ValueError("a control signal needs N >= 64 intervals")
        if not self.T > 0.0:
            raise ValueError("T must be positive")
        s.flags.writeable = False
        object.__setattr__(self, "samples", s)

    @property
    def N(self) -> int:
        return self.samples.size - 1

    @property
    def step(self) -> float:
        return self.T / self.N

    @property
    def t(self) -> np.ndarray:
        return np.linspace(0.0, self.T, self.N + 1)

    @classmethod
    def zeros(cls, T: float, N: int = 2048) -> "ControlSignal":
        return cls(np.zeros(N + 1), T)

    def l2_norm(self) -> float:
        """Trapezoid ``||f||_{L^2(0,T)}``."""
        s2 = self.samples ** 2
        return math.sqrt(self.step * (s2.sum() - 0.5 * (s2[0] + s2[-1])))

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.samples)))

    def grid_index(self, tau: float) -> int:
        """Index ``i`` with ``t_i = tau``.

        Raises
        ------
        ValueError
            If ``tau`` is not a grid time in ``[0, T]``.
        """
        r = tau / self.step
        i = int(round(r))
        if abs(r - i) > 1e-9 * max(1.0, abs(r)) or not 0 <= i <= self.N:
            raise ValueError(f"tau={tau} is not on the signal grid")
        return i


def _lams(mode_list) -> np.ndarray:
    return np.array([md.lam for md in mode_list])


def free_evolve(state: State, mode_list, t: float) -> State:
    """``S(t) u``: coefficients ``exp(-lambda_k t) a_k`` on the given modes."""
    if t < 0.0:
        raise ValueError("t must be non-negative")
    a = state.padded(len(mode_list))
    return State(np.exp(-_lams(mode_list) * t) * a)


def controlled_evolve(state: State, mode_list, f: ControlSignal, tau: float | None = None) -> State:
    """Weak solution at grid time ``tau`` (default ``T``) on the given modes.

    Parameters
    ----------
    state : State
        Initial coefficients; padded with zeros to ``len(mode_list)``.
    mode_list : sequence of Mode
        Monitored modes, usually more than the synthesized ones.
    f : ControlSignal
    tau : float, optional

    Raises
    ------
    ValueError
        If ``tau`` is off the signal grid.
    """
    tau = f.T if tau is None else float(tau)
    i = f.grid_index(tau)
    lam = _lams(mode_list)
    O = np.array([md.gen_deriv for md in mode_list])
    free = np.exp(-lam * tau) * state.padded(len(mode_list))
    duh = kernels.duhamel_final(lam, f.samples[: i + 1], f.step) if i > 0 else np.zeros_like(lam)
    return State(free + O * duh)


def negative_norm(state: State, mode_list, s: float) -> float:
    """``||u||_{-s} = (sum lambda_k^{-s} a_k^2)^{1/2}``."""
    a = state.padded(len(mode_list))
    return float(math.sqrt(np.sum(_lams(mode_list) ** (-s) * a * a)))


def wellposedness_gap(state: State, mode_list, f: ControlSignal, s: float, nu: float | None = None) -> float:
    """``max_tau ||u(tau)||_{-s} / (||u_0||_{-s} + ||f||_{L^2})`` over the grid.

    Parameters
    ----------
    nu : float, optional
        Bessel order; ``s <= nu`` is rejected when given.
    """
    if nu is not None and not s > nu:
        raise ValueError(f"need s > nu = {nu}")
    lam = _lams(mode_list)
    O = np.array([md.gen_deriv for md in mode_list])
    a = state.padded(len(mode_list))
    path = kernels.duhamel_path(lam, f.samples, f.step)
    coeff = np.exp(-np.outer(lam, f.t)) * a[:, None] + O[:, None] * path
    w = lam ** (-s)
    norms = np.sqrt(np.sum(w[:, None] * coeff ** 2, axis=0))
    denom = negative_norm(state, mode_list, s) + f.l2_norm()
    return float(norms.max() / denom) if denom > 0 else 0.0
