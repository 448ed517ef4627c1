"""Composite Gauss-Legendre rules on (0, 1), geometrically graded toward 0."""
from __future__ import annotations

import functools
from dataclasses import dataclass, field

import numpy as np

__all__ = ["QuadratureRule", "graded_rule", "x_rule"]


@functools.lru_cache(maxsize=16)
def _gauss(order: int):
    x, w = np.polynomial.legendre.leggauss(order)
    x.flags.writeable = False
    w.flags.writeable = False
    return x, w


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss-Legendre nodes on panels ``[r^P-1 .. 1]`` graded toward 0.

    The panel edges are ``0, r**(P-1), ..., r, 1``. When used for weighted
    integrals the nodes live in the transformed variable ``y = x**kappa``.

    Attributes
    ----------
    panels : int
    order : int
        Gauss points per panel.
    ratio : float
        Geometric grading ratio ``r`` in (0, 1).
    kappa : float
        Exponent of the change of variables, metadata only.
    """

    panels: int = 16
    order: int = 64
    ratio: float = 0.35
    kappa: float = 1.0
    nodes: np.ndarray = field(init=False, repr=False, compare=False)
    weights: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.panels < 1 or self.order < 1 or not 0.0 < self.ratio < 1.0:
            raise ValueError("invalid quadrature rule parameters")
        gx, gw = _gauss(self.order)
        edges = np.concatenate([[0.0], self.ratio ** np.arange(self.panels - 1, -1, -1.0)])
        a, b = edges[:-1, None], edges[1:, None]
        nodes = (0.5 * (b - a) * gx + 0.5 * (b + a)).ravel()
        weights = (0.5 * (b - a) * gw).ravel()
        nodes.flags.writeable = False
        weights.flags.writeable = False
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    @property
    def degree(self) -> int:
        """Polynomial degree integrated exactly on each panel."""
        return 2 * self.order - 1

    def integrate(self, values) -> float:
        """``sum(w_i * values_i)`` for values sampled at :attr:`nodes`."""
        return float(np.dot(self.weights, values))

    def x_nodes(self) -> np.ndarray:
        """Nodes mapped back to ``x = y**(1/kappa)``."""
        return self.nodes ** (1.0 / self.kappa)


def graded_rule(kappa: float = 1.0, panels: int = 16, order: int = 64, ratio: float = 0.35) -> QuadratureRule:
    """Default weighted-integral rule in ``y = x**kappa``."""
    return QuadratureRule(panels, order, ratio, kappa)


def x_rule(panels: int = 30, order: int = 40, ratio: float = 0.3) -> QuadratureRule:
    """Rule in the physical variable with strong grading for algebraic endpoint weights."""
    return QuadratureRule(panels, order, ratio, 1.0)
