"""Arbitrary-precision backends for the biorthogonal-family engine.

Two interchangeable backends share one small interface:

* ``ArbBackend`` wraps python-flint (Arb ball arithmetic, compiled). Every
  result carries a rigorous error radius.
* ``MpmathBackend`` is the pure-Python fallback. It reports NaN radii.

:func:`get_backend` returns Arb when importable unless
``DEGEN_CONTROL_MP_BACKEND=mpmath`` is set.
"""
from __future__ import annotations

import contextlib
import math
import os

import mpmath

__all__ = ["ArbBackend", "MpmathBackend", "available_backends", "get_backend"]

try:
    import flint as _flint
except ImportError:  # optional at import time
    _flint = None


class ArbBackend:
    """python-flint ``arb``/``acb`` ball arithmetic."""

    name = "arb"
    certified = True

    def __init__(self):
        if _flint is None:
            raise ImportError("python-flint is not installed")
        self._arb = _flint.arb
        self._acb = _flint.acb
        self._ctx = _flint.ctx

    @contextlib.contextmanager
    def workprec(self, bits: int):
        old = self._ctx.prec
        self._ctx.prec = int(bits)
        try:
            yield
        finally:
            self._ctx.prec = old

    def real(self, x):
        return self._arb(x)

    def cplx(self, re, im=0):
        return self._acb(re, im)

    def pi(self):
        return self._arb.pi()

    def exp(self, x):
        return x.exp()

    def log(self, x):
        return x.log()

    def sqrt(self, x):
        return x.sqrt()

    def sinh(self, x):
        return x.sinh()

    def cosh(self, x):
        return x.cosh()

    def tanh(self, x):
        return x.tanh()

    def lgamma(self, x):
        return self._arb(x).lgamma()

    def hyp0f1(self, b, z):
        return self._acb(z).hypgeom_0f1(b)

    def besselj(self, nu, x):
        if isinstance(x, (self._acb, complex)):
            return self._acb(x).bessel_j(nu)
        return self._arb(x).bessel_j(nu)

    def arg(self, x):
        return self._acb(x).arg()

    def dft(self, seq):
        return self._acb.dft(seq)

    def matmul(self, A, B):
        ma = _flint.acb_mat(A)
        mb = _flint.acb_mat(B)
        p = ma * mb
        return [[p[i, j] for j in range(p.ncols())] for i in range(p.nrows())]

    def to_float(self, x) -> float:
        if isinstance(x, self._acb):
            x = x.real
        return float(x.mid())

    def to_complex(self, x) -> complex:
        x = self._acb(x)
        return complex(float(x.real.mid()), float(x.imag.mid()))

    def radius(self, x) -> float:
        if isinstance(x, self._acb):
            return max(float(x.real.rad()), float(x.imag.rad()))
        return float(x.rad())

    def log_abs(self, x) -> float:
        a = abs(x)
        if not a > 0:
            return -math.inf
        return float(a.log().mid())

    def real_part(self, x):
        return x.real if isinstance(x, self._acb) else x

    def conj(self, x):
        return x.conjugate()

    def mul_2exp(self, x, e: int):
        return x * self._arb(2) ** e

    def exponent(self, x) -> int:
        """``floor(log2 |x|)`` of the midpoint (0 for exact zero)."""
        a = abs(self._acb(x)).mid()
        if a == 0:
            return 0
        return int(math.floor(float(a.log() / self._arb(2).log())))


class MpmathBackend:
    """Pure-Python fallback built on mpmath (no error radii)."""

    name = "mpmath"
    certified = False

    def __init__(self):
        self._mp = mpmath.mp

    @contextlib.contextmanager
    def workprec(self, bits: int):
        with mpmath.workprec(int(bits)):
            yield

    def real(self, x):
        return mpmath.mpf(x)

    def cplx(self, re, im=0):
        return mpmath.mpc(re, im)

    def pi(self):
        return +mpmath.pi

    def exp(self, x):
        return mpmath.exp(x)

    def log(self, x):
        return mpmath.log(x)

    def sqrt(self, x):
        return mpmath.sqrt(x)

    def sinh(self, x):
        return mpmath.sinh(x)

    def cosh(self, x):
        return mpmath.cosh(x)

    def tanh(self, x):
        return mpmath.tanh(x)

    def lgamma(self, x):
        return mpmath.loggamma(x)

    def hyp0f1(self, b, z):
        return mpmath.hyp0f1(b, z)

    def besselj(self, nu, x):
        return mpmath.besselj(nu, x)

    def arg(self, x):
        return mpmath.arg(x)

    def dft(self, seq):
        """Radix-2 forward transform ``X_j = sum_m x_m exp(-2 pi i j m / L)``."""
        n = len(seq)
        if n & (n - 1):
            raise ValueError("mpmath DFT needs a power-of-two length")
        bits = n.bit_length() - 1
        a = [mpmath.mpc(0)] * n
        for i, v in enumerate(seq):
            a[int(format(i, f"0{bits}b")[::-1], 2) if bits else 0] = mpmath.mpc(v)
        size = 2
        while size <= n:
            half = size // 2
            w = [mpmath.expjpi(-2 * mpmath.mpf(k) / size) for k in range(half)]
            for start in range(0, n, size):
                for k in range(half):
                    u = a[start + k]
                    t = w[k] * a[start + k + half]
                    a[start + k] = u + t
                    a[start + k + half] = u - t
            size *= 2
        return a

    def matmul(self, A, B):
        cols = list(zip(*B))
        return [[mpmath.fdot(row, col) for col in cols] for row in A]

    def to_float(self, x) -> float:
        return float(mpmath.re(x))

    def to_complex(self, x) -> complex:
        return complex(x)

    def radius(self, x) -> float:
        return math.nan

    def log_abs(self, x) -> float:
        a = abs(x)
        if a == 0:
            return -math.inf
        return float(mpmath.log(a))

    def real_part(self, x):
        return mpmath.re(x)

    def conj(self, x):
        return mpmath.conj(x)

    def mul_2exp(self, x, e: int):
        return mpmath.ldexp(x, e) if not isinstance(x, mpmath.mpc) else mpmath.mpc(
            mpmath.ldexp(x.real, e), mpmath.ldexp(x.imag, e))

    def exponent(self, x) -> int:
        a = abs(x)
        if a == 0:
            return 0
        return int(mpmath.floor(mpmath.log(a, 2)))


def available_backends() -> list[str]:
    return (["arb"] if _flint is not None else []) + ["mpmath"]


def get_backend(name: str | None = None):
    """Backend by name; default honours ``DEGEN_CONTROL_MP_BACKEND``."""
    name = name or os.environ.get("DEGEN_CONTROL_MP_BACKEND") or ("arb" if _flint is not None else "mpmath")
    if name == "arb":
        return ArbBackend()
    if name == "mpmath":
        return MpmathBackend()
    raise ValueError(f"unknown multiprecision backend {name!r}")
