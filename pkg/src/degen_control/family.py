"""High-precision construction of the biorthogonal family ``psi_k``.

``psi_k(t) = exp(lambda_k T / 2) eta_k(t - T/2)`` where ``eta_k`` is the inverse
Fourier transform of ``F_k``. Because ``eta_k`` is supported in
``[-T/2, T/2]``, Poisson summation makes the Fourier series on the period
``T`` exact::

    eta_k(s) = (1/T) sum_j F_k(tau_j) exp(i tau_j s),   tau_j = 2 pi j / T.

Everything downstream is therefore a sum over the samples ``F_k(tau_j)``.
The samples span hundreds of orders of magnitude and the biorthogonality
integrals cancel ``exp(lambda_k T / 2)`` against them, so the samples and the
Gram matrix are computed in ball arithmetic. Only the shape of ``psi_k``,
normalised by a power of two, is handed back in double precision.

Pipeline
--------
1. Size the truncation ``J`` from double-precision samples of ``log|F_k|``.
2. Pick the working precision from the dynamic range of the terms.
3. Refine the zeros ``j_k`` so that ``Lambda`` vanishes at ``i lambda_k`` to
   working precision.
4. ``H(tau_j)`` for all ``j`` from one DFT of the mollifier samples;
   ``Lambda(tau_j)`` from the Bessel closed form.
5. Gram matrix as a single complex matrix product; ``psi_k`` samples by
   folding the series onto the time grid and one FFT.
6. Verify the tail and the Gram radius; extend ``J`` or raise the
   precision and repeat if either check fails.
"""
from __future__ import annotations

import concurrent.futures as cf
import math
import multiprocessing
import os
import time
from dataclasses import dataclass, field

import numpy as np

from . import moment
from .mp import get_backend
from .params import ProblemParams
from .spectrum import Mode

__all__ = [
    "BiorthogonalFamily",
    "FamilyError",
    "FamilyPlan",
    "MomentEngine",
    "biorthogonal_family",
    "plan_family",
    "series_terminal",
    "synthesize_control",
    "write_psi_csv",
]

TAIL_TOL = 1e-16
GRAM_RADIUS_TOL = 1e-12
_MARGIN_NATS = 46.0
_SMALL_ZETA = 64.0


class FamilyError(RuntimeError):
    """The family could not be built to the requested accuracy.

    Attributes
    ----------
    mode : int or None
        1-based index of the offending mode, when one is identifiable.
    """

    def __init__(self, message: str, mode: int | None = None):
        super().__init__(message)
        self.mode = mode


def _threads(threads: int | None) -> int:
    if threads is None:
        threads = int(os.environ.get("DEGEN_CONTROL_THREADS", "1") or 1)
    return max(1, int(threads))


# ---------------------------------------------------------------- planning

@dataclass(frozen=True)
class FamilyPlan:
    """Truncation and precision chosen before the high-precision run.

    Attributes
    ----------
    n_tau : int
        Highest Fourier index ``J``; samples ``tau_0 .. tau_J`` are used.
    dft_length : int
        Power-of-two length ``L`` of the mollifier DFT.
    precision_bits : int
    truncation_radius : ndarray
        Per mode, the ``tau`` beyond which the scaled ``|F_k|`` stays below
        the tail tolerance (double-precision estimate).
    """

    n_tau: int
    dft_length: int
    precision_bits: int
    truncation_radius: np.ndarray
    log_range: float


def _log_scaled_tail(params, mult, mode_list, T, taus):
    """``lambda_k T/2 + log|F_k(tau)| + log(2/(T dtau))`` per mode and tau."""
    dtau = 2.0 * math.pi / T
    lam_l = np.array([moment.lambda_log(params, t).real for t in taus])
    h_l = np.array([moment.multiplier_log(mult, t).real for t in taus])
    out = np.empty((len(mode_list), len(taus)))
    for i, md in enumerate(mode_list):
        pole = (
            math.log(moment.lambda_prime_at_pole(params, md))
            + moment.multiplier_log(mult, 1j * md.lam).real
        )
        dist = np.log(np.hypot(taus, md.lam))
        out[i] = md.lam * T / 2.0 + lam_l + h_l - pole - dist + math.log(2.0 / (T * dtau))
    return out


def plan_family(params: ProblemParams, mode_list, T: float | None = None, delta: float = moment.DEFAULT_DELTA,
                tail_tol: float = TAIL_TOL) -> FamilyPlan:
    """Choose ``J``, ``L`` and the working precision.

    The truncation comes from sampled ``log|F_k|`` on a geometric grid, with
    a running maximum from the right as envelope (``H`` has real zeros, so
    raw samples dip). Sampling continues until the envelope has stayed below
    the threshold for two octaves.
    """
    T = params.T if T is None else float(T)
    mult = moment.make_multiplier(params, delta, T)
    dtau = 2.0 * math.pi / T
    decay = delta / (math.sqrt(2.0) * params.kappa)
    # sum_{j>J} ~ (1/dtau) int e^{-B sqrt tau} ~ (2 sqrt(tau)/B) per sample density
    thresh = math.log(tail_tol)
    arr = dtau * 1.04 ** np.arange(0, 120)
    g = _log_scaled_tail(params, mult, mode_list, T, arr)
    while True:
        gs = g + np.log(4.0 * np.sqrt(arr) / decay + 2.0)[None, :]
        env = np.maximum.accumulate(gs[:, ::-1], axis=1)[:, ::-1]
        above = env.max(axis=0) > thresh
        idx = np.nonzero(above)[0]
        last_above = arr[idx[-1]] if len(idx) else arr[0]
        if arr[-1] > 4.0 * last_above and env[:, -1].max() < thresh - 5.0:
            break
        if arr[-1] > 1e12:
            raise FamilyError("F_k does not decay on the sampled range")
        more = arr[-1] * 1.04 ** np.arange(1, 60)
        arr = np.concatenate([arr, more])
        g = np.concatenate([g, _log_scaled_tail(params, mult, mode_list, T, more)], axis=1)
    radii = np.empty(len(mode_list))
    for i in range(len(mode_list)):
        gi = np.nonzero(env[i] > thresh)[0]
        radii[i] = arr[gi[-1] + 1] if len(gi) else arr[0]
    J = int(math.ceil(radii.max() / dtau)) + 1

    # dynamic range of the gram terms
    core = max(
        md.lam * T / 2.0
        - math.log(moment.lambda_prime_at_pole(params, md))
        - moment.multiplier_log(mult, 1j * md.lam).real
        - math.log(T)
        for md in mode_list
    )
    lam_growth = math.sqrt(J * dtau) / (math.sqrt(2.0) * params.kappa)
    log_range = max(core, 0.0) + lam_growth + math.log(2.0 * J) + _MARGIN_NATS
    bits = int(math.ceil(log_range / math.log(2.0))) + 30

    # aliasing of the DFT: need |H(tau)| below exp(-log_range) past L - J
    t = J * dtau
    hl = -math.inf
    while True:
        t *= 1.05
        hl = moment.multiplier_log(mult, t).real
        if hl < -log_range - 10.0:
            break
    alias = int(math.ceil(t / dtau))
    L = 1 << int(math.ceil(math.log2(J + alias + 1)))
    return FamilyPlan(J, L, bits, radii, log_range)


# ---------------------------------------------------------------- engine

def _lambda_sample(bk, nu, kappa, b, c, tau, small: bool):
    # series near the origin, Bessel closed form beyond
    if small:
        return bk.hyp0f1(b, bk.cplx(0, 1) * c * tau)
    w = bk.sqrt(bk.cplx(0, -1) * tau)
    return bk.exp(bk.lgamma(nu + 1)) * (2 * kappa / w) ** nu * bk.besselj(nu, w / kappa)


def _is_small(j: int, T: float, kappa: float) -> bool:
    return 2.0 * math.pi * j / T / (4.0 * kappa * kappa) <= _SMALL_ZETA


def _lambda_chunk(args):
    nu_f, kappa_f, T_f, j0, j1, prec = args
    bk = get_backend("arb")
    digits = int(prec * 0.30103) + 8
    out = []
    with bk.workprec(prec):
        nu, kappa = bk.real(nu_f), bk.real(kappa_f)
        b = nu + 1
        c = 1 / (4 * kappa ** 2)
        step = 2 * bk.pi() / bk.real(T_f)
        for j in range(j0, j1):
            v = _lambda_sample(bk, nu, kappa, b, c, step * j, _is_small(j, T_f, kappa_f))
            re, im = v.real, v.imag
            out.append((re.mid().str(digits, radius=False), float(re.rad()),
                        im.mid().str(digits, radius=False), float(im.rad())))
    return out


def _from_decimal(arb, text: str, rad: float, digits: int):
    # widen the ball by the decimal rounding of the midpoint
    x = arb(text)
    return arb(x, rad * 1.01 + abs(float(x)) * 10.0 ** (2 - digits))


class MomentEngine:
    """Ball-arithmetic evaluation of ``Lambda``, ``H`` and ``F_k``.

    Parameters
    ----------
    params : ProblemParams
    mode_list : sequence of Mode
    T : float, optional
        Horizon, default ``params.T``.
    delta : float
        Multiplier parameter in (0, 1).
    prec : int
        Working precision in bits.
    backend : str or backend object, optional
    """

    def __init__(self, params: ProblemParams, mode_list, T: float | None = None,
                 delta: float = moment.DEFAULT_DELTA, prec: int = 256, backend=None):
        self.params = params
        self.modes = list(mode_list)
        self.T_f = params.T if T is None else float(T)
        self.delta_f = float(delta)
        self.prec = int(prec)
        self.bk = backend if hasattr(backend, "workprec") else get_backend(backend)
        bk = self.bk
        with bk.workprec(self.prec):
            self.nu = bk.real(params.nu)
            self.kappa = bk.real(params.kappa)
            self.T = bk.real(self.T_f)
            d = bk.real(self.delta_f)
            self.a = self.T * (1 - d) / 2
            self.theta = (1 + d) ** 2 / (self.kappa ** 2 * self.T * (1 - d))
            self.b = self.nu + 1
            self.c = 1 / (4 * self.kappa ** 2)
            self.zeros = [self._refine_zero(md.zero) for md in self.modes]
            self.lam = [self.kappa ** 2 * j ** 2 for j in self.zeros]
            self.log_C_theta = -bk.log(self._sigma_laplace(bk.real(0)))
            self.H_pole = [bk.exp(self.log_C_theta) * self._sigma_laplace(self.a * lk) for lk in self.lam]
            self.lambda_prime = [self._lambda_prime(j) for j in self.zeros]

    # -- scalar pieces

    def _refine_zero(self, x0: float):
        bk = self.bk
        x = bk.real(x0)
        tol = 2.0 ** (-self.prec + 12)
        for _ in range(64):
            jv = bk.besselj(self.nu, x)
            dj = self.nu / x * jv - bk.besselj(self.nu + 1, x)
            step = jv / dj
            x = x - step
            if abs(bk.to_float(step)) <= tol * max(1.0, x0):
                return x
        raise FamilyError(f"high-precision zero refinement failed near {x0}")

    def _lambda_prime(self, j):
        # -i Gamma(nu+1) 2^nu J_nu'(j) / (2 kappa^2 j^(nu+1)), J_nu'(j) = -J_{nu+1}(j)
        bk = self.bk
        jp = -bk.besselj(self.nu + 1, j)
        mag = bk.exp(bk.lgamma(self.nu + 1)) * bk.real(2) ** self.nu * jp / (2 * self.kappa ** 2 * j ** (self.nu + 1))
        return bk.cplx(0, -1) * mag

    def _sigma_laplace(self, y):
        """``int_{-1}^{1} exp(-theta/(1-t^2) + y t) dt`` by the tanh substitution."""
        bk = self.bk
        th = bk.to_float(self.theta)
        yf = bk.to_float(y)
        p_nats = self.prec * math.log(2.0)
        h = math.pi ** 2 / (4.0 * (p_nats + yf + 10.0))
        U = math.acosh(math.sqrt((p_nats + yf + th + 50.0) / th)) + 0.5
        n = int(math.ceil(U / h))
        hh = bk.real(U) / n
        s = bk.real(0)
        for m in range(-n, n + 1):
            u = hh * m
            ch = bk.cosh(u)
            s += bk.exp(-self.theta * ch * ch + y * bk.tanh(u)) / (ch * ch)
        return s * hh

    def lambda_value(self, z):
        """``Lambda(z)`` for a backend complex ``z``."""
        bk = self.bk
        with bk.workprec(self.prec):
            return bk.hyp0f1(self.b, bk.cplx(0, 1) * self.c * z)

    def multiplier_at_pole(self, k: int):
        """``H(i lambda_k)`` (``k`` 1-based) as a backend real."""
        return self.H_pole[k - 1]

    def F_value(self, k: int, z):
        """``F_k(z)`` in working precision; ``z`` a backend complex or Python complex."""
        bk = self.bk
        with bk.workprec(self.prec):
            if isinstance(z, complex):
                z = bk.cplx(z.real, z.imag)
            zk = bk.cplx(0, self.lam[k - 1])
            lam = self.lambda_value(z)
            H = self._H_complex(z)
            return lam * H / (self.lambda_prime[k - 1] * (z - zk) * self.H_pole[k - 1])

    def _H_complex(self, z):
        # purely imaginary z = i y gives the real Laplace integral
        bk = self.bk
        zc = bk.to_complex(z)
        if abs(zc.real) <= 1e-300 * max(1.0, abs(zc)):
            return bk.exp(self.log_C_theta) * self._sigma_laplace(self.a * bk.real_part(bk.cplx(0, -1) * z))
        raise NotImplementedError("high-precision H only on the imaginary axis; use H_samples on the real grid")

    def kronecker(self) -> np.ndarray:
        """``max |F_k(i lambda_l) - delta_kl|`` entries as a float matrix.

        Off-diagonal values are ``Lambda(i lambda_l) H(i lambda_l)`` over the
        pole factors; they vanish only because the refined ``lambda_l`` are
        zeros of ``Lambda`` to working precision.
        """
        bk = self.bk
        K = len(self.modes)
        out = np.zeros((K, K))
        with bk.workprec(self.prec):
            lam_at = [bk.hyp0f1(self.b, -self.c * lk) for lk in self.lam]
            for k in range(K):
                for l in range(K):
                    if k == l:
                        continue
                    num = lam_at[l] * self.H_pole[l]
                    den = self.lambda_prime[k] * bk.cplx(0, self.lam[l] - self.lam[k]) * self.H_pole[k]
                    v = num / den
                    out[k, l] = abs(bk.to_complex(v)) + bk.radius(v)
        return out

    # -- grids

    def H_samples(self, J: int, L: int):
        """``H(tau_j)``, ``j = 0..J``, from one length-``L`` DFT of the mollifier."""
        bk = self.bk
        if L < 2 * (J + 1):
            raise FamilyError("DFT length too short for the requested samples")
        with bk.workprec(self.prec):
            h = 2 / ((1 - bk.real(self.delta_f)) * L)
            M = int(math.floor((1.0 - 1e-12) / bk.to_float(h)))
            seq = [bk.cplx(0)] * L
            for m in range(0, M + 1):
                t = h * m
                one = 1 - t * t
                if not bk.to_float(one) > 0.0:
                    break
                v = bk.cplx(bk.exp(-self.theta / one))
                seq[m] = v
                if m:
                    seq[L - m] = v
            d = bk.dft(seq)
            scale = bk.exp(self.log_C_theta) * h
            return [bk.real_part(d[j]) * scale for j in range(J + 1)]

    def lambda_samples(self, J: int, threads: int = 1):
        """``Lambda(tau_j)``, ``j = 0..J``; optional worker processes (Arb only)."""
        bk = self.bk
        if threads > 1 and bk.name == "arb" and J > 2000:
            return self._lambda_samples_parallel(J, threads)
        pk = self.params.kappa
        with bk.workprec(self.prec):
            step = 2 * bk.pi() / self.T
            return [_lambda_sample(bk, self.nu, self.kappa, self.b, self.c, step * j, _is_small(j, self.T_f, pk))
                    for j in range(J + 1)]

    def _lambda_samples_parallel(self, J, threads):
        bk = self.bk
        bounds = np.linspace(0, J + 1, 4 * threads + 1).astype(int)
        tasks = [(self.params.nu, self.params.kappa, self.T_f, int(bounds[i]), int(bounds[i + 1]), self.prec)
                 for i in range(len(bounds) - 1) if bounds[i + 1] > bounds[i]]
        methods = multiprocessing.get_all_start_methods()
        ctx = multiprocessing.get_context("fork" if "fork" in methods else None)
        with cf.ProcessPoolExecutor(max_workers=threads, mp_context=ctx) as ex:
            parts = list(ex.map(_lambda_chunk, tasks))
        arb = type(bk.real(0))
        digits = int(self.prec * 0.30103) + 8
        out = []
        with bk.workprec(self.prec):
            for part in parts:
                for re, rr, im, ir in part:
                    out.append(bk.cplx(_from_decimal(arb, re, rr, digits), _from_decimal(arb, im, ir, digits)))
        return out


# ---------------------------------------------------------------- family

@dataclass(frozen=True)
class BiorthogonalFamily:
    """Sampled biorthogonal family and its certification data.

    ``psi_k(t_i) = exp(log_scale[k]) * shape[k, i]`` on ``t_i = i T / N``.

    Attributes
    ----------
    T : float
    delta_param : float
    t : ndarray, shape (N+1,)
    log_scale : ndarray, shape (K,)
    shape : ndarray, shape (K, N+1)
    gram : ndarray, shape (K, K)
        ``int_0^T psi_k(t) exp(-lambda_l (T - t)) dt`` from the exact series.
    gram_radius : float
        Largest ball radius of the Gram entries (NaN without error bounds).
    truncation_radius : ndarray, shape (K,)
    tau_step : float
    n_tau : int
    precision_bits : int
    imag_residue : float
        Largest imaginary part of the inversion relative to the real part.
    tail_bound : ndarray, shape (K,)
        Scaled ``|F_k|`` over the last tenth of the retained samples.
    kronecker : ndarray, shape (K, K)
        ``|F_k(i lambda_l)|`` off the diagonal.
    lambdas : ndarray, shape (K,)
    backend : str
    timings : dict
    """

    T: float
    delta_param: float
    t: np.ndarray
    log_scale: np.ndarray
    shape: np.ndarray
    gram: np.ndarray
    gram_radius: float
    truncation_radius: np.ndarray
    tau_step: float
    n_tau: int
    precision_bits: int
    imag_residue: float
    tail_bound: np.ndarray
    kronecker: np.ndarray
    lambdas: np.ndarray
    backend: str
    timings: dict = field(default_factory=dict, compare=False)

    @property
    def K(self) -> int:
        return len(self.log_scale)

    @property
    def N(self) -> int:
        return len(self.t) - 1

    def gram_deviation(self) -> float:
        return float(np.max(np.abs(self.gram - np.eye(self.K))))

    def psi(self, k: int) -> np.ndarray:
        """Samples of ``psi_k`` (``k`` 1-based).

        Raises
        ------
        FamilyError
            If the scaled values overflow double precision.
        """
        ls = self.log_scale[k - 1]
        peak = np.max(np.abs(self.shape[k - 1]))
        if peak > 0 and ls + math.log(peak) > 709.0:
            raise FamilyError(f"psi_{k} exceeds the double range", mode=k)
        return math.exp(ls) * self.shape[k - 1]

    def psi_sup_log(self, k: int) -> float:
        """``log ||psi_k||_inf`` on the grid."""
        return float(self.log_scale[k - 1] + math.log(np.max(np.abs(self.shape[k - 1]))))


def biorthogonal_family(params: ProblemParams, mode_list, T: float | None = None,
                        delta: float = moment.DEFAULT_DELTA, N: int = 2048, *, n_tau: int | None = None,
                        backend=None, threads: int | None = None, max_rounds: int = 4) -> BiorthogonalFamily:
    """Build ``psi_1 .. psi_K`` on ``t_i = i T / N`` with a certified Gram matrix.

    Parameters
    ----------
    params : ProblemParams
    mode_list : sequence of Mode
    T : float, optional
    delta : float
        Multiplier parameter in (0, 1).
    N : int
        Number of time intervals (even, at least 64).
    n_tau : int, optional
        Force the truncation ``J``; disables the automatic tail extension.
    backend : str, optional
        ``"arb"`` (default when available) or ``"mpmath"``.
    threads : int, optional
        Worker processes for the ``Lambda`` samples; default from
        ``DEGEN_CONTROL_THREADS`` or 1.

    Raises
    ------
    FamilyError
        When the tail or the Gram radius cannot be brought under tolerance.
    """
    if N < 64 or N % 2:
        raise ValueError("N must be even and at least 64")
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    T = params.T if T is None else float(T)
    threads = _threads(threads)
    timings = {}
    t0 = time.perf_counter()
    plan = plan_family(params, mode_list, T, delta)
    timings["plan"] = time.perf_counter() - t0
    J, L, bits = plan.n_tau, plan.dft_length, plan.precision_bits
    if n_tau is not None:
        J = int(n_tau)
        L = max(L, 1 << int(math.ceil(math.log2(2 * J + 2))))
        L = 1 << int(math.ceil(math.log2(J + (L - plan.n_tau))))
    dtau = 2.0 * math.pi / T
    K = len(mode_list)
    for rnd in range(1, max_rounds + 1):
        timings["rounds"] = rnd
        res = _build(params, mode_list, T, delta, N, J, L, bits, backend, threads, timings)
        gram_ok = not (res["gram_radius"] > GRAM_RADIUS_TOL)
        tail_ok = n_tau is not None or bool(np.all(res["tail_bound"] <= TAIL_TOL))
        if gram_ok and tail_ok:
            break
        if not tail_ok:
            J2 = int(math.ceil(1.5 * J))
            L = 1 << int(math.ceil(math.log2(L + (J2 - J))))
            J = J2
            bits = int(bits * 1.1) + 16
        if not gram_ok:
            bits = int(bits * 1.5)
    else:
        bad = int(np.argmax(res["tail_bound"])) + 1
        raise FamilyError(
            f"family did not converge: gram radius {res['gram_radius']:.3g}, "
            f"tail {res['tail_bound'].max():.3g}", mode=bad)
    timings["total"] = time.perf_counter() - t0
    return BiorthogonalFamily(
        T=T, delta_param=float(delta), t=np.linspace(0.0, T, N + 1),
        log_scale=res["log_scale"], shape=res["shape"], gram=res["gram"],
        gram_radius=res["gram_radius"], truncation_radius=plan.truncation_radius,
        tau_step=dtau, n_tau=J, precision_bits=bits, imag_residue=res["imag_residue"],
        tail_bound=res["tail_bound"], kronecker=res["kronecker"],
        lambdas=np.array([md.lam for md in mode_list]), backend=res["backend"], timings=timings,
    )


def _build(params, mode_list, T, delta, N, J, L, bits, backend, threads, timings):
    K = len(mode_list)
    t0 = time.perf_counter()
    eng = MomentEngine(params, mode_list, T, delta, prec=bits, backend=backend)
    bk = eng.bk
    timings["setup"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    Hs = eng.H_samples(J, L)
    timings["multiplier_dft"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    Ls = eng.lambda_samples(J, threads)
    timings["lambda_samples"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    with bk.workprec(bits):
        step = 2 * bk.pi() / eng.T
        taus = [step * j for j in range(J + 1)]
        base = [Ls[j] * Hs[j] for j in range(J + 1)]
        A, rows = [], []
        tail = np.zeros(K)
        j_tail = max(1, int(0.9 * J))
        log_pref = math.log(2.0 / (T * (2.0 * math.pi / T)))
        for k in range(K):
            lk = eng.lam[k]
            pole = eng.lambda_prime[k] * eng.H_pole[k]
            Fk = [base[j] / (pole * (bk.cplx(taus[j], 0) - bk.cplx(0, lk))) for j in range(J + 1)]
            rows.append(Fk)
            A.append([(Fk[j] if j % 2 == 0 else -Fk[j]) * (1 if j == 0 else 2) for j in range(J + 1)])
            half = bk.to_float(lk) * T / 2.0
            tail[k] = max(math.exp(min(700.0, half + bk.log_abs(Fk[j]) + log_pref)) for j in range(j_tail, J + 1)) \
                if J >= 1 else math.inf
        B = [[1 / bk.cplx(eng.lam[l], taus[j]) for l in range(K)] for j in range(J + 1)]
        timings["assemble"] = time.perf_counter() - t0
        t0 = time.perf_counter()
        S = bk.matmul(A, B)
        timings["gram_product"] = time.perf_counter() - t0
        gram = np.zeros((K, K))
        rad = 0.0
        for k in range(K):
            for l in range(K):
                pref = bk.exp(eng.lam[k] * eng.T / 2) * (1 - bk.exp(-eng.lam[l] * eng.T)) / eng.T
                g = pref * bk.real_part(S[k][l])
                gram[k, l] = bk.to_float(g)
                rad = max(rad, bk.radius(g)) if bk.certified else math.nan
        # psi samples: fold (-1)^j F_kj onto residues mod N, one FFT per mode
        t0 = time.perf_counter()
        log_scale = np.zeros(K)
        shape = np.zeros((K, N + 1))
        imag_res = 0.0
        for k in range(K):
            C = [bk.cplx(0)] * N
            Fk = rows[k]
            for j in range(-J, J + 1):
                v = Fk[abs(j)] if j >= 0 else bk.conj(Fk[-j])
                if j % 2:
                    v = -v
                C[j % N] += v
            e = max(bk.exponent(c) for c in C)
            vals = np.array([bk.to_complex(bk.mul_2exp(c, -e)) for c in C])
            eta = N * np.fft.ifft(vals)
            re, im = eta.real, eta.imag
            imag_res = max(imag_res, float(np.max(np.abs(im)) / max(np.max(np.abs(re)), 1e-300)))
            shape[k, :N] = re
            shape[k, N] = re[0]
            log_scale[k] = bk.to_float(eng.lam[k]) * T / 2.0 + e * math.log(2.0) - math.log(T)
        timings["psi_fold"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    kron = eng.kronecker()
    timings["kronecker"] = time.perf_counter() - t0
    return dict(gram=gram, gram_radius=rad, log_scale=log_scale, shape=shape, imag_residue=imag_res,
                tail_bound=tail, kronecker=kron, backend=bk.name)


# ---------------------------------------------------------------- synthesis

def synthesize_control(coefficients, family: BiorthogonalFamily, mode_list):
    """Control samples ``f = -sum_k a_k exp(-lambda_k T) / O_k psi_k``.

    Each term is combined in log magnitude, so ``exp(-lambda_k T)`` and the
    ``exp(lambda_k T / 2)`` inside ``psi_k`` never meet as separate floats.

    Parameters
    ----------
    coefficients : array_like
        ``a_1 .. a_m`` of the initial state, ``m <= family.K``.
    family : BiorthogonalFamily
    mode_list : sequence of Mode

    Returns
    -------
    ndarray, shape (N+1,)
    """
    a = np.asarray(coefficients, dtype=float)
    if len(a) > family.K:
        raise ValueError("initial state has more modes than the family")
    f = np.zeros(family.N + 1)
    T = family.T
    for k, ak in enumerate(a, start=1):
        if ak == 0.0:
            continue
        md = mode_list[k - 1]
        logc = math.log(abs(ak)) - md.lam * T - math.log(md.gen_deriv) + family.log_scale[k - 1]
        f -= math.copysign(1.0, ak) * math.exp(logc) * family.shape[k - 1]
    return f


def series_terminal(params: ProblemParams, coefficients, mode_list, K: int, T: float | None = None,
                    delta: float = moment.DEFAULT_DELTA, prec: int = 256, backend=None):
    """Terminal coordinates of the synthesized control from exact moments.

    ``int_0^T psi_l e^{-lambda_m (T-t)} dt = e^{(lambda_l - lambda_m) T/2} F_l(i lambda_m)``
    holds for every ``m``, so the terminal coordinate of mode ``m`` is
    ``e^{-lambda_m T} a_m - O_m sum_{l<=K} a_l/O_l e^{-(lambda_l+lambda_m) T/2} F_l(i lambda_m)``,
    evaluated in ball arithmetic. Unlike the trapezoid simulation this does
    not see the rounding of the sampled control.

    Parameters
    ----------
    coefficients : array_like
        ``a_1 .. a_K`` of the initial state.
    mode_list : sequence of Mode
        Monitored modes (at least ``K``).
    K : int
        Number of synthesized modes.

    Returns
    -------
    values : ndarray
        ``|c_m(T)|`` for the monitored modes, ball radius included.
    radius : float
        Largest ball radius (NaN without error bounds).
    """
    a = np.zeros(len(mode_list))
    n = min(K, len(coefficients))
    a[:n] = np.asarray(coefficients, dtype=float)[:n]
    eng = MomentEngine(params, mode_list, T, delta, prec=prec, backend=backend)
    bk = eng.bk
    O = [md.gen_deriv for md in mode_list]
    vals = np.zeros(len(mode_list))
    rad = 0.0
    with bk.workprec(eng.prec):
        lam_at = [bk.hyp0f1(eng.b, -eng.c * lk) for lk in eng.lam]
        for m in range(len(mode_list)):
            # the l = m term cancels e^{-lambda_m T} a_m exactly
            tot = bk.cplx(0) if m < K else bk.cplx(bk.exp(-eng.lam[m] * eng.T) * bk.real(a[m]))
            for l in range(K):
                if l == m or a[l] == 0.0:
                    continue
                F = lam_at[m] * eng.H_pole[m] / (
                    eng.lambda_prime[l] * bk.cplx(0, eng.lam[m] - eng.lam[l]) * eng.H_pole[l])
                w = bk.exp(-(eng.lam[l] + eng.lam[m]) * eng.T / 2)
                tot -= bk.real(O[m] * a[l] / O[l]) * w * F
            r = bk.radius(tot) if bk.certified else 0.0
            vals[m] = abs(bk.to_complex(tot)) + r
            rad = max(rad, r) if bk.certified else math.nan
    return vals, rad


def write_psi_csv(path, family: BiorthogonalFamily) -> None:
    """CSV with columns ``t, psi_1 .. psi_K``; huge values keep full exponent range."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("t," + ",".join(f"psi_{k}" for k in range(1, family.K + 1)) + "\n")
        for i, t in enumerate(family.t):
            cells = [repr(float(t))]
            for k in range(family.K):
                s = family.shape[k, i]
                if s == 0.0:
                    cells.append("0.0")
                    continue
                lg = family.log_scale[k] + math.log(abs(s))
                e10 = math.floor(lg / math.log(10.0))
                m = math.copysign(math.exp(lg - e10 * math.log(10.0)), s)
                cells.append(f"{m:.16f}e{e10:+d}")
            fh.write(",".join(cells) + "\n")
