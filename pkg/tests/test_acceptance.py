"""Acceptance criteria 1-10, one PASS/FAIL line per criterion.

Lines are printed as each criterion finishes and repeated in the pytest
terminal summary. Run alone with ``pytest tests/test_acceptance.py -v -s``
or ``python3 tests/test_acceptance.py``.
"""
import math

import numpy as np
import pytest

from degen_control import bounds, suites
from degen_control.bessel import eval_J, eval_J_prime
from degen_control.evolution import ControlSignal, State, controlled_evolve
from degen_control.family import biorthogonal_family, synthesize_control
from degen_control.moment import lambda_prime_at_pole
from degen_control.params import derive
from degen_control.quadrature import graded_rule
from degen_control.spectrum import (
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

REF_SETS = {"(0,0,0)": (0.0, 0.0, 0.0), "(0.5,0,1/32)": (0.5, 0.0, 1.0 / 32.0), "(1.5,-1,-0.5)": (1.5, -1.0, -0.5)}
T, DELTA, K, MONITOR, N = 1.0, 0.5, 6, 12, 2048
GRID = np.linspace(0.0, 1.0, 202)[1:-1]

RESULTS: dict[int, str] = {}


def record(n: int, passed: bool, detail: str) -> None:
    line = f"criterion {n:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
    RESULTS[n] = line
    print(line)
    assert passed, line


def params():
    return {name: derive(*abc, T) for name, abc in REF_SETS.items()}


@pytest.fixture(scope="module")
def runs():
    """Family, controls and terminal states for criteria 3-6, per reference set."""
    out = {}
    rng = np.random.default_rng(2024)
    for name, p in params().items():
        ms = modes(p, MONITOR)
        fam = biorthogonal_family(p, ms[:K], T, DELTA, N)
        first = bounds.initial_first_mode(p, ms[:K])
        f1 = ControlSignal(synthesize_control(first, fam, ms), T)
        c1 = controlled_evolve(State(first), ms, f1).coefficients
        a = np.zeros(K)
        a[:4] = rng.standard_normal(4)
        a /= np.linalg.norm(a)
        f2 = ControlSignal(synthesize_control(a, fam, ms), T)
        c2 = controlled_evolve(State(a), ms, f2).coefficients
        out[name] = dict(p=p, ms=ms, fam=fam, first=first, f1=f1, c1=c1, c2=c2)
    return out


def test_criterion_01_classical_reduction():
    p = derive(0.0, 0.0, 0.0, T)
    ms = modes(p, 12)
    lam = max(abs(m.lam - (m.k * math.pi) ** 2) for m in ms)
    phi = max(float(np.max(np.abs(eigenfunction_eval(p, m, GRID) - math.sqrt(2) * np.sin(m.k * math.pi * GRID))))
              for m in ms)
    record(1, lam <= 1e-9 and phi <= 1e-8, f"max|lam_k-k^2pi^2|={lam:.2e} (<=1e-9), max|Phi_k-sqrt2 sin|={phi:.2e} (<=1e-8)")


def test_criterion_02_orthonormality():
    devs = {n: float(np.max(np.abs(gram_matrix(p, modes(p, 12)) - np.eye(12)))) for n, p in params().items()}
    record(2, max(devs.values()) <= 1e-7, "gram deviation " + ", ".join(f"{n}={v:.1e}" for n, v in devs.items()) + " (<=1e-7)")


def test_criterion_03_biorthogonality(runs):
    devs = {n: r["fam"].gram_deviation() for n, r in runs.items()}
    record(3, max(devs.values()) <= 1e-6, "max|gram-I| " + ", ".join(f"{n}={v:.1e}" for n, v in devs.items()) + " (<=1e-6)")


def test_criterion_04_null_control(runs):
    t1 = {n: float(np.max(np.abs(r["c1"]))) for n, r in runs.items()}
    t2 = {n: float(np.max(np.abs(r["c2"]))) for n, r in runs.items()}
    ok = max(t1.values()) <= 1e-6 and max(t2.values()) <= 1e-5
    record(4, ok, "first-mode " + ", ".join(f"{n}={v:.1e}" for n, v in t1.items()) + " (<=1e-6); random 4-mode "
           + ", ".join(f"{n}={v:.1e}" for n, v in t2.items()) + " (<=1e-5)")


def test_criterion_05_lower_bound(runs):
    parts, ok = [], True
    for n, r in runs.items():
        certified = float(np.max(np.abs(r["c1"]))) <= 1e-6
        low = bounds.lower_bound(r["p"], T)
        l2 = r["f1"].l2_norm()
        u0n = float(np.linalg.norm(r["first"]))
        good = certified and l2 >= low and l2 / u0n >= low
        ok &= good
        parts.append(f"{n}: L2={l2:.3e} L2/|u0|={l2 / u0n:.3e} >= {low:.3e}")
    record(5, ok, "; ".join(parts))


def test_criterion_06_proof_chain(runs):
    names = ("lambda_growth_real", "lambda_growth_complex", "multiplier_lower_imag", "multiplier_upper_complex", "kronecker")
    parts, ok = [], True
    for n, r in runs.items():
        rep = bounds.verify_proof_chain(r["p"], r["fam"], r["ms"], DELTA, control=r["f1"], coefficients=r["first"])
        items = {it.name: it for it in rep.items}
        good = all(items[k].passed for k in names)
        ok &= good
        parts.append(f"{n}: {'ok' if good else 'failed ' + ','.join(k for k in names if not items[k].passed)}"
                     f" (kronecker {items['kronecker'].worst_margin:.1e})")
    record(6, ok, "; ".join(parts))


def test_criterion_07_hardy_poincare():
    worst = -math.inf
    for p in params().values():
        fam = bump_family(p, 10)
        assert len(fam) == 10
        for b in fam:
            for lhs, rhs in (hardy_check(p, b, b.deriv), poincare_check(p, b, b.deriv)):
                worst = max(worst, lhs - rhs)
    record(7, worst <= 1e-10, f"max(lhs-rhs)={worst:.3e} (<=1e-10) over 10 functions x 3 sets")


def test_criterion_08_bessel():
    res = suites.bessel_suite((0.0, 0.25, 0.5, 1.0, 2.0), K=40)
    rng = np.random.default_rng(88)
    nu, x = rng.uniform(0.0, 5.0, 400), rng.uniform(1e-6, 60.0, 400)
    rec = max(abs(xi * eval_J_prime(n, xi) - n * eval_J(n, xi) + xi * eval_J(n + 1.0, xi)) for n, xi in zip(nu, x))
    xs = np.linspace(0.1, 150.0, 3000)
    s = np.sqrt(2.0 / (math.pi * xs))
    half = max(np.max(np.abs(eval_J(0.5, xs) - s * np.sin(xs))),
               np.max(np.abs(eval_J(1.5, xs) - s * (np.sin(xs) / xs - np.cos(xs)))))
    ok = res.passed and rec <= 1e-10 and half <= 1e-11
    failed = [k for k, v in res.checks.items() if not v[0]]
    record(8, ok, f"suite {'ok' if res.passed else 'failed ' + ','.join(failed)}; recurrence {rec:.1e} (<=1e-10); "
           f"half-integer {half:.1e} (<=1e-11)")


def test_criterion_09_unitary():
    gap, iso = 0.0, 0.0
    rng = np.random.default_rng(99)
    rule = graded_rule()
    for p in params().values():
        for m in modes(p, 8):
            Upsi = unitary_transform(p, lambda y, m=m: classical_eigenfunction(p, m, y))
            gap = max(gap, float(np.max(np.abs(Upsi(GRID) - eigenfunction_eval(p, m, GRID)))))
        for _ in range(10):
            c = rng.standard_normal(6) / np.arange(1, 7)
            u = lambda y, c=c: np.polynomial.chebyshev.chebval(2.0 * np.asarray(y) - 1.0, c)
            Uu = unitary_transform(p, u)
            iso = max(iso, abs(math.sqrt(inner_product_beta(p, Uu, Uu)) - math.sqrt(rule.integrate(u(rule.nodes) ** 2))))
    record(9, gap <= 1e-9 and iso <= 1e-8, f"max|U Psi_k - Phi_k|={gap:.1e} (<=1e-9), isometry {iso:.1e} (<=1e-8)")


def test_criterion_10_generalized_derivative():
    rel, ident = 0.0, 0.0
    for p in params().values():
        for m in modes(p, 4):
            rel = max(rel, abs(gen_derivative_limit(p, m) - m.gen_deriv) / m.gen_deriv)
            lhs = m.gen_deriv * m.lam * lambda_prime_at_pole(p, m)
            rhs = 2 ** -0.5 * math.sqrt(p.kappa) * (p.sqrt_mu_crit + p.kappa * p.nu) * m.zero
            ident = max(ident, abs(lhs - rhs))
    record(10, rel <= 1e-6 and ident <= 1e-10, f"limit rel err {rel:.1e} (<=1e-6), combined identity {ident:.1e} (<=1e-10)")


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q", "-s"]))
