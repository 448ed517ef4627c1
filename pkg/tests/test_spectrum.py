import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from degen_control.bessel import eval_J
from degen_control.params import derive
from degen_control.quadrature import QuadratureRule, graded_rule
from degen_control.spectrum import (
    BumpFunction,
    bump_family,
    classical_eigenfunction,
    eigenfunction_derivative,
    eigenfunction_eval,
    gen_derivative,
    gen_derivative_limit,
    gram_matrix,
    hardy_check,
    inner_product_beta,
    inverse_unitary_transform,
    modes,
    poincare_check,
    unitary_transform,
    weak_residual,
)

GRID = np.linspace(0.0, 1.0, 202)[1:-1]


def test_quadrature_rule_invariants():
    r = graded_rule(0.75)
    assert np.all(r.weights > 0)
    assert np.all((r.nodes > 0) & (r.nodes < 1))
    assert r.kappa == 0.75 and r.degree == 127
    for p in (0, 5, 40, 127):
        assert r.integrate(r.nodes ** p) == pytest.approx(1.0 / (p + 1), rel=1e-13)
    with pytest.raises(ValueError):
        QuadratureRule(0, 8)


def test_classical_closed_forms(classical):
    ms = modes(classical, 12)
    k = np.arange(1, 13)
    assert np.max(np.abs([m.lam for m in ms] - k ** 2 * math.pi ** 2)) <= 1e-9
    for m in ms:
        assert np.max(np.abs(eigenfunction_eval(classical, m, GRID) - math.sqrt(2) * np.sin(m.k * math.pi * GRID))) <= 1e-8
        assert m.gen_deriv == pytest.approx(math.sqrt(2) * m.k * math.pi, rel=1e-13)
    assert eigenfunction_eval(classical, ms[0], 0.5) == pytest.approx(math.sqrt(2), abs=1e-14)


def test_mode_invariants(ref):
    p, entry = ref
    ms = modes(p, 12)
    lam = np.array([m.lam for m in ms])
    assert np.all(lam > 0) and np.all(np.diff(lam) > 0)
    assert all(m.gen_deriv > 0 for m in ms)
    assert all(abs(m.norm_check - 1.0) < 1e-9 for m in ms)
    np.testing.assert_allclose(lam, entry["lam"], rtol=1e-13)


def test_eigenfunction_oracle(ref):
    p, entry = ref
    ms = modes(p, 5)
    for k, x, val in entry["phi"]:
        assert eigenfunction_eval(p, ms[k - 1], x) == pytest.approx(val, abs=1e-10)


def test_eigenfunction_vanishes_at_one(ref):
    p, _ = ref
    for m in modes(p, 6):
        assert abs(eigenfunction_eval(p, m, 1.0)) < 1e-13


def test_direct_formula_alpha_half():
    p = derive(0.5, 0.0, 1.0 / 32.0, 1.0)
    m = modes(p, 1)[0]
    direct = math.sqrt(2 * p.kappa) / abs(m.jprime) * 0.3 ** ((1 - p.alpha - p.beta) / 2) * eval_J(p.nu, m.zero * 0.3 ** p.kappa)
    assert eigenfunction_eval(p, m, 0.3) == pytest.approx(direct, abs=1e-14)


def test_derivative_by_finite_difference(ref):
    p, _ = ref
    m = modes(p, 3)[2]
    h = 1e-6
    for x in (0.2, 0.5, 0.9):
        fd = (eigenfunction_eval(p, m, x + h) - eigenfunction_eval(p, m, x - h)) / (2 * h)
        assert eigenfunction_derivative(p, m, x) == pytest.approx(fd, rel=1e-7, abs=1e-7)


def test_orthonormality(ref):
    p, _ = ref
    G = gram_matrix(p, modes(p, 12))
    assert np.max(np.abs(G - np.eye(12))) <= 1e-7
    ms = modes(p, 2)
    one = inner_product_beta(p, lambda x: eigenfunction_eval(p, ms[0], x), lambda x: eigenfunction_eval(p, ms[0], x))
    cross = inner_product_beta(p, lambda x: eigenfunction_eval(p, ms[0], x), lambda x: eigenfunction_eval(p, ms[1], x))
    assert one == pytest.approx(1.0, abs=1e-8) and abs(cross) <= 1e-8


def test_classical_sine_norm(classical):
    s = lambda x: np.sin(math.pi * x)
    assert inner_product_beta(classical, s, s) == pytest.approx(0.5, abs=1e-10)


def test_unitary_identity_at_classical(classical):
    u = lambda x: np.cos(3 * x) + x
    np.testing.assert_allclose(unitary_transform(classical, u)(GRID), u(GRID), rtol=1e-15)


def test_unitary_maps_psi_to_phi(ref):
    p, _ = ref
    for m in modes(p, 8):
        Uf = unitary_transform(p, lambda y, m=m: classical_eigenfunction(p, m, y))
        assert np.max(np.abs(Uf(GRID) - eigenfunction_eval(p, m, GRID))) <= 1e-9


def test_unitary_inverse_roundtrip(ref):
    p, _ = ref
    u = lambda y: np.exp(y) * np.sin(2 * y)
    back = inverse_unitary_transform(p, unitary_transform(p, u))
    np.testing.assert_allclose(back(GRID), u(GRID), rtol=1e-12)


def test_isometry_of_constant(ref):
    p, _ = ref
    one = lambda y: np.ones_like(np.asarray(y, dtype=float))
    Uu = unitary_transform(p, one)
    assert math.sqrt(inner_product_beta(p, Uu, Uu)) == pytest.approx(1.0, abs=1e-9)


@settings(max_examples=25, deadline=None)
@given(c=st.lists(st.floats(-1.0, 1.0), min_size=4, max_size=4))
def test_isometry_random_smooth(c):
    p = derive(1.5, -1.0, -0.5, 1.0)
    u = lambda y: np.polynomial.chebyshev.chebval(2 * np.asarray(y) - 1, c)
    Uu = unitary_transform(p, u)
    rule = graded_rule()
    l2 = math.sqrt(max(rule.integrate(u(rule.nodes) ** 2), 0.0))
    assert abs(math.sqrt(max(inner_product_beta(p, Uu, Uu), 0.0)) - l2) <= 1e-8


def test_gen_derivative_oracle(ref):
    p, entry = ref
    ms = modes(p, 4)
    for m, val in zip(ms, entry["gen_deriv"]):
        assert m.gen_deriv == pytest.approx(val, rel=1e-10)
        assert gen_derivative_limit(p, m) == pytest.approx(m.gen_deriv, rel=1e-6)


def test_gen_derivative_ratio(ref):
    p, _ = ref
    ms = modes(p, 5)
    for m in ms[1:]:
        expect = (m.zero / ms[0].zero) ** p.nu * abs(ms[0].jprime) / abs(m.jprime)
        assert m.gen_deriv / ms[0].gen_deriv == pytest.approx(expect, rel=1e-12)
        assert gen_derivative(p, m) == m.gen_deriv


def test_hardy_examples(classical):
    u, du = (lambda x: x * (1 - x)), (lambda x: 1 - 2 * x)
    lhs, rhs = hardy_check(classical, u, du)
    assert lhs == pytest.approx(1 / 12, rel=1e-10) and rhs == pytest.approx(1 / 3, rel=1e-12)
    zero = lambda x: 0 * x
    assert hardy_check(classical, zero, zero) == (0.0, 0.0)
    p = derive(0.5, 0.0, 0.0, 1.0)
    lhs, rhs = hardy_check(p, lambda x: np.sin(math.pi * x), lambda x: math.pi * np.cos(math.pi * x))
    assert lhs <= rhs


def test_poincare_examples(classical):
    s, ds = (lambda x: np.sin(math.pi * x)), (lambda x: math.pi * np.cos(math.pi * x))
    lhs, rhs = poincare_check(classical, s, ds)
    assert lhs == pytest.approx(0.5, rel=1e-12) and rhs == pytest.approx(math.pi ** 2 / 4, rel=1e-12)
    zero = lambda x: 0 * x
    assert poincare_check(classical, zero, zero) == (0.0, 0.0)
    p = derive(1.0, -0.25, 0.0, 1.0)
    lhs, rhs = poincare_check(p, lambda x: x * (1 - x), lambda x: 1 - 2 * x)
    assert lhs <= rhs


def test_hardy_poincare_on_bump_family(ref):
    p, _ = ref
    fam = bump_family(p, 10)
    assert len(fam) == 10
    for b in fam:
        lhs, rhs = hardy_check(p, b, b.deriv)
        assert lhs <= rhs + 1e-10
        lhs, rhs = poincare_check(p, b, b.deriv)
        assert lhs <= rhs + 1e-10


def test_bump_function_derivative():
    b = BumpFunction(2, 2, 3)
    x = np.array([0.1, 0.4, 0.8])
    h = 1e-6
    np.testing.assert_allclose(b.deriv(x), (b(x + h) - b(x - h)) / (2 * h), rtol=1e-7)
    assert b(0.0) == 0.0 and abs(b(1.0)) < 1e-15


def test_weak_residual(ref):
    p, _ = ref
    bumps = [BumpFunction(2, 2, n) for n in range(5)]
    for m in modes(p, 8):
        for b in bumps:
            assert abs(weak_residual(p, m, b, b.deriv)) <= 1e-6
