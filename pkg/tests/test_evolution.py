import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from degen_control.evolution import ControlSignal, State, controlled_evolve, free_evolve, negative_norm, wellposedness_gap
from degen_control.params import derive
from degen_control.spectrum import modes

CLASSICAL = derive(0.0, 0.0, 0.0, 1.0)
MODES = modes(CLASSICAL, 6)


def test_state_validation_and_norm():
    s = State([3.0, 4.0])
    assert s.norm() == 5.0 and s.K == 2
    np.testing.assert_array_equal(s.padded(4), [3, 4, 0, 0])
    np.testing.assert_array_equal(State.single_mode(3).coefficients, [0, 0, 1])
    with pytest.raises(ValueError):
        State([])


def test_state_evaluate_classical():
    x = np.linspace(0.1, 0.9, 9)
    s = State([1.0, 0.5])
    expect = math.sqrt(2) * (np.sin(math.pi * x) + 0.5 * np.sin(2 * math.pi * x))
    np.testing.assert_allclose(s.evaluate(CLASSICAL, MODES, x), expect, atol=1e-12)


def test_control_signal_validation():
    with pytest.raises(ValueError):
        ControlSignal(np.zeros(10), 1.0)
    with pytest.raises(ValueError):
        ControlSignal(np.zeros(65), 0.0)
    f = ControlSignal.zeros(2.0, 128)
    assert f.N == 128 and f.step == 2.0 / 128 and f.t[-1] == 2.0
    with pytest.raises(ValueError):
        f.grid_index(0.3)
    with pytest.raises(ValueError):
        f.grid_index(2.5)
    assert f.grid_index(1.0) == 64


def test_control_norms():
    t = np.linspace(0.0, 1.0, 2049)
    f = ControlSignal(np.sin(math.pi * t), 1.0)
    assert f.l2_norm() == pytest.approx(math.sqrt(0.5), rel=1e-6)
    assert f.sup_norm() == pytest.approx(1.0, abs=1e-6)


def test_free_evolve_examples():
    u = State([1.0, 0.3, -0.2])
    np.testing.assert_array_equal(free_evolve(u, MODES[:3], 0.0).coefficients, u.coefficients)
    out = free_evolve(State([1.0]), MODES, 1.0).coefficients
    assert out[0] == pytest.approx(math.exp(-math.pi ** 2), rel=1e-13)
    assert np.all(out[1:] == 0)
    with pytest.raises(ValueError):
        free_evolve(u, MODES, -1.0)


@settings(max_examples=50, deadline=None)
@given(s=st.floats(0.0, 0.5), t=st.floats(0.0, 0.5))
def test_semigroup_law(s, t):
    u = State([1.0, -0.5, 0.25, 2.0])
    a = free_evolve(free_evolve(u, MODES[:4], s), MODES[:4], t).coefficients
    b = free_evolve(u, MODES[:4], s + t).coefficients
    np.testing.assert_allclose(a, b, rtol=0, atol=1e-14)


def test_zero_control_equals_free():
    u = State([0.4, 1.0, -0.7])
    f = ControlSignal.zeros(1.0, 256)
    np.testing.assert_allclose(controlled_evolve(u, MODES, f).coefficients,
                               free_evolve(u, MODES, 1.0).coefficients, rtol=1e-15)


def _constant_error(N, tau=0.5):
    md = MODES[0]
    f = ControlSignal(np.ones(N + 1), 1.0)
    got = controlled_evolve(State([0.3]), MODES[:1], f, tau).coefficients[0]
    lam = md.lam
    exact = math.exp(-lam * tau) * 0.3 + md.gen_deriv * (1 - math.exp(-lam * tau)) / lam
    return got - exact


def test_constant_control_analytic():
    assert abs(_constant_error(2048)) < 1e-5
    # second order
    ratio = _constant_error(256) / _constant_error(512)
    assert ratio == pytest.approx(4.0, rel=0.02)


def test_off_grid_rejected():
    f = ControlSignal.zeros(1.0, 100)
    with pytest.raises(ValueError):
        controlled_evolve(State([1.0]), MODES, f, 0.123)


def test_superposition():
    rng = np.random.default_rng(3)
    u1, u2 = State(rng.standard_normal(6)), State(rng.standard_normal(6))
    f1, f2 = ControlSignal(rng.standard_normal(513), 1.0), ControlSignal(rng.standard_normal(513), 1.0)
    c = lambda u, f: controlled_evolve(u, MODES, f, 0.75).coefficients
    lhs = c(State(2 * u1.coefficients - u2.coefficients), ControlSignal(2 * f1.samples - f2.samples, 1.0))
    rhs = 2 * c(u1, f1) - c(u2, f2)
    np.testing.assert_allclose(lhs, rhs, rtol=0, atol=1e-12 * max(1.0, np.max(np.abs(rhs))))


def test_duhamel_consistency():
    N, T = 1024, 1.0
    t = np.linspace(0, T, N + 1)
    f = ControlSignal(np.cos(5 * t) + t, T)
    u0 = State([1.0, -0.5, 0.2])
    i = 384
    sigma = t[i]
    mid = controlled_evolve(u0, MODES, f, sigma)
    # the restricted signal needs its own >= 64 intervals
    tail = ControlSignal(f.samples[i:], T - sigma)
    rest = controlled_evolve(State(np.zeros(6)), MODES, tail)
    lhs = controlled_evolve(u0, MODES, f).coefficients
    rhs = free_evolve(mid, MODES, T - sigma).coefficients + rest.coefficients
    np.testing.assert_allclose(lhs, rhs, atol=1e-12)


def test_negative_norm_examples():
    a = State([1.0, 1.0])
    assert negative_norm(a, MODES, 0.0) == pytest.approx(math.sqrt(2), rel=1e-15)
    assert negative_norm(State([1.0]), MODES, 2.0) == pytest.approx(1 / math.pi ** 2, rel=1e-13)
    assert negative_norm(a, MODES, 1.0) == pytest.approx(math.sqrt(1 / math.pi ** 2 + 1 / (4 * math.pi ** 2)), rel=1e-13)


def test_wellposedness_examples():
    f = ControlSignal.zeros(1.0, 512)
    assert wellposedness_gap(State([1.0]), MODES, f, 1.0, nu=0.5) == pytest.approx(1.0, rel=1e-14)
    with pytest.raises(ValueError):
        wellposedness_gap(State([1.0]), MODES, f, 0.5, nu=0.5)
    t = lambda N: np.linspace(0, 1, N + 1)
    u = State([1.0, 0.2])
    r1 = wellposedness_gap(u, MODES, ControlSignal(np.sin(7 * t(1024)), 1.0), 1.0, nu=0.5)
    r2 = wellposedness_gap(u, MODES, ControlSignal(np.sin(7 * t(2048)), 1.0), 1.0, nu=0.5)
    assert math.isfinite(r1) and abs(r1 - r2) <= 1e-3
