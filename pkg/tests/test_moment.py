import cmath
import functools
import math

import numpy as np
import pytest
from flint import acb, arb, ctx
from hypothesis import given, settings, strategies as st

from degen_control import moment
from degen_control.family import MomentEngine
from degen_control.params import derive
from degen_control.spectrum import modes
from degen_control.suites import product_zeros


def _c(pair):
    return complex(pair[0], pair[1])


@functools.lru_cache(maxsize=1)
def _gl_nodes(n):
    return np.polynomial.legendre.leggauss(n)


def _gl_multiplier(m, z, n=600):
    """Plain Gauss-Legendre on [-1, 1]; fine for moderate ``a |z|``."""
    x, w = _gl_nodes(n)
    s = np.exp(-m.theta / ((1 - x) * (1 + x)) - 1j * m.a * z * x)
    return m.C_theta * np.dot(w, s)


def test_lambda_oracle(ref):
    p, entry = ref
    for z, val in entry["lambda"]:
        got = moment.lambda_eval(p, _c(z))
        assert abs(got - _c(val)) <= 1e-11 * max(1.0, abs(_c(val))), z


def test_lambda_at_zero_and_nodes(ref):
    p, _ = ref
    assert moment.lambda_eval(p, 0.0) == 1.0
    for md in modes(p, 6):
        assert abs(moment.lambda_eval(p, 1j * md.lam)) <= 1e-10


def test_lambda_log_consistent(ref):
    p, _ = ref
    for z in (3.0, 2 - 9j, 70j, 1e3 + 1e3j):
        assert cmath.exp(moment.lambda_log(p, z)) == pytest.approx(moment.lambda_eval(p, z), rel=1e-12)


def test_lambda_growth_bounds(ref):
    p, _ = ref
    for x in np.logspace(-2, 6, 60):
        assert moment.lambda_log(p, x).real <= math.sqrt(x) / (math.sqrt(2) * p.kappa) + 1e-10
        assert moment.lambda_log(p, -x).real <= math.sqrt(x) / (math.sqrt(2) * p.kappa) + 1e-10
    rng = np.random.default_rng(4)
    for _ in range(40):
        z = complex(10 ** rng.uniform(-1, 5) * np.exp(1j * rng.uniform(-math.pi, math.pi)))
        assert moment.lambda_log(p, z).real <= math.sqrt(abs(z)) / p.kappa + 1e-10


def test_lambda_product_with_tail(classical):
    z = product_zeros(classical.nu, 100000)
    assert abs(moment.lambda_product(classical, 1.0, z) - moment.lambda_eval(classical, 1.0)) <= 1e-9


def test_bare_product_gap_matches_prediction(ref):
    p, _ = ref
    K = 2000
    z = product_zeros(p.nu, K)
    gap = abs(moment.lambda_product(p, 1.0, z, tail=False) - moment.lambda_eval(p, 1.0))
    predicted = abs(moment.lambda_eval(p, 1.0)) / (p.kappa ** 2 * math.pi ** 2 * K)
    assert gap == pytest.approx(predicted, rel=2e-3)


def test_lambda_prime_oracle(ref):
    p, entry = ref
    ms = modes(p, 3)
    for md, val in zip(ms, entry["lambda_prime"]):
        assert moment.lambda_prime(p, md) == pytest.approx(_c(val), rel=1e-11)
        assert moment.lambda_prime_at_pole(p, md) == pytest.approx(abs(_c(val)), rel=1e-11)


def test_lambda_prime_probe(ref):
    p, _ = ref
    md = modes(p, 1)[0]
    probe = moment.lambda_prime_probe(p, md)
    assert abs(probe - moment.lambda_prime(p, md)) <= 1e-5 * abs(probe)


def test_lambda_prime_classical_closed_form(classical):
    md = modes(classical, 1)[0]
    assert moment.lambda_prime_at_pole(classical, md) == pytest.approx(1 / (2 * math.pi ** 2), rel=1e-14)


def test_combined_identity(ref):
    p, _ = ref
    for md in modes(p, 6):
        lhs = md.gen_deriv * md.lam * moment.lambda_prime_at_pole(p, md)
        rhs = 2 ** -0.5 * math.sqrt(p.kappa) * (p.sqrt_mu_crit + p.kappa * p.nu) * md.zero
        assert abs(lhs - rhs) <= 1e-10 * max(1.0, rhs)


def test_multiplier_parameters(ref):
    p, entry = ref
    m = moment.make_multiplier(p, 0.5)
    o = entry["multiplier"]
    assert m.a == pytest.approx(o["a"], rel=1e-15)
    assert m.theta == pytest.approx(o["theta"], rel=1e-14)
    assert m.C_theta == pytest.approx(o["C_theta"], rel=1e-12)
    assert m.delta_param == 0.5
    with pytest.raises(ValueError):
        moment.make_multiplier(p, 1.0)


def test_multiplier_oracle(ref):
    p, entry = ref
    m = moment.make_multiplier(p, 0.5)
    for z, val in entry["multiplier"]["values"]:
        got = moment.multiplier_eval(m, _c(z))
        assert abs(got - _c(val)) <= 1e-10 * abs(_c(val)), z


def test_multiplier_at_zero(ref):
    p, _ = ref
    assert moment.multiplier_eval(moment.make_multiplier(p), 0.0) == pytest.approx(1.0, abs=1e-13)


def test_multiplier_against_plain_quadrature(ref):
    p, _ = ref
    m = moment.make_multiplier(p)
    # plain quadrature cancels to about 1e-16 absolute, so keep |H| moderate
    for z in (50 + 5j, 150.0, -120 + 60j, 30j):
        ref_v = _gl_multiplier(m, z)
        assert abs(moment.multiplier_eval(m, z) - ref_v) <= 1e-10 * abs(ref_v)


def _arb_multiplier(m, z, prec):
    """Rigorous ``(log|H(z)|, H(z)/|H(z)|)`` from Arb's adaptive integrator, ``t = tanh u``.

    ``1/(1-t^2) = cosh(u)^2`` keeps the integrand entire in ``u``; the
    tolerance is relative to the integrand peak, so it must cover the
    cancellation ``exp(-a |Re z| - theta)``.
    """
    th, A, Z = arb(m.theta), arb(m.a), acb(z.real, z.imag)
    bits = int((m.a * abs(z.real) + m.theta) / math.log(2.0)) + 80

    def f(u, analytic):
        c = u.cosh()
        return (-th * c * c - acb(0, 1) * A * Z * u.tanh()).exp() / (c * c)

    old = ctx.prec
    ctx.prec = prec
    try:
        v = acb.integral(f, -8, 8, rel_tol=arb(2) ** -bits, abs_tol=arb(2) ** -(bits + 200), eval_limit=10 ** 7)
        mag = abs(v)
        unit = v / mag
        out = float((mag.log() + arb(m.log_C_theta)).mid()), complex(float(unit.real.mid()), float(unit.imag.mid()))
    finally:
        ctx.prec = old
    return out


@pytest.mark.parametrize("z", [400.0, 1500 - 300j, 900 + 900j, 4000.0])
def test_multiplier_against_arb_integral(ref, z):
    p, _ = ref
    m = moment.make_multiplier(p)
    logabs, unit = _arb_multiplier(m, complex(z), int(2 * (m.a * abs(z) + m.theta) + 200))
    got = moment.multiplier_log(m, z)
    assert abs(got.real - logabs) <= 1e-10
    assert abs(cmath.exp(1j * got.imag) - unit) <= 1e-10


def test_multiplier_bounds(ref):
    p, _ = ref
    m = moment.make_multiplier(p)
    for x in np.linspace(-500.0, 500.0, 100):
        assert abs(moment.multiplier_eval(m, x)) <= 1.0 + 1e-12
    s = math.sqrt(m.theta + 1)
    ms = modes(p, 3)
    for x in (ms[0].lam, -ms[0].lam, ms[2].lam, -ms[2].lam):
        h = moment.multiplier_eval(m, 1j * x)
        assert abs(h.imag) <= 1e-12 * abs(h.real)
        assert h.real >= math.exp(m.a * abs(x) / (2 * s)) / (11 * s)


@settings(max_examples=40, deadline=None)
@given(r=st.floats(-1.0, 5.0), phase=st.floats(-math.pi, math.pi))
def test_multiplier_exponential_type_and_symmetry(r, phase):
    p = derive(0.5, 0.0, 1 / 32, 1.0)
    m = moment.make_multiplier(p)
    z = complex(10 ** r * cmath.exp(1j * phase))
    lg = moment.multiplier_log(m, z)
    assert lg.real <= m.a * abs(z.imag) + 1e-10
    assert moment.multiplier_log(m, -z.conjugate()).real == pytest.approx(lg.real, abs=1e-9)


def test_multiplier_large_real_decay(classical):
    m = moment.make_multiplier(classical)
    logs = [moment.multiplier_log(m, x).real for x in (1e3, 1e4, 1e5, 1e6)]
    assert all(b < a for a, b in zip(logs, logs[1:]))


def test_F_interpolation_and_symmetry(ref):
    p, _ = ref
    ms = modes(p, 6)
    m = moment.make_multiplier(p)
    for k in range(1, 7):
        assert moment.F_eval(p, m, ms, k, 1j * ms[k - 1].lam) == 1.0
        for x in (0.7, 13.0, 250.0):
            a = moment.F_eval(p, m, ms, k, x)
            b = moment.F_eval(p, m, ms, k, -x)
            assert abs(a - b.conjugate()) <= 1e-10 * abs(a)


def test_F_at_zero_unwinds(ref):
    p, _ = ref
    ms = modes(p, 4)
    m = moment.make_multiplier(p)
    for md in ms:
        expect = (moment.lambda_eval(p, 0.0) * moment.multiplier_eval(m, 0.0)
                  / (moment.lambda_prime(p, md) * (-1j * md.lam) * moment.multiplier_eval(m, 1j * md.lam)))
        got = moment.F_eval(p, m, ms, md.k, 0.0)
        assert abs(got - expect) <= 1e-10 * abs(expect)


def test_F_exponential_type(ref):
    p, _ = ref
    ms = modes(p, 4)
    m = moment.make_multiplier(p)
    for k in (1, 4):
        for y in (1e3, -1e3, 5e3, -2e4):
            assert moment.F_log(p, m, ms, k, 1j * y).real / abs(y) <= p.T / 2 + 0.01


def test_kronecker_in_ball_arithmetic(ref):
    p, _ = ref
    eng = MomentEngine(p, modes(p, 6), prec=256)
    assert np.max(eng.kronecker()) <= 1e-8
