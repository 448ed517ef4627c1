import math

import pytest
from hypothesis import given, strategies as st

from degen_control.params import AdmissibilityError, critical_coefficient, derive


@pytest.mark.parametrize("delta, expected", [(0.0, 0.25), (1.0, 0.0), (-1.0, 1.0)])
def test_critical_coefficient(delta, expected):
    assert critical_coefficient(delta) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize(
    "args, kappa, nu, gamma",
    [
        ((0, 0, 0, 1), 1.0, 0.5, 0.0),
        ((0, 0, 3 / 16, 1), 1.0, 0.25, 0.25),
        ((1, -0.5, 0, 1), 0.5, 0.5, 0.0),
    ],
)
def test_derive_examples(args, kappa, nu, gamma):
    p = derive(*args)
    assert p.kappa == pytest.approx(kappa, abs=1e-15)
    assert p.nu == pytest.approx(nu, abs=1e-15)
    assert p.gamma == pytest.approx(gamma, abs=1e-15)


def test_reference_sets_match_oracle(ref):
    p, entry = ref
    for key in ("kappa", "nu", "gamma", "mu_crit"):
        assert getattr(p, key) == pytest.approx(entry["derived"][key], rel=1e-14, abs=1e-16)


@pytest.mark.parametrize(
    "args, tag",
    [
        ((0, 0, 0.25, 1), "mu<mu(alpha+beta)"),
        ((2.0, -1.5, 0, 1), "0<=alpha<2"),
        ((-0.1, 0, 0, 1), "0<=alpha<2"),
        ((0.5, 0.5, 0, 1), "alpha+beta<1"),
        ((0, 0, 0, 0), "T>0"),
        ((0, 0, float("nan"), 1), "mu"),
    ],
)
def test_rejections_name_the_condition(args, tag):
    with pytest.raises(AdmissibilityError) as exc:
        derive(*args)
    assert exc.value.constraint == tag


def test_nu_cap():
    with pytest.raises(AdmissibilityError):
        derive(0, 0, -1e6, 1)


def test_with_horizon(classical):
    q = classical.with_horizon(3.0)
    assert q.T == 3.0 and q.nu == classical.nu


@given(
    alpha=st.floats(0.0, 1.99),
    beta=st.floats(-3.0, 0.99),
    frac=st.floats(-20.0, 0.999),
)
def test_invariants(alpha, beta, frac):
    if alpha + beta >= 1.0:
        return
    mc = critical_coefficient(alpha + beta)
    mu = frac * mc if mc > 0 else -abs(frac)
    if not mu < mc:
        return
    try:
        p = derive(alpha, beta, mu, 1.0)
    except AdmissibilityError as exc:
        assert exc.constraint == "nu<=150"
        return
    assert 0.0 < p.kappa <= 1.0
    assert p.nu > 0.0
    assert p.gamma <= math.sqrt(p.mu_crit) + 1e-15
    assert p.kappa * p.nu == pytest.approx(math.sqrt(p.mu_crit - p.mu), rel=1e-12)
    if mu == 0.0:
        assert p.gamma == 0.0
