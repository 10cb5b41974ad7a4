import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from unidym.errors import CriticalPointError, PreconditionError
from unidym.intervals import OrientedInterval
from unidym.maps import cubic_perturbation, mobius, polynomial, tangent
from unidym.schwarzian import (cos_bound, ode_comparison_from_schwarzian, ode_comparison_oracle, schwarzian_at,
                               schwarzian_inf, schwarzian_sup, schwarzian_values, sharpness_witness, sinh_bound,
                               sinh_secondary_bound, verify_cos_bound, verify_sinh_bound)

M = mobius(2.0, 1.0, 1.0, 3.0)


def test_pointwise_examples():
    assert schwarzian_at(cubic_perturbation(0.01), 0.0) == pytest.approx(600, rel=1e-12)
    assert abs(schwarzian_at(M, 0.7)) < 1e-10
    assert schwarzian_at(polynomial([0, 0, 0, 1]), 0.5) == pytest.approx(-16)
    with pytest.raises(CriticalPointError):
        schwarzian_at(polynomial([0, 0, 1]), 0.0)


def test_sup_examples():
    assert abs(schwarzian_sup(M, OrientedInterval(0, 2))) < 1e-10
    assert schwarzian_sup(cubic_perturbation(0.01), OrientedInterval(-0.001, 0.001)) == pytest.approx(600, rel=1e-9)
    assert schwarzian_sup(polynomial([0, 0, 1]), OrientedInterval(1, 2)) == pytest.approx(-3 / 8)
    assert schwarzian_inf(polynomial([0, 0, 1]), OrientedInterval(1, 2)) == pytest.approx(-3 / 2)
    with pytest.raises(CriticalPointError):
        schwarzian_sup(polynomial([0, 0, 1]), OrientedInterval(-1, 1))


def test_cos_bound_examples():
    assert cos_bound(2, 1) == pytest.approx(math.cos(1) ** 2)
    assert round(cos_bound(2, 1), 6) == 0.291927
    T, J = OrientedInterval(0, 1), OrientedInterval(0.3, 0.6)
    rep = verify_cos_bound(M, T, J, 2.0)
    assert rep.hypothesis_ok and rep.measured_B == pytest.approx(1) and rep.holds
    rep = verify_cos_bound(M, T, J, 10.0)
    assert not rep.hypothesis_ok and rep.violations


def test_sinh_bound_examples():
    assert sinh_bound(2, 1, 0.5) == pytest.approx(2 * math.sinh(0.5))
    assert abs(sinh_bound(2, 1, 0.5) - 1.042190) < 1e-6
    assert sinh_secondary_bound(2, 1, 0.5) == pytest.approx(1 + 1 / 24)
    assert sinh_bound(2, 1, 0.5) >= sinh_secondary_bound(2, 1, 0.5)
    with pytest.raises(PreconditionError):
        verify_sinh_bound(polynomial([0, 0, 1]), OrientedInterval(1, 2), 0.0, 1.0)
    # x^2 on T = [1, 2] with centred J: Sf <= -3/8
    rep = verify_sinh_bound(polynomial([0, 0, 1]), OrientedInterval(1.25, 1.75), 0.25, 3 / 8)
    assert rep.hypothesis_ok and rep.measured_B >= rep.bound_value - 1e-12


def test_ode_comparison_examples():
    rep = ode_comparison_from_schwarzian(lambda x: 2.0, 0.0, 1.0, 1.0, 0.3, 2.0, "+")
    assert abs(rep.max_excess) < 1e-8
    rep = ode_comparison_oracle(M, OrientedInterval(0, 2), 0.2, 1.8, 1.0)
    assert rep.ordering_holds and rep.integration_error < 1e-9
    f = cubic_perturbation(0.01)
    rep = ode_comparison_oracle(f, OrientedInterval(0.1, 0.5), 0.1, 0.5, 1.0, sign="+")
    assert rep.ordering_holds and len(rep.xs) == 1025


def test_sharpness_witness_family():
    w = sharpness_witness(0.95 * math.pi)
    assert w.schwarzian == pytest.approx(2 * (0.95 * math.pi) ** 2)
    assert w.B < 0.05
    assert sharpness_witness(0.5).B > sharpness_witness(2.0).B
    with pytest.raises(PreconditionError):
        sharpness_witness(math.pi)


@given(st.floats(0.1, 3.0), st.floats(-1, 1))
def test_tangent_schwarzian_is_constant(k, x):
    assume(abs(k * x) < 1.4)
    assert schwarzian_at(tangent(k), x) == pytest.approx(2 * k * k, rel=1e-8)


@given(st.floats(-1, 1), st.floats(-1, 1), st.floats(0.2, 0.9))
def test_composition_rule(a, b, x):
    f = polynomial([0, 1, a, 0.1])
    g = polynomial([0, 1, b])
    df = f.jet(x)[1]
    assume(abs(df) > 1e-2 and abs(g.jet(float(f(x)))[1]) > 1e-2)
    lhs = schwarzian_at(g @ f, x)
    rhs = schwarzian_at(g, float(f(x))) * df**2 + schwarzian_at(f, x)
    assert lhs == pytest.approx(rhs, rel=1e-7, abs=1e-7)


@given(st.floats(0.05, 1.0), st.floats(-0.3, 0.3))
def test_schwarzian_of_cubic_family_matches_closed_form(lam, x):
    s = float(schwarzian_values(cubic_perturbation(lam), np.array([x]))[0])
    assert s == pytest.approx(6 * (lam - 6 * x * x) / (lam + 3 * x * x) ** 2, rel=1e-9)
