import math

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from unidym.crossratio import (cross_ratio, distortion, minimum_principle_check, scaled_neighborhood, space)
from unidym.errors import DegenerateConfigurationError, NotDiffeomorphismError, PreconditionError
from unidym.intervals import OrientedInterval
from unidym.maps import affine, identity, logistic, mobius, polynomial

unit = st.floats(0.01, 0.99)


def test_cross_ratio_examples():
    assert cross_ratio(OrientedInterval(0, 1), OrientedInterval(0.25, 0.75)) == pytest.approx(8)
    assert cross_ratio(OrientedInterval(0, 4), OrientedInterval(1, 2)) == pytest.approx(2)
    with pytest.raises(DegenerateConfigurationError):
        cross_ratio(OrientedInterval(0, 1), OrientedInterval(0, 0.5))


def test_distortion_examples():
    T, J = OrientedInterval(0, 1), OrientedInterval(0.25, 0.5)
    assert abs(distortion(mobius(1, 0, 1, 1), T, J) - 1) < 1e-10
    assert distortion(identity(), T, J) == pytest.approx(1, abs=1e-14)
    assert distortion(polynomial([0, 0, 1]), OrientedInterval(1, 2), OrientedInterval(1.2, 1.5)) > 1
    with pytest.raises(NotDiffeomorphismError):
        distortion(logistic(4.0), T, OrientedInterval(0.4, 0.6))


def test_scaled_neighborhood_examples():
    assert scaled_neighborhood(OrientedInterval(0, 1), 0.5) == OrientedInterval(-0.5, 1.5)
    assert scaled_neighborhood(OrientedInterval(2, 4), 0) == OrientedInterval(2, 4)
    assert scaled_neighborhood(OrientedInterval(-1, 1), 1) == OrientedInterval(-3, 3)
    with pytest.raises(PreconditionError):
        scaled_neighborhood(OrientedInterval(0, 1), -0.1)


def test_space_inverts_scaling():
    J = OrientedInterval(1, 2)
    assert space(scaled_neighborhood(J, 0.3), J) == pytest.approx(0.3)


def test_minimum_principle_examples():
    assert minimum_principle_check(affine(2.0), OrientedInterval(0, 0.1), 0.5).verified
    rep = minimum_principle_check(identity(), OrientedInterval(0, 1), 0.1)
    assert not rep.verified and rep.counterexample is not None
    f = polynomial([0, 1, 0, 1])
    assert minimum_principle_check(f, OrientedInterval(0.5, 0.6), 0.3).verified


def _config(a, b, c, d):
    t = sorted((a, b, c, d))
    assume(min(t[1] - t[0], t[2] - t[1], t[3] - t[2]) > 1e-3)
    return OrientedInterval(t[0], t[3]), OrientedInterval(t[1], t[2])


@given(unit, unit, unit, unit, st.floats(-5, 5), st.floats(0.1, 5))
def test_cross_ratio_is_affine_invariant(a, b, c, d, shift, scale):
    T, J = _config(a, b, c, d)
    T2 = OrientedInterval(scale * T.lo + shift, scale * T.hi + shift)
    J2 = OrientedInterval(scale * J.lo + shift, scale * J.hi + shift)
    assert cross_ratio(T2, J2) == pytest.approx(cross_ratio(T, J), rel=1e-8)


@given(unit, unit, unit, unit)
def test_distortion_is_multiplicative_under_composition(a, b, c, d):
    T, J = _config(a, b, c, d)
    f = polynomial([0.1, 1, 0.5])  # increasing on [0, 1]
    g = polynomial([0, 1, 0, 0.3])  # increasing everywhere
    fT = OrientedInterval(float(f(T.lo)), float(f(T.hi)))
    fJ = OrientedInterval(float(f(J.lo)), float(f(J.hi)))
    lhs = distortion(g @ f, T, J)
    assert lhs == pytest.approx(distortion(g, fT, fJ) * distortion(f, T, J), rel=1e-8)


@given(unit, unit, unit, unit, st.floats(-2, 2), st.floats(-2, 2))
def test_mobius_preserves_cross_ratio(a, b, c, d, p, q):
    T, J = _config(a, b, c, d)
    # pole at -1 - p**2 stays left of [0, 1]
    m = mobius(1.0, q, 1.0, 1.0 + p * p)
    assume(abs(m.det) > 1e-3)
    assert distortion(m, T, J) == pytest.approx(1, abs=1e-7)
