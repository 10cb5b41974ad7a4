import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from unidym.errors import DomainError, FlatnessError, PoleError, PreconditionError
from unidym.intervals import Domain, OrientedInterval, intersection_multiplicity
from unidym.maps import (critical_points, eval_derivatives, family, identity, image_interval, is_diffeo_on,
                         logistic, mobius, polynomial, split_derivative_roots, tangent)

coef = st.floats(-3, 3, allow_nan=False)
poly_coefs = st.lists(coef, min_size=2, max_size=6)
points = st.floats(-2, 2, allow_nan=False)


def test_eval_derivatives_examples():
    assert eval_derivatives(polynomial([0, 1, 0, 1]), 1.0) == [2, 4, 6, 6]
    assert eval_derivatives(identity(), 0.37) == [0.37, 1, 0, 0]
    v = eval_derivatives(logistic(4.0), 0.5, order=1)
    assert v == [1.0, 0.0]
    with pytest.raises(PreconditionError):
        eval_derivatives(identity(), 0.0, order=4)


def test_domain_is_enforced():
    with pytest.raises(DomainError):
        logistic(4.0)(1.5)
    with pytest.raises(PoleError):
        mobius(1, 0, 1, 1)(-1.0)


def test_critical_point_examples():
    (c,) = critical_points(logistic(4.0), OrientedInterval(0, 1))
    assert c.location == pytest.approx(0.5) and c.multiplicity == 1
    assert critical_points(polynomial([0, 1, 0, 1]), OrientedInterval(-1, 1)) == []
    (c,) = critical_points(polynomial([0, 0, 0, 1]), OrientedInterval(-1, 1))
    assert abs(c.location) < 1e-9 and c.multiplicity == 2
    with pytest.raises(FlatnessError):
        critical_points(polynomial([2.0]), OrientedInterval(-1, 1))


def test_image_and_diffeo_examples():
    g = logistic(4.0)
    I = image_interval(g, OrientedInterval(0, 1))
    assert (I.lo, I.hi) == pytest.approx((0.0, 1.0))
    I = image_interval(identity(), OrientedInterval(0.2, 0.3))
    assert (I.lo, I.hi) == (0.2, 0.3)
    I = image_interval(polynomial([0, 0, 1]), OrientedInterval(-1, 2))
    assert (I.lo, I.hi) == pytest.approx((0.0, 4.0))
    assert is_diffeo_on(g, OrientedInterval(0, 0.4))
    assert not is_diffeo_on(g, OrientedInterval(0.4, 0.6))
    assert is_diffeo_on(identity(), OrientedInterval(-5, 5))


def test_family_lookup():
    assert family("logistic") is logistic
    with pytest.raises(PreconditionError):
        family("henon")


def test_tangent_has_constant_schwarzian_jet():
    f = tangent(1.3)
    _, d1, d2, d3 = f.jet(0.2)
    assert d3 / d1 - 1.5 * (d2 / d1) ** 2 == pytest.approx(2 * 1.3**2, rel=1e-12)


def test_repeated_real_root_is_not_split_into_a_pair():
    # Df = 3 (x - 1)^2: a double real root, no non-real ones
    real, upper = split_derivative_roots(polynomial([0, 3, -3, 1]))
    assert upper == [] and all(abs(r - 1) < 1e-6 for r in real)


@given(poly_coefs, points)
def test_derivatives_match_finite_differences(c, x):
    f = polynomial(c)
    d = eval_derivatives(f, x)
    errs = []
    for h in (1e-3, 1e-4):
        fd = (float(f(x + h)) - float(f(x - h))) / (2 * h)
        errs.append(abs(fd - d[1]))
    # second-order convergence, up to rounding
    assert errs[1] <= errs[0] / 50 + 1e-7 * (1 + sum(abs(t) for t in c))


@given(poly_coefs, poly_coefs, points)
def test_composition_matches_expanded_polynomial(a, b, x):
    f, g = polynomial(a), polynomial(b)
    comp = f @ g
    coef = np.polynomial.polynomial.polyval(np.polynomial.Polynomial(b), a).coef
    direct = polynomial(coef)
    # the expanded form cancels badly; scale the slack by its own evaluation condition
    absc = np.abs(coef)
    for j, (u, v) in enumerate(zip(eval_derivatives(comp, x), eval_derivatives(direct, x))):
        cond = np.polynomial.polynomial.polyval(abs(x), np.polynomial.polynomial.polyder(absc, j) if j else absc)
        assert u == pytest.approx(v, rel=1e-9, abs=1e-12 * (1 + cond))


@given(poly_coefs)
def test_no_sign_change_of_derivative_is_missed(c):
    f = polynomial(c)
    assume(f.degree >= 1)
    R = OrientedInterval(-2, 2)
    crit = [p.location for p in critical_points(f, R)]
    xs = np.arange(-2, 2, 1e-4)
    d1 = f.jet(xs)[1]
    changes = np.flatnonzero(np.sign(d1[:-1]) * np.sign(d1[1:]) < 0)
    for i in changes:
        assert any(xs[i] - 1e-6 <= r <= xs[i + 1] + 1e-6 for r in crit)


def test_intervals_basics():
    T = OrientedInterval(0, 2)
    assert T.mid == 1 and T.half_length == 1
    assert T.scaled(2) == OrientedInterval(-1, 3)
    assert T.intersect(OrientedInterval(3, 4)) is None
    assert T.intersection_length(OrientedInterval(1, 5)) == 1
    with pytest.raises(ValueError):
        OrientedInterval(1, 0)
    assert Domain.interval(0, 1).extended(3.0).as_interval == OrientedInterval(-1, 2)


def test_intersection_multiplicity_examples():
    assert intersection_multiplicity([OrientedInterval(0, 1), OrientedInterval(2, 3)]) == 1
    nested = [OrientedInterval(-k, k) for k in range(1, 6)]
    assert intersection_multiplicity(nested) == 5
    assert intersection_multiplicity([OrientedInterval(0, 2), OrientedInterval(1, 3), OrientedInterval(2.5, 4)]) == 2
    assert intersection_multiplicity([]) == 0


@given(st.lists(st.tuples(st.floats(-5, 5), st.floats(0, 3)), min_size=1, max_size=12))
def test_intersection_multiplicity_matches_brute_force(raw):
    Is = [OrientedInterval(a, a + w) for a, w in raw]
    probes = [x for I in Is for x in (I.lo, I.hi)]
    brute = max(sum(I.contains(x) for I in Is) for x in probes)
    assert intersection_multiplicity(Is) == brute


def test_circle_domain_arc():
    D = Domain.circle(1.0)
    assert D.reduce(1.25) == pytest.approx(0.25)
    arc = D.arc(0.9, 0.1)
    assert arc.length == pytest.approx(0.2)
    assert math.isclose(D.length, 1.0)
