import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from unidym.chains import Chain, pull_back_chain
from unidym.critical_intervals import (CriticalIntervalSet, composed_distortion_accounting,
                                       compute_critical_intervals, part1_bound, part2_bound, random_part1_family,
                                       schwarzian_upper_bound, verify_excep_part1, verify_excep_part2)
from unidym.crossratio import scaled_neighborhood
from unidym.errors import PreconditionError
from unidym.intervals import OrientedInterval
from unidym.maps import cubic_perturbation, logistic, mobius, polynomial
from unidym.schwarzian import schwarzian_at


def test_interval_examples():
    (c,) = compute_critical_intervals(polynomial([0, 1, 0, 1]))
    assert c.a == pytest.approx(0, abs=1e-12) and c.b == pytest.approx(1 / math.sqrt(3))
    assert (c.E.lo, c.E.hi) == pytest.approx((-1.1547005, 1.1547005))
    assert compute_critical_intervals(polynomial([0, -1, 0, 1])).d_E == 0
    (c,) = compute_critical_intervals(polynomial([0, 0, 1, 0, 1]))
    assert c.b == pytest.approx(1 / math.sqrt(2)) and c.E.hi == pytest.approx(math.sqrt(2))
    with pytest.raises(PreconditionError):
        compute_critical_intervals(mobius(1, 0, 1, 1))


def test_upper_bound_examples():
    lam = 0.01
    f = cubic_perturbation(lam)
    S = compute_critical_intervals(f)
    assert schwarzian_upper_bound(f, 0.0, S) == pytest.approx(6 / lam)
    assert schwarzian_at(f, 0.0) == pytest.approx(6 / lam)
    g = polynomial([0, -1, 0, 1])
    assert schwarzian_upper_bound(g, 0.2, compute_critical_intervals(g)) == 0 and schwarzian_at(g, 0.2) < 0
    h = polynomial([0, 1, 0, 1])
    assert schwarzian_upper_bound(h, 2.0, compute_critical_intervals(h)) == 0 and schwarzian_at(h, 2.0) < 0


def test_part1_examples():
    assert part1_bound(0.05, 1, 1) == pytest.approx(math.exp(-0.8))
    assert round(part1_bound(0.05, 1, 1), 6) == 0.449329
    f = polynomial([0, 1, 0, 1])
    rep = verify_excep_part1(f, [(OrientedInterval(2, 3), OrientedInterval(2.4, 2.6))], 0.05)
    assert rep.hypotheses_ok and rep.product_B > 1 > rep.bound
    f = cubic_perturbation(0.01)
    S = compute_critical_intervals(f)
    Ts = random_part1_family(f, S, 0.05, np.random.default_rng(7), m=20)
    rep = verify_excep_part1(f, Ts, 0.05, S=S)
    assert rep.hypotheses_ok and rep.product_B >= rep.bound


def test_part1_reports_overlap_violation():
    f = cubic_perturbation(0.01)
    rep = verify_excep_part1(f, [(OrientedInterval(0.01, 0.5), OrientedInterval(0.1, 0.2))], 0.05)
    assert not rep.hypotheses_ok and rep.violations


def test_part2_examples():
    expected = 1 + (1 / 12) * (16 / 153 - 32 * 0.0001 / 4) / 9
    assert part2_bound(2, 0.01, 1, 1) == pytest.approx(expected)
    assert round(part2_bound(2, 0.01, 1, 1), 6) == 1.000961
    f = polynomial([0, 1, 0, 1])
    J = OrientedInterval(1.3, 1.35)
    T = scaled_neighborhood(J, 1.0)
    rep = verify_excep_part2(f, T, J, 2.0, 0.01, 1.0)
    with pytest.raises(PreconditionError):
        verify_excep_part2(f, T, J, 2.0, 1 / 13, 1.0)
    assert rep.B > 0


def test_part2_near_critical_point():
    f = logistic(4.0)
    J = OrientedInterval(0.56, 0.57)
    T = scaled_neighborhood(J, 0.5)
    rep = verify_excep_part2(f, T, J, 8.0, 0.01, 0.5)
    assert rep.case == "critical-point" and rep.holds


def test_accounting_examples():
    m = mobius(1, 0, 0.5, 1)
    rep = composed_distortion_accounting(m, Chain([OrientedInterval(0, 1), OrientedInterval(0, 1 / 1.5)]),
                                         OrientedInterval(0.3, 0.6), 2.0)
    assert abs(rep.log_B_total) < 1e-12 and rep.consistent
    g = logistic(4.0)
    x = [0.21]
    for _ in range(10):
        x.append(float(g(x[-1])))
    c = pull_back_chain(g, OrientedInterval(x[-1] - 1e-3, x[-1] + 1e-3), x)
    assert c.order == 0
    rep = composed_distortion_accounting(g, c, c.head.scaled(0.5), 0.05)
    assert rep.consistent and len(rep.steps) == 10


def test_accounting_lists_long_steps():
    g = logistic(4.0)
    c = Chain([OrientedInterval(0.05, 0.2), OrientedInterval(float(g(0.05)), float(g(0.2)))])
    rep = composed_distortion_accounting(g, c, OrientedInterval(0.1, 0.12), 0.01)
    assert rep.hypothesis_failures and rep.hypothesis_failures[0][0] == 0


@given(st.lists(st.floats(-2, 2), min_size=3, max_size=7).filter(lambda c: abs(c[-1]) > 0.05))
def test_schwarzian_is_dominated_by_critical_intervals(c):
    f = polynomial(c)
    S = compute_critical_intervals(f)
    assert 2 * S.d_E <= f.degree - 1
    xs = np.linspace(-3, 3, 601)
    _, d1, d2, d3 = f.jet(xs)
    ok = np.abs(d1) > 1e-6
    s = d3[ok] / d1[ok] - 1.5 * (d2[ok] / d1[ok]) ** 2
    bound = np.array([schwarzian_upper_bound(f, x, S) for x in xs[ok]])
    outside = bound == 0
    assert np.all(s[outside] < 1e-9 * (1 + np.abs(s[outside])))
    inside = ~outside
    assert np.all(s[inside] <= bound[inside] * (1 + 1e-9) + 1e-9)


def test_empty_set_has_no_overlap():
    assert CriticalIntervalSet().max_overlap_ratio(OrientedInterval(0, 1)) == 0
