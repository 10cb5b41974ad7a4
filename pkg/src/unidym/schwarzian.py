"""Schwarzian derivative and the cos^2 / sinh cross-ratio distortion bounds."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.optimize import minimize_scalar

from .crossratio import SLACK, CrossRatioContext, distortion, scaled_neighborhood
from .errors import CriticalPointError, NumericError, PreconditionError
from .intervals import OrientedInterval
from .maps import MapModel, is_diffeo_on, tangent

SUP_SAMPLES = 4096
ODE_STEPS = 4096
ODE_COMPARE_POINTS = 1024


def _schwarzian_from_jet(d1, d2, d3):
    r = d2 / d1
    return d3 / d1 - 1.5 * r * r


def schwarzian_values(f: MapModel, xs) -> np.ndarray:
    """``Sf`` on an array; raises if ``Df`` vanishes at any sample."""
    xs = np.asarray(xs, dtype=float)
    f.domain.check(xs)
    _, d1, d2, d3 = f._jet(xs)
    d1 = np.asarray(d1, dtype=float)
    if np.any(d1 == 0.0):
        bad = xs[d1 == 0.0] if xs.ndim else xs
        raise CriticalPointError(f"Df vanishes at {bad!r}")
    return _schwarzian_from_jet(d1, d2, d3)


def schwarzian_at(f: MapModel, x: float) -> float:
    """``D^3f/Df - 1.5 (D^2f/Df)^2`` at a regular point ``x``."""
    return float(schwarzian_values(f, float(x)))


def _require_regular(f: MapModel, T: OrientedInterval) -> None:
    if not is_diffeo_on(f, T):
        raise CriticalPointError(f"{f.name()} has a critical point in {T}")


def _extremum(f: MapModel, T: OrientedInterval, sign: float, samples: int) -> float:
    _require_regular(f, T)
    xs = np.linspace(T.lo, T.hi, samples + 1)
    s = sign * schwarzian_values(f, xs)
    i = int(np.argmax(s))
    best = float(s[i])
    if T.length > 0:
        lo, hi = xs[max(i - 1, 0)], xs[min(i + 1, samples)]
        res = minimize_scalar(
            lambda x: -sign * schwarzian_at(f, x), bounds=(lo, hi), method="bounded",
            options={"xatol": 1e-14 * max(1.0, abs(xs[i]))},
        )
        if res.success:
            best = max(best, float(-res.fun))
    return sign * best


def schwarzian_sup(f: MapModel, T: OrientedInterval, samples: int = SUP_SAMPLES) -> float:
    """Sampled supremum of ``Sf`` over ``T`` refined near the best sample.

    Never smaller than any sampled value.
    """
    return _extremum(f, T, 1.0, samples)


def schwarzian_inf(f: MapModel, T: OrientedInterval, samples: int = SUP_SAMPLES) -> float:
    return _extremum(f, T, -1.0, samples)


@dataclass
class SchwarzianBoundReport:
    bound_value: float
    measured_B: float
    margin: float
    hypothesis_ok: bool
    violations: list = field(default_factory=list)
    secondary_bound: Optional[float] = None
    secondary_margin: Optional[float] = None
    schwarzian_extreme: Optional[float] = None

    @property
    def holds(self) -> bool:
        ok = self.margin >= -SLACK
        if self.secondary_margin is not None:
            ok = ok and self.secondary_margin >= -SLACK
        return ok


def cos_bound(C: float, length: float) -> float:
    return math.cos(math.sqrt(C / 2.0) * length) ** 2


def sinh_bound(C: float, length: float, delta: float) -> float:
    z = math.sqrt(C / 2.0) * length / (1.0 + 2.0 * delta)
    return math.sinh(z) / z if z > 0 else 1.0


def sinh_secondary_bound(C: float, length: float, delta: float) -> float:
    return 1.0 + C * length**2 / (12.0 * (1.0 + 2.0 * delta) ** 2)


def verify_cos_bound(f: MapModel, T: OrientedInterval, J: OrientedInterval, C: float) -> SchwarzianBoundReport:
    """Compare ``B(f, T, J)`` with ``cos^2(sqrt(C/2) |T|)``.

    Hypothesis failures (``C <= 0``, ``Sf >= C`` somewhere, ``C|T|^2 >=
    pi^2/2``) are reported with ``hypothesis_ok=False``; the bound is
    still evaluated so the report can be inspected.
    """
    CrossRatioContext(T, J)
    violations = []
    if not C > 0:
        violations.append("C must be positive")
    if not C * T.length**2 < math.pi**2 / 2.0:
        violations.append("C|T|^2 >= pi^2/2")
    s_sup = schwarzian_sup(f, T)
    if not s_sup < C + SLACK:
        violations.append(f"sup Sf = {s_sup!r} >= C")
    bound = cos_bound(max(C, 0.0), T.length)
    B = distortion(f, T, J, check=False)
    return SchwarzianBoundReport(bound, B, B - bound, not violations, violations, schwarzian_extreme=s_sup)


def verify_sinh_bound(f: MapModel, J: OrientedInterval, delta: float, C: float) -> SchwarzianBoundReport:
    """Compare ``B(f, T, J)`` for ``T = (1+2 delta) J`` with the sinh bound and its quadratic minorant."""
    if not delta > 0:
        raise PreconditionError("delta must be positive so that J lies strictly inside T")
    T = scaled_neighborhood(J, delta)
    f.domain.check_interval(T)
    violations = []
    if not C > 0:
        violations.append("C must be positive")
    s_sup = schwarzian_sup(f, T)
    if not s_sup < -C + SLACK:
        violations.append(f"sup Sf = {s_sup!r} >= -C")
    bound = sinh_bound(max(C, 0.0), T.length, delta)
    second = sinh_secondary_bound(max(C, 0.0), T.length, delta)
    B = distortion(f, T, J, check=False)
    return SchwarzianBoundReport(
        bound, B, B - bound, not violations, violations,
        secondary_bound=second, secondary_margin=bound - second, schwarzian_extreme=s_sup,
    )


# ---------------------------------------------------------------------------
# ODE comparison
# ---------------------------------------------------------------------------

@dataclass
class ODEComparisonReport:
    ordering_holds: bool
    xs: np.ndarray
    phi: np.ndarray
    psi: np.ndarray
    max_excess: float  # max of phi - psi over the samples, <= 0 when ordering holds
    integration_error: Optional[float] = None  # vs the exact 1/sqrt(Df), when available


def comparison_solution(xs, u1: float, u2: float, v1: float, v2: float, C: float, sign: str):
    """Solution of ``psi'' = -/+ (C/2) psi`` with ``psi(u1) = v1``, ``psi(u2) = v2``.

    ``sign='+'`` is the trigonometric case (upper bound ``Sf < C``),
    ``sign='-'`` the hyperbolic one (``Sf < -C``).
    """
    if sign not in ("+", "-"):
        raise ValueError("sign must be '+' or '-'")
    q = 0.5 * C if sign == "+" else -0.5 * C  # psi'' = -q psi
    w = math.sqrt(abs(q))
    h = u2 - u1
    t = np.asarray(xs, dtype=float) - u1
    if w * h == 0.0:
        return v1 + (v2 - v1) * t / h
    if q > 0:
        if w * h >= math.pi:
            raise PreconditionError("comparison solution changes sign: sqrt(C/2)(u2-u1) >= pi")
        return v1 * np.cos(w * t) + (v2 - v1 * math.cos(w * h)) / math.sin(w * h) * np.sin(w * t)
    return v1 * np.cosh(w * t) + (v2 - v1 * math.cosh(w * h)) / math.sinh(w * h) * np.sinh(w * t)


def integrate_phi(S: Callable, u1: float, u2: float, phi0: float, dphi0: float, step: float,
                  compare_points: int = ODE_COMPARE_POINTS):
    """Fixed-step RK4 for ``phi'' = -S(x) phi / 2`` on ``[u1, u2]``.

    The step count is a multiple of ``compare_points`` no coarser than
    ``step``; returns the solution at ``compare_points + 1`` evenly spaced
    nodes.
    """
    if not u2 > u1:
        raise PreconditionError("need u1 < u2")
    per = max(1, math.ceil((u2 - u1) / step / compare_points))
    n = per * compare_points
    h = (u2 - u1) / n

    def rhs(x, y):
        return np.array([y[1], -0.5 * S(x) * y[0]])

    y = np.array([phi0, dphi0], dtype=float)
    out = np.empty(compare_points + 1)
    out[0] = y[0]
    x = u1
    for k in range(1, n + 1):
        k1 = rhs(x, y)
        k2 = rhs(x + 0.5 * h, y + 0.5 * h * k1)
        k3 = rhs(x + 0.5 * h, y + 0.5 * h * k2)
        k4 = rhs(x + h, y + h * k3)
        y = y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        x = u1 + k * h
        if not np.all(np.isfinite(y)):
            raise NumericError(f"RK4 step failed at x={x!r}")
        if k % per == 0:
            out[k // per] = y[0]
    return np.linspace(u1, u2, compare_points + 1), out


def ode_comparison_from_schwarzian(S: Callable, u1: float, u2: float, phi0: float, dphi0: float,
                                   C: float, sign: str = "+", step: Optional[float] = None,
                                   tol: float = 1e-9) -> ODEComparisonReport:
    """Integrate ``phi`` for a given Schwarzian profile and compare with the constant-coefficient solution."""
    step = (u2 - u1) / ODE_STEPS if step is None else step
    xs, phi = integrate_phi(S, u1, u2, phi0, dphi0, step)
    psi = comparison_solution(xs, u1, u2, phi[0], phi[-1], C, sign)
    excess = float(np.max(phi - psi))
    return ODEComparisonReport(excess <= tol * max(1.0, float(np.max(np.abs(psi)))), xs, phi, psi, excess)


def ode_comparison_oracle(f: MapModel, T: OrientedInterval, u1: float, u2: float, C: float,
                          sign: str = "+") -> ODEComparisonReport:
    """Check ``phi <= psi`` on ``[u1, u2]`` for ``phi = 1/sqrt|Df|``.

    ``phi`` is obtained by integrating its linear second-order equation
    from the exact initial data at ``u1`` with step ``|T|/4096``; ``psi``
    matches ``phi`` at both ends.
    """
    if not (T.contains(u1) and T.contains(u2) and u1 < u2):
        raise PreconditionError("need u1 < u2 inside T")
    _require_regular(f, T)
    _, d1, d2, _ = f._jet(float(u1))
    a = abs(d1)
    phi0 = a ** -0.5
    dphi0 = -0.5 * a ** -1.5 * d2 * math.copysign(1.0, d1)

    def S(x):
        return float(schwarzian_values(f, x))

    rep = ode_comparison_from_schwarzian(S, u1, u2, phi0, dphi0, C, sign, step=T.length / ODE_STEPS)
    exact = np.abs(f._jet(rep.xs)[1]) ** -0.5
    rep.integration_error = float(np.max(np.abs(exact - rep.phi)))
    return rep


# ---------------------------------------------------------------------------
# Size hypothesis is needed: a constant-positive-Schwarzian family
# ---------------------------------------------------------------------------

@dataclass
class SharpnessWitness:
    k: float
    schwarzian: float
    B: float
    T: OrientedInterval
    J: OrientedInterval


def sharpness_witness(k: float, J: OrientedInterval = OrientedInterval(0.25, 0.75)) -> SharpnessWitness:
    """``B`` of ``tan(k (x - 1/2))`` on ``[0, 1]``; ``Sf = 2k^2`` everywhere.

    As ``k`` approaches ``pi`` the map stretches the ends of ``[0, 1]``
    without bound and ``B`` tends to 0.
    """
    if not 0 < k < math.pi:
        raise PreconditionError("need 0 < k < pi so that [0, 1] avoids the poles")
    T = OrientedInterval(0.0, 1.0)
    f = tangent(k, 0.5)
    return SharpnessWitness(k, 2.0 * k * k, distortion(f, T, J, check=False), T, J)
