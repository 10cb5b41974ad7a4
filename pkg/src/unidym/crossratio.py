"""Cross-ratio, cross-ratio distortion and the sampled expansion checks."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.stats import qmc

from .errors import DegenerateConfigurationError, NotDiffeomorphismError, PreconditionError
from .intervals import OrientedInterval
from .maps import MapModel, is_diffeo_on

SLACK = 1e-9


@dataclass(frozen=True)
class CrossRatioContext:
    """``J`` strictly inside ``T`` together with the two gaps ``L`` and ``R``."""

    T: OrientedInterval
    J: OrientedInterval

    def __post_init__(self):
        if not (self.T.lo < self.J.lo and self.J.hi < self.T.hi):
            raise DegenerateConfigurationError(f"J={self.J} is not strictly inside T={self.T}")
        if self.J.length <= 0:
            raise DegenerateConfigurationError("J has zero length")

    @property
    def L(self) -> OrientedInterval:
        return OrientedInterval(self.T.lo, self.J.lo)

    @property
    def R(self) -> OrientedInterval:
        return OrientedInterval(self.J.hi, self.T.hi)


def _cr(t0, t1, t2, t3):
    """Cross-ratio of four ordered points (vectorised); orientation-free."""
    T = np.abs(t3 - t0)
    J = np.abs(t2 - t1)
    L = np.abs(t1 - t0)
    R = np.abs(t3 - t2)
    return T * J / (L * R)


def cross_ratio(T: OrientedInterval, J: OrientedInterval) -> float:
    """``|T||J| / (|L||R|)``."""
    CrossRatioContext(T, J)
    return float(_cr(T.lo, J.lo, J.hi, T.hi))


def space(T: OrientedInterval, J: OrientedInterval) -> float:
    """Largest ``delta`` with ``(1 + 2 delta) J`` contained in ``T``."""
    CrossRatioContext(T, J)
    return min(J.lo - T.lo, T.hi - J.hi) / J.length


def scaled_neighborhood(J: OrientedInterval, delta: float) -> OrientedInterval:
    """The ``delta``-scaled neighbourhood ``(1 + 2 delta) J``."""
    if delta < 0:
        raise PreconditionError("delta must be non-negative")
    return J.scaled(1.0 + 2.0 * delta)


def _require_diffeo(f: MapModel, T: OrientedInterval) -> None:
    if not is_diffeo_on(f, T):
        raise NotDiffeomorphismError(f"{f.name()} is not a diffeomorphism on {T}")


def distortion_points(f: MapModel, t0, t1, t2, t3):
    """``B`` for arrays of ordered points; no monotonicity check."""
    v = f._values(np.stack(np.broadcast_arrays(t0, t1, t2, t3)).astype(float))
    return _cr(v[0], v[1], v[2], v[3]) / _cr(t0, t1, t2, t3)


def distortion(f: MapModel, T: OrientedInterval, J: OrientedInterval, check: bool = True) -> float:
    """Cross-ratio distortion ``B(f, T, J) = D(f(T), f(J)) / D(T, J)``."""
    CrossRatioContext(T, J)
    f.domain.check_interval(T)
    if check:
        _require_diffeo(f, T)
    return float(distortion_points(f, T.lo, J.lo, J.hi, T.hi))


def log_distortion(f: MapModel, T: OrientedInterval, J: OrientedInterval, check: bool = True) -> float:
    return float(np.log(distortion(f, T, J, check=check)))


def nested_pairs(T: OrientedInterval, outer: int = 256, inner: int = 256):
    """Deterministic ``outer x inner`` nested configurations ``J* ⊂ T* ⊂ T``.

    Returns four arrays ``t0 < t1 < t2 < t3``.  Outer intervals always
    include ``T`` itself; inner ones come from a Halton sequence so both
    tiny and wide ``J*`` appear.
    """
    h_outer = qmc.Halton(d=2, scramble=False).random(outer + 1)[1:]
    h_inner = qmc.Halton(d=2, scramble=False).random(inner + 1)[1:]
    a = np.minimum(h_outer[:, 0], h_outer[:, 1])
    b = np.maximum(h_outer[:, 0], h_outer[:, 1])
    a[0], b[0] = 0.0, 1.0
    lo = T.lo + a * T.length
    hi = T.lo + b * T.length
    u = np.sort(h_inner, axis=1)
    u = 0.001 + 0.998 * u  # keep J* strictly inside T*
    t0 = lo[:, None]
    t3 = hi[:, None]
    t1 = t0 + u[None, :, 0] * (t3 - t0)
    t2 = t0 + u[None, :, 1] * (t3 - t0)
    t0, t1, t2, t3 = np.broadcast_arrays(t0, t1, t2, t3)
    keep = (t1 > t0) & (t2 > t1) & (t3 > t2)
    return t0[keep], t1[keep], t2[keep], t3[keep]


@dataclass
class MinimumPrincipleReport:
    verified: bool
    counterexample: Optional[float]
    reason: str
    min_derivative: float
    endpoint_derivatives: tuple
    min_B_cubed: float
    threshold: float


def minimum_principle_check(
    f_iterate: MapModel,
    T: OrientedInterval,
    rho: float,
    samples: int = 256,
    derivative_samples: int = 4096,
) -> MinimumPrincipleReport:
    """Sampled check of the pattern "endpoint expansion + distortion control => interior expansion".

    With ``|Df| > 1 + 2 rho`` at both endpoints of ``T`` and every sampled
    ``B(f, T*, J*)^3 > (1 + rho) / (1 + 2 rho)``, the minimum of ``|Df|``
    over ``T`` must exceed ``1 + rho``.  Returns the first violated
    condition's location as ``counterexample``.
    """
    if rho <= 0:
        raise PreconditionError("rho must be positive")
    _require_diffeo(f_iterate, T)
    threshold = (1.0 + rho) / (1.0 + 2.0 * rho)
    d_ends = tuple(float(abs(v)) for v in f_iterate._jet(np.array([T.lo, T.hi]))[1])
    xs = np.linspace(T.lo, T.hi, derivative_samples + 1)
    d = np.abs(f_iterate._jet(xs)[1])
    i_min = int(np.argmin(d))
    min_d = float(d[i_min])

    t0, t1, t2, t3 = nested_pairs(T, samples, samples)
    B3 = distortion_points(f_iterate, t0, t1, t2, t3) ** 3
    j_min = int(np.argmin(B3))
    min_B3 = float(B3[j_min])

    def report(ok, x, why):
        return MinimumPrincipleReport(ok, x, why, min_d, d_ends, min_B3, threshold)

    for x, dv in zip((T.lo, T.hi), d_ends):
        if not dv > 1.0 + 2.0 * rho - SLACK:
            return report(False, x, "endpoint derivative <= 1+2rho")
    if not min_B3 > threshold - SLACK:
        return report(False, float(0.5 * (t1[j_min] + t2[j_min])), "cross-ratio distortion below threshold")
    if not min_d > 1.0 + rho - SLACK:
        return report(False, float(xs[i_min]), "interior derivative <= 1+rho")
    return report(True, None, "verified")


@dataclass
class ExpansionReport:
    hypotheses_ok: bool
    beta_measured: float
    theta: float
    derivative_at_theta: float
    found: bool


def expansion_principle_check(
    f: MapModel, T: OrientedInterval, M: OrientedInterval, rho: float, beta: float, samples: int = 4096
) -> ExpansionReport:
    """Sampled version of the expansion step used before the minimum principle.

    Hypotheses: ``f`` monotone on ``T``, ``f(T) ⊇ T`` and both components of
    ``f(T) \\ f(M)`` at least ``beta |f(T)|``.  Conclusion looked for: a
    point ``theta`` in ``T`` with ``|Df(theta)| > 1 + 2 rho``.
    """
    ctx = CrossRatioContext(T, M)
    _require_diffeo(f, T)
    v = f._values(np.array([T.lo, M.lo, M.hi, T.hi]))
    image = abs(v[3] - v[0])
    beta_measured = min(abs(v[1] - v[0]), abs(v[3] - v[2])) / image
    fT = OrientedInterval.spanning(v[0], v[3])
    ok = beta_measured >= beta and fT.contains_interval(ctx.T, tol=SLACK)
    xs = np.linspace(T.lo, T.hi, samples + 1)
    d = np.abs(f._jet(xs)[1])
    i = int(np.argmax(d))
    return ExpansionReport(ok, float(beta_measured), float(xs[i]), float(d[i]), bool(d[i] > 1.0 + 2.0 * rho))
