"""Critical intervals of a polynomial and distortion bounds built on them.

A non-real root ``a + ib`` of ``Df`` gives ``E = [a - 2b, a + 2b]``.
Outside the union of these intervals a real polynomial has negative
Schwarzian derivative; inside, ``Sf < 2 d_E / b^2`` for the shortest
``E`` that contains the point.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .crossratio import SLACK, CrossRatioContext, distortion, distortion_points
from .errors import CriticalPointError, NumericError, PreconditionError
from .intervals import OrientedInterval, intersection_multiplicity
from .maps import MapModel, Polynomial, critical_points, is_diffeo_on, split_derivative_roots
from .schwarzian import cos_bound, schwarzian_at, schwarzian_sup


@dataclass(frozen=True)
class CriticalInterval:
    a: float
    b: float

    def __post_init__(self):
        if not self.b > 0:
            raise ValueError("imaginary part must be positive")

    @property
    def E(self) -> OrientedInterval:
        return OrientedInterval(self.a - 2 * self.b, self.a + 2 * self.b)

    @property
    def double(self) -> OrientedInterval:
        """``2E``."""
        return self.E.scaled(2.0)

    @property
    def length(self) -> float:
        return 4.0 * self.b


@dataclass(frozen=True)
class CriticalIntervalSet:
    intervals: tuple = ()
    degree: int = 0

    @property
    def d_E(self) -> int:
        return len(self.intervals)

    def __iter__(self):
        return iter(self.intervals)

    def __len__(self):
        return len(self.intervals)

    def containing(self, x: float) -> list:
        return [c for c in self.intervals if c.E.contains(x)]

    def max_overlap_ratio(self, T: OrientedInterval) -> float:
        """``max_j |T ∩ E_j| / |E_j|`` (0 without critical intervals)."""
        return max((T.intersection_length(c.E) / c.length for c in self.intervals), default=0.0)


def _as_polynomial(f: MapModel) -> Polynomial:
    p = f.as_polynomial()
    if p is None:
        raise PreconditionError(f"{f.name()} is not a polynomial")
    return p


def compute_critical_intervals(f: MapModel) -> CriticalIntervalSet:
    p = _as_polynomial(f)
    if p.degree < 2:
        raise PreconditionError("critical intervals need degree >= 2")
    _, upper = split_derivative_roots(p)
    for z in upper:
        if not (np.isfinite(z.real) and np.isfinite(z.imag)):
            raise NumericError("root finder returned a non-finite root")
    items = sorted((CriticalInterval(float(z.real), float(z.imag)) for z in upper), key=lambda c: c.b)
    S = CriticalIntervalSet(tuple(items), p.degree)
    if 2 * S.d_E > p.degree - 1:
        raise NumericError(f"{S.d_E} conjugate pairs for degree {p.degree}")
    return S


def schwarzian_upper_bound(f: MapModel, x: float, S: CriticalIntervalSet) -> float:
    """``2 d_E / b_j^2`` for the shortest ``E_j`` containing ``x``; 0 (meaning ``Sf < 0``) otherwise."""
    hits = S.containing(x)
    if not hits:
        return 0.0
    c = min(hits, key=lambda c: c.b)
    return 2.0 * S.d_E / c.b**2


def d_E_profile(make, params: Sequence[float]):
    """``d_E`` along a parametric family and the indices where it changes."""
    ds = [compute_critical_intervals(make(a)).d_E for a in params]
    jumps = [i for i in range(1, len(ds)) if ds[i] != ds[i - 1]]
    return ds, jumps


# ---------------------------------------------------------------------------
# Product bound over a family of intervals
# ---------------------------------------------------------------------------

@dataclass
class Part1Report:
    product_B: float
    bound: float
    N: int
    d_E: int
    kappa: float
    hypotheses_ok: bool
    violations: list = field(default_factory=list)

    @property
    def margin(self) -> float:
        return self.product_B - self.bound

    @property
    def holds(self) -> bool:
        return self.product_B > self.bound - SLACK


def part1_bound(kappa: float, N: int, d_E: int) -> float:
    return math.exp(-16.0 * kappa * N * d_E**2)


def verify_excep_part1(f: MapModel, Ts: Sequence, kappa: float, N: Optional[int] = None,
                       S: Optional[CriticalIntervalSet] = None) -> Part1Report:
    """``prod B(f, T_i, J_i)`` against ``exp(-16 kappa N d_E^2)``.

    ``N`` is computed from the ``T_i``; a caller-supplied ``N`` is only
    checked (it must not be smaller than the computed one).  Hypothesis
    failures are itemised, never raised.
    """
    S = compute_critical_intervals(f) if S is None else S
    violations = []
    if S.d_E > 0 and not 0 < kappa < 1.0 / (4.0 * math.sqrt(S.d_E)):
        violations.append("kappa outside (0, 1/(4 sqrt d_E))")
    if S.d_E == 0 and not kappa > 0:
        violations.append("kappa must be positive")
    N_meas = intersection_multiplicity(T for T, _ in Ts) if Ts else 0
    if N is not None and N < N_meas:
        violations.append(f"declared N={N} below measured multiplicity {N_meas}")
    N_used = N_meas if N is None else N
    log_prod = 0.0
    for i, (T, J) in enumerate(Ts):
        CrossRatioContext(T, J)
        if not is_diffeo_on(f, T):
            violations.append(f"T_{i} contains a critical point")
            continue
        for j, c in enumerate(S):
            if not T.intersection_length(c.E) < kappa * c.length:
                violations.append(f"|T_{i} ∩ E_{j}| >= kappa |E_{j}|")
        log_prod += math.log(distortion(f, T, J, check=False))
    return Part1Report(math.exp(log_prod), part1_bound(kappa, N_used, S.d_E), N_used, S.d_E, kappa,
                       not violations, violations)


# ---------------------------------------------------------------------------
# Definite expansion near critical points / critical intervals
# ---------------------------------------------------------------------------

def part2_bound(lam: float, kappa: float, d_E: int, delta: float) -> float:
    inner = 16.0 / (17.0 * (1.0 + lam) ** 2) - 32.0 * kappa**2 * d_E / lam**2
    return 1.0 + inner / (12.0 * (1.0 + 2.0 * delta) ** 2)


@dataclass
class Part2Report:
    B: float
    bound: float
    case: Optional[str]  # "critical-point", "critical-interval" or None (not applicable)
    hypotheses_ok: bool
    violations: list = field(default_factory=list)

    @property
    def applicable(self) -> bool:
        return self.case is not None and self.hypotheses_ok

    @property
    def margin(self) -> float:
        return self.B - self.bound

    @property
    def holds(self) -> bool:
        return self.B > self.bound - SLACK


def verify_excep_part2(f: MapModel, T: OrientedInterval, J: OrientedInterval, lam: float, kappa: float,
                       delta: float, S: Optional[CriticalIntervalSet] = None, tol: float = 1e-9) -> Part2Report:
    """``B(f, T, J)`` against the definite-expansion bound.

    ``T`` must be the ``delta``-scaled neighbourhood of ``J`` (checked to
    ``tol``).  When neither triggering case applies the report has
    ``case=None`` and the bound is informational only.
    """
    S = compute_critical_intervals(f) if S is None else S
    if S.d_E > 0 and not 0 < kappa < 1.0 / (13.0 * math.sqrt(S.d_E)):
        raise PreconditionError("kappa must lie in (0, 1/(13 sqrt d_E))")
    if not kappa > 0:
        raise PreconditionError("kappa must be positive")
    if not lam > 1:
        raise PreconditionError("lambda must exceed 1")
    if not delta > 0:
        raise PreconditionError("delta must be positive")
    CrossRatioContext(T, J)
    violations = []
    scaled = J.scaled(1.0 + 2.0 * delta)
    if abs(scaled.lo - T.lo) > tol * max(1.0, T.length) or abs(scaled.hi - T.hi) > tol * max(1.0, T.length):
        violations.append("T is not the delta-scaled neighbourhood of J")
    if not is_diffeo_on(f, T):
        raise CriticalPointError(f"{f.name()} is not a diffeomorphism on {T}")
    for j, c in enumerate(S):
        if not T.intersection_length(c.E) < kappa * c.length / lam:
            violations.append(f"|T ∩ E_{j}| >= kappa |E_{j}| / lambda")
    lamT = T.scaled(lam)
    case = None
    if critical_points(f, lamT):
        case = "critical-point"
    else:
        for c in S:
            if not c.double.contains_interval(T) and lamT.intersects(c.E):
                case = "critical-interval"
                break
    B = distortion(f, T, J, check=False)
    return Part2Report(B, part2_bound(lam, kappa, S.d_E, delta), case, not violations, violations)


# ---------------------------------------------------------------------------
# Random admissible configurations (used by tests and sweeps)
# ---------------------------------------------------------------------------

def _search_region(f: MapModel, S: CriticalIntervalSet) -> OrientedInterval:
    pts = [c.location for c in critical_points(f, OrientedInterval(-1e6, 1e6))]
    for c in S:
        pts += [c.a - 4 * c.b, c.a + 4 * c.b]
    if not pts:
        return OrientedInterval(-1.0, 1.0)
    lo, hi = min(pts), max(pts)
    pad = max(1.0, hi - lo) * 0.5
    return OrientedInterval(lo - pad, hi + pad)


def random_part1_family(f: MapModel, S: CriticalIntervalSet, kappa: float, rng, m: int = 20,
                        region: Optional[OrientedInterval] = None, max_tries: int = 10000):
    """``m`` random pairs ``(T_i, J_i)`` meeting the overlap and diffeomorphism hypotheses.

    Half the intervals are short ones placed near the critical intervals
    (where ``Sf`` may be positive), half are drawn anywhere in ``region``.
    """
    region = _search_region(f, S) if region is None else region
    scale = min((c.length for c in S), default=region.length)
    out = []
    for _ in range(max_tries):
        if len(out) == m:
            break
        if S.d_E and rng.random() < 0.5:
            c = S.intervals[rng.integers(S.d_E)]
            center = rng.uniform(c.E.lo, c.E.hi)
            length = kappa * scale * rng.uniform(0.05, 0.999)
        else:
            center = rng.uniform(region.lo, region.hi)
            length = region.length * 10 ** rng.uniform(-3, -0.5)
        T = OrientedInterval.around(center, 0.5 * length)
        if S.max_overlap_ratio(T) >= kappa or not is_diffeo_on(f, T):
            continue
        u = np.sort(rng.uniform(0.001, 0.999, 2))
        if u[1] - u[0] < 1e-6:
            continue
        J = OrientedInterval(T.lo + u[0] * T.length, T.lo + u[1] * T.length)
        out.append((T, J))
    if len(out) < m:
        raise NumericError("could not draw enough admissible intervals")
    return out


def random_part2_config(f: MapModel, S: CriticalIntervalSet, rng, region: Optional[OrientedInterval] = None,
                        max_tries: int = 20000):
    """Rejection-sample ``(T, J, lam, kappa, delta)`` for which the definite-expansion bound applies."""
    region = _search_region(f, S) if region is None else region
    crit = [c.location for c in critical_points(f, region)]
    k_max = 1.0 / (13.0 * math.sqrt(S.d_E)) if S.d_E else 0.5
    for _ in range(max_tries):
        lam = rng.uniform(1.2, 4.0)
        kappa = k_max * rng.uniform(0.05, 0.99)
        delta = rng.uniform(0.05, 2.0)
        anchors = crit + [e for c in S for e in (c.E.lo, c.E.hi)]
        if anchors and rng.random() < 0.8:
            x0 = anchors[rng.integers(len(anchors))]
            length = region.length * 10 ** rng.uniform(-4, -0.5)
            center = x0 + rng.choice([-1, 1]) * rng.uniform(0.5, 0.5 * (1 + lam)) * length
        else:
            length = region.length * 10 ** rng.uniform(-4, -0.5)
            center = rng.uniform(region.lo, region.hi)
        T = OrientedInterval.around(center, 0.5 * length)
        J = T.scaled(1.0 / (1.0 + 2.0 * delta))
        try:
            rep = verify_excep_part2(f, T, J, lam, kappa, delta, S)
        except CriticalPointError:
            continue
        if rep.applicable:
            return T, J, lam, kappa, delta, rep
    raise NumericError("no admissible configuration found")


# ---------------------------------------------------------------------------
# Distortion of an iterate split step by step along a chain
# ---------------------------------------------------------------------------

@dataclass
class StepRecord:
    k: int
    T: OrientedInterval
    J: OrientedInterval
    B: float
    near_critical: bool
    schwarzian_sup: Optional[float]
    step_bound: Optional[float]  # cos^2 bound for steps away from the critical intervals
    failures: list = field(default_factory=list)


@dataclass
class AccountingReport:
    log_B_total: float
    log_B_direct: float
    negative_contribution_bound: float
    C: float
    N: int
    d_E: int
    steps: list
    hypothesis_failures: list

    @property
    def consistent(self) -> bool:
        return abs(self.log_B_total - self.log_B_direct) <= 1e-9

    @property
    def holds(self) -> bool:
        return self.log_B_total >= self.negative_contribution_bound - SLACK


def composed_distortion_accounting(g: MapModel, chain, J: OrientedInterval, kappa: float,
                                   S: Optional[CriticalIntervalSet] = None) -> AccountingReport:
    """Split ``log B(g^m, T_0, J)`` into per-step terms along ``chain``.

    ``chain`` is anything with an ``intervals`` list ``T_0, ..., T_m``
    where ``g`` maps ``T_k`` onto ``T_{k+1}``.  Steps that meet a critical
    interval are "near critical"; the others get the cos^2 bound from
    their own Schwarzian supremum.  ``C`` is the largest positive
    Schwarzian seen away from the critical intervals.
    """
    Ts = list(chain.intervals)
    m = len(Ts) - 1
    if m < 1:
        raise PreconditionError("chain needs at least one step")
    if S is None:
        S = compute_critical_intervals(g) if g.is_polynomial else CriticalIntervalSet()
    CrossRatioContext(Ts[0], J)
    steps, failures = [], []
    Jk = J
    log_total = 0.0
    C = 0.0
    for k in range(m):
        Tk = Ts[k]
        fails = []
        if not is_diffeo_on(g, Tk):
            raise CriticalPointError(f"g is not a diffeomorphism on T_{k}")
        if not Tk.length < kappa:
            fails.append(f"|g^{k}(T)| >= kappa")
        for j, c in enumerate(S):
            if not Tk.intersection_length(c.E) < kappa * c.length:
                fails.append(f"|g^{k}(T) ∩ E_{j}| >= kappa |E_{j}|")
        B = float(distortion_points(g, Tk.lo, Jk.lo, Jk.hi, Tk.hi))
        near = any(Tk.intersects(c.E) for c in S)
        s_sup = bound = None
        if not near:
            s_sup = schwarzian_sup(g, Tk, samples=256)
            Ck = max(s_sup, 0.0)
            C = max(C, Ck)
            bound = cos_bound(Ck, Tk.length) if Ck * Tk.length**2 < math.pi**2 / 2 else 0.0
        log_total += math.log(B)
        steps.append(StepRecord(k, Tk, Jk, B, near, s_sup, bound, fails))
        failures += [(k, msg) for msg in fails]
        v = g._values(np.array([Jk.lo, Jk.hi]))
        Jk = OrientedInterval.spanning(float(v[0]), float(v[1]))
    gm = g.iterate(m)
    log_direct = math.log(float(distortion_points(gm, Ts[0].lo, J.lo, J.hi, Ts[0].hi)))
    N = intersection_multiplicity(Ts[:m])
    dom = g.domain.length if g.domain.is_bounded else (
        max(T.hi for T in Ts) - min(T.lo for T in Ts))
    neg = -C * kappa * N * dom - 16.0 * kappa * N * S.d_E**2
    return AccountingReport(log_total, log_direct, neg, C, N, S.d_E, steps, failures)
