"""Periodic orbits, packs, attractor census and related Schwarzian checks."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .errors import ContinuumError, DomainError, PreconditionError, UnidymError
from .intervals import OrientedInterval
from .maps import CriticalPoint, MapModel, critical_points, split_derivative_roots
from .schwarzian import schwarzian_values

N_MAX = 12
GRID_LOG2 = 20
NEUTRAL_TOL = 1e-6
BASIN_ITERS = 10_000
BASIN_TOL = 1e-8
POINT_TOL = 1e-9

ATTRACTING = "attracting"
REPELLING = "repelling_expansive"
NEUTRAL = "neutral_band"


@dataclass(frozen=True)
class PeriodicOrbit:
    points: tuple  # one cycle, starting from its smallest point, in dynamical order
    period: int
    multiplier: float
    tangential: bool = False

    @property
    def orientation_preserving_period(self) -> int:
        return self.period if self.multiplier >= 0 else 2 * self.period

    @property
    def sorted_points(self) -> list:
        return sorted(self.points)


@dataclass(frozen=True)
class PeriodicInterval:
    I: OrientedInterval
    n: int


@dataclass
class PeriodicPack:
    carrier: PeriodicInterval
    members: list
    flagged: bool = False  # monotonicity test was close to a critical point
    components: list = field(default_factory=list)  # all periodic intervals of the pack, carrier first

    def __post_init__(self):
        if not self.components:
            self.components = [self.carrier.I]

    @property
    def orientation_preserving_period(self) -> int:
        return self.carrier.n

    @property
    def points(self) -> list:
        return sorted(x for o in self.members for x in o.points)

    def has_attractor(self) -> bool:
        return any(abs(o.multiplier) < 1.0 - NEUTRAL_TOL for o in self.members)


# ---------------------------------------------------------------------------
# Detection
# ---------------------------------------------------------------------------

def _region(g: MapModel, region: Optional[OrientedInterval]) -> OrientedInterval:
    if region is not None:
        return region
    if g.domain.is_bounded and not g.domain.is_circle:
        return g.domain.as_interval
    raise PreconditionError("an explicit region is needed for maps on the whole line")


def _iterate_value(g: MapModel, x: float, n: int) -> float:
    for _ in range(n):
        x = float(g._values(x))
    return x


def _iterate_jet1(g: MapModel, x: float, n: int) -> tuple[float, float]:
    d = 1.0
    for _ in range(n):
        j = g._jet(x)
        d *= float(j[1])
        x = float(j[0])
    return x, d


def _roots_of(g: MapModel, n: int, xs: np.ndarray, h: np.ndarray, scale: float):
    """Zeros of ``g^n(x) - x`` from grid values ``h``: sign changes, exact zeros, tangencies."""
    F = lambda x: _iterate_value(g, x, n) - x
    found = []
    zero = h == 0.0
    found += [(float(x), False) for x in xs[zero]]
    sc = np.nonzero((h[:-1] * h[1:]) < 0)[0]
    for i in sc:
        r = brentq(F, xs[i], xs[i + 1], xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
        y, d = _iterate_jet1(g, r, n)
        if d != 1.0:
            r2 = r - (y - r) / (d - 1.0)
            if xs[i] <= r2 <= xs[i + 1] and abs(F(r2)) <= abs(F(r)):
                r = r2
        found.append((float(r), False))
    # tangential candidates: local minima of |h| without a sign change
    a = np.abs(h)
    thresh = 1e-6 * scale
    cand = np.nonzero((a[1:-1] < a[:-2]) & (a[1:-1] <= a[2:]) & (a[1:-1] < thresh)
                      & (h[:-2] * h[1:-1] > 0) & (h[1:-1] * h[2:] > 0))[0] + 1
    for i in cand:
        res = minimize_scalar(lambda x: abs(F(x)), bounds=(xs[i - 1], xs[i + 1]), method="bounded",
                              options={"xatol": 1e-15})
        if res.fun <= 1e-10 * scale:
            found.append((float(res.x), True))
    return found


def _minimal_period(g: MapModel, x: float, n: int) -> int:
    y = x
    for k in range(1, n + 1):
        y = float(g._values(y))
        if abs(y - x) <= POINT_TOL * max(1.0, abs(x)):
            return k
    return n


def _cycles_from_roots(g: MapModel, roots, n: int) -> list[PeriodicOrbit]:
    roots = sorted(roots)
    used = [False] * len(roots)
    vals = np.array([r for r, _ in roots])
    out = []
    for i, (r, tang) in enumerate(roots):
        if used[i]:
            continue
        if _minimal_period(g, r, n) < n:
            used[i] = True
            continue
        pts = [r]
        y = r
        for _ in range(n - 1):
            y = float(g._values(y))
            pts.append(y)
        tangential = tang
        for k, y in enumerate(pts):
            if len(vals):
                j = int(np.argmin(np.abs(vals - y)))
                if abs(vals[j] - y) <= 1e-7 * max(1.0, abs(y)):
                    used[j] = True
                    pts[k] = float(vals[j])
                    tangential = tangential or roots[j][1]
        mult = 1.0
        for y in pts:
            mult *= float(g._jet(y)[1])
        start = int(np.argmin(pts))
        pts = pts[start:] + pts[:start]
        if any(abs(o.points[0] - pts[0]) <= 1e-7 * max(1.0, abs(pts[0])) for o in out):
            continue
        out.append(PeriodicOrbit(tuple(pts), n, mult, tangential or abs(mult - 1.0) < NEUTRAL_TOL))
    return out


def find_periodic_orbits_upto(g: MapModel, n_max: int = N_MAX, region: Optional[OrientedInterval] = None,
                              grid_log2: int = GRID_LOG2) -> dict[int, list[PeriodicOrbit]]:
    """All cycles of exact period ``1..n_max`` meeting ``region``, sharing the grid iterates."""
    if n_max < 1:
        raise PreconditionError("n_max must be at least 1")
    region = _region(g, region)
    xs = np.linspace(region.lo, region.hi, 2**grid_log2 + 1)
    scale = max(1.0, abs(region.lo), abs(region.hi))
    y = xs.copy()
    out = {}
    with np.errstate(over="ignore", invalid="ignore"):
        for n in range(1, n_max + 1):
            y = g._values(y)
            h = y - xs
            h = np.where(np.isfinite(h), h, np.sign(np.nan_to_num(h, nan=1.0, posinf=1.0, neginf=-1.0)) * 1e300)
            if np.count_nonzero(np.abs(h) <= 1e-14 * scale) > 0.1 * h.size:
                raise ContinuumError(f"g^{n} fixes a continuum of points")
            out[n] = _cycles_from_roots(g, _roots_of(g, n, xs, h, scale), n)
    return out


def find_periodic_orbits(g: MapModel, n: int, region: Optional[OrientedInterval] = None,
                         grid_log2: int = GRID_LOG2) -> list[PeriodicOrbit]:
    """Cycles of exact period ``n`` found on a ``2**grid_log2`` grid of ``region``."""
    if n < 1:
        raise PreconditionError("period must be at least 1")
    region = _region(g, region)
    xs = np.linspace(region.lo, region.hi, 2**grid_log2 + 1)
    scale = max(1.0, abs(region.lo), abs(region.hi))
    with np.errstate(over="ignore", invalid="ignore"):
        y = xs
        for _ in range(n):
            y = g._values(y)
        h = y - xs
    if np.count_nonzero(np.abs(h) <= 1e-14 * scale) > 0.1 * h.size:
        raise ContinuumError(f"g^{n} fixes a continuum of points")
    return _cycles_from_roots(g, _roots_of(g, n, xs, h, scale), n)


def classify_orbit(o: PeriodicOrbit, rho: float, tol: float = NEUTRAL_TOL) -> str:
    m = abs(o.multiplier)
    if m < 1.0 - tol:
        return ATTRACTING
    if m > 1.0 + rho:
        return REPELLING
    return NEUTRAL


# ---------------------------------------------------------------------------
# Packs
# ---------------------------------------------------------------------------

def _crit_locations(g: MapModel, hint: OrientedInterval) -> list[float]:
    p = g.as_polynomial()
    if p is not None:
        return [] if p.degree < 2 else sorted(split_derivative_roots(p)[0])
    return [c.location for c in critical_points(g, hint)]


def iterate_is_monotone(g: MapModel, I: OrientedInterval, N: int, crit: Sequence[float],
                        near: float = 1e-9) -> tuple[bool, bool]:
    """Whether ``g^N`` is monotone on ``I``, by pushing ``I`` forward and watching for critical points.

    Returns ``(monotone, flagged)``; ``flagged`` marks a critical point
    within ``near`` of an image endpoint (inconclusive).
    """
    flagged = False
    for _ in range(N):
        for c in crit:
            if I.contains_interior(c):
                return False, flagged
            if min(abs(c - I.lo), abs(c - I.hi)) <= near * max(1.0, abs(c)) and I.length > 0:
                flagged = True
        v = g._values(np.array([I.lo, I.hi]))
        I = OrientedInterval.spanning(float(v[0]), float(v[1]))
    return True, flagged


def group_into_packs(orbits: Sequence[PeriodicOrbit], g: MapModel) -> list[PeriodicPack]:
    """Merge neighbouring periodic points whose span is a periodic interval.

    Two adjacent points with the same orientation-preserving period ``N``
    share a periodic interval when ``g^N`` is monotone between them (both
    ends are fixed by ``g^N``, so the span is then mapped onto itself
    bijectively).  A pack collects the orbits meeting such a stretch; the
    stretches a pack visits are its ``components`` (``g`` permutes them)
    and the lowest one is the ``carrier``.
    """
    orbits = list(orbits)
    if not orbits:
        return []
    pts = sorted((x, i) for i, o in enumerate(orbits) for x in o.points)
    crit = _crit_locations(g, OrientedInterval(pts[0][0], pts[-1][0]))
    parent = list(range(len(orbits)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    runs, flags = [], []
    start, run_flag = 0, False
    for j in range(1, len(pts) + 1):
        merged = False
        if j < len(pts):
            (a, ia), (b, ib) = pts[j - 1], pts[j]
            N = orbits[ia].orientation_preserving_period
            if N == orbits[ib].orientation_preserving_period:
                if b == a:
                    merged = True
                else:
                    merged, fl = iterate_is_monotone(g, OrientedInterval(a, b), N, crit)
                    run_flag = run_flag or (merged and fl)
            if merged:
                ra, rb = find(ia), find(ib)
                parent[ra] = rb
        if not merged:
            runs.append((start, j - 1))
            flags.append(run_flag)
            start, run_flag = j, False
    groups = {}
    for (lo, hi), fl in zip(runs, flags):
        root = find(pts[lo][1])
        comp = OrientedInterval(pts[lo][0], pts[hi][0])
        groups.setdefault(root, [[], False])
        groups[root][0].append(comp)
        groups[root][1] = groups[root][1] or fl
    packs = []
    for root, (comps, fl) in groups.items():
        members = [o for i, o in enumerate(orbits) if find(i) == root]
        N = members[0].orientation_preserving_period
        if any(o.orientation_preserving_period != N for o in members):
            fl = True
        comps.sort(key=lambda I: I.lo)
        packs.append(PeriodicPack(PeriodicInterval(comps[0], N), members, fl, comps))
    packs.sort(key=lambda p: p.carrier.I.lo)
    return packs


def check_pack(g: MapModel, pack: PeriodicPack, tol: float = 1e-9) -> list[str]:
    """Soundness checks: ``g^N`` maps the carrier onto itself monotonically; periods compatible."""
    bad = []
    N = pack.carrier.n
    for I in pack.components:
        v = g._values(np.array([I.lo, I.hi]))
        for _ in range(N - 1):
            v = g._values(v)
        if abs(min(v) - I.lo) > tol * max(1.0, abs(I.lo)) or abs(max(v) - I.hi) > tol * max(1.0, abs(I.hi)):
            bad.append(f"g^N does not map {I} onto itself")
        if I.length > 0:
            ok, _ = iterate_is_monotone(g, I, N, _crit_locations(g, I))
            if not ok:
                bad.append(f"g^N not monotone on {I}")
    periods = {o.period for o in pack.members}
    n = min(periods)
    if not periods <= {n, 2 * n}:
        bad.append(f"incompatible periods {sorted(periods)}")
    return bad


# ---------------------------------------------------------------------------
# Basins and census
# ---------------------------------------------------------------------------

@dataclass
class BasinResult:
    member: bool
    escaped: bool = False

    def __bool__(self):
        return self.member


def _iterate_many(g: MapModel, x0: np.ndarray, iters: int, keep: int, escape: float = 1e12):
    """Iterate an array of starting points; returns final-window distance tracker inputs."""
    x = np.array(x0, dtype=float)
    dom = g.domain
    lo, hi = (dom.lo, dom.hi) if (dom.is_bounded and not dom.is_circle) else (-escape, escape)
    slack = 1e-12 * max(1.0, abs(lo), abs(hi))
    escaped = np.zeros(x.shape, dtype=bool)
    tail_lo = np.full(x.shape, np.inf)
    tail_hi = np.full(x.shape, -np.inf)
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(iters):
            x = np.where(escaped, 0.5 * (lo + hi) if math.isfinite(lo + hi) else 0.0, x)
            x = g._values(x)
            bad = ~np.isfinite(x) | (x < lo - slack) | (x > hi + slack)
            escaped |= bad
            if k >= iters - keep:
                tail_lo = np.minimum(tail_lo, x)
                tail_hi = np.maximum(tail_hi, x)
    return escaped, tail_lo, tail_hi


def _tail_near_components(g, xs, comps, iters, keep, tol):
    x = np.array(xs, dtype=float)
    ok = np.ones(x.shape, dtype=bool)
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(iters):
            x = g._values(x)
            if k >= iters - keep:
                near = np.zeros(x.shape, dtype=bool)
                for I in comps:
                    near |= (x >= I.lo - tol) & (x <= I.hi + tol)
                ok &= near
    return ok


def basin_membership_many(g: MapModel, xs, pack: PeriodicPack, max_iters: int = BASIN_ITERS,
                          tol: float = BASIN_TOL):
    if not pack.has_attractor():
        raise PreconditionError("pack has no attracting member")
    keep = max(1, max_iters // 10)
    escaped, tlo, thi = _iterate_many(g, np.atleast_1d(xs), max_iters, keep)
    lo = min(I.lo for I in pack.components)
    hi = max(I.hi for I in pack.components)
    member = (~escaped) & (tlo >= lo - tol) & (thi <= hi + tol)
    if len(pack.components) > 1:
        member &= _tail_near_components(g, np.atleast_1d(xs), pack.components, max_iters, keep, tol)
    return member, escaped


def basin_membership(g: MapModel, x0: float, pack: PeriodicPack, max_iters: int = BASIN_ITERS,
                     tol: float = BASIN_TOL) -> BasinResult:
    """Whether the orbit of ``x0`` stays within ``tol`` of the pack's carrier over the last 10% of iterations."""
    member, escaped = basin_membership_many(g, [x0], pack, max_iters, tol)
    return BasinResult(bool(member[0]), bool(escaped[0]))


@dataclass
class CensusRow:
    param: float
    n_orbits: int
    n_packs: int
    exceptional: int
    packs: list = field(default_factory=list)
    exceptional_packs: list = field(default_factory=list)
    basin_sources: dict = field(default_factory=dict)  # pack index -> list of labels ("c@x", "E_j:lo")
    min_expansive_multiplier: float = math.inf
    neutral_flags: int = 0
    error: Optional[str] = None


def _basin_sources(g: MapModel, region: OrientedInterval) -> list[tuple[str, float]]:
    src = []
    for c in _crit_locations(g, region):
        if region.contains(c):
            src.append((f"c@{c:.6g}", c))
    if g.is_polynomial and g.as_polynomial().degree >= 2:
        from .critical_intervals import compute_critical_intervals

        for j, ci in enumerate(compute_critical_intervals(g)):
            for side, x in (("lo", ci.E.lo), ("hi", ci.E.hi)):
                if region.contains(x):
                    src.append((f"E_{j}:{side}", x))
    return src


def census_one(g: MapModel, n_max: int, rho: float, region: Optional[OrientedInterval] = None,
               grid_log2: int = GRID_LOG2, basin_iters: int = BASIN_ITERS, param: float = math.nan) -> CensusRow:
    region = _region(g, region)
    by_n = find_periodic_orbits_upto(g, n_max, region, grid_log2)
    orbits = [o for n in sorted(by_n) for o in by_n[n]]
    packs = group_into_packs(orbits, g)
    exc, min_exp, neutral = [], math.inf, 0
    for i, p in enumerate(packs):
        kinds = [classify_orbit(o, rho) for o in p.members]
        neutral += kinds.count(NEUTRAL)
        if any(k != REPELLING for k in kinds):
            exc.append(i)
        else:
            min_exp = min(min_exp, min(abs(o.multiplier) for o in p.members))
    sources = {}
    src = _basin_sources(g, region)
    if src:
        xs = np.array([x for _, x in src])
        for i in exc:
            if packs[i].has_attractor():
                member, _ = basin_membership_many(g, xs, packs[i], basin_iters)
                labels = [lab for (lab, _), m in zip(src, member) if m]
                if labels:
                    sources[i] = labels
    return CensusRow(param, len(orbits), len(packs), len(exc), packs, exc, sources, min_exp, neutral)


def census(g_family: Callable[[float], MapModel], params: Sequence[float], n_max: int = 8, rho: float = 0.05,
           region: Optional[OrientedInterval] = None, grid_log2: int = GRID_LOG2,
           basin_iters: int = BASIN_ITERS) -> list[CensusRow]:
    """Per-parameter orbit and pack census; failures are recorded and the sweep continues."""
    rows = []
    for a in params:
        try:
            rows.append(census_one(g_family(a), n_max, rho, region, grid_log2, basin_iters, param=float(a)))
        except (UnidymError, ValueError, ArithmeticError) as e:
            rows.append(CensusRow(float(a), 0, 0, 0, error=f"{type(e).__name__}: {e}"))
    return rows


# ---------------------------------------------------------------------------
# Schwarzian of first-entry maps and near quadratic critical points
# ---------------------------------------------------------------------------

@dataclass
class FirstEntryReport:
    samples: int
    entered: int
    violations: int
    skipped: int
    max_schwarzian: float
    entry_times: np.ndarray
    values: np.ndarray
    violating_points: list


def first_entry_schwarzian_check(g: MapModel, J: OrientedInterval, sample_points, n_max: int = 50) -> FirstEntryReport:
    """Sign of ``S(g^{n+1})(x)`` where ``n`` is the first time ``g^n(x)`` lands in ``J``.

    ``S(g^{n+1})`` is accumulated with the composition rule
    ``sum_k Sg(g^k x) (Dg^k(x))^2``.  Samples whose orbit meets a zero of
    ``Dg`` before the entry are skipped.
    """
    x0 = np.asarray(sample_points, dtype=float)
    x = x0.copy()
    active = np.ones(x.shape, dtype=bool)  # not yet entered
    entry = np.full(x.shape, -1)
    S_acc = np.zeros(x.shape)
    Dk = np.ones(x.shape)
    skipped = np.zeros(x.shape, dtype=bool)
    S_final = np.full(x.shape, np.nan)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        for n in range(n_max + 1):
            hit = active & (x >= J.lo) & (x <= J.hi)
            _, d1, d2, d3 = g._jet(x)
            bad = (d1 == 0.0) & (active | hit)
            skipped |= bad & active
            sg = np.where(d1 != 0.0, d3 / np.where(d1 == 0, 1, d1) - 1.5 * (d2 / np.where(d1 == 0, 1, d1)) ** 2, np.nan)
            S_step = S_acc + sg * Dk * Dk
            done = hit & ~skipped
            S_final = np.where(done, S_step, S_final)
            entry = np.where(done, n, entry)
            active &= ~hit & ~skipped
            S_acc = S_step
            Dk = Dk * d1
            x = g._values(x)
            if not active.any():
                break
    entered = entry >= 0
    vals = S_final[entered]
    viol = entered & (S_final >= 0)
    return FirstEntryReport(
        int(x0.size), int(entered.sum()), int(viol.sum()), int(skipped.sum()),
        float(np.max(vals)) if vals.size else math.nan, entry, S_final, [float(v) for v in x0[viol][:20]],
    )


@dataclass
class QuadraticBoundReport:
    A: float
    B: float
    violations: int
    samples: int
    worst_margin: float  # min over samples of bound - Sg(x); positive means the bound holds


def quadratic_schwarzian_bound_check(g: MapModel, c: CriticalPoint, T: OrientedInterval,
                                     samples: int = 10_000) -> QuadraticBoundReport:
    """Check ``Sg(x) < -B^2 / (A^2 |x - c|^2)`` on ``T`` minus ``c``.

    ``A`` is the sampled sup of ``|D^2 g|`` on ``T`` and ``B = |D^2 g(c)|``.
    """
    if c.multiplicity != 1:
        raise PreconditionError(f"critical point at {c.location} is not quadratic")
    if not T.contains(c.location):
        raise PreconditionError("T must contain the critical point")
    others = [q for q in _crit_locations(g, T) if T.contains(q) and abs(q - c.location) > 1e-9 * max(1.0, abs(c.location))]
    if others:
        raise PreconditionError(f"T contains other critical points {others}")
    grid = np.linspace(T.lo, T.hi, 4097)
    A = float(np.max(np.abs(g._jet(grid)[2])))
    B = abs(float(g._jet(c.location)[2]))
    xs = np.linspace(T.lo, T.hi, samples + 2)
    xs = xs[np.abs(xs - c.location) > 1e-12 * max(1.0, abs(c.location))][:samples]
    S = schwarzian_values(g, xs)
    bound = -(B * B) / (A * A * (xs - c.location) ** 2)
    margin = bound - S
    viol = int(np.count_nonzero(~(S < bound + 1e-9)))
    return QuadraticBoundReport(A, B, viol, int(xs.size), float(margin.min()))


# ---------------------------------------------------------------------------
# Preimages and uniform contraction
# ---------------------------------------------------------------------------

def preimage_components(g: MapModel, I: OrientedInterval, bounds: OrientedInterval) -> list[OrientedInterval]:
    """All components of ``g^{-1}(I)`` inside ``bounds``, lap by lap, merged across shared critical points."""
    crit = [c for c in _crit_locations(g, bounds) if bounds.contains_interior(c)]
    edges = [bounds.lo] + crit + [bounds.hi]
    pieces = []
    for a, b in zip(edges[:-1], edges[1:]):
        ga, gb = float(g._values(a)), float(g._values(b))
        up = gb >= ga

        def inv(y, a=a, b=b, up=up):
            lo, hi = a, b
            for _ in range(80):
                m = 0.5 * (lo + hi)
                if m == lo or m == hi:
                    break
                if (float(g._values(m)) < y) == up:
                    lo = m
                else:
                    hi = m
            return 0.5 * (lo + hi)

        vlo, vhi = min(ga, gb), max(ga, gb)
        ylo, yhi = max(vlo, I.lo), min(vhi, I.hi)
        if ylo > yhi:
            continue
        xa = inv(ylo) if ylo > vlo else (a if up else b)
        xb = inv(yhi) if yhi < vhi else (b if up else a)
        pieces.append(OrientedInterval.spanning(xa, xb))
    pieces.sort(key=lambda P: P.lo)
    merged = []
    for P in pieces:
        if merged and P.lo <= merged[-1].hi + 1e-15 * max(1.0, abs(P.lo)):
            merged[-1] = merged[-1].hull(P)
        else:
            merged.append(P)
    return merged


@dataclass
class ContractionRow:
    label: str
    delta_hat: float
    max_component: float
    neutral_flag: bool
    samples_used: int


def max_preimage_component(g: MapModel, J: OrientedInterval, n_max: int, bounds: OrientedInterval,
                           cap: int = 4096) -> float:
    level = [J]
    best = J.length
    for _ in range(n_max):
        nxt = []
        for I in level:
            nxt += preimage_components(g, I, bounds)
        if not nxt:
            break
        if len(nxt) > cap:
            nxt = sorted(nxt, key=lambda P: -P.length)[:cap]
        best = max(best, max(P.length for P in nxt))
        level = nxt
    return best


def uniform_contraction_scan(maps: Sequence[MapModel], epsilon: float, interval_samples: int = 16,
                             n_max: int = 8, region: Optional[OrientedInterval] = None,
                             exclude_basins: bool = True, rho: float = 0.0, halvings: int = 30,
                             census_n_max: int = 4, grid_log2: int = 16) -> list[ContractionRow]:
    """Largest ``|J|`` (per map, uniform over sampled centres) whose preimage components stay below ``epsilon``.

    Centres whose orbits converge to a detected periodic attractor are
    skipped when ``exclude_basins`` is set.  ``neutral_flag`` marks maps
    with an orbit in the neutral band at the tested periods.
    """
    rows = []
    for g in maps:
        R = _region(g, region)
        centres = R.lo + (np.arange(interval_samples) + 0.5) / interval_samples * R.length
        neutral = False
        attract_packs = []
        try:
            by_n = find_periodic_orbits_upto(g, census_n_max, R, grid_log2)
            orbits = [o for n in by_n for o in by_n[n]]
            neutral = any(classify_orbit(o, rho) == NEUTRAL for o in orbits)
            attract_packs = [p for p in group_into_packs(orbits, g) if p.has_attractor()]
        except ContinuumError:
            neutral = True
        if exclude_basins and attract_packs:
            keep = np.ones(centres.shape, dtype=bool)
            for p in attract_packs:
                m, _ = basin_membership_many(g, centres, p, 2000, 1e-6)
                keep &= ~m
            centres = centres[keep]
        delta_hat, worst = math.inf, 0.0
        for x in centres:
            L = 0.5 * R.length
            for _ in range(halvings):
                J = OrientedInterval.around(float(x), 0.5 * L).intersect(R)
                m = max_preimage_component(g, J, n_max, R)
                if m < epsilon:
                    worst = max(worst, m)
                    break
                L *= 0.5
            else:
                L = 0.0
            delta_hat = min(delta_hat, L)
        if not centres.size:
            delta_hat = math.nan
        rows.append(ContractionRow(g.name(), delta_hat, worst, neutral, int(centres.size)))
    return rows
