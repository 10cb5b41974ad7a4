"""Chains of preimage components and the constrained pullback sequence around a periodic orbit."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.optimize import isotonic_regression

from .critical_intervals import CriticalIntervalSet
from .crossratio import _cr
from .errors import DomainError, NotDiffeomorphismError, NumericError, PreconditionError
from .intervals import Domain, OrientedInterval, intersection_multiplicity
from .maps import MapModel, critical_points, split_derivative_roots

BISECT_ITERS = 80
ANCHOR_TOL = 1e-9
CHECK_SLACK = 1e-10

__all__ = [
    "Chain", "pull_back_chain", "preimage_component", "intersection_multiplicity", "t_p_interval",
    "CuttingTime", "USequence", "build_u_sequence", "check_multiplicity_44", "verify_pullback_cr",
    "RhoAccumulator", "estimate_rho",
]


# ---------------------------------------------------------------------------
# Preimage components
# ---------------------------------------------------------------------------

def _critical_locations(f: MapModel, region: OrientedInterval) -> list[float]:
    p = f.as_polynomial()
    if p is not None:
        if p.degree < 2:
            return []
        real, _ = split_derivative_roots(p)
        return sorted(set(x for x in real if region.contains(x)))
    return [c.location for c in critical_points(f, region)]


def _bounds(f: MapModel, hint: OrientedInterval) -> OrientedInterval:
    if f.domain.is_bounded and not f.domain.is_circle:
        return f.domain.as_interval
    pad = 10.0 * (hint.length + 1.0)
    return OrientedInterval(hint.lo - pad, hint.hi + pad)


def _bisect(inside, a: float, b: float, iters: int = BISECT_ITERS) -> float:
    """Last point of ``[a, b]`` (either order) where the monotone predicate holds; ``inside(a)`` is true."""
    for _ in range(iters):
        mid = 0.5 * (a + b)
        if mid == a or mid == b:
            break
        if inside(mid):
            a = mid
        else:
            b = mid
    return a


def _walk(f: MapModel, inside, x: float, s: int, crit: Sequence[float], edge: Optional[float]) -> float:
    pos = x
    while True:
        ahead = [c for c in crit if (c - pos) * s > 0]
        nxt = (min(ahead) if s > 0 else max(ahead)) if ahead else edge
        if nxt is None:
            h = max(1.0, abs(pos))
            for _ in range(200):
                far = pos + s * h
                if not inside(far):
                    return _bisect(inside, pos, far)
                pos, h = far, 2.0 * h
            raise NumericError("preimage component boundary not bracketed")
        if inside(nxt):
            if nxt == edge:
                return nxt
            pos = nxt
            continue
        return _bisect(inside, pos, nxt)


def preimage_component(f: MapModel, target: OrientedInterval, x: float,
                       crit: Optional[Sequence[float]] = None,
                       bounds: Optional[OrientedInterval] = None) -> OrientedInterval:
    """Connected component of ``f^{-1}(target)`` containing ``x``.

    Walks lap by lap (laps are separated by critical points) and bisects
    for the exit point on the first lap whose far end leaves ``target``.
    ``bounds`` limits the walk (domain of definition).
    """
    bounds = _bounds(f, OrientedInterval.spanning(x, target.mid)) if bounds is None else bounds
    tol = 1e-13 * max(1.0, abs(target.lo), abs(target.hi))
    fx = float(f._values(float(x)))
    if not target.contains(fx, tol):
        raise PreconditionError(f"f({x!r}) = {fx!r} is not in {target}")
    crit = _critical_locations(f, bounds) if crit is None else crit

    # exact membership while bisecting: a tolerance here would widen every step of a chain
    def inside(y):
        return bounds.contains(y) and target.contains(float(f._values(float(y))))

    lo_edge = bounds.lo if math.isfinite(bounds.lo) else None
    hi_edge = bounds.hi if math.isfinite(bounds.hi) else None
    return OrientedInterval(_walk(f, inside, x, -1, crit, lo_edge), _walk(f, inside, x, +1, crit, hi_edge))


# ---------------------------------------------------------------------------
# Chains
# ---------------------------------------------------------------------------

@dataclass
class Chain:
    """``T_0, ..., T_m`` with ``T_k`` a component of ``f^{-1}(T_{k+1})``."""

    intervals: list
    anchor_orbit: Optional[list] = None
    multiplicity: int = 0
    order: int = 0

    @property
    def length(self) -> int:
        return len(self.intervals) - 1

    @property
    def head(self) -> OrientedInterval:
        return self.intervals[0]

    @property
    def tail(self) -> OrientedInterval:
        return self.intervals[-1]

    def image_errors(self, f: MapModel) -> list[float]:
        """Endpoint mismatch between ``f(T_k)`` and ``T_{k+1}`` for each step."""
        from .maps import image_interval

        out = []
        for a, b in zip(self.intervals[:-1], self.intervals[1:]):
            img = image_interval(f, a)
            out.append(max(abs(img.lo - b.lo), abs(img.hi - b.hi)))
        return out


def _chain_order(f: MapModel, Ts: Sequence[OrientedInterval], crit: Sequence[float]) -> int:
    return sum(1 for T in Ts if any(T.contains(c) for c in crit))


def pull_back_chain(f: MapModel, T_m: OrientedInterval, anchor: Sequence[float],
                    bounds: Optional[OrientedInterval] = None) -> Chain:
    """Pull ``T_m`` back along the orbit segment ``anchor = [x_0, ..., x_m]``."""
    xs = [float(x) for x in anchor]
    if not xs:
        raise PreconditionError("empty anchor")
    if not T_m.contains(xs[-1], 1e-12 * max(1.0, abs(xs[-1]))):
        raise PreconditionError(f"x_m = {xs[-1]!r} is not in T_m = {T_m}")
    for k in range(len(xs) - 1):
        fx = float(f._values(xs[k]))
        if abs(fx - xs[k + 1]) > ANCHOR_TOL * max(1.0, abs(fx)):
            raise PreconditionError(f"f(x_{k}) = {fx!r} differs from x_{k + 1} = {xs[k + 1]!r}")
    hint = OrientedInterval(min(xs + [T_m.lo]), max(xs + [T_m.hi]))
    bounds = _bounds(f, hint) if bounds is None else bounds
    crit = _critical_locations(f, bounds)
    Ts = [T_m]
    for k in range(len(xs) - 2, -1, -1):
        Ts.append(preimage_component(f, Ts[-1], xs[k], crit, bounds))
    Ts.reverse()
    return Chain(Ts, xs, intersection_multiplicity(Ts), _chain_order(f, Ts, crit))


# ---------------------------------------------------------------------------
# The interval T_p and the constrained sequence U_k
# ---------------------------------------------------------------------------

def t_p_interval(orbit: Sequence[float], p: float, domain_ext: Domain) -> OrientedInterval:
    """Largest interval around ``p`` with at most one orbit point on each side of ``p``.

    Its ends are the second-nearest orbit points on either side, or the
    edge of the extended domain when there are fewer than two.
    """
    pts = sorted(set(float(x) for x in orbit))
    if not any(abs(x - p) <= 1e-12 * max(1.0, abs(p)) for x in pts):
        raise PreconditionError(f"{p!r} is not an orbit point")
    i = min(range(len(pts)), key=lambda j: abs(pts[j] - p))
    lo = pts[i - 2] if i >= 2 else domain_ext.lo
    hi = pts[i + 2] if i + 2 < len(pts) else domain_ext.hi
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise DomainError("extended domain is unbounded; give the map a bounded domain")
    return OrientedInterval(lo, hi)


def minimal_t_p(orbit: Sequence[float], domain_ext: Domain):
    """Orbit point with the shortest ``T_p`` and that interval."""
    best = None
    for p in sorted(set(float(x) for x in orbit)):
        T = t_p_interval(orbit, p, domain_ext)
        if best is None or T.length < best[1].length:
            best = (p, T)
    return best


@dataclass(frozen=True)
class CuttingTime:
    k: int
    kind: str  # critical | boundary | internal | domain
    side: str  # "r" or "l"
    tied: tuple = ()  # every constraint kind that was binding


PRECEDENCE = ("critical", "boundary", "internal", "domain")


@dataclass
class USequence:
    base_point_orbit: list
    right: list
    left: list
    cutting_times: list
    kappa: float
    n: int
    U_n: OrientedInterval
    domain_ext: Domain
    directions: dict = field(default_factory=dict)

    def side(self, s: str) -> list:
        return self.right if s == "r" else self.left

    def cutting_counts(self, side: Optional[str] = None) -> dict:
        out = {k: 0 for k in PRECEDENCE}
        for c in self.cutting_times:
            if side is None or c.side == side:
                out[c.kind] += 1
        return out

    @property
    def U0(self) -> OrientedInterval:
        return self.left[0].hull(self.right[0])


def _dir_from(x: float, U: OrientedInterval) -> int:
    """+1 if ``U`` lies to the right of its boundary point ``x``, -1 otherwise."""
    return +1 if abs(U.lo - x) <= abs(U.hi - x) else -1


def _side_interval(x: float, s: int, ell: float) -> OrientedInterval:
    return OrientedInterval.spanning(x, x + s * ell)


def _constraints(g: MapModel, x: float, s: int, kappa: float, S: CriticalIntervalSet,
                 crit: Sequence[float], ext: OrientedInterval) -> dict:
    """Upper limits on the length of ``U`` imposed by everything except the image condition."""
    lim = {"internal": kappa / 2.0}
    tol = 1e-12 * max(1.0, abs(x))
    ahead = [abs(c - x) for c in crit if (c - x) * s > tol]
    lim["critical"] = min(ahead) if ahead else math.inf
    boundary = math.inf
    for c in S:
        if c.double.contains(x):
            lim["internal"] = min(lim["internal"], kappa * c.length / 2.0)
        else:
            E = c.E
            if s > 0 and E.lo > x:
                boundary = min(boundary, E.lo - x)
            elif s < 0 and E.hi < x:
                boundary = min(boundary, x - E.hi)
    lim["boundary"] = boundary
    lim["domain"] = (ext.hi - x) if s > 0 else (x - ext.lo)
    return lim


def _build_side(g: MapModel, orbit: list, U_top: OrientedInterval, n: int, kappa: float,
                S: CriticalIntervalSet, crit: Sequence[float], ext: OrientedInterval, side: str):
    Us = [None] * (n + 1)
    Us[n] = U_top
    dirs = [0] * (n + 1)
    dirs[n] = _dir_from(orbit[n], U_top)
    cuts = []
    for k in range(n - 1, -1, -1):
        x, target = orbit[k], Us[k + 1]
        d1 = float(g._jet(x)[1])
        # keep the side whose image falls on the side of x_{k+1} where U_{k+1} lies
        s = dirs[k + 1] if d1 >= 0 else -dirs[k + 1]
        dirs[k] = s
        lim = _constraints(g, x, s, kappa, S, crit, ext)
        ell_other = min(lim.values())
        t_tol = 1e-13 * max(1.0, abs(target.lo), abs(target.hi))

        def inside(y):
            return target.contains(float(g._values(float(y))), t_tol)

        far_end = target.hi if dirs[k + 1] > 0 else target.lo
        y_other = x + s * ell_other
        if ell_other > 0 and not inside(y_other):
            y = _bisect(inside, x, y_other)
            Us[k] = OrientedInterval.spanning(x, y)
            continue
        Us[k] = _side_interval(x, s, ell_other)
        img_end = float(g._values(y_other))
        if abs(img_end - far_end) > CHECK_SLACK * max(target.length, 1e-300):
            scale = max(ell_other, 1e-300)
            tied = tuple(kd for kd in PRECEDENCE if abs(lim[kd] - ell_other) <= 1e-12 * max(scale, abs(x), 1.0))
            kind = next(kd for kd in PRECEDENCE if kd in tied)
            cuts.append(CuttingTime(k, kind, side, tied))
    return Us, dirs, cuts


def build_u_sequence(g: MapModel, p: float, n: int, kappa: float, S: Optional[CriticalIntervalSet] = None,
                     domain_ext: Optional[Domain] = None) -> USequence:
    """Intervals ``U_k^r``, ``U_k^l`` for ``k = n, ..., 0`` and the cutting times.

    ``U_n = 3 T_p`` (clipped to the extended domain); each ``U_k`` is the
    longest one-sided interval at ``g^k(p)`` obeying all constraints.
    Ties between constraints are classified with the precedence
    critical > boundary > internal > domain.
    """
    if not kappa > 0:
        raise PreconditionError("kappa must be positive")
    if n < 1:
        raise PreconditionError("n must be at least 1")
    S = CriticalIntervalSet() if S is None else S
    ext_dom = g.domain.extended(3.0) if domain_ext is None else domain_ext
    if not ext_dom.is_bounded or ext_dom.is_circle:
        raise DomainError("the U-sequence needs a bounded interval domain")
    ext = ext_dom.as_interval
    orbit = [float(p)]
    for _ in range(n):
        orbit.append(float(g._values(orbit[-1])))
    if not ext.contains(orbit[-1]) or any(not ext.contains(x) for x in orbit):
        raise DomainError("orbit leaves the extended domain")
    if abs(orbit[-1] - orbit[0]) > 1e-8 * max(1.0, abs(p)):
        raise PreconditionError(f"g^{n}(p) != p")
    orbit[-1] = orbit[0]
    T_p = t_p_interval(orbit[:-1], p, ext_dom)
    U_n = T_p.scaled(3.0).intersect(ext)
    crit = _critical_locations(g, ext)
    right, rd, rc = _build_side(g, orbit, OrientedInterval(p, U_n.hi), n, kappa, S, crit, ext, "r")
    left, ld, lc = _build_side(g, orbit, OrientedInterval(U_n.lo, p), n, kappa, S, crit, ext, "l")
    return USequence(orbit, right, left, sorted(rc + lc, key=lambda c: (c.k, c.side)), kappa, n, U_n,
                     ext_dom, {"r": rd, "l": ld})


def check_u_sequence(g: MapModel, seq: USequence, S: Optional[CriticalIntervalSet] = None,
                     slack: float = CHECK_SLACK) -> list[str]:
    """Re-check the defining conditions and maximality; returns violation messages (empty = ok)."""
    S = CriticalIntervalSet() if S is None else S
    ext = seq.domain_ext.as_interval
    crit = _critical_locations(g, ext)
    bad = []
    for side in ("r", "l"):
        Us = seq.side(side)
        for k in range(seq.n):
            U, x = Us[k], seq.base_point_orbit[k]
            tag = f"U_{k}^{side}"
            if min(abs(U.lo - x), abs(U.hi - x)) > slack * max(1.0, abs(x)):
                bad.append(f"{tag}: g^k(p) is not a boundary point")
            if U.length == 0:
                continue
            if any(U.contains_interior(c) for c in crit):
                bad.append(f"{tag}: critical point inside")
            img = g._values(np.linspace(U.lo, U.hi, 65))
            tgt = Us[k + 1]
            sl = slack * max(1.0, tgt.length, abs(tgt.lo), abs(tgt.hi))
            if img.min() < tgt.lo - sl or img.max() > tgt.hi + sl:
                bad.append(f"{tag}: image not inside U_{k + 1}")
            if U.length > seq.kappa / 2 + slack:
                bad.append(f"{tag}: longer than kappa/2")
            for j, c in enumerate(S):
                if c.double.contains(x):
                    if U.length > seq.kappa * c.length / 2 + slack:
                        bad.append(f"{tag}: longer than kappa|E_{j}|/2")
                elif U.intersection_length(c.E) > slack:
                    bad.append(f"{tag}: meets E_{j}")
            # maximality: a slightly longer interval must break some condition
            s = seq.directions[side][k]
            eps = 1e-7 * max(U.length, 1e-12)
            V = _side_interval(x, s, U.length + eps)
            broken = (
                V.length > seq.kappa / 2
                or any(V.contains(c) and not (abs(c - x) < 1e-15) for c in crit)
                or any((c.double.contains(x) and V.length > seq.kappa * c.length / 2)
                       or (not c.double.contains(x) and V.intersects(c.E)) for c in S)
                or not ext.contains_interval(V)
            )
            if not broken:
                v = g._values(np.array([V.lo, V.hi]))
                broken = v.min() < tgt.lo - 1e-13 * max(1.0, abs(tgt.lo)) or v.max() > tgt.hi + 1e-13 * max(1.0, abs(tgt.hi))
            if not broken:
                bad.append(f"{tag}: not maximal")
    return bad


# ---------------------------------------------------------------------------
# Intersection multiplicity of the full chain around a periodic orbit
# ---------------------------------------------------------------------------

@dataclass
class MultiplicityReport:
    multiplicity: int
    bound: int
    holds: bool
    p: float
    n: int
    U_n: OrientedInterval
    orbit_points_in_U_n: int
    chain: Chain


def _orbit_and_period(orbit):
    if hasattr(orbit, "points"):
        return list(orbit.points), int(orbit.orientation_preserving_period)
    pts = list(orbit)
    return pts, len(pts)


def check_multiplicity_44(g: MapModel, orbit, kappa: float = 0.1, n: Optional[int] = None,
                          domain_ext: Optional[Domain] = None) -> MultiplicityReport:
    """Intersection multiplicity of the full pullback chain of ``U_n = 3 T_p`` along the orbit.

    ``orbit`` is a list of cycle points or anything with ``points`` and
    ``orientation_preserving_period``.  ``kappa`` is accepted for symmetry
    with the U-sequence but does not enter the full chain.
    """
    pts, n_op = _orbit_and_period(orbit)
    n = n_op if n is None else n
    ext_dom = g.domain.extended(3.0) if domain_ext is None else domain_ext
    ext = ext_dom.as_interval
    p, T_p = minimal_t_p(pts, ext_dom)
    U_n = T_p.scaled(3.0).intersect(ext)
    anchor = [p]
    for _ in range(n):
        anchor.append(float(g._values(anchor[-1])))
    anchor[-1] = p
    chain = pull_back_chain(g, U_n, anchor, bounds=ext)
    inside = sum(1 for x in set(pts) if U_n.contains_interior(x))
    return MultiplicityReport(chain.multiplicity, 44, chain.multiplicity <= 44, p, n, U_n, inside, chain)


# ---------------------------------------------------------------------------
# Cross-ratio along chains and the empirical rho
# ---------------------------------------------------------------------------

def _invert_on(g: MapModel, T: OrientedInterval, y: float) -> float:
    a, b = T.lo, T.hi
    ga, gb = float(g._values(a)), float(g._values(b))
    lo_v, hi_v = min(ga, gb), max(ga, gb)
    tol = 1e-12 * max(1.0, abs(y))
    if not lo_v - tol <= y <= hi_v + tol:
        raise NumericError(f"{y!r} not bracketed by g on {T}")
    up = gb >= ga
    for _ in range(BISECT_ITERS):
        m = 0.5 * (a + b)
        if m == a or m == b:
            break
        if (float(g._values(m)) < y) == up:
            a = m
        else:
            b = m
    return 0.5 * (a + b)


@dataclass
class PullbackReport:
    D_head: float
    D_tail: float
    eps_head: float  # largest delta with (1+2 delta) J_0 inside T_0
    eps_tail: float
    N: int
    m: int
    J_chain: list


def _space(T: OrientedInterval, J: OrientedInterval) -> float:
    return min(J.lo - T.lo, T.hi - J.hi) / J.length


def verify_pullback_cr(g: MapModel, chain: Chain, J_m: OrientedInterval) -> PullbackReport:
    """Pull ``J_m`` back inside the chain and compare cross-ratios and spaces at both ends."""
    Ts = chain.intervals
    m = len(Ts) - 1
    T_m = Ts[-1]
    if not (T_m.lo < J_m.lo and J_m.hi < T_m.hi):
        raise PreconditionError("J_m must lie strictly inside T_m")
    Js = [J_m]
    for k in range(m - 1, -1, -1):
        T = Ts[k]
        crit = _critical_locations(g, T)
        if any(T.contains(c) for c in crit):
            raise NotDiffeomorphismError(f"g has a critical point in T_{k}")
        a, b = _invert_on(g, T, Js[-1].lo), _invert_on(g, T, Js[-1].hi)
        Js.append(OrientedInterval.spanning(a, b))
    Js.reverse()
    T0, J0 = Ts[0], Js[0]
    D_head = float(_cr(T0.lo, J0.lo, J0.hi, T0.hi))
    D_tail = float(_cr(T_m.lo, J_m.lo, J_m.hi, T_m.hi))
    N = intersection_multiplicity(Ts[:m]) if m > 0 else 0
    return PullbackReport(D_head, D_tail, _space(T0, J0), _space(T_m, J_m), N, m, Js)


@dataclass
class RhoAccumulator:
    """Samples grouped by multiplicity ``N``; ``merge`` is associative."""

    cr: dict = field(default_factory=dict)  # N -> list of (D_tail, D_head)
    space: dict = field(default_factory=dict)  # N -> list of (eps_tail, eps_head)

    def add(self, rep: PullbackReport) -> "RhoAccumulator":
        self.cr.setdefault(rep.N, []).append((rep.D_tail, rep.D_head))
        self.space.setdefault(rep.N, []).append((rep.eps_tail, rep.eps_head))
        return self

    def merge(self, other: "RhoAccumulator") -> "RhoAccumulator":
        out = RhoAccumulator()
        for src in (self, other):
            for N, v in src.cr.items():
                out.cr.setdefault(N, []).extend(v)
            for N, v in src.space.items():
                out.space.setdefault(N, []).extend(v)
        return out

    def __len__(self):
        return sum(len(v) for v in self.cr.values())


@dataclass
class Envelope:
    N: int
    x: np.ndarray
    envelope: np.ndarray
    isotonic: np.ndarray


def _upper_envelope(pairs):
    """``rho(x) = max{y : sample x' <= x}``: non-decreasing upper envelope."""
    a = np.array(sorted(pairs))
    return a[:, 0], np.maximum.accumulate(a[:, 1]), a[:, 1]


def _lower_envelope(pairs):
    """``rho(x) = min{y : sample x' >= x}``: non-decreasing lower envelope."""
    a = np.array(sorted(pairs))
    return a[:, 0], np.minimum.accumulate(a[::-1, 1])[::-1], a[:, 1]


def _isotonic_loglog(y):
    ly = np.log(np.maximum(y, 1e-300))
    return np.exp(isotonic_regression(ly, increasing=True).x)


def estimate_rho(samples: Iterable | RhoAccumulator) -> dict:
    """Monotone envelope tables for both pullback statements.

    ``"cr"`` maps ``N`` to an upper envelope of ``D_head`` against
    ``D_tail``; ``"space"`` maps ``N`` to a lower envelope of the head
    space against the tail space.  Samples with multiplicity at most ``N``
    all count for ``N``.  Each table also carries an isotonic fit on the
    log-log scale.
    """
    acc = samples if isinstance(samples, RhoAccumulator) else RhoAccumulator()
    if not isinstance(samples, RhoAccumulator):
        for r in samples:
            acc.add(r)
    if len(acc) == 0:
        raise PreconditionError("need at least one sample")
    out = {"cr": {}, "space": {}}
    Ns = sorted(acc.cr)
    for N in Ns:
        pooled_cr = [p for M in Ns if M <= N for p in acc.cr[M]]
        pooled_sp = [p for M in Ns if M <= N for p in acc.space[M]]
        x, env, raw = _upper_envelope(pooled_cr)
        out["cr"][N] = Envelope(N, x, env, _isotonic_loglog(raw))
        x, env, raw = _lower_envelope(pooled_sp)
        out["space"][N] = Envelope(N, x, env, _isotonic_loglog(raw))
    return out
