"""Closed real intervals and map domains."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional

from .errors import DomainError


@dataclass(frozen=True)
class OrientedInterval:
    """Closed interval ``[lo, hi]`` with ``lo <= hi``.

    A zero-length interval is allowed (``is_degenerate``); an empty
    intersection is represented by ``None`` rather than by a flagged
    interval.
    """

    lo: float
    hi: float

    def __post_init__(self):
        lo, hi = float(self.lo), float(self.hi)
        if math.isnan(lo) or math.isnan(hi):
            raise ValueError("interval endpoints must not be NaN")
        if lo > hi:
            raise ValueError(f"interval endpoints out of order: [{lo}, {hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def around(cls, center: float, half_length: float) -> "OrientedInterval":
        return cls(center - half_length, center + half_length)

    @classmethod
    def spanning(cls, a: float, b: float) -> "OrientedInterval":
        """Interval between two points given in either order."""
        return cls(min(a, b), max(a, b))

    @property
    def length(self) -> float:
        return self.hi - self.lo

    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)

    @property
    def half_length(self) -> float:
        return 0.5 * (self.hi - self.lo)

    @property
    def is_degenerate(self) -> bool:
        return self.hi == self.lo

    @property
    def is_bounded(self) -> bool:
        return math.isfinite(self.lo) and math.isfinite(self.hi)

    def scaled(self, factor: float) -> "OrientedInterval":
        """``factor * I``: same midpoint, half-length multiplied by ``factor``."""
        if factor < 0:
            raise ValueError("scale factor must be non-negative")
        return OrientedInterval.around(self.mid, factor * self.half_length)

    def contains(self, x: float, tol: float = 0.0) -> bool:
        return self.lo - tol <= x <= self.hi + tol

    def contains_interior(self, x: float) -> bool:
        return self.lo < x < self.hi

    def contains_interval(self, other: "OrientedInterval", tol: float = 0.0) -> bool:
        return self.lo - tol <= other.lo and other.hi <= self.hi + tol

    def intersect(self, other: "OrientedInterval") -> Optional["OrientedInterval"]:
        lo, hi = max(self.lo, other.lo), min(self.hi, other.hi)
        if lo > hi:
            return None
        return OrientedInterval(lo, hi)

    def intersects(self, other: "OrientedInterval") -> bool:
        return max(self.lo, other.lo) <= min(self.hi, other.hi)

    def intersection_length(self, other: "OrientedInterval") -> float:
        return max(0.0, min(self.hi, other.hi) - max(self.lo, other.lo))

    def hull(self, other: "OrientedInterval") -> "OrientedInterval":
        return OrientedInterval(min(self.lo, other.lo), max(self.hi, other.hi))

    def clip(self, other: "OrientedInterval") -> "OrientedInterval":
        out = self.intersect(other)
        if out is None:
            raise DomainError(f"{self} does not meet {other}")
        return out

    def distance_to(self, x: float) -> float:
        if x < self.lo:
            return self.lo - x
        if x > self.hi:
            return x - self.hi
        return 0.0

    def __iter__(self):
        yield self.lo
        yield self.hi

    def __repr__(self) -> str:
        return f"[{self.lo!r}, {self.hi!r}]"


def hull_of(intervals: Iterable[OrientedInterval]) -> OrientedInterval:
    items = list(intervals)
    if not items:
        raise ValueError("hull of an empty collection")
    return OrientedInterval(min(i.lo for i in items), max(i.hi for i in items))


@dataclass(frozen=True)
class Domain:
    """Phase space of a map: a (possibly unbounded) interval or a circle.

    Circle maps are handled through a lift: points are real numbers,
    ``reduce`` brings them back to ``[0, period)``, and an arc between
    two points is the representative shorter than half the period.
    """

    kind: str = "interval"
    lo: float = -math.inf
    hi: float = math.inf
    period: float = 1.0

    def __post_init__(self):
        if self.kind not in ("interval", "circle"):
            raise ValueError(f"unknown domain kind {self.kind!r}")
        if self.kind == "interval" and not self.lo < self.hi:
            raise ValueError("interval domain bounds must be strictly ordered")
        if self.kind == "circle" and not self.period > 0:
            raise ValueError("circle period must be positive")

    @classmethod
    def interval(cls, lo: float, hi: float) -> "Domain":
        return cls("interval", float(lo), float(hi))

    @classmethod
    def line(cls) -> "Domain":
        return cls("interval")

    @classmethod
    def circle(cls, period: float = 1.0) -> "Domain":
        return cls("circle", 0.0, float(period), float(period))

    @property
    def is_circle(self) -> bool:
        return self.kind == "circle"

    @property
    def is_bounded(self) -> bool:
        return self.is_circle or (math.isfinite(self.lo) and math.isfinite(self.hi))

    @property
    def as_interval(self) -> OrientedInterval:
        return OrientedInterval(self.lo, self.hi)

    @property
    def length(self) -> float:
        return self.period if self.is_circle else self.hi - self.lo

    def slack(self, x: float) -> float:
        return 1e-12 * max(1.0, abs(x))

    def contains(self, x: float) -> bool:
        if self.is_circle:
            return math.isfinite(x)
        return self.lo - self.slack(self.lo) <= x <= self.hi + self.slack(self.hi)

    def check(self, x) -> None:
        import numpy as np

        arr = np.asarray(x, dtype=float)
        if self.is_circle:
            if not np.all(np.isfinite(arr)):
                raise DomainError("non-finite point on the circle")
            return
        lo_ok = arr >= self.lo - 1e-12 * max(1.0, abs(self.lo))
        hi_ok = arr <= self.hi + 1e-12 * max(1.0, abs(self.hi))
        if not np.all(lo_ok & hi_ok):
            bad = arr[~(lo_ok & hi_ok)] if arr.ndim else arr
            raise DomainError(f"point(s) {bad!r} outside domain [{self.lo}, {self.hi}]")

    def check_interval(self, T: OrientedInterval) -> None:
        self.check(T.lo)
        self.check(T.hi)

    def reduce(self, x: float) -> float:
        if not self.is_circle:
            return x
        return x % self.period

    def arc(self, a: float, b: float) -> OrientedInterval:
        """Lift of the short arc from ``a`` to ``b`` (circle only)."""
        if not self.is_circle:
            return OrientedInterval.spanning(a, b)
        a, b = self.reduce(a), self.reduce(b)
        d = (b - a) % self.period
        if d > 0.5 * self.period:
            d -= self.period
        if abs(abs(d) - 0.5 * self.period) < 1e-15 * self.period:
            raise DomainError("antipodal points: arc is ambiguous")
        return OrientedInterval.spanning(a, a + d)

    def extended(self, factor: float = 3.0) -> "Domain":
        """``factor * N`` for an interval domain; the circle is returned unchanged."""
        if self.is_circle or not self.is_bounded:
            return self
        T = self.as_interval.scaled(factor)
        return Domain.interval(T.lo, T.hi)


def intersection_multiplicity(intervals: Iterable[OrientedInterval]) -> int:
    """Largest number of the (closed) intervals sharing a common point."""
    events = []
    for I in intervals:
        events.append((I.lo, 0))  # opens sort before closes at equal x
        events.append((I.hi, 1))
    events.sort()
    depth = best = 0
    for _, kind in events:
        if kind == 0:
            depth += 1
            best = max(best, depth)
        else:
            depth -= 1
    return best
