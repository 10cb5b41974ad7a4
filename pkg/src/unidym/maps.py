"""Exactly differentiable one-dimensional maps.

Every map is a small expression tree.  Each node knows its own value and
first three derivatives in closed form; composite nodes combine child
jets with the third-order chain rule, so ``D f``, ``D^2 f`` and ``D^3 f``
are exact up to floating-point rounding (no finite differences anywhere).

All evaluation is vectorised over numpy arrays.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Callable, Optional, Sequence

import numpy as np
from numpy.polynomial import Polynomial as NpPolynomial
from numpy.polynomial import polynomial as P

from .errors import DomainError, FlatnessError, NumericError, PoleError, PreconditionError
from .intervals import Domain, OrientedInterval

Jet = tuple  # (f, Df, D2f, D3f), each a float or an ndarray


def chain_jets(outer: Jet, inner: Jet) -> Jet:
    """Derivatives of ``F(g(x))`` from ``F``'s derivatives at ``g(x)`` and ``g``'s at ``x``."""
    F0, F1, F2, F3 = outer
    _, g1, g2, g3 = inner
    return (
        F0,
        F1 * g1,
        F2 * g1 * g1 + F1 * g2,
        F3 * g1 * g1 * g1 + 3.0 * F2 * g1 * g2 + F1 * g3,
    )


@dataclass(frozen=True)
class MapModel:
    """Base node.  Subclasses implement ``_values`` and ``_jet``."""

    domain: Domain = field(default_factory=Domain.line, kw_only=True)
    label: str = field(default="", kw_only=True, compare=False)

    # -- evaluation, no domain check -------------------------------------
    def _values(self, x):
        return self._jet(x)[0]

    def _jet(self, x) -> Jet:  # pragma: no cover - abstract
        raise NotImplementedError

    # -- public evaluation ------------------------------------------------
    def __call__(self, x):
        self.domain.check(x)
        return self._values(np.asarray(x, dtype=float) if np.ndim(x) else float(x))

    def jet(self, x) -> Jet:
        """``(f, Df, D2f, D3f)`` at ``x`` (scalar or array) after a domain check."""
        self.domain.check(x)
        return self._jet(np.asarray(x, dtype=float) if np.ndim(x) else float(x))

    def deriv(self, x, k: int = 1):
        return self.jet(x)[k]

    # -- structure ----------------------------------------------------------
    def _known_critical_points(self, region: OrientedInterval):
        """Critical points from a closed form, or ``None`` to fall back to the generic scan."""
        return None

    def as_polynomial(self) -> Optional["Polynomial"]:
        """Equivalent :class:`Polynomial` if this tree is polynomial, else ``None``."""
        return None

    @property
    def is_polynomial(self) -> bool:
        return self.as_polynomial() is not None

    def with_domain(self, domain: Domain) -> "MapModel":
        return replace(self, domain=domain)

    def __matmul__(self, inner: "MapModel") -> "MapModel":
        return Compose(self, inner)

    def iterate(self, n: int) -> "MapModel":
        return Iterate(self, n)

    def name(self) -> str:
        return self.label or type(self).__name__


@dataclass(frozen=True)
class Polynomial(MapModel):
    """Real polynomial; ``coef`` in ascending order (``coef[k]`` multiplies ``x**k``)."""

    coef: tuple = (0.0, 1.0)

    def __post_init__(self):
        c = np.trim_zeros(np.asarray(self.coef, dtype=float), "b")
        if c.size == 0:
            c = np.zeros(1)
        if not np.all(np.isfinite(c)):
            raise ValueError("polynomial coefficients must be finite")
        object.__setattr__(self, "coef", tuple(float(v) for v in c))

    @cached_property
    def _derivative_coefs(self):
        c = np.asarray(self.coef)
        out = [c]
        for _ in range(3):
            c = P.polyder(c) if c.size > 1 else np.zeros(1)
            out.append(c)
        return out

    @property
    def degree(self) -> int:
        return len(self.coef) - 1

    @property
    def np_poly(self) -> NpPolynomial:
        return NpPolynomial(self.coef)

    def _values(self, x):
        return P.polyval(x, self.coef)

    def _jet(self, x) -> Jet:
        d = self._derivative_coefs
        return tuple(P.polyval(x, c) for c in d)

    def as_polynomial(self):
        return self

    def derivative_poly(self, k: int = 1) -> NpPolynomial:
        return self.np_poly.deriv(k) if k <= self.degree else NpPolynomial([0.0])


@dataclass(frozen=True)
class Mobius(MapModel):
    """``(a x + b) / (c x + d)`` with ``a d - b c != 0``."""

    a: float = 1.0
    b: float = 0.0
    c: float = 0.0
    d: float = 1.0

    def __post_init__(self):
        if self.a * self.d - self.b * self.c == 0:
            raise ValueError("Möbius map must satisfy ad - bc != 0")

    @property
    def det(self) -> float:
        return self.a * self.d - self.b * self.c

    @property
    def pole(self) -> Optional[float]:
        return None if self.c == 0 else -self.d / self.c

    def _denominator(self, x):
        den = self.c * x + self.d
        scale = np.abs(self.c * x) + abs(self.d)
        if np.any(np.abs(den) <= 1e-15 * scale):
            raise PoleError(f"Möbius pole hit at x={self.pole}")
        return den

    def _values(self, x):
        return (self.a * x + self.b) / self._denominator(x)

    def _jet(self, x) -> Jet:
        den = self._denominator(x)
        det, c = self.det, self.c
        return (
            (self.a * x + self.b) / den,
            det / den**2,
            -2.0 * c * det / den**3,
            6.0 * c * c * det / den**4,
        )

    def _known_critical_points(self, region):
        return []

    def as_polynomial(self):
        if self.c == 0:
            return Polynomial((self.b / self.d, self.a / self.d), domain=self.domain)
        return None


@dataclass(frozen=True)
class Tangent(MapModel):
    """``tan(k (x - center))``: constant Schwarzian ``2 k^2``.

    Used as an explicit witness family where a constant positive
    Schwarzian derivative is needed.
    """

    k: float = 1.0
    center: float = 0.0

    def __post_init__(self):
        if not self.k > 0:
            raise ValueError("tangent scale k must be positive")

    def _known_critical_points(self, region):
        return []

    def _angle(self, x):
        theta = self.k * (x - self.center)
        if np.any(np.abs(np.cos(theta)) < 1e-15):
            raise PoleError("tangent pole hit")
        return theta

    def _values(self, x):
        return np.tan(self._angle(x))

    def _jet(self, x) -> Jet:
        t = np.tan(self._angle(x))
        k = self.k
        s = 1.0 + t * t
        return (t, k * s, 2.0 * k * k * t * s, 2.0 * k**3 * s * (1.0 + 3.0 * t * t))


@dataclass(frozen=True)
class Compose(MapModel):
    """``outer(inner(x))``; the domain defaults to the inner map's domain."""

    outer: MapModel = None
    inner: MapModel = None

    def __init__(self, outer: MapModel, inner: MapModel, *, domain: Domain = None, label: str = ""):
        object.__setattr__(self, "outer", outer)
        object.__setattr__(self, "inner", inner)
        object.__setattr__(self, "domain", domain if domain is not None else inner.domain)
        object.__setattr__(self, "label", label or f"({outer.name()})∘({inner.name()})")

    def _values(self, x):
        return self.outer._values(self.inner._values(x))

    def _jet(self, x) -> Jet:
        g = self.inner._jet(x)
        return chain_jets(self.outer._jet(g[0]), g)

    def as_polynomial(self):
        po, pi = self.outer.as_polynomial(), self.inner.as_polynomial()
        if po is None or pi is None:
            return None
        comp = po.np_poly(pi.np_poly)
        return Polynomial(tuple(comp.coef), domain=self.domain)


@dataclass(frozen=True)
class Iterate(MapModel):
    """``f^n``; ``n = 0`` is the identity on ``f``'s domain."""

    base: MapModel = None
    n: int = 1

    def __init__(self, base: MapModel, n: int, *, domain: Domain = None, label: str = ""):
        if n < 0:
            raise ValueError("iterate power must be non-negative")
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "n", int(n))
        object.__setattr__(self, "domain", domain if domain is not None else base.domain)
        object.__setattr__(self, "label", label or f"({base.name()})^{n}")

    def _values(self, x):
        for _ in range(self.n):
            x = self.base._values(x)
        return x

    def _jet(self, x) -> Jet:
        one = np.ones_like(x) if np.ndim(x) else 1.0
        zero = 0.0 * one
        j = (x, one, zero, zero)
        for _ in range(self.n):
            j = chain_jets(self.base._jet(j[0]), j)
        return j

    def as_polynomial(self):
        p = self.base.as_polynomial()
        if p is None or p.degree ** self.n > 64:
            return None
        out = NpPolynomial([0.0, 1.0])
        for _ in range(self.n):
            out = p.np_poly(out)
        return Polynomial(tuple(out.coef), domain=self.domain)


# ---------------------------------------------------------------------------
# Constructors and named families
# ---------------------------------------------------------------------------

def polynomial(coef: Sequence[float], domain: Domain = None, label: str = "") -> Polynomial:
    return Polynomial(tuple(coef), domain=domain or Domain.line(), label=label)


def affine(a: float, b: float = 0.0, domain: Domain = None) -> Polynomial:
    return Polynomial((b, a), domain=domain or Domain.line(), label=f"{a}x+{b}")


def identity(domain: Domain = None) -> Polynomial:
    return Polynomial((0.0, 1.0), domain=domain or Domain.line(), label="id")


def mobius(a: float, b: float, c: float, d: float, domain: Domain = None) -> Mobius:
    return Mobius(a, b, c, d, domain=domain or Domain.line(), label=f"({a}x+{b})/({c}x+{d})")


def tangent(k: float, center: float = 0.0, domain: Domain = None) -> Tangent:
    if domain is None:
        h = 0.5 * math.pi / k * (1.0 - 1e-9)
        domain = Domain.interval(center - h, center + h)
    return Tangent(k, center, domain=domain, label=f"tan({k}(x-{center}))")


def logistic(a: float, domain: Domain = None) -> Polynomial:
    """``a x (1 - x)`` on ``[0, 1]``."""
    return Polynomial((0.0, a, -a), domain=domain or Domain.interval(0.0, 1.0), label=f"logistic(a={a})")


def cubic_perturbation(lam: float, domain: Domain = None) -> Polynomial:
    """``x^3 + lam x``: the degenerate-critical-point perturbation family."""
    return Polynomial((0.0, lam, 0.0, 1.0), domain=domain or Domain.line(), label=f"x^3+{lam}x")


def odd_cubic(mu: float, domain: Domain = None) -> Polynomial:
    """``mu x + x^3``."""
    return Polynomial((0.0, mu, 0.0, 1.0), domain=domain or Domain.line(), label=f"{mu}x+x^3")


FAMILIES: dict[str, Callable[..., MapModel]] = {
    "logistic": logistic,
    "cubic_perturbation": cubic_perturbation,
    "odd_cubic": odd_cubic,
    "tangent": tangent,
}


def family(name: str) -> Callable[..., MapModel]:
    try:
        return FAMILIES[name]
    except KeyError:
        raise PreconditionError(f"unknown map family {name!r}; known: {sorted(FAMILIES)}") from None


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------

def eval_derivatives(f: MapModel, x: float, order: int = 3) -> list[float]:
    """``[f(x), Df(x), ..., D^order f(x)]``."""
    if not 0 <= order <= 3:
        raise PreconditionError("order must be in 0..3")
    j = f.jet(float(x))
    return [float(v) for v in j[: order + 1]]


@dataclass(frozen=True)
class CriticalPoint:
    location: float
    multiplicity: int

    def __post_init__(self):
        if self.multiplicity < 1:
            raise ValueError("critical point multiplicity must be >= 1")


MULTIPLICITY_THRESHOLD = 1e-9
ROOT_RESIDUAL = 1e-12
PAIRING_TOL = 1e-10


def polish_root(c: np.ndarray, z: complex, steps: int = 1) -> complex:
    """Newton steps that are kept only while they reduce the residual."""
    dc = P.polyder(c)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        for _ in range(steps):
            d = P.polyval(z, dc)
            if d == 0:
                break
            w = z - P.polyval(z, c) / d
            if not np.isfinite(w) or abs(P.polyval(w, c)) > abs(P.polyval(z, c)):
                break
            z = w
    return z


ROOT_SCALE = 1e3
NEGLIGIBLE_LEADING = 1e-18


def _root_coefs(p: Polynomial) -> np.ndarray:
    """Coefficients of ``Dp`` with negligible leading terms removed.

    A leading term smaller than ``1e-18`` of the largest term anywhere in
    ``|x| <= 1e3`` changes ``Dp`` there by less than rounding.  It only adds
    roots of enormous modulus, but it wrecks the companion matrix scaling
    and can lose moderate roots.
    """
    dc = np.trim_zeros(np.asarray(p.derivative_poly(1).coef, dtype=float), "b")
    while dc.size > 1:
        terms = np.abs(dc) * ROOT_SCALE ** np.arange(dc.size)
        if terms[-1] >= NEGLIGIBLE_LEADING * float(np.max(terms[:-1])):
            break
        dc = np.trim_zeros(dc[:-1], "b")
    return dc


def derivative_roots(p: Polynomial) -> np.ndarray:
    """All complex roots of ``Dp``: companion-matrix eigenvalues, one Newton polish each."""
    dc = _root_coefs(p)
    if dc.size <= 1:
        return np.zeros(0, dtype=complex)
    roots = np.linalg.eigvals(P.polycompanion(dc)) if dc.size > 2 else np.array([-dc[0] / dc[1]], dtype=complex)
    return np.array([polish_root(dc, complex(z)) for z in roots])


def split_derivative_roots(p: Polynomial) -> tuple[list[float], list[complex]]:
    """Separate roots of ``Dp`` into real ones and upper-half-plane representatives of conjugate pairs.

    A root counts as real when ``|imag| <= PAIRING_TOL * max(1, |z|)``; a pair
    with a slightly larger imaginary part is still treated as a real
    multiple root when ``Dp`` vanishes at its real part to residual
    tolerance (eigenvalues of a repeated root scatter by ~eps^(1/m)).
    """
    dc = _root_coefs(p)
    roots = derivative_roots(p)
    if roots.size == 0:
        return [], []
    resid_tol = ROOT_RESIDUAL * (1.0 + float(np.max(np.abs(dc))))
    real, upper = [], []
    for z in roots:
        # root-relative scale: one tiny leading coefficient must not make every root "real"
        scale = max(1.0, abs(z))
        if abs(z.imag) <= PAIRING_TOL * scale:
            real.append(z.real)
        elif abs(z.imag) <= 1e-4 * scale and abs(P.polyval(z.real, dc)) <= resid_tol:
            real.append(z.real)
        elif z.imag > 0:
            upper.append(z)
    return sorted(real), upper


def _polynomial_multiplicity(p: Polynomial, x: float) -> int:
    c = np.asarray(p.coef)
    derivs = []
    k, cc = 0, c
    while cc.size > 1:
        cc = P.polyder(cc)
        k += 1
        derivs.append(abs(P.polyval(x, cc)) / math.factorial(k))
    higher = derivs[1:]
    if not higher or max(higher) == 0:
        raise FlatnessError(f"no non-vanishing derivative of order >= 2 at {x}")
    top = max(higher)
    for m, v in enumerate(higher, start=2):
        if v > MULTIPLICITY_THRESHOLD * top:
            return m - 1
    raise FlatnessError(f"multiplicity undetermined at {x}")  # pragma: no cover


def _polynomial_critical_points(p: Polynomial, region: OrientedInterval) -> list[CriticalPoint]:
    dc = _root_coefs(p)
    if dc.size == 0 or np.all(dc == 0):
        raise FlatnessError("derivative vanishes identically")
    real, _ = split_derivative_roots(p)
    if not real:
        return []
    clusters: list[list[float]] = [[real[0]]]
    for r in real[1:]:
        if r - clusters[-1][-1] <= 1e-5 * max(1.0, abs(r)):
            clusters[-1].append(r)
        else:
            clusters.append([r])
    out = []
    for cl in clusters:
        x = float(np.mean(cl))
        m = len(cl)
        # polish on the (m-1)-th derivative of Dp, which has a simple root here
        c = P.polyder(dc, m - 1) if m > 1 else dc
        x = float(polish_root(c, complex(x), steps=3).real)
        tol = 1e-12 * max(1.0, abs(x))
        if region.lo - tol <= x <= region.hi + tol:
            out.append(CriticalPoint(x, _polynomial_multiplicity(p, x)))
    return out


def _scan_critical_points(f: MapModel, region: OrientedInterval) -> list[CriticalPoint]:
    if not region.is_bounded:
        raise PreconditionError("critical point scan of a non-polynomial map needs a bounded region")
    if region.is_degenerate:
        d1 = f._jet(region.lo)[1]
        return [CriticalPoint(region.lo, _generic_multiplicity(f, region.lo))] if d1 == 0 else []
    n = int(min(2**21, max(2**14, math.ceil(region.length / 1e-5))))
    xs = np.linspace(region.lo, region.hi, n + 1)
    _, d1, d2, _ = f._jet(xs)
    scale = float(np.max(np.abs(d1))) or 1.0
    resid = ROOT_RESIDUAL * (1.0 + scale)
    zero = d1 == 0
    if np.count_nonzero(zero) > 3:
        runs = np.diff(np.flatnonzero(zero))
        if np.any(runs == 1):
            raise FlatnessError("derivative vanishes on consecutive grid points")
    found: list[float] = list(xs[zero])
    s = np.sign(d1)
    for i in np.flatnonzero(s[:-1] * s[1:] < 0):
        found.append(_bisect_newton(lambda t: f._jet(t)[1], xs[i], xs[i + 1]))
    # tangencies: local minima of |Df| without a sign change
    a = np.abs(d1)
    interior = np.flatnonzero((a[1:-1] <= a[:-2]) & (a[1:-1] <= a[2:]) & (s[:-2] == s[2:]) & (s[1:-1] != 0)) + 1
    for i in interior:
        x = xs[i]
        for _ in range(60):
            j = f._jet(x)
            if j[3] == 0:
                break
            step = j[2] / j[3]
            x = min(max(x - step, xs[i - 1]), xs[i + 1])
            if abs(step) < 1e-16 * max(1.0, abs(x)):
                break
        if abs(f._jet(x)[1]) <= resid:
            found.append(float(x))
    found.sort()
    merged: list[float] = []
    for x in found:
        if merged and x - merged[-1] <= 1e-9 * max(1.0, abs(x)):
            continue
        merged.append(x)
    return [CriticalPoint(float(x), _generic_multiplicity(f, float(x))) for x in merged]


def _generic_multiplicity(f: MapModel, x: float) -> int:
    _, _, d2, d3 = f._jet(x)
    d2, d3 = abs(d2) / 2.0, abs(d3) / 6.0
    top = max(d2, d3)
    if top == 0:
        raise FlatnessError(f"D2f and D3f both vanish at {x}; multiplicity beyond available order")
    if d2 > MULTIPLICITY_THRESHOLD * top:
        return 1
    return 2


def _bisect_newton(g: Callable[[float], float], a: float, b: float, iters: int = 200) -> float:
    ga, gb = g(a), g(b)
    if ga == 0:
        return a
    if gb == 0:
        return b
    if np.sign(ga) == np.sign(gb):
        raise NumericError("root not bracketed")
    for _ in range(iters):
        m = 0.5 * (a + b)
        if m <= a or m >= b:
            break
        gm = g(m)
        if gm == 0:
            return m
        if np.sign(gm) == np.sign(ga):
            a, ga = m, gm
        else:
            b, gb = m, gm
    return 0.5 * (a + b)


def critical_points(f: MapModel, region: OrientedInterval = None) -> list[CriticalPoint]:
    """Real zeros of ``Df`` in ``region`` (closed), ascending, with multiplicities."""
    if region is None:
        region = f.domain.as_interval
    p = f.as_polynomial()
    if p is not None:
        if p.degree < 1:
            raise FlatnessError("constant map")
        if p.degree == 1:
            return []
        return _polynomial_critical_points(p, region)
    known = f._known_critical_points(region)
    return known if known is not None else _scan_critical_points(f, region)


def image_interval(f: MapModel, T: OrientedInterval) -> OrientedInterval:
    """``f(T)`` from endpoint values and interior critical values."""
    f.domain.check_interval(T)
    pts = [T.lo, T.hi] + [c.location for c in critical_points(f, T)]
    vals = f._values(np.asarray(pts))
    return OrientedInterval(float(np.min(vals)), float(np.max(vals)))


def is_diffeo_on(f: MapModel, T: OrientedInterval) -> bool:
    """``Df`` has no zero on the closed interval ``T``."""
    f.domain.check_interval(T)
    return not critical_points(f, T)
