"""Registry of curated experiments.

Every experiment takes an ``ExperimentConfig`` and returns result
records.  Randomised sweeps draw case ``i`` from a Philox stream keyed by
``(seed, i)`` so cases can be computed in any order or in parallel.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from functools import partial
from typing import Callable

import numpy as np
from scipy.stats import qmc

from .. import chains as ch
from .. import critical_intervals as ci
from .. import orbits as orb
from ..crossratio import distortion, minimum_principle_check
from ..errors import InvariantError, NotDiffeomorphismError, UnidymError
from ..intervals import Domain, OrientedInterval
from ..maps import (CriticalPoint, cubic_perturbation, family, identity, is_diffeo_on, logistic, mobius,
                    polynomial, tangent)
from ..schwarzian import (schwarzian_at, schwarzian_sup, schwarzian_values, sharpness_witness,
                          verify_cos_bound, verify_sinh_bound)
from .config import ConfigError, ExperimentConfig
from .records import FAIL, FLAG, ResultRecord, make_record, sort_records

REGISTRY: dict[str, Callable[[ExperimentConfig], list]] = {}

MASK64 = (1 << 64) - 1


def experiment(name):
    def deco(fn):
        REGISTRY[name] = fn
        return fn
    return deco


def case_rng(seed: int, *counter: int) -> np.random.Generator:
    """Independent stream for one case: Philox keyed by the seed and the case counter."""
    sub = np.random.SeedSequence([c & MASK64 for c in counter]).generate_state(1, np.uint64)[0]
    return np.random.Generator(np.random.Philox(key=np.array([seed & MASK64, sub], dtype=np.uint64)))


def _error_record(exp, params, e, tol=1e-9) -> ResultRecord:
    return make_record(exp, params, {}, {}, math.nan, tol, (f"error: {type(e).__name__}: {e}",))


def _guarded(fn, cfg, item):
    try:
        return fn(cfg, item)
    except (InvariantError, ConfigError):
        raise
    except (UnidymError, ValueError, ArithmeticError) as e:
        return [_error_record(cfg.experiment, {"case": item} if isinstance(item, int) else {"param": item}, e)]


def fan_out(cfg: ExperimentConfig, fn, items) -> list:
    """Map ``fn(cfg, item)`` over items, in worker processes when ``run.workers > 1``."""
    items = list(items)
    work = partial(_guarded, fn, cfg)
    if cfg.workers > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            chunks = list(pool.map(work, items, chunksize=max(1, len(items) // (4 * cfg.workers))))
    else:
        chunks = [work(x) for x in items]
    return [r for chunk in chunks for r in chunk]


def run_experiment(cfg: ExperimentConfig) -> list[ResultRecord]:
    try:
        fn = REGISTRY[cfg.experiment]
    except KeyError:
        raise ConfigError(f"unknown experiment {cfg.experiment!r}; known: {sorted(REGISTRY)}") from None
    return sort_records(fn(cfg))


def _rand_inside(T: OrientedInterval, rng, lo=0.001, hi=0.999) -> OrientedInterval:
    while True:
        u = np.sort(rng.uniform(lo, hi, 2))
        if u[1] - u[0] > 1e-4:
            return OrientedInterval(T.lo + u[0] * T.length, T.lo + u[1] * T.length)


def _interval_opt(cfg, key, default) -> OrientedInterval:
    v = cfg.opt(key, default, tuple)
    if len(v) != 2:
        raise ConfigError(f"{key} needs two numbers")
    return OrientedInterval(*v)


# ---------------------------------------------------------------------------
# Schwarzian and cross-ratio basics
# ---------------------------------------------------------------------------

def _cubic_schwarzian_closed(x, lam):
    return 6.0 * (lam - 6.0 * x * x) / (lam + 3.0 * x * x) ** 2


def _blowup_case(cfg, lam):
    f = cubic_perturbation(lam)
    s0 = schwarzian_at(f, 0.0)
    rel0 = abs(s0 - 6.0 / lam) / (6.0 / lam)
    h = cfg.opt("blowup.halfwidth", 1.0, float)
    xs = np.linspace(-h, h, cfg.opt("blowup.grid", 2001, int))
    exact = _cubic_schwarzian_closed(xs, lam)
    grid_err = float(np.max(np.abs(schwarzian_values(f, xs) - exact) / np.maximum(1.0, np.abs(exact))))
    margin = min(cfg.tol("rel0") - rel0, cfg.tol("grid") - grid_err)
    return [make_record(cfg.experiment, {"lambda": lam},
                        {"S0": s0, "rel_err_S0": rel0, "grid_max_err": grid_err, "grid_sup": float(np.max(exact))},
                        {"closed_form": 6.0 / lam}, margin, 0.0)]


@experiment("schwarzian-blowup")
def schwarzian_blowup(cfg):
    cfg.tolerances.setdefault("rel0", 1e-12)
    cfg.tolerances.setdefault("grid", 1e-10)
    return fan_out(cfg, _blowup_case, cfg.grid((1.0, 0.1, 0.01)))


def _mobius_case(cfg, i):
    rng = case_rng(cfg.seed, i)
    while True:
        a, b, c, d = rng.normal(size=4)
        if abs(a * d - b * c) < 0.1:
            continue
        T = OrientedInterval.around(rng.uniform(-3, 3), 0.5 * 10 ** rng.uniform(-1.3, 0.3))
        # keep the pole well away so the Schwarzian is not dominated by rounding
        dist = min(abs(c * T.lo + d), abs(c * T.hi + d))
        if (c * T.lo + d) * (c * T.hi + d) <= 0 or dist < 0.05 * max(abs(c), 1e-300):
            continue
        break
    f = mobius(a, b, c, d)
    # gaps of at least 1% of |T|: the endpoint differences then keep ~13 digits
    J = _rand_inside(T, rng, 0.01, 0.99)
    B = distortion(f, T, J)
    S = float(np.max(np.abs(schwarzian_values(f, np.linspace(T.lo, T.hi, 100)))))
    tol = cfg.tol("neutral")
    err = max(abs(B - 1.0), S)
    return [make_record(cfg.experiment, {"case": i}, {"B": B, "abs_B_minus_1": abs(B - 1.0), "max_abs_S": S},
                        {"tolerance": tol}, tol - err, 0.0)]


@experiment("mobius-neutrality")
def mobius_neutrality(cfg):
    cfg.tolerances.setdefault("neutral", 1e-10)
    return fan_out(cfg, _mobius_case, range(cfg.n_samples(1000)))


def _cos_case(cfg, i):
    rng = case_rng(cfg.seed, i)
    for _ in range(10_000):
        if rng.random() < 0.3:
            k = rng.uniform(0.5, 3.0)
            f = tangent(k)
            C = 2 * k * k * (1.0 + rng.uniform(1e-6, 0.3))
            h = f.domain.hi
            center = rng.uniform(-0.8 * h, 0.8 * h)
            half = 0.5 * math.pi / math.sqrt(2 * C) * rng.uniform(0.1, 0.999)
            half = min(half, 0.999 * (h - abs(center)))
            T = OrientedInterval.around(center, half)
            kind = "tangent"
        else:
            deg = int(rng.integers(3, 6))
            f = polynomial(rng.normal(size=deg + 1))
            T = OrientedInterval.around(rng.uniform(-1, 1), 0.5 * 10 ** rng.uniform(-2, 0.3))
            if not is_diffeo_on(f, T):
                continue
            s = schwarzian_sup(f, T)
            c_lo = max(s, 0.0) * (1 + 1e-6) + 1e-9
            c_hi = math.pi**2 / (2 * T.length**2)
            if not c_lo < c_hi:
                continue
            C = c_lo + (c_hi - c_lo) * rng.uniform(0.001, 0.999)
            kind = "polynomial"
        rep = verify_cos_bound(f, T, _rand_inside(T, rng), C)
        if rep.hypothesis_ok:
            break
    return [make_record(cfg.experiment, {"case": i},
                        {"kind": kind, "B": rep.measured_B, "C": C, "T_length": T.length,
                         "sup_S": rep.schwarzian_extreme, "C_T2": C * T.length**2},
                        {"cos2": rep.bound_value}, rep.margin, cfg.tol("margin"), rep.violations)]


@experiment("cos-bound-sweep")
def cos_bound_sweep(cfg):
    return fan_out(cfg, _cos_case, range(cfg.n_samples(500)))


def _sinh_case(cfg, i):
    rng = case_rng(cfg.seed, i)
    J = OrientedInterval.around(rng.uniform(-1, 1), 0.5 * 10 ** rng.uniform(-2, 0))
    delta = rng.uniform(0.05, 2.0)
    T = J.scaled(1 + 2 * delta)
    # real-rooted derivative with roots off T: negative Schwarzian on T
    roots = [T.lo - rng.uniform(0.01, 2) if rng.random() < 0.5 else T.hi + rng.uniform(0.01, 2)
             for _ in range(int(rng.integers(2, 5)))]
    dcoef = np.polynomial.polynomial.polyfromroots(roots) * rng.choice([-1, 1]) * 10 ** rng.uniform(-1, 1)
    f = polynomial(np.polynomial.polynomial.polyint(dcoef))
    C = -schwarzian_sup(f, T) * rng.uniform(0.1, 0.999)
    rep = verify_sinh_bound(f, J, delta, C)
    margin = min(rep.margin, rep.secondary_margin)
    return [make_record(cfg.experiment, {"case": i},
                        {"B": rep.measured_B, "C": C, "delta": delta, "T_length": T.length,
                         "sup_S": rep.schwarzian_extreme, "primary_margin": rep.margin,
                         "chain_margin": rep.secondary_margin},
                        {"sinh": rep.bound_value, "quadratic": rep.secondary_bound},
                        margin, cfg.tol("margin"), rep.violations)]


@experiment("sinh-bound-sweep")
def sinh_bound_sweep(cfg):
    return fan_out(cfg, _sinh_case, range(cfg.n_samples(500)))


def _sharp_case(cfg, k):
    w = sharpness_witness(k)
    target = cfg.opt("sharpness.target", 0.05, float)
    flags = [] if w.schwarzian < math.pi**2 else ["Sf >= pi^2"]
    return [make_record(cfg.experiment, {"k": k},
                        {"B": w.B, "S": w.schwarzian, "S_over_pi2": w.schwarzian / math.pi**2},
                        {"target_B": target}, target - w.B, 0.0, flags)]


@experiment("sharpness-remark")
def sharpness_remark(cfg):
    default = (1.0, 2.0, 0.999 * math.pi / math.sqrt(2), 2.5, 3.0, 0.95 * math.pi, 3.1)
    return fan_out(cfg, _sharp_case, cfg.grid(default))


_MP_EXAMPLES = {
    "2x": (lambda: polynomial([0.0, 2.0]), (0.0, 0.1), 0.5, True),
    "identity": (lambda: identity(), (0.0, 1.0), 0.1, False),
    "x+x^3": (lambda: polynomial([0.0, 1.0, 0.0, 1.0]), (0.5, 0.6), 0.3, True),
}


def _mp_case(cfg, name):
    make, T, rho, expected = _MP_EXAMPLES[name]
    rep = minimum_principle_check(make(), OrientedInterval(*T), rho, samples=cfg.opt("minprinciple.samples", 256, int))
    gap = rep.min_derivative - (1 + rho)
    margin = gap if expected else -gap
    if rep.verified != expected:
        margin = min(margin, -1.0)
    return [make_record(cfg.experiment, {"example": name, "rho": rho},
                        {"verified": rep.verified, "min_derivative": rep.min_derivative,
                         "min_B_cubed": rep.min_B_cubed, "reason": rep.reason,
                         "counterexample": math.nan if rep.counterexample is None else rep.counterexample},
                        {"expected_verified": expected, "threshold": rep.threshold}, margin, 0.0)]


@experiment("minimum-principle")
def minimum_principle(cfg):
    return fan_out(cfg, _mp_case, sorted(_MP_EXAMPLES))


# ---------------------------------------------------------------------------
# Critical intervals and definite expansion
# ---------------------------------------------------------------------------

def _ci_case(cfg, lam):
    f = cubic_perturbation(lam)
    S = ci.compute_critical_intervals(f)
    r = 2 * math.sqrt(lam / 3)
    E = S.intervals[0].E
    e_err = max(abs(E.lo + r), abs(E.hi - r))
    s0 = schwarzian_at(f, 0.0)
    bound = ci.schwarzian_upper_bound(f, 0.0, S)
    rel = abs(s0 - bound) / abs(bound)
    margin = min(cfg.tol("interval") - e_err, cfg.tol("rel") - rel, (3 - 1) / 2 - S.d_E)
    return [make_record(cfg.experiment, {"lambda": lam},
                        {"E_lo": E.lo, "E_hi": E.hi, "d_E": S.d_E, "S0": s0, "interval_err": e_err, "rel_err": rel},
                        {"E_hi": r, "upper_bound_at_0": bound, "d_E_max": 1}, margin, 0.0)]


def _ci_domination_case(cfg, i):
    rng = case_rng(cfg.seed, 1 << 20, i)
    deg = int(rng.integers(3, 9))
    f = polynomial(np.r_[rng.normal(size=deg), 1.0])
    S = ci.compute_critical_intervals(f)
    xs = rng.uniform(-3, 3, cfg.opt("critical.points", 1000, int))
    worst, outside_pos = math.inf, 0
    for x in xs:
        try:
            s = schwarzian_at(f, x)
        except UnidymError:
            continue
        worst = min(worst, ci.schwarzian_upper_bound(f, x, S) + cfg.tol("margin") - s)
        if S.containing(x) == [] and s >= 0:
            outside_pos += 1
    margin = min(worst, (deg - 1) / 2 - S.d_E, -float(outside_pos))
    return [make_record(cfg.experiment, {"case": i, "degree": deg},
                        {"d_E": S.d_E, "positive_outside_E": outside_pos},
                        {"d_E_max": (deg - 1) / 2}, margin, 0.0)]


@experiment("critical-intervals")
def critical_intervals(cfg):
    cfg.tolerances.setdefault("interval", 1e-12)
    recs = fan_out(cfg, _ci_case, cfg.grid((1.0, 0.1, 0.01, 0.001)))
    return recs + fan_out(cfg, _ci_domination_case, range(cfg.opt("critical.random_polys", 20, int)))


def _random_degree6(seed):
    rng = case_rng(seed, 1 << 40)
    while True:
        f = polynomial(np.r_[rng.normal(size=6), 1.0], label="random6")
        S = ci.compute_critical_intervals(f)
        if S.d_E >= 1:
            return f


def _independent_d_E(f) -> int:
    """Upper-half-plane roots of Df counted from plain companion-matrix eigenvalues."""
    d = np.polynomial.polynomial.polyder(np.asarray(f.as_polynomial().coef, dtype=float))
    r = np.polynomial.polynomial.polyroots(d)
    return int(np.sum(r.imag > 1e-7 * np.maximum(1.0, np.abs(r))))


FAMILY_NAMES = ("cubic", "quartic", "random6")


def _make_family(cfg, key, name):
    if name == "cubic":
        return cubic_perturbation(cfg.opt(f"{key}.lambda", 0.1, float))
    if name == "quartic":
        return polynomial([0.0, 0.0, 1.0, 0.0, 1.0], label="x^4+x^2")
    if name == "random6":
        return _random_degree6(cfg.seed)
    raise ConfigError(f"unknown family {name!r} in {key}.families")


def _families(cfg, key):
    names = [s.strip() for s in cfg.opt(f"{key}.families", ",".join(FAMILY_NAMES)).split(",") if s.strip()]
    for n in names:
        if n not in FAMILY_NAMES:
            raise ConfigError(f"unknown family {n!r} in {key}.families")
    return list(enumerate(names))


def _family_flags(f, S):
    return [] if _independent_d_E(f) == S.d_E else ["d_E mismatch with companion-matrix count"]


def _part1_case(cfg, item):
    fi, name, j = item
    f = _make_family(cfg, "part1", name)
    S = ci.compute_critical_intervals(f)
    rng = case_rng(cfg.seed, fi + 1, j)
    k_max = 1 / (4 * math.sqrt(S.d_E)) if S.d_E else 0.25
    kappa = k_max * rng.uniform(0.05, 0.95)
    Ts = ci.random_part1_family(f, S, kappa, rng, m=int(rng.integers(1, 30)))
    rep = ci.verify_excep_part1(f, Ts, kappa, S=S)
    log_bound = -16 * kappa * rep.N * S.d_E**2
    margin = math.log(rep.product_B) - log_bound
    return [make_record(cfg.experiment, {"family": name, "case": j},
                        {"product_B": rep.product_B, "log_product_B": math.log(rep.product_B), "N": rep.N,
                         "d_E": S.d_E, "kappa": kappa, "m": len(Ts)},
                        {"bound": rep.bound, "log_bound": log_bound}, margin, cfg.tol("margin"),
                        rep.violations + _family_flags(f, S))]


@experiment("excep-part1")
def excep_part1(cfg):
    n = cfg.n_samples(200)
    items = [(fi, name, j) for fi, name in _families(cfg, "part1") for j in range(n)]
    return fan_out(cfg, _part1_case, items)


def _part2_case(cfg, item):
    fi, name, j = item
    f = _make_family(cfg, "part2", name)
    S = ci.compute_critical_intervals(f)
    rng = case_rng(cfg.seed, fi + 1, j)
    T, J, lam, kappa, delta, rep = ci.random_part2_config(f, S, rng)
    return [make_record(cfg.experiment, {"family": name, "case": j},
                        {"B": rep.B, "case_kind": rep.case, "lambda": lam, "kappa": kappa, "delta": delta,
                         "T_length": T.length, "d_E": S.d_E},
                        {"bound": rep.bound}, rep.B - rep.bound, cfg.tol("margin"),
                        rep.violations + _family_flags(f, S))]


@experiment("excep-part2")
def excep_part2(cfg):
    n = cfg.n_samples(200)
    items = [(fi, name, j) for fi, name in _families(cfg, "part2") for j in range(n)]
    return fan_out(cfg, _part2_case, items)


def _monotone_chain(g, rng, m, h_range, tries=1000):
    bounds = g.domain.as_interval
    for _ in range(tries):
        x0 = rng.uniform(bounds.lo, bounds.hi)
        orbit = [x0]
        for _ in range(m):
            orbit.append(float(g._values(orbit[-1])))
        T_m = OrientedInterval.around(orbit[-1], 0.5 * 10 ** rng.uniform(*h_range)).clip(bounds)
        if T_m is None or not T_m.contains_interior(orbit[-1]):
            continue
        chain = ch.pull_back_chain(g, T_m, orbit, bounds=bounds)
        if all(is_diffeo_on(g, T) for T in chain.intervals[:-1]):
            return chain
    raise NotDiffeomorphismError("no monotone chain found")


def _accounting_case(cfg, item):
    a, j = item
    g = family(cfg.family or "logistic")(a)
    rng = case_rng(cfg.seed, j, int(a * 1e6))
    kappa = cfg.opt("accounting.kappa", 0.05, float)
    # targets of length ~kappa/10..kappa/2: tinier heads lose digits in the endpoint cross-ratios
    chain = _monotone_chain(g, rng, cfg.opt("accounting.steps", 10, int),
                            (math.log10(kappa / 20), math.log10(kappa / 4)))
    J = _rand_inside(chain.intervals[0], rng)
    rep = ci.composed_distortion_accounting(g, chain, J, kappa)
    ledger_err = abs(rep.log_B_total - rep.log_B_direct)
    margin = min(rep.log_B_total - rep.negative_contribution_bound + cfg.tol("margin"),
                 cfg.tol("ledger") - ledger_err)
    return [make_record(cfg.experiment, {"a": a, "case": j},
                        {"log_B_total": rep.log_B_total, "log_B_direct": rep.log_B_direct, "ledger_err": ledger_err,
                         "C": rep.C, "N": rep.N, "d_E": rep.d_E},
                        {"negative_contribution": rep.negative_contribution_bound}, margin, 0.0,
                        [f"step {k}: {msg}" for k, msg in rep.hypothesis_failures])]


@experiment("accounting")
def accounting(cfg):
    cfg.tolerances.setdefault("ledger", 1e-9)
    items = [(a, j) for a in cfg.grid((4.0,)) for j in range(cfg.n_samples(50))]
    return fan_out(cfg, _accounting_case, items)


# ---------------------------------------------------------------------------
# Chains
# ---------------------------------------------------------------------------

def _t0_case(cfg, _):
    g = logistic(4.0)
    chain = ch.pull_back_chain(g, OrientedInterval(0.0, 0.5), [0.1, float(g(0.1))])
    exact = (1 - math.sqrt(0.5)) / 2
    err = abs(chain.head.hi - exact)
    return [make_record(cfg.experiment, {"check": "T0", "a": 4.0, "period": 0, "p": 0.1},
                        {"T0_lo": chain.head.lo, "T0_hi": chain.head.hi, "err": err},
                        {"T0_hi": exact}, cfg.tol("endpoint") - err, 0.0)]


def _multiplicity_case(cfg, a):
    g = logistic(a)
    out = []
    by_n = orb.find_periodic_orbits_upto(g, cfg.opt("chains.n_max", 8, int), grid_log2=cfg.opt("chains.grid_log2", 16, int))
    kappa = cfg.opt("chains.kappa", 0.1, float)
    for n in sorted(by_n):
        for o in by_n[n]:
            params = {"check": "multiplicity", "a": a, "period": n, "p": o.points[0]}
            try:
                rep = ch.check_multiplicity_44(g, o, kappa)
            except (UnidymError, ValueError, ArithmeticError) as e:
                out.append(_error_record(cfg.experiment, params, e))
                continue
            out.append(make_record(cfg.experiment, params,
                                   {"multiplicity": rep.multiplicity, "chain_length": rep.n,
                                    "orbit_points_in_U": rep.orbit_points_in_U_n},
                                   {"multiplicity": rep.bound}, rep.bound - rep.multiplicity, 0.0))
    return out


@experiment("chains")
def chains(cfg):
    cfg.tolerances.setdefault("endpoint", 1e-10)
    return fan_out(cfg, _t0_case, [0]) + fan_out(cfg, _multiplicity_case, cfg.grid((3.2, 3.5, 3.83, 4.0)))


def _pullback_sample(cfg, item):
    a, j = item
    g = family(cfg.family or "logistic")(a)
    rng = case_rng(cfg.seed, j, int(a * 1e6))
    chain = _monotone_chain(g, rng, int(rng.integers(1, cfg.opt("rho.max_steps", 8, int) + 1)), (-4, -0.7))
    J_m = _rand_inside(chain.intervals[-1], rng, 0.01, 0.99)
    return [ch.verify_pullback_cr(g, chain, J_m)]


@experiment("rho-envelope")
def rho_envelope(cfg):
    items = [(a, j) for a in cfg.grid((4.0,)) for j in range(cfg.n_samples(400))]
    acc = ch.RhoAccumulator()
    failed = []
    for x in fan_out(cfg, _pullback_sample, items):
        if isinstance(x, ResultRecord):
            failed.append(x)
        else:
            acc.add(x)
    if len(acc) == 0:
        return failed
    table = ch.estimate_rho(acc)
    points = cfg.opt("rho.points", 40, int)
    out = []
    for kind, curves in table.items():
        for N, env in curves.items():
            idx = np.unique(np.linspace(0, len(env.x) - 1, min(points, len(env.x))).astype(int))
            prev = None
            for i in idx:
                step = 0.0 if prev is None else float(env.envelope[i] - env.envelope[prev])
                out.append(make_record(cfg.experiment, {"kind": kind, "N": N, "x": float(env.x[i])},
                                       {"envelope": float(env.envelope[i]), "isotonic": float(env.isotonic[i]),
                                        "samples": len(env.x)},
                                       {}, step, 0.0))
                prev = i
    return failed + out


# ---------------------------------------------------------------------------
# Orbits, packs and the census
# ---------------------------------------------------------------------------

def _orbit_examples(cfg, name):
    tol = cfg.tol("orbit")
    exp = cfg.experiment
    out = []
    if name == "logistic-3.2":
        g = logistic(3.2)
        by_n = orb.find_periodic_orbits_upto(g, 2)
        expected = {(1, 0.0): 3.2, (1, 0.6875): -1.2, (2, 0.5130445095326298): 0.16}
        found = {(o.period, o.points[0]): o.multiplier for n in by_n for o in by_n[n]}
        for (n, x), mult in expected.items():
            hit = [(k, v) for k, v in found.items() if k[0] == n and abs(k[1] - x) < 1e-8]
            if not hit:
                out.append(make_record(exp, {"example": name, "period": n, "point": x}, {}, {"multiplier": mult},
                                       -1.0, 0.0, ["orbit not found"]))
                continue
            (_, px), v = hit[0]
            err = max(abs(v - mult), abs(px - x))
            out.append(make_record(exp, {"example": name, "period": n, "point": x},
                                   {"point": px, "multiplier": v}, {"multiplier": mult}, tol - err, 0.0))
        extra = len(found) - len(expected)
        out.append(make_record(exp, {"example": name, "period": 0, "point": math.nan},
                               {"orbits": len(found)}, {"orbits": len(expected)}, -abs(extra), 0.0))
        return out
    if name == "odd-cubic-1.2":
        g = polynomial([0.0, -1.2, 0.0, 1.0], domain=Domain.interval(-1.0, 1.0))
        packs = orb.group_into_packs([o for n, os in orb.find_periodic_orbits_upto(g, 2).items() for o in os], g)
        r = math.sqrt(0.2)
        big = [p for p in packs if len(p.points) == 3]
        if len(big) != 1:
            return [make_record(exp, {"example": name}, {"packs": len(packs)}, {"packs_with_3_points": 1},
                                -1.0, 0.0)]
        p = big[0]
        err = max(abs(p.carrier.I.lo + r), abs(p.carrier.I.hi - r))
        return [make_record(exp, {"example": name},
                            {"carrier_lo": p.carrier.I.lo, "carrier_hi": p.carrier.I.hi, "N": p.carrier.n,
                             "members": len(p.points), "violations": len(orb.check_pack(g, p))},
                            {"carrier_hi": r, "N": 2}, min(tol - err, -abs(p.carrier.n - 2),
                                                           -len(orb.check_pack(g, p))), 0.0)]
    if name == "odd-cubic-1.8":
        g = polynomial([0.0, 1.8, 0.0, -1.0], domain=Domain.interval(-1.5, 1.5))
        packs = orb.group_into_packs(orb.find_periodic_orbits(g, 1), g)
        return [make_record(exp, {"example": name}, {"packs": len(packs)}, {"packs": 3},
                            -abs(len(packs) - 3), 0.0)]
    raise ConfigError(f"unknown orbit example {name!r}")


@experiment("orbits-packs")
def orbits_packs(cfg):
    cfg.tolerances.setdefault("orbit", 1e-8)
    names = [s.strip() for s in cfg.opt("orbits.examples", "logistic-3.2,odd-cubic-1.2,odd-cubic-1.8").split(",")]
    return fan_out(cfg, _orbit_examples, names)


def _census_case(cfg, a):
    g = family(cfg.family or "logistic")(a)
    rho = cfg.opt("census.rho", 0.05, float)
    cap = cfg.opt("census.max_exceptional", 2, int)
    row = orb.census_one(g, cfg.opt("census.n_max", 8, int), rho, grid_log2=cfg.opt("census.grid_log2", 20, int),
                         basin_iters=cfg.opt("census.basin_iters", 10_000, int), param=a)
    flags = [f"neutral orbits: {row.neutral_flags}"] if row.neutral_flags else []
    margin = min(cap - row.exceptional, row.min_expansive_multiplier - (1 + rho))
    sources = ";".join(f"{i}:{'|'.join(v)}" for i, v in sorted(row.basin_sources.items()))
    return [make_record(cfg.experiment, {"a": a},
                        {"n_orbits": row.n_orbits, "n_packs": row.n_packs, "exceptional": row.exceptional,
                         "min_expansive_multiplier": row.min_expansive_multiplier, "basin_sources": sources},
                        {"max_exceptional": cap, "multiplier": 1 + rho}, margin, 0.0, flags)]


@experiment("theorem-b-census")
def theorem_b_census(cfg):
    return fan_out(cfg, _census_case, cfg.grid(np.linspace(2.8, 3.57, 200)))


def _first_entry_case(cfg, name):
    n = cfg.n_samples(1000)
    u = qmc.Halton(d=1, scramble=False).random(n + 1)[1:, 0]
    if name == "logistic-4":
        g = logistic(4.0)
        J = _interval_opt(cfg, "firstentry.logistic_J", "0.45, 0.55")
        xs = u
        expect_violations = False
    elif name == "cubic":
        lam = cfg.opt("firstentry.lambda", 0.01, float)
        g = cubic_perturbation(lam)
        J = _interval_opt(cfg, "firstentry.cubic_J", "-0.1, 0.1")
        xs = J.lo + u * J.length
        expect_violations = True
    else:
        raise ConfigError(f"unknown first-entry case {name!r}")
    rep = orb.first_entry_schwarzian_check(g, J, xs, n_max=cfg.opt("firstentry.n_max", 50, int))
    margin = float(rep.violations if expect_violations else -rep.violations)
    if expect_violations and rep.violations == 0:
        margin = -1.0
    return [make_record(cfg.experiment, {"example": name},
                        {"samples": rep.samples, "entered": rep.entered, "violations": rep.violations,
                         "skipped": rep.skipped, "max_schwarzian": rep.max_schwarzian},
                        {"expect_violations": expect_violations}, margin, 0.0)]


@experiment("first-entry")
def first_entry(cfg):
    return fan_out(cfg, _first_entry_case, ["cubic", "logistic-4"])


def _appendix_case(cfg, name):
    if name == "1-2x^2":
        g, c, T = polynomial([1.0, 0.0, -2.0], domain=Domain.interval(-1, 1)), 0.0, OrientedInterval(-1.0, 1.0)
    else:
        g, c, T = logistic(4.0), 0.5, OrientedInterval(0.0, 1.0)
    rep = orb.quadratic_schwarzian_bound_check(g, CriticalPoint(c, 1), T, samples=cfg.n_samples(10_000))
    return [make_record(cfg.experiment, {"example": name},
                        {"A": rep.A, "B": rep.B, "violations": rep.violations, "samples": rep.samples},
                        {"violations": 0}, rep.worst_margin if rep.violations == 0 else -rep.violations, 0.0)]


@experiment("appendix-bound")
def appendix_bound(cfg):
    return fan_out(cfg, _appendix_case, ["1-2x^2", "logistic-4"])


def _contraction_case(cfg, a):
    g = family(cfg.family or "logistic")(a)
    eps = cfg.opt("contraction.epsilon", 0.1, float)
    (row,) = orb.uniform_contraction_scan([g], eps, interval_samples=cfg.opt("contraction.centres", 16, int),
                                          n_max=cfg.opt("contraction.n_max", 8, int),
                                          rho=cfg.opt("contraction.rho", 0.0, float))
    flags = ["neutral orbit at tested periods"] if row.neutral_flag else []
    return [make_record(cfg.experiment, {"a": a},
                        {"delta_hat": row.delta_hat, "max_component": row.max_component,
                         "centres_used": row.samples_used},
                        {"epsilon": eps}, eps - row.max_component, 0.0, flags)]


@experiment("uniform-contraction")
def uniform_contraction(cfg):
    return fan_out(cfg, _contraction_case, cfg.grid((2.9, 3.0, 3.2, 3.83, 4.0)))
