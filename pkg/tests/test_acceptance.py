"""Acceptance criteria 1-13, one PASS/FAIL line each.

Run directly (``python3 tests/test_acceptance.py``) for the summary, or
through pytest where each criterion is its own test and the lines are
repeated in the terminal summary.
"""
from __future__ import annotations

import math
import time
from pathlib import Path

import numpy as np
import pytest

from unidym.chains import pull_back_chain
from unidym.critical_intervals import compute_critical_intervals, schwarzian_upper_bound
from unidym.harness import ExperimentConfig, records_to_csv_body, run_experiment
from unidym.intervals import Domain, OrientedInterval
from unidym.maps import CriticalPoint, cubic_perturbation, logistic, polynomial
from unidym.orbits import (find_periodic_orbits_upto, first_entry_schwarzian_check, group_into_packs,
                           quadratic_schwarzian_bound_check)
from unidym.schwarzian import schwarzian_at, schwarzian_values, sinh_bound, sinh_secondary_bound

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

LINES: list[str] = []
_bodies: dict[str, str] = {}


def _run(exp: str, **override):
    cfg = ExperimentConfig.load(CONFIGS / f"{exp}.cfg", exp)
    for k, v in override.items():
        setattr(cfg, k, v)
    recs = run_experiment(cfg)
    if not override:
        _bodies[exp] = records_to_csv_body(recs)
    return recs


# ---------------------------------------------------------------------------

def crit_01():
    worst0, worst_grid = 0.0, 0.0
    for lam in (1.0, 0.1, 0.01, 0.001):
        f = cubic_perturbation(lam)
        worst0 = max(worst0, abs(schwarzian_at(f, 0.0) - 6 / lam) / (6 / lam))
        xs = np.linspace(-1, 1, 2001)
        exact = 6 * (lam - 6 * xs**2) / (lam + 3 * xs**2) ** 2
        worst_grid = max(worst_grid, float(np.max(np.abs(schwarzian_values(f, xs) - exact) / np.maximum(1, abs(exact)))))
    recs = _run("schwarzian-blowup")
    ok = worst0 < 1e-12 and worst_grid < 1e-10 and all(r.status == "pass" for r in recs)
    return ok, f"max rel err at 0 = {worst0:.2e}, grid err = {worst_grid:.2e}", 1.0


def crit_02():
    recs = _run("mobius-neutrality")
    worst_B = max(r.measured["abs_B_minus_1"] for r in recs)
    worst_S = max(r.measured["max_abs_S"] for r in recs)
    ok = len(recs) == 1000 and worst_B < 1e-10 and worst_S < 1e-10
    return ok, f"{len(recs)} maps, max |B-1| = {worst_B:.2e}, max |Sf| = {worst_S:.2e}", 5.0


def crit_03():
    recs = _run("cos-bound-sweep")
    hyp = all(not r.flags and r.measured["sup_S"] < r.measured["C"] + 1e-9
              and r.measured["C_T2"] < math.pi**2 / 2 for r in recs)
    worst = min(r.margin for r in recs)
    ok = len(recs) == 500 and hyp and worst >= -1e-9
    return ok, f"{len(recs)} cases, hypotheses verified: {hyp}, min margin = {worst:.3e}", 30.0


def crit_04():
    recs = _run("sinh-bound-sweep")
    prim = min(r.measured["primary_margin"] for r in recs)
    chain = min(r.measured["chain_margin"] for r in recs)
    hyp = all(not r.flags for r in recs)
    a, b = sinh_bound(2.0, 1.0, 0.5), sinh_secondary_bound(2.0, 1.0, 0.5)
    example = abs(a - 1.042190) < 1e-6 and abs(b - 1.041667) < 1e-6 and a >= b
    ok = len(recs) == 500 and hyp and prim >= -1e-9 and chain >= -1e-9 and example
    return ok, (f"{len(recs)} cases, min B - sinh = {prim:.3e}, min sinh - quadratic = {chain:.3e}, "
                f"example {a:.6f} >= {b:.6f}"), 30.0


def crit_05():
    worst_E, worst_rel, ok = 0.0, 0.0, True
    for lam in (1.0, 0.1, 0.01, 0.001):
        f = cubic_perturbation(lam)
        S = compute_critical_intervals(f)
        r = 2 * math.sqrt(lam / 3)
        E = S.intervals[0].E
        worst_E = max(worst_E, abs(E.lo + r), abs(E.hi - r))
        bound = schwarzian_upper_bound(f, 0.0, S)
        worst_rel = max(worst_rel, abs(bound - 6 / lam) / (6 / lam), abs(schwarzian_at(f, 0.0) - bound) / bound)
        ok &= S.d_E == 1 <= (3 - 1) / 2
    ok &= worst_E < 1e-12 and worst_rel < 1e-10
    return ok, f"max endpoint err = {worst_E:.2e}, max rel err Sf(0) vs 2d_E/b^2 = {worst_rel:.2e}, d_E = 1", 1.0


def _per_family(recs):
    out = {}
    for r in recs:
        out.setdefault(r.params["family"], []).append(r)
    return out


def crit_06():
    recs = _run("excep-part1")
    fam = _per_family(recs)
    ok = sorted(fam) == ["cubic", "quartic", "random6"] and all(len(v) == 200 for v in fam.values())
    ok &= all(r.status == "pass" and not r.flags for r in recs)
    ok &= all(r.measured["product_B"] > r.bound["bound"] for r in recs)
    d6 = fam["random6"][0].measured["d_E"]
    worst = min(r.margin for r in recs)
    return ok, f"3 families x {min(len(v) for v in fam.values())}, random6 d_E = {d6}, min log margin = {worst:.3e}", 60.0


def crit_07():
    recs = _run("excep-part2")
    fam = _per_family(recs)
    ok = sorted(fam) == ["cubic", "quartic", "random6"] and all(len(v) == 200 for v in fam.values())
    ok &= all(r.status == "pass" and not r.flags for r in recs)
    kinds = sorted({r.measured["case_kind"] for r in recs})
    worst = min(r.margin for r in recs)
    return ok, f"3 families x 200, cases seen {kinds}, min B - bound = {worst:.3e}", 60.0


def crit_08():
    g = logistic(4.0)
    chain = pull_back_chain(g, OrientedInterval(0.0, 0.5), [0.1, float(g(0.1))])
    err = abs(chain.head.hi - (1 - math.sqrt(0.5)) / 2)
    recs = [r for r in _run("chains") if r.params["check"] == "multiplicity"]
    mult = max(r.measured["multiplicity"] for r in recs)
    ok = err < 1e-10 and recs and all(r.status == "pass" for r in recs) and mult <= 44
    ok &= max(r.params["period"] for r in recs) <= 8
    return ok, f"T_0 endpoint err = {err:.2e}, {len(recs)} orbits (period <= 8), max multiplicity = {mult}", 30.0


def crit_09():
    g = logistic(3.2)
    by_n = find_periodic_orbits_upto(g, 2)
    fixed = sorted(o.points[0] for o in by_n[1])
    (two,) = by_n[2]
    ok = len(fixed) == 2 and abs(fixed[0]) < 1e-12 and abs(fixed[1] - 0.6875) < 1e-12
    ok &= abs(two.multiplier - 0.16) < 1e-8
    # 2-cycle multiplier from its closed form 4 + 2a - a^2 and the product rule
    prod = math.prod(3.2 * (1 - 2 * x) for x in two.points)
    ok &= abs(prod - (4 + 6.4 - 3.2**2)) < 1e-8

    h = polynomial([0.0, -1.2, 0.0, 1.0], domain=Domain.interval(-1.0, 1.0))
    packs = group_into_packs([o for os in find_periodic_orbits_upto(h, 2).values() for o in os], h)
    r = math.sqrt(0.2)
    big = [p for p in packs if len(p.points) == 3]
    ok &= len(big) == 1
    if big:
        p = big[0]
        pts = sorted(p.points)
        ok &= max(abs(pts[0] + r), abs(pts[1]), abs(pts[2] - r)) < 1e-9
        ok &= abs(p.carrier.I.lo + r) < 1e-9 and abs(p.carrier.I.hi - r) < 1e-9 and p.carrier.n == 2
        ok &= all(o.orientation_preserving_period == 2 for o in p.members)
    return ok, (f"fixed {fixed}, 2-cycle multiplier {two.multiplier:.10f}; "
                f"odd cubic: {len(big)} pack with carrier [-sqrt .2, sqrt .2], N = 2"), 10.0


def crit_10():
    recs = _run("theorem-b-census")
    exc = max(r.measured["exceptional"] for r in recs)
    mult = min(r.measured["min_expansive_multiplier"] for r in recs)
    errors = [r for r in recs if any(f.startswith("error") for f in r.flags)]
    neutral = sum(1 for r in recs if r.flags and r not in errors)
    ok = len(recs) == 200 and exc <= 2 and mult > 1.05 and not errors
    return ok, (f"{len(recs)} parameters, max exceptional packs = {exc}, min expansive |multiplier| = {mult:.4f}, "
                f"{neutral} parameters with neutral-band orbits (inside exceptional packs)"), 300.0


def crit_11():
    g = logistic(4.0)
    xs = (np.arange(1000) + 0.5) / 1000
    rep = first_entry_schwarzian_check(g, OrientedInterval(0.45, 0.55), xs, 50)
    c = cubic_perturbation(0.01)
    xc = np.linspace(-0.1, 0.1, 1000)
    rep_c = first_entry_schwarzian_check(c, OrientedInterval(-0.1, 0.1), xc, 50)
    recs = {r.params["example"]: r for r in _run("first-entry")}
    ok = rep.violations == 0 and rep.samples == 1000 and rep_c.violations > 0
    ok &= recs["logistic-4"].measured["violations"] == 0 and recs["cubic"].measured["violations"] > 0
    return ok, (f"logistic a=4: {rep.violations} violations / {rep.entered} entered; "
                f"x^3+0.01x: {rep_c.violations} violations reported"), 60.0


def crit_12():
    cases = [
        (polynomial([1.0, 0.0, -2.0], domain=Domain.interval(-1, 1)), 0.0, OrientedInterval(-1.0, 1.0)),
        (logistic(4.0), 0.5, OrientedInterval(0.0, 1.0)),
    ]
    ok, parts = True, []
    for g, c, T in cases:
        rep = quadratic_schwarzian_bound_check(g, CriticalPoint(c, 1), T, samples=10_000)
        ok &= rep.violations == 0 and rep.samples == 10_000
        # closed forms: Sg = -(3/2)/(x-c)^2 and the bound -1/(x-c)^2 for both maps
        x = c + 0.3
        ok &= abs(schwarzian_at(g, x) + 1.5 / 0.09) < 1e-9 and abs(rep.B**2 / rep.A**2 - 1.0) < 1e-12
        parts.append(f"{rep.violations} violations")
    return ok, "1-2x^2: " + parts[0] + ", logistic a=4: " + parts[1], 5.0


def crit_13():
    diff = []
    for cfg in sorted(CONFIGS.glob("*.cfg")):
        exp = cfg.stem
        first = _bodies.get(exp)
        if first is None:
            _run(exp)
            first = _bodies[exp]
        again = records_to_csv_body(run_experiment(ExperimentConfig.load(cfg, exp)))
        if again != first:
            diff.append(exp)
    n = len(list(CONFIGS.glob("*.cfg")))
    return not diff, f"{n} experiments rerun, differing bodies: {diff or 'none'}", math.inf


CRITERIA = [crit_01, crit_02, crit_03, crit_04, crit_05, crit_06, crit_07,
            crit_08, crit_09, crit_10, crit_11, crit_12, crit_13]


def evaluate(fn) -> tuple[bool, str]:
    n = int(fn.__name__.split("_")[1])
    t = time.perf_counter()
    try:
        ok, detail, budget = fn()
    except Exception as e:  # a crash is a failed criterion, reported like any other
        ok, detail, budget = False, f"raised {type(e).__name__}: {e}", math.inf
    dt = time.perf_counter() - t
    in_time = dt < budget
    ok = bool(ok) and in_time
    limit = "" if math.isinf(budget) else f" (limit {budget:g}s)"
    line = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {dt:7.2f}s{limit}  {detail}"
    if not in_time:
        line += "  [over time budget]"
    LINES.append(line)
    print(line, flush=True)
    return ok, line


@pytest.mark.parametrize("fn", CRITERIA, ids=[f.__name__ for f in CRITERIA])
def test_acceptance(fn):
    ok, line = evaluate(fn)
    assert ok, line


if __name__ == "__main__":
    results = [evaluate(fn)[0] for fn in CRITERIA]
    print(f"{sum(results)}/{len(results)} criteria pass")
