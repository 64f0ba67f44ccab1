"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py`` or ``python tests/test_acceptance.py``.
The summary at the end of the pytest run lists every criterion.
"""

import math
import random
import time

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from frontlab.bounds import a_star, breakpoint_poly, sigma_bounds, theorem3_speed_cap, verify_subsolution
from frontlab.core import ModelParams, grid_for_spacing, make_grid
from frontlab.helmholtz import KernelSpec, convolve_extended
from frontlab.nonlocal_bvp import (SHALLOW_THETAS, continue_theta_alpha, deep_schedule,
                                   lambda_continuation)
from frontlab.shooting import Outcome, classify, profile_from_shot, sigma_star

pytestmark = pytest.mark.slow

# profiles from every converged solve, checked again by criterion 10
PROFILES = []


def report(verdict, number, title, passed, detail, elapsed, limit):
    in_time = elapsed < limit
    detail = f"{detail}; {elapsed:.2f} s (limit {limit:g} s)"
    verdict(number, title, passed and in_time, detail)
    print(f"criterion {number}: {'PASS' if passed and in_time else 'FAIL'} {detail}")
    return passed and in_time


def local_profile(p, sigma):
    prof = profile_from_shot(p, sigma, make_grid(20, 2000))
    PROFILES.append((f"local a={p.a} b={p.b}", prof))


def test_c01_speed_two_small_coefficients(verdict):
    t = time.perf_counter()
    worst = 0.0
    vals = (0, 0.5, 1, 1.5, 2)
    for a in vals:
        for b in vals:
            r = sigma_star(ModelParams(a, b))
            worst = max(worst, abs(r.sigma_star - 2))
            local_profile(ModelParams(a, b), r.bracket[1])
    ok = report(verdict, 1, "sigma* = 2 on {0..2}^2", worst <= 1e-3,
                f"max |sigma* - 2| = {worst:.2e} over 25 points", time.perf_counter() - t, 30)
    assert ok


def test_c02_bounds_sandwich(verdict):
    t = time.perf_counter()
    bad = []
    n = 0
    for b in (0, 5, 40):
        for a in range(41):
            p = ModelParams(a, b)
            r = sigma_star(p)
            sb = sigma_bounds(p)
            n += 1
            if not (sb.lower - 1e-3 <= r.sigma_star <= sb.upper + 1e-3):
                bad.append((a, b, r.sigma_star, sb.lower, sb.upper))
            local_profile(p, r.bracket[1])
    ok = report(verdict, 2, "sandwich over a=0..40, b in {0,5,40}", not bad,
                f"{n} points, {len(bad)} outside [lower - 1e-3, upper + 1e-3]",
                time.perf_counter() - t, 600)
    assert ok, bad


def test_c03_below_lower_bound(verdict):
    t = time.perf_counter()
    out = classify(ModelParams(20, 0), 4.0)
    ok = report(verdict, 3, "no front at (20, 0), sigma = 4", out.kind is not Outcome.CONVERGED,
                f"outcome {out.kind.name}", time.perf_counter() - t, 1)
    assert ok


def test_c04_subsolution(verdict):
    t = time.perf_counter()
    holds, margin = verify_subsolution(ModelParams(1, 1), 2.0, 1.0)
    ok = report(verdict, 4, "subsolution certificate at (1, 1), sigma = 2",
                holds and margin > 0, f"margin {margin:.4g}", time.perf_counter() - t, 1)
    assert ok


def test_c05_a_star(verdict):
    t = time.perf_counter()
    r = a_star()
    a = r.value
    resid = abs(breakpoint_poly(a))
    jump = abs(math.sqrt((a * a + 4) / a) - (2 + a / 8))
    ok = report(verdict, 5, "breakpoint a*", resid < 1e-10 and jump < 1e-9,
                f"a* = {a:.15g}, |p(a*)| = {resid:.1e}, branch gap {jump:.1e}",
                time.perf_counter() - t, 0.1)
    assert ok


def test_c06_helmholtz(verdict):
    t = time.perf_counter()
    orders = []
    for lam in (0.5, 2.0):
        errs = []
        for h in (0.04, 0.02, 0.01):
            g = grid_for_spacing(8.0, h)
            x = g.xi
            u = np.exp(-x * x)
            rhs = u - lam * lam * (4 * x * x - 2) * u
            f = convolve_extended(KernelSpec(lam), g, rhs, 0.0, 0.0)
            errs.append(np.abs(f.u - u).max())
        orders += [math.log2(errs[k] / errs[k + 1]) for k in range(2)]
    g = make_grid(10, 1000)
    const = convolve_extended(KernelSpec(1.0), g, np.full(len(g), 3.0), 3.0, 3.0)
    cerr = float(np.abs(const.u - 3).max())
    ok = report(verdict, 6, "Helmholtz convergence and normalisation",
                min(orders) >= 1.9 and cerr < 1e-10,
                f"min order {min(orders):.3f}, constant error {cerr:.1e}",
                time.perf_counter() - t, 5)
    assert ok


def test_c07_nonlocal_benchmark(verdict):
    t = time.perf_counter()
    p = ModelParams(1, 1, 2)
    res = continue_theta_alpha(p, SHALLOW_THETAS, (20.0, 30.0, 40.0), 0.01)
    cap = theorem3_speed_cap(p)
    margin = res.final.energy_rhs - res.final.energy_lhs
    bad = res.profile.invariant_violations()
    PROFILES.append(("nonlocal (1,1,2)", res.final.profile))
    in_range = 2 - 5e-3 <= res.sigma <= cap + 5e-3
    elapsed = time.perf_counter() - t
    deep = continue_theta_alpha(p, *deep_schedule(p.lam), 0.01)
    PROFILES.append(("nonlocal (1,1,2) deep", deep.final.profile))
    ok = report(verdict, 7, "nonlocal benchmark (1, 1, 2)",
                in_range and not bad and margin > 0 and res.final.ok,
                f"sigma = {res.sigma:.5f} (theta -> 0 limit from theta >= 0.01; "
                f"truncated {res.final.sigma:.5f}; deep-theta limit {deep.sigma:.6f}) "
                f"in [1.995, {cap + 5e-3:.4f}], energy margin {margin:.3f}", elapsed, 300)
    assert ok


def test_c08_fkpp_decoupling(verdict):
    t = time.perf_counter()
    got = []
    for lam in (0.5, 1.0, 2.0):
        res = continue_theta_alpha(ModelParams(0, 0, lam), *deep_schedule(lam), 0.01)
        PROFILES.append((f"nonlocal FKPP lambda={lam}", res.final.profile))
        got.append(res.sigma)
    worst = max(abs(s - 2) for s in got)
    ok = report(verdict, 8, "FKPP decoupling", worst <= 5e-3,
                "sigma = " + ", ".join(f"{s:.6f}" for s in got), time.perf_counter() - t, 300)
    assert ok


def test_c09_lambda_trend(verdict):
    t = time.perf_counter()
    lc = lambda_continuation(1.0, 0.0, (1.0, 0.5, 0.25, 0.1))
    sig = [s.sigma for s in lc.steps]
    for s in lc.steps:
        if s.result is not None:
            PROFILES.append((f"nonlocal (1,0,{s.lam})", s.result.final.profile))
    gaps = [abs(s - 2) for s in sig]
    decreasing = all(x > y for x, y in zip(gaps, gaps[1:]))
    ok = report(verdict, 9, "|sigma(lambda) - 2| strictly decreasing", decreasing,
                "gaps " + ", ".join(f"{g:.2e}" for g in gaps), time.perf_counter() - t, 600)
    assert ok


_props = settings(max_examples=50, deadline=None, derandomize=True,
                  suppress_health_check=[HealthCheck.too_slow])


def _predicate_monotone():
    failures = []

    @_props
    @given(st.floats(0, 40), st.floats(0, 40), st.floats(1.5, 8), st.floats(0.01, 3))
    def check(a, b, s1, gap):
        p = ModelParams(a, b)
        if classify(p, s1).converged and not classify(p, s1 + gap).converged:
            failures.append((a, b, s1, s1 + gap))

    check()
    return failures


def test_c10_property_suite(verdict):
    t = time.perf_counter()
    pred_fail = _predicate_monotone()
    rng = random.Random(20240601)
    star_fail = []
    for _ in range(20):
        b = rng.uniform(0, 40)
        a1, a2 = sorted(rng.uniform(0, 40) for _ in range(2))
        s1 = sigma_star(ModelParams(a1, b))
        s2 = sigma_star(ModelParams(a2, b))
        if s1.sigma_star > s2.sigma_star + s1.tol + s2.tol:
            star_fail.append((a1, a2, b))
    prof_fail = [name for name, prof in PROFILES if prof.invariant_violations()]
    ok = report(verdict, 10, "property suite", not (pred_fail or star_fail or prof_fail),
                f"predicate {len(pred_fail)}/50 fail, sigma* in a {len(star_fail)}/20 fail, "
                f"profiles {len(prof_fail)}/{len(PROFILES)} fail", time.perf_counter() - t, 600)
    assert ok


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
