"""Acceptance criteria 1-10, one PASS/FAIL line each."""
import math
import time

import numpy as np
import pytest

from scminimal.catalog import (EQUAL_SIGN_TABLE, OPPOSITE_SIGN_TABLE, constraint_of, equal_sign_family,
                               neovius_family, opposite_sign_family)
from scminimal.errors import NoSignChange, NonConvergence
from scminimal.period import solve_equal_sign, solve_neovius_symmetric, solve_opposite_sign
from scminimal.theta import TorusParams
from scminimal.verify import (assembly_suite, basic_suite, impossibility_suite, plane_angle_suite,
                              quality_suite, theta_suite)

RESULTS = []


def report(number, title, passed, detail):
    line = f"{'PASS' if passed else 'FAIL'} criterion {number:>2}: {title} ({detail})"
    RESULTS.append(line)
    print(line)
    return passed


def _suite(number, title, checks, seconds=None, budget=None):
    failed = [c for c in checks if not c.passed]
    ok = not failed and (budget is None or seconds < budget)
    detail = f"{len(checks) - len(failed)}/{len(checks)} checks"
    if seconds is not None:
        detail += f", {seconds:.1f} s" + (f" of {budget:.0f} s" if budget else "")
    if failed:
        detail += "; first failure: " + failed[0].line()
    return report(number, title, ok, detail)


def test_criterion_01_theta_identities():
    t0 = time.perf_counter()
    checks = theta_suite(n=1000, heights=(0.5, 1.0, 2.0), tol=1e-10)
    assert _suite(1, "theta identities", checks, time.perf_counter() - t0, 5.0)


def test_criterion_02_basic_table():
    t0 = time.perf_counter()
    checks = basic_suite(d=1.0)
    assert _suite(2, "basic table and wedge angles", checks, time.perf_counter() - t0, 120.0)


def test_criterion_03_plane_angle_formula():
    checks = plane_angle_suite(n=20, tol=1e-8)
    assert _suite(3, "branch-tracked plane angle", checks)


# tabulated rows: equal sign (p, Re q, rhs); opposite sign as (p, Re q, rhs) or the solution point
TABLE_ROWS = {
    ("equal", (2, 3)): (6, 8, 1), ("equal", (2, 4)): (4, 6, 1),
    ("equal", (3, 6)): (8, 10, 3), ("equal", (6, 2)): (5, 3, 1),
    ("opposite", (2, 4)): (2, -3, -1), ("opposite", (2, 6)): (6, -10, -3),
    ("opposite", (2, 3)): (6, -8, -3), ("opposite", (3, 6)): (4, -5, -1),
}
TABLE_POINTS = {("opposite", (4, 4)): (1 / 6, 1 / 3), ("opposite", (3, 3)): (1 / 8, 3 / 8)}


def test_criterion_04_constraint_tables():
    bad = []
    n = 0
    for (kind, rs), row in TABLE_ROWS.items():
        fam = equal_sign_family(*rs) if kind == "equal" else opposite_sign_family(*rs)
        c = constraint_of(fam)
        n += 1
        if c.coefficients + (c.rhs,) != row or not all(isinstance(v, int) for v in c.coefficients):
            bad.append(f"{kind} {rs}: {c}")
    from fractions import Fraction
    exact = {(4, 4): (Fraction(1, 6), Fraction(1, 3)), (3, 3): (Fraction(1, 8), Fraction(3, 8))}
    for (kind, rs), _ in TABLE_POINTS.items():
        c = constraint_of(opposite_sign_family(*rs))
        n += 1
        if c.evaluate(exact[rs]) != 0:
            bad.append(f"{kind} {rs}: {c} misses {exact[rs]}")
    assert len(EQUAL_SIGN_TABLE) + len(OPPOSITE_SIGN_TABLE) == n == 10
    assert report(4, "constraint tables", not bad, f"{n - len(bad)}/{n} rows" + (f"; {bad}" if bad else ""))


def test_criterion_05_closed_form_roots():
    t = TorusParams(1.0)
    details, ok = [], True
    from scminimal.period import residual_opposite_sign
    for rs, p in (((4, 4), 1 / 6), ((3, 3), 1 / 8)):
        fam = opposite_sign_family(*rs)
        res = solve_opposite_sign(fam, t)
        at_closed = abs(residual_opposite_sign(p, fam, t))
        ok &= abs(res.p - p) < 1e-9 and at_closed < 1e-8
        details.append(f"{OPPOSITE_SIGN_TABLE[rs][0]} p={res.p:.12f}, |r(p*)|={at_closed:.1e}")
    assert report(5, "I-WP and T-WP closed forms", ok, "; ".join(details))


def test_criterion_06_equal_sign_solvability():
    t0 = time.perf_counter()
    worst, bad = 0.0, []
    for rs in EQUAL_SIGN_TABLE:
        fam = equal_sign_family(*rs)
        for d in (0.6, 1.0, 1.5):
            try:
                res = solve_equal_sign(fam, TorusParams(d))
            except (NoSignChange, NonConvergence) as exc:
                bad.append(f"{rs} d={d}: {exc}")
                continue
            sc = res.scan.values
            worst = max(worst, abs(res.residual))
            if np.sign(sc[0]) == np.sign(sc[-1]) or abs(res.residual) >= 1e-9:
                bad.append(f"{rs} d={d}")
    dt = time.perf_counter() - t0
    ok = not bad and dt < 600
    assert report(6, "equal-sign IVT solvability", ok,
                  f"12 solves, max |residual| {worst:.1e}, {dt:.1f} s" + (f"; {bad}" if bad else ""))


def test_criterion_07_impossibility():
    checks = impossibility_suite((3, 3, 3), (1.0, 0.7, 0.5, 0.35), grid=32)
    assert _suite(7, "four-corner (3,3,3) impossibility", checks)


@pytest.mark.slow
def test_criterion_08_surface_quality(schwarz_p, iwp):
    checks = quality_suite(schwarz_p, (2, 4, 4), "Schwarz P") + quality_suite(iwp, (4, 4, 2), "I-WP")
    assert _suite(8, "surface quality, P and I-WP", checks)


@pytest.mark.slow
def test_criterion_09_assembly(schwarz_p):
    t0 = time.perf_counter()
    checks = assembly_suite(schwarz_p, (2, 4, 4), depth=3, samples=100_000)
    assert _suite(9, "Schwarz P replication depth 3", checks, time.perf_counter() - t0)


def test_criterion_10_neovius_unit_height():
    fam = neovius_family(2, 4, 4)
    try:
        res = solve_neovius_symmetric(fam, TorusParams(1.0))
        ok = abs(res.residual) < 1e-10 and math.isfinite(res.q)
        detail = f"q1={res.q:.12f}, |residual|={abs(res.residual):.1e}"
    except (NoSignChange, NonConvergence) as exc:
        ok, detail = False, f"{type(exc).__name__}: {exc}"
    assert report(10, "Neovius (2,4,4) symmetric slice at d=1", ok, detail)
