"""Invariant suites shared by the command line and the test-suite."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .assembly import TriangleGroup, align_patch, replicate, seam_gap, self_intersection_spot_check
from .catalog import BASIC_TABLE, basic_family
from .divisor import SymmetricDivisorSpec, basic_p
from .period import impossibility_scan
from .scmap import BranchState
from .theta import TorusParams, log_deriv, theta
from .weierstrass import (conformality_error, dihedral_angle, harmonicity_residual, make_patch,
                          plane_of, vertical_period_error)


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    value: float
    threshold: float
    detail: str = ""

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        extra = f" ({self.detail})" if self.detail else ""
        return f"{tag} {self.name}: {self.value:.3e} vs {self.threshold:.1e}{extra}"

    def to_dict(self):
        out = asdict(self)
        out["value"] = float(out["value"])
        return out


def _check(name, value, threshold, detail="", below=True):
    value = float(value)
    ok = value < threshold if below else value > threshold
    return Check(name, bool(ok and math.isfinite(value)), value, threshold, detail)


def _rel(a, b):
    return np.max(np.abs(a - b) / np.maximum(1.0, np.abs(b)))


def theta_suite(n: int = 1000, heights=(0.5, 1.0, 2.0), seed: int = 0, tol: float = 1e-10):
    """Oddness, quasi-periodicity, reality and the jump of theta'/theta."""
    rng = np.random.default_rng(seed)
    out = []
    for d in heights:
        t = TorusParams(d)
        z = rng.uniform(-0.5, 0.5, n) + 1j * rng.uniform(-0.5, 0.5, n) * d
        th = theta(z, t)
        x = rng.uniform(-2, 2, n)
        out += [
            _check(f"theta odd d={d}", _rel(theta(-z, t), -th), tol),
            _check(f"theta(z+1) d={d}", _rel(theta(z + 1, t), -th), tol),
            _check(f"theta(z+tau) d={d}", _rel(theta(z + t.tau, t),
                                               -np.exp(-1j * np.pi * t.tau - 2j * np.pi * z) * th), tol),
            _check(f"theta real on R d={d}", np.max(np.abs(np.imag(theta(x, t)))), tol),
            _check(f"h(z+tau) d={d}", _rel(log_deriv(z + t.tau, t), log_deriv(z, t) - 2j * np.pi), tol),
        ]
    return out


def basic_suite(d: float = 1.0, nu: int = 48, nv: int = 16):
    """Closed-form p and the three wedge angles of every basic row."""
    out = []
    for name, (r, s, t3), p in BASIC_TABLE:
        out.append(Check(f"{name} {(r, s, t3)} p", basic_p(r, s) == p, float(basic_p(r, s)), float(p)))
        fam, sd = basic_family(r, s, t3)
        sd = SymmetricDivisorSpec(TorusParams(d), sd.lower_points, sd.lower_exponents)
        patch = make_patch(sd.expand(), nu, nv)
        lo0, lo1, up = (plane_of(patch, k) for k in ("lower:0", "lower:1", "upper:0"))
        err = max(abs(dihedral_angle(lo0, up) - math.pi / s),
                  abs(dihedral_angle(lo0, lo1) - math.pi / r),
                  abs(dihedral_angle(lo1, up) - math.pi / t3))
        out.append(_check(f"{name} {(r, s, t3)} wedge angles", err, 1e-6))
    return out


def plane_angle_suite(n: int = 20, seed: int = 0, tol: float = 1e-8):
    """Branch-tracked arg G(tau/2) - arg G(0) against the closed angle formula."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n):
        sd = random_symmetric_divisor(rng)
        ds = sd.expand()
        br = BranchState(ds)
        path = np.linspace(0, 1, 65) * ds.t.height * 1j
        for z in path[1:]:
            br.advance(z)
        measured = br.arg
        expected = math.pi * float(sum(a * (2 * p - 1) for p, a in zip(sd.lower_points, sd.lower_exponents))
                                   + sum(b * (2 * q - 1) for q, b in zip(sd.upper_points, sd.upper_exponents)))
        worst = max(worst, abs(measured - expected))
    return [_check(f"plane angle formula, {n} divisors", worst, tol)]


def random_symmetric_divisor(rng, d=None) -> SymmetricDivisorSpec:
    """Half-data with 1-2 lower and 0-2 upper points, exponents in (-1, 1)."""
    d = float(rng.uniform(0.5, 2.0)) if d is None else d
    m, n = int(rng.integers(1, 3)), int(rng.integers(0, 3))
    lp = np.sort(rng.uniform(0.03, 0.47, m))
    while m > 1 and np.min(np.diff(lp)) < 0.03:
        lp = np.sort(rng.uniform(0.03, 0.47, m))
    up = np.sort(rng.uniform(0.03, 0.47, n))
    while n > 1 and np.min(np.diff(up)) < 0.03:
        up = np.sort(rng.uniform(0.03, 0.47, n))
    return SymmetricDivisorSpec(TorusParams(d), tuple(lp), tuple(rng.uniform(-0.9, 0.9, m)),
                                tuple(up), tuple(rng.uniform(-0.9, 0.9, n)))


def impossibility_suite(triple=(3, 3, 3), heights=(1.0, 0.7, 0.5, 0.35), grid: int = 32):
    rep = impossibility_scan(triple, [TorusParams(d) for d in heights], grid)
    out = [Check(f"four-corner {triple} d={r.d}: constant sign", r.constant_sign, r.inf_abs, 0.0,
                 "inf|residual|") for r in rep.rows]
    infs = [r.inf_abs for r in rep.rows]
    out.append(Check("inf|residual| decreases with d", all(a > b for a, b in zip(infs, infs[1:])),
                     infs[-1], infs[0]))
    return out


def quality_suite(dspec, triple, label: str, n: int = 64):
    """Harmonicity, conformality, planarity, vertical period and dihedral angles."""
    out = []
    h = [harmonicity_residual(make_patch(dspec, k, k)) for k in (32, 64, 128)]
    ratio = min(h[0] / h[1], h[1] / h[2])
    out.append(_check(f"{label} harmonicity ratio", ratio, 3.5, f"residuals {h[0]:.2e}, {h[1]:.2e}, {h[2]:.2e}",
                      below=False))
    patch = make_patch(dspec, n, n)
    out.append(_check(f"{label} conformality", conformality_error(patch), 1e-3))
    planar = max(plane_of(patch, k).residual for k in patch.labels)
    out.append(_check(f"{label} boundary planarity", planar, 1e-6))
    out.append(_check(f"{label} vertical period", vertical_period_error(dspec), 1e-8))
    aligned = align_patch(patch, TriangleGroup.standard(triple))
    out.append(_check(f"{label} triangle angles", aligned.meta["triangle_error"], 1e-5))
    return out


def assembly_suite(dspec, triple, depth: int = 3, samples: int = 100_000, nu: int = 32, nv: int = 16):
    patch = align_patch(make_patch(dspec, nu, nv), TriangleGroup.standard(triple))
    mesh = replicate(patch, depth=depth)
    rank = int(np.linalg.matrix_rank(mesh.lattice, tol=1e-9))
    rep = self_intersection_spot_check(mesh, samples)
    return [
        Check("lattice rank", rank == 3, rank, 3),
        _check("seam gap", seam_gap(patch), 1e-6),
        Check("self intersections", rep.intersections == 0 and rep.pairs_tested == samples,
              rep.intersections, 0, f"{rep.pairs_tested} pairs"),
    ]
