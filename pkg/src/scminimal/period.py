"""Period residuals and their solvers.

A family prescribes which boundary planes of the fundamental piece have to
coincide.  Parallelism is built into the linear constraint among the
points; what remains are the offsets between parallel planes, one per pair.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .catalog import FamilySpec, basic_family, four_corner_family, symmetric_solution
from .divisor import DivisorSpec, SymmetricDivisorSpec
from .export import csv_text
from .errors import ConstraintInfeasible, NoSignChange, NonConvergence
from .quadrature import DEFAULT_ORDER, DEFAULT_TOL
from .scmap import gauss_map, log_gauss_map, phi, translation
from .theta import TorusParams
from .weierstrass import IntegralCache, interval_labels

log = logging.getLogger(__name__)

SCAN_SAMPLES = 64
BISECT_WIDTH = 1e-13
ROOT_CHECK = 1e-9


@dataclass(frozen=True)
class PeriodResidual:
    """Offsets between the boundary planes that must coincide."""

    family: str
    params: tuple
    residual: tuple
    cycles: tuple

    def __post_init__(self):
        if len(self.residual) != len(self.cycles):
            raise ValueError("one residual component per plane pair")

    @property
    def norm(self) -> float:
        return max((abs(r) for r in self.residual), default=0.0)


def representative(dspec: DivisorSpec, label: str) -> complex:
    """A point in the interior of the boundary interval ``label``."""
    edge = label.split(":")[0]
    lo, hi = interval_labels(dspec, edge)[label]
    x = 0.0 if not math.isfinite(lo) else 0.5 * (lo + hi)
    return complex(x, dspec.t.height if edge == "upper" else 0.0)


def _horizontal(cache: IntegralCache, z: complex) -> complex:
    p1, p2 = cache.pair(z)
    return 0.5 * (np.conj(p2) - p1)


def plane_offset(dspec: DivisorSpec, la: str, lb: str, cache: IntegralCache | None = None) -> float:
    """Signed distance between the parallel vertical planes over ``la`` and ``lb``.

    Measured in the horizontal plane of the surface, normal to the trace of
    the plane over ``la``.
    """
    cache = cache if cache is not None else IntegralCache(dspec)
    za, zb = representative(dspec, la), representative(dspec, lb)
    u = gauss_map(za, dspec)
    u = u / abs(u)
    return float(np.imag(np.conj(u) * (_horizontal(cache, zb) - _horizontal(cache, za))))


def family_residual(family: FamilySpec, free, t: TorusParams, *, order: int = DEFAULT_ORDER,
                    tol: float = DEFAULT_TOL) -> PeriodResidual:
    """Plane offsets for every pair of the family; raises ConstraintInfeasible."""
    dspec = family.divisor(free, t).expand()
    cache = IntegralCache(dspec, order, tol)
    res = tuple(plane_offset(dspec, a, b, cache) for a, b in family.pairs)
    return PeriodResidual(family.label, tuple(float(x) for x in free), res, family.pairs)


def _one(family: FamilySpec, kinds):
    if family.kind not in kinds:
        raise ValueError(f"{family.label} is not a {'/'.join(kinds)} family")


def _divisor_at(family, p, t):
    return family.divisor((p,), t).expand()


def residual_equal_sign(p, family: FamilySpec, t: TorusParams, **kw) -> float:
    """Height of Phi_1([-q, q] + tau/2) above Phi_1([-p, p]).

    Both image segments are horizontal: G is positive on (-p, p) and
    negative on the upper interval through tau/2.
    """
    _one(family, ("equal", "spout"))
    dspec = _divisor_at(family, p, t)
    return float(phi(dspec, 0.5 * t.tau, "G", **kw).imag)


def residual_opposite_sign(p, family: FamilySpec, t: TorusParams, **kw) -> float:
    """Height of Phi_1([q, 1-q] + tau/2) minus half the height of the translation v."""
    _one(family, ("opposite",))
    dspec = _divisor_at(family, p, t)
    mid = phi(dspec, 0.5 + 0.5 * t.tau, "G", **kw)
    v = translation(dspec, "G", **kw)
    return float(mid.imag - 0.5 * v.imag)


@dataclass(frozen=True)
class Bracket:
    lo: float
    hi: float
    f_lo: float
    f_hi: float


@dataclass(frozen=True)
class ScanResult:
    xs: np.ndarray
    values: np.ndarray
    brackets: tuple

    def to_csv(self, name: str = "x") -> str:
        return csv_text([name, "residual"], zip(self.xs, self.values))


def scan(fun, lo: float, hi: float, samples: int = SCAN_SAMPLES) -> ScanResult:
    """Sample ``fun`` at cell midpoints of (lo, hi) and collect every sign change."""
    xs = lo + (hi - lo) * (np.arange(samples) + 0.5) / samples
    vals = np.array([fun(float(x)) for x in xs])
    brackets = []
    for k in range(samples - 1):
        if np.sign(vals[k]) * np.sign(vals[k + 1]) <= 0 and vals[k] != vals[k + 1]:
            brackets.append(Bracket(float(xs[k]), float(xs[k + 1]), float(vals[k]), float(vals[k + 1])))
    return ScanResult(xs, vals, tuple(brackets))


def bisect(fun, br: Bracket, width: float = BISECT_WIDTH, max_iter: int = 200) -> float:
    """Plain bisection; the bracket halves every step."""
    if br.f_lo * br.f_hi > 0:
        raise ValueError("bracket ends share a sign")
    lo, hi, f_lo = br.lo, br.hi, br.f_lo
    for _ in range(max_iter):
        if hi - lo < width:
            break
        mid = 0.5 * (lo + hi)
        f_mid = fun(mid)
        if f_mid == 0:
            return mid
        if math.copysign(1.0, f_mid) == math.copysign(1.0, f_lo):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class RootResult:
    family: str
    d: float
    p: float
    q: float
    residual: float
    check_residual: float
    scan: ScanResult = field(repr=False)
    other_roots: tuple = ()


def _solve_1d(family, t, resid, order, tol, require_endpoint_signs):
    lo, hi = (float(x) for x in family.p_interval())
    fun = lambda p: resid(p, family, t, order=order, tol=tol)
    sc = scan(fun, lo, hi)
    if require_endpoint_signs and np.sign(sc.values[0]) == np.sign(sc.values[-1]):
        raise NoSignChange(f"{family.label}, d={t.d}: endpoint residuals share a sign", sc)
    if not sc.brackets:
        raise NoSignChange(f"{family.label}, d={t.d}: no sign change in {SCAN_SAMPLES} samples", sc)
    if len(sc.brackets) > 1:
        log.info("%s, d=%s: %d sign changes, using the first", family.label, t.d, len(sc.brackets))
    p = bisect(fun, sc.brackets[0])
    q = float(family.points((p,))[-1])
    r = fun(p)
    check = resid(p, family, t, order=2 * order, tol=tol)
    if abs(check) > ROOT_CHECK:
        raise NonConvergence(f"{family.label}: root fails the doubled-order check", (p,), check)
    others = tuple(0.5 * (b.lo + b.hi) for b in sc.brackets[1:])
    return RootResult(family.label, t.d, p, q, r, check, sc, others)


def solve_equal_sign(family: FamilySpec, t: TorusParams, *, order: int = DEFAULT_ORDER,
                     tol: float = DEFAULT_TOL) -> RootResult:
    """Root of :func:`residual_equal_sign` between the feasibility endpoints."""
    _one(family, ("equal",))
    if family.r == family.s:
        raise ValueError("r = s reduces to a basic family")
    return _solve_1d(family, t, residual_equal_sign, order, tol, True)


def solve_opposite_sign(family: FamilySpec, t: TorusParams, *, order: int = DEFAULT_ORDER,
                        tol: float = DEFAULT_TOL) -> RootResult:
    """Root of :func:`residual_opposite_sign`; r = s rows are checked against the closed form."""
    _one(family, ("opposite",))
    res = _solve_1d(family, t, residual_opposite_sign, order, tol, False)
    if family.r == family.s:
        p0, _ = symmetric_solution(family)
        roots = (res.p,) + res.other_roots
        if min(abs(r - float(p0)) for r in roots) > ROOT_CHECK:
            log.warning("%s: no root near the symmetric solution p = %s", family.label, p0)
    return res


# -- impossibility of the four-corner candidate ------------------------------------

@dataclass(frozen=True)
class ImpossibilityRow:
    d: float
    params: np.ndarray
    residuals: np.ndarray

    @property
    def constant_sign(self) -> bool:
        s = np.sign(self.residuals)
        return bool(np.all(s == s[0]) and s[0] != 0)

    @property
    def inf_abs(self) -> float:
        return float(np.min(np.abs(self.residuals)))


@dataclass(frozen=True)
class ImpossibilityReport:
    triple: tuple
    rows: tuple

    @property
    def contradicts(self) -> bool:
        """True when some grid shows a sign change."""
        return not all(r.constant_sign for r in self.rows)

    def summary(self) -> str:
        lines = [f"four-corner {self.triple}"]
        for r in self.rows:
            flag = "constant sign" if r.constant_sign else "UNEXPECTED_SIGN_CHANGE"
            lines.append(f"  d={r.d:g}: {flag}, inf|residual|={r.inf_abs:.3e}")
        return "\n".join(lines)


def four_corner_residual(p, family: FamilySpec, t: TorusParams, **kw) -> float:
    """Offset between the planes over [-p, p] and the upper edge."""
    return family_residual(family, (p,), t, **kw).residual[0]


def impossibility_scan(triple, t_list, grid: int = 32, **kw) -> ImpossibilityReport:
    """Evaluate the four-corner residual on an interior grid of p for each torus."""
    family = four_corner_family(*triple)
    lo, hi = (float(x) for x in family.p_interval())
    ps = lo + (hi - lo) * (np.arange(grid) + 0.5) / grid
    rows = []
    for t in t_list:
        vals = np.array([four_corner_residual(float(p), family, t, **kw) for p in ps])
        rows.append(ImpossibilityRow(t.d, ps, vals))
    report = ImpossibilityReport(tuple(triple), tuple(rows))
    if report.contradicts:
        log.warning(report.summary())
    return report


def doubled_cover_divisor(r: int, s: int, t: int, d: float = 1.0) -> DivisorSpec:
    """Basic (r, s, t) divisor pulled back under z -> 2z.

    Lower corners at p, 1/2 - p, 1/2 + p, 1 - p (p half the basic value) with
    exponents a, -a, a, -a on the torus of height d/2: four corners with
    alternating signs and q = 1/2 - p, b = -a.
    """
    fam, basic = basic_family(r, s, t)
    p, a = basic.lower_points[0] / 2, basic.lower_exponents[0]
    half = Fraction(1, 2)
    return DivisorSpec(TorusParams(d / 2), (p, half - p, half + p, 1 - p), (a, -a, a, -a))


def doubled_cover_residual(r: int, s: int, t: int, d: float = 1.0, samples: int = 16) -> float:
    """Spread of log(G_cover(z) / G_basic(2z)) over the strip.

    Zero when the cover's Gauss map is the basic one composed with z -> 2z,
    up to a constant factor.
    """
    cover = doubled_cover_divisor(r, s, t, d)
    basic = basic_family(r, s, t)[1]
    basic = SymmetricDivisorSpec(TorusParams(d), basic.lower_points, basic.lower_exponents).expand()
    rng = np.random.default_rng(0)
    z = rng.uniform(0.0, 1.0, samples) + 1j * rng.uniform(0.05, 0.95, samples) * cover.t.height
    ratio = log_gauss_map(z, cover) - log_gauss_map(2 * z, basic)
    ratio = ratio - ratio[0]
    # arguments are only defined modulo 2 pi
    ratio = ratio.real + 1j * ((ratio.imag + np.pi) % (2 * np.pi) - np.pi)
    return float(np.max(np.abs(ratio)))


# -- several free parameters -------------------------------------------------------

@dataclass(frozen=True)
class NewtonResult:
    family: str
    d: float
    x: tuple
    residual: PeriodResidual
    iterations: int
    check: float


def _jacobian(fun, x, f0, rel: float = 1e-6):
    jac = np.empty((f0.size, x.size))
    for k in range(x.size):
        h = rel * max(abs(x[k]), 1e-3)
        e = np.zeros_like(x)
        e[k] = h
        jac[:, k] = (fun(x + e) - fun(x - e)) / (2 * h)
    return jac


def solve_multidim(family: FamilySpec, t: TorusParams, x0, *, max_iter: int = 40,
                   target: float = 1e-10, order: int = DEFAULT_ORDER,
                   tol: float = DEFAULT_TOL) -> NewtonResult:
    """Damped Newton on the family residual with a central-difference Jacobian.

    Steps are halved (at most 20 times) until they stay feasible and reduce
    the max-norm of the residual.
    """
    x = np.array([float(v) for v in x0])
    if x.size != family.n_free:
        raise ValueError(f"{family.label} has {family.n_free} free parameters")

    def fun(v):
        return np.array(family_residual(family, tuple(v), t, order=order, tol=tol).residual)

    f = fun(x)
    for it in range(max_iter):
        if np.max(np.abs(f)) < target:
            break
        step = np.linalg.lstsq(_jacobian(fun, x, f), -f, rcond=None)[0]
        lam = 1.0
        for _ in range(21):
            trial = x + lam * step
            if family.feasible(tuple(trial)):
                ft = fun(trial)
                if np.max(np.abs(ft)) < np.max(np.abs(f)):
                    x, f = trial, ft
                    break
            lam *= 0.5
        else:
            raise NonConvergence(f"{family.label}, d={t.d}: damping failed at iteration {it} "
                                 f"(|residual| {np.max(np.abs(f)):.3e})", tuple(x), f)
    else:
        if np.max(np.abs(f)) >= target:
            raise NonConvergence(f"{family.label}: no convergence in {max_iter} steps", tuple(x), f)
    res = family_residual(family, tuple(x), t, order=order, tol=tol)
    check = family_residual(family, tuple(x), t, order=2 * order, tol=tol).norm
    return NewtonResult(family.label, t.d, tuple(float(v) for v in x), res, it, check)


def reduced_residual(q1, family: FamilySpec, t: TorusParams, **kw) -> float:
    """Neovius residual on the symmetric slice p = 1/4, q1 + q2 = 1/2."""
    if not family.symmetric_reduction:
        raise ValueError(f"{family.label} has no symmetric reduction")
    return family_residual(family, (0.25, q1), t, **kw).residual[0]


def solve_neovius_symmetric(family: FamilySpec, t: TorusParams, *, order: int = DEFAULT_ORDER,
                            tol: float = DEFAULT_TOL) -> RootResult:
    """1-D solve on the symmetric slice; q1 ranges over (0, 1/4)."""
    fun = lambda q: reduced_residual(q, family, t, order=order, tol=tol)
    sc = scan(fun, 0.0, 0.25)
    if not sc.brackets:
        raise NoSignChange(f"{family.label}, d={t.d}: no sign change on the symmetric slice "
                           f"(min |residual| {np.min(np.abs(sc.values)):.3e})", sc)
    q1 = bisect(fun, sc.brackets[0])
    r = fun(q1)
    check = reduced_residual(q1, family, t, order=2 * order, tol=tol)
    others = tuple(0.5 * (b.lo + b.hi) for b in sc.brackets[1:])
    return RootResult(family.label, t.d, 0.25, q1, r, check, sc, others)


def grid_start(family: FamilySpec, t: TorusParams, n: int = 10, **kw):
    """Feasible grid point with the smallest residual norm (a Newton start)."""
    axes = [(np.arange(n) + 0.5) / n * 0.5 for _ in range(family.n_free)]
    best, best_norm = None, math.inf
    for x in np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, family.n_free):
        if not family.feasible(tuple(x)):
            continue
        norm = family_residual(family, tuple(x), t, **kw).norm
        if norm < best_norm:
            best, best_norm = tuple(float(v) for v in x), norm
    if best is None:
        raise ConstraintInfeasible(f"{family.label}: no feasible grid point")
    return best
