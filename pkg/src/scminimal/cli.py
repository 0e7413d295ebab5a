"""Command line: list-families, generate, verify, scan.

Exit codes: 0 success, 2 solver non-convergence, 3 invalid configuration,
4 verification failures.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields
from pathlib import Path

from . import catalog
from .assembly import TriangleGroup, align_patch, replicate
from .catalog import FamilySpec
from .errors import (ConstraintInfeasible, InvalidConfig, InvalidTriple, NoSignChange, NonConvergence,
                     ScMinimalError)
from .export import csv_text, write_obj, write_ply
from .period import (family_residual, four_corner_residual, grid_start, residual_equal_sign,
                     residual_opposite_sign, solve_equal_sign, solve_multidim, solve_neovius_symmetric,
                     solve_opposite_sign)
from .theta import TorusParams
from .verify import _check, basic_suite, impossibility_suite, plane_angle_suite, quality_suite, theta_suite
from .weierstrass import dihedral_angle, make_patch, plane_of

log = logging.getLogger("scminimal")

EXIT_OK, EXIT_SOLVER, EXIT_CONFIG, EXIT_VERIFY = 0, 2, 3, 4
KINDS = ("basic", "equal", "opposite", "neovius", "spout", "four-corner")


def thread_count() -> int:
    """Worker threads from SCMINIMAL_THREADS (default 1)."""
    raw = os.environ.get("SCMINIMAL_THREADS", "1")
    try:
        n = int(raw)
    except ValueError as exc:
        raise InvalidConfig(f"SCMINIMAL_THREADS must be an integer, got {raw!r}") from exc
    return max(1, n)


@dataclass(frozen=True)
class JobConfig:
    family: str = "basic"
    triple: tuple | None = None
    n: int = 1
    d: float | None = None
    nu: int = 64
    nv: int = 32
    depth: int = 1
    order: int = 20
    tol: float = 1e-13
    samples: int = 64
    output: str | None = None
    format: str = "obj"
    summary: str | None = None
    mirror: bool = False
    all: bool = False
    impossibility: bool = False

    def __post_init__(self):
        if self.family not in KINDS:
            raise InvalidConfig(f"unknown family {self.family!r}; choose from {', '.join(KINDS)}")
        if self.nu < 8 or self.nv < 8:
            raise InvalidConfig("resolution must be at least 8 in each direction")
        if not self.tol > 0:
            raise InvalidConfig("tolerances must be positive")
        if self.d is not None and not self.d > 0:
            raise InvalidConfig("d must be positive")
        if self.depth < 0 or self.samples < 2 or self.n < 1 or self.order < 2:
            raise InvalidConfig("depth >= 0, samples >= 2, n >= 1 and order >= 2 are required")
        if self.format not in ("obj", "ply"):
            raise InvalidConfig("format must be obj or ply")
        if self.triple is not None:
            object.__setattr__(self, "triple", tuple(int(k) for k in self.triple))

    @classmethod
    def from_dict(cls, data: dict) -> "JobConfig":
        known = {f.name for f in fields(cls)}
        extra = set(data) - known
        if extra:
            raise InvalidConfig(f"unknown config keys: {sorted(extra)}")
        return cls(**data)

    def family_spec(self) -> FamilySpec:
        """Catalog entry named by this config."""
        tr = self.triple
        try:
            if self.family == "basic":
                return catalog.basic_family(*self._need(3))[0]
            if self.family == "equal":
                return catalog.equal_sign_family(*self._need(2))
            if self.family == "opposite":
                return catalog.opposite_sign_family(*self._need(2))
            if self.family == "neovius":
                return catalog.neovius_family(*self._need(3))
            if self.family == "spout":
                return catalog.spout_family(*self._need(2), self.n)
            return catalog.four_corner_family(*self._need(3))
        except TypeError as exc:
            raise InvalidConfig(f"bad triple {tr} for family {self.family}") from exc

    def _need(self, k):
        if self.triple is None or len(self.triple) < k:
            raise InvalidConfig(f"family {self.family} needs {k} integers in --rst/--rs")
        return self.triple[:k]

    def torus(self, fam: FamilySpec) -> TorusParams:
        return TorusParams(fam.default_d if self.d is None else self.d)


# -- pipeline ----------------------------------------------------------------------

def solve_family(fam: FamilySpec, t: TorusParams, cfg: JobConfig):
    """(free parameters, residual norm, notes) for a family at torus t."""
    kw = {"order": cfg.order, "tol": cfg.tol}
    if fam.kind == "basic":
        return (), 0.0, "closed form"
    if fam.kind == "equal":
        r = solve_equal_sign(fam, t, **kw)
        return (r.p,), abs(r.residual), "bisection"
    if fam.kind == "opposite":
        r = solve_opposite_sign(fam, t, **kw)
        return (r.p,), abs(r.residual), "bisection"
    if fam.kind == "neovius" and fam.symmetric_reduction:
        r = solve_neovius_symmetric(fam, t, **kw)
        return (0.25, r.q), abs(r.residual), "symmetric slice"
    if fam.kind == "four-corner":
        raise NoSignChange("the four-corner candidate has no solution", None)
    x0 = grid_start(fam, t, 8 if fam.n_free < 3 else 6, **kw)
    r = solve_multidim(fam, t, x0, **kw)
    return r.x, r.residual.norm, f"damped Newton, {r.iterations} steps"


def run_generate(cfg: JobConfig) -> dict:
    fam = cfg.family_spec()
    t = cfg.torus(fam)
    free, resid, how = solve_family(fam, t, cfg)
    if fam.kind == "basic":
        dspec = catalog.SymmetricDivisorSpec(t, fam.fixed_points, fam.lower_exponents).expand()
    else:
        dspec = fam.divisor(free, t).expand()
    re_range = (0.0, 0.5) if cfg.mirror else (0.0, 1.0)
    patch = make_patch(dspec, cfg.nu, cfg.nv, re_range, order=cfg.order, tol=cfg.tol)
    aligned = align_patch(patch, TriangleGroup.standard(fam.triple))
    mesh = replicate(aligned, depth=cfg.depth, use_horizontal_mirror=cfg.mirror)
    sides = aligned.meta["sides"]
    planes = {k: plane_of(aligned, next(l for l, s in sides.items() if s == k)) for k in range(3)}
    angles = [dihedral_angle(planes[(k + 1) % 3], planes[(k + 2) % 3]) for k in range(3)]
    summary = {
        "family": fam.label, "name": fam.name, "triple": list(fam.triple), "d": t.d,
        "points": [float(x) for x in (fam.points(free) if fam.kind != "basic" else fam.fixed_points)],
        "constraint": None if fam.constraint is None else str(fam.constraint),
        "residual": resid, "solver": how,
        "plane_angles": angles, "triangle_error": aligned.meta["triangle_error"],
        "seam_gap": mesh.meta["seam_gap"], "lattice": mesh.lattice.tolist(),
        "vertices": int(len(mesh.vertices)), "faces": int(len(mesh.faces)), "copies": mesh.n_copies,
    }
    if cfg.output:
        path = Path(cfg.output)
        if cfg.format == "obj":
            write_obj(mesh, path, comment=f"{fam.label} d={t.d:g}")
        else:
            write_ply(mesh, path)
        summary["output"] = str(path)
    if cfg.summary:
        Path(cfg.summary).write_text(json.dumps(summary, indent=2) + "\n")
    return summary


def run_verify(cfg: JobConfig) -> dict:
    """Run the selected suites; the theta suite always runs."""
    checks = list(theta_suite())
    if cfg.all or cfg.family == "basic":
        checks += basic_suite(cfg.d or 1.0)
        checks += plane_angle_suite()
    if cfg.impossibility:
        checks += impossibility_suite(cfg.triple or (3, 3, 3))
    elif cfg.family in ("equal", "opposite") and cfg.triple:
        fam = cfg.family_spec()
        t = cfg.torus(fam)
        try:
            free, resid, _ = solve_family(fam, t, cfg)
            checks.append(_check(f"{fam.label} d={t.d} residual", resid, 1e-9))
            dspec = fam.divisor(free, t).expand()
            checks += quality_suite(dspec, fam.triple, fam.label)
        except (NoSignChange, NonConvergence) as exc:
            checks.append(_check(f"{fam.label} d={t.d} solve: {exc}", math.inf, 1e-9))
    report = {"checks": [c.to_dict() for c in checks],
              "passed": all(c.passed for c in checks)}
    if cfg.summary:
        Path(cfg.summary).write_text(json.dumps(report, indent=2) + "\n")
    report["lines"] = [c.line() for c in checks]
    return report


def _scan_point(fam: FamilySpec, t: TorusParams, x, cfg: JobConfig):
    kw = {"order": cfg.order, "tol": cfg.tol}
    try:
        if fam.kind == "equal":
            return [residual_equal_sign(x[0], fam, t, **kw)], ""
        if fam.kind == "opposite":
            return [residual_opposite_sign(x[0], fam, t, **kw)], ""
        if fam.kind == "four-corner":
            return [four_corner_residual(x[0], fam, t, **kw)], ""
        return list(family_residual(fam, tuple(x), t, **kw).residual), ""
    except ScMinimalError as exc:
        return [math.nan] * max(1, len(fam.pairs)), f"{type(exc).__name__}: {exc}"


def run_scan(cfg: JobConfig) -> str:
    """CSV of residuals over a uniform grid of the free parameters."""
    fam = cfg.family_spec()
    t = cfg.torus(fam)
    if fam.n_free == 1:
        lo, hi = (float(v) for v in fam.p_interval())
        grid = [(lo + (hi - lo) * (k + 0.5) / cfg.samples,) for k in range(cfg.samples)]
    elif fam.n_free == 2:
        axis = [0.5 * (k + 0.5) / cfg.samples for k in range(cfg.samples)]
        grid = [(a, b) for a in axis for b in axis]
    else:
        raise InvalidConfig(f"scan covers 1- and 2-parameter families; {fam.label} has {fam.n_free}")
    with ThreadPoolExecutor(thread_count()) as pool:
        results = list(pool.map(lambda x: _scan_point(fam, t, x, cfg), grid))
    names = list(fam.point_names[:fam.n_free])
    n_res = max(len(r[0]) for r in results)
    header = names + ([f"residual{k + 1}" for k in range(n_res)] if n_res > 1 else ["residual"]) + ["reason"]
    rows = [list(map(float, x)) + [float(v) for v in vals] + [why] for x, (vals, why) in zip(grid, results)]
    text = csv_text(header, rows)
    if cfg.output:
        Path(cfg.output).write_text(text, newline="")
    return text


def list_families_text() -> str:
    lines = []
    for fam in catalog.list_families():
        con = "closed form p = " + str(fam.fixed_points[0]) if fam.kind == "basic" else str(fam.constraint)
        lines.append(f"{fam.kind:<9} {'%d,%d,%d' % fam.triple:<7} n={fam.n:<2} {fam.name or '-':<14} {con}")
    return "\n".join(lines)


# -- argument parsing --------------------------------------------------------------

def _ints(text: str):
    try:
        return tuple(int(v) for v in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="scminimal", description="Triply periodic minimal surfaces "
                                "from periodic Schwarz-Christoffel maps.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("list-families", help="print every catalog family")
    for name, helptext in (("generate", "solve, assemble and export a mesh"),
                           ("verify", "run invariant suites"),
                           ("scan", "tabulate period residuals")):
        q = sub.add_parser(name, help=helptext)
        q.add_argument("--config", help="JSON job file; flags override its values")
        q.add_argument("--family", choices=KINDS)
        q.add_argument("--rst", "--rs", dest="triple", type=_ints)
        q.add_argument("--n", type=int)
        q.add_argument("--d", type=float)
        q.add_argument("--nu", type=int)
        q.add_argument("--nv", type=int)
        q.add_argument("--depth", type=int)
        q.add_argument("--order", type=int)
        q.add_argument("--tol", type=float)
        q.add_argument("--samples", type=int)
        q.add_argument("--out", dest="output")
        q.add_argument("--format", choices=("obj", "ply"))
        q.add_argument("--summary")
        q.add_argument("--mirror", action="store_true", default=None)
        q.add_argument("--all", action="store_true", default=None)
        q.add_argument("--impossibility", action="store_true", default=None)
    return p


def config_from_args(args) -> JobConfig:
    data = {}
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise InvalidConfig(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(data, dict):
            raise InvalidConfig("config must be a JSON object")
    for f in fields(JobConfig):
        val = getattr(args, f.name, None)
        if val is not None:
            data[f.name] = val
    if data.get("impossibility") and "family" not in data:
        data["family"] = "four-corner"
    try:
        return JobConfig.from_dict(data)
    except TypeError as exc:
        raise InvalidConfig(str(exc)) from exc


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "list-families":
            print(list_families_text())
            return EXIT_OK
        cfg = config_from_args(args)
        if args.command == "generate":
            summary = run_generate(cfg)
            print(json.dumps(summary, indent=2))
            return EXIT_OK
        if args.command == "verify":
            report = run_verify(cfg)
            print("\n".join(report["lines"]))
            return EXIT_OK if report["passed"] else EXIT_VERIFY
        text = run_scan(cfg)
        if not cfg.output:
            sys.stdout.write(text)
        return EXIT_OK
    except (InvalidConfig, InvalidTriple, ConstraintInfeasible) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NoSignChange, NonConvergence) as exc:
        print(f"solver: {exc}", file=sys.stderr)
        return EXIT_SOLVER
