"""Gauss map and Schwarz-Christoffel integrals on the strip 0 <= Im z <= d/2.

Two independent branch conventions are available for G:

* the closed form :func:`log_gauss_map`, a holomorphic logarithm on the whole
  closed strip built from :func:`theta.log_theta`;
* :class:`BranchState`, which continues the argument of each theta factor
  along a caller-supplied path.

Both are normalized so that G(0) is real and positive.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .divisor import DivisorSpec
from .errors import PoleProximity
from .export import write_csv
from .quadrature import DEFAULT_ORDER, DEFAULT_TOL, integrate_segments
from .theta import log_theta, theta

_EDGE_TOL = 1e-12
_SNAP = 1e-13


def _raw_log_g(z, dspec: DivisorSpec, delta=0.0):
    """Unnormalized log G at z + delta.

    ``z`` is typically a panel end and ``delta`` a small offset.  When ``z``
    sits on a pre-vertex (up to an integer translate) the offset from that
    pre-vertex is taken to be exactly ``delta``.
    """
    z = np.asarray(z, dtype=complex)
    delta = np.asarray(delta, dtype=complex)
    out = np.zeros(np.broadcast(z, delta).shape, dtype=complex)
    for c, e, side in dspec.factors():
        if e == 0.0:
            continue
        w0 = z - c
        k = np.round(w0.real)
        w0 = w0 - k
        w0 = np.where(np.abs(w0) < _SNAP, 0.0, w0)
        out = out + e * log_theta(w0 + delta, dspec.t, side, shift=k)
    return out


@lru_cache(maxsize=512)
def base_phase(dspec: DivisorSpec) -> float:
    """Rotation making G(0) real and positive."""
    return -float(np.imag(_raw_log_g(0.0, dspec)))


def _log_g(z, dspec: DivisorSpec):
    """Normalized log G without proximity checks (quadrature nodes come close)."""
    return _raw_log_g(z, dspec) + 1j * base_phase(dspec)


def _check_strip(z, dspec: DivisorSpec):
    if np.any(z.imag < -_EDGE_TOL) or np.any(z.imag > dspec.t.height + _EDGE_TOL):
        raise ValueError("point outside the closed strip 0 <= Im z <= d/2")


def prevertex_distance(z, dspec: DivisorSpec):
    """Distance from ``z`` to the nearest pre-vertex or its integer translates."""
    z = np.asarray(z, dtype=complex)
    best = np.full(z.shape, np.inf)
    for c in dspec.prevertices():
        dx = z.real - c.real
        dx = dx - np.round(dx)
        best = np.minimum(best, np.hypot(dx, z.imag - c.imag))
    return best


def _check_poles(z, dspec: DivisorSpec):
    if dspec.m + dspec.n == 0:
        return
    dist = prevertex_distance(z, dspec)
    if np.any(dist < dspec.t.pole_radius):
        bad = z.reshape(-1)[np.argmin(dist.reshape(-1))]
        raise PoleProximity(f"z = {bad} is within {dspec.t.pole_radius} of a pre-vertex")


def log_gauss_map(z, dspec: DivisorSpec):
    """Holomorphic branch of log G on the closed strip, with G(0) > 0."""
    z = np.asarray(z, dtype=complex)
    _check_strip(z, dspec)
    _check_poles(z, dspec)
    out = _log_g(z, dspec)
    return complex(out) if out.ndim == 0 else out


def _wrap(x):
    return (x + np.pi) % (2 * np.pi) - np.pi


class BranchState:
    """Argument continuation of each theta factor of G along one path.

    Created at the path start, where the arguments are seeded from the
    closed-form branch; each call to :meth:`advance` continues them through
    the given points in order.  Steps must change every factor's argument by
    less than pi.  Not shareable between paths.
    """

    def __init__(self, dspec: DivisorSpec, start: complex = 0.0):
        self.dspec = dspec
        self._factors = [(c, e) for c, e, _ in dspec.factors()]
        start = complex(start)
        self.z = start
        self.args = np.array([np.imag(log_theta(start - c, dspec.t, side))
                              for c, _, side in dspec.factors()])

    def advance(self, z):
        """G at each point of ``z`` (taken in order), continuing the branch."""
        z = np.atleast_1d(np.asarray(z, dtype=complex)).reshape(-1)
        _check_poles(z, self.dspec)
        logs = np.zeros(z.shape, dtype=complex)
        for k, (c, e) in enumerate(self._factors):
            raw = np.asarray(theta(z - c, self.dspec.t))
            ang = np.angle(raw)
            steps = _wrap(np.diff(np.concatenate([[self.args[k]], ang])))
            cont = self.args[k] + np.cumsum(steps)
            logs = logs + e * (np.log(np.abs(raw)) + 1j * cont)
            self.args[k] = cont[-1]
        self.z = complex(z[-1])
        return np.exp(logs + 1j * base_phase(self.dspec))

    @property
    def arg(self) -> float:
        """Continued argument of G at the current point (0 at z = 0)."""
        exps = np.array([e for _, e in self._factors])
        return float(exps @ self.args + base_phase(self.dspec))


def gauss_map(z, dspec: DivisorSpec, branch: BranchState | None = None):
    """G(z) = prod theta(z - p_i)^{a_i} prod theta(z - q_j)^{b_j}, normalized by G(0) > 0.

    Without ``branch`` the closed-form branch is used and ``z`` may be any
    array.  With a :class:`BranchState`, ``z`` is read as successive points
    of a path and the factor arguments are continued through them.
    """
    if branch is not None:
        zz = np.asarray(z, dtype=complex)
        out = branch.advance(zz)
        return complex(out[0]) if zz.ndim == 0 else out.reshape(zz.shape)
    return np.exp(log_gauss_map(z, dspec))


def _segment_distance(points, a, b):
    """Distance from each point to the closed segment [a, b]."""
    ab = b - a
    s = np.clip(((points - a) * np.conj(ab)).real / abs(ab) ** 2, 0.0, 1.0)
    return np.abs(points - (a + s * ab))


@dataclass(frozen=True)
class StripPath:
    """Polyline in the closed strip; ``at_prevertex[k]`` marks singular waypoints."""

    waypoints: tuple
    at_prevertex: tuple

    @classmethod
    def build(cls, dspec: DivisorSpec, waypoints) -> "StripPath":
        pts = np.asarray(waypoints, dtype=complex).reshape(-1)
        if pts.size < 2:
            raise ValueError("a path needs at least two waypoints")
        _check_strip(pts, dspec)
        if np.any(np.abs(np.diff(pts)) == 0):
            raise ValueError("consecutive waypoints must be distinct")
        flags = tuple(_is_prevertex(z, dspec) for z in pts)
        radius = dspec.t.pole_radius
        lo = int(np.floor(pts.real.min())) - 1
        hi = int(np.ceil(pts.real.max())) + 1
        cands = np.array([c + k for c in dspec.prevertices() for k in range(lo, hi + 1)])
        if cands.size:
            for a, b in zip(pts[:-1], pts[1:]):
                near = cands[(np.abs(cands - a) > 1e-12) & (np.abs(cands - b) > 1e-12)]
                if near.size and np.min(_segment_distance(near, a, b)) < radius:
                    raise PoleProximity(f"segment {a} -> {b} passes through a pre-vertex")
        return cls(tuple(complex(z) for z in pts), flags)

    def segments(self):
        return list(zip(self.waypoints[:-1], self.waypoints[1:]))


def _is_prevertex(z, dspec):
    return bool(dspec.m + dspec.n) and float(prevertex_distance(z, dspec)) < 1e-12


def integrand(dspec: DivisorSpec, mode: str):
    """(f, sign): f(base, delta) is G or 1/G at base + delta; sign flips
    pre-vertex exponents for 1/G."""
    phase = 1j * base_phase(dspec)
    if mode == "G":
        return (lambda z, dz=0.0: np.exp(_raw_log_g(z, dspec, dz) + phase)), 1.0
    if mode == "1/G":
        return (lambda z, dz=0.0: np.exp(-_raw_log_g(z, dspec, dz) - phase)), -1.0
    raise ValueError("mode must be 'G' or '1/G'")


def path_segments(dspec: DivisorSpec, path: StripPath, mode: str):
    """Segment endpoints and singular exponents for :func:`integrate_segments`."""
    _, sign = integrand(dspec, mode)
    z = np.array(path.waypoints)
    e = np.array([sign * dspec.exponent_at(w) for w in path.waypoints])
    return z[:-1], z[1:], e[:-1], e[1:]


def sc_integrate(dspec: DivisorSpec, path: StripPath, mode: str = "G", *,
                 order: int = DEFAULT_ORDER, tol: float = DEFAULT_TOL) -> complex:
    """Integral of G dz or (1/G) dz along ``path``."""
    f, _ = integrand(dspec, mode)
    a, b, ea, eb = path_segments(dspec, path, mode)
    return complex(np.sum(integrate_segments(f, a, b, ea, eb, order=order, tol=tol, local=True)))


def real_axis_waypoints(dspec: DivisorSpec, x0: float, x1: float):
    """Waypoints x0 -> x1 on the real axis, stopping at every lower pre-vertex."""
    lo, hi = sorted((x0, x1))
    pts, _ = dspec.edge("lower")
    inner = sorted(p + k for p in pts for k in range(int(np.floor(lo)) - 1, int(np.ceil(hi)) + 2)
                   if lo < p + k < hi and min(abs(p + k - lo), abs(p + k - hi)) > 1e-14)
    if x1 < x0:
        inner = inner[::-1]
    return [x0] + inner + [x1]


def canonical_path(dspec: DivisorSpec, z: complex, start: float = 0.0) -> StripPath:
    """Real axis from ``start`` to Re z, then straight up to z."""
    z = complex(z)
    pts = [complex(x) for x in real_axis_waypoints(dspec, float(start), z.real)]
    if abs(pts[-1] - pts[-2]) == 0:
        pts.pop()
    if z.imag != 0:
        pts.append(z)
    if len(pts) == 1:
        pts.append(pts[0])
    return StripPath.build(dspec, pts)


def phi(dspec: DivisorSpec, z: complex, mode: str = "G", **kw) -> complex:
    """Phi_1(z) (mode 'G') or Phi_2(z) (mode '1/G'), with Phi(0) = 0."""
    z = complex(z)
    if z == 0:
        return 0j
    return sc_integrate(dspec, canonical_path(dspec, z), mode, **kw)


def translation(dspec: DivisorSpec, mode: str = "G", **kw) -> complex:
    """v with Phi(z + 1) = Phi(z) + v."""
    return sc_integrate(dspec, canonical_path(dspec, 1.0), mode, **kw)


@dataclass(frozen=True)
class PolygonImage:
    """Image of one boundary edge of the strip under Phi_1 or Phi_2.

    Vertices are listed in the order the edge is traversed with the polygon
    on the left: increasing Re z on the lower edge, decreasing on the upper.
    """

    edge: str
    mode: str
    anchor: complex
    vertices: np.ndarray
    exponents: np.ndarray
    v: complex
    periods: int = 1
    directions: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.directions is None:
            dv = np.diff(self.vertices)
            object.__setattr__(self, "directions", dv / np.abs(dv) if dv.size else dv)

    @property
    def step(self) -> complex:
        """Translation carrying the vertex list one period along the traversal."""
        return self.v if self.edge == "lower" else -self.v

    def interior_angles(self):
        """Angle inside the polygon at each vertex, in (0, 2 pi)."""
        if len(self.vertices) == 0:
            return np.zeros(0)
        shift = self.periods * self.step
        ext = np.concatenate([[self.vertices[-1] - shift], self.vertices,
                              [self.vertices[0] + shift]])
        d_in = ext[1:-1] - ext[:-2]
        d_out = ext[2:] - ext[1:-1]
        turn = np.angle(d_out / d_in)
        return np.pi - turn

    def to_csv(self, target=None) -> str:
        """Debug dump: index, x, y per vertex."""
        rows = [(k, float(w.real), float(w.imag)) for k, w in enumerate(self.vertices)]
        return write_csv(["index", "x", "y"], rows, target)


def polygon_image(dspec: DivisorSpec, edge: str = "lower", periods: int = 1,
                  mode: str = "G", **kw) -> PolygonImage:
    """Images of the pre-vertices of one edge over ``periods`` periods."""
    if periods < 1:
        raise ValueError("periods must be >= 1")
    f, sign = integrand(dspec, mode)
    pts, exps = dspec.edge(edge)
    y = 0.0 if edge == "lower" else dspec.t.height
    base = complex(0.0, y)
    # one batched call: Phi(base) then a chain along the edge over all periods
    xs = np.concatenate([pts + k for k in range(periods)])
    es = np.tile(exps, periods)
    chain_x = np.concatenate([[0.0], xs, [float(periods)]])
    chain_e = np.concatenate([[0.0], sign * es, [0.0]])
    a = np.concatenate([[0j], base + chain_x[:-1]])
    b = np.concatenate([[base], base + chain_x[1:]])
    ea = np.concatenate([[0.0], chain_e[:-1]])
    eb = np.concatenate([[0.0], chain_e[1:]])
    if y == 0.0:
        a, b, ea, eb = a[1:], b[1:], ea[1:], eb[1:]
        vals = integrate_segments(f, a, b, ea, eb, local=True, **kw)
        anchor = 0j
        cum = np.cumsum(vals)
    else:
        vals = integrate_segments(f, a, b, ea, eb, local=True, **kw)
        anchor = complex(vals[0])
        cum = anchor + np.cumsum(vals[1:])
    verts = cum[:-1]
    v = complex(cum[-1] - anchor) / periods
    if edge == "upper":
        verts, es = verts[::-1], es[::-1]
    return PolygonImage(edge, mode, anchor, np.asarray(verts), np.asarray(es), v, periods)
