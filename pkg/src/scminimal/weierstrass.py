"""Minimal surface patches from the Weierstrass data (G, dh = dz).

With Phi_1 = int G dz and Phi_2 = int dz / G, both starting at z = 0,

    X(z) = Re e^{i theta} ( (Phi_2 - Phi_1)/2, i (Phi_2 + Phi_1)/2, z ).

theta = 0 is the surface itself; theta = -pi/2 is its conjugate.  The
horizontal part F = x1 + i x2 equals (conj(Phi_2) - Phi_1)/2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .divisor import DivisorSpec
from .errors import DegenerateEdge
from .quadrature import DEFAULT_ORDER, DEFAULT_TOL, integrate_segments
from .scmap import _log_g, integrand, prevertex_distance, real_axis_waypoints

MIN_RESOLUTION = 8


def _weierstrass(phi1, phi2, z, phase):
    rot = np.exp(1j * phase)
    comps = (0.5 * (phi2 - phi1), 0.5j * (phi2 + phi1), z)
    return np.stack([np.real(rot * c) for c in comps], axis=-1)


def stereographic_normal(log_g):
    """Unit normal (2 Re G, 2 Im G, |G|^2 - 1) / (|G|^2 + 1) from log G."""
    log_g = np.asarray(log_g, dtype=complex)
    s = np.real(log_g)
    ang = np.where(np.isfinite(s), np.imag(log_g), 0.0)
    with np.errstate(over="ignore"):
        sech = np.where(np.isfinite(s), 1.0 / np.cosh(np.clip(s, -700, 700)), 0.0)
    return np.stack([np.cos(ang) * sech, np.sin(ang) * sech, np.tanh(s)], axis=-1)


class IntegralCache:
    """Phi_1, Phi_2 at real-axis points, reused by :func:`surface_point`."""

    def __init__(self, dspec: DivisorSpec, order: int = DEFAULT_ORDER, tol: float = DEFAULT_TOL):
        self.dspec = dspec
        self.order, self.tol = order, tol
        self._real = {0.0: (0j, 0j)}

    def _segments(self, a, b, ea, eb):
        out = []
        for mode in ("G", "1/G"):
            f, sign = integrand(self.dspec, mode)
            out.append(complex(np.sum(integrate_segments(
                f, a, b, sign * ea, sign * eb, order=self.order, tol=self.tol, local=True))))
        return out

    def real(self, x: float):
        x = float(x)
        if x not in self._real:
            x0 = min(self._real, key=lambda k: abs(k - x))
            pts = real_axis_waypoints(self.dspec, x0, x)
            e = np.array([self.dspec.exponent_at(p) for p in pts])
            p1, p2 = self._segments(np.array(pts[:-1], complex), np.array(pts[1:], complex), e[:-1], e[1:])
            base = self._real[x0]
            self._real[x] = (base[0] + p1, base[1] + p2)
        return self._real[x]

    def pair(self, z: complex):
        z = complex(z)
        b1, b2 = self.real(z.real)
        if z.imag == 0:
            return b1, b2
        ea = self.dspec.exponent_at(complex(z.real, 0.0))
        eb = self.dspec.exponent_at(z)
        p1, p2 = self._segments(np.array([complex(z.real, 0.0)]), np.array([z]),
                                np.array([ea]), np.array([eb]))
        return b1 + p1, b2 + p2


def surface_point(z: complex, dspec: DivisorSpec, cache: IntegralCache | None = None,
                  phase: float = 0.0):
    """X(z) with X(0) = 0."""
    cache = cache if cache is not None else IntegralCache(dspec)
    p1, p2 = cache.pair(z)
    return _weierstrass(np.complex128(p1), np.complex128(p2), np.complex128(complex(z)), phase)


def _cluster(n: int, beta: float):
    s = np.linspace(0.0, 1.0, n + 1)
    if beta <= 0:
        return s
    return 0.5 * (1.0 + np.tanh(beta * (2 * s - 1)) / math.tanh(beta))


def _split_counts(lengths, total):
    """Distribute ``total`` intervals over pieces proportional to length, >= 1 each."""
    lengths = np.asarray(lengths, dtype=float)
    if total < lengths.size:
        raise ValueError(f"nu = {total} is smaller than the {lengths.size} pieces between corners")
    raw = lengths / lengths.sum() * total
    counts = np.maximum(1, np.floor(raw).astype(int))
    while counts.sum() < total:
        counts[np.argmax(raw - counts)] += 1
    while counts.sum() > total:
        k = np.argmax(np.where(counts > 1, counts - raw, -np.inf))
        counts[k] -= 1
    return counts


def interval_labels(dspec: DivisorSpec, edge: str):
    """Label -> (left, right) for the boundary intervals of one edge.

    Interval ``k`` runs from pre-vertex k-1 to pre-vertex k (periodically), so
    ``edge:0`` is the interval containing Re z = 0.
    """
    pts, _ = dspec.edge(edge)
    if pts.size == 0:
        return {f"{edge}:0": (-math.inf, math.inf)}
    ext = np.concatenate([[pts[-1] - 1.0], pts])
    return {f"{edge}:{k}": (ext[k], ext[k + 1]) for k in range(pts.size)}


def label_of(dspec: DivisorSpec, edge: str, x: float) -> str:
    """Label of the boundary interval containing Re z = x (not a pre-vertex)."""
    pts, _ = dspec.edge(edge)
    xm = x - math.floor(x)
    k = int(np.searchsorted(pts, xm)) % max(pts.size, 1)
    return f"{edge}:{k}"


def _node_labels(dspec: DivisorSpec, edge: str, u):
    pts, _ = dspec.edge(edge)
    labels = {}
    for name, (lo, hi) in interval_labels(dspec, edge).items():
        if pts.size == 0:
            idx = np.arange(u.size)
        else:
            sel = np.zeros(u.size, dtype=bool)
            for k in range(int(np.floor(u.min())) - 1, int(np.ceil(u.max())) + 2):
                sel |= (u >= lo + k - 1e-12) & (u <= hi + k + 1e-12)
            idx = np.flatnonzero(sel)
        if idx.size:
            labels[name] = idx
    return labels


@dataclass(frozen=True)
class SurfacePatch:
    """Sampled fundamental piece over a parameter rectangle.

    Arrays are indexed [row, column] with rows along Im z (row 0 on the real
    edge) and columns along Re z.  ``labels`` maps each boundary interval to
    the column indices of its nodes on the corresponding edge.
    """

    dspec: DivisorSpec
    u: np.ndarray
    v: np.ndarray
    phi1: np.ndarray
    phi2: np.ndarray
    log_g: np.ndarray
    labels: dict
    phase: float = 0.0
    meta: dict = field(default_factory=dict)
    frame: tuple | None = None

    @property
    def z(self):
        return self.u[None, :] + 1j * self.v[:, None]

    @property
    def shape(self):
        return self.phi1.shape

    @property
    def points(self):
        x = _weierstrass(self.phi1, self.phi2, self.z, self.phase)
        if self.frame is None:
            return x
        rot, shift = self.frame
        return x @ rot.T + shift

    @property
    def normals(self):
        n = stereographic_normal(self.log_g)
        return n if self.frame is None else n @ self.frame[0].T

    def moved(self, rot, shift) -> "SurfacePatch":
        """Patch with the rigid motion x -> rot x + shift applied after the current frame."""
        rot, shift = np.asarray(rot, float), np.asarray(shift, float)
        if self.frame is not None:
            r0, s0 = self.frame
            rot, shift = rot @ r0, rot @ s0 + shift
        return replace(self, frame=(rot, shift))

    def boundary_nodes(self, label: str):
        """(row, columns) of the nodes carrying ``label``."""
        edge = label.split(":")[0]
        row = 0 if edge == "lower" else self.v.size - 1
        return row, self.labels[label]

    def boundary_points(self, label: str):
        row, cols = self.boundary_nodes(label)
        return self.points[row, cols]


def make_patch(dspec: DivisorSpec, nu: int = 64, nv: int = 64, re_range=(0.0, 1.0), *,
               cluster: float = 0.0, order: int = DEFAULT_ORDER, tol: float = DEFAULT_TOL,
               phase: float = 0.0) -> SurfacePatch:
    """Integrate Phi_1, Phi_2 on a grid over re_range x [0, d/2].

    Pre-vertices inside ``re_range`` become grid columns, so they appear as
    exact corner nodes; the remaining columns are spread uniformly (or
    tanh-clustered with strength ``cluster``) between them.
    """
    if nu < MIN_RESOLUTION or nv < MIN_RESOLUTION:
        raise ValueError(f"grid resolution must be at least {MIN_RESOLUTION}x{MIN_RESOLUTION}")
    lo, hi = map(float, re_range)
    if not hi > lo:
        raise ValueError("re_range must be increasing")
    h = dspec.t.height
    breaks = {lo, hi}
    for edge in ("lower", "upper"):
        pts, _ = dspec.edge(edge)
        for k in range(int(math.floor(lo)) - 1, int(math.ceil(hi)) + 1):
            breaks.update(float(x + k) for x in pts if lo < x + k < hi)
    breaks = np.array(sorted(breaks))
    counts = _split_counts(np.diff(breaks), nu)
    u = np.concatenate([a + (b - a) * _cluster(n, cluster)[:-1]
                        for a, b, n in zip(breaks[:-1], breaks[1:], counts)] + [[hi]])
    v = h * _cluster(nv, cluster)

    e_low = np.array([dspec.exponent_at(complex(x, 0.0)) for x in u])
    e_up = np.array([dspec.exponent_at(complex(x, h)) for x in u])

    # bottom row segments, then every column bottom to top
    ra, rb = u[:-1].astype(complex), u[1:].astype(complex)
    rea, reb = e_low[:-1], e_low[1:]
    ca = (u[None, :] + 1j * v[:-1, None]).reshape(-1)
    cb = (u[None, :] + 1j * v[1:, None]).reshape(-1)
    cea = np.zeros((nv, u.size))
    ceb = np.zeros((nv, u.size))
    cea[0] = e_low
    ceb[-1] = e_up

    cache = IntegralCache(dspec, order, tol)
    start = cache.real(lo)
    phis = []
    for k, mode in enumerate(("G", "1/G")):
        f, sign = integrand(dspec, mode)
        a = np.concatenate([ra, ca])
        b = np.concatenate([rb, cb])
        ea = sign * np.concatenate([rea, cea.reshape(-1)])
        eb = sign * np.concatenate([reb, ceb.reshape(-1)])
        vals = integrate_segments(f, a, b, ea, eb, order=order, tol=tol, local=True)
        row = start[k] + np.concatenate([[0j], np.cumsum(vals[:u.size - 1])])
        cols = vals[u.size - 1:].reshape(nv, u.size)
        grid = np.vstack([row[None, :], row[None, :] + np.cumsum(cols, axis=0)])
        phis.append(grid)

    z = u[None, :] + 1j * v[:, None]
    log_g = np.empty(z.shape, dtype=complex)
    corner = prevertex_distance(z, dspec) < 1e-12
    log_g[~corner] = _log_g(z[~corner], dspec)
    if np.any(corner):
        e = np.array([dspec.exponent_at(w) for w in z[corner]])
        log_g[corner] = np.where(e > 0, -np.inf, np.inf) + 0j
    labels = {**_node_labels(dspec, "lower", u), **_node_labels(dspec, "upper", u)}
    meta = {"re_range": (lo, hi), "cluster": cluster, "order": order, "tol": tol}
    return SurfacePatch(dspec, u, v, phis[0], phis[1], log_g, labels, phase, meta)


def conjugate_patch(p: SurfacePatch) -> SurfacePatch:
    """Conjugate surface: dh -> -i dh, i.e. Im instead of Re in every coordinate.

    Applying it twice gives the associate surface at angle -pi, which is the
    point reflection X -> -X of the original patch.
    """
    return replace(p, phase=p.phase - 0.5 * math.pi)


@dataclass(frozen=True)
class Plane:
    """Vertical plane {x : normal . (x1, x2) = offset} with outward normal."""

    label: str
    normal: np.ndarray
    point: np.ndarray
    residual: float
    n_points: int

    @property
    def direction(self):
        return np.array([-self.normal[1], self.normal[0]])

    @property
    def offset(self) -> float:
        return float(self.normal @ self.point)

    def distance(self, xy):
        """Signed distance of horizontal points from the plane."""
        return (np.asarray(xy)[..., :2] - self.point) @ self.normal


def plane_of(patch: SurfacePatch, label: str) -> Plane:
    """Least-squares vertical plane through a labeled boundary polyline."""
    if label not in patch.labels:
        raise KeyError(f"no boundary nodes labelled {label!r}")
    row, cols = patch.boundary_nodes(label)
    pts = patch.points[row, cols]
    xy = pts[:, :2]
    if np.unique(np.round(pts, 12), axis=0).shape[0] < 3:
        raise DegenerateEdge(f"{label}: fewer than 3 distinct boundary points")
    c = xy.mean(axis=0)
    _, _, vt = np.linalg.svd(xy - c)
    n = vt[1]
    inner_row = 1 if row == 0 else row - 1
    side = np.mean((patch.points[inner_row, cols, :2] - c) @ n)
    if side > 0:
        n = -n
    residual = float(np.max(np.abs((xy - c) @ n)))
    return Plane(label, n, c, residual, len(cols))


def dihedral_angle(p1: Plane, p2: Plane) -> float:
    """Angle of the wedge between two planes on the side of the surface."""
    return math.pi - math.acos(float(np.clip(p1.normal @ p2.normal, -1.0, 1.0)))


def line_angle(p1: Plane, p2: Plane) -> float:
    """Unoriented angle between the planes, in [0, pi/2]."""
    c = abs(float(p1.normal @ p2.normal))
    return math.acos(min(c, 1.0))


def plane_gap(p1: Plane, p2: Plane) -> float:
    """Distance between two (nearly) parallel planes."""
    return abs(float(p1.normal @ (p2.point - p1.point)))


# -- quality measures --------------------------------------------------------

def _mask_away(patch: SurfacePatch, margin: float):
    return prevertex_distance(patch.z, patch.dspec) > margin


def harmonicity_residual(patch: SurfacePatch, margin: float = 0.1) -> float:
    """Largest 5-point Laplacian of X over interior nodes away from the corners.

    Only nodes whose four neighbours are equally spaced in each direction
    are used, so the stencil is second-order accurate.
    """
    X = patch.points
    du, dv = np.diff(patch.u), np.diff(patch.v)
    hu, hv = du[1:], dv[1:]
    okc = np.isclose(du[:-1], du[1:], rtol=1e-9, atol=0)
    okr = np.isclose(dv[:-1], dv[1:], rtol=1e-9, atol=0)
    lap = ((X[1:-1, 2:] - 2 * X[1:-1, 1:-1] + X[1:-1, :-2]) / hu[None, :, None] ** 2
           + (X[2:, 1:-1] - 2 * X[1:-1, 1:-1] + X[:-2, 1:-1]) / hv[:, None, None] ** 2)
    mask = okr[:, None] & okc[None, :] & _mask_away(patch, margin)[1:-1, 1:-1]
    return float(np.max(np.abs(lap[mask]))) if np.any(mask) else math.nan


def _diff_matrix(x):
    """Five-point first-derivative weights on a (possibly non-uniform) 1-D grid."""
    n = x.size
    start = np.clip(np.arange(n) - 2, 0, n - 5)
    idx = start[:, None] + np.arange(5)[None, :]
    w = np.empty(idx.shape)
    for i in range(n):
        dx = x[idx[i]] - x[i]
        vander = np.vander(dx, 5, increasing=True).T
        rhs = np.zeros(5)
        rhs[1] = 1.0
        w[i] = np.linalg.solve(vander, rhs)
    return idx, w


def _derivative(X, x, axis):
    idx, w = _diff_matrix(np.asarray(x, dtype=float))
    Xm = np.moveaxis(X, axis, 0)
    out = np.einsum("ik,ik...->i...", w, Xm[idx])
    return np.moveaxis(out, 0, axis)


def _tangents(patch: SurfacePatch):
    """Fourth-order finite-difference tangents X_u, X_v."""
    X = patch.points
    return _derivative(X, patch.u, 1), _derivative(X, patch.v, 0)


def conformality_error(patch: SurfacePatch, margin: float = 0.1) -> float:
    """max of |E - G| / (E + G) and 2|F| / (E + G) away from the corners."""
    xu, xv = _tangents(patch)
    E = np.sum(xu * xu, axis=-1)
    G = np.sum(xv * xv, axis=-1)
    F = np.sum(xu * xv, axis=-1)
    err = np.maximum(np.abs(E - G), 2 * np.abs(F)) / (E + G)
    return float(np.max(err[_mask_away(patch, margin)]))


def normal_deviation(patch: SurfacePatch, margin: float = 0.1) -> float:
    """Largest angle between grid-tangent normals and the stereographic normals."""
    xu, xv = _tangents(patch)
    n = np.cross(xu, xv)
    n /= np.linalg.norm(n, axis=-1, keepdims=True)
    ref = patch.normals
    cosang = np.abs(np.sum(n * ref, axis=-1))
    ang = np.arccos(np.clip(cosang, -1.0, 1.0))
    return float(np.max(ang[_mask_away(patch, margin)]))


def vertical_period_error(dspec: DivisorSpec, samples=None, **kw) -> float:
    """max |X(z + 1) - X(z) - (0, 0, 1)| over sample points."""
    if samples is None:
        h = dspec.t.height
        samples = [complex(x, y) for x, y in zip(np.linspace(0.05, 0.9, 10), np.linspace(0.1, 0.9, 10) * h)]
    cache = IntegralCache(dspec, **kw)
    worst = 0.0
    for z in samples:
        dz = surface_point(z + 1, dspec, cache) - surface_point(z, dspec, cache)
        worst = max(worst, float(np.max(np.abs(dz - np.array([0.0, 0.0, 1.0])))))
    return worst
