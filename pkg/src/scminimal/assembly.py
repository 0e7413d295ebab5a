"""From a fundamental patch to a triply periodic triangle mesh.

The vertical symmetry planes of a solved patch project to three lines in
the horizontal plane, bounding a triangle with angles pi/r, pi/s, pi/t.
Reflections in those lines generate a wallpaper group; its translations
together with the vertical period (0, 0, 1) span the lattice.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from itertools import permutations

import numpy as np
from scipy.spatial import ConvexHull, cKDTree

from .errors import AngleMismatch, DegenerateEdge, InvalidTriple
from .weierstrass import SurfacePatch, line_angle, plane_gap, plane_of

WELD_TOL = 1e-7
ANGLE_TOL = 1e-5
_PROBES = np.array([[0.1234, 0.5678], [-0.8765, 0.2345], [0.3141, -0.9265]])


@dataclass(frozen=True)
class Isometry:
    """x -> (A x_h + b, +-x3 + c) with A orthogonal 2x2 and a vertical flip bit."""

    A: np.ndarray
    b: np.ndarray
    flip: bool = False
    c: float = 0.0

    @classmethod
    def identity(cls):
        return cls(np.eye(2), np.zeros(2))

    @classmethod
    def reflection(cls, point, normal):
        """Reflection of the horizontal plane in the line through ``point`` with ``normal``."""
        n = np.asarray(normal, float) / np.linalg.norm(normal)
        A = np.eye(2) - 2.0 * np.outer(n, n)
        return cls(A, 2.0 * (n @ np.asarray(point, float)) * n)

    @property
    def proper(self) -> bool:
        """Orientation preserving in space."""
        return (np.linalg.det(self.A) > 0) != self.flip

    @property
    def is_translation(self) -> bool:
        return not self.flip and np.allclose(self.A, np.eye(2), atol=1e-9)

    def apply(self, x):
        x = np.asarray(x, float)
        out = np.empty_like(x)
        out[..., :2] = x[..., :2] @ self.A.T + self.b
        out[..., 2] = (-x[..., 2] if self.flip else x[..., 2]) + self.c
        return out

    def __matmul__(self, other: "Isometry") -> "Isometry":
        """Composition: (self @ other)(x) = self(other(x))."""
        A = self.A @ other.A
        b = self.A @ other.b + self.b
        c = (-other.c if self.flip else other.c) + self.c
        return Isometry(A, b, self.flip != other.flip, c)

    def key(self, scale: float = 1.0):
        """Hashable signature from the images of fixed probe points."""
        img = (_PROBES * scale) @ self.A.T + self.b
        return tuple(np.round(img.reshape(-1) / (scale * 1e-9)).astype(np.int64)) + (self.flip, round(self.c / 1e-9))


@dataclass(frozen=True)
class TriangleGroup:
    """Euclidean triangle with angles (pi/r, pi/s, pi/t) at vertices 0, 1, 2.

    Line k is the side opposite vertex k; ``normals`` point into the triangle.
    """

    triple: tuple
    vertices: np.ndarray

    @classmethod
    def standard(cls, triple, side: float = 1.0):
        r, s, t = triple
        if sorted(triple) not in ([2, 3, 6], [2, 4, 4], [3, 3, 3]):
            raise InvalidTriple(f"{tuple(triple)} is not a Euclidean triangle group")
        A, B, C = math.pi / r, math.pi / s, math.pi / t
        # side between vertices 0 and 1 is opposite angle C
        c = side
        b = c * math.sin(B) / math.sin(C)
        v = np.array([[0.0, 0.0], [c, 0.0], [b * math.cos(A), b * math.sin(A)]])
        return cls(tuple(triple), v)

    @property
    def angles(self):
        return tuple(math.pi / k for k in self.triple)

    def line(self, k: int):
        """(point, inward unit normal) of the side opposite vertex k."""
        a, b = self.vertices[(k + 1) % 3], self.vertices[(k + 2) % 3]
        d = (b - a) / np.linalg.norm(b - a)
        n = np.array([-d[1], d[0]])
        if (self.vertices[k] - a) @ n < 0:
            n = -n
        return a, n

    @property
    def reflections(self):
        return [Isometry.reflection(*self.line(k)) for k in range(3)]

    @property
    def size(self) -> float:
        return float(np.max(np.linalg.norm(self.vertices - self.vertices.mean(0), axis=1)))

    def orbit(self, depth: int):
        """Distinct group elements given by words of length <= depth, in BFS order."""
        gens = self.reflections
        start = Isometry.identity()
        scale = self.size
        seen = {start.key(scale): (start, ())}
        queue = deque([(start, ())])
        out = [(start, ())]
        while queue:
            g, word = queue.popleft()
            if len(word) == depth:
                continue
            for k, r in enumerate(gens):
                h = g @ r
                key = h.key(scale)
                if key not in seen:
                    seen[key] = (h, word + (k,))
                    queue.append((h, word + (k,)))
                    out.append((h, word + (k,)))
        return out

    def lattice(self, depth: int = 8):
        """Two shortest independent horizontal translations of the group."""
        trans = sorted((g.b for g, _ in self.orbit(depth) if g.is_translation and np.linalg.norm(g.b) > 1e-9),
                       key=lambda v: (round(float(np.linalg.norm(v)), 9), round(float(math.atan2(v[1], v[0])), 9)))
        first = trans[0]
        for v in trans[1:]:
            if abs(first[0] * v[1] - first[1] * v[0]) > 1e-9 * np.linalg.norm(v) * np.linalg.norm(first):
                return np.array([first, v])
        raise RuntimeError("orbit too shallow to contain two independent translations")


# -- alignment ---------------------------------------------------------------------

@dataclass(frozen=True)
class Line2:
    labels: tuple
    point: np.ndarray
    normal: np.ndarray
    residual: float


def boundary_lines(patch: SurfacePatch, gap_tol: float = 1e-6):
    """Group the boundary planes of ``patch`` into distinct vertical planes."""
    planes = []
    for label in sorted(patch.labels):
        try:
            planes.append(plane_of(patch, label))
        except DegenerateEdge:
            continue
    lines = []
    for pl in planes:
        for k, ln in enumerate(lines):
            ref = ln[0]
            if line_angle(ref, pl) < ANGLE_TOL and plane_gap(ref, pl) < gap_tol:
                ln.append(pl)
                break
        else:
            lines.append([pl])
    out = []
    for ln in lines:
        ref = ln[0]
        out.append(Line2(tuple(p.label for p in ln), ref.point, ref.normal,
                         max(max(p.residual for p in ln), max(plane_gap(ref, p) for p in ln))))
    return out


def _intersect(l1: Line2, l2: Line2):
    M = np.array([l1.normal, l2.normal])
    rhs = np.array([l1.normal @ l1.point, l2.normal @ l2.point])
    return np.linalg.solve(M, rhs)


def _triangle_angles(v):
    out = []
    for k in range(3):
        a, b = v[(k + 1) % 3] - v[k], v[(k + 2) % 3] - v[k]
        out.append(math.acos(np.clip(a @ b / (np.linalg.norm(a) * np.linalg.norm(b)), -1, 1)))
    return np.array(out)


def align_patch(patch: SurfacePatch, group: TriangleGroup, gap_tol: float = 1e-6) -> SurfacePatch:
    """Move ``patch`` so that its symmetry planes stand over the sides of ``group``'s triangle.

    The group triangle is rescaled to the patch; the result carries the
    scaled group in ``meta["group"]`` and the side index of every label in
    ``meta["sides"]``.
    """
    lines = boundary_lines(patch, gap_tol)
    if len(lines) != 3:
        raise AngleMismatch(f"expected 3 distinct symmetry planes, found {len(lines)}: "
                            f"{[ln.labels for ln in lines]}")
    # vertex k of the patch triangle is opposite line k
    verts = np.array([_intersect(lines[(k + 1) % 3], lines[(k + 2) % 3]) for k in range(3)])
    measured = _triangle_angles(verts)
    want = np.array(group.angles)
    best = min(permutations(range(3)), key=lambda pm: np.max(np.abs(measured[list(pm)] - want)))
    err = float(np.max(np.abs(measured[list(best)] - want)))
    if err > ANGLE_TOL:
        raise AngleMismatch(f"triangle angles {np.degrees(measured)} vs group {np.degrees(want)} "
                            f"(deviation {err:.2e} rad)")
    verts = verts[list(best)]
    lines = [lines[k] for k in best]
    side = float(np.linalg.norm(verts[1] - verts[0]))
    scaled = TriangleGroup.standard(group.triple, side)
    # orthogonal 2x2 map (possibly improper) taking verts onto scaled.vertices
    src = verts - verts.mean(0)
    dst = scaled.vertices - scaled.vertices.mean(0)
    U, _, Vt = np.linalg.svd(dst.T @ src)
    A = U @ Vt
    b = scaled.vertices.mean(0) - A @ verts.mean(0)
    fit = float(np.max(np.linalg.norm(verts @ A.T + b - scaled.vertices, axis=1)))
    if fit > 1e-6 * max(side, 1.0):
        raise AngleMismatch(f"patch triangle does not match the group triangle (misfit {fit:.2e})")
    rot = np.eye(3)
    rot[:2, :2] = A
    shift = np.array([b[0], b[1], 0.0])
    sides = {label: k for k, ln in enumerate(lines) for label in ln.labels}
    meta = dict(patch.meta, group=scaled, sides=sides, triangle_error=err)
    moved = patch.moved(rot, shift)
    return SurfacePatch(moved.dspec, moved.u, moved.v, moved.phi1, moved.phi2, moved.log_g,
                        moved.labels, moved.phase, meta, moved.frame)


def seam_gap(patch: SurfacePatch) -> float:
    """Largest distance between a boundary node and its copy reflected in its own side.

    The copies across a side meet exactly when every node labelled for that
    side lies on it.
    """
    group: TriangleGroup = patch.meta["group"]
    worst = 0.0
    X = patch.points
    for label, k in patch.meta["sides"].items():
        row, cols = patch.boundary_nodes(label)
        pt, n = group.line(k)
        worst = max(worst, float(np.max(2.0 * np.abs((X[row, cols, :2] - pt) @ n))))
    return worst


# -- mesh --------------------------------------------------------------------------

def grid_faces(points: np.ndarray) -> np.ndarray:
    """Triangles of a structured grid, each quad split along its shorter diagonal."""
    nr, nc = points.shape[:2]
    idx = np.arange(nr * nc).reshape(nr, nc)
    a, b = idx[:-1, :-1].ravel(), idx[:-1, 1:].ravel()
    c, d = idx[1:, 1:].ravel(), idx[1:, :-1].ravel()
    P = points.reshape(-1, 3)
    diag_ac = np.linalg.norm(P[a] - P[c], axis=1)
    diag_bd = np.linalg.norm(P[b] - P[d], axis=1)
    use_ac = diag_ac <= diag_bd
    t1 = np.where(use_ac[:, None], np.stack([a, b, c], 1), np.stack([a, b, d], 1))
    t2 = np.where(use_ac[:, None], np.stack([a, c, d], 1), np.stack([b, c, d], 1))
    return np.concatenate([t1, t2])


def triangle_areas(V, F):
    return 0.5 * np.linalg.norm(np.cross(V[F[:, 1]] - V[F[:, 0]], V[F[:, 2]] - V[F[:, 0]]), axis=1)


@dataclass(frozen=True)
class TriplyPeriodicMesh:
    """Welded triangle mesh of several patch copies plus its period lattice."""

    vertices: np.ndarray
    faces: np.ndarray
    lattice: np.ndarray
    copy_of_face: np.ndarray
    provenance: tuple
    meta: dict = field(default_factory=dict)

    @property
    def n_copies(self) -> int:
        return len(self.provenance)

    def edge_counts(self):
        e = np.sort(np.concatenate([self.faces[:, [0, 1]], self.faces[:, [1, 2]], self.faces[:, [2, 0]]]), axis=1)
        _, counts = np.unique(e, axis=0, return_counts=True)
        return counts


def weld(V, F, tol: float = WELD_TOL):
    """Merge vertices closer than ``tol``; drop faces that collapse."""
    pairs = cKDTree(V).query_pairs(tol, output_type="ndarray")
    parent = np.arange(len(V))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, j in pairs:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)
    roots = np.array([find(i) for i in range(len(V))])
    keep, inverse = np.unique(roots, return_inverse=True)
    F = inverse[F]
    ok = (F[:, 0] != F[:, 1]) & (F[:, 1] != F[:, 2]) & (F[:, 2] != F[:, 0])
    return V[keep], F, ok


def replicate(patch: SurfacePatch, group: TriangleGroup | None = None, depth: int = 1,
              use_horizontal_mirror: bool = False, weld_tol: float = WELD_TOL) -> TriplyPeriodicMesh:
    """Copies of an aligned patch under the group elements of word length <= depth.

    With ``use_horizontal_mirror`` the patch is taken to cover Re z in
    [0, 1/2] and is completed to a full vertical period by the symmetry
    z -> -conj(z) of symmetric divisors, which acts on the surface as the
    reflection x3 -> -x3 in the unmoved frame, followed by the vertical
    period.
    """
    if "group" not in patch.meta:
        if group is None:
            raise ValueError("patch is not aligned and no group was given")
        patch = align_patch(patch, group)
    group = patch.meta["group"]
    X = patch.points
    base_faces = grid_faces(X)
    pieces = [X.reshape(-1, 3)]
    if use_horizontal_mirror:
        raw = SurfacePatch(patch.dspec, patch.u, patch.v, patch.phi1, patch.phi2, patch.log_g,
                           patch.labels, patch.phase).points
        mirrored = raw * np.array([1.0, 1.0, -1.0]) + np.array([0.0, 0.0, 1.0])
        if patch.frame is not None:
            rot, shift = patch.frame
            mirrored = mirrored @ rot.T + shift
        pieces.append(mirrored.reshape(-1, 3))
    nv = X.shape[0] * X.shape[1]
    block_V = np.concatenate(pieces)
    block_F = np.concatenate([base_faces + k * nv for k in range(len(pieces))])
    if use_horizontal_mirror:
        # the mirror is improper
        block_F[len(base_faces):] = block_F[len(base_faces):, ::-1]

    Vs, Fs, copy_ids, prov = [], [], [], []
    offset = 0
    for k, (g, word) in enumerate(group.orbit(depth)):
        Vs.append(g.apply(block_V))
        F = block_F if g.proper else block_F[:, ::-1]
        Fs.append(F + offset)
        copy_ids.append(np.full(len(F), k))
        prov.append(word)
        offset += len(block_V)
    V, F, ok = weld(np.concatenate(Vs), np.concatenate(Fs), weld_tol)
    copy_of_face = np.concatenate(copy_ids)
    areas = triangle_areas(V, F)
    ok &= areas > 1e-14
    F, copy_of_face = F[ok], copy_of_face[ok]
    horiz = group.lattice()
    lattice = np.array([[horiz[0, 0], horiz[0, 1], 0.0], [horiz[1, 0], horiz[1, 1], 0.0], [0.0, 0.0, 1.0]])
    meta = {
        "triple": group.triple, "depth": depth, "seam_gap": seam_gap(patch),
        "vertical_period": 1.0, "vertical_candidates": {"strip": (0.0, 0.0, 1.0), "doubled": (0.0, 0.0, 2.0)},
        "horizontal_mirror": use_horizontal_mirror,
    }
    return TriplyPeriodicMesh(V, F, lattice, copy_of_face, tuple(prov), meta)


# -- embeddedness ------------------------------------------------------------------

def _segment_hits(p0, p1, a, b, c, eps=1e-12):
    """Moller-Trumbore: does segment p0->p1 cross triangle abc (row-wise)?"""
    d = p1 - p0
    e1, e2 = b - a, c - a
    h = np.cross(d, e2)
    det = np.einsum("ij,ij->i", e1, h)
    ok = np.abs(det) > eps
    inv = np.where(ok, 1.0 / np.where(ok, det, 1.0), 0.0)
    s = p0 - a
    u = inv * np.einsum("ij,ij->i", s, h)
    q = np.cross(s, e1)
    v = inv * np.einsum("ij,ij->i", d, q)
    t = inv * np.einsum("ij,ij->i", e2, q)
    return ok & (u > eps) & (v > eps) & (u + v < 1 - eps) & (t > eps) & (t < 1 - eps)


def triangles_intersect(T1, T2):
    """Row-wise test for (n, 3, 3) triangle arrays in general position."""
    hit = np.zeros(len(T1), dtype=bool)
    for A, B in ((T1, T2), (T2, T1)):
        for i, j in ((0, 1), (1, 2), (2, 0)):
            hit |= _segment_hits(A[:, i], A[:, j], B[:, 0], B[:, 1], B[:, 2])
    return hit


@dataclass(frozen=True)
class IntersectionReport:
    pairs_tested: int
    intersections: int
    examples: tuple


def self_intersection_spot_check(mesh: TriplyPeriodicMesh, samples: int = 100_000,
                                 seed: int = 0) -> IntersectionReport:
    """Test random nearby triangle pairs from different copies that share no vertex."""
    rng = np.random.default_rng(seed)
    V, F = mesh.vertices, mesh.faces
    T = V[F]
    cent = T.mean(axis=1)
    reach = 2.0 * float(np.max(np.linalg.norm(T - cent[:, None, :], axis=2)))
    tree = cKDTree(cent)
    k = min(32, len(F))
    firsts, seconds = [], []
    tries = 0
    while sum(map(len, firsts)) < samples and tries < 50:
        tries += 1
        i = rng.integers(0, len(F), samples)
        _, nb = tree.query(cent[i], k=k, distance_upper_bound=reach)
        valid = nb < len(F)
        nbc = np.where(valid, nb, 0)
        valid &= mesh.copy_of_face[nbc] != mesh.copy_of_face[i][:, None]
        valid &= ~(F[nbc][:, :, :, None] == F[i][:, None, None, :]).any(axis=(2, 3))
        # one random valid neighbour per sample
        score = np.where(valid, rng.random(valid.shape), -1.0)
        col = np.argmax(score, axis=1)
        ok = valid[np.arange(i.size), col]
        firsts.append(i[ok])
        seconds.append(nbc[np.arange(i.size), col][ok])
    i = np.concatenate(firsts)[:samples]
    j = np.concatenate(seconds)[:samples]
    hit = triangles_intersect(T[i], T[j])
    ex = tuple((int(a), int(b)) for a, b in zip(i[hit][:10], j[hit][:10]))
    return IntersectionReport(int(i.size), int(hit.sum()), ex)


@dataclass(frozen=True)
class ContourReport:
    """Projection of a conjugate boundary contour along a common segment direction."""

    direction: np.ndarray
    collapsed: int
    convex: bool
    corners: int
    right_angles: bool
    graph: bool


def conjugate_contour_check(patch: SurfacePatch, straight_tol: float = 1e-8) -> ContourReport:
    """Project the boundary loop of a (conjugate) patch along the direction
    shared by two of its straight boundary segments.

    ``graph`` holds when the loop, minus the collapsed segments, runs once
    around the convex projected region.
    """
    X = patch.points
    nr, nc = X.shape[:2]
    # boundary pieces: split rows at corner columns, plus the two side columns
    cuts = sorted({0, nc - 1} | {int(c) for lab, cs in patch.labels.items() for c in (cs[0], cs[-1])})
    pieces = []
    for row in (0, nr - 1):
        for a, b in zip(cuts[:-1], cuts[1:]):
            if b > a:
                pieces.append(X[row, a:b + 1])
    pieces += [X[:, 0], X[:, -1]]

    dirs = []
    for P in pieces:
        c = P - P.mean(0)
        _, s, vt = np.linalg.svd(c)
        dirs.append(vt[0] if s[1] <= straight_tol * max(s[0], 1e-300) else None)
    pair = None
    for i in range(len(pieces)):
        for j in range(i + 1, len(pieces)):
            if dirs[i] is not None and dirs[j] is not None and np.linalg.norm(np.cross(dirs[i], dirs[j])) < 1e-8:
                pair = (i, j)
                break
        if pair:
            break
    if pair is None:
        raise DegenerateEdge("no two parallel straight boundary segments")
    e = dirs[pair[0]]
    # orthonormal basis of the projection plane
    basis = np.linalg.svd(np.eye(3) - np.outer(e, e))[0][:, :2]
    loop = np.concatenate([X[0], X[1:, -1], X[-1, ::-1][1:], X[::-1, 0][1:]])
    Y = loop @ basis
    collapsed = sum(1 for P in pieces if np.ptp(P @ basis, axis=0).max() < 1e-9)
    keep = np.concatenate([[True], np.linalg.norm(np.diff(Y, axis=0), axis=1) > 1e-10])
    Y = Y[keep]
    hull = ConvexHull(Y)
    scale = float(np.ptp(Y, axis=0).max())
    eq = hull.equations
    on_hull = np.max(np.min(np.abs(Y @ eq[:, :2].T + eq[:, 2]), axis=1)) < 1e-8 * scale
    shoelace = 0.5 * abs(np.sum(Y[:, 0] * np.roll(Y[:, 1], -1) - np.roll(Y[:, 0], -1) * Y[:, 1]))
    simple = abs(shoelace - hull.volume) < 1e-8 * scale ** 2
    # corners of the hull after merging collinear hull edges
    hv = Y[hull.vertices]
    turns = []
    for k in range(len(hv)):
        a, b = hv[k] - hv[k - 1], hv[(k + 1) % len(hv)] - hv[k]
        cr = a[0] * b[1] - a[1] * b[0]
        ang = math.atan2(abs(cr), a @ b)
        if ang > 1e-6:
            turns.append(ang)
    right = len(turns) == 4 and all(abs(t - math.pi / 2) < 1e-6 for t in turns)
    return ContourReport(e, collapsed, bool(on_hull), len(turns), right, bool(on_hull and simple))
