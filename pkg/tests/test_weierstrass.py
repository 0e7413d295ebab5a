import math

import numpy as np
import pytest

from scminimal.errors import DegenerateEdge
from scminimal.scmap import prevertex_distance
from scminimal.verify import random_symmetric_divisor
from scminimal.weierstrass import (IntegralCache, conformality_error, conjugate_patch, dihedral_angle,
                                   harmonicity_residual, interval_labels, label_of, line_angle,
                                   make_patch, normal_deviation, plane_gap, plane_of,
                                   stereographic_normal, surface_point, vertical_period_error)


def test_prevertices_are_grid_columns(p_patch, schwarz_p):
    for x in schwarz_p.lower_points:
        assert np.min(np.abs(p_patch.u - float(x))) == 0.0
    assert p_patch.shape == (17, 33)
    assert p_patch.u[0] == 0.0 and p_patch.u[-1] == 1.0


def test_grid_matches_pointwise_integration(p_patch, schwarz_p):
    cache = IntegralCache(schwarz_p)
    X = p_patch.points
    for i, j in ((0, 5), (8, 11), (16, 20), (3, 32)):
        z = p_patch.z[i, j]
        assert np.allclose(surface_point(z, schwarz_p, cache), X[i, j], atol=1e-11)


def test_origin_and_height(p_patch):
    X = p_patch.points
    assert np.allclose(X[0, 0], 0.0)
    assert np.allclose(X[..., 2], p_patch.z.real)


def test_mirror_symmetry_is_horizontal_reflection(p_patch):
    X = p_patch.points
    Y = X[:, ::-1]
    assert np.allclose(Y[..., :2], X[..., :2], atol=1e-11)
    assert np.allclose(Y[..., 2] + X[..., 2], 1.0, atol=1e-12)


def test_normals(p_patch):
    n = p_patch.normals
    assert np.allclose(np.linalg.norm(n, axis=-1), 1.0)
    assert normal_deviation(p_patch) < 5e-3
    assert np.allclose(stereographic_normal([0j, np.inf + 0j, -np.inf + 0j]),
                       [[1, 0, 0], [0, 0, 1], [0, 0, -1]])


def test_conformal_and_harmonic(p_patch, schwarz_p):
    assert conformality_error(p_patch) < 1e-2
    fine = make_patch(schwarz_p, 64, 32)
    assert conformality_error(fine) < conformality_error(p_patch)
    assert harmonicity_residual(fine) < harmonicity_residual(p_patch)


def test_boundary_planes(p_patch):
    planes = {k: plane_of(p_patch, k) for k in p_patch.labels}
    assert set(planes) == {"lower:0", "lower:1", "upper:0"}
    for pl in planes.values():
        assert pl.residual < 1e-9
    a = dihedral_angle(planes["lower:0"], planes["upper:0"])
    assert a == pytest.approx(math.pi / 4, abs=1e-8)
    assert line_angle(planes["lower:0"], planes["lower:1"]) == pytest.approx(math.pi / 2, abs=1e-8)
    assert plane_gap(planes["lower:0"], planes["lower:0"]) == 0.0
    with pytest.raises(KeyError):
        plane_of(p_patch, "upper:3")


def test_labels(schwarz_p):
    labs = interval_labels(schwarz_p, "lower")
    assert labs["lower:0"] == (-0.25, 0.25)
    assert label_of(schwarz_p, "lower", 0.1) == "lower:0"
    assert label_of(schwarz_p, "lower", 0.5) == "lower:1"
    assert label_of(schwarz_p, "lower", 0.9) == "lower:0"
    assert interval_labels(schwarz_p, "upper") == {"upper:0": (-math.inf, math.inf)}


def test_vertical_period():
    rng = np.random.default_rng(5)
    for _ in range(3):
        ds = random_symmetric_divisor(rng).expand()
        assert vertical_period_error(ds) < 1e-10


def test_moved_frame_composes(p_patch):
    c, s = math.cos(0.3), math.sin(0.3)
    rot = np.array([[c, -s, 0], [s, c, 0], [0, 0, 1.0]])
    shift = np.array([1.0, 2.0, 3.0])
    twice = p_patch.moved(rot, shift).moved(rot.T, -rot.T @ shift)
    assert np.allclose(twice.points, p_patch.points, atol=1e-12)
    moved = p_patch.moved(rot, shift)
    assert np.allclose(moved.normals, p_patch.normals @ rot.T)


def test_conjugate_twice_is_point_reflection(p_patch):
    cc = conjugate_patch(conjugate_patch(p_patch))
    assert np.allclose(cc.points, -p_patch.points, atol=1e-12)
    assert np.allclose(conjugate_patch(p_patch).normals, p_patch.normals)


def test_conjugate_boundaries_are_straight(p_patch):
    conj = conjugate_patch(p_patch)
    X = conj.points
    row = X[0, p_patch.labels["lower:1"]]
    d = row - row[0]
    d = d[1:] / np.linalg.norm(d[1:], axis=1, keepdims=True)
    assert np.max(np.abs(np.abs(d @ d[-1]) - 1.0)) < 1e-9


def test_resolution_and_range_validation(schwarz_p):
    with pytest.raises(ValueError):
        make_patch(schwarz_p, 4, 16)
    with pytest.raises(ValueError):
        make_patch(schwarz_p, 16, 16, (0.5, 0.2))


def test_half_range_patch_matches_full(schwarz_p):
    full = make_patch(schwarz_p, 32, 8)
    half = make_patch(schwarz_p, 16, 8, (0.0, 0.5))
    assert np.allclose(half.points, full.points[:, :17], atol=1e-12)


def test_corner_nodes_get_infinite_log(p_patch, schwarz_p):
    corner = prevertex_distance(p_patch.z, schwarz_p) < 1e-12
    assert corner.sum() == 2
    assert np.all(np.isinf(p_patch.log_g[corner].real))


def test_degenerate_edge():
    from scminimal.divisor import SymmetricDivisorSpec
    from scminimal.theta import TorusParams
    ds = SymmetricDivisorSpec(TorusParams(1.0), (0.49,), (0.5,)).expand()
    patch = make_patch(ds, 8, 8)
    with pytest.raises(DegenerateEdge):
        plane_of(patch, "lower:1")


@pytest.mark.parametrize("rst", [(2, 3, 6), (3, 2, 6), (4, 2, 4), (6, 2, 3)])
def test_upside_down_duality(rst):
    from scminimal.catalog import basic_family
    from scminimal.divisor import SymmetricDivisorSpec
    from scminimal.theta import TorusParams
    t = TorusParams(1.0)
    r, s, u = rst

    def divisor(triple):
        _, half = basic_family(*triple)
        return SymmetricDivisorSpec(t, half.lower_points, half.lower_exponents).expand()

    # (r, t, s) is (r, s, t) with the strip shifted by half a period
    a = make_patch(divisor((r, s, u)), 24, 12, (0.5, 1.5)).points.reshape(-1, 3)
    b = make_patch(divisor((r, u, s)), 24, 12).points.reshape(-1, 3)
    ca, cb = a - a.mean(0), b - b.mean(0)
    U, _, Vt = np.linalg.svd(cb.T @ ca)
    R = U @ Vt
    assert np.max(np.abs(ca @ R.T - cb)) < 1e-8
    assert np.linalg.det(R) < 0
