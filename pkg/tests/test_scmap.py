import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import oracle_from_half
from scminimal.divisor import SymmetricDivisorSpec
from scminimal.errors import PoleProximity
from scminimal.scmap import (BranchState, gauss_map, log_gauss_map, phi, polygon_image,
                             prevertex_distance, translation)
from scminimal.theta import TorusParams
from scminimal.verify import random_symmetric_divisor


def _divisor(seed, d=None):
    return random_symmetric_divisor(np.random.default_rng(seed), d)


def test_normalized_positive_at_origin():
    for seed in range(5):
        ds = _divisor(seed).expand()
        g = gauss_map(0.0, ds)
        assert abs(g.imag) < 1e-14 and g.real > 0


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10_000), x=st.floats(0.01, 0.99), y=st.floats(0.02, 0.98))
def test_mirror_and_period_symmetry(seed, x, y):
    ds = _divisor(seed).expand()
    z = complex(x, y * ds.t.height)
    if prevertex_distance(z, ds) < 1e-3 or prevertex_distance(-z.conjugate() + 1, ds) < 1e-3:
        return
    g = gauss_map(z, ds)
    assert abs(gauss_map(1 - z.conjugate(), ds) - 1 / np.conj(g)) < 1e-10 * max(1, abs(1 / g))
    lg = log_gauss_map(z, ds)
    assert abs(np.exp(lg) - g) < 1e-12 * max(1, abs(g))


def test_log_branch_is_continuous_in_the_strip():
    ds = _divisor(3).expand()
    h = ds.t.height
    for y in (0.01 * h, 0.5 * h, 0.99 * h):
        x = np.linspace(0.0, 1.0, 3001)
        lg = log_gauss_map(x + 1j * y, ds)
        assert np.max(np.abs(np.diff(lg))) < 0.5


def test_branch_state_agrees_with_closed_branch():
    ds = _divisor(7).expand()
    br = BranchState(ds)
    path = np.linspace(0, 1, 200) * (0.37 + 0.8j * ds.t.height)
    g = br.advance(path[1:])
    assert np.allclose(g, gauss_map(path[1:], ds), rtol=1e-11)
    assert br.arg == pytest.approx(log_gauss_map(path[-1], ds).imag, abs=1e-10)


def test_pole_guard():
    ds = _divisor(1).expand()
    p = float(ds.lower_points[0])
    with pytest.raises(PoleProximity):
        gauss_map(p + 1e-9, ds)
    with pytest.raises(ValueError):
        gauss_map(0.1 - 0.2j, ds)


def test_against_ode_oracle():
    t = TorusParams(0.8)
    lp, le, up, ue = (0.11, 0.34), (0.55, -0.3), (0.23,), (-0.45,)
    ds = SymmetricDivisorSpec(t, lp, le, up, ue).expand()
    o = oracle_from_half(lp, le, up, ue, t.d)
    for z in (0.4j, 0.5 + 0.4j, 0.3 + 0.17j):
        lg, p1, p2 = o.at(z)
        assert abs(phi(ds, z) - p1) < 1e-10
        assert abs(phi(ds, z, "1/G") - p2) < 1e-10
        assert abs(gauss_map(z, ds) - np.exp(lg)) < 1e-10
    assert abs(translation(ds) - o.translation()) < 1e-10


def test_translation_conjugate_pair():
    for seed in range(4):
        ds = _divisor(seed).expand()
        assert abs(translation(ds, "G") - np.conj(translation(ds, "1/G"))) < 1e-11


def test_phi_is_additive_over_periods():
    ds = _divisor(11).expand()
    z = 0.21 + 0.3j * ds.t.height
    assert abs(phi(ds, z + 1) - phi(ds, z) - translation(ds)) < 1e-11


@pytest.mark.parametrize("seed", range(6))
def test_polygon_angles(seed):
    ds = _divisor(seed).expand()
    for edge in ("lower", "upper"):
        if not getattr(ds, f"{edge}_points"):
            continue
        img = polygon_image(ds, edge, periods=2)
        want = np.pi * (img.exponents + 1.0)
        got = img.interior_angles()
        diff = np.angle(np.exp(1j * (got - want)))
        assert np.max(np.abs(diff)) < 1e-9


def test_polygon_is_periodic():
    ds = _divisor(2).expand()
    img = polygon_image(ds, "lower", periods=2)
    m = ds.m
    assert np.allclose(img.vertices[m:], img.vertices[:m] + img.v, atol=1e-11)
    assert abs(img.v - translation(ds)) < 1e-11
    text = img.to_csv()
    assert text.startswith("index,x,y\r\n") and text.count("\r\n") == len(img.vertices) + 1


def test_polygon_periods_validation():
    with pytest.raises(ValueError):
        polygon_image(_divisor(0).expand(), periods=0)


def test_phi2_image_mirrors_phi1_image():
    # Phi_2(z) = -conj Phi_1(-conj z): the two images are mirror images
    for seed in range(4):
        ds = _divisor(seed).expand()
        v = translation(ds)
        h = ds.t.height
        for z in (0.3 + 0.2j * h, 0.5 + 1j * h, 0.71 + 0.9j * h, 0.44 + 0j):
            if prevertex_distance(z, ds) < 1e-3:
                continue
            mirrored = phi(ds, 1 - z.conjugate()) - v
            assert abs(phi(ds, z, "1/G") + np.conj(mirrored)) < 1e-11
