import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import mp_theta, mp_theta_prime
from scminimal.errors import DomainTooThin, PoleProximity
from scminimal.theta import TorusParams, lattice_distance, log_deriv, log_theta, theta, theta_prime

heights = st.floats(0.3, 3.0)
coords = st.floats(-0.5, 0.5)


@pytest.mark.parametrize("d", [0.5, 1.0, 2.0])
def test_matches_mpmath(d):
    t = TorusParams(d)
    rng = np.random.default_rng(1)
    z = rng.uniform(-1, 1, 40) + 1j * rng.uniform(-1, 1, 40) * d
    ref = np.array([mp_theta(w, d) for w in z])
    refp = np.array([mp_theta_prime(w, d) for w in z])
    assert np.max(np.abs(theta(z, t) - ref) / np.abs(ref)) < 1e-12
    assert np.max(np.abs(theta_prime(z, t) - refp) / np.maximum(1, np.abs(refp))) < 1e-11


def test_scalar_in_scalar_out(torus):
    assert isinstance(theta(0.3, torus), complex)
    assert theta(np.zeros((2, 3)), torus).shape == (2, 3)


@settings(max_examples=60, deadline=None)
@given(d=heights, x=coords, y=st.floats(-0.5, 0.5))
def test_quasi_periodicity(d, x, y):
    t = TorusParams(d)
    z = complex(x, y * d)
    th = theta(z, t)
    scale = max(1.0, abs(th))
    assert abs(theta(-z, t) + th) < 1e-12 * scale
    assert abs(theta(z + 1, t) + th) < 1e-12 * scale
    want = -np.exp(-1j * np.pi * t.tau - 2j * np.pi * z) * th
    assert abs(theta(z + t.tau, t) - want) < 1e-11 * max(1.0, abs(want))


@settings(max_examples=60, deadline=None)
@given(d=heights, x=coords, y=st.floats(0.0, 1.0), side=st.sampled_from(["upper", "lower"]))
def test_log_theta_exponentiates_to_theta(d, x, y, side):
    t = TorusParams(d)
    w = complex(x, y * d if side == "upper" else -y * d)
    if lattice_distance(w, t) < 1e-3:
        return
    assert abs(np.exp(log_theta(w, t, side)) - theta(w, t)) < 1e-11 * max(1.0, abs(theta(w, t)))


def test_log_theta_is_continuous_off_the_edge(torus):
    x = np.linspace(-3.3, 3.3, 4001)
    for side, y in (("upper", 0.02), ("lower", -0.02)):
        lt = log_theta(x + 1j * y, torus, side)
        assert np.max(np.abs(np.diff(lt))) < 0.2


def test_log_theta_shift_is_exact(torus):
    w = 1e-9 + 1e-9j
    base = log_theta(w, torus)
    assert abs(log_theta(w, torus, shift=3) - (base - 3j * np.pi)) < 1e-12


def test_log_deriv_pole_guard(torus):
    with pytest.raises(PoleProximity):
        log_deriv(1e-8, torus)
    with pytest.raises(PoleProximity):
        log_deriv(2 + torus.tau + 1e-9, torus)
    assert np.isfinite(log_deriv(0.01, torus))


def test_log_deriv_tau_jump(torus):
    z = 0.17 + 0.21j
    assert abs(log_deriv(z + torus.tau, torus) - log_deriv(z, torus) + 2j * np.pi) < 1e-11


def test_reality_on_real_line():
    t = TorusParams(0.7)
    x = np.linspace(-2, 2, 101)
    assert np.max(np.abs(theta(x, t).imag)) == 0.0


def test_torus_validation():
    with pytest.raises(DomainTooThin):
        TorusParams(0.01)
    for bad in (0.0, -1.0, math.inf, math.nan):
        with pytest.raises(ValueError):
            TorusParams(bad)
    with pytest.raises(ValueError):
        TorusParams(1.0, pole_radius=0.0)


def test_series_length_grows_for_thin_tori():
    assert TorusParams(0.1).n_terms() > TorusParams(1.0).n_terms()
    assert TorusParams(1.0).n_terms(ymax=3.0) > TorusParams(1.0).n_terms()


@pytest.mark.parametrize("d", [0.5, 1.0, 2.0])
def test_zeros_only_on_the_lattice(d):
    t = TorusParams(d)
    x, y = np.meshgrid(np.linspace(-0.5, 0.5, 201), np.linspace(-0.5, 0.5, 201) * d)
    z = (x + 1j * y).reshape(-1)
    far = lattice_distance(z, t) >= 0.05
    assert np.min(np.abs(theta(z[far], t))) > 0.05 * abs(theta_prime(0.0, t)) * 0.9


def test_log_deriv_matches_quotient(torus):
    rng = np.random.default_rng(4)
    z = rng.uniform(-0.5, 0.5, 200) + 1j * rng.uniform(-0.5, 0.5, 200)
    z = z[lattice_distance(z, torus) > 0.05]
    q = theta_prime(z, torus) / theta(z, torus)
    assert np.max(np.abs(log_deriv(z, torus) - q) / np.abs(q)) < 1e-12
