"""Jacobi theta function on rectangular tori.

The function evaluated here is

    theta(z) = 2 * sum_{n>=0} (-1)^n q^{(n+1/2)^2} sin((2n+1) pi z),  q = exp(-pi d),

with tau = i d.  It is odd, has simple zeros exactly on Z + tau Z and obeys

    theta(z + 1)   = -theta(z)
    theta(z + tau) = -exp(-pi i tau - 2 pi i z) theta(z).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainTooThin, PoleProximity

MIN_HEIGHT = 0.05
# log(1e-17): terms below this fraction of the dominant term are dropped
_TAIL = 39.0


@dataclass(frozen=True)
class TorusParams:
    """Rectangular torus C / <1, i d>.

    ``pole_radius`` is the exclusion radius used when evaluating quotients
    that blow up on the lattice.
    """

    d: float
    pole_radius: float = 1e-6

    def __post_init__(self):
        d = float(self.d)
        if not math.isfinite(d) or d <= 0:
            raise ValueError(f"torus height must be positive and finite, got {self.d!r}")
        if d < MIN_HEIGHT:
            raise DomainTooThin(f"d = {d} is below the supported minimum {MIN_HEIGHT}")
        if not self.pole_radius > 0:
            raise ValueError("pole_radius must be positive")
        object.__setattr__(self, "d", d)

    @property
    def tau(self) -> complex:
        return complex(0.0, self.d)

    @property
    def height(self) -> float:
        """Height of the strip 0 <= Im z <= d/2."""
        return 0.5 * self.d

    @property
    def nome(self) -> float:
        return math.exp(-math.pi * self.d)

    def n_terms(self, ymax: float = 0.0) -> int:
        """Series length for |Im z| <= ymax.

        The n-th term has size exp(-pi d (n+1/2)^2 + (2n+1) pi |y|), which peaks
        near n + 1/2 = |y|/d; we stop once the Gaussian tail is 1e-17 of the peak.
        """
        ymax = abs(float(ymax))
        return int(math.ceil(ymax / self.d + math.sqrt(_TAIL / (math.pi * self.d)))) + 1

    def product_terms(self) -> int:
        """Factors kept in the triple product used by :func:`log_theta`."""
        return int(math.ceil(0.5 * (_TAIL / (math.pi * self.d) + 1.0))) + 1


def _prepare(z):
    arr = np.asarray(z, dtype=complex)
    if not np.all(np.isfinite(arr)):
        raise ValueError("theta functions require finite arguments")
    return arr, arr.ndim == 0


def _finish(out, scalar):
    return complex(out) if scalar else out


def _series(z, t: TorusParams, derivative: bool):
    ymax = float(np.max(np.abs(z.imag))) if z.size else 0.0
    n = np.arange(t.n_terms(ymax))
    k = 2 * n + 1
    coef = 2.0 * np.where(n % 2 == 0, 1.0, -1.0) * np.exp(-math.pi * t.d * (n + 0.5) ** 2)
    arg = np.pi * np.multiply.outer(z, k)
    if derivative:
        return np.cos(arg) @ (coef * np.pi * k)
    if np.all(z.imag == 0):
        # manifestly real for real input
        return (np.sin(arg.real) @ coef).astype(complex)
    return np.sin(arg) @ coef


def theta(z, t: TorusParams):
    """theta(z, i d); vectorized over ``z``."""
    z, scalar = _prepare(z)
    return _finish(_series(z, t, derivative=False), scalar)


def theta_prime(z, t: TorusParams):
    """Derivative of :func:`theta` by term-wise differentiation."""
    z, scalar = _prepare(z)
    return _finish(_series(z, t, derivative=True), scalar)


def lattice_distance(z, t: TorusParams):
    """Distance from ``z`` to the nearest point of Z + tau Z."""
    z = np.asarray(z, dtype=complex)
    x = z.real - np.round(z.real)
    y = z.imag - t.d * np.round(z.imag / t.d)
    return np.hypot(x, y)


def log_deriv(z, t: TorusParams, exclusion: float | None = None):
    """h(z) = theta'(z) / theta(z).

    Raises PoleProximity when ``z`` lies within ``exclusion`` (default
    ``t.pole_radius``) of the lattice.
    """
    z, scalar = _prepare(z)
    radius = t.pole_radius if exclusion is None else exclusion
    dist = lattice_distance(z, t)
    if np.any(dist < radius):
        bad = z.reshape(-1)[np.argmin(dist.reshape(-1))]
        raise PoleProximity(f"z = {bad} is within {radius} of a lattice point")
    return _finish(_series(z, t, True) / _series(z, t, False), scalar)


def log_theta(w, t: TorusParams, side: str = "upper", shift=0):
    """Holomorphic logarithm of theta on a closed half-strip.

    ``side="upper"`` is valid for 0 <= Im w <= d, ``side="lower"`` for
    -d <= Im w <= 0.  Both come from the triple product

        theta(w) = 2 q^{1/4} sin(pi w) prod_n (1 - q^{2n})(1 - q^{2n} e^{2 pi i w})(1 - q^{2n} e^{-2 pi i w})

    with sin(pi w) written through e^{+-2 pi i w} so that each logarithm
    stays on its principal branch.  The two sides differ on the real axis by
    a constant multiple of pi i on each unit interval.

    ``shift`` is an integer (array) added to ``w`` exactly; passing a small
    ``w`` with a separate integer part avoids cancellation next to the
    translated zeros w = k.
    """
    w, scalar = _prepare(w)
    if side not in ("upper", "lower"):
        raise ValueError("side must be 'upper' or 'lower'")
    nome = t.nome
    # shift to |Re w| <= 1/2 first: theta(w + 1) = -theta(w), and the phase
    # of e^{2 pi i w} near a translated zero would otherwise lose digits
    k = np.round(w.real)
    w = w - k
    k = k + np.asarray(shift)
    if side == "upper":
        e = np.exp(2j * np.pi * w)
        out = 0.5j * np.pi - 1j * np.pi * w + np.log(-np.expm1(2j * np.pi * w))
    else:
        e = np.exp(-2j * np.pi * w)
        out = -0.5j * np.pi + 1j * np.pi * w + np.log(-np.expm1(-2j * np.pi * w))
    # e is e^{+-2 pi i w} with |e| <= 1 on the chosen side; 1/e is the other factor
    inv = 1.0 / e
    out = out + 0.25 * math.log(nome) + (-1j if side == "upper" else 1j) * np.pi * k
    for n in range(1, t.product_terms() + 1):
        q2 = nome ** (2 * n)
        out = out + (math.log1p(-q2) + np.log1p(-q2 * e) + np.log1p(-q2 * inv))
    return _finish(out, scalar)
