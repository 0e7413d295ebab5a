"""Adaptive Gauss-Jacobi quadrature along straight complex segments.

Integrands are allowed an algebraic endpoint singularity

    f(z) ~ c (z - z0)^e0   near z0,     f(z) ~ c (z1 - z)^e1   near z1,

with e0, e1 > -1.  Each panel uses a Gauss-Jacobi rule whose weight carries
the singular factor, so a panel touching a pre-vertex is integrated to full
accuracy without grading.  Panels are bisected until the panel estimate
agrees with the sum over its two halves.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi

from .errors import QuadratureNonConvergence

DEFAULT_ORDER = 20
DEFAULT_TOL = 1e-13
MAX_DEPTH = 50


@lru_cache(maxsize=256)
def jacobi_rule(n: int, e0: float, e1: float):
    """Nodes and weights on [-1, 1] for the weight (1 + x)^e0 (1 - x)^e1."""
    x, w = roots_jacobi(n, e1, e0)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def _apply(f, a, b, ea, eb, order, local=False):
    """One Gauss-Jacobi panel per row of (a, b, ea, eb)."""
    out = np.empty(a.shape, dtype=complex)
    keys = np.stack([ea, eb], axis=1)
    for key in np.unique(keys, axis=0):
        sel = np.all(keys == key, axis=1)
        x, w = jacobi_rule(order, float(key[0]), float(key[1]))
        weight = (1.0 + x) ** key[0] * (1.0 - x) ** key[1]
        h = 0.5 * (b[sel] - a[sel])[:, None]
        if local:
            # offsets from the nearer panel end keep full relative precision
            # next to a singular endpoint
            left = x < 0
            base = np.where(left, a[sel][:, None], b[sel][:, None])
            delta = np.where(left, h * (x + 1.0), -h * (1.0 - x))
            vals = np.asarray(f(base, delta), dtype=complex) / weight
        else:
            z = a[sel][:, None] + h * (x + 1.0)[None, :]
            vals = np.asarray(f(z), dtype=complex) / weight
        out[sel] = h[:, 0] * (vals @ w)
    return out


def integrate_segments(f, z0, z1, e0=0.0, e1=0.0, *, order: int = DEFAULT_ORDER,
                       tol: float = DEFAULT_TOL, max_depth: int = MAX_DEPTH, local: bool = False):
    """Integrate ``f`` along each straight segment z0[k] -> z1[k].

    ``f`` must accept a complex array of any shape; with ``local=True`` it is
    called as ``f(base, delta)`` for the points base + delta, where base is a
    panel end and delta the (small) offset from it.  ``e0`` and ``e1`` are the
    singular exponents at the segment ends (0 where the integrand is regular).
    Returns an array of integrals with the broadcast shape of the inputs.
    """
    z0, z1, e0, e1 = np.broadcast_arrays(np.asarray(z0, dtype=complex), np.asarray(z1, dtype=complex),
                                         np.asarray(e0, dtype=float), np.asarray(e1, dtype=float))
    shape = z0.shape
    a, b = z0.reshape(-1).copy(), z1.reshape(-1).copy()
    ea, eb = e0.reshape(-1).copy(), e1.reshape(-1).copy()
    total = np.zeros(a.shape, dtype=complex)
    ids = np.arange(a.size)
    if a.size == 0:
        return total.reshape(shape)
    whole = _apply(f, a, b, ea, eb, order, local)
    zero = np.zeros_like(ea)
    for _ in range(max_depth + 1):
        m = 0.5 * (a + b)
        left = _apply(f, a, m, ea, zero, order, local)
        right = _apply(f, m, b, zero, eb, order, local)
        halves = left + right
        done = np.abs(whole - halves) <= tol * np.maximum(1.0, np.abs(halves))
        np.add.at(total, ids[done], halves[done])
        if np.all(done):
            return total.reshape(shape)
        keep = ~done
        ids = np.concatenate([ids[keep], ids[keep]])
        a, b = np.concatenate([a[keep], m[keep]]), np.concatenate([m[keep], b[keep]])
        ea, eb = np.concatenate([ea[keep], zero[keep]]), np.concatenate([zero[keep], eb[keep]])
        whole = np.concatenate([left[keep], right[keep]])
        zero = np.zeros_like(ea)
    worst = float(np.max(np.abs(whole)))
    raise QuadratureNonConvergence(
        f"{np.unique(ids).size} segment(s) unresolved after {max_depth} bisections "
        f"(panel magnitude {worst:.3g}, tol {tol:.1e})")
