"""Pre-vertex and exponent data for periodic polygons.

A :class:`DivisorSpec` lists the pre-vertices ``p_i`` on the real edge and
``q_j = Re q_j + i d/2`` on the upper edge of the strip, each with an exponent.
The Gauss map is the product of theta powers

    G(z) = prod theta(z - p_i)^{a_i} * prod theta(z - q_j)^{b_j}

and the polygon has interior angle pi (a_i + 1) at the image of p_i.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational, Real

import numpy as np

from .errors import OutOfRange, OverlappingPoints
from .theta import TorusParams

_SUM_TOL = 1e-12
_TRIANGLE_ORDERS = (2, 3, 4, 6)


def as_number(x):
    """Keep rationals exact, parse 'n/m' strings, otherwise coerce to float."""
    if isinstance(x, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(x, Fraction):
        return x
    if isinstance(x, Rational):
        return Fraction(int(x.numerator), int(x.denominator))
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, Real):
        return float(x)
    raise TypeError(f"cannot interpret {x!r} as a real number")


def _fmt(x):
    return str(x) if isinstance(x, Fraction) else float(x)


def _exact(values) -> bool:
    return all(isinstance(v, Fraction) for v in values)


def _check_sum(values, edge):
    if _exact(values):
        if sum(values, Fraction(0)) != 0:
            raise ValueError(f"{edge} exponents must sum to zero, got {sum(values)}")
    elif abs(math.fsum(float(v) for v in values)) > _SUM_TOL:
        raise ValueError(f"{edge} exponents must sum to zero")


def _check_points(points, lo, hi, edge, closed_hi=False):
    for x in points:
        ok = lo < x <= hi if closed_hi else lo < x < hi
        if not ok:
            raise ValueError(f"{edge} point {x} outside ({lo}, {hi})")
    for x0, x1 in zip(points[:-1], points[1:]):
        if not x1 > x0:
            raise ValueError(f"{edge} points must be strictly increasing")


def _check_exponents(exps, edge):
    for e in exps:
        if not -1 < e < 1:
            raise ValueError(f"{edge} exponent {e} outside (-1, 1)")


@dataclass(frozen=True)
class DivisorSpec:
    t: TorusParams
    lower_points: tuple = ()
    lower_exponents: tuple = ()
    upper_points: tuple = ()
    upper_exponents: tuple = ()

    def __post_init__(self):
        for name in ("lower_points", "lower_exponents", "upper_points", "upper_exponents"):
            object.__setattr__(self, name, tuple(as_number(v) for v in getattr(self, name)))
        for edge in ("lower", "upper"):
            pts = getattr(self, f"{edge}_points")
            exps = getattr(self, f"{edge}_exponents")
            if len(pts) != len(exps):
                raise ValueError(f"{edge}: {len(pts)} points but {len(exps)} exponents")
            _check_points(pts, 0, 1, edge)
            _check_exponents(exps, edge)
            _check_sum(exps, edge)

    @property
    def m(self) -> int:
        return len(self.lower_points)

    @property
    def n(self) -> int:
        return len(self.upper_points)

    def prevertices(self):
        """Complex positions of all pre-vertices, lower edge first."""
        h = self.t.height
        return np.array([complex(p) for p in self.lower_points]
                        + [complex(float(q), h) for q in self.upper_points])

    def factors(self):
        """(center, exponent, side) triples; side selects the log-theta branch."""
        h = self.t.height
        out = [(complex(float(p), 0.0), float(a), "upper")
               for p, a in zip(self.lower_points, self.lower_exponents)]
        out += [(complex(float(q), h), float(b), "lower")
                for q, b in zip(self.upper_points, self.upper_exponents)]
        return out

    def edge(self, edge: str):
        """(points, exponents) of one edge as float arrays."""
        if edge not in ("lower", "upper"):
            raise ValueError("edge must be 'lower' or 'upper'")
        pts = np.array([float(x) for x in getattr(self, f"{edge}_points")])
        exps = np.array([float(x) for x in getattr(self, f"{edge}_exponents")])
        return pts, exps

    def exponent_at(self, z: complex, tol: float = 1e-12) -> float:
        """Exponent of G at ``z`` if ``z`` is a pre-vertex (mod 1), else 0."""
        z = complex(z)
        for edge, y in (("lower", 0.0), ("upper", self.t.height)):
            if abs(z.imag - y) > tol:
                continue
            pts, exps = self.edge(edge)
            for x, e in zip(pts, exps):
                dx = z.real - x
                if abs(dx - round(dx)) <= tol:
                    return float(e)
        return 0.0

    def interior_angles(self, edge: str):
        """Polygon angles pi (e + 1) at the images of the pre-vertices of ``edge``."""
        _, exps = self.edge(edge)
        return np.pi * (exps + 1.0)

    def to_dict(self) -> dict:
        return {
            "d": self.t.d,
            "lower_points": [_fmt(x) for x in self.lower_points],
            "lower_exponents": [_fmt(x) for x in self.lower_exponents],
            "upper_points": [_fmt(x) for x in self.upper_points],
            "upper_exponents": [_fmt(x) for x in self.upper_exponents],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DivisorSpec":
        return cls(TorusParams(float(data["d"])),
                   tuple(data.get("lower_points", ())), tuple(data.get("lower_exponents", ())),
                   tuple(data.get("upper_points", ())), tuple(data.get("upper_exponents", ())))


@dataclass(frozen=True)
class SymmetricDivisorSpec:
    """Half-data of a divisor symmetric about the imaginary axis.

    Each stored point x with exponent e stands for the pair (x, e), (-x, -e).
    Points live in (0, 1/2]; a point at 1/2 collides with its own mirror and
    is rejected by :func:`expand`.
    """

    t: TorusParams
    lower_points: tuple = ()
    lower_exponents: tuple = ()
    upper_points: tuple = ()
    upper_exponents: tuple = ()

    def __post_init__(self):
        for name in ("lower_points", "lower_exponents", "upper_points", "upper_exponents"):
            object.__setattr__(self, name, tuple(as_number(v) for v in getattr(self, name)))
        for edge in ("lower", "upper"):
            pts = getattr(self, f"{edge}_points")
            exps = getattr(self, f"{edge}_exponents")
            if len(pts) != len(exps):
                raise ValueError(f"{edge}: {len(pts)} points but {len(exps)} exponents")
            _check_points(pts, 0, Fraction(1, 2), edge, closed_hi=True)
            _check_exponents(exps, edge)

    def expand(self) -> DivisorSpec:
        return expand(self)

    def to_dict(self) -> dict:
        out = DivisorSpec.to_dict(self)  # same field layout
        out["symmetric"] = True
        return out


def _mirror(points, exps, edge):
    pairs = []
    for x, e in zip(points, exps):
        if x == Fraction(1, 2) or (isinstance(x, float) and abs(x - 0.5) < 1e-15):
            raise OverlappingPoints(f"{edge} point {x} coincides with its mirror image")
        pairs.append((x, e))
        pairs.append((1 - x, -e))
    pairs.sort(key=lambda pe: float(pe[0]))
    for (x0, _), (x1, _) in zip(pairs[:-1], pairs[1:]):
        if float(x1) - float(x0) <= 1e-15:
            raise OverlappingPoints(f"{edge} points {x0} and {x1} overlap after mirroring")
    return tuple(p for p, _ in pairs), tuple(e for _, e in pairs)


def expand(s: SymmetricDivisorSpec) -> DivisorSpec:
    """Full divisor with the mirror points -x = 1 - x (mod 1) and negated exponents."""
    lp, le = _mirror(s.lower_points, s.lower_exponents, "lower")
    up, ue = _mirror(s.upper_points, s.upper_exponents, "upper")
    return DivisorSpec(s.t, lp, le, up, ue)


def restrict(dspec: DivisorSpec, tol: float = 1e-12) -> SymmetricDivisorSpec:
    """Inverse of :func:`expand`; raises ValueError if ``dspec`` is not symmetric."""
    halves = {}
    for edge in ("lower", "upper"):
        pts = getattr(dspec, f"{edge}_points")
        exps = getattr(dspec, f"{edge}_exponents")
        keep = [(x, e) for x, e in zip(pts, exps) if float(x) < 0.5]
        mirrored = sorted(((1 - x, -e) for x, e in keep), key=lambda pe: float(pe[0]))
        rest = [(x, e) for x, e in zip(pts, exps) if float(x) >= 0.5]
        if len(rest) != len(mirrored) or any(
                abs(float(x0) - float(x1)) > tol or abs(float(e0) - float(e1)) > tol
                for (x0, e0), (x1, e1) in zip(rest, mirrored)):
            raise ValueError(f"{edge} edge is not mirror symmetric")
        halves[edge] = keep
    return SymmetricDivisorSpec(
        dspec.t,
        tuple(x for x, _ in halves["lower"]), tuple(e for _, e in halves["lower"]),
        tuple(x for x, _ in halves["upper"]), tuple(e for _, e in halves["upper"]))


def plane_angle_basic(a, p) -> float:
    """Signed angle pi a (2p - 1) between the plane over [-p, p] and the upper plane."""
    return math.pi * float(a) * (2 * float(p) - 1)


def plane_angle_coefficient(s: SymmetricDivisorSpec):
    """Angle between the planes over [-p_1, p_1] and [-q_1, q_1], in units of pi.

    Exact (a Fraction) when all half-data are rational.
    """
    terms = [(a, p) for p, a in zip(s.lower_points, s.lower_exponents)]
    terms += [(b, q) for q, b in zip(s.upper_points, s.upper_exponents)]
    if _exact([v for pair in terms for v in pair]):
        return sum((e * (2 * x - 1) for e, x in terms), Fraction(0))
    return math.fsum(float(e) * (2 * float(x) - 1) for e, x in terms)


def plane_angle_general(s: SymmetricDivisorSpec) -> float:
    return math.pi * float(plane_angle_coefficient(s))


def basic_p(r: int, s: int) -> Fraction:
    """Pre-vertex p = (rs - r - s) / (2 (r-1) s) of the basic family."""
    if r not in _TRIANGLE_ORDERS or s not in _TRIANGLE_ORDERS:
        raise OutOfRange(f"r, s must be in {_TRIANGLE_ORDERS}, got ({r}, {s})")
    p = Fraction(r * s - r - s, 2 * (r - 1) * s)
    if not 0 < p <= Fraction(1, 2):
        raise OutOfRange(f"(r, s) = ({r}, {s}) gives p = {p} outside (0, 1/2]")
    return p
