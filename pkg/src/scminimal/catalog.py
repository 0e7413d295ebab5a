"""Named families of symmetric divisors.

Every family stores half-data exponents on the lower edge (at p_i) and the
upper edge (at Re q_j), the angle target fixing the linear constraint among
the points, and the pairs of boundary planes that must coincide.  Plane
labels follow :func:`weierstrass.interval_labels`: on an expanded symmetric
divisor ``lower:0`` is the interval [-p_1, p_1] and ``upper:k`` runs from
q_k to q_{k+1} (``upper:0`` is [-q_1, q_1]).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce

from .divisor import SymmetricDivisorSpec, basic_p
from .errors import ConstraintInfeasible, InvalidTriple
from .theta import TorusParams

F = Fraction

EUCLIDEAN_TRIPLES = ((2, 3, 6), (2, 4, 4), (2, 6, 3), (3, 2, 6), (3, 3, 3),
                     (3, 6, 2), (4, 2, 4), (4, 4, 2), (6, 2, 3), (6, 3, 2))

BASIC_TABLE = (
    ("Schwarz P", (2, 4, 4), F(1, 4)),
    ("Schoen H'-T", (2, 6, 3), F(1, 3)),
    ("Schoen H'-T", (2, 3, 6), F(1, 6)),
    ("Schwarz H", (3, 3, 3), F(1, 4)),
    ("Schoen H''-R", (3, 2, 6), F(1, 8)),
    ("Schoen H''-R", (3, 6, 2), F(3, 8)),
    ("Schoen S'-S''", (4, 4, 2), F(1, 3)),
    ("Schoen S'-S''", (4, 2, 4), F(1, 6)),
    ("Schoen T'-R", (6, 2, 3), F(1, 5)),
    ("Schoen T'-R", (6, 3, 2), F(3, 10)),
)

# (r, s) -> (coefficient of p, coefficient of Re q, right-hand side)
EQUAL_SIGN_TABLE = {
    (2, 3): (6, 8, 1),
    (2, 4): (4, 6, 1),
    (3, 6): (8, 10, 3),
    (6, 2): (5, 3, 1),
}

# (r, s) -> (name, relation); a relation is either a linear row or, for the
# two symmetric surfaces, the tabulated solution point (p, Re q)
OPPOSITE_SIGN_TABLE = {
    (2, 4): ("", ("linear", (2, -3, -1))),
    (2, 6): ("", ("linear", (6, -10, -3))),
    (2, 3): ("", ("linear", (6, -8, -3))),
    (3, 6): ("", ("linear", (4, -5, -1))),
    (4, 4): ("Schoen I-WP", ("point", (F(1, 6), F(1, 3)))),
    (3, 3): ("Karcher T-WP", ("point", (F(1, 8), F(3, 8)))),
}

NEOVIUS_TRIPLES = ((2, 3, 6), (2, 4, 4), (3, 2, 6), (3, 3, 3), (4, 2, 4), (6, 2, 3))


def third_order(r: int, s: int) -> int:
    """t with 1/r + 1/s + 1/t = 1, or InvalidTriple."""
    rest = 1 - F(1, r) - F(1, s)
    if rest <= 0 or rest.numerator != 1 or (r, s, rest.denominator) not in EUCLIDEAN_TRIPLES:
        raise InvalidTriple(f"no Euclidean triangle group with r={r}, s={s}")
    return rest.denominator


def _check_triple(triple):
    r, s, t = triple
    if F(1, r) + F(1, s) + F(1, t) != 1 or tuple(triple) not in EUCLIDEAN_TRIPLES:
        raise InvalidTriple(f"{tuple(triple)} is not a Euclidean triangle group triple")


@dataclass(frozen=True)
class LinearConstraint:
    """sum coefficients[k] * x_k = rhs over the half-data points (p's first, then Re q's)."""

    coefficients: tuple
    rhs: int
    names: tuple

    def __str__(self):
        parts = []
        for c, name in zip(self.coefficients, self.names):
            if c == 0:
                continue
            sign = "-" if c < 0 else "+"
            mag = "" if abs(c) == 1 else str(abs(c))
            parts.append((sign, f"{mag}{name}"))
        text = ("-" if parts[0][0] == "-" else "") + parts[0][1]
        for sign, term in parts[1:]:
            text += f" {sign} {term}"
        return f"{text} = {self.rhs}"

    def evaluate(self, values):
        return sum(c * v for c, v in zip(self.coefficients, values)) - self.rhs

    def solve_last(self, values):
        """Value of the last variable given all the others."""
        head = sum(c * v for c, v in zip(self.coefficients[:-1], values))
        return (self.rhs - head) / self.coefficients[-1]


def integer_constraint(exponents, target, names) -> LinearConstraint:
    """Clear denominators in sum e_k (2 x_k - 1) = target.

    The result is primitive (gcd 1) with a positive leading coefficient.
    """
    coeffs = [2 * F(e) for e in exponents]
    rhs = F(target) + sum((F(e) for e in exponents), F(0))
    dens = [c.denominator for c in coeffs] + [rhs.denominator]
    lcm = reduce(lambda x, y: x * y // math.gcd(x, y), dens, 1)
    ints = [int(c * lcm) for c in coeffs] + [int(rhs * lcm)]
    g = reduce(math.gcd, (abs(v) for v in ints if v), 0) or 1
    ints = [v // g for v in ints]
    lead = next(v for v in ints[:-1] if v)
    if lead < 0:
        ints = [-v for v in ints]
    return LinearConstraint(tuple(ints[:-1]), ints[-1], tuple(names))


@dataclass(frozen=True)
class FamilySpec:
    """A family of symmetric divisors with a prescribed exponent pattern.

    ``angle_target`` is the required value, in units of pi, of
    sum a_i (2 p_i - 1) + sum b_j (2 Re q_j - 1) over the half-data.
    ``pairs`` lists boundary-plane labels that must coincide.
    """

    kind: str
    triple: tuple
    lower_exponents: tuple
    upper_exponents: tuple
    angle_target: Fraction
    pairs: tuple
    name: str = ""
    default_d: float = 1.0
    n: int = 0
    symmetric_reduction: bool = False
    qualitative: bool = False
    fixed_points: tuple = field(default=None)

    @property
    def r(self):
        return self.triple[0]

    @property
    def s(self):
        return self.triple[1]

    @property
    def t(self):
        return self.triple[2]

    @property
    def point_names(self):
        m, n = len(self.lower_exponents), len(self.upper_exponents)
        lower = ["p"] if m == 1 else [f"p{i + 1}" for i in range(m)]
        upper = ["Re(q)"] if n == 1 else [f"Re(q{j + 1})" for j in range(n)]
        return tuple(lower + upper)

    @property
    def constraint(self) -> LinearConstraint | None:
        if self.kind == "basic":
            return None
        return integer_constraint(self.lower_exponents + self.upper_exponents,
                                  self.angle_target, self.point_names)

    @property
    def n_free(self) -> int:
        """Free parameters after eliminating the last point through the constraint."""
        if self.kind == "basic":
            return 0
        return len(self.lower_exponents) + len(self.upper_exponents) - 1

    @property
    def label(self) -> str:
        base = f"{self.kind} {self.triple}"
        if self.kind == "spout":
            base += f" n={self.n}"
        return f"{base} {self.name}".strip()

    def points(self, free):
        """All half-data points from the free parameters (last Re q eliminated)."""
        if self.kind == "basic":
            return self.fixed_points
        free = list(free)
        if len(free) != self.n_free:
            raise ValueError(f"{self.label}: expected {self.n_free} parameters, got {len(free)}")
        exact = all(isinstance(x, Fraction) for x in free)
        c = self.constraint
        if exact:
            last = F(c.rhs - sum(k * x for k, x in zip(c.coefficients[:-1], free)), c.coefficients[-1])
        else:
            last = (c.rhs - math.fsum(k * float(x) for k, x in zip(c.coefficients[:-1], free))) / c.coefficients[-1]
        return tuple(free) + (last,)

    def feasible(self, free) -> bool:
        try:
            self.divisor(free, TorusParams(1.0))
        except ConstraintInfeasible:
            return False
        return True

    def divisor(self, free, t: TorusParams) -> SymmetricDivisorSpec:
        """Half-data divisor for the given free parameters.

        Raises ConstraintInfeasible unless 0 < p_1 < ... < 1/2 and
        0 < Re q_1 < ... < 1/2.
        """
        pts = self.points(free)
        m = len(self.lower_exponents)
        lower, upper = pts[:m], pts[m:]
        for edge, xs in (("lower", lower), ("upper", upper)):
            prev = 0
            for x in xs:
                if not prev < x < F(1, 2):
                    raise ConstraintInfeasible(
                        f"{self.label}: {edge} points {[float(v) for v in xs]} leave (0, 1/2)")
                prev = x
        return SymmetricDivisorSpec(t, lower, self.lower_exponents, upper, self.upper_exponents)

    def free_bounds(self):
        """Box containing the feasible free parameters (each in (0, 1/2))."""
        return [(0.0, 0.5)] * self.n_free

    def p_interval(self):
        """Exact open interval of the single free parameter of a one-parameter family."""
        if self.n_free != 1:
            raise ValueError("p_interval needs exactly one free parameter")
        cx, cy = self.constraint.coefficients
        rhs = self.constraint.rhs
        # y = (rhs - cx x) / cy; every condition below reads alpha x + beta > 0
        conds = [(F(1), F(0)), (F(-1), F(1, 2)),
                 (F(-cx, cy), F(rhs, cy)), (F(cx, cy), F(1, 2) - F(rhs, cy))]
        if len(self.lower_exponents) == 2:
            conds.append((F(-cx, cy) - 1, F(rhs, cy)))
        lo, hi = F(0), F(1, 2)
        for alpha, beta in conds:
            if alpha > 0:
                lo = max(lo, -beta / alpha)
            elif alpha < 0:
                hi = min(hi, -beta / alpha)
            elif beta <= 0:
                raise ConstraintInfeasible(f"{self.label} has no feasible parameters")
        if not lo < hi:
            raise ConstraintInfeasible(f"{self.label} has no feasible parameters")
        return lo, hi

    def to_dict(self):
        return {
            "kind": self.kind, "triple": list(self.triple), "name": self.name, "n": self.n,
            "lower_exponents": [str(e) for e in self.lower_exponents],
            "upper_exponents": [str(e) for e in self.upper_exponents],
            "constraint": None if self.constraint is None else str(self.constraint),
            "default_d": self.default_d,
            "symmetric_reduction": self.symmetric_reduction,
        }


def basic_family(r: int, s: int, t: int):
    """(FamilySpec, SymmetricDivisorSpec) of a basic surface."""
    _check_triple((r, s, t))
    row = next((row for row in BASIC_TABLE if row[1] == (r, s, t)), None)
    if row is None:
        raise InvalidTriple(f"{(r, s, t)} is not in the basic table")
    p = basic_p(r, s)
    a = F(r - 1, r)
    fam = FamilySpec("basic", (r, s, t), (a,), (), F(0), (), row[0], fixed_points=(p,))
    return fam, SymmetricDivisorSpec(TorusParams(fam.default_d), (p,), (a,))


def equal_sign_family(r: int, s: int) -> FamilySpec:
    if (r, s) not in EQUAL_SIGN_TABLE:
        raise InvalidTriple(f"({r}, {s}) is not an equal-sign row")
    t = third_order(r, s)
    return FamilySpec("equal", (r, s, t), (-F(r - 1, r),), (-F(s - 1, s),), F(1),
                      (("lower:0", "upper:0"),))


def opposite_sign_family(r: int, s: int) -> FamilySpec:
    if (r, s) not in OPPOSITE_SIGN_TABLE:
        raise InvalidTriple(f"({r}, {s}) is not an opposite-sign row")
    t = third_order(r, s)
    return FamilySpec("opposite", (r, s, t), (-F(r - 1, r),), (F(s - 1, s),), F(1, s),
                      (("lower:0", "upper:1"),), OPPOSITE_SIGN_TABLE[(r, s)][0])


def symmetric_solution(family: FamilySpec):
    """Closed-form (p, Re q) of an r = s opposite-sign family.

    Together with Re q - p = 1/(2(r-1)) the constraint gives p + Re q = 1/2.
    """
    if family.kind != "opposite" or family.r != family.s:
        raise ValueError("closed form exists only for opposite-sign families with r = s")
    gap = F(1, 2 * (family.r - 1))
    p = (F(1, 2) - gap) / 2
    return p, p + gap


def constraint_of(family: FamilySpec) -> LinearConstraint:
    """Integer linear relation among the points, from the plane-angle formula."""
    if family.kind not in ("equal", "opposite"):
        raise ValueError("constraint_of covers the equal- and opposite-sign families")
    return family.constraint


def neovius_family(r: int, s: int, t: int) -> FamilySpec:
    _check_triple((r, s, t))
    if (r, s, t) not in NEOVIUS_TRIPLES:
        raise InvalidTriple(f"{(r, s, t)} is not one of the Neovius cases")
    a, b1, b2 = F(1, r) - 1, 1 - F(1, s), 1 - F(1, t)
    # D = Pi[-p, p] must meet the plane over [q2, 1 - q2]: the angle between D and
    # Pi[-q1, q1] is then -pi/r, and E = Pi[p, 1-p] lines up with Pi[-q1, q1]
    target = 1 - b1 - b2
    name = {(2, 4, 4): "Neovius"}.get((r, s, t), "")
    return FamilySpec("neovius", (r, s, t), (a,), (b1, b2), target,
                      (("lower:0", "upper:2"), ("lower:1", "upper:0")), name, default_d=0.8,
                      symmetric_reduction=(r, s, t) in ((2, 4, 4), (3, 3, 3)),
                      qualitative=2 in (s, t))


def spout_family(r: int, s: int, n: int) -> FamilySpec:
    if n < 1:
        raise InvalidTriple("spout families need n >= 1")
    t = third_order(r, s)
    a = F(1 - r, r)
    bs = tuple((-1) ** i * F(s - 1, s) for i in range(1, n + 1))
    # D lines up with every even upper plane, the odd upper planes with each other
    pairs = [("lower:0", f"upper:{k}") for k in range(0, n + 1, 2)]
    pairs += [("upper:1", f"upper:{k}") for k in range(3, n + 1, 2)]
    return FamilySpec("spout", (r, s, t), (a,), bs, F(1), tuple(pairs), n=n)


def four_corner_family(r: int, s: int, t: int) -> FamilySpec:
    """Four lower corners at -q, -p, p, q with exponent signs (-, -, +, +).

    Half-data: (p, a) and (q, b) with a = (r-1)/r, b = (s-1)/s and p < q.
    The single upper plane must line up with Pi[-p, p].
    """
    _check_triple((r, s, t))
    a, b = F(r - 1, r), F(s - 1, s)
    return FamilySpec("four-corner", (r, s, t), (a, b), (), F(-1), (("lower:0", "upper:0"),))


def list_families():
    """Every family the catalog can build, as FamilySpec objects."""
    out = []
    for _, triple, _ in BASIC_TABLE:
        out.append(basic_family(*triple)[0])
    out += [equal_sign_family(r, s) for r, s in EQUAL_SIGN_TABLE]
    out += [opposite_sign_family(r, s) for r, s in OPPOSITE_SIGN_TABLE]
    out += [neovius_family(*tr) for tr in NEOVIUS_TRIPLES]
    out += [spout_family(r, s, n) for n in (1, 2, 3) for r, s, _ in EUCLIDEAN_TRIPLES
            if n == 2 or (r, s) == (3, 6)]
    return out
