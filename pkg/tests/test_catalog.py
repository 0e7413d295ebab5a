from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from scminimal.catalog import (BASIC_TABLE, EQUAL_SIGN_TABLE, EUCLIDEAN_TRIPLES, NEOVIUS_TRIPLES,
                               OPPOSITE_SIGN_TABLE, basic_family, constraint_of, equal_sign_family,
                               four_corner_family, integer_constraint, list_families, neovius_family,
                               opposite_sign_family, spout_family, symmetric_solution, third_order)
from scminimal.divisor import SymmetricDivisorSpec, plane_angle_coefficient
from scminimal.errors import ConstraintInfeasible, InvalidTriple
from scminimal.theta import TorusParams

F = Fraction


def test_triples_are_euclidean():
    assert len(EUCLIDEAN_TRIPLES) == 10
    for r, s, t in EUCLIDEAN_TRIPLES:
        assert F(1, r) + F(1, s) + F(1, t) == 1
        assert third_order(r, s) == t
    with pytest.raises(InvalidTriple):
        third_order(5, 5)


@pytest.mark.parametrize("rs,row", sorted(EQUAL_SIGN_TABLE.items()))
def test_equal_sign_rows(rs, row):
    c = constraint_of(equal_sign_family(*rs))
    assert c.coefficients + (c.rhs,) == row
    assert all(isinstance(v, int) for v in row)


LINEAR_OPPOSITE = {rs: rel for rs, (_, (kind, rel)) in OPPOSITE_SIGN_TABLE.items() if kind == "linear"}


@pytest.mark.parametrize("rs,row", sorted(LINEAR_OPPOSITE.items()))
def test_opposite_sign_linear_rows(rs, row):
    c = constraint_of(opposite_sign_family(*rs))
    assert c.coefficients + (c.rhs,) == row


@pytest.mark.parametrize("rs,point", [((4, 4), (F(1, 6), F(1, 3))), ((3, 3), (F(1, 8), F(3, 8)))])
def test_opposite_sign_solution_points(rs, point):
    fam = opposite_sign_family(*rs)
    assert symmetric_solution(fam) == point
    assert fam.constraint.evaluate(point) == 0
    assert fam.points((point[0],)) == point


def test_constraint_matches_angle_formula():
    for fam in [equal_sign_family(*rs) for rs in EQUAL_SIGN_TABLE] + \
               [opposite_sign_family(*rs) for rs in OPPOSITE_SIGN_TABLE]:
        lo, hi = fam.p_interval()
        p = (lo + hi) / 2
        sd = fam.divisor((p,), TorusParams(1.0))
        assert plane_angle_coefficient(sd) == fam.angle_target


@settings(max_examples=60, deadline=None)
@given(e=st.lists(st.fractions(F(-5, 6), F(5, 6)).filter(lambda x: x != 0), min_size=1, max_size=4),
       target=st.fractions(F(-2), F(2)), data=st.data())
def test_integer_constraint_is_equivalent(e, target, data):
    names = tuple(f"x{k}" for k in range(len(e)))
    c = integer_constraint(e, target, names)
    xs = [data.draw(st.fractions(F(0), F(1, 2))) for _ in e]
    lhs = sum(ek * (2 * x - 1) for ek, x in zip(e, xs)) - target
    k = F(c.coefficients[0]) / (2 * e[0])
    assert k != 0
    assert c.evaluate(xs) == k * lhs
    from math import gcd
    from functools import reduce
    assert reduce(gcd, [abs(v) for v in c.coefficients + (c.rhs,)]) == 1


def test_constraint_text():
    assert str(constraint_of(equal_sign_family(2, 3))) == "6p + 8Re(q) = 1"
    fam = neovius_family(2, 4, 4)
    assert "Re(q1)" in str(fam.constraint) and "Re(q2)" in str(fam.constraint)


def test_p_interval_and_feasibility():
    fam = equal_sign_family(2, 3)
    lo, hi = fam.p_interval()
    assert isinstance(lo, Fraction)
    assert fam.feasible((float(lo + hi) / 2,))
    assert not fam.feasible((float(hi) + 1e-3,))
    with pytest.raises(ConstraintInfeasible):
        fam.divisor((0.6,), TorusParams(1.0))
    for q in (lo, hi):
        y = fam.points((q,))[-1]
        assert y in (0, F(1, 2)) or q in (0, F(1, 2))


def test_four_corner_constraint():
    fam = four_corner_family(3, 3, 3)
    assert str(fam.constraint) == "4p1 + 4p2 = 1"
    assert fam.p_interval() == (0, F(1, 8))


def test_basic_family():
    for name, triple, p in BASIC_TABLE:
        fam, sd = basic_family(*triple)
        assert fam.name == name and sd.lower_points == (p,)
        assert fam.n_free == 0 and fam.constraint is None
    with pytest.raises(InvalidTriple):
        basic_family(2, 4, 5)


def test_neovius_cases():
    for tr in NEOVIUS_TRIPLES:
        fam = neovius_family(*tr)
        assert fam.n_free == 2 and len(fam.pairs) == 2
    assert neovius_family(2, 4, 4).symmetric_reduction
    sd = neovius_family(2, 4, 4).divisor((0.25, 0.15), TorusParams(1.0))
    assert sum(sd.upper_points) == pytest.approx(0.5)
    with pytest.raises(InvalidTriple):
        neovius_family(2, 6, 3)


def test_spout_families():
    s1 = spout_family(3, 6, 1)
    eq = equal_sign_family(3, 6)
    assert s1.lower_exponents == eq.lower_exponents and s1.upper_exponents == eq.upper_exponents
    assert s1.constraint == eq.constraint
    s3 = spout_family(3, 6, 3)
    assert s3.upper_exponents == (F(-5, 6), F(5, 6), F(-5, 6))
    assert ("upper:1", "upper:3") in s3.pairs and ("lower:0", "upper:2") in s3.pairs
    with pytest.raises(InvalidTriple):
        spout_family(3, 6, 0)


def test_list_families():
    fams = list_families()
    assert len(fams) == 38
    assert len({f.label for f in fams}) == len(fams)
    for f in fams:
        d = f.to_dict()
        assert d["kind"] == f.kind


def test_divisor_symmetric_expansion():
    fam = opposite_sign_family(4, 4)
    sd = fam.divisor((F(1, 6),), TorusParams(1.0))
    assert isinstance(sd, SymmetricDivisorSpec)
    assert sd.upper_points == (F(1, 3),)
