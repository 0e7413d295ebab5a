r"""
Period problems
---------------
With pre-vertices on both edges the boundary planes come out parallel, but
they need not coincide.  Their offset is the period residual, a function of
the pre-vertex positions that must be driven to zero.
"""
import numpy as np

from scminimal import catalog
from scminimal.errors import NoSignChange
from scminimal.period import (impossibility_scan, residual_equal_sign, solve_equal_sign,
                              solve_neovius_symmetric, solve_opposite_sign)
from scminimal.theta import TorusParams

torus = TorusParams(1.0)

#%%
# Equal signs: one linear constraint ties Re q to p, leaving a scalar
# residual on an interval.  Its endpoint values have opposite signs.
fam = catalog.equal_sign_family(3, 6)
print("constraint:", fam.constraint)
lo, hi = (float(x) for x in fam.p_interval())
for p in np.linspace(lo, hi, 9)[1:-1]:
    print(f"p = {p:.4f}  residual = {residual_equal_sign(p, fam, torus):+.6f}")
root = solve_equal_sign(fam, torus)
print("root", root.p, "Re q", root.q, "doubled-order check", root.check_residual)

#%%
# Opposite signs with r = s have a symmetric solution that does not depend on
# the torus at all.
for rs in ((4, 4), (3, 3)):
    fam = catalog.opposite_sign_family(*rs)
    for d in (0.6, 1.0, 1.5):
        res = solve_opposite_sign(fam, TorusParams(d))
        print(f"{fam.name:<13} d={d}: p = {res.p:.12f}")

#%%
# The (-,-,+,+) four-corner candidate never closes: the residual keeps one
# sign, and its smallest value shrinks only as the torus degenerates.
print(impossibility_scan((3, 3, 3), [TorusParams(d) for d in (1.0, 0.5, 0.35)], grid=16).summary())

#%%
# The Neovius surface on its symmetric slice p = 1/4, q1 + q2 = 1/2.  The
# root runs into q1 = q2 = 1/4 near d = 0.93, past which no solution exists.
fam = catalog.neovius_family(2, 4, 4)
for d in (0.5, 0.8, 0.9, 0.93, 1.0):
    try:
        res = solve_neovius_symmetric(fam, TorusParams(d))
        print(f"d={d}: q1 = {res.q:.10f}")
    except NoSignChange as exc:
        print(f"d={d}: {exc}")
