r"""
Basic surfaces
--------------
Each basic surface comes from one pair of pre-vertices ``+-p`` on the real
edge of the strip, with the exponent ``(r-1)/r``.  The pre-vertex is known in
closed form, so no period problem has to be solved.
"""
import math

import numpy as np

from scminimal import catalog
from scminimal.divisor import SymmetricDivisorSpec, basic_p
from scminimal.theta import TorusParams
from scminimal.weierstrass import dihedral_angle, make_patch, plane_of

#%%
# The closed form is rational, so the whole table is exact.
for name, (r, s, t), p in catalog.BASIC_TABLE:
    print(f"{name:<14} ({r},{s},{t})  p = {basic_p(r, s)}")

#%%
# Build Schwarz P on the square torus.  The half-data holds one point; the
# mirror point -p with the negated exponent is added by ``expand``.
fam, half = catalog.basic_family(2, 4, 4)
torus = TorusParams(1.0)
dspec = SymmetricDivisorSpec(torus, half.lower_points, half.lower_exponents).expand()
patch = make_patch(dspec, 48, 24)
X = patch.points
print(X.shape, "height range", X[..., 2].min(), X[..., 2].max())

#%%
# Boundary arcs lie in vertical planes.  The wedge between the plane over
# [-p, p] and the upper plane is pi/s, and so on around the triangle.
planes = {k: plane_of(patch, k) for k in patch.labels}
for a, b, k in (("lower:0", "upper:0", 4), ("lower:0", "lower:1", 2), ("lower:1", "upper:0", 4)):
    ang = dihedral_angle(planes[a], planes[b])
    print(f"{a} / {b}: {ang:.10f}  (pi/{k} = {math.pi / k:.10f})")

#%%
# The same check across the whole table, now at a different torus height.
torus = TorusParams(0.7)
for name, (r, s, t), p in catalog.BASIC_TABLE:
    _, half = catalog.basic_family(r, s, t)
    ds = SymmetricDivisorSpec(torus, half.lower_points, half.lower_exponents).expand()
    pl = make_patch(ds, 32, 16)
    err = abs(dihedral_angle(plane_of(pl, "lower:0"), plane_of(pl, "upper:0")) - math.pi / s)
    print(f"({r},{s},{t}) wedge error {err:.1e}")
