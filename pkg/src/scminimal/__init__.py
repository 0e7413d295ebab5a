"""Triply periodic minimal surfaces from periodic Schwarz-Christoffel maps.

The Gauss map is a product of theta-function powers on a rectangular torus,
the height differential is dz, and the fundamental piece is the image of
the strip 0 <= Im z <= d/2.
"""
from .assembly import TriangleGroup, TriplyPeriodicMesh, align_patch, replicate, self_intersection_spot_check
from .catalog import (FamilySpec, LinearConstraint, basic_family, constraint_of, equal_sign_family,
                      four_corner_family, list_families, neovius_family, opposite_sign_family, spout_family)
from .divisor import DivisorSpec, SymmetricDivisorSpec, basic_p, plane_angle_general
from .errors import ScMinimalError
from .period import (impossibility_scan, solve_equal_sign, solve_multidim, solve_neovius_symmetric,
                     solve_opposite_sign)
from .scmap import gauss_map, phi, polygon_image
from .theta import TorusParams, log_deriv, theta, theta_prime
from .weierstrass import SurfacePatch, conjugate_patch, make_patch

__version__ = "0.1.0"
