"""
Counting light cones in Beem's planar example
=============================================

The Lagrangian ``L = r^2 cos(k theta)`` on the plane has ``k`` disjoint
cones of timelike directions.  This script classifies a few vectors and
runs the angular census for ``k = 1..6``.
"""

import numpy as np

from wlfinsler import builtin_registry, classify_vector, count_cone_components, parse_expression

###############################################################################
# The builtin family and the same Lagrangian typed in as an expression agree
# on every sample direction.

beem3 = builtin_registry("beem", {"k": 3})
typed = parse_expression("(v0*v0 + v1*v1) * cos(3*atan2(v1,v0))")
angles = np.linspace(0.1, 2 * np.pi, 7)
for a in angles:
    v = np.array([np.cos(a), np.sin(a)])
    builtin_value = float(beem3.L([0, 0], v))
    print(f"theta={a:5.2f}  L={builtin_value:+.4f}  expression={float(typed([0, 0], v)):+.4f}  "
          f"{classify_vector(beem3, [0, 0], v).kind}")

###############################################################################
# Timelike directions come in ``k`` arcs around the origin.  ``k = 1`` has a
# single cone and is not Lorentzian at the origin, so the registry check is
# skipped for the census.

for k in range(1, 7):
    model = builtin_registry("beem", {"k": k}, validate=False)
    print(f"k={k}: {count_cone_components(model, np.zeros(2), samples=1024)} cone component(s)")

###############################################################################
# For even ``k`` the structure is reversible: ``L(-v) = L(v)``.

beem2 = builtin_registry("beem", {"k": 2})
v = np.array([0.3, -1.2])
print("k=2 reversible:", np.isclose(float(beem2.L([0, 0], v)), float(beem2.L([0, 0], -v))))
