"""
Null expansions of round spheres
================================

A round sphere of radius ``r`` in Minkowski space has outgoing and ingoing
null expansions ``+(n-1)/r`` and ``-(n-1)/r``.  A linear weight
``psi = -lambda x0`` shifts both by ``lambda``; for ``lambda`` below
``-(n-1)/r`` the sphere becomes psi-trapped.
"""

import numpy as np

from wlfinsler import builtin_registry, detect_conjugate_points
from wlfinsler.surfaces import build_surface, round_sphere, surface_congruence_tensor

r = 2.0
flat = builtin_registry("minkowski", {"n": 3})
sphere = round_sphere(4, r, resolution=3)
S = build_surface(flat, sphere)
print(f"theta+ = {S.theta_plus.mean():+.6f}  theta- = {S.theta_minus.mean():+.6f}  (n-1)/r = {2 / r:.6f}")

###############################################################################
# The ingoing null congruence focuses at affine parameter ``r``.

tensor, _ = surface_congruence_tensor(flat, S, index=0, side="minus", t_end=1.5 * r)
points, _ = detect_conjugate_points(tensor)
print(f"ingoing focal time {points[0].t:.8f}")

###############################################################################
# Sweep the weight strength and report when every sample point is trapped.

for lam in (0.0, -0.5, -1.0, -1.5, -2.0):
    model = builtin_registry("weighted", {"base": "minkowski", "n": 3, "lambda": lam})
    Sw = build_surface(model, sphere)
    print(f"lambda={lam:+.1f}: theta_psi+ = {np.mean(Sw.theta1_plus):+.3f}  "
          f"theta_psi- = {np.mean(Sw.theta1_minus):+.3f}  trapped={bool(Sw.psi_trapped.all())}")
