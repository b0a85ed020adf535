"""Action of the geodesic flow on a 2-ellipsoid of revolution.

Closed form in complete elliptic integrals next to a direct band
quadrature, for a symmetry axis shorter (alpha0 = 1) and longer
(alpha0 = 4) than the equatorial one (alpha1 = 2), at h = 1.

Run:  python3 demos/revolution_actions.py
"""
import numpy as np

from ellipsoid_geodesics import RevolutionParams, revolution_action, revolution_action_quadrature

print(" jhat    I(a0=1)      quad         I(a0=4)      quad")
for jh in np.linspace(-1, 1, 11):
    row = []
    for a0 in (1.0, 4.0):
        p = RevolutionParams.from_jhat(1.0, float(jh), a0, 2.0)
        row += [revolution_action(p), revolution_action_quadrature(p)]
    print(f"{jh:5.1f} " + " ".join(f"{v:12.9f}" for v in row))
