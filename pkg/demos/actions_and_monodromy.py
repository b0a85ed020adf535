"""Natural actions near the focus-focus value and the resulting monodromy.

I_2 and I_3 are even in j but their j-derivatives jump at j = 0.  The
jumps are integer matrices, and carrying the action frame once around
(j, g) = (0, 0) picks up a nontrivial integer matrix.

Run:  python3 demos/actions_and_monodromy.py
"""
import numpy as np

from ellipsoid_geodesics import EllipsoidSpec, action_frame, action_gradient
from ellipsoid_geodesics.monodromy import monodromy

spec = EllipsoidSpec((1.0, 2.0, 2.0, 4.0))
h = 0.5

print("    j        g      I2        I3")
for g in (-0.5, 0.5):
    for j in (-0.5, -1e-4, 1e-4, 0.5):
        fr = action_frame(spec, h, g, j)
        print(f"{j:8.1e} {g:5.1f} {fr.I[1]:.7f} {fr.I[2]:.7f}")

print("\nderivative jumps across j = 0")
for g in (-0.5, 0.5):
    plus = np.round(action_gradient(spec, h, g, 1e-4), 4)
    minus = np.round(action_gradient(spec, h, g, -1e-4), 4)
    print(f"  g={g:+.1f}: dI/dj at j=+1e-4 {plus}, at j=-1e-4 {minus}")

res = monodromy(spec, h, radii=(0.5, 0.5), n_steps=64)
print("\ngluing matrices M1 =", res.M1.tolist(), " M2 =", res.M2.tolist())
print("monodromy M =", res.M.tolist())
print("normal form N =", res.N.tolist(), "via T =", res.T.tolist())

away = monodromy(spec, h, radii=(0.3, 0.3), center=(0.0, 1.5), n_steps=32)
print("loop that misses (0, 0):", away.M.tolist())
res.dump_json("monodromy.json")
