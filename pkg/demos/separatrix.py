"""Section of the j = 0 level through the focus-focus value.

The level set g = 0 on the (phi, p_phi) cylinder is two closed curves that
cross each other twice.

Run:  python3 demos/separatrix.py
"""
from ellipsoid_geodesics import EllipsoidSpec, separatrix_section

spec = EllipsoidSpec((1.0, 2.0, 2.0, 4.0))
curve = separatrix_section(spec, h=0.5, n=256)
print("crossings (phi, p_phi):")
for phi, p in curve.crossings:
    print(f"  ({phi:.10f}, {p:.1e})")
print("branches:", len(curve.branches), " windings:", curve.windings,
      f" max residual after polishing: {curve.max_residual:.1e}")

# A regular level nearby: two separate loops, no crossings.
regular = separatrix_section(spec, h=0.5, n=256, g=0.3)
print("g = 0.3:", len(regular.branches), "branches,", len(regular.crossings), "crossings")
curve.to_csv("separatrix.csv")
