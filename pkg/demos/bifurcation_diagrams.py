"""Critical values of the energy-momentum map at h = 1/2.

Distinct axes give four lines and a parabolic arc in the (s1, s2) plane;
equal middle axes give two parabolas in (j, g) and an isolated
focus-focus value at the origin.

Run:  python3 demos/bifurcation_diagrams.py
"""
from ellipsoid_geodesics import EllipsoidSpec, generic_diagram, symmetric_diagram
from ellipsoid_geodesics.bifurcation import match_spectra, numeric_focus_focus

generic = generic_diagram(EllipsoidSpec((1 / 3, 1.0, 3.0, 4.0)), h=0.5)
print("distinct axes (1/3, 1, 3, 4)")
for p in generic.points:
    s1, s2 = p.location.coords
    print(f"  {p.label:11s} s1={s1:8.4f} s2={s2:8.4f}  {p.type}")
generic.to_csv("generic_diagram.csv")

spec = EllipsoidSpec((1.0, 2.0, 2.0, 4.0))
sym = symmetric_diagram(spec, h=0.5)
print("equal middle axes (1, 2, 2, 4)")
for c in sym.curves:
    print(f"  {c.label}: g = {c.coefficients['c']:g} - ({c.coefficients['k']:g}) j^2")
for p in sym.points:
    j, g = p.location.coords
    print(f"  {p.label:11s} j={j:8.4f} g={g:8.4f}  {p.type}")

# Finite-difference linearization at a point of the critical circle over (0, 0).
ff = sym.point("focus-focus")
num = numeric_focus_focus(spec, 0.5)
print("focus-focus eigenvalues", num.round(6), " mismatch", f"{match_spectra(num, ff.eigenvalues):.1e}")
sym.to_csv("symmetric_diagram.csv")
