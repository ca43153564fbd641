"""Oscillation on small spheres: smooth interior points versus the cusp tip."""
from bienergy import PointN, make_cusp_pair, make_radial_map, modulus_profile

radial = modulus_profile(make_radial_map(2.0, 3), PointN.axial(0.5, 0.0, 3))
print("radial a=2 about t=0.5  (interior)")
for tau, osc, ratio in zip(radial.scales, radial.osc, radial.ratio):
    print(f"  tau={tau:<10.3g} osc={osc:<12.5g} osc^n/bound={ratio:.4g}")
print(f"  spread of the fitted constant: {radial.spread:.3f}")

h, _ = make_cusp_pair(2.0, 3)
tip = modulus_profile(h)
print("\ncusp h (alpha=2) at the tip  (boundary)")
for tau, osc, s in zip(tip.scales, tip.osc, tip.scaled_osc):
    print(f"  tau={tau:<10.3g} osc={osc:<12.5g} osc*log(1/tau)^(1/3)={s:.4f}")
