"""The Levy triplet of the subordinated process, and its path variation.

With a zero-drift Sato clock the subordinated process is pure jump: its
Gaussian part vanishes identically and the drift reduces to the small-jump
compensator.  The jump measure is singular with respect to planar Lebesgue
measure -- it lives on the coordinate axes (idiosyncratic jumps) and on the
loading ray (common-factor jumps) -- and has infinite total mass, which the
truncated-mass diagnostics exhibit.  Finally, paths have bounded variation
exactly when the stability index is below one half; the witness integral
``int_c^1 sqrt(s) nu(1, ds)`` shows the dichotomy numerically.
"""

import numpy as np

from addsub import (
    FactorMOUSpec,
    OUSpec,
    SatoSubordinatorSpec,
    SubordinatedSpec,
    TemperedStableSpec,
    bv_classify,
    triplet,
)
from addsub.subordinated import nu_truncated_mass

IG = TemperedStableSpec.from_ig(1.0, 1.0)
base = FactorMOUSpec(idio=(OUSpec(1.0, 0.0, 1.0), OUSpec(2.0, 1.0, 1.0)),
                     loadings=(1.0, 0.5))
spec = SubordinatedSpec(base, SatoSubordinatorSpec((IG,) * 3, rho=1.5, t0=0.0))

trip = triplet(spec, t=1.0, state=None)
print("triplet at t = 1, latent state 0")
print(f"gamma (compensator drift) = {trip.gamma}")
print(f"Sigma (Gaussian part)     =\n{trip.Sigma}")
print(f"clock drift weights c(t)  = {trip.subordinator_drift} (zero-drift Sato family)")

print("\njump densities (displacement w):")
print(f"{'w':>6} {'axis 1':>10} {'axis 2':>10} {'ray (a z)':>10}")
for w in (-1.0, -0.3, 0.3, 1.0):
    d1 = float(trip.nu.axis_density(0, w))
    d2 = float(trip.nu.axis_density(1, w))
    dr = float(trip.nu.ray_density(w))
    print(f"{w:6.2f} {d1:10.5f} {d2:10.5f} {dr:10.5f}")
print(f"ray direction: {trip.nu.ray_direction}")

print("\ntotal jump intensity above a clock cutoff (diverges as the cutoff shrinks):")
for c in (1e-2, 1e-4, 1e-6):
    print(f"  cutoff {c:7.0e}: mass {nu_truncated_mass(spec, 1.0, c):12.2f}")

print("\npath variation against the stability index")
for alpha in (0.3, 0.5, 0.7):
    comp = TemperedStableSpec(alpha, 1.0, 1.0)
    s = SubordinatedSpec(
        FactorMOUSpec(idio=(OUSpec(1.0, 0.0, 1.0),), loadings=(0.0,)),
        SatoSubordinatorSpec((comp,) * 2, rho=1.5, t0=0.0))
    bv = bv_classify(s)
    wit = ", ".join(f"{c:.0e}: {v:.4g}" for c, v in bv.witness.items())
    flag = " (boundary case)" if bv.boundary else ""
    print(f"  alpha = {alpha}: {bv.classification}{flag}")
    print(f"    witness integral by cutoff -> {wit}")
