"""Cross-validate the increment characteristic function three ways.

Conditional on the latent state, the CF of an increment of the subordinated
process is a product of one-dimensional mixing integrals of the OU
conditional CF against the subordinator increment law.  The library
evaluates that integral by two independent numerical routes -- inverting
the increment CF to a density and integrating against it ("quadrature"),
and an exact exponential-moment series ("series") -- and both are compared
here against plain Monte Carlo.  For a Brownian base the integral collapses
to a closed form, which the quadrature route must reproduce.
"""

import math

import numpy as np

from addsub import (
    FactorMOUSpec,
    MultiparamBMSpec,
    OUSpec,
    RngStream,
    SatoSubordinatorSpec,
    SubordinatedSpec,
    TemperedStableSpec,
    cf_increment,
    sample_paths,
)

IG = TemperedStableSpec.from_ig(1.0, 1.0)
base = FactorMOUSpec(
    idio=(OUSpec(1.0, 0.0, 1.0), OUSpec(2.0, 1.0, 1.0)), loadings=(1.0, 0.5))
spec = SubordinatedSpec(base, SatoSubordinatorSpec((IG,) * 3, rho=1.5, t0=0.0))

n = 100_000
ens = sample_paths(spec, [1.0], n, RngStream(42))
y = ens.observed[:, :, 0]

print("factor OU base: quadrature vs series vs Monte Carlo at t = 1")
print(f"{'xi':>14} {'quadrature':>22} {'series':>22} {'|q - s|':>9} {'MC z':>6}")
for xi in ([0.5, 0.0], [0.5, 0.25], [1.0, -0.5], [1.5, 1.0]):
    xi = np.asarray(xi)
    cq = cf_increment(spec, 0.0, 1.0, None, xi, "quadrature")
    cs = cf_increment(spec, 0.0, 1.0, None, xi, "series")
    z = np.exp(1j * (y @ xi))
    emp = complex(z.mean())
    se = math.hypot(z.real.std(), z.imag.std()) / math.sqrt(n)
    print(f"{str(xi):>14} {cq:22.6f} {cs:22.6f} {abs(cq - cs):9.1e} "
          f"{abs(emp - cq) / se:6.2f}")

print("\nBrownian (Levy) base: closed form vs the same quadrature machinery")
lspec = SubordinatedSpec(MultiparamBMSpec.standard(1),
                         SatoSubordinatorSpec((IG,), rho=1.5, t0=0.0))
print(f"{'xi':>5} {'closed form':>22} {'quadrature':>22} {'diff':>9}")
for xi in (0.4, 0.8, 1.5, 2.5):
    cc = cf_increment(lspec, 0.5, 1.5, None, [xi])
    cq = cf_increment(lspec, 0.5, 1.5, None, [xi], "quadrature")
    print(f"{xi:5.2f} {cc:22.8f} {cq:22.8f} {abs(cc - cq):9.1e}")

print("\nevolution identity (Chapman-Kolmogorov in CF form), Levy base:")
worst = 0.0
for xi in np.linspace(0.1, 3.0, 12):
    defect = abs(cf_increment(lspec, 0.2, 0.9, None, [xi])
                 * cf_increment(lspec, 0.9, 1.6, None, [xi])
                 - cf_increment(lspec, 0.2, 1.6, None, [xi]))
    worst = max(worst, defect)
print(f"max |cf(a,b) cf(b,c) - cf(a,c)| on a 12-point grid: {worst:.2e}")
