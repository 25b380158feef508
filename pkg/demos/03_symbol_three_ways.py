"""Evaluate the time-dependent symbol by every available method.

The symbol q(t, x, xi) is the negative time derivative of the conditional
increment CF at zero lag -- the Levy-type analogue of a characteristic
exponent.  Three routes are compared:

  * cf-derivative    : Richardson forward differencing of the increment CF,
  * triplet-integral : -sum_comp int (cf_comp(s) - 1) nu_comp(t, ds),
  * levy-closed-form : -rho t^(rho-1) q(xi) Psi'(t^rho q(xi))   (Levy base).

For the Brownian-base model the three must coincide; a classical reference
point (unit-tempering inverse Gaussian clock with rho = 2 at t = xi = 1)
evaluates to exactly 1/sqrt(2).
"""

import math

from addsub import (
    FactorMOUSpec,
    LatentState,
    MultiparamBMSpec,
    OUSpec,
    SatoSubordinatorSpec,
    SubordinatedSpec,
    TemperedStableSpec,
    symbol,
)

IG = TemperedStableSpec.from_ig(1.0, 1.0)

print("Brownian base + IG Sato clock (rho = 1.5): three methods")
lspec = SubordinatedSpec(MultiparamBMSpec.standard(1),
                         SatoSubordinatorSpec((IG,), rho=1.5, t0=0.0))
print(f"{'t':>4} {'xi':>5} {'closed form':>13} {'cf-derivative':>14} "
      f"{'triplet-int':>13} {'max disc':>9}")
for t in (0.5, 1.0, 2.0):
    for xi in (0.5, 1.0, 2.0):
        c = symbol(lspec, t, None, [xi], "levy-closed-form").value
        a = symbol(lspec, t, None, [xi], "cf-derivative").value
        b = symbol(lspec, t, None, [xi], "triplet-integral").value
        disc = max(abs(a - c), abs(b - c))
        print(f"{t:4.1f} {xi:5.2f} {c.real:13.8f} {a.real:14.8f} "
              f"{b.real:13.8f} {disc:9.1e}")

golden = SubordinatedSpec(MultiparamBMSpec.standard(1),
                          SatoSubordinatorSpec((IG,), rho=2.0, t0=0.0))
val = symbol(golden, 1.0, None, [1.0], "levy-closed-form").value
print(f"\nreference point (rho = 2, t = xi = 1): {val.real:.15f}")
print(f"1/sqrt(2)                             = {1 / math.sqrt(2):.15f}")

print("\nfactor OU base: the two numerical methods against each other")
base = FactorMOUSpec(idio=(OUSpec(1.0, 0.0, 1.0), OUSpec(2.0, 1.0, 1.0)),
                     loadings=(1.0, 0.5))
fspec = SubordinatedSpec(base, SatoSubordinatorSpec((IG,) * 3, rho=1.5, t0=0.0))
state = LatentState([0.4, -0.1], 0.2, [0.0, 0.0, 0.0])
print(f"{'t':>4} {'xi':>13} {'cf-derivative':>24} {'triplet-integral':>24} {'disc':>9}")
for t, xi in [(0.5, [0.8, 0.3]), (1.0, [0.5, -0.5]), (2.0, [1.2, 0.4])]:
    a = symbol(fspec, t, state, xi, "cf-derivative").value
    b = symbol(fspec, t, state, xi, "triplet-integral").value
    print(f"{t:4.1f} {str(xi):>13} {a:24.8f} {b:24.8f} {abs(a - b):9.1e}")

print("\nq(t, x, 0) = 0 exactly, for every method:")
for m in ("cf-derivative", "triplet-integral"):
    print(f"  {m:18s} -> {symbol(fspec, 1.0, state, [0.0, 0.0], m).value}")
