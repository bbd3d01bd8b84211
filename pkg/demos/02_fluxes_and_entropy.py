"""
Lax-Friedrichs flux and entropy production
==========================================

The local Lax-Friedrichs flux dissipates entropy at every interface.  Draw
random admissible state pairs and check the sign of the interface production.
"""

import numpy as np

from mcfv.diagnostics import entropy_production
from mcfv.flux import lax_friedrichs_flux, local_lambda, physical_flux
from mcfv.thermo import GasMixture, SpeciesParams, primitive_to_conserved_T

mix = GasMixture((SpeciesParams(1.4, 2.5), SpeciesParams(1.648, 1.3)))
rng = np.random.default_rng(0)
k = 5000


def draw():
    return primitive_to_conserved_T(rng.uniform(0.1, 3.0, (2, k)), rng.uniform(-1.4, 1.4, (2, k)),
                                    rng.uniform(0.5, 5.0, k), mix)


UK, UL = draw(), draw()
lam = local_lambda(UK, UL, mix)
n = np.array([1.0, 0.0])

F = lax_friedrichs_flux(UK, UL, n, lam, mix)
central = 0.5 * (physical_flux(UK, n, mix) + physical_flux(UL, n, mix))
print("flux = central average - lam/2 jump:",
      np.allclose(F, central - 0.5 * lam * (UL - UK)))

r = entropy_production(UK, UL, lam, mix)
print(f"interface production over {k} pairs: min {r.min():.3e}, median {np.median(r):.3e}")

# the production is quadratic in the jump for nearby states
for eps in (1e-1, 1e-2, 1e-3):
    near = UK[:, :1] * (1 + eps)
    print(f"jump {eps:.0e}: r = {entropy_production(UK[:, :1], near, lam[:1], mix)[0]:.3e}")
