"""
Mixture thermodynamics
======================

Build a two-species ideal-gas mixture, convert between primitive and
conserved variables and look at the entropy and its variables.
"""

import numpy as np

from mcfv.thermo import (GasMixture, InadmissibleStateError, SpeciesParams, conserved_to_primitive,
                         entropy_variables, mixture_entropy, pressure, primitive_to_conserved,
                         sound_speed)

# species are given by gamma and c_v; the gas constant follows as c_v (gamma - 1)
mix = GasMixture((SpeciesParams(1.4, 2.5), SpeciesParams(1.67, 1.5)))
print("r   =", mix.r)
print("c_p =", mix.c_p)

# a single state: partial densities, velocity, pressure
U = primitive_to_conserved(np.array([1.0, 0.5]), np.array([0.3, -0.1]), 1.0, mix)
print("U =", U)
prim = conserved_to_primitive(U, mix)
print("T =", prim.temperature, " p =", pressure(U, mix), " c =", sound_speed(U, mix))

s, eta = mixture_entropy(U, mix)
print("specific entropy s =", s, " eta = -rho s =", eta)

# entropy variables are the gradient of eta; compare against central differences
V = entropy_variables(U, mix)
fd = np.array([(mixture_entropy(U + 1e-6 * e, mix)[1] - mixture_entropy(U - 1e-6 * e, mix)[1]) / 2e-6
               for e in np.eye(U.size)])
print("max |V - grad eta| =", np.abs(V - fd).max())

# inadmissible states raise with the offending cell
bad = U.copy()
bad[1] = -0.1
try:
    pressure(bad, mix)
except InadmissibleStateError as err:
    print("rejected:", err)
