"""
Manufactured solution and convergence order
===========================================

A smooth travelling density wave with a matching source term.  The scheme
is first order, so halving the mesh width should roughly halve the error.
"""

import numpy as np

from mcfv.cases import ManufacturedSolution, exact_error, manufactured_initial, manufactured_mixture
from mcfv.solver import SolverConfig, run
from mcfv.studies import eoc

ms = ManufacturedSolution(manufactured_mixture())
x = np.array([0.3, -0.3])
print("exact state at t=0, x=(0.3,-0.3):", ms.exact(0.0, x))

meshes = [16, 32, 64]
errors = []
for n in meshes:
    grid = ms.grid(n)
    res = run(manufactured_initial(ms, grid), ms.mix,
              SolverConfig(cfl=0.5, t_end=0.4, source=ms.source), diagnostics=False)
    errors.append(exact_error(res.final, ms, 0.4, normalized=True))
    print(f"N={n:4d}  steps={res.steps:4d}  rms errors {np.array2string(errors[-1], precision=3)}")

errors = np.array(errors)
for j, name in enumerate(["rho1", "rho2", "m1", "m2", "E"]):
    print(name, "EOC:", [None if o is None else round(o, 3) for o in eoc(errors[:, j].tolist(), meshes)])
