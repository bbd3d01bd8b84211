"""
Diagnostics along a run
=======================

Minimum entropy, the renormalized entropy monitor, the weak-BV functional
and the a-priori norms are recorded after every step.
"""

import numpy as np

from mcfv.cases import KHIConfig, khi_initial, khi_mixture
from mcfv.diagnostics import relative_entropy, entropy_hessian
from mcfv.mesh import Grid
from mcfv.solver import SolverConfig, run

mix = khi_mixture()
grid = Grid.uniform(32, 2)
res = run(khi_initial(KHIConfig(seed=1), grid, mix), mix, SolverConfig(cfl=0.8, t_end=0.5))

series = res.diagnostics
print("recorded columns:", ", ".join(series.columns))
print(series.to_csv().splitlines()[-1])

# relative entropy behaves like a squared distance near a state
U = np.array([0.8, 0.2, 0.1, 0.0, 7.0])
H = entropy_hessian(U, mix)
eig = np.linalg.eigvalsh(H)
for eps in (1e-1, 1e-2, 1e-3):
    d = eps * np.ones(5) / np.sqrt(5)
    h = relative_entropy(U + d, U, mix)
    print(f"|d|={eps:.0e}: H={h:.3e}  within [{0.5 * eig[0] * eps**2:.3e}, {0.5 * eig[-1] * eps**2:.3e}]")
