"""Numerical laboratory for the stochastically thermalized 1-D lattice
nonlinear Schrodinger equation on the mass sphere.

Subsystems:

* lattice    - fields, energies, phase derivative, unitary DFT
* elliptic   - AGM/Landen elliptic kernel and the dnoidal standing wave
* variational- discrete ground states E_0^n(m) on the sphere
* interp     - piecewise-linear bridge to the torus, reduced H^1 distance
* gn         - empirical discrete Gagliardo-Nirenberg constant
* sampling   - uniform sphere draws, Gibbs Metropolis, large deviations
* sde        - mass-exact splitting integrator for the heat-bath dynamics
* hormander  - bracket-condition rank checks
* experiments- end-to-end concentration and relaxation studies
"""

from . import elliptic, gn, hormander, interp, lattice, sampling, sde, variational
from .lattice import EnergyBreakdown, GibbsSpec, LatticeField

__version__ = "0.1.0"

__all__ = [
    "elliptic",
    "gn",
    "hormander",
    "interp",
    "lattice",
    "sampling",
    "sde",
    "variational",
    "EnergyBreakdown",
    "GibbsSpec",
    "LatticeField",
    "__version__",
]
