"""Fourier pseudospectral solvers for ``i psi_t = -Laplacian psi + lam f(|psi|^2) psi``
with the singular nonlinearity ``f(rho) = rho**alpha``, ``-1/3 < alpha < 0``."""
from .dynamics import (BlowUpError, Integrator, Problem, SimulationConfig, evolve,
                       reference_solution, run)
from .fileformats import dump_field, load_field
from .initial import ICKind, InitialCondition, sample_initial
from .observables import (ErrorReport, Vortex, energy, error_norms, locate_vortices, mass,
                          momentum)
from .regularization import DomainError, Kind, Regularization, F_reg, f_reg
from .spectral_grid import Field, Grid, SpectralCoeffs, make_grid

__version__ = "0.1.0"

__all__ = [
    "BlowUpError", "DomainError", "ErrorReport", "F_reg", "Field", "Grid", "ICKind",
    "InitialCondition", "Integrator", "Kind", "Problem", "Regularization", "SimulationConfig",
    "SpectralCoeffs", "Vortex", "dump_field", "energy", "error_norms", "evolve", "f_reg",
    "load_field", "locate_vortices", "make_grid", "mass", "momentum", "reference_solution",
    "run", "sample_initial",
]
