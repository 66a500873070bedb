"""Equilibrium rings of like charges in a plane with log repulsion and a quadratic well."""

from .annealer import AnnealParams, AnnealResult, RingSignature, anneal, bulk_density, detect_rings, polish
from .core_model import (
    Configuration,
    EnergyReport,
    HessianMatrix,
    ModelParams,
    energy,
    gradient,
    hessian_analytic,
    hessian_fd,
    ring_closed_form,
    ring_configuration,
)
from .shell_model import ShellPrediction, shell_fill, shell_table
from .spectral import (
    RingAnsatz,
    RingSpectrum,
    equilibrium_radius,
    nmax_interior,
    nmax_total,
    ring_spectrum,
)

__version__ = "0.1.0"
