"""Semi-stiff harmonic maps on annuli and the minimal surfaces they parametrize."""

__version__ = "0.1.0"

from .annulus import (AnnulusGrid, BoundaryTrace, HarmonicField, HopfReport, capacity,
                      degree_difference_integral, dirichlet_energy, harmonic_extension,
                      hopf_constant_check, kelvin_reflect, winding_degree)
from .radial import RadialSolution, radial_energy, threshold_rho_prime

__all__ = [
    "AnnulusGrid", "BoundaryTrace", "HarmonicField", "HopfReport", "RadialSolution",
    "capacity", "degree_difference_integral", "dirichlet_energy", "harmonic_extension",
    "hopf_constant_check", "kelvin_reflect", "radial_energy", "threshold_rho_prime",
    "winding_degree",
]
