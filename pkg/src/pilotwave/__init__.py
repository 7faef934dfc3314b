"""Pilot-wave (de Broglie-Bohm) energy bookkeeping for one free particle.

Modules
-------
grid        grids, fields and finite-difference / spectral derivatives
core        polar decomposition, quantum potential, velocity, energy density
gaussian    closed forms for the free Gaussian packet
propagate   spectral and Crank-Nicolson time evolution, box eigenstates
sources     field snapshots sampled at arbitrary points
trajectory  Bohmian paths, Born sampling, equivariance
ledger      per-step T / Q / U / H bookkeeping and exchange-relation residuals
scenarios   the free-packet and box-release experiments
fileio      CSV / JSON / npz output, config files, manifests
validation  the numerical checks behind ``pilotwave validate``
"""

__version__ = "0.1.0"

from .core import (PolarField, energy, gradient_energy, hamiltonian_density,  # noqa: E402
                   polar_decompose, quantum_force, quantum_potential)
from .gaussian import GaussianParams  # noqa: E402
from .grid import ComplexField, Grid, PhysicalParams  # noqa: E402
from .ledger import LedgerRecord, LedgerSeries, build_ledger  # noqa: E402
from .propagate import (ImplicitPropagator, PropagationError, SpectralPropagator,  # noqa: E402
                        box_eigenstate, make_propagator)
from .scenarios import (BoundaryReachedError, BoxReleaseConfig, run_box_release,  # noqa: E402
                        run_free_gaussian)
from .trajectory import integrate, run_ensemble, sample_born  # noqa: E402

__all__ = [
    "BoundaryReachedError", "BoxReleaseConfig", "ComplexField", "GaussianParams", "Grid",
    "ImplicitPropagator", "LedgerRecord", "LedgerSeries", "PhysicalParams", "PropagationError",
    "PolarField", "SpectralPropagator", "box_eigenstate", "build_ledger", "energy", "gradient_energy",
    "hamiltonian_density", "integrate", "make_propagator", "polar_decompose", "quantum_force",
    "quantum_potential", "run_box_release", "run_ensemble", "run_free_gaussian", "sample_born",
]
