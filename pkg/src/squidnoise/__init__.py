"""Flux-noise decoherence of an rf-SQUID double-well qubit."""

from .bloch import BlochParams, closed_form_damped, integrate_bloch, predict_D
from .config import RunConfig, load_config
from .ensemble import EnsembleConfig, PolarizationTrace, run_ensemble
from .noise import NoiseParams, NoiseTrace, autocorr_integral, telegraph_trace
from .potential import BasisRep, HamiltonianParams, build_basis, build_hamiltonian, potential_value, well_minima
from .propagate import PropagatorCache, build_propagator, evolve_realization, evolve_schedule
from .spectrum import QubitFrame, calibrate_mu, eigensystem, make_qubit_frame, project_to_qubit

__all__ = [
    "BasisRep",
    "BlochParams",
    "EnsembleConfig",
    "HamiltonianParams",
    "NoiseParams",
    "NoiseTrace",
    "PolarizationTrace",
    "PropagatorCache",
    "QubitFrame",
    "RunConfig",
    "autocorr_integral",
    "build_basis",
    "build_hamiltonian",
    "build_propagator",
    "calibrate_mu",
    "closed_form_damped",
    "eigensystem",
    "evolve_realization",
    "evolve_schedule",
    "integrate_bloch",
    "load_config",
    "make_qubit_frame",
    "potential_value",
    "predict_D",
    "project_to_qubit",
    "run_ensemble",
    "telegraph_trace",
    "well_minima",
]
