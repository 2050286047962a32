"""Exact reference computations by exhaustive enumeration."""
from .core import OracleError, partition_function, string_correlator
from .equivalence import (
    EquivalenceReport, face_cubic_check, ising_dual_check, mixed_cubic_check, rbim_check,
)
from .fidelity import data_processing_check, fidelity_direct, fidelity_projector_formula
from .spectra import SpectrumResult, anyon_chain_weights, eta_spectrum_maximal, toric_code_spectrum

__all__ = [
    "OracleError", "partition_function", "string_correlator", "EquivalenceReport",
    "ising_dual_check", "rbim_check", "face_cubic_check", "mixed_cubic_check",
    "fidelity_direct", "fidelity_projector_formula", "data_processing_check",
    "SpectrumResult", "toric_code_spectrum", "eta_spectrum_maximal", "anyon_chain_weights",
]
