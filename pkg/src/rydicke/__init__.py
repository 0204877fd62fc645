"""Rydberg-dressed open Dicke model simulation toolkit."""

__version__ = "0.1.0"

from .params import ModelParams
from .hilbert import (
    BasisDescriptor,
    DensityMatrix,
    OperatorMatrix,
    StateVector,
    choose_photon_cutoff,
    default_basis,
    hamiltonian,
    liouvillian,
)

__all__ = [
    "ModelParams",
    "BasisDescriptor",
    "DensityMatrix",
    "OperatorMatrix",
    "StateVector",
    "choose_photon_cutoff",
    "default_basis",
    "hamiltonian",
    "liouvillian",
    "__version__",
]
