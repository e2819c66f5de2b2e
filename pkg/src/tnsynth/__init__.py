"""Tensor-network simulation of multipartite quantum dynamics.

One prepare / entangle / measure / Fourier-analyse pipeline covers
hidden-subgroup algorithms (Deutsch through Shor) and grid models of
shared-proton motion along water wires.
"""

from tnsynth.errors import AlgorithmFailure, PeriodNotFound, ValidationError
from tnsynth.evolution import ProductOperatorSum, assemble_global, evolve
from tnsynth.measurement import fourier_analyze, generalized_measure, project, sample, subspace_project
from tnsynth.numerics import contract, hermitian_eig, matrix_exponential_i, svd
from tnsynth.states import (
    BasisChange,
    DenseState,
    MPSForm,
    PartLabel,
    SchmidtForm,
    bell_state,
    dense_from_mps,
    mps_from_dense,
    product_state,
    schmidt_decompose,
)

__version__ = "0.1.0"

__all__ = [
    "AlgorithmFailure",
    "PeriodNotFound",
    "ValidationError",
    "ProductOperatorSum",
    "assemble_global",
    "evolve",
    "fourier_analyze",
    "generalized_measure",
    "project",
    "sample",
    "subspace_project",
    "contract",
    "hermitian_eig",
    "matrix_exponential_i",
    "svd",
    "BasisChange",
    "DenseState",
    "MPSForm",
    "PartLabel",
    "SchmidtForm",
    "bell_state",
    "dense_from_mps",
    "mps_from_dense",
    "product_state",
    "schmidt_decompose",
]
