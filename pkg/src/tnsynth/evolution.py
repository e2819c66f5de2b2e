"""Propagation of multipartite states by sums of product operators."""

from __future__ import annotations

from dataclasses import dataclass
from math import prod
from typing import Sequence

import numpy as np

from tnsynth.errors import ValidationError
from tnsynth.numerics import DEFAULT_REL_TOL, matrix_exponential_i, svd
from tnsynth.states import NORM_TOL, DenseState, PartLabel, as_parts, schmidt_decompose

MAX_ASSEMBLY_DIM = 4096
UNITARY_TOL = 1e-9


@dataclass(frozen=True)
class ProductOperatorSum:
    """Global operator ``sum_alpha kron(terms[alpha][0], terms[alpha][1], ...)``.

    Individual factors need not be unitary. When ``unitary_total`` is set the
    assembled sum is checked for unitarity (for total dimension <= 4096).
    """

    parts: tuple[PartLabel, ...]
    terms: tuple[tuple[np.ndarray, ...], ...]
    unitary_total: bool = False

    def __post_init__(self):
        parts = as_parts(self.parts)
        object.__setattr__(self, "parts", parts)
        terms = []
        for a, term in enumerate(self.terms):
            if len(term) != len(parts):
                raise ValidationError(f"term {a} has {len(term)} factors for {len(parts)} parts")
            factors = []
            for f, p in zip(term, parts):
                f = np.array(f, dtype=np.complex128)
                if f.shape != (p.dim, p.dim):
                    raise ValidationError(f"term {a} factor on {p.name!r} has shape {f.shape}, expected {(p.dim, p.dim)}")
                f.setflags(write=False)
                factors.append(f)
            terms.append(tuple(factors))
        if not terms:
            raise ValidationError("a product operator sum needs at least one term")
        object.__setattr__(self, "terms", tuple(terms))
        if self.unitary_total and self.total_dim <= MAX_ASSEMBLY_DIM:
            u = assemble_global(self)
            dev = np.abs(u @ u.conj().T - np.eye(u.shape[0])).max()
            if dev > UNITARY_TOL:
                raise ValidationError(f"operator flagged unitary deviates from unitarity by {dev:.3e}")

    @property
    def total_dim(self) -> int:
        return prod(p.dim for p in self.parts)

    @property
    def n_terms(self) -> int:
        """Number of product terms: the correlation measure of the propagator."""
        return len(self.terms)


def assemble_global(ops: ProductOperatorSum) -> np.ndarray:
    if ops.total_dim > MAX_ASSEMBLY_DIM:
        raise ValidationError(
            f"total dimension {ops.total_dim} exceeds the dense assembly bound {MAX_ASSEMBLY_DIM}; "
            "apply the terms one by one with evolve() instead"
        )
    total = np.zeros((ops.total_dim, ops.total_dim), dtype=np.complex128)
    for term in ops.terms:
        k = term[0]
        for f in term[1:]:
            k = np.kron(k, f)
        total += k
    return total


def _apply_factors(amps: np.ndarray, factors: Sequence[np.ndarray]) -> np.ndarray:
    out = amps
    for axis, f in enumerate(factors):
        out = np.moveaxis(np.tensordot(f, out, axes=([1], [axis])), 0, axis)
    return out


def evolve(state: DenseState, ops: ProductOperatorSum) -> DenseState:
    """Apply each product term factor-wise and sum the results in term order."""
    if state.parts != ops.parts:
        raise ValidationError(f"state parts {state.names} do not match operator parts {[p.name for p in ops.parts]}")
    out = np.zeros(state.dims, dtype=np.complex128)
    for term in ops.terms:
        out = out + _apply_factors(state.amplitudes, term)
    normalized = state.normalized and ops.unitary_total
    return DenseState(state.parts, out, normalized=normalized)


def factor_norms(state0: DenseState, ops: ProductOperatorSum) -> np.ndarray:
    """``||U^gamma_alpha psi^gamma_0||`` per term (rows) and part (columns) for a product input."""
    locals_ = _product_factors(state0)
    return np.array([[np.linalg.norm(f @ v) for f, v in zip(term, locals_)] for term in ops.terms])


def _product_factors(state0: DenseState) -> list[np.ndarray]:
    """Split a product state into per-part local vectors (the norm rides on the last)."""
    vecs = []
    rest = state0.amplitudes.reshape(-1)
    for g, d in enumerate(state0.dims[:-1]):
        res = svd(rest.reshape(d, -1), rel_tol=1e-10)
        if res.rank != 1:
            raise ValidationError(f"initial state is not a product state (Schmidt rank {res.rank} at cut {g + 1})")
        vecs.append(res.left[:, 0])
        rest = res.singular_values[0] * res.right_dagger[0]
    vecs.append(rest)
    return vecs


@dataclass(frozen=True)
class CoefficientExpansion:
    """``c_a[j, alpha] = <psi^A_j|U^A_alpha|psi^A_0>``, likewise ``c_b``, and ``coupled = c_a @ c_b.T``."""

    c_a: np.ndarray
    c_b: np.ndarray
    coupled: np.ndarray

    def reconstruct(self, basis_a: np.ndarray, basis_b: np.ndarray) -> np.ndarray:
        return basis_a @ self.coupled @ basis_b.T


def _check_basis(basis: np.ndarray, dim: int, label: str) -> np.ndarray:
    basis = np.asarray(basis, dtype=np.complex128)
    if basis.shape != (dim, dim):
        raise ValidationError(f"basis for {label} must be a complete {dim}x{dim} family, got {basis.shape}")
    if np.abs(basis.conj().T @ basis - np.eye(dim)).max() > NORM_TOL:
        raise ValidationError(f"basis for {label} is not orthonormal / is rank deficient")
    return basis


def expand_coefficients(
    state0: DenseState, ops: ProductOperatorSum, basis_a: np.ndarray, basis_b: np.ndarray
) -> CoefficientExpansion:
    if len(state0.parts) != 2:
        raise ValidationError("expand_coefficients works on two-part product states")
    if state0.parts != ops.parts:
        raise ValidationError("state and operator parts differ")
    ba = _check_basis(basis_a, state0.dims[0], state0.names[0])
    bb = _check_basis(basis_b, state0.dims[1], state0.names[1])
    form = schmidt_decompose(state0, 1, rel_tol=1e-10)
    if form.rank != 1:
        raise ValidationError(f"initial state is not a product state (Schmidt rank {form.rank})")
    psi_a = form.left_states[:, 0] * form.alphas[0]
    psi_b = form.right_states[:, 0]
    c_a = np.stack([ba.conj().T @ (ua @ psi_a) for ua, _ in ops.terms], axis=1)
    c_b = np.stack([bb.conj().T @ (ub @ psi_b) for _, ub in ops.terms], axis=1)
    return CoefficientExpansion(c_a=c_a, c_b=c_b, coupled=c_a @ c_b.T)


def operator_schmidt(
    u: np.ndarray, dims: tuple[int, int], max_terms: int | None = None, rel_tol: float = DEFAULT_REL_TOL
) -> tuple[list[tuple[np.ndarray, np.ndarray]], float]:
    """Split an operator on A(x)B into ``sum_alpha A_alpha (x) B_alpha`` by SVD.

    Returns the factor pairs and the Frobenius norm of what was discarded.
    """
    da, db = dims
    t = np.asarray(u).reshape(da, db, da, db).transpose(0, 2, 1, 3).reshape(da * da, db * db)
    res = svd(t, max_rank=max_terms, rel_tol=rel_tol)
    root = np.sqrt(res.singular_values)
    pairs = [
        ((res.left[:, k] * root[k]).reshape(da, da), (res.right_dagger[k] * root[k]).reshape(db, db))
        for k in range(res.rank)
    ]
    return pairs, res.truncation_error


def propagator_from_hamiltonian(
    h: np.ndarray,
    t_over_hbar: float,
    parts: Sequence[PartLabel | tuple[str, int]],
    max_terms: int | None = None,
    rel_tol: float = DEFAULT_REL_TOL,
) -> ProductOperatorSum:
    """``exp(-i h t)`` written as a sum of product terms across a bipartition."""
    parts = as_parts(parts)
    if len(parts) != 2:
        raise ValidationError(
            f"product-sum factorization is bipartite only ({len(parts)} parts requested); "
            "evolve multipart systems with the dense propagator"
        )
    dim = prod(p.dim for p in parts)
    h = np.asarray(h)
    if h.shape != (dim, dim):
        raise ValidationError(f"Hamiltonian shape {h.shape} does not match joint dimension {dim}")
    if dim > MAX_ASSEMBLY_DIM:
        raise ValidationError(f"joint dimension {dim} exceeds the dense bound {MAX_ASSEMBLY_DIM}")
    u = matrix_exponential_i(h, t_over_hbar)
    pairs, err = operator_schmidt(u, (parts[0].dim, parts[1].dim), max_terms=max_terms, rel_tol=rel_tol)
    exact = err <= 1e-9 * np.sqrt(dim)
    return ProductOperatorSum(parts, tuple(pairs), unitary_total=exact)
