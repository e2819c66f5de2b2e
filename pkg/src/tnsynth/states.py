"""Multipartite state representations: dense tensors, Schmidt forms and MPS chains."""

from __future__ import annotations

from dataclasses import dataclass, field
from math import prod
from typing import Sequence

import numpy as np

from tnsynth.errors import ValidationError
from tnsynth.numerics import DEFAULT_REL_TOL, check_finite, svd

NORM_TOL = 1e-10


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.complex128, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class PartLabel:
    name: str
    dim: int

    def __post_init__(self):
        if self.dim < 1:
            raise ValidationError(f"part {self.name!r} must have dim >= 1, got {self.dim}")


def as_parts(parts: Sequence[PartLabel | tuple[str, int]]) -> tuple[PartLabel, ...]:
    out = tuple(p if isinstance(p, PartLabel) else PartLabel(*p) for p in parts)
    names = [p.name for p in out]
    if len(set(names)) != len(names):
        raise ValidationError(f"part names must be unique, got {names}")
    return out


@dataclass(frozen=True)
class DenseState:
    """Amplitude tensor over an ordered list of parts (axis ``i`` <-> ``parts[i]``)."""

    parts: tuple[PartLabel, ...]
    amplitudes: np.ndarray
    normalized: bool = True

    def __post_init__(self):
        parts = as_parts(self.parts)
        amps = _frozen(self.amplitudes)
        shape = tuple(p.dim for p in parts)
        if amps.shape != shape:
            if amps.size != prod(shape):
                raise ValidationError(f"amplitudes of size {amps.size} do not fit part dims {shape}")
            amps = _frozen(amps.reshape(shape))
        check_finite(amps, "amplitudes")
        object.__setattr__(self, "parts", parts)
        object.__setattr__(self, "amplitudes", amps)
        if self.normalized and abs(self.norm() - 1.0) > NORM_TOL:
            raise ValidationError(f"state flagged normalized has norm {self.norm():.15g}")

    @property
    def names(self) -> list[str]:
        return [p.name for p in self.parts]

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(p.dim for p in self.parts)

    def axis(self, part: str | PartLabel) -> int:
        name = part.name if isinstance(part, PartLabel) else part
        try:
            return self.names.index(name)
        except ValueError:
            raise ValidationError(f"unknown part {name!r}; state has {self.names}") from None

    def vector(self) -> np.ndarray:
        return self.amplitudes.reshape(-1)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalize(self) -> DenseState:
        nrm = self.norm()
        if nrm == 0.0:
            raise ValidationError("cannot normalize the zero state")
        return DenseState(self.parts, self.amplitudes / nrm, normalized=True)


def product_state(locals_: Sequence[np.ndarray], names: Sequence[str] | None = None) -> DenseState:
    vecs = [np.asarray(v, dtype=np.complex128).reshape(-1) for v in locals_]
    for i, v in enumerate(vecs):
        if abs(np.linalg.norm(v) - 1.0) > NORM_TOL:
            raise ValidationError(f"local vector {i} is not normalized (norm {np.linalg.norm(v):.15g})")
    if names is None:
        names = [chr(ord("A") + i) for i in range(len(vecs))]
    amps = vecs[0]
    for v in vecs[1:]:
        amps = np.multiply.outer(amps, v)
    return DenseState(as_parts(zip(names, (v.size for v in vecs))), amps)


def bell_state(which: int, sign: str = "+") -> DenseState:
    """``which=1``: (|01> +- |10>)/sqrt2, ``which=2``: (|00> +- |11>)/sqrt2."""
    if sign not in "+-" or len(sign) != 1:
        raise ValidationError(f"sign must be '+' or '-', got {sign!r}")
    s = 1.0 if sign == "+" else -1.0
    amps = np.zeros((2, 2), dtype=np.complex128)
    r = 1.0 / np.sqrt(2.0)
    if which == 1:
        amps[0, 1], amps[1, 0] = r, s * r
    elif which == 2:
        amps[0, 0], amps[1, 1] = r, s * r
    else:
        raise ValidationError(f"which must be 1 or 2, got {which}")
    return DenseState(as_parts([("A", 2), ("B", 2)]), amps)


def random_state(dims: Sequence[int], rng: np.random.Generator, names: Sequence[str] | None = None) -> DenseState:
    amps = rng.normal(size=tuple(dims)) + 1j * rng.normal(size=tuple(dims))
    amps /= np.linalg.norm(amps)
    if names is None:
        names = [chr(ord("A") + i) for i in range(len(dims))]
    return DenseState(as_parts(zip(names, dims)), amps)


@dataclass(frozen=True)
class SchmidtForm:
    """``sum_i alphas[i] |left_states[:, i]> |right_states[:, i]>`` across a cut.

    ``left_states`` has one row per joint basis index of the left block (parts
    before the cut, flattened last-axis-fastest), likewise for the right block.
    """

    cut: int
    left_parts: tuple[PartLabel, ...]
    right_parts: tuple[PartLabel, ...]
    alphas: np.ndarray
    left_states: np.ndarray
    right_states: np.ndarray
    truncation_error: float = 0.0

    @property
    def rank(self) -> int:
        return int(self.alphas.shape[0])

    @property
    def parts(self) -> tuple[PartLabel, ...]:
        return self.left_parts + self.right_parts

    def reconstruct(self) -> DenseState:
        mat = (self.left_states * self.alphas) @ self.right_states.T
        amps = mat.reshape(tuple(p.dim for p in self.parts))
        normalized = abs(np.linalg.norm(amps) - 1.0) <= NORM_TOL
        return DenseState(self.parts, amps, normalized=normalized)


def schmidt_decompose(
    state: DenseState, cut: int, rel_tol: float = DEFAULT_REL_TOL, max_rank: int | None = None
) -> SchmidtForm:
    n = len(state.parts)
    if not 1 <= cut < n:
        raise ValidationError(f"cut must satisfy 1 <= cut < {n}, got {cut}")
    left_parts, right_parts = state.parts[:cut], state.parts[cut:]
    dl = prod(p.dim for p in left_parts)
    res = svd(state.amplitudes.reshape(dl, -1), max_rank=max_rank, rel_tol=rel_tol)
    return SchmidtForm(
        cut=cut,
        left_parts=left_parts,
        right_parts=right_parts,
        alphas=res.singular_values,
        left_states=res.left,
        right_states=res.right_dagger.T,
        truncation_error=res.truncation_error,
    )


def explicit_schmidt(
    alphas: Sequence[float],
    left_states: np.ndarray | None = None,
    right_states: np.ndarray | None = None,
    names: tuple[str, str] = ("A", "B"),
) -> SchmidtForm:
    """Schmidt form assembled from given weights and (default: canonical) factor families.

    The weights are taken as given; they are not renormalised.
    """
    alphas = np.asarray(alphas, dtype=float)
    r = alphas.size
    left = np.eye(r, dtype=np.complex128) if left_states is None else np.asarray(left_states, dtype=np.complex128)
    right = np.eye(r, dtype=np.complex128) if right_states is None else np.asarray(right_states, dtype=np.complex128)
    for fam, label in ((left, "left"), (right, "right")):
        if fam.ndim != 2 or fam.shape[1] != r:
            raise ValidationError(f"{label} family must have {r} columns, got shape {fam.shape}")
        if np.abs(fam.conj().T @ fam - np.eye(r)).max() > NORM_TOL:
            raise ValidationError(f"{label} family is not orthonormal")
    return SchmidtForm(
        cut=1,
        left_parts=(PartLabel(names[0], left.shape[0]),),
        right_parts=(PartLabel(names[1], right.shape[0]),),
        alphas=alphas,
        left_states=left,
        right_states=right,
    )


@dataclass(frozen=True)
class MPSForm:
    """Open-boundary matrix product state in left-canonical gauge.

    ``sites[g]`` has shape (bond_in, dim, bond_out). ``bond_weights[g]`` are the
    Schmidt weights on the bond between site ``g`` and ``g + 1``; they are kept
    alongside the tensors, and the last site carries the norm.
    """

    parts: tuple[PartLabel, ...]
    sites: tuple[np.ndarray, ...]
    bond_weights: tuple[np.ndarray, ...]
    truncation_error: float = 0.0
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "parts", as_parts(self.parts))
        object.__setattr__(self, "sites", tuple(_frozen(s) for s in self.sites))
        object.__setattr__(self, "bond_weights", tuple(np.asarray(b, dtype=float) for b in self.bond_weights))
        if len(self.sites) != len(self.parts):
            raise ValidationError("one site tensor per part required")
        if len(self.bond_weights) != len(self.sites) - 1:
            raise ValidationError("need len(sites) - 1 bond weight vectors")
        if self.sites[0].shape[0] != 1 or self.sites[-1].shape[2] != 1:
            raise ValidationError("boundary bonds must have dimension 1")
        for g, (s, p) in enumerate(zip(self.sites, self.parts)):
            if s.ndim != 3 or s.shape[1] != p.dim:
                raise ValidationError(f"site {g} has shape {s.shape}, expected (*, {p.dim}, *)")
            if g + 1 < len(self.sites):
                if s.shape[2] != self.sites[g + 1].shape[0] or s.shape[2] != self.bond_weights[g].size:
                    raise ValidationError(f"bond {g} dimensions disagree")

    @property
    def bond_dims(self) -> list[int]:
        return [b.size for b in self.bond_weights]

    def vidal(self) -> tuple[list[np.ndarray], list[np.ndarray]]:
        """Site kets with the bond weights factored out.

        Returns ``(kets, weights)`` with ``kets[g] = sites[g] / weights[g-1]`` on
        the incoming bond, so the chain reads ``k0 w0 k1 w1 ... k_last``. The first
        and last entries are the Schmidt families at the two boundary cuts.
        """
        if "vidal" not in self._cache:
            kets = [np.array(self.sites[0])]
            for g in range(1, len(self.sites)):
                w = self.bond_weights[g - 1]
                safe = np.where(w > 0, w, 1.0)
                kets.append(np.array(self.sites[g]) / safe[:, None, None])
            self._cache["vidal"] = (kets, list(self.bond_weights))
        return self._cache["vidal"]


def mps_from_dense(
    state: DenseState, rel_tol: float = DEFAULT_REL_TOL, max_bond: int | None = None
) -> MPSForm:
    if abs(state.norm() - 1.0) > NORM_TOL:
        raise ValidationError(f"mps_from_dense needs a normalized state (norm {state.norm():.15g})")
    dims = state.dims
    sites, weights = [], []
    err2 = 0.0
    rest = state.amplitudes.reshape(1, -1)
    bond = 1
    for g, d in enumerate(dims[:-1]):
        mat = rest.reshape(bond * d, -1)
        res = svd(mat, max_rank=max_bond, rel_tol=rel_tol)
        err2 += res.truncation_error**2
        r = res.rank
        sites.append(res.left.reshape(bond, d, r))
        weights.append(res.singular_values)
        rest = res.singular_values[:, None] * res.right_dagger
        bond = r
    sites.append(rest.reshape(bond, dims[-1], 1))
    return MPSForm(state.parts, tuple(sites), tuple(weights), truncation_error=float(np.sqrt(err2)))


def dense_from_mps(mps: MPSForm) -> DenseState:
    acc = np.array(mps.sites[0]).reshape(mps.parts[0].dim, -1)
    for s in mps.sites[1:]:
        acc = np.tensordot(acc, s, axes=([acc.ndim - 1], [0]))
    amps = acc.reshape(tuple(p.dim for p in mps.parts))
    normalized = abs(np.linalg.norm(amps) - 1.0) <= NORM_TOL
    return DenseState(mps.parts, amps, normalized=normalized)


@dataclass(frozen=True)
class BasisChange:
    """Alternative basis on one part: ``d[i, j] = <psi_j | chi_i>``.

    ``reference`` holds the original family ``psi_j`` as columns (default: the
    computational basis of the part).
    """

    part: PartLabel
    d: np.ndarray
    reference: np.ndarray | None = None

    def __post_init__(self):
        d = np.atleast_2d(np.asarray(self.d, dtype=np.complex128))
        object.__setattr__(self, "d", d)
        ref = self.reference
        if ref is None:
            ref = np.eye(self.part.dim, dtype=np.complex128)
        ref = np.asarray(ref, dtype=np.complex128)
        if ref.shape[0] != self.part.dim or ref.shape[1] != d.shape[1]:
            raise ValidationError(
                f"reference family shape {ref.shape} incompatible with d {d.shape} on part dim {self.part.dim}"
            )
        object.__setattr__(self, "reference", ref)

    def ket(self, k: int) -> np.ndarray:
        """The measurement ket ``chi_k`` in the part's local coordinates."""
        return self.reference @ self.d[k]

    def is_unitary(self, tol: float = NORM_TOL) -> bool:
        d = self.d
        return d.shape[0] == d.shape[1] and np.abs(d @ d.conj().T - np.eye(d.shape[0])).max() <= tol


def complete_basis(columns: np.ndarray) -> np.ndarray:
    """Extend orthonormal columns to a full orthonormal basis of their space."""
    columns = np.asarray(columns, dtype=np.complex128)
    m, r = columns.shape
    out = np.zeros((m, m), dtype=np.complex128)
    out[:, :r] = columns
    basis = [columns[:, j] for j in range(r)]
    j = r
    for e in np.eye(m, dtype=np.complex128):
        if j == m:
            break
        w = e.copy()
        for _ in range(2):
            for b in basis:
                w -= b * np.vdot(b, w)
        nrm = np.linalg.norm(w)
        if nrm > 1e-8:
            out[:, j] = w / nrm
            basis.append(out[:, j])
            j += 1
    return out
