"""Projective and rotated-basis measurements, sampling and Fourier analysis."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from tnsynth.errors import ValidationError
from tnsynth.rng import Stream
from tnsynth.states import NORM_TOL, BasisChange, DenseState, MPSForm, PartLabel, SchmidtForm


@dataclass(frozen=True)
class MeasurementRecord:
    """Outcome of projecting one part onto a ket.

    ``post_state`` is left unnormalized (its squared norm is the probability);
    ``post_state_normalized`` is ``None`` when the outcome is impossible.
    """

    part: PartLabel
    outcome_index: int | None
    probability: float
    post_state: DenseState
    post_state_normalized: DenseState | None


def _name(part: str | PartLabel) -> str:
    return part.name if isinstance(part, PartLabel) else part


def _check_ket(ket: np.ndarray, dim: int) -> np.ndarray:
    ket = np.asarray(ket, dtype=np.complex128).reshape(-1)
    if ket.size != dim:
        raise ValidationError(f"ket has length {ket.size}, part dimension is {dim}")
    if abs(np.linalg.norm(ket) - 1.0) > NORM_TOL:
        raise ValidationError(f"measurement ket is not normalized (norm {np.linalg.norm(ket):.15g})")
    return ket


def _record(part: PartLabel, index: int | None, remaining: tuple[PartLabel, ...], amps: np.ndarray) -> MeasurementRecord:
    post = DenseState(remaining, amps, normalized=False)
    prob = float(np.vdot(amps, amps).real)
    normed = post.normalize() if prob > 1e-300 else None
    return MeasurementRecord(part, index, prob, post, normed)


def project(
    state: DenseState | SchmidtForm, part: str | PartLabel, ket: np.ndarray, outcome_index: int | None = None
) -> MeasurementRecord:
    """Contract ``<ket|`` over one part; remaining parts keep their order."""
    if isinstance(state, SchmidtForm):
        return _project_schmidt(state, _name(part), ket, outcome_index)
    axis = state.axis(part)
    p = state.parts[axis]
    ket = _check_ket(ket, p.dim)
    amps = np.tensordot(ket.conj(), state.amplitudes, axes=([0], [axis]))
    remaining = state.parts[:axis] + state.parts[axis + 1 :]
    return _record(p, outcome_index, remaining, amps)


def _project_schmidt(form: SchmidtForm, name: str, ket: np.ndarray, outcome_index: int | None) -> MeasurementRecord:
    # sum_i alpha_i <ket|psi_i> |phi_i> for a single-part side; otherwise go dense
    if len(form.left_parts) == 1 and form.left_parts[0].name == name:
        p, mine, other, remaining = form.left_parts[0], form.left_states, form.right_states, form.right_parts
    elif len(form.right_parts) == 1 and form.right_parts[0].name == name:
        p, mine, other, remaining = form.right_parts[0], form.right_states, form.left_states, form.left_parts
    else:
        return project(form.reconstruct(), name, ket, outcome_index)
    ket = _check_ket(ket, p.dim)
    overlaps = ket.conj() @ mine
    amps = other @ (form.alphas * overlaps)
    return _record(p, outcome_index, remaining, amps.reshape(tuple(q.dim for q in remaining)))


def generalized_measure(state: DenseState | SchmidtForm, change: BasisChange, outcome: int) -> MeasurementRecord:
    """Measure ``change.part`` with the rotated ket ``chi_k = sum_j d[k, j] psi_j``.

    The post-state picks up the coefficients ``<chi_k|psi_j>`` of the
    measurement ket on the remaining parts.
    """
    row = change.d[outcome]
    if abs(np.linalg.norm(row) - 1.0) > NORM_TOL:
        raise ValidationError(f"row {outcome} of the basis change is not normalized")
    return project(state, change.part.name, change.ket(outcome), outcome_index=outcome)


def outcome_probabilities(state: DenseState, part: str | PartLabel, basis: np.ndarray) -> np.ndarray:
    """``||<b_j|state>||^2`` for every column ``b_j`` of ``basis``."""
    axis = state.axis(part)
    basis = np.asarray(basis, dtype=np.complex128)
    if basis.shape[0] != state.parts[axis].dim:
        raise ValidationError("basis rows must match the part dimension")
    amps = np.tensordot(basis.conj(), state.amplitudes, axes=([0], [axis]))
    return np.sum(np.abs(amps.reshape(basis.shape[1], -1)) ** 2, axis=1)


def _check_contiguous(names: list[str], block: Sequence[str]) -> list[int]:
    try:
        idx = [names.index(b) for b in block]
    except ValueError:
        raise ValidationError(f"unknown part in {list(block)}; state has {names}") from None
    if idx != list(range(idx[0], idx[0] + len(idx))):
        raise ValidationError(
            f"parts {list(block)} are not a contiguous run of the chain {names}; "
            "convert to a DenseState and project there"
        )
    return idx


def subspace_project(state: DenseState | MPSForm, parts: Sequence[str], chi: np.ndarray) -> DenseState:
    """Contract ``<chi|`` over several parts at once.

    ``chi`` is a tensor over the listed parts (in the listed order) and must be
    normalized. Dense input accepts any subset of parts; an MPS requires a
    contiguous run. The result is the unnormalized state of the other parts.
    """
    chi = np.asarray(chi, dtype=np.complex128)
    if abs(np.linalg.norm(chi) - 1.0) > NORM_TOL:
        raise ValidationError(f"chi is not normalized (norm {np.linalg.norm(chi):.15g})")
    names = [_name(p) for p in parts]
    if isinstance(state, MPSForm):
        return _subspace_project_mps(state, names, chi)
    axes = [state.axis(n) for n in names]
    dims = tuple(state.parts[a].dim for a in axes)
    if chi.shape != dims:
        raise ValidationError(f"chi has shape {chi.shape}, parts have dims {dims}")
    amps = np.tensordot(chi.conj(), state.amplitudes, axes=(list(range(len(axes))), axes))
    remaining = tuple(p for i, p in enumerate(state.parts) if i not in axes)
    return DenseState(remaining, amps, normalized=False)


def _subspace_project_mps(mps: MPSForm, names: list[str], chi: np.ndarray) -> DenseState:
    all_names = [p.name for p in mps.parts]
    idx = _check_contiguous(all_names, names)
    first, last = idx[0], idx[-1]
    dims = tuple(mps.parts[i].dim for i in idx)
    if chi.shape != dims:
        raise ValidationError(f"chi has shape {chi.shape}, parts have dims {dims}")
    # left: open physical legs of the sites before the block, then the bond
    left = np.ones((1,), dtype=np.complex128)
    for g in range(first):
        left = np.tensordot(left, mps.sites[g], axes=([left.ndim - 1], [0]))
    left = left.reshape(-1, mps.sites[first].shape[0])
    # block: bond_in x block physical x bond_out, contracted with conj(chi)
    block = np.array(mps.sites[first])
    for g in range(first + 1, last + 1):
        block = np.tensordot(block, mps.sites[g], axes=([block.ndim - 1], [0]))
    block = np.tensordot(chi.conj(), block, axes=(list(range(chi.ndim)), list(range(1, 1 + chi.ndim))))
    acc = left @ block
    for g in range(last + 1, len(mps.sites)):
        acc = np.tensordot(acc, mps.sites[g], axes=([acc.ndim - 1], [0]))
    remaining = mps.parts[:first] + mps.parts[last + 1 :]
    shape = tuple(p.dim for p in remaining)
    return DenseState(remaining, acc.reshape(shape), normalized=False)


@dataclass(frozen=True)
class SampleSet:
    seed: int
    n: int
    counts: dict[int, int]
    stream: int = 0

    def frequency(self, outcome: int) -> float:
        return self.counts.get(outcome, 0) / self.n


def sample(
    state: DenseState, part: str | PartLabel, basis: np.ndarray, n: int, seed: int, stream: int = 0
) -> SampleSet:
    """Draw ``n`` outcomes of measuring ``part`` in ``basis`` (columns)."""
    if n < 1:
        raise ValidationError(f"n must be >= 1, got {n}")
    probs = outcome_probabilities(state, part, basis)
    rng = Stream(seed, stream)
    draws = rng.choice(probs, size=n)
    values, counts = np.unique(draws, return_counts=True)
    return SampleSet(seed=rng.seed, n=int(n), counts={int(v): int(c) for v, c in zip(values, counts)}, stream=stream)


def unitary_dft(c: np.ndarray) -> np.ndarray:
    """``F[v] = M^{-1/2} sum_x exp(+2 pi i v x / M) c[x]``."""
    c = np.asarray(c, dtype=np.complex128).reshape(-1)
    return np.fft.ifft(c, norm="ortho")


def inverse_dft(f: np.ndarray) -> np.ndarray:
    return np.fft.fft(np.asarray(f, dtype=np.complex128).reshape(-1), norm="ortho")


@dataclass(frozen=True)
class Spectrum:
    frequencies: np.ndarray
    magnitudes: np.ndarray
    phases: np.ndarray
    values: np.ndarray

    @property
    def probabilities(self) -> np.ndarray:
        return self.magnitudes**2


def fourier_analyze(coefficients: np.ndarray) -> Spectrum:
    c = np.asarray(coefficients, dtype=np.complex128).reshape(-1)
    if c.size < 1:
        raise ValidationError("fourier_analyze needs at least one coefficient")
    f = unitary_dft(c)
    mags = np.abs(f)
    phases = np.where(mags > 1e-15, np.angle(f), 0.0)
    phases = np.where(phases <= -np.pi, np.pi, phases)
    return Spectrum(np.arange(c.size), mags, phases, f)
