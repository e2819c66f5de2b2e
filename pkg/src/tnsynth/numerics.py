"""Dense complex linear algebra kernel.

Matrices and tensors are plain ``numpy`` arrays (complex128 unless the caller
hands in real data). The singular value decomposition is a one-sided
(Hestenes) Jacobi iteration written here, so the decomposition used to build
Schmidt forms and MPS chains is fully deterministic and carries a fixed
phase convention. Hermitian eigenproblems go through LAPACK.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg

from tnsynth.errors import ValidationError

DEFAULT_REL_TOL = 1e-12
HERMITIAN_TOL = 1e-10
_PHASE_EPS = 1e-12
_MAX_SWEEPS = 80


@dataclass(frozen=True)
class SVDResult:
    """Truncated SVD ``a ~= left @ diag(singular_values) @ right_dagger``."""

    left: np.ndarray
    singular_values: np.ndarray
    right_dagger: np.ndarray
    truncation_error: float

    @property
    def rank(self) -> int:
        return int(self.singular_values.shape[0])

    def reconstruct(self) -> np.ndarray:
        return (self.left * self.singular_values) @ self.right_dagger


def check_finite(a: np.ndarray, what: str = "input") -> None:
    if not np.all(np.isfinite(a)):
        bad = np.argwhere(~np.isfinite(a))[0]
        raise ValidationError(f"{what} has a non-finite entry at index {tuple(int(i) for i in bad)}")


@lru_cache(maxsize=64)
def _round_robin(n: int) -> tuple[tuple[np.ndarray, np.ndarray], ...]:
    """Disjoint column pairs for each round of a cyclic tournament on ``n`` columns."""
    players = list(range(n + (n % 2)))
    size = len(players)
    rounds = []
    for _ in range(size - 1):
        p, q = [], []
        for i in range(size // 2):
            a, b = players[i], players[size - 1 - i]
            if a < n and b < n:
                p.append(min(a, b))
                q.append(max(a, b))
        rounds.append((np.array(p, dtype=np.intp), np.array(q, dtype=np.intp)))
        players = [players[0], players[-1], *players[1:-1]]
    return tuple(rounds)


def _jacobi_tall(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Orthogonalise the columns of a tall matrix ``a`` (m >= n) by plane rotations.

    Returns ``(g, v)`` with ``a @ v = g``, ``v`` unitary and the columns of ``g``
    mutually orthogonal.
    """
    m, n = a.shape
    g = a.astype(np.complex128, copy=True)
    v = np.eye(n, dtype=np.complex128)
    if n < 2:
        return g, v
    tol = max(m, n) * np.finfo(float).eps
    rounds = _round_robin(n)
    for _ in range(_MAX_SWEEPS):
        rotated = False
        for p, q in rounds:
            gp, gq = g[:, p], g[:, q]
            alpha = np.einsum("ij,ij->j", gp.conj(), gp).real
            beta = np.einsum("ij,ij->j", gq.conj(), gq).real
            gamma = np.einsum("ij,ij->j", gp.conj(), gq)
            mag = np.abs(gamma)
            active = (mag > tol * np.sqrt(alpha * beta)) & (mag > 0.0)
            if not active.any():
                continue
            rotated = True
            p, q, gp, gq = p[active], q[active], gp[:, active], gq[:, active]
            alpha, beta, gamma, mag = alpha[active], beta[active], gamma[active], mag[active]
            phase = (gamma / mag).conj()
            zeta = (beta - alpha) / (2.0 * mag)
            t = np.where(zeta >= 0, 1.0, -1.0) / (np.abs(zeta) + np.sqrt(1.0 + zeta * zeta))
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = c * t
            gq = gq * phase
            g[:, p] = c * gp - s * gq
            g[:, q] = s * gp + c * gq
            vp, vq = v[:, p], v[:, q] * phase
            v[:, p] = c * vp - s * vq
            v[:, q] = s * vp + c * vq
        if not rotated:
            break
    return g, v


def _complete_columns(u: np.ndarray, good: np.ndarray) -> np.ndarray:
    """Replace the columns of ``u`` not flagged ``good`` with an orthonormal completion."""
    u = u.copy()
    m = u.shape[0]
    basis = [u[:, j] for j in np.flatnonzero(good)]
    candidates = iter(np.eye(m, dtype=np.complex128))
    for j in np.flatnonzero(~good):
        for e in candidates:
            w = e.copy()
            for _ in range(2):
                for b in basis:
                    w -= b * np.vdot(b, w)
            nrm = np.linalg.norm(w)
            if nrm > 1e-8:
                u[:, j] = w / nrm
                basis.append(u[:, j])
                break
    return u


def _first_nonzero(col: np.ndarray) -> int:
    idx = np.flatnonzero(np.abs(col) > _PHASE_EPS)
    return int(idx[0]) if idx.size else col.shape[0]


def svd(a: np.ndarray, max_rank: int | None = None, rel_tol: float = DEFAULT_REL_TOL) -> SVDResult:
    """Thin SVD with truncation.

    Singular values below ``rel_tol * sigma_max`` are dropped first, then at most
    ``max_rank`` are kept. Equal singular values are ordered by the position of
    the first non-negligible entry of their left vector, and every left vector
    is rotated so that entry is real and positive.
    """
    a = np.asarray(a)
    if a.ndim != 2 or a.size == 0:
        raise ValidationError(f"svd expects a non-empty matrix, got shape {a.shape}")
    if not 0.0 <= rel_tol < 1.0:
        raise ValidationError(f"rel_tol must lie in [0, 1), got {rel_tol}")
    check_finite(a, "matrix")
    m, n = a.shape
    if m >= n:
        g, v = _jacobi_tall(a)
    else:
        g, v = _jacobi_tall(a.conj().T)
    sigma = np.linalg.norm(g, axis=0)
    smax = sigma.max() if sigma.size else 0.0
    good = sigma > max(smax, 1e-300) * 1e-14
    u = np.zeros_like(g)
    u[:, good] = g[:, good] / sigma[good]
    u = _complete_columns(u, good)
    sigma = np.where(good, sigma, 0.0)
    if m >= n:
        left, right = u, v
    else:
        left, right = v, u

    # descending, then ties broken deterministically
    order = _break_ties(list(np.argsort(-sigma, kind="stable")), sigma, left)
    sigma = sigma[order]
    left = left[:, order]
    right = right[:, order]

    for j in range(left.shape[1]):
        i = _first_nonzero(left[:, j])
        if i < left.shape[0]:
            ph = left[i, j] / abs(left[i, j])
            left[:, j] *= ph.conjugate()
            right[:, j] *= ph.conjugate()
    right_dagger = right.conj().T

    keep = sigma.shape[0]
    if sigma.size and rel_tol > 0.0:
        keep = int(np.count_nonzero(sigma >= rel_tol * sigma[0]))
    if max_rank is not None:
        keep = min(keep, max(int(max_rank), 0))
    keep = max(keep, 1)
    err = float(np.sqrt(np.sum(sigma[keep:] ** 2)))
    return SVDResult(
        left=np.ascontiguousarray(left[:, :keep]),
        singular_values=np.ascontiguousarray(sigma[:keep]),
        right_dagger=np.ascontiguousarray(right_dagger[:keep, :]),
        truncation_error=err,
    )


def _break_ties(order: list[int], sigma: np.ndarray, left: np.ndarray) -> list[int]:
    if not order:
        return order
    scale = max(float(sigma[order[0]]), 1e-300)
    out: list[int] = []
    cluster = [order[0]]
    for j in order[1:]:
        if abs(sigma[cluster[0]] - sigma[j]) <= 1e-12 * scale:
            cluster.append(j)
        else:
            out.extend(sorted(cluster, key=lambda c: _first_nonzero(left[:, c])))
            cluster = [j]
    out.extend(sorted(cluster, key=lambda c: _first_nonzero(left[:, c])))
    return out


def check_hermitian(h: np.ndarray, tol: float = HERMITIAN_TOL) -> None:
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {h.shape}")
    check_finite(h, "matrix")
    dev = float(np.max(np.abs(h - h.conj().T))) if h.size else 0.0
    if dev > tol:
        raise ValidationError(f"matrix is not Hermitian: max |h - h^dagger| = {dev:.3e} > {tol:g}")


def hermitian_eig(h: np.ndarray, lowest: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Ascending eigenvalues and unitary eigenvectors of a Hermitian matrix.

    ``lowest`` restricts the computation to that many smallest eigenpairs.
    """
    h = np.asarray(h)
    check_hermitian(h)
    if np.iscomplexobj(h) and not np.any(h.imag):
        h = h.real
    subset = None if lowest is None else (0, min(int(lowest), h.shape[0]) - 1)
    w, v = scipy.linalg.eigh(h, subset_by_index=subset)
    return w, v


def contract(a: np.ndarray, b: np.ndarray, axis_pairs: list[tuple[int, int]]) -> np.ndarray:
    """Contract paired axes; result axes are the free axes of ``a`` then of ``b``."""
    a = np.asarray(a)
    b = np.asarray(b)
    for ia, ib in axis_pairs:
        if not (-a.ndim <= ia < a.ndim and -b.ndim <= ib < b.ndim):
            raise ValidationError(f"axis pair ({ia}, {ib}) out of range for ranks {a.ndim}, {b.ndim}")
        if a.shape[ia] != b.shape[ib]:
            raise ValidationError(
                f"dimension mismatch on axis pair ({ia}, {ib}): {a.shape[ia]} != {b.shape[ib]}"
            )
    axes_a = [ia for ia, _ in axis_pairs]
    axes_b = [ib for _, ib in axis_pairs]
    return np.tensordot(a, b, axes=(axes_a, axes_b))


def matrix_exponential_i(h: np.ndarray, t_over_hbar: float) -> np.ndarray:
    """``exp(-i h t)`` for Hermitian ``h`` via its eigendecomposition."""
    w, v = hermitian_eig(h)
    return (v * np.exp(-1j * w * t_over_hbar)) @ v.conj().T
