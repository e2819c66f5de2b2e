"""Grid model of shared-proton modes along a water wire.

Each mode is a 1-D coordinate on a uniform grid. The model Hamiltonian is
``sum_g -1/2 d^2/dx_g^2 + V`` (hbar = m = 1) with a quartic double well per
mode and bilinear nearest-neighbour coupling. Ground states are analysed as a
Schmidt pair (two modes) or a matrix product state (longer chains) and then
interrogated by projecting the first mode, rotating the interior modes onto a
subspace ket, and Fourier analysing the far end.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from tnsynth.errors import ValidationError
from tnsynth.measurement import fourier_analyze, generalized_measure, project, subspace_project
from tnsynth.numerics import check_hermitian, hermitian_eig
from tnsynth.states import (
    BasisChange,
    DenseState,
    MPSForm,
    PartLabel,
    SchmidtForm,
    complete_basis,
    dense_from_mps,
    explicit_schmidt,
    mps_from_dense,
    schmidt_decompose,
)

MAX_DENSE_DIM = 4096
MIN_POINTS = 8
POTENTIALS = ("double_well", "harmonic", "zero")
MODES = ("model", "explicit", "synthetic")


@dataclass(frozen=True)
class Grid1D:
    n_points: int
    x_min: float = -2.5
    x_max: float = 2.5

    def __post_init__(self):
        if self.n_points < MIN_POINTS:
            raise ValidationError(f"grid needs at least {MIN_POINTS} points, got {self.n_points}")
        if not self.x_max > self.x_min:
            raise ValidationError("grid needs x_max > x_min")

    @property
    def spacing(self) -> float:
        return (self.x_max - self.x_min) / (self.n_points - 1)

    @property
    def points(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.n_points)


@dataclass(frozen=True)
class ModelPotential:
    """Per-mode well plus ``coupling * x_g * x_{g+1}`` between neighbours.

    ``coupling`` is one value shared by every bond or a tuple with one value
    per bond.
    """

    form: str = "double_well"
    barrier: float = 5.0
    width: float = 1.0
    omega: float = 1.0
    coupling: float | tuple[float, ...] = 0.2

    def __post_init__(self):
        if self.form not in POTENTIALS:
            raise ValidationError(f"unknown potential form {self.form!r}; expected one of {POTENTIALS}")
        if self.width <= 0:
            raise ValidationError("well width must be positive")

    def single(self, x: np.ndarray) -> np.ndarray:
        if self.form == "double_well":
            return self.barrier * ((x / self.width) ** 2 - 1.0) ** 2
        if self.form == "harmonic":
            return 0.5 * self.omega**2 * x**2
        return np.zeros_like(x)

    def couplings(self, n_modes: int) -> np.ndarray:
        c = np.atleast_1d(np.asarray(self.coupling, dtype=float))
        if c.size == 1:
            return np.full(n_modes - 1, c[0])
        if c.size != n_modes - 1:
            raise ValidationError(f"need {n_modes - 1} coupling values, got {c.size}")
        return c


@dataclass(frozen=True)
class WireScenario:
    """Everything needed to run one dimer, pentamer or longer wire analysis.

    ``mode`` selects the state source: ``model`` diagonalizes the grid
    Hamiltonian, ``explicit`` takes Schmidt weights directly (two modes only),
    ``synthetic`` builds a chain from given bond weights with mutually
    orthonormal site kets. ``k`` is the 1-based index of the ket measured on
    the first mode; ``beta`` weights the interior subspace ket.
    """

    n_modes: int
    grid: Grid1D = field(default_factory=lambda: Grid1D(32))
    potential: ModelPotential = field(default_factory=ModelPotential)
    mode: str = "model"
    alphas: tuple[float, ...] | None = None
    bond_weights: tuple[tuple[float, ...], ...] | None = None
    local_dim: int | None = None
    k: int = 1
    superposition: tuple[int, int] = (1, 2)
    beta: np.ndarray | None = None

    def __post_init__(self):
        if self.n_modes < 2:
            raise ValidationError("a wire needs at least 2 modes")
        if self.mode not in MODES:
            raise ValidationError(f"unknown scenario mode {self.mode!r}; expected one of {MODES}")
        if self.k < 1:
            raise ValidationError("measured ket index k is 1-based")
        if self.mode == "explicit":
            if self.n_modes != 2:
                raise ValidationError("explicit Schmidt input describes exactly 2 modes")
            if not self.alphas:
                raise ValidationError("explicit mode needs alphas")
        if self.mode == "synthetic":
            if not self.bond_weights or len(self.bond_weights) != self.n_modes - 1:
                raise ValidationError(f"synthetic mode needs {self.n_modes - 1} bond weight vectors")

    @property
    def part_names(self) -> list[str]:
        return [f"R{g + 1}" for g in range(self.n_modes)]

    @property
    def joint_dim(self) -> int:
        return self.grid.n_points**self.n_modes


def validate_scenario(scenario: WireScenario) -> list[str]:
    out = []
    if scenario.mode == "model" and scenario.joint_dim > MAX_DENSE_DIM:
        out.append(
            f"joint grid size {scenario.grid.n_points}^{scenario.n_modes} = {scenario.joint_dim} exceeds the "
            f"dense diagonalization bound of {MAX_DENSE_DIM}"
        )
    return out


def _kinetic_1d(grid: Grid1D) -> sp.csr_matrix:
    n, h = grid.n_points, grid.spacing
    off = np.full(n - 1, -0.5 / h**2)
    return sp.diags([off, np.full(n, 1.0 / h**2), off], [-1, 0, 1], format="csr")


def single_mode_hamiltonian(grid: Grid1D, potential: ModelPotential) -> np.ndarray:
    """One uncoupled mode: kinetic stencil plus the per-mode well."""
    return _kinetic_1d(grid).toarray() + np.diag(potential.single(grid.points))


def build_hamiltonian(scenario: WireScenario) -> np.ndarray:
    """Dense real-symmetric grid Hamiltonian over all modes (last mode fastest)."""
    problems = validate_scenario(scenario)
    if problems:
        raise ValidationError("; ".join(problems))
    grid, pot, n = scenario.grid, scenario.potential, scenario.n_modes
    t1 = _kinetic_1d(grid)
    eye = sp.identity(grid.n_points, format="csr")
    kin = sp.csr_matrix((scenario.joint_dim, scenario.joint_dim))
    for g in range(n):
        term = sp.identity(1, format="csr")
        for j in range(n):
            term = sp.kron(term, t1 if j == g else eye, format="csr")
        kin = kin + term
    xs = np.meshgrid(*([grid.points] * n), indexing="ij")
    v = sum(pot.single(x) for x in xs)
    for g, lam in enumerate(pot.couplings(n)):
        v = v + lam * xs[g] * xs[g + 1]
    h = kin.toarray() + np.diag(v.reshape(-1))
    check_hermitian(h)
    return h


def ground_state(h: np.ndarray, grids: list[Grid1D] | Grid1D, n_modes: int | None = None) -> DenseState:
    """Lowest eigenvector as a mode tensor, largest-magnitude amplitude made real-positive."""
    if isinstance(grids, Grid1D):
        grids = [grids] * (n_modes or 1)
    dims = tuple(g.n_points for g in grids)
    if np.prod(dims) != h.shape[0]:
        raise ValidationError(f"grids {dims} do not match Hamiltonian size {h.shape[0]}")
    _, vec = hermitian_eig(h, lowest=1)
    v = np.asarray(vec[:, 0], dtype=np.complex128)
    big = np.argmax(np.abs(v))
    v = v * (abs(v[big]) / v[big])
    v /= np.linalg.norm(v)
    parts = tuple(PartLabel(f"R{g + 1}", d) for g, d in enumerate(dims))
    return DenseState(parts, v.reshape(dims))


@lru_cache(maxsize=8)
def _model_state(n_modes: int, grid: Grid1D, potential: ModelPotential) -> DenseState:
    scenario = WireScenario(n_modes, grid, potential)
    return ground_state(build_hamiltonian(scenario), grid, n_modes)


def scenario_state(scenario: WireScenario) -> DenseState:
    """Dense state for ``model`` and ``synthetic`` scenarios (memoized for models)."""
    if scenario.mode == "model":
        return _model_state(scenario.n_modes, scenario.grid, scenario.potential)
    if scenario.mode == "synthetic":
        return dense_from_mps(synthetic_chain(scenario))
    return schmidt_pair(scenario).reconstruct()


def schmidt_pair(scenario: WireScenario) -> SchmidtForm:
    if scenario.mode == "explicit":
        return explicit_schmidt(scenario.alphas, names=("R1", "R2"))
    return schmidt_decompose(scenario_state(scenario), 1)


def synthetic_chain(scenario: WireScenario) -> MPSForm:
    """Chain whose site kets are all mutually orthonormal within each site.

    Site ``g`` gets the ``D_in * D_out`` kets as distinct computational basis
    vectors, so every overlap matrix is the identity. The state is normalized
    when every bond weight vector is.
    """
    weights = [np.asarray(w, dtype=float) for w in scenario.bond_weights]
    bonds = [1] + [w.size for w in weights] + [1]
    need = max(bonds[g] * bonds[g + 1] for g in range(scenario.n_modes))
    d = scenario.local_dim or max(need, MIN_POINTS)
    if d < need:
        raise ValidationError(f"local_dim {d} too small for orthonormal site kets (need {need})")
    sites = []
    for g in range(scenario.n_modes):
        din, dout = bonds[g], bonds[g + 1]
        ket = np.zeros((din, d, dout), dtype=np.complex128)
        for i in range(din):
            for j in range(dout):
                ket[i, i * dout + j, j] = 1.0
        # stored tensors carry the incoming weights, matching MPSForm.vidal
        lam = weights[g - 1] if g else np.ones(1)
        sites.append(ket * lam[:, None, None])
    parts = tuple(PartLabel(n, d) for n in scenario.part_names)
    return MPSForm(parts, tuple(sites), tuple(weights))


def scenario_mps(scenario: WireScenario) -> MPSForm:
    if scenario.mode == "synthetic":
        return synthetic_chain(scenario)
    return mps_from_dense(scenario_state(scenario))


# dimer


@dataclass
class DimerReport:
    alphas: np.ndarray
    k: int
    probability_k: float
    post_state_k: np.ndarray
    superposition: tuple[int, int]
    probability_superposition: float
    post_state_superposition: np.ndarray
    weight_total: float
    completeness: float | None
    spectra: dict
    stages: dict = field(default_factory=dict)


def dimer_scenario(scenario: WireScenario) -> DimerReport:
    """Project the first mode on one Schmidt ket and on an equal superposition of two."""
    if scenario.n_modes != 2:
        raise ValidationError("dimer scenario needs exactly 2 modes")
    form = schmidt_pair(scenario)
    rank = form.rank
    k = scenario.k
    i1, i2 = scenario.superposition
    if k > rank or max(i1, i2) > rank or i1 == i2 or min(i1, i2) < 1:
        raise ValidationError(f"ket indices must be distinct and within the Schmidt rank {rank}")
    part = form.left_parts[0]
    rec_k = project(form, part.name, form.left_states[:, k - 1], outcome_index=k)
    row = np.zeros(rank, dtype=np.complex128)
    row[[i1 - 1, i2 - 1]] = 1 / np.sqrt(2)
    change = BasisChange(part, row[None, :], reference=form.left_states)
    rec_s = generalized_measure(form, change, 0)

    completeness = None
    if scenario.mode != "explicit":
        basis = complete_basis(form.left_states)
        probs = [project(form, part.name, basis[:, j]).probability for j in range(basis.shape[1])]
        completeness = float(np.sum(probs))

    post_k, post_s = rec_k.post_state.vector(), rec_s.post_state.vector()
    spectra = {"k": fourier_analyze(post_k), "superposition": fourier_analyze(post_s)}
    alphas = np.asarray(form.alphas)
    return DimerReport(
        alphas=alphas,
        k=k,
        probability_k=rec_k.probability,
        post_state_k=post_k,
        superposition=(i1, i2),
        probability_superposition=rec_s.probability,
        post_state_superposition=post_s,
        weight_total=float(np.sum(alphas**2)),
        completeness=completeness,
        spectra=spectra,
        stages={
            "stage1": {"modes": ["R1", "R2"], "source": scenario.mode},
            "stage2": {"alphas": alphas, "schmidt_rank": rank},
            "stage3": {
                "w": rec_k.probability,
                "k": k,
                "superposition_outcome": rec_s.probability,
            },
            "qft": {
                "magnitudes_k": spectra["k"].magnitudes,
                "magnitudes_superposition": spectra["superposition"].magnitudes,
            },
        },
    )


# chains


def default_beta(bond_dims: list[int]) -> np.ndarray:
    """Uniform weight on the first two kets of each interior bond."""
    shape = tuple(min(2, d) for d in bond_dims)
    beta = np.zeros(tuple(bond_dims), dtype=np.complex128)
    beta[tuple(slice(0, s) for s in shape)] = 1.0
    return beta


def _interior_kets(kets: list[np.ndarray], k: int) -> list[np.ndarray]:
    """Site kets of modes 2..N-1, the first one restricted to incoming index ``k``."""
    inner = [np.asarray(t) for t in kets[1:-1]]
    if inner:
        inner[0] = inner[0][k : k + 1]
    return inner


def build_chi(kets: list[np.ndarray], k: int, beta: np.ndarray) -> np.ndarray:
    """``sum_i beta[i2..] psi2_{k,i2}(x2) psi3_{i2,i3}(x3) ...`` as a dense tensor."""
    inner = _interior_kets(kets, k)
    n = len(inner)
    # bond labels 0..n (0 is the fixed k), physical labels n+1..2n
    operands = [beta, list(range(1, n + 1))]
    for g, t in enumerate(inner):
        operands += [t, [g, n + 1 + g, g + 1]]
    return np.einsum(*operands, list(range(n + 1, 2 * n + 1)) + [0])[..., 0]


def _gram(t: np.ndarray) -> np.ndarray:
    """Overlaps ``<t[a, :, b] | t[c, :, d]>`` with axes (a, b, c, d)."""
    return np.einsum("axb,cxd->abcd", t.conj(), t)


def bond_space_coefficients(kets: list[np.ndarray], weights: list[np.ndarray], k: int, beta: np.ndarray) -> np.ndarray:
    """Exact end-mode coefficients from site-ket overlap matrices alone.

    Returns ``c`` with the unnormalized end state ``sum_j c[j] psi^N_j``;
    the subspace ket is taken unnormalized (divide by its norm afterwards).
    """
    inner = _interior_kets(kets, k)
    n = len(inner)
    a1 = weights[0][k]
    if n == 0:
        c = np.zeros(weights[0].size, dtype=np.complex128)
        c[k] = a1
        return c
    # bra bonds 0..n, ket bonds n+1..2n+1 (ket bond 0 is the same fixed k)
    operands = [beta.conj(), list(range(1, n + 1))]
    for g, t in enumerate(inner):
        ket_in = 0 if g == 0 else n + 1 + g
        operands += [_gram(t), [g, g + 1, ket_in, n + 2 + g]]
        operands += [weights[g + 1], [n + 2 + g]]
    out = np.einsum(*operands, [2 * n + 1])
    return a1 * out


def closed_form_coefficients(weights: list[np.ndarray], k: int, beta: np.ndarray) -> np.ndarray:
    """``beta* alpha^1_k alpha^2_{i2} ... alpha^{N-1}_{i_{N-1}}`` over the interior indices."""
    c = beta.conj() * weights[0][k]
    for g in range(c.ndim):
        shape = [1] * c.ndim
        shape[g] = -1
        c = c * weights[g + 1].reshape(shape)
    return c


def orthonormality_defect(kets: list[np.ndarray], k: int, beta: np.ndarray) -> float:
    """Largest deviation from the identity of the interior site-ket overlaps.

    Only kets whose bond indices carry beta weight are compared, which is the
    set the closed-form coefficient product silently assumes orthonormal.
    """
    worst = 0.0
    support = np.abs(beta) > 0
    for g, t in enumerate(_interior_kets(kets, k)):
        used_out = np.flatnonzero(support.any(axis=tuple(a for a in range(beta.ndim) if a != g)))
        if g == 0:
            used_in = np.array([0])
        else:
            used_in = np.flatnonzero(support.any(axis=tuple(a for a in range(beta.ndim) if a != g - 1)))
        sub = t[np.ix_(used_in, np.arange(t.shape[1]), used_out)]
        gram = _gram(sub)
        eye = np.einsum("ac,bd->abcd", np.eye(sub.shape[0]), np.eye(sub.shape[2]))
        worst = max(worst, float(np.abs(gram - eye).max()))
    return worst


@dataclass
class WireReport:
    n_modes: int
    k: int
    bond_dims: list[int]
    bond_weights: list[np.ndarray]
    probability_first: float
    chi_norm: float
    beta: np.ndarray
    end_state: np.ndarray
    end_norm: float
    end_distribution: np.ndarray
    coefficients: np.ndarray
    coefficients_closed_form: np.ndarray
    end_state_closed_form: np.ndarray
    closed_form_gap: float
    orthonormality_defect: float
    dense_check: float | None
    bond_space_check: float
    spectrum: object
    completeness: float | None
    truncation_error: float
    stages: dict = field(default_factory=dict)


def mps_norm2(mps: MPSForm) -> float:
    env = np.ones((1, 1), dtype=np.complex128)
    for s in mps.sites:
        s = np.asarray(s)
        env = np.einsum("ab,axc,bxd->cd", env, s.conj(), s)
    return float(env[0, 0].real)


def _project_first(mps: MPSForm, ket: np.ndarray) -> MPSForm:
    head = np.tensordot(ket.conj(), np.asarray(mps.sites[0])[0], axes=([0], [0]))
    first = np.tensordot(head, np.asarray(mps.sites[1]), axes=([0], [0]))[None]
    return MPSForm(mps.parts[1:], (first,) + mps.sites[2:], mps.bond_weights[1:])


def _end_state_from_post(post: MPSForm | DenseState) -> np.ndarray:
    if isinstance(post, MPSForm):
        return np.asarray(post.sites[0]).reshape(-1)
    return post.vector()


def wire_generalize(n_modes: int, scenario: WireScenario, dense_check: bool = True) -> WireReport:
    """Measure mode 1 on its ``k``-th ket, project modes 2..N-1 on the beta subspace ket.

    The end-mode state is computed three ways when the joint size allows:
    MPS contraction, overlap (bond space) algebra, and a dense tensor
    contraction; ``dense_check`` and ``bond_space_check`` report the largest
    disagreement with the MPS result.
    """
    if scenario.n_modes != n_modes:
        raise ValidationError(f"scenario describes {scenario.n_modes} modes, asked for {n_modes}")
    mps = scenario_mps(scenario)
    kets, weights = mps.vidal()
    k = scenario.k - 1
    if k >= mps.bond_dims[0]:
        raise ValidationError(f"k = {scenario.k} exceeds the first bond dimension {mps.bond_dims[0]}")
    interior = mps.bond_dims[1:]
    beta = default_beta(interior) if scenario.beta is None else np.asarray(scenario.beta, dtype=np.complex128)
    if beta.shape != tuple(interior):
        raise ValidationError(f"beta has shape {beta.shape}, interior bond dimensions are {tuple(interior)}")
    bn = np.linalg.norm(beta)
    if bn == 0:
        raise ValidationError("beta must be nonzero")
    beta = beta / bn

    ket1 = kets[0][0, :, k]
    post_a = _project_first(mps, ket1)
    p_first = mps_norm2(post_a)

    names = scenario.part_names
    if n_modes > 2:
        chi = build_chi(kets, k, beta)
        chi_norm = float(np.linalg.norm(chi))
        if chi_norm < 1e-14:
            raise ValidationError("subspace ket vanishes for this beta")
        post_b = subspace_project(post_a, names[1:-1], chi / chi_norm)
        end = post_b.vector()
    else:
        chi, chi_norm = None, 1.0
        end = _end_state_from_post(post_a)

    last = np.asarray(kets[-1])[:, :, 0]
    coeffs = bond_space_coefficients(kets, weights, k, beta) / chi_norm
    bond_err = float(np.abs(coeffs @ last - end).max())
    closed = closed_form_coefficients(weights, k, beta)
    if closed.ndim:
        closed_end = closed.reshape(-1, closed.shape[-1]).sum(axis=0) @ last
    else:
        closed_end = closed * last[k]

    dense_err = None
    if dense_check and scenario.joint_dim <= MAX_DENSE_DIM:
        psi = dense_from_mps(mps).amplitudes
        amps = np.tensordot(ket1.conj(), psi, axes=([0], [0]))
        if chi is not None:
            amps = np.tensordot((chi / chi_norm).conj(), amps, axes=(list(range(chi.ndim)), list(range(chi.ndim))))
        dense_err = float(np.abs(amps.reshape(-1) - end).max())

    completeness = None
    if scenario.mode == "model":
        basis = complete_basis(kets[0][0])
        state = scenario_state(scenario)
        completeness = float(sum(project(state, "R1", basis[:, j]).probability for j in range(basis.shape[1])))

    end_norm = float(np.linalg.norm(end))
    dist = np.abs(end) ** 2
    spectrum = fourier_analyze(end / end_norm if end_norm > 0 else end)
    return WireReport(
        n_modes=n_modes,
        k=scenario.k,
        bond_dims=mps.bond_dims,
        bond_weights=list(weights),
        probability_first=p_first,
        chi_norm=chi_norm,
        beta=beta,
        end_state=end,
        end_norm=end_norm,
        end_distribution=dist,
        coefficients=coeffs,
        coefficients_closed_form=closed,
        end_state_closed_form=closed_end,
        closed_form_gap=float(np.abs(closed_end - end).max()),
        orthonormality_defect=orthonormality_defect(kets, k, beta),
        dense_check=dense_err,
        bond_space_check=bond_err,
        spectrum=spectrum,
        completeness=completeness,
        truncation_error=mps.truncation_error,
        stages={
            "stage1": {"modes": names, "source": scenario.mode},
            "stage2": {"bond_dims": mps.bond_dims, "bond_weights": list(weights)},
            "stage3": {"w_first": p_first, "w_interior": end_norm, "chi_norm": chi_norm},
            "qft": {"magnitudes": spectrum.magnitudes, "phases": spectrum.phases},
        },
    )


def pentamer_scenario(scenario: WireScenario) -> WireReport:
    """Four-mode chain: measure R1, project (R2, R3) on the beta ket, analyse R4."""
    if scenario.n_modes != 4:
        raise ValidationError("pentamer scenario needs exactly 4 modes")
    return wire_generalize(4, scenario)


def uncoupled(potential: ModelPotential) -> ModelPotential:
    return ModelPotential(potential.form, potential.barrier, potential.width, potential.omega, 0.0)
