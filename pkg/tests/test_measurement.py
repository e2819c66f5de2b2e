import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_complex, random_unitary
from tnsynth.errors import ValidationError
from tnsynth.hsp.circuit import HSPInstance, apply_oracle, build_oracle, prepare_registers
from tnsynth.measurement import (
    fourier_analyze,
    generalized_measure,
    inverse_dft,
    outcome_probabilities,
    project,
    sample,
    subspace_project,
    unitary_dft,
)
from tnsynth.states import (
    BasisChange,
    PartLabel,
    bell_state,
    explicit_schmidt,
    mps_from_dense,
    product_state,
    random_state,
)

R = 1 / np.sqrt(2)
PLUS, MINUS = np.array([R, R]), np.array([R, -R])
B = PartLabel("B", 2)


def test_project_bell_on_zero():
    rec = project(bell_state(2), "B", np.array([1, 0]))
    np.testing.assert_allclose(rec.post_state.vector(), [R, 0])
    assert rec.probability == pytest.approx(0.5)
    np.testing.assert_allclose(rec.post_state_normalized.vector(), [1, 0])


def test_project_schmidt_form_close_to_one():
    form = explicit_schmidt([0.9987, 0.0502, 0.0022])
    rec = project(form, "A", form.left_states[:, 0])
    assert rec.probability == pytest.approx(0.9987**2, abs=1e-15)
    np.testing.assert_allclose(rec.post_state.vector(), 0.9987 * form.right_states[:, 0])


def test_project_completeness(rng):
    s = random_state((3, 4), rng)
    basis = random_unitary(rng, 4)
    total = sum(project(s, "B", basis[:, j]).probability for j in range(4))
    assert total == pytest.approx(1, abs=1e-9)


def test_project_rejects_unnormalized_ket():
    with pytest.raises(ValidationError):
        project(bell_state(2), "B", np.array([1, 1]))


def test_project_rejects_unknown_part():
    with pytest.raises(ValidationError):
        project(bell_state(2), "C", np.array([1, 0]))


def test_impossible_outcome_has_no_normalized_state():
    s = product_state([np.array([1, 0]), np.array([1, 0])])
    rec = project(s, "B", np.array([0, 1]))
    assert rec.probability == 0 and rec.post_state_normalized is None


@pytest.mark.parametrize(
    "which,row,expected",
    [
        (1, PLUS, [R * R, R * R]),
        (2, PLUS, [R * R, R * R]),
        (1, MINUS, [-R * R, R * R]),
        (2, MINUS, [R * R, -R * R]),
    ],
)
def test_kickback_bell(which, row, expected):
    rec = generalized_measure(bell_state(which, "+"), BasisChange(B, row[None, :]), 0)
    post = rec.post_state.vector()
    assert np.abs(post - np.array(expected)).max() <= 1e-12
    assert np.abs(post.imag).max() == 0


def test_generalized_identity_equals_project(rng):
    s = random_state((3, 2), rng)
    change = BasisChange(B, np.eye(2))
    for k in range(2):
        a = generalized_measure(s, change, k).post_state.vector()
        b = project(s, "B", np.eye(2)[k]).post_state.vector()
        np.testing.assert_allclose(a, b, atol=1e-15)


def test_generalized_rejects_unnormalized_row():
    with pytest.raises(ValidationError):
        generalized_measure(bell_state(1), BasisChange(B, np.array([[1.0, 1.0]])), 0)


def test_generalized_on_schmidt_basis():
    form = explicit_schmidt([0.8, 0.6])
    change = BasisChange(PartLabel("A", 2), PLUS[None, :], reference=form.left_states)
    rec = generalized_measure(form, change, 0)
    np.testing.assert_allclose(rec.post_state.vector(), R * np.array([0.8, 0.6]))


@settings(max_examples=100, deadline=None)
@given(da=st.integers(1, 5), db=st.integers(2, 5), seed=st.integers(0, 2**32 - 1))
def test_measurement_completeness_property(da, db, seed):
    rng = np.random.default_rng(seed)
    s = random_state((da, db), rng)
    basis = random_unitary(rng, db)
    probs = outcome_probabilities(s, "B", basis)
    assert probs.sum() == pytest.approx(1, abs=1e-9)
    for j in range(db):
        rec = project(s, "B", basis[:, j])
        assert rec.probability == pytest.approx(probs[j], abs=1e-12)
        assert rec.post_state.norm() == pytest.approx(np.sqrt(rec.probability), abs=1e-10)


def _four_part(rng):
    return random_state((2, 3, 3, 2), rng, names=["R1", "R2", "R3", "R4"])


def test_subspace_delta_is_two_projections(rng):
    s = _four_part(rng)
    chi = np.zeros((3, 3), dtype=complex)
    chi[1, 1] = 1
    joint = subspace_project(s, ["R2", "R3"], chi)
    step = project(project(s, "R2", np.eye(3)[1]).post_state, "R3", np.eye(3)[1]).post_state
    np.testing.assert_allclose(joint.amplitudes, step.amplitudes, atol=1e-15)


def test_subspace_uniform_mps_vs_dense(rng):
    s = _four_part(rng)
    chi = np.zeros((3, 3), dtype=complex)
    chi[:2, :2] = 0.5
    oracle = np.tensordot(chi.conj(), s.amplitudes, axes=([0, 1], [1, 2]))
    via_mps = subspace_project(mps_from_dense(s), ["R2", "R3"], chi)
    via_dense = subspace_project(s, ["R2", "R3"], chi)
    assert np.abs(via_mps.amplitudes - oracle).max() < 1e-10
    assert np.abs(via_dense.amplitudes - oracle).max() < 1e-12
    assert via_mps.names == ["R1", "R4"]


def test_subspace_rejects_noncontiguous(rng):
    chi = np.full((3, 2), 1 / np.sqrt(6))
    with pytest.raises(ValidationError, match="contiguous"):
        subspace_project(mps_from_dense(_four_part(rng)), ["R2", "R4"], chi)


def test_subspace_rejects_unnormalized(rng):
    with pytest.raises(ValidationError):
        subspace_project(_four_part(rng), ["R2", "R3"], np.ones((3, 3)))


def test_sample_deterministic_state():
    s = product_state([np.array([1, 0]), np.array([0, 1])])
    out = sample(s, "B", np.eye(2), 500, seed=3)
    assert out.counts == {1: 500}


def test_sample_bell_frequencies():
    out = sample(bell_state(2), "B", np.eye(2), 100_000, seed=11)
    assert abs(out.frequency(0) - 0.5) < 0.01 and abs(out.frequency(1) - 0.5) < 0.01
    assert sum(out.counts.values()) == 100_000


def test_sample_shor_output_register():
    inst = HSPInstance.shor(21, 10)
    state = apply_oracle(prepare_registers(inst.q, inst.m), build_oracle(inst))
    out = sample(state, "output", np.eye(2**inst.m), 100_000, seed=5)
    assert abs(out.frequency(13) - 5 / 32) < 0.01


def test_sample_reproducible(rng):
    s = random_state((2, 4), rng)
    a = sample(s, "B", np.eye(4), 1000, seed=99)
    b = sample(s, "B", np.eye(4), 1000, seed=99)
    c = sample(s, "B", np.eye(4), 1000, seed=99, stream=1)
    assert a == b and a.counts != c.counts


def test_sample_rejects_nonpositive():
    with pytest.raises(ValidationError):
        sample(bell_state(2), "B", np.eye(2), 0, seed=1)


def test_fourier_delta():
    spec = fourier_analyze(np.array([1, 0, 0, 0]))
    np.testing.assert_allclose(spec.magnitudes, [0.5] * 4)


def test_fourier_comb():
    c = np.zeros(16)
    c[[2, 6, 10, 14]] = 0.5
    spec = fourier_analyze(c)
    assert set(np.flatnonzero(spec.magnitudes > 1e-12)) == {0, 4, 8, 12}


def test_fourier_sign_convention(rng):
    c = random_complex(rng, 8)
    x = np.arange(8)
    oracle = np.array([np.sum(np.exp(2j * np.pi * v * x / 8) * c) for v in range(8)]) / np.sqrt(8)
    np.testing.assert_allclose(unitary_dft(c), oracle, atol=1e-12)


def test_fourier_phases_range(rng):
    spec = fourier_analyze(random_complex(rng, 32))
    assert np.all(spec.phases > -np.pi) and np.all(spec.phases <= np.pi)


@settings(max_examples=100, deadline=None)
@given(n=st.integers(1, 64), seed=st.integers(0, 2**32 - 1))
def test_parseval_and_inverse(n, seed):
    c = random_complex(np.random.default_rng(seed), n)
    spec = fourier_analyze(c)
    assert np.sum(spec.probabilities) == pytest.approx(np.sum(np.abs(c) ** 2), rel=1e-9)
    assert np.abs(inverse_dft(spec.values) - c).max() < 1e-10
