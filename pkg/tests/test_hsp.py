from fractions import Fraction
from math import gcd

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tnsynth.errors import AlgorithmFailure, PeriodNotFound, ValidationError
from tnsynth.hsp.circuit import (
    HSPInstance,
    OracleTable,
    apply_oracle,
    bits,
    build_oracle,
    final_transform,
    hadamard_all,
    measure_output,
    oracle_operator_sum,
    prepare_registers,
    qft,
)
from tnsynth.hsp.numtheory import (
    continued_fraction,
    convergents,
    extract_period,
    factors_from_period,
    mod_exp,
    multiplicative_order,
)
from tnsynth.hsp.shor import parse_script, shor_factor
from tnsynth.hsp.template import gf2_rank, run_template, solve_simon
from tnsynth.states import schmidt_decompose


def shor_state(n, a):
    inst = HSPInstance.shor(n, a)
    return inst, build_oracle(inst), apply_oracle(prepare_registers(inst.q, inst.m), build_oracle(inst))


# oracle


def test_oracle_shor_15():
    f = build_oracle(HSPInstance.shor(15, 2)).f
    assert list(f[:5]) == [1, 2, 4, 8, 1]


def test_oracle_shor_21():
    f = build_oracle(HSPInstance.shor(21, 10)).f
    assert (f[2], f[3], f[5]) == (16, 13, 19)


def test_oracle_bv_parity():
    f = build_oracle(HSPInstance.bernstein_vazirani("101")).f
    assert f[0b010] == 0 and f[0b100] == 1 and f[0b111] == 0


def test_oracle_simon_two_to_one():
    s = 0b110
    f = build_oracle(HSPInstance.simon("110")).f
    for x in range(8):
        assert f[x] == f[x ^ s]
    assert len(set(f.tolist())) == 4


def test_instance_validation():
    with pytest.raises(ValidationError):
        HSPInstance.simon("000")
    with pytest.raises(ValidationError, match="1 < a < N"):
        HSPInstance.shor(15, 15)
    with pytest.raises(ValidationError):
        HSPInstance.deutsch_jozsa([0, 0, 0, 1])
    with pytest.raises(ValidationError):
        HSPInstance("bernstein_vazirani", 3, 1, {"secret": "10"})


def test_oracle_table_range():
    with pytest.raises(ValidationError):
        OracleTable(1, 1, np.array([0, 2]))


# registers and oracle application


def test_prepare_small():
    np.testing.assert_allclose(prepare_registers(1, 1).vector(), [2**-0.5, 0, 2**-0.5, 0])


def test_prepare_shor_15():
    s = prepare_registers(4, 4)
    np.testing.assert_allclose(s.amplitudes[:, 0], 0.25)
    assert np.count_nonzero(s.amplitudes) == 16
    assert schmidt_decompose(s, 1).rank == 1


def test_prepare_bound():
    with pytest.raises(ValidationError, match="dense simulation bound"):
        prepare_registers(13, 12)


def test_apply_oracle_support_15():
    _, oracle, state = shor_state(15, 2)
    support = {tuple(ix) for ix in np.argwhere(np.abs(state.amplitudes) > 0)}
    assert support == {(x, pow(2, x, 15)) for x in range(16)}


def test_apply_oracle_permutation_exact():
    _, _, state = shor_state(21, 10)
    amps = state.amplitudes
    assert sorted(np.abs(amps[np.abs(amps) > 0])) == [2**-2.5] * 32
    assert state.norm() == pytest.approx(1, abs=1e-15)


def test_schmidt_rank_equals_period_21():
    _, oracle, state = shor_state(21, 10)
    distinct = len({pow(10, x, 21) for x in range(32)})
    assert distinct == 6
    assert schmidt_decompose(state, 1).rank == distinct
    assert oracle_operator_sum(oracle).n_terms == distinct


def test_deutsch_constant_factorizes():
    inst = HSPInstance.deutsch([1, 1])
    state = apply_oracle(prepare_registers(1, 1), build_oracle(inst))
    assert schmidt_decompose(state, 1).rank == 1


# collapse and QFT


def test_measure_output_15():
    _, _, state = shor_state(15, 2)
    collapsed, p, _ = measure_output(state, w=4)
    assert p == pytest.approx(4 / 16)
    assert set(np.flatnonzero(np.abs(collapsed.vector()) > 1e-12)) == {2, 6, 10, 14}


def test_measure_output_21():
    _, _, state = shor_state(21, 10)
    collapsed, p, _ = measure_output(state, w=13)
    assert p == pytest.approx(5 / 32)
    assert set(np.flatnonzero(np.abs(collapsed.vector()) > 1e-12)) == {3, 9, 15, 21, 27}


def test_measure_output_deutsch_constant():
    inst = HSPInstance.deutsch([0, 0])
    state = apply_oracle(prepare_registers(1, 1), build_oracle(inst))
    collapsed, p, _ = measure_output(state, w=0)
    assert p == pytest.approx(1)
    np.testing.assert_allclose(np.abs(collapsed.vector()), [2**-0.5] * 2)


def test_measure_output_unattainable():
    _, _, state = shor_state(15, 2)
    with pytest.raises(ValidationError, match="not attainable"):
        measure_output(state, w=3)


@pytest.mark.parametrize("n,a", [(15, 2), (15, 7), (21, 10), (21, 2), (35, 3)])
def test_collapse_stride_is_order(n, a):
    _, oracle, state = shor_state(n, a)
    order = multiplicative_order(a, n)
    for w in oracle.values():
        support = np.flatnonzero(np.abs(measure_output(state, w=w)[0].vector()) > 1e-12)
        assert set(np.diff(support)) <= {order}


def test_qft_comb_15():
    c = np.zeros(16)
    c[[2, 6, 10, 14]] = 0.5
    p = np.abs(qft(c)) ** 2
    assert set(np.flatnonzero(p > 1e-12)) == {0, 4, 8, 12}
    np.testing.assert_allclose(p[[0, 4, 8, 12]], 0.25, atol=1e-12)


def test_qft_uniform_is_delta():
    p = np.abs(qft(np.full(8, 8**-0.5))) ** 2
    np.testing.assert_allclose(p, np.eye(8)[0], atol=1e-15)


def test_qft_rejects_non_power_of_two():
    with pytest.raises(ValidationError):
        qft(np.ones(6) / np.sqrt(6))


@pytest.mark.parametrize("s", [1, 2, 4, 8])
def test_qft_exact_when_period_divides(s):
    m = 32
    c = np.zeros(m)
    c[3 % s :: s] = 1
    c /= np.linalg.norm(c)
    p = np.abs(qft(c)) ** 2
    expected = np.zeros(m)
    expected[:: m // s] = 1 / s
    assert np.abs(p - expected).max() < 1e-12


def test_hadamard_uniform_and_q1():
    np.testing.assert_allclose(hadamard_all(np.full(4, 0.5)), [1, 0, 0, 0], atol=1e-15)
    v = np.array([0.6, 0.8j])
    np.testing.assert_allclose(hadamard_all(v), qft(v), atol=1e-15)
    assert final_transform("qft") is qft
    with pytest.raises(ValidationError):
        final_transform("haar")


# number theory


def test_extract_period_worked_cases():
    assert extract_period(12, 16, 15, 2) == 4
    assert extract_period(27, 32, 21, 10) == 6


def test_convergents_27_32():
    assert continued_fraction(27, 32) == [0, 1, 5, 2, 2]
    assert convergents(27, 32) == [Fraction(0), Fraction(1), Fraction(5, 6), Fraction(11, 13), Fraction(27, 32)]


def test_extract_period_failures():
    with pytest.raises(PeriodNotFound):
        extract_period(0, 16, 15, 2)
    with pytest.raises(PeriodNotFound):
        extract_period(8, 16, 15, 2)
    with pytest.raises(ValidationError):
        extract_period(16, 16, 15, 2)


def test_factors_from_period():
    assert set(factors_from_period(15, 2, 4)) == {3, 5}
    assert set(factors_from_period(21, 10, 6)) == {3, 7}
    with pytest.raises(PeriodNotFound, match="odd"):
        factors_from_period(21, 2, 3)
    with pytest.raises(PeriodNotFound):
        factors_from_period(15, 14, 2)


@settings(max_examples=200, deadline=None)
@given(base=st.integers(0, 10**6), exp=st.integers(0, 10**4), mod=st.integers(1, 10**6))
def test_mod_exp_matches_pow(base, exp, mod):
    assert mod_exp(base, exp, mod) == pow(base, exp, mod)


@settings(max_examples=100, deadline=None)
@given(num=st.integers(0, 4096), den=st.integers(1, 4096))
def test_last_convergent_is_value(num, den):
    assert convergents(num, den)[-1] == Fraction(num, den)


# factoring


def test_shor_15_scripted():
    t = shor_factor(15, 2, script=[(4, 12)])
    assert t.collapsed_support == [2, 6, 10, 14]
    assert t.period == 4 and set(t.factors) == {3, 5}
    assert (3, 4) in t.convergents
    assert t.rng_calls == 0 and t.mode == "scripted"
    assert t.stages["stage3"]["stride"] == 4
    assert set(t.stages) == {"stage1", "stage2", "stage3", "qft", "postprocess"}


def test_shor_21_scripted():
    t = shor_factor(21, 10, script=[(13, 27)])
    assert t.period == 6 and set(t.factors) == {7, 3}
    assert t.factors[0] == gcd(21, 10**3 + 1)


def test_shor_retry_in_script():
    t = shor_factor(15, 2, script=[(4, 0), (4, 8), (4, 4)])
    assert t.success and len(t.attempts) == 3 and t.period == 4
    assert "failure" in t.attempts[0] and "failure" in t.attempts[1]


def test_shor_script_exhausted():
    t = shor_factor(15, 2, script=[(4, 0)])
    assert not t.success and t.notes


def test_shor_classical_shortcut():
    t = shor_factor(15, 6, seed=1)
    assert t.mode == "classical" and set(t.factors) == {3, 5} and t.rng_calls == 0


def test_shor_validation():
    for n, a in [(15, 1), (15, 15), (13, 2), (16, 3), (5001, 2)]:
        with pytest.raises(ValidationError):
            shor_factor(n, a, seed=1)
    with pytest.raises(ValidationError, match="zero probability"):
        shor_factor(15, 2, script=[(4, 3)])
    with pytest.raises(ValidationError):
        shor_factor(15, 2)


def test_shor_seeded_reproducible():
    a = shor_factor(21, 10, seed=42)
    b = shor_factor(21, 10, seed=42)
    assert a.to_dict() == b.to_dict() and a.rng_calls > 0


def test_parse_script():
    assert parse_script("w=4,v=12") == [(4, 12)]
    assert parse_script("w=4,v=0; w=1,v=4") == [(4, 0), (1, 4)]
    for bad in ["w=4", "x=1,v=2", "w=a,v=2", ""]:
        with pytest.raises(ValidationError):
            parse_script(bad)


# template


def test_template_deutsch_constant():
    t = run_template(HSPInstance.deutsch([1, 1]), seed=3)
    assert t.result["verdict"] == "constant" and t.result["probability_zero"] == pytest.approx(1)


def test_template_deutsch_balanced():
    t = run_template(HSPInstance.deutsch([0, 1]), seed=3)
    assert t.result["verdict"] == "balanced" and t.result["probability_zero"] < 1e-12


def test_template_dj_balanced_q3():
    t = run_template(HSPInstance.deutsch_jozsa([0, 1, 1, 0, 0, 1, 1, 0]), seed=5)
    assert t.result["probability_zero"] < 1e-12 and t.result["verdict"] == "balanced"


def test_template_bv_deterministic():
    for seed in range(5):
        t = run_template(HSPInstance.bernstein_vazirani("1011"), seed=seed)
        assert t.result["secret"] == "1011" and t.runs[0]["p_y"] == pytest.approx(1)


def test_template_simon_orthogonal_samples():
    for seed in range(10):
        t = run_template(HSPInstance.simon("110"), seed=seed)
        assert all(r["orthogonal"] for r in t.runs)
        assert t.result["secret"] == "110"


def test_template_simon_script_singular():
    t = run_template(HSPInstance.simon("110"), script=[(0, 0b111), (1, 0b111)])
    assert not t.success and t.rng_calls == 0


def test_template_shor_delegates():
    t = run_template(HSPInstance.shor(15, 2), script=[(4, 12)])
    assert t.result["period"] == 4 and set(t.result["factors"]) == {3, 5}


@settings(max_examples=100, deadline=None)
@given(q=st.integers(2, 8), data=st.data())
def test_solve_simon_property(q, data):
    s = data.draw(st.integers(1, 2**q - 1))
    orth = [y for y in range(1, 2**q) if bin(y & s).count("1") % 2 == 0]
    ys = data.draw(st.permutations(orth))
    assert gf2_rank(ys) == q - 1
    assert solve_simon(list(ys), q) == s


def test_solve_simon_rank_deficient():
    with pytest.raises(AlgorithmFailure):
        solve_simon([0b011], 3)


def test_bits_rendering():
    assert bits(11, 4) == "1011" and bits(1, 3) == "001"
