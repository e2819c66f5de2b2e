"""The generic prepare / oracle / measure / transform / measure template."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from tnsynth.errors import AlgorithmFailure, ValidationError
from tnsynth.hsp.circuit import (
    HSPInstance,
    apply_oracle,
    bits,
    build_oracle,
    final_transform,
    initial_output,
    measure_output,
    prepare_registers,
    transform_for,
)
from tnsynth.measurement import project
from tnsynth.rng import Stream
from tnsynth.states import DenseState

SUPPORT_EPS = 1e-12
SIMON_RUNS_PER_BIT = 32


@dataclass
class PipelineStates:
    prepared: DenseState
    entangled: DenseState
    collapsed: DenseState
    w_probability: float
    transformed: np.ndarray

    @property
    def input_distribution(self) -> np.ndarray:
        return np.abs(self.transformed) ** 2


def pipeline_states(instance: HSPInstance, w: int | None = None, rng: Stream | None = None) -> tuple[PipelineStates, int | None]:
    """Run one pass up to the final transform.

    Phase-oracle kinds keep the output register in |->, which survives the
    oracle untouched; it is projected back onto |-> (probability 1) and ``w``
    is reported as ``None``. Without ``w`` and without ``rng`` (a script
    that names only the input outcome) the smallest attainable ``w`` is used.
    """
    oracle = build_oracle(instance)
    prepared = prepare_registers(instance.q, instance.m, initial_output(instance))
    entangled = apply_oracle(prepared, oracle)
    if instance.phase_oracle:
        rec = project(entangled, "output", initial_output(instance))
        collapsed, p_w, w = rec.post_state_normalized, rec.probability, None
    else:
        if w is None and rng is None:
            w = oracle.values()[0]
        collapsed, p_w, w = measure_output(entangled, w=w, rng=rng)
    transformed = final_transform(transform_for(instance))(collapsed.vector())
    return PipelineStates(prepared, entangled, collapsed, p_w, transformed), w


@dataclass
class TemplateTranscript:
    kind: str
    q: int
    m: int
    mode: str
    success: bool = False
    seed: int | None = None
    runs: list[dict] = field(default_factory=list)
    stages: dict = field(default_factory=dict)
    result: dict = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)
    rng_calls: int = 0

    def to_dict(self) -> dict:
        return asdict(self)


def gf2_rank(vectors: list[int]) -> int:
    return len(_gf2_basis(vectors))


def _gf2_basis(vectors: list[int]) -> dict[int, int]:
    """Echelon basis keyed by leading bit."""
    basis: dict[int, int] = {}
    for v in vectors:
        while v:
            lead = v.bit_length() - 1
            if lead not in basis:
                basis[lead] = v
                break
            v ^= basis[lead]
    return basis


def solve_simon(ys: list[int], q: int) -> int:
    """Unique nonzero ``s`` with ``y . s = 0 (mod 2)`` for all ``y``; needs rank q - 1."""
    basis = _gf2_basis(ys)
    if len(basis) != q - 1:
        raise AlgorithmFailure(f"parity system has rank {len(basis)}, need {q - 1}")
    # reduce to row echelon with pivots cleared from the other rows
    for lead in sorted(basis):
        for other in basis:
            if other != lead and basis[other] >> lead & 1:
                basis[other] ^= basis[lead]
    free = next(b for b in range(q) if b not in basis)
    s = 1 << free
    for lead, row in basis.items():
        if row >> free & 1:
            s |= 1 << lead
    return s


def _draw_input(dist: np.ndarray, given: int | None, rng: Stream | None, q: int) -> int:
    if given is None:
        return int(rng.choice(dist))
    if not 0 <= given < 2**q:
        raise ValidationError(f"scripted outcome {given} outside [0, {2**q})")
    if dist[given] < SUPPORT_EPS:
        raise ValidationError(f"scripted outcome {bits(given, q)} has zero probability")
    return given


def _one_run(instance: HSPInstance, step: tuple[int | None, int | None], rng: Stream | None) -> tuple[dict, PipelineStates]:
    w_in, y_in = step
    states, w = pipeline_states(instance, w=w_in, rng=rng)
    dist = states.input_distribution
    y = _draw_input(dist, y_in, rng, instance.q)
    run = {"w": w, "p_w": states.w_probability, "y": y, "y_bits": bits(y, instance.q), "p_y": float(dist[y])}
    return run, states


def run_template(
    instance: HSPInstance,
    seed: int | None = None,
    script: list[tuple[int | None, int | None]] | None = None,
    stream: int = 0,
) -> TemplateTranscript:
    """Run the template for one instance.

    ``script`` lists ``(w, y)`` per run (``w`` ignored for phase-oracle kinds).
    Shor instances are handed to :func:`tnsynth.hsp.shor.shor_factor`; use that
    directly for a full factoring transcript.
    """
    if instance.kind == "shor":
        from tnsynth.hsp.shor import shor_factor

        spec = instance.oracle_spec
        ft = shor_factor(spec["N"], spec["a"], seed=seed, script=script, q=instance.q, stream=stream)
        t = TemplateTranscript("shor", instance.q, instance.m, ft.mode, ft.success, ft.seed, ft.attempts, ft.stages)
        t.result = {"period": ft.period, "factors": list(ft.factors) if ft.factors else None}
        t.notes, t.rng_calls = ft.notes, ft.rng_calls
        return t
    if script is None and seed is None:
        raise ValidationError("either a seed or a measurement script is required")
    rng = Stream(seed, stream) if script is None else None
    t = TemplateTranscript(instance.kind, instance.q, instance.m, "scripted" if script is not None else "seeded")
    if script is None:
        t.seed = seed
    elif seed is not None:
        t.notes.append("seed ignored: scripted run")
    q = instance.q

    if instance.kind == "simon":
        cap = len(script) if script is not None else SIMON_RUNS_PER_BIT * q
        ys = []
        for i in range(cap):
            run, states = _one_run(instance, script[i] if script is not None else (None, None), rng)
            run["orthogonal"] = bin(run["y"] & int(instance.oracle_spec["secret"], 2)).count("1") % 2 == 0
            t.runs.append(run)
            if run["y"]:
                ys.append(run["y"])
            if gf2_rank(ys) == q - 1:
                break
        t.stages = _stage_snapshot(states, q)
        try:
            s = solve_simon(ys, q)
        except AlgorithmFailure as exc:
            t.notes.append(f"{exc} after {len(t.runs)} run(s)")
            t.result = {"secret": None}
        else:
            t.result = {"secret": bits(s, q)}
            t.success = True
    else:
        run, states = _one_run(instance, script[0] if script is not None else (None, None), rng)
        t.runs.append(run)
        t.stages = _stage_snapshot(states, q)
        y = run["y"]
        if instance.kind == "bernstein_vazirani":
            t.result = {"secret": bits(y, q)}
        else:
            t.result = {
                "verdict": "constant" if y == 0 else "balanced",
                "probability_zero": float(states.input_distribution[0]),
            }
        t.success = True
    t.rng_calls = rng.calls if rng is not None else 0
    return t


def _stage_snapshot(states: PipelineStates, q: int) -> dict:
    dist = states.input_distribution
    support = [int(x) for x in np.flatnonzero(dist > SUPPORT_EPS)]
    return {
        "stage1": {"input_amplitude": float(2.0 ** (-q / 2))},
        "stage2": {"norm": states.entangled.norm()},
        "stage3": {"probability": states.w_probability},
        "transform": {
            "support": [bits(x, q) for x in support],
            "probabilities": [float(dist[x]) for x in support],
        },
    }
