"""Shor factoring on the template circuit, with full stage transcripts."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from math import gcd, isqrt

import numpy as np

from tnsynth.errors import PeriodNotFound, ValidationError
from tnsynth.hsp.circuit import (
    HSPInstance,
    apply_oracle,
    build_oracle,
    measure_output,
    prepare_registers,
    qft,
)
from tnsynth.hsp.numtheory import convergents, extract_period, factors_from_period
from tnsynth.rng import Stream

MAX_N = 2**12
MAX_ATTEMPTS = 32
SUPPORT_EPS = 1e-12


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    return all(n % p for p in range(2, isqrt(n) + 1))


def check_modulus(n: int, a: int) -> list[str]:
    out = []
    if n < 3 or n % 2 == 0 or _is_prime(n):
        out.append(f"N must be an odd composite, got {n}")
    if n > MAX_N:
        out.append(f"N = {n} exceeds the dense simulation bound N <= {MAX_N}")
    if not 1 < a < n:
        out.append("a must satisfy 1 < a < N")
    return out


@dataclass
class FactoringTranscript:
    N: int
    a: int
    q: int
    m: int
    mode: str
    success: bool = False
    seed: int | None = None
    stream: int = 0
    measured_w: int | None = None
    collapsed_support: list[int] = field(default_factory=list)
    qft_distribution: list[float] = field(default_factory=list)
    measured_v: int | None = None
    convergents: list[tuple[int, int]] = field(default_factory=list)
    period: int | None = None
    factors: tuple[int, int] | None = None
    stages: dict = field(default_factory=dict)
    attempts: list[dict] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)
    rng_calls: int = 0

    def to_dict(self) -> dict:
        return asdict(self)


def parse_script(script: str) -> list[tuple[int, int]]:
    """``"w=4,v=12"`` or several attempts separated by ``;``."""
    out = []
    for chunk in script.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        vals = {}
        for item in chunk.split(","):
            key, _, val = item.partition("=")
            key = key.strip()
            if key not in ("w", "v") or not val.strip().lstrip("-").isdigit():
                raise ValidationError(f"bad script entry {item!r}; expected w=<int>,v=<int>")
            vals[key] = int(val)
        if set(vals) != {"w", "v"}:
            raise ValidationError(f"script attempt {chunk!r} must give both w and v")
        out.append((vals["w"], vals["v"]))
    if not out:
        raise ValidationError("empty script")
    return out


def qft_distribution(collapsed: np.ndarray) -> np.ndarray:
    return np.abs(qft(collapsed)) ** 2


def _arith_progression(support: list[int]) -> tuple[int, int | None]:
    if len(support) < 2:
        return support[0], None
    steps = {b - a for a, b in zip(support, support[1:])}
    return support[0], (steps.pop() if len(steps) == 1 else None)


def shor_factor(
    n: int,
    a: int,
    seed: int | None = None,
    script: list[tuple[int, int]] | None = None,
    q: int | None = None,
    max_attempts: int = MAX_ATTEMPTS,
    stream: int = 0,
) -> FactoringTranscript:
    """Run the factoring pipeline.

    Measurements come from ``script`` (one ``(w, v)`` pair per attempt, never
    touching a random generator) or from the seeded stream ``(seed, stream)``.
    Attempts that give no period, an odd period or a trivial split are retried
    with fresh measurements up to ``max_attempts``.
    """
    problems = check_modulus(n, a)
    if problems:
        raise ValidationError("; ".join(problems))
    if script is None and seed is None:
        raise ValidationError("either a seed or a measurement script is required")
    instance = HSPInstance.shor(n, a, q=q)
    t = FactoringTranscript(
        N=n, a=a, q=instance.q, m=instance.m, mode="scripted" if script is not None else "seeded", stream=stream
    )
    if script is not None and seed is not None:
        t.notes.append("seed ignored: scripted run")
    elif script is None:
        t.seed = seed
    g = gcd(a, n)
    if g > 1:
        t.mode = "classical"
        t.success = True
        t.factors = (g, n // g)
        t.notes.append(f"gcd(a, N) = {g} > 1: factor found classically, no circuit run")
        return t

    oracle = build_oracle(instance)
    state0 = prepare_registers(instance.q, instance.m)
    state2 = apply_oracle(state0, oracle)
    rng = Stream(seed, stream) if script is None else None
    big_m = 2**instance.q
    t.stages["stage1"] = {
        "input_amplitude": float(2.0 ** (-instance.q / 2)),
        "output_value": 0,
        "schmidt_rank": 1,
    }
    t.stages["stage2"] = {
        "first_terms": [[x, int(oracle.f[x])] for x in range(min(big_m, 8))],
        "schmidt_rank": len(oracle.values()),
        "output_values": oracle.values(),
    }

    n_attempts = len(script) if script is not None else max_attempts
    for i in range(n_attempts):
        w_in, v_in = script[i] if script is not None else (None, None)
        collapsed, p_w, w = measure_output(state2, w=w_in, rng=rng)
        amps = collapsed.vector()
        support = [int(x) for x in np.flatnonzero(np.abs(amps) > SUPPORT_EPS)]
        dist = qft_distribution(amps)
        if v_in is None:
            v = int(rng.choice(dist))
        else:
            v = v_in
            if not 0 <= v < big_m:
                raise ValidationError(f"scripted v = {v} outside [0, {big_m})")
            if dist[v] < SUPPORT_EPS:
                raise ValidationError(f"scripted v = {v} has zero probability after measuring w = {w}")
        conv = [(c.numerator, c.denominator) for c in convergents(v, big_m)] if v else [(0, 1)]
        attempt = {"w": w, "p_w": p_w, "v": v, "p_v": float(dist[v]), "convergents": conv}
        offset, stride = _arith_progression(support)
        t.measured_w, t.collapsed_support, t.qft_distribution = w, support, [float(x) for x in dist]
        t.measured_v, t.convergents = v, conv
        t.stages["stage3"] = {
            "w": w,
            "probability": p_w,
            "collapsed_support": support,
            "offset": offset,
            "stride": stride,
        }
        t.stages["qft"] = {
            "support": [int(x) for x in np.flatnonzero(dist > SUPPORT_EPS)],
            "distribution": t.qft_distribution,
            "v": v,
            "probability_v": float(dist[v]),
        }
        try:
            period = extract_period(v, big_m, n, a)
            attempt["period"] = period
            f1, f2 = factors_from_period(n, a, period)
        except PeriodNotFound as exc:
            attempt["failure"] = str(exc)
            t.attempts.append(attempt)
            t.stages["postprocess"] = {"convergents": conv, "period": attempt.get("period"), "failure": str(exc)}
            continue
        attempt["factors"] = [f1, f2]
        t.attempts.append(attempt)
        t.period, t.factors, t.success = period, (f1, f2), True
        t.stages["postprocess"] = {"convergents": conv, "period": period, "factors": [f1, f2]}
        break
    if not t.success:
        t.notes.append(f"no factors after {len(t.attempts)} attempt(s)")
    t.rng_calls = rng.calls if rng is not None else 0
    return t


def attempt_success_probability(n: int, a: int, q: int | None = None) -> float:
    """Probability that a single (w, v) measurement pair yields the factors."""
    instance = HSPInstance.shor(n, a, q=q)
    oracle = build_oracle(instance)
    state2 = apply_oracle(prepare_registers(instance.q, instance.m), oracle)
    big_m = 2**instance.q
    total = 0.0
    for w in oracle.values():
        collapsed, p_w, _ = measure_output(state2, w=w)
        dist = qft_distribution(collapsed.vector())
        for v in np.flatnonzero(dist > SUPPORT_EPS):
            try:
                factors_from_period(n, a, extract_period(int(v), big_m, n, a))
            except PeriodNotFound:
                continue
            total += p_w * dist[v]
    return float(total)


def run_trials(n: int, a: int, seed: int, trials: int, max_attempts: int = MAX_ATTEMPTS) -> list[FactoringTranscript]:
    """Independent seeded runs, trial ``i`` on stream ``i``."""
    return [shor_factor(n, a, seed=seed, stream=i, max_attempts=max_attempts) for i in range(trials)]
