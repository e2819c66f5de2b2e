"""Registers, oracles and transforms of the hidden-subgroup template circuit.

The two registers are held as a two-part ``DenseState`` (``input`` with
``2**q`` levels, ``output`` with ``2**m``); basis labels are integers and
bitstrings are rendered most-significant bit first.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from tnsynth.errors import ValidationError
from tnsynth.evolution import ProductOperatorSum
from tnsynth.hsp.numtheory import mod_exp
from tnsynth.measurement import project, unitary_dft
from tnsynth.rng import Stream
from tnsynth.states import DenseState, PartLabel

KINDS = ("deutsch", "deutsch_jozsa", "bernstein_vazirani", "simon", "shor")
MAX_QUBITS = 24


def bits(x: int, width: int) -> str:
    return format(x, f"0{width}b")


def parse_bits(s: str) -> int:
    if not s or any(c not in "01" for c in s):
        raise ValidationError(f"expected a bitstring, got {s!r}")
    return int(s, 2)


@dataclass(frozen=True)
class HSPInstance:
    kind: str
    q: int
    m: int
    oracle_spec: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValidationError(f"unknown kind {self.kind!r}; expected one of {KINDS}")
        if self.q < 1 or self.m < 1:
            raise ValidationError("q and m must be >= 1")
        spec = self.oracle_spec
        if self.kind == "shor":
            n, a = spec["N"], spec["a"]
            if not 1 < a < n:
                raise ValidationError("a must satisfy 1 < a < N")
            if 2**self.m < n:
                raise ValidationError(f"output register too small: 2^{self.m} < N = {n}")
        elif self.kind in ("bernstein_vazirani", "simon"):
            s = spec["secret"]
            if len(s) != self.q:
                raise ValidationError(f"secret length {len(s)} must equal q = {self.q}")
            parse_bits(s)
            if self.kind == "simon" and parse_bits(s) == 0:
                raise ValidationError("Simon secret must be nonzero")
        else:
            table = list(spec["table"])
            if len(table) != 2**self.q or any(v not in (0, 1) for v in table):
                raise ValidationError(f"{self.kind} needs a 0/1 table of length 2^q = {2**self.q}")
            ones = sum(table)
            if ones not in (0, len(table), len(table) // 2):
                raise ValidationError("table must be constant or balanced")

    @classmethod
    def shor(cls, n: int, a: int, q: int | None = None, m: int | None = None) -> HSPInstance:
        width = int(n).bit_length()
        return cls("shor", q or width, m or width, {"N": int(n), "a": int(a)})

    @classmethod
    def deutsch(cls, table) -> HSPInstance:
        return cls("deutsch", 1, 1, {"table": tuple(int(v) for v in table)})

    @classmethod
    def deutsch_jozsa(cls, table) -> HSPInstance:
        table = tuple(int(v) for v in table)
        return cls("deutsch_jozsa", max(len(table).bit_length() - 1, 1), 1, {"table": table})

    @classmethod
    def bernstein_vazirani(cls, secret: str) -> HSPInstance:
        return cls("bernstein_vazirani", len(secret), 1, {"secret": secret})

    @classmethod
    def simon(cls, secret: str) -> HSPInstance:
        return cls("simon", len(secret), len(secret), {"secret": secret})

    @property
    def phase_oracle(self) -> bool:
        """Kinds whose output register starts in |-> so the oracle acts as a phase."""
        return self.kind in ("deutsch", "deutsch_jozsa", "bernstein_vazirani")


@dataclass(frozen=True)
class OracleTable:
    q: int
    m: int
    f: np.ndarray

    def __post_init__(self):
        f = np.asarray(self.f, dtype=np.int64)
        if f.shape != (2**self.q,) or f.min() < 0 or f.max() >= 2**self.m:
            raise ValidationError("oracle table must map 2^q inputs into [0, 2^m)")
        f.setflags(write=False)
        object.__setattr__(self, "f", f)
        # in-range values make (x, y) -> (x, f(x) ^ y) a permutation of each row

    def values(self) -> list[int]:
        return sorted(set(int(v) for v in self.f))


def build_oracle(instance: HSPInstance) -> OracleTable:
    q, m, spec = instance.q, instance.m, instance.oracle_spec
    xs = range(2**q)
    if instance.kind == "shor":
        f = [mod_exp(spec["a"], x, spec["N"]) for x in xs]
    elif instance.kind == "bernstein_vazirani":
        s = parse_bits(spec["secret"])
        f = [bin(s & x).count("1") % 2 for x in xs]
    elif instance.kind == "simon":
        s = parse_bits(spec["secret"])
        f = [min(x, x ^ s) for x in xs]
    else:
        f = list(spec["table"])
    return OracleTable(q, m, np.array(f, dtype=np.int64))


def prepare_registers(q: int, m: int, output: np.ndarray | None = None) -> DenseState:
    """Uniform superposition on the input register times ``output`` (default |0>)."""
    if q < 1 or m < 1:
        raise ValidationError("q and m must be >= 1")
    if q + m > MAX_QUBITS:
        raise ValidationError(f"q + m = {q + m} exceeds the dense simulation bound of {MAX_QUBITS} qubits")
    if output is None:
        output = np.zeros(2**m, dtype=np.complex128)
        output[0] = 1.0
    output = np.asarray(output, dtype=np.complex128)
    if output.shape != (2**m,):
        raise ValidationError(f"output register vector must have length 2^m = {2**m}")
    inp = np.full(2**q, 2.0 ** (-q / 2), dtype=np.complex128)
    parts = (PartLabel("input", 2**q), PartLabel("output", 2**m))
    return DenseState(parts, np.multiply.outer(inp, output))


def initial_output(instance: HSPInstance) -> np.ndarray:
    out = np.zeros(2**instance.m, dtype=np.complex128)
    if instance.phase_oracle:
        out[0], out[1] = 1 / np.sqrt(2), -1 / np.sqrt(2)
    else:
        out[0] = 1.0
    return out


def apply_oracle(state: DenseState, oracle: OracleTable) -> DenseState:
    if state.dims != (2**oracle.q, 2**oracle.m):
        raise ValidationError(f"state dims {state.dims} do not match oracle registers {(2**oracle.q, 2**oracle.m)}")
    old = state.amplitudes
    new = np.empty_like(old)
    rows = np.arange(2**oracle.q)[:, None]
    cols = np.arange(2**oracle.m)[None, :] ^ oracle.f[:, None]
    new[rows, cols] = old
    return DenseState(state.parts, new, normalized=state.normalized)


def oracle_operator_sum(oracle: OracleTable) -> ProductOperatorSum:
    """``U_f = sum_w P_w (x) X^w`` with ``P_w`` projecting onto ``{x : f(x) = w}``.

    The number of terms equals the number of distinct values of ``f``.
    """
    qdim, mdim = 2**oracle.q, 2**oracle.m
    terms = []
    for w in oracle.values():
        proj = np.diag((oracle.f == w).astype(np.complex128))
        shift = np.zeros((mdim, mdim), dtype=np.complex128)
        shift[np.arange(mdim) ^ w, np.arange(mdim)] = 1.0
        terms.append((proj, shift))
    parts = (PartLabel("input", qdim), PartLabel("output", mdim))
    return ProductOperatorSum(parts, tuple(terms), unitary_total=True)


def output_distribution(state: DenseState) -> np.ndarray:
    return np.sum(np.abs(state.amplitudes) ** 2, axis=0)


def measure_output(
    state: DenseState, w: int | None = None, rng: Stream | None = None
) -> tuple[DenseState, float, int]:
    """Collapse on an output-register value; returns (normalized input state, probability, w).

    With ``w=None`` the value is drawn from ``rng``.
    """
    if w is None:
        if rng is None:
            raise ValidationError("either w or a random stream is required")
        w = int(rng.choice(output_distribution(state)))
    mdim = state.dims[1]
    if not 0 <= w < mdim:
        raise ValidationError(f"w = {w} outside the output register range [0, {mdim})")
    ket = np.zeros(mdim, dtype=np.complex128)
    ket[w] = 1.0
    rec = project(state, "output", ket, outcome_index=w)
    if rec.post_state_normalized is None or rec.probability < 1e-15:
        raise ValidationError(f"w = {w} is not attainable: no input maps to it")
    return rec.post_state_normalized, rec.probability, w


def _check_pow2(n: int) -> int:
    if n < 1 or n & (n - 1):
        raise ValidationError(f"register length must be a power of 2, got {n}")
    return n.bit_length() - 1


def qft(register: np.ndarray) -> np.ndarray:
    register = np.asarray(register, dtype=np.complex128).reshape(-1)
    _check_pow2(register.size)
    return unitary_dft(register)


def hadamard_all(register: np.ndarray) -> np.ndarray:
    """``H`` on every qubit of the register (normalized Walsh-Hadamard transform)."""
    register = np.asarray(register, dtype=np.complex128).reshape(-1)
    q = _check_pow2(register.size)
    out = register.reshape((2,) * q) if q else register
    h = np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2)
    for axis in range(q):
        out = np.moveaxis(np.tensordot(h, out, axes=([1], [axis])), 0, axis)
    return out.reshape(-1)


def final_transform(kind: str) -> Callable[[np.ndarray], np.ndarray]:
    if kind == "qft":
        return qft
    if kind == "hadamard_all":
        return hadamard_all
    raise ValidationError(f"unknown final transform {kind!r}")


def transform_for(instance: HSPInstance) -> str:
    return "qft" if instance.kind == "shor" else "hadamard_all"
