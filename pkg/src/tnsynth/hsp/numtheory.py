"""Classical number theory for period finding and factoring."""

from __future__ import annotations

from fractions import Fraction
from math import gcd

from tnsynth.errors import PeriodNotFound, ValidationError


def mod_exp(base: int, exponent: int, modulus: int) -> int:
    """``base**exponent mod modulus`` by square-and-multiply (right-to-left bits)."""
    if modulus < 1 or exponent < 0:
        raise ValidationError("mod_exp needs modulus >= 1 and exponent >= 0")
    result = 1 % modulus
    b = base % modulus
    e = exponent
    while e:
        if e & 1:
            result = (result * b) % modulus
        b = (b * b) % modulus
        e >>= 1
    return result


def multiplicative_order(a: int, n: int) -> int:
    if gcd(a, n) != 1:
        raise ValidationError(f"{a} is not invertible mod {n}")
    r, x = 1, a % n
    while x != 1 % n:
        x = (x * a) % n
        r += 1
    return r


def continued_fraction(num: int, den: int) -> list[int]:
    terms = []
    while den:
        q, r = divmod(num, den)
        terms.append(q)
        num, den = den, r
    return terms


def convergents(num: int, den: int) -> list[Fraction]:
    """All convergents of ``num / den``, in order (unreduced form kept as Fractions)."""
    out = []
    h_prev, h = 0, 1
    k_prev, k = 1, 0
    for a in continued_fraction(num, den):
        h_prev, h = h, a * h + h_prev
        k_prev, k = k, a * k + k_prev
        out.append(Fraction(h, k))
    return out


def extract_period(v: int, big_m: int, n: int, a: int) -> int:
    """Smallest convergent denominator ``r <= n`` of ``v / big_m`` with ``a**r = 1 mod n``.

    Raises ``PeriodNotFound`` for ``v == 0`` (no information) or when no
    denominator qualifies.
    """
    if not 0 <= v < big_m:
        raise ValidationError(f"measured frequency must satisfy 0 <= v < {big_m}, got {v}")
    if v == 0:
        raise PeriodNotFound("v = 0 carries no information about the period")
    for c in convergents(v, big_m):
        r = c.denominator
        if r <= n and mod_exp(a, r, n) == 1:
            return r
    raise PeriodNotFound(f"no convergent denominator r <= {n} of {v}/{big_m} satisfies {a}^r = 1 mod {n}")


def factors_from_period(n: int, a: int, s: int) -> tuple[int, int]:
    """``(gcd(n, a^(s/2) + 1), gcd(n, a^(s/2) - 1))``; raises on odd ``s`` or a trivial split."""
    if s % 2:
        raise PeriodNotFound(f"period {s} is odd")
    half = mod_exp(a, s // 2, n)
    if half == n - 1:
        raise PeriodNotFound(f"{a}^{s // 2} = -1 mod {n}")
    f1, f2 = gcd(n, half + 1), gcd(n, half - 1)
    if f1 in (1, n) or f2 in (1, n):
        raise PeriodNotFound(f"trivial factors {f1}, {f2}")
    return f1, f2
