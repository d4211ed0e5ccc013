"""Polynomials over GF(2).

A polynomial is stored as a Python integer whose bit ``i`` is the
coefficient of ``x^i``.  Python integers are already a packed,
little-endian word array, so carry-less arithmetic reduces to shifts
and XORs on them.

Two layers are exposed.  The raw helpers (``clmul``, ``pmod``,
``pdivmod``, ``pgcd`` ...) work on plain ints and are what the attack
code calls in its inner loops.  :class:`BinaryPolynomial` wraps an int
with operators, parsing and formatting for everything user facing.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "NEG_INF",
    "BinaryPolynomial",
    "add",
    "mul",
    "divrem",
    "ext_gcd",
    "powmod",
    "is_irreducible",
    "parse_poly",
    "format_poly",
    "clmul",
    "psquare",
    "pmod",
    "pdivmod",
    "pgcd",
    "pext_gcd",
    "pinv",
    "pdeg",
    "bits_to_array",
    "array_to_bits",
]

NEG_INF = float("-inf")
"""Degree of the zero polynomial."""

# byte -> 16-bit spread (bit i -> bit 2i), used for squaring
_SPREAD = [
    sum(((b >> i) & 1) << (2 * i) for i in range(8)).to_bytes(2, "little")
    for b in range(256)
]

# a sparse modulus is reduced by folding instead of long division
_SPARSE_TERMS = 8


def pdeg(a: int) -> int:
    """Degree of a raw polynomial; -1 for zero (internal use only)."""
    return a.bit_length() - 1


def clmul(a: int, b: int) -> int:
    """Carry-less product of two raw polynomials."""
    if a.bit_count() < b.bit_count():
        a, b = b, a
    r = 0
    while b:
        low = b & -b
        r ^= a << (low.bit_length() - 1)
        b ^= low
    return r


def psquare(a: int) -> int:
    """Square of a raw polynomial (bit spreading; Frobenius is linear)."""
    if a == 0:
        return 0
    raw = a.to_bytes((a.bit_length() + 7) // 8, "little")
    return int.from_bytes(b"".join([_SPREAD[b] for b in raw]), "little")


def _mod_dense(a: int, f: int, df: int) -> int:
    da = a.bit_length() - 1
    while da >= df:
        a ^= f << (da - df)
        da = a.bit_length() - 1
    return a


def _mod_sparse(a: int, df: int, tail: Sequence[int]) -> int:
    mask = (1 << df) - 1
    while a >> df:
        hi = a >> df
        a &= mask
        for e in tail:
            a ^= hi << e
    return a


def pmod(a: int, f: int) -> int:
    """``a mod f`` on raw polynomials."""
    if f == 0:
        raise ZeroDivisionError("division by the zero polynomial")
    df = f.bit_length() - 1
    if a.bit_length() <= df:
        return a
    if f.bit_count() <= _SPARSE_TERMS:
        low = f ^ (1 << df)
        tail = [i for i in range(low.bit_length()) if (low >> i) & 1]
        return _mod_sparse(a, df, tail)
    return _mod_dense(a, f, df)


def pdivmod(a: int, f: int) -> tuple[int, int]:
    """Quotient and remainder of raw polynomials."""
    if f == 0:
        raise ZeroDivisionError("division by the zero polynomial")
    df = f.bit_length() - 1
    q = 0
    da = a.bit_length() - 1
    while da >= df:
        q |= 1 << (da - df)
        a ^= f << (da - df)
        da = a.bit_length() - 1
    return q, a


def pgcd(a: int, b: int) -> int:
    while b:
        a, b = b, pmod(a, b)
    return a


def pext_gcd(a: int, b: int) -> tuple[int, int, int]:
    """Return ``(g, u, v)`` with ``u*a + v*b == g == gcd(a, b)``."""
    u0, u1 = 1, 0
    v0, v1 = 0, 1
    while b:
        q, r = pdivmod(a, b)
        a, b = b, r
        u0, u1 = u1, u0 ^ clmul(q, u1)
        v0, v1 = v1, v0 ^ clmul(q, v1)
    return a, u0, v0


def pinv(a: int, f: int) -> int:
    """Inverse of ``a`` modulo ``f``; raises ValueError for a non-unit."""
    g, u, _ = pext_gcd(pmod(a, f), f)
    if g != 1:
        raise ValueError("element is not invertible modulo f")
    return pmod(u, f)


def bits_to_array(a: int, n: int) -> np.ndarray:
    """Coefficient vector of length ``n`` (exponent ascending) as uint8."""
    raw = np.frombuffer(a.to_bytes((n + 7) // 8, "little"), dtype=np.uint8)
    return np.unpackbits(raw, bitorder="little")[:n].copy()


def array_to_bits(v: Iterable[int]) -> int:
    arr = np.asarray(v, dtype=np.uint8) & 1
    return int.from_bytes(np.packbits(arr, bitorder="little").tobytes(), "little")


@dataclass(frozen=True, slots=True)
class BinaryPolynomial:
    """An element of GF(2)[x]; ``bits`` has bit ``i`` = coefficient of x^i."""

    bits: int = 0

    def __post_init__(self):
        if self.bits < 0:
            raise ValueError("coefficient bits must be non-negative")

    @classmethod
    def from_exponents(cls, exponents: Iterable[int]) -> "BinaryPolynomial":
        bits = 0
        for e in exponents:
            bits ^= 1 << int(e)
        return cls(bits)

    @classmethod
    def from_coeffs(cls, coeffs: Iterable[int]) -> "BinaryPolynomial":
        return cls(array_to_bits(list(coeffs)))

    @classmethod
    def parse(cls, text: str) -> "BinaryPolynomial":
        return parse_poly(text)

    @property
    def degree(self) -> int | float:
        """Degree, or ``NEG_INF`` for the zero polynomial."""
        return self.bits.bit_length() - 1 if self.bits else NEG_INF

    @property
    def weight(self) -> int:
        return self.bits.bit_count()

    def is_zero(self) -> bool:
        return self.bits == 0

    def exponents(self) -> list[int]:
        """Exponents with nonzero coefficient, descending."""
        b = self.bits
        return [i for i in range(b.bit_length() - 1, -1, -1) if (b >> i) & 1]

    def coeff(self, i: int) -> int:
        return (self.bits >> i) & 1

    def coeffs(self, n: int | None = None) -> np.ndarray:
        if n is None:
            n = max(self.bits.bit_length(), 1)
        return bits_to_array(self.bits, n)

    def __add__(self, other: "BinaryPolynomial") -> "BinaryPolynomial":
        return BinaryPolynomial(self.bits ^ other.bits)

    __sub__ = __add__
    __xor__ = __add__

    def __mul__(self, other: "BinaryPolynomial") -> "BinaryPolynomial":
        return BinaryPolynomial(clmul(self.bits, other.bits))

    def __divmod__(self, other: "BinaryPolynomial"):
        return divrem(self, other)

    def __floordiv__(self, other: "BinaryPolynomial") -> "BinaryPolynomial":
        return divrem(self, other)[0]

    def __mod__(self, other: "BinaryPolynomial") -> "BinaryPolynomial":
        return BinaryPolynomial(pmod(self.bits, other.bits))

    def __bool__(self) -> bool:
        return self.bits != 0

    def __str__(self) -> str:
        return format_poly(self)

    def __repr__(self) -> str:
        return f"BinaryPolynomial({format_poly(self)!r})"


def add(a: BinaryPolynomial, b: BinaryPolynomial) -> BinaryPolynomial:
    return BinaryPolynomial(a.bits ^ b.bits)


def mul(a: BinaryPolynomial, b: BinaryPolynomial) -> BinaryPolynomial:
    return BinaryPolynomial(clmul(a.bits, b.bits))


def divrem(
    a: BinaryPolynomial, f: BinaryPolynomial
) -> tuple[BinaryPolynomial, BinaryPolynomial]:
    """Return ``(q, r)`` with ``a = q*f + r`` and ``deg r < deg f``.

    Raises ZeroDivisionError when ``f`` is the zero polynomial.
    """
    q, r = pdivmod(a.bits, f.bits)
    return BinaryPolynomial(q), BinaryPolynomial(r)


def ext_gcd(
    a: BinaryPolynomial, b: BinaryPolynomial
) -> tuple[BinaryPolynomial, BinaryPolynomial, BinaryPolynomial]:
    """Return ``(g, u, v)`` with ``u*a + v*b = g = gcd(a, b)``."""
    if not a.bits and not b.bits:
        raise ValueError("ext_gcd of two zero polynomials is undefined")
    g, u, v = pext_gcd(a.bits, b.bits)
    return BinaryPolynomial(g), BinaryPolynomial(u), BinaryPolynomial(v)


def powmod(base: BinaryPolynomial, exponent: int, f: BinaryPolynomial) -> BinaryPolynomial:
    """``base**exponent mod f`` by square-and-multiply."""
    if f.bits.bit_length() < 2:
        raise ValueError("modulus must have degree >= 1")
    if exponent < 0:
        raise ValueError("exponent must be non-negative")
    return BinaryPolynomial(_powmod(base.bits, exponent, f.bits))


def _powmod(b: int, e: int, f: int) -> int:
    b = pmod(b, f)
    r = pmod(1, f)
    for i in range(e.bit_length() - 1, -1, -1):
        r = pmod(psquare(r), f)
        if (e >> i) & 1:
            r = pmod(clmul(r, b), f)
    return r


def _frobenius(a: int, d: int, f: int) -> int:
    """``a^(2^d) mod f``."""
    for _ in range(d):
        a = pmod(psquare(a), f)
    return a


def _prime_factors(n: int) -> list[int]:
    out = []
    p = 2
    while p * p <= n:
        if n % p == 0:
            out.append(p)
            while n % p == 0:
                n //= p
        p += 1
    if n > 1:
        out.append(n)
    return out


def is_irreducible(f: BinaryPolynomial) -> bool:
    """Rabin's test: ``x^(2^n) = x mod f`` and ``gcd(x^(2^(n/p)) - x, f) = 1``
    for every prime ``p | n``."""
    fb = f.bits
    n = fb.bit_length() - 1
    if n < 1:
        raise ValueError("irreducibility is undefined for constant polynomials")
    if n == 1:
        return True
    if not fb & 1:
        return False
    x = 0b10
    for p in _prime_factors(n):
        h = _frobenius(x, n // p, fb)
        if pgcd(fb, h ^ x) != 1:
            return False
    return _frobenius(x, n, fb) == x


_TERM = re.compile(r"^(?:(1)|x(?:\^(\d+))?)$")


def parse_poly(text: str) -> BinaryPolynomial:
    """Parse ``"x^127+x^8+x^7+x^3+1"`` or ``"[127,8,7,3,0]"``.

    Repeated monomials cancel, as they would in GF(2).
    """
    s = "".join(text.split())
    if not s:
        raise ValueError("empty polynomial string")
    if s.startswith("["):
        if not s.endswith("]"):
            raise ValueError(f"malformed exponent list: {text!r}")
        body = s[1:-1]
        exps = [int(e) for e in body.split(",")] if body else []
        if any(e < 0 for e in exps):
            raise ValueError(f"negative exponent in {text!r}")
        return BinaryPolynomial.from_exponents(exps)
    if s == "0":
        return BinaryPolynomial(0)
    bits = 0
    for term in s.split("+"):
        m = _TERM.match(term)
        if m is None:
            raise ValueError(f"malformed monomial {term!r} in {text!r}")
        if m.group(1):
            e = 0
        else:
            e = int(m.group(2)) if m.group(2) is not None else 1
        bits ^= 1 << e
    return BinaryPolynomial(bits)


def format_poly(p: BinaryPolynomial | int) -> str:
    """Descending sum of monomials; ``"0"`` for the zero polynomial."""
    bits = p.bits if isinstance(p, BinaryPolynomial) else p
    if bits == 0:
        return "0"
    terms = []
    for i in range(bits.bit_length() - 1, -1, -1):
        if (bits >> i) & 1:
            terms.append("1" if i == 0 else "x" if i == 1 else f"x^{i}")
    return "+".join(terms)

