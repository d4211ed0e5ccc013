"""The quotient ring GF(2)[x]/(f), its CRT decomposition and the map
from a ring sample to a block of ordinary LPN equations."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ComponentTooLarge, FactorizationInvalid, FactorsNotCoprime
from .gf2poly import (
    BinaryPolynomial,
    bits_to_array,
    clmul,
    format_poly,
    parse_poly,
    pdivmod,
    pext_gcd,
    pgcd,
    pmod,
)


@dataclass(frozen=True)
class RingSpec:
    """Modulus ``f = f_1 ... f_m`` with pairwise coprime factors.

    ``idempotents[i]`` is the element ``t_i`` with ``t_i = 1 mod f_i``
    and ``t_i = 0 mod f_j`` for ``j != i``.  Build instances with
    :func:`make_ring`, which validates the factorization.
    """

    modulus: BinaryPolynomial
    factors: tuple[BinaryPolynomial, ...]
    idempotents: tuple[BinaryPolynomial, ...]
    name: str = field(default="", compare=False)

    @property
    def degree(self) -> int:
        return self.modulus.bits.bit_length() - 1

    @property
    def factor_degrees(self) -> list[int]:
        return [f.bits.bit_length() - 1 for f in self.factors]

    def element(self, value: BinaryPolynomial | int) -> "RingElement":
        bits = value.bits if isinstance(value, BinaryPolynomial) else int(value)
        return RingElement(BinaryPolynomial(pmod(bits, self.modulus.bits)), self)

    def zero(self) -> "RingElement":
        return RingElement(BinaryPolynomial(0), self)

    def one(self) -> "RingElement":
        return self.element(1)

    def random_bits(self, rng: np.random.Generator) -> int:
        """Uniform element of R as a raw int."""
        t = self.degree
        raw = rng.bytes((t + 7) // 8)
        return int.from_bytes(raw, "little") & ((1 << t) - 1)

    def random(self, rng: np.random.Generator) -> "RingElement":
        return RingElement(BinaryPolynomial(self.random_bits(rng)), self)

    def is_unit_bits(self, bits: int) -> bool:
        return bits != 0 and pgcd(self.modulus.bits, bits) == 1

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "modulus": format_poly(self.modulus),
            "factors": [format_poly(f) for f in self.factors],
        }


@dataclass(frozen=True)
class RingElement:
    """A fully reduced residue modulo ``ring.modulus``."""

    value: BinaryPolynomial
    ring: RingSpec = field(repr=False)

    def __post_init__(self):
        if self.value.bits.bit_length() > self.ring.degree:
            raise ValueError("ring element is not reduced modulo f")

    @property
    def bits(self) -> int:
        return self.value.bits

    def _coerce(self, other) -> int:
        if isinstance(other, RingElement):
            if other.ring is not self.ring and other.ring != self.ring:
                raise ValueError("elements belong to different rings")
            return other.value.bits
        if isinstance(other, BinaryPolynomial):
            return pmod(other.bits, self.ring.modulus.bits)
        return NotImplemented

    def __add__(self, other):
        b = self._coerce(other)
        if b is NotImplemented:
            return b
        return RingElement(BinaryPolynomial(self.bits ^ b), self.ring)

    __sub__ = __add__
    __radd__ = __add__

    def __mul__(self, other):
        b = self._coerce(other)
        if b is NotImplemented:
            return b
        prod = pmod(clmul(self.bits, b), self.ring.modulus.bits)
        return RingElement(BinaryPolynomial(prod), self.ring)

    __rmul__ = __mul__

    def is_unit(self) -> bool:
        return self.ring.is_unit_bits(self.bits)

    def inverse(self) -> "RingElement":
        g, u, _ = pext_gcd(self.bits, self.ring.modulus.bits)
        if g != 1:
            raise ValueError("element is not a unit")
        return self.ring.element(u)

    def coeffs(self) -> np.ndarray:
        return bits_to_array(self.bits, self.ring.degree)

    def __str__(self) -> str:
        return format_poly(self.value)


@dataclass(frozen=True)
class RingLpnSample:
    r: RingElement
    v: RingElement

    def __post_init__(self):
        if self.r.ring != self.v.ring:
            raise ValueError("sample components belong to different rings")


def make_ring(
    modulus: BinaryPolynomial,
    factors: Sequence[BinaryPolynomial],
    name: str = "",
) -> RingSpec:
    """Validate ``modulus == prod(factors)`` and precompute the idempotents."""
    if not factors:
        raise FactorizationInvalid("at least one factor is required")
    f = modulus.bits
    prod = 1
    for fi in factors:
        if fi.bits.bit_length() < 2:
            raise FactorizationInvalid(f"factor {format_poly(fi)} has degree < 1")
        prod = clmul(prod, fi.bits)
    if prod != f:
        raise FactorizationInvalid(
            f"product of factors is {format_poly(prod)}, not the modulus {format_poly(f)}"
        )
    for i in range(len(factors)):
        for j in range(i + 1, len(factors)):
            if pgcd(factors[i].bits, factors[j].bits) != 1:
                raise FactorsNotCoprime(
                    f"factors {i} and {j} share gcd "
                    f"{format_poly(pgcd(factors[i].bits, factors[j].bits))}"
                )
    idem = []
    for fi in factors:
        cof, _ = pdivmod(f, fi.bits)
        # u * cof = 1 mod f_i
        _, u, _ = pext_gcd(pmod(cof, fi.bits), fi.bits)
        idem.append(BinaryPolynomial(pmod(clmul(cof, pmod(u, fi.bits)), f)))
    return RingSpec(modulus, tuple(factors), tuple(idem), name)


def ring_from_factors(factors: Sequence[BinaryPolynomial], name: str = "") -> RingSpec:
    prod = 1
    for fi in factors:
        prod = clmul(prod, fi.bits)
    return make_ring(BinaryPolynomial(prod), factors, name)


def crt_split(r: RingElement) -> list[BinaryPolynomial]:
    """Residues ``r mod f_i`` in factor order."""
    return [BinaryPolynomial(pmod(r.bits, fi.bits)) for fi in r.ring.factors]


def crt_lift(components: Sequence[BinaryPolynomial], ring: RingSpec) -> RingElement:
    """Inverse of :func:`crt_split`: ``sum(components[i] * t_i) mod f``."""
    if len(components) != len(ring.factors):
        raise ValueError(
            f"expected {len(ring.factors)} components, got {len(components)}"
        )
    acc = 0
    for i, (c, fi, ti) in enumerate(zip(components, ring.factors, ring.idempotents)):
        if c.bits.bit_length() > fi.bits.bit_length() - 1:
            raise ComponentTooLarge(
                f"component {i} has degree {c.degree} >= deg f_{i} = {fi.degree}"
            )
        acc ^= clmul(c.bits, ti.bits)
    return ring.element(acc)


def tau_columns(r_bits: int, f: int, ncols: int) -> list[int]:
    """Raw columns ``r * x^i mod f`` for ``i < ncols``."""
    t = f.bit_length() - 1
    top = 1 << t
    c = pmod(r_bits, f)
    cols = []
    for _ in range(ncols):
        cols.append(c)
        c <<= 1
        if c & top:
            c ^= f
    return cols


def tau_matrix(r: RingElement) -> np.ndarray:
    """The t x t matrix A with ``A @ vec(s) = vec(r*s mod f)`` over GF(2)."""
    t = r.ring.degree
    cols = tau_columns(r.bits, r.ring.modulus.bits, t)
    if not cols:
        return np.zeros((0, 0), dtype=np.uint8)
    return np.stack([bits_to_array(c, t) for c in cols], axis=1)


def ring_mul_add(r: RingElement, s: RingElement, e: RingElement) -> RingElement:
    """``(r*s + e) mod f``."""
    if not (r.ring == s.ring == e.ring):
        raise ValueError("operands belong to different rings")
    f = r.ring.modulus.bits
    return RingElement(BinaryPolynomial(pmod(clmul(r.bits, s.bits), f) ^ e.bits), r.ring)


# ----------------------------------------------------------------------
# ring files and presets

PRESETS = ("lapin-621", "desk33", "desk3f", "desk-trinomial")


def ring_from_json(data: dict) -> RingSpec:
    factors = [parse_poly(s) for s in data["factors"]]
    if "modulus" in data:
        modulus = parse_poly(data["modulus"])
    else:
        prod = 1
        for fi in factors:
            prod = clmul(prod, fi.bits)
        modulus = BinaryPolynomial(prod)
    return make_ring(modulus, factors, data.get("name", ""))


def preset_data(name: str) -> dict:
    if name not in PRESETS:
        raise ValueError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    text = resources.files("ringlpn.presets").joinpath(f"{name}.json").read_text()
    return json.loads(text)


def load_ring(source: str | Path) -> RingSpec:
    """Load a ring from a preset name or a JSON file path.

    A missing file whose stem names a preset (``desk33.json``) loads the
    preset.
    """
    path = Path(source)
    if str(source) in PRESETS or (not path.exists() and path.suffix == ".json" and path.stem in PRESETS):
        return ring_from_json(preset_data(path.stem if path.suffix == ".json" else str(source)))
    if not path.exists():
        raise ValueError(
            f"no ring file {str(source)!r} and no such preset; presets: {', '.join(PRESETS)}"
        )
    try:
        data = json.loads(path.read_text())
        factors = data["factors"]
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise ValueError(f"{path}: not a ring file ({exc})") from None
    if not isinstance(factors, list):
        raise ValueError(f"{path}: 'factors' must be a list")
    data.setdefault("name", path.stem)
    return ring_from_json(data)


def lapin_ring() -> RingSpec:
    return load_ring("lapin-621")
