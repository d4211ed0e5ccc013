"""The Lapin two-round authentication protocol and an eavesdropping harness.

The reader sends a challenge ``c``; the tag answers with a unit ``r``
and ``z = r (s pi(c) + s') + e``.  For a fixed challenge the pairs
``(r, z)`` are Ring-LPN samples with secret ``s pi(c) + s'``, which is
what :func:`eavesdrop` hands to the attack.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .gf2poly import clmul, pmod
from .oracle import DOMAIN_SAMPLE, DOMAIN_SECRET, NoiseSpec, sample_error, substream
from .ring import RingElement, RingLpnSample, RingSpec

DEFAULT_LAMBDA = 80
DEFAULT_ETA_PRIME = Fraction(1, 4)


@dataclass(frozen=True)
class LapinKeys:
    s: RingElement
    s_prime: RingElement

    def __post_init__(self):
        if self.s.ring != self.s_prime.ring:
            raise ValueError("key halves belong to different rings")

    @property
    def ring(self) -> RingSpec:
        return self.s.ring


@dataclass(frozen=True)
class LapinTranscript:
    c: int
    r: RingElement
    z: RingElement

    def as_sample(self) -> RingLpnSample:
        return RingLpnSample(self.r, self.z)


def generate_keys(ring: RingSpec, seed: int) -> LapinKeys:
    rng = substream(seed, 1, DOMAIN_SECRET)
    return LapinKeys(ring.random(rng), ring.random(rng))


def random_challenge(rng: np.random.Generator, lam: int = DEFAULT_LAMBDA) -> int:
    return int.from_bytes(rng.bytes((lam + 7) // 8), "little") & ((1 << lam) - 1)


def pi_map(c: int, ring: RingSpec, lam: int = DEFAULT_LAMBDA) -> RingElement:
    """Embed a ``lam``-bit challenge as the low ``lam`` coefficients."""
    if lam > ring.degree:
        raise ValueError(f"challenge length {lam} exceeds deg f = {ring.degree}")
    if not 0 <= c < 1 << lam:
        raise ValueError(f"challenge does not fit in {lam} bits")
    return ring.element(c)


def effective_secret(keys: LapinKeys, c: int, lam: int = DEFAULT_LAMBDA) -> RingElement:
    """``s pi(c) + s'``, the Ring-LPN secret behind challenge ``c``."""
    return keys.s * pi_map(c, keys.ring, lam) + keys.s_prime


def random_unit(ring: RingSpec, rng: np.random.Generator) -> int:
    while True:
        r = ring.random_bits(rng)
        if ring.is_unit_bits(r):
            return r


def tag_respond(
    keys: LapinKeys,
    c: int,
    noise: NoiseSpec,
    rng: np.random.Generator,
    lam: int = DEFAULT_LAMBDA,
) -> tuple[RingElement, RingElement]:
    ring = keys.ring
    y = effective_secret(keys, c, lam).bits
    r = random_unit(ring, rng)
    e = sample_error(noise, ring.degree, rng).bits
    z = pmod(clmul(r, y), ring.modulus.bits) ^ e
    return ring.element(r), ring.element(z)


def reader_verify(
    keys: LapinKeys,
    c: int,
    r: RingElement,
    z: RingElement,
    eta_prime: Fraction = DEFAULT_ETA_PRIME,
    lam: int = DEFAULT_LAMBDA,
) -> bool:
    """Accept iff ``r`` is a unit and ``wt(z - r y) <= n eta'``."""
    eta_prime = Fraction(eta_prime)
    if not 0 < eta_prime < Fraction(1, 2):
        raise ValueError("eta' must lie in (0, 1/2)")
    if not r.is_unit():
        return False
    e = z - r * effective_secret(keys, c, lam)
    return e.bits.bit_count() <= keys.ring.degree * eta_prime


def eavesdrop(
    keys: LapinKeys,
    noise: NoiseSpec,
    count: int,
    seed: int,
    fixed_challenge: int | None = None,
    lam: int = DEFAULT_LAMBDA,
    start: int = 0,
) -> list[LapinTranscript]:
    """``count`` honest runs; run ``i`` uses substream ``(seed, start + i)``."""
    if count < 1:
        raise ValueError("count must be >= 1")
    out = []
    for i in range(start, start + count):
        rng = substream(seed, i, DOMAIN_SAMPLE)
        c = random_challenge(rng, lam) if fixed_challenge is None else fixed_challenge
        r, z = tag_respond(keys, c, noise, rng, lam)
        out.append(LapinTranscript(c, r, z))
    return out


def unit_difference_violations(
    ring: RingSpec, pairs: int, seed: int, lam: int = DEFAULT_LAMBDA
) -> list[tuple[int, int]]:
    """Sampled ``c != c'`` whose embedding difference is not a unit."""
    rng = substream(seed, 2, DOMAIN_SECRET)
    bad = []
    for _ in range(pairs):
        c1, c2 = random_challenge(rng, lam), random_challenge(rng, lam)
        if c1 == c2:
            continue
        if not (pi_map(c1, ring, lam) - pi_map(c2, ring, lam)).is_unit():
            bad.append((c1, c2))
    return bad


def keys_from_secrets(
    c1: int, y1: RingElement, c2: int, y2: RingElement, lam: int = DEFAULT_LAMBDA
) -> LapinKeys:
    """Solve ``y = s pi(c) + s'`` for two challenges with a unit difference."""
    ring = y1.ring
    d = pi_map(c1, ring, lam) - pi_map(c2, ring, lam)
    if not d.is_unit():
        raise ValueError("pi(c1) - pi(c2) is not a unit")
    s = (y1 - y2) * d.inverse()
    return LapinKeys(s, y1 - s * pi_map(c1, ring, lam))
