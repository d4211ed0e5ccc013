"""Seeded randomness, Bernoulli noise and the Ring-LPN sample oracle.

All randomness comes from numpy's Philox4x64 counter-based generator.
A stream is addressed by ``(seed, index, domain)``: the 64-bit seed
fills the low key word, the index and a small domain tag the high one.
Sample ``i`` of an oracle always comes from stream ``(seed, i)``, which
makes batches independent of how they are split across workers.
"""

from __future__ import annotations

import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Literal, Sequence

import numpy as np

from .errors import BatchTooLarge
from .gf2poly import BinaryPolynomial, clmul, pmod
from .ring import RingElement, RingLpnSample, RingSpec

SEED_MASK = (1 << 64) - 1

DOMAIN_SAMPLE = 0
DOMAIN_SECRET = 1
DOMAIN_AUX = 2

DEFAULT_MEMORY_BUDGET = 1 << 30

DUMP_MAGIC = b"RLPN"
DUMP_VERSION = 1
_HEADER = struct.Struct("<4sHIQQ")


def substream(seed: int, index: int = 0, domain: int = 0) -> np.random.Generator:
    """Independent Philox stream for ``(seed, index, domain)``."""
    if not 0 <= index < 1 << 56 or not 0 <= domain < 256:
        raise ValueError("stream index or domain out of range")
    key = (seed & SEED_MASK) | (index << 64) | (domain << 120)
    return np.random.Generator(np.random.Philox(key=key))


@dataclass(frozen=True)
class NoiseSpec:
    """Bernoulli parameter ``eta`` kept as an exact rational."""

    eta: Fraction

    def __post_init__(self):
        eta = Fraction(self.eta)
        object.__setattr__(self, "eta", eta)
        if not 0 <= eta < Fraction(1, 2):
            raise ValueError(f"eta must lie in [0, 1/2), got {eta}")

    @classmethod
    def parse(cls, text: str | float | Fraction) -> "NoiseSpec":
        if isinstance(text, float):
            return cls(Fraction(text).limit_denominator(1 << 20))
        return cls(Fraction(text))

    @property
    def epsilon(self) -> Fraction:
        return 1 - 2 * self.eta


def error_bits(noise: NoiseSpec, n: int, rng: np.random.Generator, count: int | None = None) -> np.ndarray:
    """Bernoulli(eta) bits, shape ``(n,)`` or ``(count, n)``."""
    shape = n if count is None else (count, n)
    if noise.eta == 0:
        return np.zeros(shape, dtype=np.uint8)
    return (rng.random(shape) < float(noise.eta)).astype(np.uint8)


def sample_error(noise: NoiseSpec, degree_bound: int, rng: np.random.Generator) -> BinaryPolynomial:
    """Polynomial whose coefficients below ``degree_bound`` are iid Bernoulli(eta)."""
    if degree_bound <= 0:
        return BinaryPolynomial(0)
    bits = error_bits(noise, degree_bound, rng)
    return BinaryPolynomial(
        int.from_bytes(np.packbits(bits, bitorder="little").tobytes(), "little")
    )


@dataclass
class OracleHandle:
    """Ring-LPN oracle.  ``mode="uniform"`` returns uniform pairs and never
    touches the secret.  ``counter`` is the index of the next sample."""

    ring: RingSpec
    secret: RingElement = field(repr=False)
    noise: NoiseSpec
    seed: int
    mode: Literal["real", "uniform"] = "real"
    counter: int = 0
    memory_budget: int = DEFAULT_MEMORY_BUDGET

    def sample_at(self, index: int) -> RingLpnSample:
        rng = substream(self.seed, index, DOMAIN_SAMPLE)
        ring = self.ring
        t = ring.degree
        r = ring.random_bits(rng)
        if self.mode == "uniform":
            v = ring.random_bits(rng)
        else:
            e = sample_error(self.noise, t, rng).bits
            v = pmod(clmul(r, self.secret.bits), ring.modulus.bits) ^ e
        return RingLpnSample(_elem(ring, r), _elem(ring, v))


def _elem(ring: RingSpec, bits: int) -> RingElement:
    return RingElement(BinaryPolynomial(bits), ring)


def make_oracle(
    ring: RingSpec,
    noise: NoiseSpec,
    seed: int,
    mode: Literal["real", "uniform"] = "real",
    secret: RingElement | None = None,
    memory_budget: int = DEFAULT_MEMORY_BUDGET,
) -> OracleHandle:
    """Oracle with a uniform secret drawn from the seed unless one is given."""
    if mode not in ("real", "uniform"):
        raise ValueError(f"unknown oracle mode {mode!r}")
    if secret is None:
        secret = ring.random(substream(seed, 0, DOMAIN_SECRET))
    return OracleHandle(ring, secret, noise, seed & SEED_MASK, mode, 0, memory_budget)


def query(handle: OracleHandle) -> RingLpnSample:
    s = handle.sample_at(handle.counter)
    handle.counter += 1
    return s


def batch_bytes(t: int, n: int) -> int:
    """Rough resident size of ``n`` samples (two ints plus object overhead each)."""
    return n * 2 * ((t + 7) // 8 + 96)


def batch(handle: OracleHandle, n: int, workers: int = 1) -> list[RingLpnSample]:
    """``n`` consecutive samples; identical for every ``workers`` value."""
    if n < 1:
        raise ValueError("batch size must be >= 1")
    need = batch_bytes(handle.ring.degree, n)
    if need > handle.memory_budget:
        raise BatchTooLarge(
            f"{n} samples need ~{need} bytes, budget is {handle.memory_budget}"
        )
    start = handle.counter
    handle.counter += n
    idx = range(start, start + n)
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(handle.sample_at, idx, chunksize=max(1, n // (4 * workers))))
    return [handle.sample_at(i) for i in idx]


# ----------------------------------------------------------------------
# binary sample dumps


def write_samples(
    path: str | Path, samples: Sequence[RingLpnSample], t: int, seed: int = 0
) -> None:
    """Little-endian dump: header then ``r``, ``v`` blocks of ceil(t/8) bytes."""
    width = (t + 7) // 8
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(DUMP_MAGIC, DUMP_VERSION, t, len(samples), seed & SEED_MASK))
        for s in samples:
            fh.write(s.r.bits.to_bytes(width, "little"))
            fh.write(s.v.bits.to_bytes(width, "little"))


def read_header(path: str | Path) -> dict:
    with open(path, "rb") as fh:
        raw = fh.read(_HEADER.size)
    magic, version, t, count, seed = _HEADER.unpack(raw)
    if magic != DUMP_MAGIC:
        raise ValueError(f"{path}: not a sample dump (magic {magic!r})")
    if version != DUMP_VERSION:
        raise ValueError(f"{path}: unsupported dump version {version}")
    return {"t": t, "count": count, "seed": seed}


def read_samples(path: str | Path, ring: RingSpec) -> tuple[list[RingLpnSample], dict]:
    header = read_header(path)
    t = header["t"]
    if t != ring.degree:
        raise ValueError(f"dump has t={t} but the ring has degree {ring.degree}")
    width = (t + 7) // 8
    with open(path, "rb") as fh:
        fh.seek(_HEADER.size)
        body = fh.read()
    if len(body) != 2 * width * header["count"]:
        raise ValueError(f"{path}: truncated sample dump")
    out = []
    for i in range(header["count"]):
        off = 2 * width * i
        r = int.from_bytes(body[off : off + width], "little")
        v = int.from_bytes(body[off + width : off + 2 * width], "little")
        out.append(RingLpnSample(ring.element(r), ring.element(v)))
    return out, header
