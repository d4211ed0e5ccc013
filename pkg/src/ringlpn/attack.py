"""Partial key recovery for Ring-LPN over a reducible modulus.

Both pipelines reduce samples modulo one factor ``f1`` (degree ``l``),
cancel ``k`` coordinates by colliding pairs of samples and score every
candidate for the remaining ``l - k`` secret bits with a fast
Walsh-Hadamard transform.

* :func:`run_generic` compresses each reduced sample with a low-weight
  relation ``m`` (``a = m A``, ``z = <m, v>``) and collides on the top
  ``k`` entries of ``a``.
* :func:`run_improved` collides directly on the top ``k`` coefficients
  of ``r mod f1``.  For a sparse ``f1`` the last row of the merged
  sample's matrix is then ``[0 .. 0, r'_{l-k-1}, .., r'_0]``, read off
  the polynomial for free, and the observed bit is coefficient
  ``l - 1`` of the merged ``v``.

Candidates are bit-vectors over ``dims = l - k`` positions; the
``positions`` field of :class:`AttackResult` says which coefficient of
``s mod f1`` each candidate bit stands for.
"""

from __future__ import annotations

import math
import warnings
from collections import defaultdict
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .crtcode import CrtCode, Relation
from .gf2poly import pmod
from .linalg import parity
from .oracle import NoiseSpec, OracleHandle, batch
from .ring import RingLpnSample, tau_columns

DEFAULT_PAIR_CAP = 1 << 20
FWHT_MAX_DIMS = 26
IMPROVED_MIN_K = 11
HOLDOUT_EVERY = 10


@dataclass(frozen=True)
class LpnSample:
    """``z = <a, s> + e``; ``a`` packed with bit ``i`` = coordinate ``i``."""

    a: int
    z: int


@dataclass(frozen=True)
class AttackParams:
    k: int
    N: int
    relation: Relation
    noise: NoiseSpec

    def theorem_condition(self) -> bool:
        """``N^2 / 2^k >= eps^(-4w)``, decided in exact arithmetic."""
        eps = self.noise.epsilon
        if eps == 0:
            return False
        return Fraction(self.N * self.N, 1 << self.k) * eps ** (4 * self.relation.weight) >= 1

    def fwht_sizing(self, l: int) -> bool:
        """``l - k >= log2(N^2 / 2^k)``, i.e. ``2^l >= N^2``."""
        return (1 << l) >= self.N * self.N


@dataclass
class AttackResult:
    candidate: int
    dims: int
    positions: tuple[int, ...]
    score: int
    second_score: int
    samples_used: int
    conclusive: bool = True
    queries: int = 0
    success: bool | None = None
    bitops: dict[str, int] = field(default_factory=dict)

    def bit_for(self, position: int) -> int:
        return (self.candidate >> self.positions.index(position)) & 1

    def matches(self, residue: int) -> bool:
        """Whether the candidate agrees with ``residue`` (bits of ``s mod f1``)."""
        want = sum(((residue >> p) & 1) << j for j, p in enumerate(self.positions))
        return want == self.candidate

    @property
    def total_bitops(self) -> int:
        return sum(self.bitops.values())

    def to_json(self) -> dict:
        d = asdict(self)
        d["positions"] = list(self.positions)
        d["total_bitops"] = self.total_bitops
        return d


def piling_up(epsilon: float | Fraction, n: int):
    """Bias of the XOR of ``n`` independent bits that each have bias ``epsilon``."""
    if n < 0:
        raise ValueError("n must be non-negative")
    return epsilon**n


# ----------------------------------------------------------------------
# stages


def reduce_sample(sample: RingLpnSample, f1: int) -> tuple[int, int]:
    """``(r mod f1, v mod f1)`` as raw ints."""
    return pmod(sample.r.bits, f1), pmod(sample.v.bits, f1)


def compress_sample(sample: RingLpnSample, relation: Relation, code: CrtCode) -> LpnSample:
    """One LPN sample ``(m A, <m, v mod f1>)`` from a ring sample."""
    if relation.m.bit_length() > code.l:
        raise ValueError(
            f"relation has {relation.m.bit_length()} bits but the code dimension is {code.l}"
        )
    r_hat, v_hat = reduce_sample(sample, code.f1.bits)
    return _compress(r_hat, v_hat, relation.m, code.f1.bits, code.l)


def _compress(r_hat: int, v_hat: int, m: int, f1: int, l: int) -> LpnSample:
    # entry i of m A is <m, column i of A> with column i = r * x^i mod f1
    a = 0
    for i, col in enumerate(tau_columns(r_hat, f1, l)):
        if parity(col & m):
            a |= 1 << i
    return LpnSample(a, parity(v_hat & m))


def birthday_merge(
    samples: Sequence[LpnSample],
    k: int,
    dims: int,
    low: bool = False,
    pair_cap: int = DEFAULT_PAIR_CAP,
) -> list[LpnSample]:
    """XOR every pair of samples that agree on ``k`` coordinates of ``a``.

    By default the key is the ``k`` highest coordinates and the merged
    vectors keep the low ``dims - k``; with ``low=True`` the key is the
    ``k`` lowest coordinates and merged vectors are shifted down by ``k``.
    At most ``pair_cap`` pairs are taken from any one bucket.
    """
    if not 0 <= k < dims:
        raise ValueError(f"need 0 <= k < dims, got k={k}, dims={dims}")
    keep = dims - k
    mask = (1 << keep) - 1
    kmask = (1 << k) - 1
    buckets: dict[int, list[LpnSample]] = defaultdict(list)
    for s in samples:
        key = (s.a & kmask) if low else (s.a >> keep)
        buckets[key].append(s)
    out = []
    for key in sorted(buckets):
        group = buckets[key]
        n = len(group)
        if n < 2:
            continue
        taken = 0
        for i in range(n - 1):
            ai, zi = group[i].a, group[i].z
            for j in range(i + 1, n):
                if taken == pair_cap:
                    break
                a = ai ^ group[j].a
                out.append(LpnSample((a >> k) if low else (a & mask), zi ^ group[j].z))
                taken += 1
    return out


def pair_count(samples: Iterable[LpnSample], k: int, dims: int) -> int:
    """Number of colliding pairs on the top ``k`` coordinates."""
    counts: dict[int, int] = defaultdict(int)
    for s in samples:
        counts[s.a >> (dims - k)] += 1
    return sum(c * (c - 1) // 2 for c in counts.values())


def fwht(table) -> np.ndarray:
    """Walsh-Hadamard transform ``F[s] = sum_r f[r] (-1)^<s, r>`` in integers."""
    arr = np.array(table, dtype=np.int64)
    n = arr.shape[0]
    if n == 0 or n & (n - 1):
        raise ValueError(f"table length must be a power of two, got {n}")
    h = 1
    while h < n:
        view = arr.reshape(-1, 2, h)
        x = view[:, 0, :].copy()
        view[:, 0, :] += view[:, 1, :]
        view[:, 1, :] = x - view[:, 1, :]
        h *= 2
    return arr


def _histogram(samples: Sequence[LpnSample], dims: int) -> np.ndarray:
    if dims > 63:
        raise ValueError("dims too large for a dense table")
    a = np.fromiter((s.a for s in samples), dtype=np.int64, count=len(samples))
    z = np.fromiter((s.z for s in samples), dtype=np.int8, count=len(samples))
    if len(a) and (a.min() < 0 or a.max() >> dims):
        raise ValueError(f"sample vector does not fit in {dims} bits")
    size = 1 << dims
    return np.bincount(a[z == 0], minlength=size).astype(np.int64) - np.bincount(
        a[z == 1], minlength=size
    ).astype(np.int64)


def _correlation(samples: Sequence[LpnSample], s: int) -> int:
    return sum(1 - 2 * (x.z ^ parity(x.a & s)) for x in samples)


def distinguish(
    samples: Sequence[LpnSample],
    dims: int,
    positions: Sequence[int] | None = None,
    validate: bool = True,
) -> AttackResult:
    """Best candidate for the ``dims`` secret bits by maximal ``|F|``.

    With ``validate`` every tenth sample is held out; the winner must beat
    the runner-up on the held-out set by one null standard deviation, or
    the result is marked inconclusive.
    """
    if not samples:
        raise ValueError("no samples to distinguish")
    if dims > FWHT_MAX_DIMS:
        raise ValueError(f"2^{dims} table exceeds the FWHT budget (2^{FWHT_MAX_DIMS})")
    if validate and len(samples) >= 2 * HOLDOUT_EVERY:
        held = [s for i, s in enumerate(samples) if i % HOLDOUT_EVERY == HOLDOUT_EVERY - 1]
        main = [s for i, s in enumerate(samples) if i % HOLDOUT_EVERY != HOLDOUT_EVERY - 1]
    else:
        held, main = [], list(samples)
    spectrum = np.abs(fwht(_histogram(main, dims)))
    best = int(np.argmax(spectrum))
    score = int(spectrum[best])
    if spectrum.shape[0] > 1:
        spectrum[best] = -1
        runner = int(np.argmax(spectrum))
        second = int(spectrum[runner])
    else:
        runner, second = best, 0
    if held:
        gap = abs(_correlation(held, best)) - abs(_correlation(held, runner))
        conclusive = gap >= math.sqrt(len(held))
    else:
        conclusive = score > second
    pos = tuple(range(dims)) if positions is None else tuple(positions)
    return AttackResult(best, dims, pos, score, second, len(main), conclusive)


# ----------------------------------------------------------------------
# pipelines


def _check_params(params: AttackParams, l: int) -> None:
    if not 0 < params.k < l:
        raise ValueError(f"need 0 < k < l, got k={params.k}, l={l}")
    if l - params.k > FWHT_MAX_DIMS:
        raise ValueError(f"l - k = {l - params.k} exceeds the FWHT budget")
    if not params.theorem_condition():
        warnings.warn(
            f"N^2/2^k = 2^{2 * math.log2(params.N) - params.k:.2f} is below "
            f"eps^-4w for w={params.relation.weight}; recovery is unlikely",
            RuntimeWarning,
            stacklevel=3,
        )


def _reference_residue(oracle: OracleHandle | None, f1: int) -> int | None:
    if oracle is None or oracle.mode != "real":
        return None
    return pmod(oracle.secret.bits, f1)


def attack_generic(
    samples: Sequence[RingLpnSample],
    params: AttackParams,
    code: CrtCode,
    target: str = "low",
    truth: int | None = None,
) -> AttackResult:
    """Generic pipeline on given samples.

    ``target="low"`` collides on the top ``k`` entries of ``m A`` and
    recovers coefficients ``0 .. l-k-1``; ``target="high"`` collides on
    the bottom ``k`` and recovers ``k .. l-1``.
    """
    l, k = code.l, params.k
    _check_params(params, l)
    if target not in ("low", "high"):
        raise ValueError("target must be 'low' or 'high'")
    f1 = code.f1.bits
    m = params.relation.m
    compressed = [_compress(*reduce_sample(s, f1), m, f1, l) for s in samples]
    low = target == "high"
    merged = birthday_merge(compressed, k, l, low=low)
    if not merged:
        raise ValueError("birthday step produced no collisions; increase N")
    positions = range(k, l) if low else range(l - k)
    res = distinguish(merged, l - k, positions)
    n = len(samples)
    res.queries = n
    res.bitops = {
        "transform": n * l * (2 * l + 1),
        "store": n * l,
        "merge": l * len(merged),
        "fwht": (l - k) << (l - k),
    }
    if truth is not None:
        res.success = res.matches(truth)
    return res


def run_generic(
    oracle: OracleHandle,
    params: AttackParams,
    code: CrtCode,
    target: str = "low",
    workers: int = 1,
) -> AttackResult:
    samples = batch(oracle, params.N, workers)
    return attack_generic(
        samples, params, code, target, truth=_reference_residue(oracle, code.f1.bits)
    )


def improved_min_k(code: CrtCode) -> int:
    """Smallest ``k`` for which the free last-row read-off is exact.

    Reducing ``x^(l+j)`` for ``j <= l-k-2`` must not reach ``x^(l-1)``,
    which holds iff ``k >= deg(f1 - x^l)``; the floor of 11 enforces
    ``k > 10``.
    """
    l = code.l
    g = (code.f1.bits ^ (1 << l)).bit_length() - 1
    return max(IMPROVED_MIN_K, g)


def last_row_vector(r_merged: int, l: int, k: int) -> int:
    """Last row of the merged sample's matrix, bit ``i`` = column ``i``."""
    v = 0
    for j in range(l - k):
        if (r_merged >> j) & 1:
            v |= 1 << (l - 1 - j)
    return v


def improved_samples(
    small: Sequence[tuple[int, int]], k: int, l: int
) -> list[LpnSample]:
    """Collide reduced ``(r, v)`` pairs on the top ``k`` coefficients of ``r``.

    Merged vector bit ``j`` is ``r'_j``; observed bit is ``v'_{l-1}``.
    """
    raw = [LpnSample(r, (v >> (l - 1)) & 1) for r, v in small]
    return birthday_merge(raw, k, l)


def attack_improved(
    samples: Sequence[RingLpnSample],
    params: AttackParams,
    code: CrtCode,
    truth: int | None = None,
    validate: bool = True,
) -> AttackResult:
    l, k = code.l, params.k
    kmin = improved_min_k(code)
    if k < kmin:
        raise ValueError(
            f"k={k} is too small for the free last-row read-off: need k >= {kmin} "
            f"(k > 10, and k >= deg(f1 - x^{l}) so reduction never reaches x^{l - 1})"
        )
    if params.relation.m != 1 << (l - 1):
        raise ValueError("the improved attack uses the last generator row as its relation")
    _check_params(params, l)
    f1 = code.f1.bits
    small = [reduce_sample(s, f1) for s in samples]
    merged = improved_samples(small, k, l)
    if not merged:
        raise ValueError("birthday step produced no collisions; increase N")
    res = distinguish(merged, l - k, [l - 1 - j for j in range(l - k)], validate)
    n = len(samples)
    res.queries = n
    res.bitops = {"store": n * l, "merge": l * len(merged), "fwht": (l - k) << (l - k)}
    if truth is not None:
        res.success = res.matches(truth)
    return res


def run_improved(
    oracle: OracleHandle, params: AttackParams, code: CrtCode, workers: int = 1
) -> AttackResult:
    samples = batch(oracle, params.N, workers)
    return attack_improved(
        samples, params, code, truth=_reference_residue(oracle, code.f1.bits)
    )


def decision_threshold(samples: int, epsilon: float | Fraction, weight: int, dims: int) -> float:
    """Midpoint between the planted peak ``M eps^(2w)`` and the null maximum
    ``sqrt(2 M ln 2^dims)`` of ``2^dims`` Gaussian scores."""
    peak = samples * float(epsilon) ** (2 * weight)
    null = math.sqrt(2 * samples * dims * math.log(2))
    return (peak + null) / 2


def decision_test(
    oracle: OracleHandle, params: AttackParams, code: CrtCode, workers: int = 1
) -> tuple[bool, AttackResult, float]:
    """Run the improved pipeline and answer whether the oracle is real.

    Returns ``(answer, result, threshold)``.
    """
    samples = batch(oracle, params.N, workers)
    res = attack_improved(samples, params, code, validate=False)
    thr = decision_threshold(res.samples_used, params.noise.epsilon, params.relation.weight, res.dims)
    return res.score > thr, res, thr
