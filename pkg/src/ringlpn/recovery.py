"""Staged recovery of the full secret.

Residues in the cheap factors come from repeated runs of the improved
attack; the rest are obtained by stripping the known part from fresh
samples and solving the standard LPN instance that remains.  The CRT
lift of all residues is checked against fresh samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .attack import (
    FWHT_MAX_DIMS,
    AttackParams,
    LpnSample,
    distinguish,
    improved_min_k,
    improved_samples,
    reduce_sample,
)
from .complexity import cost_improved
from .crtcode import CrtCode, build_generator
from .errors import RankDeficient
from .gf2poly import BinaryPolynomial, clmul, pinv, pmod
from .linalg import rank, solve, transpose
from .oracle import NoiseSpec, OracleHandle, batch
from .ring import RingElement, RingLpnSample, RingSpec, crt_lift, tau_columns

VERIFY_SAMPLES = 64


@dataclass
class PartialSecret:
    known: dict[int, BinaryPolynomial]
    unknown: list[int]

    def check(self, ring: RingSpec) -> None:
        n = len(ring.factors)
        if set(self.known) & set(self.unknown):
            raise ValueError("a factor is both known and unknown")
        for i, s in self.known.items():
            if not 0 <= i < n:
                raise ValueError(f"no factor {i}")
            if s.bits.bit_length() > ring.factors[i].bits.bit_length() - 1:
                raise ValueError(
                    f"residue for factor {i} has degree {s.degree} >= {ring.factor_degrees[i]}"
                )
        for j in self.unknown:
            if not 0 <= j < n:
                raise ValueError(f"no factor {j}")


def known_part(partial: PartialSecret, ring: RingSpec) -> int:
    """``sum s_i t_i mod f`` over the known factors, as raw bits."""
    f = ring.modulus.bits
    acc = 0
    for i, s in partial.known.items():
        acc ^= pmod(clmul(s.bits, ring.idempotents[i].bits), f)
    return acc


def strip_known(sample: RingLpnSample, partial: PartialSecret, ring: RingSpec) -> RingElement:
    """``v + r * sum_{known} s_i t_i``, leaving ``r * sum_{unknown} s_j t_j + e``."""
    if not partial.known:
        raise ValueError("nothing is known yet")
    partial.check(ring)
    f = ring.modulus.bits
    corr = pmod(clmul(sample.r.bits, known_part(partial, ring)), f)
    return ring.element(sample.v.bits ^ corr)


def reduced_layout(partial: PartialSecret, ring: RingSpec) -> list[tuple[int, int, int]]:
    """``(factor, offset, width)`` of each unknown block in the LPN secret."""
    out, off = [], 0
    for j in partial.unknown:
        d = ring.factor_degrees[j]
        out.append((j, off, d))
        off += d
    return out


def build_reduced_lpn(
    sample: RingLpnSample, partial: PartialSecret, ring: RingSpec
) -> list[LpnSample]:
    """``t`` LPN samples over the concatenated unknown residues.

    Row ``i`` is row ``i`` of ``A'_j`` for each unknown ``j`` side by side,
    where column ``c`` of ``A'_j`` is ``r t_j x^c mod f``; the label is
    coefficient ``i`` of the stripped ``v``.
    """
    t = ring.degree
    f = ring.modulus.bits
    v = strip_known(sample, partial, ring).bits if partial.known else sample.v.bits
    rows = [0] * t
    for j, off, d in reduced_layout(partial, ring):
        rt = pmod(clmul(sample.r.bits, ring.idempotents[j].bits), f)
        for c, col in enumerate(tau_columns(rt, f, d)):
            bit = 1 << (off + c)
            x = col
            while x:
                low = x & -x
                rows[low.bit_length() - 1] |= bit
                x ^= low
    return [LpnSample(rows[i], (v >> i) & 1) for i in range(t)]


def reduced_secret(s: RingElement, partial: PartialSecret) -> int:
    """The concatenated unknown residues of a known secret (for checks)."""
    ring = s.ring
    out = 0
    for j, off, _ in reduced_layout(partial, ring):
        out |= pmod(s.bits, ring.factors[j].bits) << off
    return out


def solve_reduced(
    samples: Sequence[LpnSample], dims: int, noise: NoiseSpec, budget: int = FWHT_MAX_DIMS
) -> int:
    """Secret of a standard LPN instance.

    Noiseless instances go through Gaussian elimination.  Noisy ones are
    scored by a full Walsh-Hadamard transform, which at desk scale needs
    no birthday step; the answer does not depend on sample order.
    """
    if noise.eta == 0:
        return solve([s.a for s in samples], [s.z for s in samples], dims)
    if dims > budget:
        raise ValueError(
            f"noisy instance with {dims} unknowns exceeds the transform budget 2^{budget}"
        )
    return distinguish(samples, dims, validate=False).candidate


# ----------------------------------------------------------------------
# one factor, all coefficients


@dataclass
class ResidueResult:
    factor: int
    residue: BinaryPolynomial | None
    passes: list[dict]
    conclusive: bool
    bitops: dict[str, int]
    queries: int

    @property
    def total_bitops(self) -> int:
        return sum(self.bitops.values())


def _shift_rows(p: int, f1: int, l: int) -> list[int]:
    """Rows of multiplication by ``x^p`` modulo ``f1``."""
    u = pmod(1 << p, f1)
    return transpose(tau_columns(u, f1, l), l)


def recover_residue(
    samples: Sequence[RingLpnSample],
    params: AttackParams,
    code: CrtCode,
    factor: int = 0,
    max_passes: int | None = None,
) -> ResidueResult:
    """All ``l`` coefficients of ``s mod f1`` from repeated improved runs.

    Pass ``p`` multiplies every reduced ``r`` by ``x^-p``; the improved
    pipeline then returns the top ``l - k`` coefficients of
    ``x^p s mod f1``, i.e. ``l - k`` linear equations in ``s mod f1``.
    Passes continue with ``p = 0, l-k, 2(l-k), ...`` until the equations
    have full rank.
    """
    l, k = code.l, params.k
    kmin = improved_min_k(code)
    if k < kmin:
        raise ValueError(f"k={k} is below the improved minimum {kmin}")
    f1 = code.f1.bits
    dims = l - k
    if max_passes is None:
        max_passes = 4 * math.ceil(l / dims)
    small = [reduce_sample(s, f1) for s in samples]
    n = len(small)
    eq_rows: list[int] = []
    eq_rhs: list[int] = []
    passes = []
    bitops = {"store": n * l, "transform": 0, "merge": 0, "fwht": 0}
    conclusive = True
    for step in range(max_passes):
        p = step * dims
        if p:
            uinv = pinv(pmod(1 << p, f1), f1)
            view = [(pmod(clmul(r, uinv), f1), v) for r, v in small]
            bitops["transform"] += n * l * l
        else:
            view = small
        merged = improved_samples(view, k, l)
        if not merged:
            raise ValueError("birthday step produced no collisions; increase N")
        res = distinguish(merged, dims, [l - 1 - j for j in range(dims)])
        bitops["merge"] += l * len(merged)
        bitops["fwht"] += dims << dims
        conclusive &= res.conclusive
        rows = _shift_rows(p, f1, l)
        for j in range(dims):
            q = l - 1 - j
            eq_rows.append(rows[q])
            eq_rhs.append((res.candidate >> j) & 1)
        passes.append(
            {
                "shift": p,
                "candidate": res.candidate,
                "score": res.score,
                "second_score": res.second_score,
                "conclusive": res.conclusive,
                "merged": len(merged),
            }
        )
        if rank(eq_rows) == l:
            break
    try:
        s = solve(eq_rows, eq_rhs, l)
    except RankDeficient:
        return ResidueResult(factor, None, passes, False, bitops, n)
    except ValueError:
        # inconsistent equations: at least one pass picked a wrong candidate
        return ResidueResult(factor, None, passes, False, bitops, n)
    return ResidueResult(factor, BinaryPolynomial(s), passes, conclusive, bitops, n)


# ----------------------------------------------------------------------
# whole key


def auto_params(ring: RingSpec, index: int, noise: NoiseSpec, log2n: int = 12) -> AttackParams:
    """Improved-attack parameters for a desk-scale factor: smallest valid
    ``k`` and the last generator row as relation."""
    code = build_generator(ring.factors[index], ring.degree)
    return AttackParams(improved_min_k(code), 1 << log2n, code.last_row(), noise)


def default_schedule(ring: RingSpec, params: Mapping[int, AttackParams]) -> list[int]:
    """Factors with parameters by ascending ``C*``, then the rest."""
    easy = sorted(
        params,
        key=lambda i: (
            Fraction(cost_improved(params[i].N, ring.factor_degrees[i], params[i].k).c_star),
            i,
        ),
    )
    return easy + [i for i in range(len(ring.factors)) if i not in params]


def verify_threshold(t: int, eta: Fraction) -> Fraction:
    """Mean residual weight below which a candidate is accepted."""
    return t * (eta + (Fraction(1, 2) - eta) / 2)


def residual_weights(samples: Sequence[RingLpnSample], candidate: RingElement) -> list[int]:
    f = candidate.ring.modulus.bits
    return [
        (s.v.bits ^ pmod(clmul(s.r.bits, candidate.bits), f)).bit_count() for s in samples
    ]


@dataclass
class RecoveryResult:
    secret: RingElement | None
    partial: PartialSecret
    stages: list[dict]
    verified: bool
    success: bool | None = None
    bitops: dict[str, int] = field(default_factory=dict)

    @property
    def total_bitops(self) -> int:
        return sum(self.bitops.values())

    def to_json(self) -> dict:
        return {
            "secret": None if self.secret is None else str(self.secret.value),
            "known": {str(i): str(p) for i, p in sorted(self.partial.known.items())},
            "unknown": list(self.partial.unknown),
            "verified": self.verified,
            "success": self.success,
            "bitops": dict(self.bitops),
            "total_bitops": self.total_bitops,
        }


def full_recover(
    oracle: OracleHandle,
    schedule: Sequence[int],
    params: Mapping[int, AttackParams],
    tail_samples: int = 64,
    workers: int = 1,
) -> RecoveryResult:
    """Recover every CRT residue, lift, and verify on fresh samples.

    Factors in ``schedule`` that have an entry in ``params`` are attacked
    directly (in schedule order); all others are solved together as one
    reduced LPN instance built from ``tail_samples`` fresh ring samples.
    A failed stage stops the run and returns what is known so far.
    """
    ring = oracle.ring
    n = len(ring.factors)
    if sorted(schedule) != list(range(n)):
        raise ValueError(f"schedule must list every factor 0..{n - 1} once")
    easy = [i for i in schedule if i in params]
    tail = [i for i in schedule if i not in params]
    partial = PartialSecret({}, list(schedule))
    stages: list[dict] = []
    bitops: dict[str, int] = {}
    truth = oracle.secret if oracle.mode == "real" else None

    def done(secret=None, verified=False):
        success = None
        if truth is not None:
            success = secret is not None and secret.bits == truth.bits
        return RecoveryResult(secret, partial, stages, verified, success, bitops)

    for i in easy:
        code = build_generator(ring.factors[i], ring.degree)
        samples = batch(oracle, params[i].N, workers)
        res = recover_residue(samples, params[i], code, factor=i)
        key = f"factor{i}"
        bitops[key] = res.total_bitops
        stage = {
            "stage": key,
            "method": "improved",
            "queries": res.queries,
            "passes": res.passes,
            "conclusive": res.conclusive,
            "bitops": res.total_bitops,
            "residue": None if res.residue is None else str(res.residue),
        }
        if truth is not None and res.residue is not None:
            stage["correct"] = res.residue.bits == pmod(truth.bits, ring.factors[i].bits)
        stages.append(stage)
        if res.residue is None:
            return done()
        partial.known[i] = res.residue
        partial.unknown.remove(i)

    if tail:
        ring_samples = batch(oracle, tail_samples, workers)
        lpn: list[LpnSample] = []
        for s in ring_samples:
            lpn.extend(build_reduced_lpn(s, partial, ring))
        layout = reduced_layout(partial, ring)
        dims = sum(d for _, _, d in layout)
        t = ring.degree
        cost = tail_samples * (t * t + t * dims)
        try:
            sol = solve_reduced(lpn, dims, oracle.noise)
        except (RankDeficient, ValueError) as exc:
            stages.append({"stage": "tail", "factors": tail, "error": str(exc)})
            bitops["tail"] = cost
            return done()
        cost += dims << dims if oracle.noise.eta else len(lpn) * dims
        bitops["tail"] = cost
        for j, off, d in layout:
            partial.known[j] = BinaryPolynomial((sol >> off) & ((1 << d) - 1))
        partial.unknown.clear()
        stages.append(
            {
                "stage": "tail",
                "method": "reduced-lpn",
                "factors": tail,
                "dims": dims,
                "queries": tail_samples,
                "lpn_samples": len(lpn),
                "bitops": cost,
            }
        )

    secret = crt_lift([partial.known[i] for i in range(n)], ring)
    fresh = batch(oracle, VERIFY_SAMPLES, workers)
    weights = residual_weights(fresh, secret)
    thr = verify_threshold(ring.degree, oracle.noise.eta)
    mean = Fraction(sum(weights), len(weights))
    verified = mean < thr
    stages.append(
        {
            "stage": "verify",
            "mean_weight": float(mean),
            "threshold": float(thr),
            "verified": verified,
        }
    )
    return done(secret, verified)

