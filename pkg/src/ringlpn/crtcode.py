"""The linear code induced by reducing GF(2)[x]/(f) modulo one factor.

Column ``i`` of the ``l x t`` generator is ``x^i mod f1``, so
``G @ vec(e) = vec(e mod f1)`` for any error polynomial of degree < t,
and a message ``m`` selects the combination ``<e mod f1, m>`` of
``weight(m G)`` original error bits.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import DimensionTooLargeForExhaustive, RankDeficient
from .gf2poly import BinaryPolynomial, bits_to_array
from .oracle import substream

EXHAUSTIVE_MAX_DIM = 24
_LOW_CHUNK = 16


@dataclass(frozen=True)
class CrtCode:
    """Generator rows packed as ints: bit ``i`` of ``rows[j]`` is G[j, i]."""

    rows: tuple[int, ...]
    f1: BinaryPolynomial
    t: int

    @property
    def l(self) -> int:
        return len(self.rows)

    def matrix(self) -> np.ndarray:
        return np.stack([bits_to_array(r, self.t) for r in self.rows])

    def encode(self, m: int) -> int:
        cw = 0
        j = 0
        while m:
            if m & 1:
                cw ^= self.rows[j]
            m >>= 1
            j += 1
        return cw

    def relation(self, m: int) -> "Relation":
        if m <= 0 or m.bit_length() > self.l:
            raise ValueError(f"message must be a nonzero {self.l}-bit vector")
        cw = self.encode(m)
        return Relation(m, cw, cw.bit_count())

    def last_row(self) -> "Relation":
        return self.relation(1 << (self.l - 1))


@dataclass(frozen=True)
class Relation:
    """A message ``m`` with its codeword ``m G`` and the codeword weight."""

    m: int
    codeword: int
    weight: int

    def support(self) -> list[int]:
        cw = self.codeword
        return [i for i in range(cw.bit_length()) if (cw >> i) & 1]


def build_generator(f1: BinaryPolynomial, t: int) -> CrtCode:
    l = f1.bits.bit_length() - 1
    if l < 1:
        raise ValueError("f1 must have degree >= 1")
    if t < l:
        raise ValueError(f"code length t={t} is smaller than deg f1={l}")
    f = f1.bits
    top = 1 << l
    rows = [0] * l
    c = 1
    for i in range(t):
        x = c
        while x:
            low = x & -x
            rows[low.bit_length() - 1] |= 1 << i
            x ^= low
        c <<= 1
        if c & top:
            c ^= f
    return CrtCode(tuple(rows), f1, t)


def row_weights(code: CrtCode) -> list[int]:
    return [r.bit_count() for r in code.rows]


def _words(x: int, nwords: int) -> list[int]:
    return [(x >> (64 * w)) & 0xFFFFFFFFFFFFFFFF for w in range(nwords)]


def min_weight_exact(code: CrtCode) -> Relation:
    """Minimum-weight nonzero codeword by enumerating all ``2^l`` messages.

    Ties go to the smallest ``m`` read as an integer (bit j = m_j).
    """
    l = code.l
    if l > EXHAUSTIVE_MAX_DIM:
        raise DimensionTooLargeForExhaustive(
            f"exhaustive search needs l <= {EXHAUSTIVE_MAX_DIM}, got l = {l}"
        )
    nwords = (code.t + 63) // 64
    low = min(l, _LOW_CHUNK)
    table = np.zeros((1 << low, nwords), dtype=np.uint64)
    for j in range(low):
        row = np.array(_words(code.rows[j], nwords), dtype=np.uint64)
        table[1 << j : 1 << (j + 1)] = table[: 1 << j] ^ row

    best_w, best_m = code.t + 1, 0
    base = 0
    for h in range(1 << (l - low)):
        if h:
            # xor of the high rows selected by h
            base = 0
            for j in range(l - low):
                if (h >> j) & 1:
                    base ^= code.rows[low + j]
        cw = table ^ np.array(_words(base, nwords), dtype=np.uint64)
        w = np.bitwise_count(cw).sum(axis=1, dtype=np.int64)
        if h == 0:
            w[0] = code.t + 1
        idx = int(np.argmin(w))
        if int(w[idx]) < best_w:
            best_w, best_m = int(w[idx]), (h << low) | idx
    return code.relation(best_m)


def _isd_iteration(code: CrtCode, rng: np.random.Generator) -> Relation:
    l, t = code.l, code.t
    mask = (1 << t) - 1
    # codeword in the low t bits, message above it
    work = [code.rows[j] | (1 << (t + j)) for j in range(l)]
    order = rng.permutation(t)
    pivots = 0
    for col in order:
        bit = 1 << int(col)
        piv = next((i for i in range(pivots, l) if work[i] & bit), None)
        if piv is None:
            continue
        work[pivots], work[piv] = work[piv], work[pivots]
        pr = work[pivots]
        for i in range(l):
            if i != pivots and work[i] & bit:
                work[i] ^= pr
        pivots += 1
        if pivots == l:
            break
    if pivots < l:
        raise RankDeficient(f"generator has rank {pivots} < {l}", free_variables=l - pivots)
    best = min(work, key=lambda r: ((r & mask).bit_count(), r >> t))
    cw = best & mask
    return Relation(best >> t, cw, cw.bit_count())


def min_weight_randomized(
    code: CrtCode, iterations: int, seed: int, workers: int = 1
) -> Relation:
    """Best codeword over ``iterations`` random information sets.

    Each iteration row-reduces the generator on a random set of ``l``
    independent columns (chosen greedily from a random column order) and
    keeps the lightest row.  Iteration ``i`` draws from substream ``i``
    of ``seed``, so the result does not depend on ``workers``.
    """
    if iterations < 1:
        raise ValueError("iterations must be >= 1")

    def run(i: int) -> Relation:
        return _isd_iteration(code, substream(seed, i))

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            found = list(pool.map(run, range(iterations)))
    else:
        found = [run(i) for i in range(iterations)]
    return min(found, key=lambda r: (r.weight, r.m))


def best_known_relation(code: CrtCode, iterations: int = 0, seed: int = 0) -> Relation:
    """Exact minimum when ``l`` is small enough, otherwise the best of the
    lightest generator row and an optional randomized search."""
    if code.l <= EXHAUSTIVE_MAX_DIM:
        return min_weight_exact(code)
    weights = row_weights(code)
    j = min(range(code.l), key=lambda i: (weights[i], 1 << i))
    best = code.relation(1 << j)
    if iterations:
        cand = min_weight_randomized(code, iterations, seed)
        if (cand.weight, cand.m) < (best.weight, best.m):
            best = cand
    return best


def gv_bound(n: int, k: int) -> int:
    """Largest ``d`` with ``sum_{i<=d-2} C(n-1, i) < 2^(n-k)`` (exact integers)."""
    if not 0 < k <= n:
        raise ValueError("need 0 < k <= n")
    limit = 1 << (n - k)
    d = 1  # Vol(n-1, -1) = 0 always satisfies the bound
    vol = 0
    while d < n:
        vol += math.comb(n - 1, d - 1)  # Vol(n-1, d-1), tested for d+1
        if vol >= limit:
            break
        d += 1
    return d
