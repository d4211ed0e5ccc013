"""GF(2) linear algebra on rows packed into Python ints."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .errors import RankDeficient
from .gf2poly import bits_to_array


def parity(x: int) -> int:
    return x.bit_count() & 1


def rank(rows: Sequence[int]) -> int:
    """Rank of the row set (xor basis insertion)."""
    basis: dict[int, int] = {}
    for r in rows:
        while r:
            top = r.bit_length() - 1
            if top not in basis:
                basis[top] = r
                break
            r ^= basis[top]
    return len(basis)


def solve(rows: Sequence[int], rhs: Sequence[int], ncols: int) -> int:
    """Solve ``<rows[i], x> = rhs[i]`` for ``x`` (bit j = variable j).

    Raises RankDeficient when fewer than ``ncols`` pivots exist and
    ValueError when the system is inconsistent.
    """
    basis: dict[int, tuple[int, int]] = {}
    for r, b in zip(rows, rhs):
        b &= 1
        while r:
            top = r.bit_length() - 1
            if top not in basis:
                basis[top] = (r, b)
                break
            pr, pb = basis[top]
            r ^= pr
            b ^= pb
        else:
            if b:
                raise ValueError("inconsistent linear system")
    if len(basis) < ncols:
        raise RankDeficient(
            f"system has rank {len(basis)} < {ncols}", free_variables=ncols - len(basis)
        )
    # back substitution from the lowest pivot upward
    x = 0
    for top in sorted(basis):
        r, b = basis[top]
        rest = r ^ (1 << top)
        if parity(rest & x) ^ b:
            x |= 1 << top
    return x


def transpose(columns: Sequence[int], nrows: int) -> list[int]:
    """Rows of the matrix whose column ``i`` is the bit-vector ``columns[i]``."""
    if not columns:
        return [0] * nrows
    mat = np.stack([bits_to_array(c, nrows) for c in columns], axis=1)
    packed = np.packbits(mat, axis=1, bitorder="little")
    return [int.from_bytes(row.tobytes(), "little") for row in packed]


def systematic(rows: Sequence[int], info_set: Sequence[int]) -> list[int] | None:
    """Row-reduce so the columns in ``info_set`` form an identity.

    Row ``j`` of the result has a 1 in column ``info_set[j]`` and zeros
    in the other information-set columns.  Returns None when those
    columns are linearly dependent.
    """
    work = list(rows)
    n = len(work)
    for j, col in enumerate(info_set):
        bit = 1 << col
        piv = next((i for i in range(j, n) if work[i] & bit), None)
        if piv is None:
            return None
        work[j], work[piv] = work[piv], work[j]
        pr = work[j]
        for i in range(n):
            if i != j and work[i] & bit:
                work[i] ^= pr
    return work
