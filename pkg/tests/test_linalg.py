import random

import numpy as np
import pytest

from ringlpn.errors import RankDeficient
from ringlpn.linalg import parity, rank, solve, systematic, transpose


def _np_rank(rows, n):
    m = np.array([[(r >> j) & 1 for j in range(n)] for r in rows], dtype=np.uint8)
    rk = 0
    for c in range(n):
        piv = next((i for i in range(rk, len(m)) if m[i, c]), None)
        if piv is None:
            continue
        m[[rk, piv]] = m[[piv, rk]]
        for i in range(len(m)):
            if i != rk and m[i, c]:
                m[i] ^= m[rk]
        rk += 1
    return rk


def test_parity():
    assert parity(0) == 0 and parity(0b1011) == 1 and parity(0b11) == 0


def test_rank_against_dense_elimination():
    rng = random.Random(1)
    for _ in range(200):
        n = rng.randint(1, 20)
        rows = [rng.getrandbits(n) for _ in range(rng.randint(1, 25))]
        assert rank(rows) == _np_rank(rows, n)


def test_solve_recovers_secret():
    rng = random.Random(2)
    for _ in range(100):
        n = rng.randint(1, 40)
        s = rng.getrandbits(n)
        rows = [rng.getrandbits(n) for _ in range(3 * n + 10)]
        rhs = [parity(r & s) for r in rows]
        assert solve(rows, rhs, n) == s


def test_solve_rank_deficient_counts_free_variables():
    with pytest.raises(RankDeficient) as exc:
        solve([0b001, 0b010], [1, 0], 3)
    assert exc.value.free_variables == 1


def test_solve_inconsistent():
    with pytest.raises(ValueError):
        solve([0b1, 0b1], [0, 1], 1)


def test_transpose_round_trip():
    rng = random.Random(4)
    cols = [rng.getrandbits(9) for _ in range(13)]
    rows = transpose(cols, 9)
    assert len(rows) == 9
    assert transpose(rows, 13) == cols
    for i in range(9):
        for j in range(13):
            assert (rows[i] >> j) & 1 == (cols[j] >> i) & 1


def test_systematic():
    rows = [0b0111, 0b1010]
    out = systematic(rows, [0, 1])
    assert out is not None
    # columns 0 and 1 of the reduced rows form the identity
    assert [(r >> 0) & 1 for r in out] == [1, 0]
    assert [(r >> 1) & 1 for r in out] == [0, 1]
    assert systematic([0b01, 0b01], [0, 1]) is None
