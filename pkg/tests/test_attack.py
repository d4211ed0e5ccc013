import math
import random
import warnings
from fractions import Fraction

import numpy as np
import pytest

from ringlpn.attack import (
    AttackParams,
    LpnSample,
    attack_generic,
    attack_improved,
    birthday_merge,
    compress_sample,
    decision_test,
    decision_threshold,
    distinguish,
    fwht,
    improved_min_k,
    improved_samples,
    last_row_vector,
    pair_count,
    piling_up,
    reduce_sample,
    run_generic,
    run_improved,
)
from ringlpn.crtcode import build_generator
from ringlpn.gf2poly import clmul, pmod
from ringlpn.linalg import parity
from ringlpn.oracle import NoiseSpec, batch, make_oracle, substream
from ringlpn.ring import tau_columns

NOISE = NoiseSpec(Fraction(1, 20))


def naive_wht(f):
    n = len(f)
    return [sum(f[r] * (-1) ** bin(s & r).count("1") for r in range(n)) for s in range(n)]


@pytest.fixture(scope="module")
def code33(desk33):
    return build_generator(desk33.factors[0], desk33.degree)


def _params(code, noise=NOISE, log2n=12, k=None):
    return AttackParams(k or improved_min_k(code), 1 << log2n, code.last_row(), noise)


class TestFwht:
    def test_delta(self):
        assert fwht([1, 0, 0, 0]).tolist() == [1, 1, 1, 1]

    def test_ones(self):
        assert fwht([1] * 8).tolist() == [8] + [0] * 7

    def test_naive_small(self):
        rng = random.Random(0)
        for n in range(0, 7):
            f = [rng.randint(-50, 50) for _ in range(1 << n)]
            assert fwht(f).tolist() == naive_wht(f)

    @pytest.mark.parametrize("n", [0, 3, 5, 6, 7])
    def test_bad_length(self, n):
        with pytest.raises(ValueError):
            fwht([1] * n)

    def test_involution(self):
        f = np.arange(64) - 20
        assert (fwht(fwht(f)) == 64 * f).all()


class TestCompress:
    def test_unit_message_selects_row(self, desk33, code33):
        o = make_oracle(desk33, NOISE, 1)
        f1 = code33.f1.bits
        for s in batch(o, 20):
            r_hat, v_hat = reduce_sample(s, f1)
            cols = tau_columns(r_hat, f1, code33.l)
            for j in (0, 5, code33.l - 1):
                rel = code33.relation(1 << j)
                lpn = compress_sample(s, rel, code33)
                assert lpn.a == sum(((c >> j) & 1) << i for i, c in enumerate(cols))
                assert lpn.z == (v_hat >> j) & 1

    def test_noiseless(self, desk33, code33):
        o = make_oracle(desk33, NoiseSpec(0), 2)
        s_hat = pmod(o.secret.bits, code33.f1.bits)
        rel = code33.relation(0b1011)
        for s in batch(o, 50):
            lpn = compress_sample(s, rel, code33)
            assert lpn.z == parity(lpn.a & s_hat)

    def test_bias_matches_piling_up(self, desk33, code33):
        eta = Fraction(1, 6)
        o = make_oracle(desk33, NoiseSpec(eta), 3)
        rel = code33.last_row()
        s_hat = pmod(o.secret.bits, code33.f1.bits)
        n = 20_000
        errs = [compress_sample(s, rel, code33) for s in batch(o, n)]
        bias = np.mean([1 - 2 * (x.z ^ parity(x.a & s_hat)) for x in errs])
        want = piling_up(float(1 - 2 * eta), rel.weight)
        assert abs(bias - want) <= 3 * math.sqrt((1 - want**2) / n)

    def test_length_mismatch(self, desk33, code33):
        from ringlpn.crtcode import Relation

        s = batch(make_oracle(desk33, NOISE, 1), 1)[0]
        with pytest.raises(ValueError):
            compress_sample(s, Relation(1 << 40, 0, 0), code33)


class TestMerge:
    def test_full_collision(self):
        out = birthday_merge([LpnSample(0b1011, 1), LpnSample(0b1011, 0)], 2, 4)
        assert out == [LpnSample(0, 1)]

    def test_singletons(self):
        s = [LpnSample(i << 3, 0) for i in range(8)]
        assert birthday_merge(s, 3, 6) == []

    def test_count_matches_independent_pass(self):
        rng = random.Random(1)
        s = [LpnSample(rng.getrandbits(14), rng.getrandbits(1)) for _ in range(3000)]
        out = birthday_merge(s, 8, 14)
        buckets = {}
        for x in s:
            buckets.setdefault(x.a >> 6, []).append(x)
        want = sum(math.comb(len(b), 2) for b in buckets.values())
        assert len(out) == want == pair_count(s, 8, 14)
        assert all(x.a < 1 << 6 for x in out)

    def test_low_key(self):
        out = birthday_merge([LpnSample(0b1101, 1), LpnSample(0b0001, 1)], 2, 4, low=True)
        assert out == [LpnSample(0b11, 0)]

    def test_pair_cap(self):
        s = [LpnSample(0, i & 1) for i in range(10)]
        assert len(birthday_merge(s, 1, 3, pair_cap=7)) == 7

    def test_bad_k(self):
        with pytest.raises(ValueError):
            birthday_merge([], 4, 4)


class TestDistinguish:
    def test_noiseless_full_span(self):
        secret = 0b10110
        samples = [LpnSample(a, parity(a & secret)) for a in range(32)]
        res = distinguish(samples, 5, validate=False)
        assert res.candidate == secret and res.score == 32

    def test_empty(self):
        with pytest.raises(ValueError):
            distinguish([], 3)

    def test_planted(self):
        dims, eps = 8, 0.25
        M = int(10 * eps**-2 * dims)
        hits = 0
        for seed in range(100):
            rng = substream(seed)
            secret = int(rng.integers(0, 1 << dims))
            a = rng.integers(0, 1 << dims, M)
            e = rng.random(M) < (1 - eps) / 2
            samples = [LpnSample(int(x), parity(int(x) & secret) ^ int(b)) for x, b in zip(a, e)]
            hits += distinguish(samples, dims).candidate == secret
        assert hits >= 90

    def test_null_stays_low(self):
        dims, M = 8, 5000
        rng = substream(77)
        samples = [LpnSample(int(a), int(z)) for a, z in zip(rng.integers(0, 256, M), rng.integers(0, 2, M))]
        res = distinguish(samples, dims, validate=False)
        planted = decision_threshold(M, 0.5, 1, dims)
        assert res.score < planted
        assert res.score < 2 * math.sqrt(2 * M * dims * math.log(2))

    def test_order_invariant(self):
        rng = random.Random(3)
        s = [LpnSample(rng.getrandbits(6), rng.getrandbits(1)) for _ in range(500)]
        a = distinguish(s, 6, validate=False)
        rng.shuffle(s)
        assert distinguish(s, 6, validate=False).candidate == a.candidate

    def test_scores_ordered(self):
        rng = random.Random(4)
        s = [LpnSample(rng.getrandbits(6), rng.getrandbits(1)) for _ in range(300)]
        res = distinguish(s, 6)
        assert res.score >= res.second_score >= 0


class TestImproved:
    def test_min_k(self, code33, lapin):
        assert improved_min_k(code33) == 11
        for f in lapin.factors:
            assert improved_min_k(build_generator(f, 621)) == 11

    def test_rejects_small_k(self, desk33, code33):
        o = make_oracle(desk33, NOISE, 1)
        with pytest.raises(ValueError, match="k > 10"):
            run_improved(o, _params(code33, k=10), code33)

    def test_rejects_other_relation(self, desk33, code33):
        o = make_oracle(desk33, NOISE, 1)
        p = AttackParams(11, 1 << 10, code33.relation(1), NOISE)
        with pytest.raises(ValueError):
            run_improved(o, p, code33)

    def test_layout_equals_tau_last_row(self, desk33, code33):
        o = make_oracle(desk33, NOISE, 5)
        l, k = code33.l, 11
        f1 = code33.f1.bits
        small = [reduce_sample(s, f1) for s in batch(o, 1 << 11)]
        # recompute merged (r', v') explicitly alongside the fast path
        buckets = {}
        for r, v in small:
            buckets.setdefault(r >> (l - k), []).append((r, v))
        merged = []
        for group in buckets.values():
            for i in range(len(group)):
                for j in range(i + 1, len(group)):
                    merged.append((group[i][0] ^ group[j][0], group[i][1] ^ group[j][1]))
        assert len(merged) >= 1000
        fast = improved_samples(small, k, l)
        assert sorted((x.a, x.z) for x in fast) == sorted(
            (r, (v >> (l - 1)) & 1) for r, v in merged
        )
        for r, _ in merged[:1000]:
            cols = tau_columns(r, f1, l)
            row = sum(((c >> (l - 1)) & 1) << i for i, c in enumerate(cols))
            assert row == last_row_vector(r, l, k)

    def test_noiseless(self, desk33, code33):
        for seed in range(3):
            o = make_oracle(desk33, NoiseSpec(0), seed)
            res = run_improved(o, _params(code33, NoiseSpec(0), log2n=11), code33)
            assert res.success

    def test_recovers_and_is_deterministic(self, desk33, code33):
        a = run_improved(make_oracle(desk33, NOISE, 7), _params(code33), code33)
        b = run_improved(make_oracle(desk33, NOISE, 7), _params(code33), code33, workers=4)
        assert a.success and a.conclusive
        assert a == b

    def test_cheaper_than_generic(self, desk33, code33):
        p = _params(code33)
        imp = run_improved(make_oracle(desk33, NOISE, 8), p, code33)
        gen = run_generic(make_oracle(desk33, NOISE, 8), p, code33, target="high")
        assert imp.success and gen.success
        assert sorted(imp.positions) == sorted(gen.positions)
        assert all(imp.bit_for(q) == gen.bit_for(q) for q in imp.positions)
        assert imp.total_bitops < gen.total_bitops


class TestGeneric:
    def test_low_and_high_agree_on_overlap(self, desk33, code33):
        p = _params(code33)
        lo = run_generic(make_oracle(desk33, NOISE, 9), p, code33, target="low")
        hi = run_generic(make_oracle(desk33, NOISE, 9), p, code33, target="high")
        assert lo.success and hi.success
        assert lo.positions == tuple(range(6)) and hi.positions == tuple(range(11, 17))

    def test_noiseless(self, desk33, code33):
        o = make_oracle(desk33, NoiseSpec(0), 10)
        assert run_generic(o, _params(code33, NoiseSpec(0), log2n=10), code33).success

    def test_bad_target(self, desk33, code33):
        s = batch(make_oracle(desk33, NOISE, 1), 100)
        with pytest.raises(ValueError):
            attack_generic(s, _params(code33), code33, target="middle")

    def test_warns_below_condition(self, desk33, code33):
        s = batch(make_oracle(desk33, NoiseSpec(Fraction(1, 4)), 1), 256)
        with pytest.warns(RuntimeWarning):
            attack_generic(s, _params(code33, NoiseSpec(Fraction(1, 4)), log2n=8), code33)

    def test_dense_relation_control(self, desk33, code33):
        rng = random.Random(0)
        while True:
            m = rng.getrandbits(code33.l)
            if code33.encode(m).bit_count() >= 15:
                break
        rel = code33.relation(m)
        p = AttackParams(11, 1 << 12, rel, NOISE)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            res = run_generic(make_oracle(desk33, NOISE, 11), p, code33)
        thr = decision_threshold(res.samples_used, NOISE.epsilon, code33.last_row().weight, res.dims)
        assert res.score < thr


class TestDecision:
    def test_real_and_uniform(self, desk33, code33):
        p = _params(code33)
        yes, _, _ = decision_test(make_oracle(desk33, NOISE, 1), p, code33)
        no, _, _ = decision_test(make_oracle(desk33, NOISE, 1, mode="uniform"), p, code33)
        assert yes and not no

    def test_noiseless_always_yes(self, desk33, code33):
        p = _params(code33, NoiseSpec(0))
        for seed in range(3):
            assert decision_test(make_oracle(desk33, NoiseSpec(0), seed), p, code33)[0]


class TestParams:
    def test_condition_exact(self, code33):
        p = AttackParams(11, 1 << 12, code33.last_row(), NOISE)
        eps = Fraction(9, 10)
        assert p.theorem_condition() == (Fraction(1 << 24, 1 << 11) >= eps ** (-4 * 5))
        assert not AttackParams(11, 1, code33.last_row(), NOISE).theorem_condition()

    def test_fwht_sizing(self, code33):
        assert AttackParams(11, 1 << 8, code33.last_row(), NOISE).fwht_sizing(17)
        assert not AttackParams(11, 1 << 12, code33.last_row(), NOISE).fwht_sizing(17)


def test_piling_up():
    assert piling_up(0.5, 2) == 0.25
    assert piling_up(Fraction(2, 3), 1) == Fraction(2, 3)
    assert math.log2(1 / piling_up(Fraction(2, 3), 26)) == pytest.approx(15.21, abs=0.01)
    with pytest.raises(ValueError):
        piling_up(0.5, -1)


def test_result_json(desk33, code33):
    res = run_improved(make_oracle(desk33, NOISE, 3), _params(code33), code33)
    d = res.to_json()
    assert d["total_bitops"] == sum(d["bitops"].values())
    assert d["positions"] == list(res.positions)
    assert res.bit_for(res.positions[0]) == res.candidate & 1
