import json
import random

import numpy as np
import pytest

from ringlpn.errors import ComponentTooLarge, FactorizationInvalid, FactorsNotCoprime
from ringlpn.gf2poly import BinaryPolynomial, clmul, is_irreducible, pmod
from ringlpn.ring import (
    PRESETS,
    crt_lift,
    crt_split,
    load_ring,
    make_ring,
    preset_data,
    ring_mul_add,
    tau_matrix,
)

P = BinaryPolynomial.parse


def _vec(bits, n):
    return np.array([(bits >> i) & 1 for i in range(n)], dtype=np.uint8)


class TestMakeRing:
    def test_hand_idempotents(self, tiny):
        assert tiny.idempotents == (P("x^2+x+1"), P("x^2+x"))
        assert (tiny.idempotents[0] + tiny.idempotents[1]) == P("1")

    def test_repeated_factor(self):
        with pytest.raises(FactorsNotCoprime):
            make_ring(P("x^2+1"), [P("x+1"), P("x+1")])

    def test_product_mismatch(self):
        with pytest.raises(FactorizationInvalid):
            make_ring(P("x^3+x+1"), [P("x+1"), P("x^2+x+1")])

    def test_constant_factor(self):
        with pytest.raises(FactorizationInvalid):
            make_ring(P("x+1"), [P("1"), P("x+1")])
        with pytest.raises(FactorizationInvalid):
            make_ring(P("x+1"), [])

    def test_reducible_coprime_factors_allowed(self):
        # x^2+1 = (x+1)^2 is reducible but coprime to x^2+x+1
        f = BinaryPolynomial(clmul(P("x^2+1").bits, P("x^2+x+1").bits))
        r = make_ring(f, [P("x^2+1"), P("x^2+x+1")])
        assert len(r.idempotents) == 2

    def test_lapin_idempotents(self, lapin):
        assert lapin.degree == 621 and len(lapin.factors) == 5
        for i, ti in enumerate(lapin.idempotents):
            for j, fj in enumerate(lapin.factors):
                assert pmod(ti.bits, fj.bits) == (1 if i == j else 0)
        total = 0
        for ti in lapin.idempotents:
            total ^= ti.bits
        assert total == 1

    def test_idempotent_algebra(self, lapin, small3):
        for ring in (lapin, small3):
            f = ring.modulus.bits
            for i, ti in enumerate(ring.idempotents):
                for j, tj in enumerate(ring.idempotents):
                    prod = pmod(clmul(ti.bits, tj.bits), f)
                    assert prod == (ti.bits if i == j else 0)


class TestCrt:
    def test_split_example(self, tiny):
        assert crt_split(tiny.element(P("x^2"))) == [P("1"), P("x+1")]
        assert crt_split(tiny.zero()) == [BinaryPolynomial(0)] * 2

    def test_lift_example(self, tiny):
        assert crt_lift([P("1"), P("x+1")], tiny) == tiny.element(P("x^2"))
        assert crt_lift([BinaryPolynomial(0)] * 2, tiny) == tiny.zero()

    def test_lift_oversized(self, tiny):
        with pytest.raises(ComponentTooLarge):
            crt_lift([P("x"), P("1")], tiny)
        with pytest.raises(ValueError):
            crt_lift([P("1")], tiny)

    def test_round_trip_small(self, small3):
        for v in range(1 << small3.degree):
            e = small3.element(v)
            assert crt_lift(crt_split(e), small3) == e

    def test_round_trip_lapin(self, lapin):
        rng = np.random.default_rng(9)
        for _ in range(500):
            s = lapin.random(rng)
            assert crt_lift(crt_split(s), lapin) == s

    def test_split_of_lift(self, lapin):
        rng = random.Random(2)
        for _ in range(200):
            comps = [BinaryPolynomial(rng.getrandbits(d)) for d in lapin.factor_degrees]
            assert crt_split(crt_lift(comps, lapin)) == comps


class TestTau:
    def test_identity(self, small3):
        assert np.array_equal(tau_matrix(small3.one()), np.eye(small3.degree, dtype=np.uint8))

    def test_x_in_gf4(self):
        r = make_ring(P("x^2+x+1"), [P("x^2+x+1")])
        assert tau_matrix(r.element(P("x"))).tolist() == [[0, 1], [1, 1]]

    def test_product_oracle(self, desk33):
        rng = np.random.default_rng(1)
        t = desk33.degree
        for _ in range(200):
            r, s = desk33.random(rng), desk33.random(rng)
            got = tau_matrix(r).astype(np.int64) @ _vec(s.bits, t) % 2
            assert np.array_equal(got, _vec((r * s).bits, t))

    def test_linearity(self, small3):
        rng = np.random.default_rng(4)
        for _ in range(50):
            a, b = small3.random(rng), small3.random(rng)
            assert np.array_equal(tau_matrix(a + b), tau_matrix(a) ^ tau_matrix(b))


class TestElements:
    def test_reduced_invariant(self, tiny):
        from ringlpn.ring import RingElement

        with pytest.raises(ValueError):
            RingElement(P("x^3"), tiny)
        assert tiny.element(P("x^3")) == tiny.one()

    def test_mul_add(self, small3):
        rng = np.random.default_rng(0)
        s, e = small3.random(rng), small3.random(rng)
        assert ring_mul_add(small3.one(), s, small3.zero()) == s
        assert ring_mul_add(small3.zero(), s, e) == e
        r = small3.random(rng)
        want = BinaryPolynomial(pmod(clmul(r.bits, s.bits), small3.modulus.bits) ^ e.bits)
        assert ring_mul_add(r, s, e).value == want

    def test_inverse(self, small3):
        rng = np.random.default_rng(3)
        for _ in range(50):
            a = small3.random(rng)
            if a.is_unit():
                assert a * a.inverse() == small3.one()
            else:
                with pytest.raises(ValueError):
                    a.inverse()

    def test_mixed_rings(self, tiny, small3):
        with pytest.raises(ValueError):
            tiny.one() + small3.one()


class TestPresets:
    @pytest.mark.parametrize("name", PRESETS)
    def test_factors_irreducible_and_valid(self, name):
        ring = load_ring(name)
        assert all(is_irreducible(f) for f in ring.factors)

    def test_desk_shapes(self, desk33, desk3f):
        assert sorted(desk33.factor_degrees) == [16, 17]
        assert len(desk3f.factors) == 3

    @pytest.mark.parametrize("name", [p for p in PRESETS if p != "lapin-621"])
    def test_planted_vectors(self, name):
        from fractions import Fraction

        from ringlpn.oracle import NoiseSpec, make_oracle, query

        data = preset_data(name)
        tv = data["test_vector"]
        ring = load_ring(name)
        o = make_oracle(ring, NoiseSpec(Fraction(tv["eta"])), tv["seed"])
        assert str(o.secret) == tv["secret"]
        for want in tv["samples"]:
            s = query(o)
            assert (str(s.r), str(s.v)) == (want["r"], want["v"])
        assert [str(c) for c in crt_split(o.secret)] == tv["residues"]

    def test_file_round_trip(self, tmp_path, desk33):
        path = tmp_path / "ring.json"
        path.write_text(json.dumps(desk33.to_json()))
        assert load_ring(path) == desk33
        assert load_ring("desk33.json") == desk33

    def test_bad_files(self, tmp_path):
        with pytest.raises(ValueError):
            load_ring(tmp_path / "missing.json")
        bad = tmp_path / "bad.json"
        bad.write_text("{}")
        with pytest.raises(ValueError):
            load_ring(bad)
        with pytest.raises(ValueError):
            preset_data("nope")
