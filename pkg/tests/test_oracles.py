import itertools
import math
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from attrib import (
    PermutationWeights,
    ValuePair,
    attribute_ass,
    evaluate,
    hash_order_weights,
    monomial,
    product_function,
    random_order_attribution,
    shapley_shubik_bruteforce,
    value_variant_attribution,
    value_variant_example,
    vertex_value,
)
from attrib.axioms import InstanceGenerator

from conftest import charfn_pairs


class TestVertexValue:
    def test_empty_gives_initial(self):
        vp = ValuePair((1.0, 2.0), (3.0, 4.0))
        assert vertex_value(vp, ()) == (1.0, 2.0)

    def test_selector_upper_and_opposite(self):
        from attrib import VertexSelector

        vp = ValuePair((1.0, 2.0, 3.0), (4.0, 5.0, 6.0))
        sel = VertexSelector(frozenset({1, 3}))
        assert sel.upper(vp) == (4.0, 2.0, 6.0)
        assert sel.lower(vp) == (1.0, 5.0, 3.0)

    def test_full_gives_final(self):
        vp = ValuePair((1.0, 2.0), (3.0, 4.0))
        assert vertex_value(vp, (1, 2)) == (3.0, 4.0)

    def test_componentwise(self):
        vp = ValuePair((4.0, 1.0, 1.0), (5.0, 12.0, 1.5))
        assert vertex_value(vp, (2,)) == (4.0, 12.0, 1.0)

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            vertex_value(ValuePair((0.0,), (1.0,)), (2,))


class TestBruteforce:
    def test_equal_split(self):
        res = shapley_shubik_bruteforce(product_function(2), ValuePair((0.0, 0.0), (1.0, 1.0)))
        assert res.z == pytest.approx((0.5, 0.5), rel=1e-15)

    def test_matches_dp_on_procurement(self, procurement):
        f, vp = procurement
        res = shapley_shubik_bruteforce(f, vp)
        assert res.z == pytest.approx((51.5 / 6, 374 / 6, 90.5 / 6), rel=1e-13)

    def test_black_box_square_term(self):
        # two orders by hand: 0.5*(f(1,1)-f(1,0)) + 0.5*(f(0,1)-f(0,0)) for z_2
        res = shapley_shubik_bruteforce(lambda x: x[0] * x[0] * x[1], ValuePair((0.0, 0.0), (1.0, 1.0)))
        assert res.z[1] == pytest.approx(0.5, rel=1e-15)
        assert res.z[0] == pytest.approx(0.5, rel=1e-15)

    def test_cap_enforced(self):
        n = 11
        with pytest.raises(ValueError):
            shapley_shubik_bruteforce(product_function(n), ValuePair((0.0,) * n, (1.0,) * n))

    def test_single_variable(self):
        res = shapley_shubik_bruteforce(lambda x: x[0] ** 3, ValuePair((1.0,), (2.0,)))
        assert res.z == (7.0,)

    def test_completeness_residual_small(self):
        rng = random.Random(0)
        for _ in range(10):
            n = rng.randint(1, 6)
            f = product_function(n)
            vp = ValuePair(tuple(rng.uniform(-2, 2) for _ in range(n)), tuple(rng.uniform(-2, 2) for _ in range(n)))
            res = shapley_shubik_bruteforce(f, vp)
            assert abs(res.residual) <= 1e-10


class TestRandomOrder:
    def test_single_identity_order(self):
        res = random_order_attribution(
            product_function(2), ValuePair((0.0, 0.0), (1.0, 1.0)), PermutationWeights.single((1, 2))
        )
        assert res.z == (0.0, 1.0)

    def test_uniform_equals_equal_split(self):
        res = random_order_attribution(
            product_function(2), ValuePair((0.0, 0.0), (1.0, 1.0)), PermutationWeights.uniform(2)
        )
        assert res.z == pytest.approx((0.5, 0.5), rel=1e-15)

    def test_separable_ignores_order(self):
        from attrib import from_terms

        f = from_terms(2, {(1,): 1.0, (2,): 1.0})
        vp = ValuePair((0.25, -1.0), (1.5, 2.0))
        res = random_order_attribution(f, vp, PermutationWeights.single((1, 2)))
        assert res.z == pytest.approx((1.25, 3.0), rel=1e-15)

    def test_uniform_reduction_matches_bruteforce(self):
        rng = random.Random(1)
        for n in (2, 3, 4):
            f = product_function(n)
            vp = ValuePair(tuple(rng.uniform(-2, 2) for _ in range(n)), tuple(rng.uniform(-2, 2) for _ in range(n)))
            a = random_order_attribution(f, vp, PermutationWeights.uniform(n))
            b = shapley_shubik_bruteforce(f, vp)
            assert a.z == pytest.approx(b.z, rel=1e-12, abs=1e-12)

    def test_invalid_weights_rejected(self):
        with pytest.raises(ValueError):
            PermutationWeights({(1, 2): 0.5, (2, 1): 0.6})
        with pytest.raises(ValueError):
            PermutationWeights({(1, 2): -0.5, (2, 1): 1.5})
        with pytest.raises(ValueError):
            PermutationWeights({(1, 3): 1.0})

    def test_monotonicity_under_uniform_weights(self):
        rng = random.Random(2)
        for _ in range(25):
            n = rng.randint(2, 4)
            terms = {}
            for _ in range(rng.randint(1, 6)):
                size = rng.randint(1, n)
                I = tuple(sorted(rng.sample(range(1, n + 1), size)))
                terms[I] = terms.get(I, 0.0) + rng.uniform(0, 5)
            from attrib import from_terms

            f = from_terms(n, terms)
            r = tuple(rng.uniform(0, 2) for _ in range(n))
            s = tuple(rng.uniform(0, 2) for _ in range(n))
            j = rng.randint(1, n)
            s2 = list(s)
            s2[j - 1] += rng.uniform(0.1, 1.0)
            z1 = random_order_attribution(f, ValuePair(r, s), PermutationWeights.uniform(n)).z[j - 1]
            z2 = random_order_attribution(f, ValuePair(r, tuple(s2)), PermutationWeights.uniform(n)).z[j - 1]
            assert z1 <= z2 + 1e-12


class TestOrdinalInvariance:
    def test_bruteforce_ignores_monotone_reparameterization(self):
        # strictly increasing map on one variable, with both the function and
        # the endpoints rewritten; corner values are unchanged so the order
        # enumeration must give identical attributions
        rng = random.Random(3)
        for _ in range(10):
            n = rng.randint(2, 4)
            f = product_function(n)
            r = tuple(rng.uniform(0.5, 2) for _ in range(n))
            s = tuple(rng.uniform(0.5, 2) for _ in range(n))
            j = rng.randint(1, n)
            phi = lambda v: v ** 3
            phi_inv = lambda v: v ** (1.0 / 3.0)

            def f2(x, j=j, f=f):
                y = list(x)
                y[j - 1] = phi_inv(y[j - 1])
                return f(y)

            r2 = tuple(phi(v) if k == j - 1 else v for k, v in enumerate(r))
            s2 = tuple(phi(v) if k == j - 1 else v for k, v in enumerate(s))
            a = shapley_shubik_bruteforce(f, ValuePair(r, s))
            b = shapley_shubik_bruteforce(f2, ValuePair(r2, s2))
            assert a.z == pytest.approx(b.z, rel=1e-12, abs=1e-12)


class TestValueVariant:
    def test_no_change_gives_zeros(self):
        res = value_variant_example(product_function(2), ValuePair((1.0, 2.0), (1.0, 2.0)))
        assert res.z == (0.0, 0.0)

    def test_single_variable_gets_everything(self):
        res = value_variant_example(lambda x: x[0] ** 2, ValuePair((1.0,), (3.0,)))
        assert res.z == (8.0,)

    def test_explicit_weights_through_general_signature(self):
        weights = PermutationWeights({(1, 2): 0.25, (2, 1): 0.75})
        res = value_variant_attribution(
            product_function(2), ValuePair((0.0, 0.0), (1.0, 1.0)), lambda vp: weights
        )
        assert res.z == pytest.approx((0.75, 0.25), rel=1e-15)

    def test_hash_weights_are_reproducible_and_valid(self):
        vp = ValuePair((0.0, 0.5, 1.0), (1.0, 1.5, 2.0))
        w1 = hash_order_weights(vp)
        w2 = hash_order_weights(vp)
        assert w1.weights == w2.weights
        assert len(w1.weights) == 6
        assert math.fsum(w1.weights.values()) == pytest.approx(1.0, abs=1e-12)

    def test_hash_weights_depend_on_values(self):
        w1 = hash_order_weights(ValuePair((0.0, 0.0), (1.0, 1.0)))
        w2 = hash_order_weights(ValuePair((0.0, 0.0), (1.0, 2.0)))
        assert w1.weights != w2.weights

    def test_completeness_by_construction(self):
        gen = InstanceGenerator(seed=11, n_range=(1, 5))
        for trial in range(20):
            f, vp, _ = gen.instance(trial)
            res = value_variant_example(f, vp)
            total = evaluate(f, vp.s) - evaluate(f, vp.r)
            assert abs(math.fsum(res.z) - total) <= 1e-10 * (1.0 + abs(total))


@given(charfn_pairs(max_n=5))
def test_random_weight_completeness(pair):
    f, vp = pair
    n = f.n
    orders = list(itertools.permutations(range(1, n + 1)))
    rng = random.Random(n)
    picks = rng.sample(orders, min(3, len(orders)))
    raw = [rng.uniform(0.1, 1.0) for _ in picks]
    total_w = math.fsum(raw)
    pw = PermutationWeights({o: w / total_w for o, w in zip(picks, raw)})
    res = random_order_attribution(f, vp, pw)
    total = evaluate(f, vp.s) - evaluate(f, vp.r)
    assert abs(math.fsum(res.z) - total) <= 1e-10 * (1.0 + abs(total))


def test_oracle_equivalence_seeded_sample():
    gen = InstanceGenerator(seed=23, n_range=(1, 6))
    for trial in range(25):
        f, vp, _ = gen.instance(trial)
        a = attribute_ass(f, vp)
        b = shapley_shubik_bruteforce(f, vp)
        for x, y in zip(a.z, b.z):
            assert abs(x - y) <= 1e-9 * max(1.0, abs(x), abs(y))
