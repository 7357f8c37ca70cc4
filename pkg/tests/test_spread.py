import itertools
from fractions import Fraction
from math import e, factorial

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from permfree.errors import DimensionError, DomainError
from permfree.perm_core import PermFamily, agreement_matrix, antipodal_pair, umvirate
from permfree.spread import (
    BLOCK,
    CubeFamily,
    coverage_mc,
    cross_one_check,
    disjoint_split_experiment,
    embed,
    find_disjoint_pair,
    spreadness,
    theorem_bound,
)


def brute_spread(C, depth):
    best = None
    ground = range(1, C.ground_size + 1)
    for d in range(1, depth + 1):
        for X in itertools.combinations(ground, d):
            c = sum(1 for s in C.sets if set(X) <= s)
            if c:
                r = float(Fraction(c, len(C))) ** (-1 / d)
                best = r if best is None else min(best, r)
    return best


def exact_coverage(C, p):
    """P(W contains a member) for W p-random, by summing over all subsets."""
    N = C.ground_size
    total = 0.0
    for bits in range(1 << N):
        W = {i + 1 for i in range(N) if bits >> i & 1}
        if any(s <= W for s in C.sets):
            total += p ** len(W) * (1 - p) ** (N - len(W))
    return total


class TestEmbed:
    @pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
    def test_injective_and_agreement(self, n):
        F = PermFamily.full(n)
        C = embed(F)
        assert len(set(C.sets)) == factorial(n)
        assert all(len(s) == n for s in C.sets)
        M = C.matrix().astype(int)
        np.testing.assert_array_equal(M @ M.T, agreement_matrix(F.array, F.array))

    def test_empty(self):
        with pytest.raises(DomainError):
            embed(PermFamily.empty(3))

    def test_ground_check(self):
        with pytest.raises(DomainError):
            CubeFamily(3, ({1, 4},))


class TestSpreadness:
    @pytest.mark.parametrize("n", [4, 5, 6])
    def test_full_sn_floor(self, n):
        rep = spreadness(embed(PermFamily.full(n)), 3)
        assert rep.r >= n / e
        assert rep.r == pytest.approx((factorial(n) / factorial(n - 3)) ** (1 / 3))

    @settings(max_examples=25, deadline=None)
    @given(st.sets(st.integers(0, 23), min_size=1, max_size=24), st.integers(1, 3))
    def test_matches_brute_force(self, ranks, depth):
        C = embed(PermFamily.from_ranks(4, ranks))
        assert spreadness(C, depth).r == pytest.approx(brute_spread(C, depth), rel=1e-12)

    def test_witness_is_consistent(self):
        rep = spreadness(embed(umvirate(4, (1,), (2,))), 2)
        # every member contains element 2 (position 1 -> 2)
        assert rep.witness_X == (2,)
        assert rep.r == pytest.approx(1.0)

    def test_depth_domain(self):
        with pytest.raises(DomainError):
            spreadness(embed(PermFamily.full(3)), 5)


class TestTheoremBound:
    def test_vacuous_below_one(self):
        assert theorem_bound(2.0, 1, 0.5, 1.0) is None
        assert theorem_bound(2.0, 1, 0.25, 1.0) is None

    def test_value(self):
        assert theorem_bound(4096, 4, 0.5, 1.0) == pytest.approx(1 - (5 / 11) ** 4)


class TestCoverage:
    def test_singletons_match_closed_form(self):
        N, p = 40, 0.05
        C = CubeFamily(N, tuple({i} for i in range(1, N + 1)))
        est = coverage_mc(C, 1, p, 20_000, seed=3)
        want = 1 - (1 - p) ** N
        assert abs(est.estimate - want) <= 4 * est.std_error

    def test_s3_matches_exact_sum(self):
        C = embed(PermFamily.full(3))
        for m, delta in [(1, 0.5), (2, 0.3)]:
            est = coverage_mc(C, m, delta, 30_000, seed=1)
            want = exact_coverage(C, m * delta)
            assert abs(est.estimate - want) <= 4 * max(est.std_error, 1e-4)

    def test_deterministic_and_thread_independent(self):
        C = embed(PermFamily.full(4))
        a = coverage_mc(C, 2, 0.2, 3 * BLOCK + 17, seed=9)
        b = coverage_mc(C, 2, 0.2, 3 * BLOCK + 17, seed=9)
        c = coverage_mc(C, 2, 0.2, 3 * BLOCK + 17, seed=9, workers=4)
        assert a == b == c

    def test_prefix_of_longer_run(self):
        C = embed(PermFamily.full(3))
        short = coverage_mc(C, 1, 0.4, BLOCK, seed=2)
        long = coverage_mc(C, 1, 0.4, 2 * BLOCK, seed=2)
        assert short.hits <= long.hits

    def test_vacuous_flag(self):
        est = coverage_mc(embed(PermFamily.full(4)), 1, 0.25, 100)
        assert est.vacuous and est.theorem_bound is None

    def test_domain(self):
        C = embed(PermFamily.full(3))
        with pytest.raises(DomainError):
            coverage_mc(C, 4, 0.5, 10)
        with pytest.raises(DomainError):
            coverage_mc(C, 1, 0.5, 0)


class TestCrossIntersection:
    def test_umvirate_self_intersects(self):
        C = embed(umvirate(4, (1,), (1,)))
        assert cross_one_check(C, C)
        assert find_disjoint_pair(C, C) is None

    def test_antipodal_disjoint(self):
        F, G = antipodal_pair(4)
        a, b = find_disjoint_pair(embed(F), embed(G))
        assert not a & b

    def test_ground_mismatch(self):
        with pytest.raises(DimensionError):
            find_disjoint_pair(embed(PermFamily.full(3)), embed(PermFamily.full(4)))

    def test_split_experiment(self):
        F, G = antipodal_pair(2)
        rep = disjoint_split_experiment(embed(F), embed(G), 4000, seed=4)
        # {1,4} inside S and {2,3} outside S: probability 1/16
        assert rep.both / rep.trials == pytest.approx(1 / 16, abs=4 * (1 / 16 * 15 / 16 / 4000) ** 0.5)
        a, b, S = rep.witness
        assert a <= S and not (b & S)
        again = disjoint_split_experiment(embed(F), embed(G), 4000, seed=4)
        assert again == rep

    def test_split_never_for_intersecting(self):
        C = embed(umvirate(3, (1,), (1,)))
        rep = disjoint_split_experiment(C, C, 2000, seed=0)
        assert rep.both == 0 and rep.witness is None
