from math import factorial

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from permfree.errors import CapacityError, DomainError
from permfree.extremal import (
    EXACT,
    LOWER,
    bb_max_product,
    best_response,
    closure,
    density_bump_search,
    exact_max_product,
    initial_state,
    project_common,
    reduction_round,
)
from permfree.perm_core import (
    PermFamily,
    RestrictionPattern,
    all_perms,
    antipodal_pair,
    is_cross_free,
    restrict,
    umvirate,
)

# Exhaustive optima for n <= 4, from the subset scan.
OPTIMA = {
    (1, 1): 1, (2, 1): 1, (2, 2): 4,
    (3, 1): 9, (3, 2): 9, (3, 3): 36,
    (4, 1): 36, (4, 2): 144, (4, 3): 144, (4, 4): 576,
}


def brute_best_response(F, t):
    P = [tuple(p) for p in all_perms(F.n).tolist()]
    return {p for p in P if all(sum(a == b for a, b in zip(p, s)) != t - 1 for s in F)}


def brute_max_product(n, t):
    P = [tuple(p) for p in all_perms(n).tolist()]
    best = 0
    for mask in range(1, 1 << len(P)):
        F = PermFamily(n, frozenset(P[i] for i in range(len(P)) if mask >> i & 1))
        best = max(best, len(F) * len(brute_best_response(F, t)))
    return best


class TestBestResponse:
    @pytest.mark.parametrize("n", [3, 4])
    def test_full_family_t1(self, n):
        assert len(best_response(PermFamily.full(n), 1)) == 0

    @settings(max_examples=30, deadline=None)
    @given(st.sets(st.integers(0, 23), max_size=10), st.integers(1, 4))
    def test_matches_brute_force(self, ranks, t):
        F = PermFamily.from_ranks(4, ranks)
        G = best_response(F, t)
        assert G.members == brute_best_response(F, t)
        assert is_cross_free(F, G, t)

    @settings(max_examples=20, deadline=None)
    @given(st.sets(st.integers(0, 23), max_size=12), st.sets(st.integers(0, 23), max_size=12))
    def test_antitone(self, a, b):
        F1 = PermFamily.from_ranks(4, a)
        F2 = PermFamily.from_ranks(4, a | b)
        assert best_response(F2, 2).members <= best_response(F1, 2).members

    def test_domain(self):
        with pytest.raises(DomainError):
            best_response(PermFamily.full(3), 4)


class TestClosure:
    def test_umvirate_is_fixed(self):
        U = umvirate(4, (1,), (1,))
        F, G, rounds = closure(U, 1)
        assert F.members == U.members == G.members
        assert rounds == 1

    @pytest.mark.parametrize("t", [1, 2, 3])
    def test_fixed_point(self, t):
        rng = np.random.default_rng(t)
        F0 = PermFamily.from_ranks(4, rng.choice(24, 3, replace=False).tolist())
        F, G, _ = closure(F0, t)
        assert best_response(F, t).members == G.members
        assert best_response(G, t).members == F.members
        assert is_cross_free(F, G, t)


class TestSearch:
    @pytest.mark.parametrize("key", sorted(OPTIMA))
    def test_exact_optima(self, key):
        res = exact_max_product(*key)
        assert res.product == OPTIMA[key]
        assert res.status == EXACT
        assert res.validate()
        assert res.product >= factorial(key[0] - key[1]) ** 2

    @pytest.mark.parametrize("key", [k for k in sorted(OPTIMA) if k[0] <= 3])
    def test_subset_scan_against_naive_loop(self, key):
        assert brute_max_product(*key) == OPTIMA[key]

    @pytest.mark.parametrize("key", sorted(OPTIMA))
    def test_bb_agrees(self, key):
        res = bb_max_product(*key)
        assert (res.product, res.status) == (OPTIMA[key], EXACT)
        assert res.validate()

    def test_bb_budget_gives_lower_bound(self):
        res = bb_max_product(5, 2, node_budget=2000)
        assert res.status == LOWER
        assert res.validate()
        assert res.product >= factorial(3) ** 2

    def test_caps(self):
        with pytest.raises(CapacityError):
            exact_max_product(5, 2)
        with pytest.raises(CapacityError):
            bb_max_product(7, 2)


class TestDensityBump:
    def brute(self, A, B, m):
        n = A.n
        for i in range(1, n + 1):
            for j in range(1, n + 1):
                ca = sum(1 for s in A if s[i - 1] == j)
                cb = sum(1 for s in B if s[i - 1] == j)
                if ca * n > len(A) * m and cb * n > len(B) * m:
                    return (i, j)
        return None

    def test_antipodal_has_no_bump(self):
        F, G = antipodal_pair(4)
        assert density_bump_search(F, G, 1.5) is None
        assert self.brute(F, G, 1.5) is None

    def test_umvirate_pair(self):
        U = umvirate(4, (2,), (3,))
        assert density_bump_search(U, U, 1.5) == (2, 3)

    @settings(max_examples=30, deadline=None)
    @given(st.sets(st.integers(0, 119), min_size=1, max_size=40),
           st.sets(st.integers(0, 119), min_size=1, max_size=40),
           st.sampled_from([0.5, 1.0, 1.5, 2.0]))
    def test_matches_brute_force(self, a, b, m):
        A, B = PermFamily.from_ranks(5, a), PermFamily.from_ranks(5, b)
        assert density_bump_search(A, B, m) == self.brute(A, B, m)


class TestReduction:
    def test_project_common_keeps_agreements(self):
        p = RestrictionPattern(((2, 3),))
        A = restrict(PermFamily.full(4), p)
        P = project_common(A, p)
        assert P.n == 3 and len(P) == 6

    def test_project_common_rejects_non_extension(self):
        with pytest.raises(DomainError):
            project_common(PermFamily.full(3), RestrictionPattern(((1, 1),)))

    def test_umvirate_round_prunes_partner_away(self):
        # the 2-umvirate restricts to its own pattern, which empties an identical B
        U = umvirate(5, (1, 2), (1, 2))
        state = reduction_round(initial_state(U, U, 2), 2.0)
        assert state.terminated == "empty-family"
        assert state.history[-1] == {"step": "prune-B", "pattern": "1->1,2->2"}

    @pytest.mark.parametrize("t", [2, 3])
    def test_singleton_against_best_response(self, t):
        A = PermFamily.from_ranks(5, [0])
        B = best_response(A, t)
        state = reduction_round(initial_state(A, B, t), 2.0)
        assert state.terminated is None
        assert state.t_remaining == t - 1
        assert state.cross_free()
        assert state.history[-1]["A_pattern"] == "1->1,2->2,3->3"
        assert state.history[-1]["common"] == "4->4"

    def test_rejects_non_free_input(self):
        F = PermFamily.from_images(4, [(1, 2, 3, 4)])
        G = PermFamily.from_images(4, [(2, 1, 3, 4)])
        with pytest.raises(DomainError):
            reduction_round(initial_state(F, G, 3), 2.0)

    def test_empty_family_terminates(self):
        state = reduction_round(initial_state(PermFamily.empty(4), PermFamily.full(4), 2), 2.0)
        assert state.terminated == "empty-family"

    @pytest.mark.parametrize("seed", range(6))
    def test_random_pairs_stay_cross_free(self, seed):
        rng = np.random.default_rng(seed)
        n, t = 5, int(rng.integers(2, 4))
        A = PermFamily.from_ranks(n, rng.choice(120, 3, replace=False).tolist())
        B = best_response(A, t)
        assert len(B)
        state = initial_state(A, B, t)
        while not state.terminated and state.t_remaining >= 2:
            state = reduction_round(state, 1.5)
            if not state.terminated:
                assert state.cross_free()
                muA, muB = state.densities[-1]
                assert muA > 0 and muB > 0
