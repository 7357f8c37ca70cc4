"""Invariant suite behind ``permfree verify``.

``quick`` stays at n <= 5 and finishes in seconds; ``full`` goes to n <= 6
and includes the n = 4 oracle equivalence.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from . import bounds, extremal, perm_core, spectral, spread
from .perm_core import PermFamily, RestrictionPattern


def _perm_pairs(n):
    P = perm_core.all_perms(n)
    A = perm_core.agreement_matrix(P, P)
    off = ~np.eye(len(P), dtype=bool)
    return bool(A[off].max() <= n - 2)


def check_distinct_agreement(level):
    return all(_perm_pairs(n) for n in range(2, 7 if level == "full" else 6))


def check_umvirates(level):
    top = 6 if level == "full" else 5
    for n in range(1, top + 1):
        for t in range(0, min(n, 3) + 1):
            U = perm_core.umvirate(n, range(1, t + 1), range(2, t + 2) if t < n else range(1, t + 1))
            if len(U) != math.factorial(n - t):
                return False
            A = perm_core.agreement_matrix(U.array, U.array)
            if A.min() < t:
                return False
            if t >= 1 and not perm_core.is_cross_free(U, U, t):
                return False
    return True


def check_fixed_points(level):
    top = 8 if level == "full" else 6
    for n in range(1, top + 1):
        counts = [perm_core.count_with_fixed_points(n, j) for j in range(n + 1)]
        if sum(counts) != math.factorial(n) or counts != perm_core.fixed_point_histogram(n):
            return False
        if any(perm_core.derangements(k) != bounds.derangements(k) for k in range(n + 1)):
            return False
    return True


def check_antipodal(level):
    for n in (2, 4, 6):
        F, G = perm_core.antipodal_pair(n)
        if perm_core.agreement_matrix(F.array, G.array).max() != 0:
            return False
        if len(F) != math.factorial(n // 2) ** 2:
            return False
    return True


def check_restrict(level, rng):
    F = PermFamily.from_ranks(5, rng.choice(120, size=40, replace=False).tolist())
    p = RestrictionPattern(((1, 2),))
    q = RestrictionPattern(((3, 4),))
    once = perm_core.restrict(F, p)
    if perm_core.restrict(once, p).members != once.members:
        return False
    return perm_core.restrict(once, q).members == perm_core.restrict(F, p.concat(q)).members


def _random_indicator(n, rng):
    size = math.factorial(n)
    vals = (rng.random(size) < rng.uniform(0.1, 0.9)).astype(float)
    if vals.sum() == 0:
        vals[0] = 1
    return spectral.SnFunction(n, vals)


def check_spectral(level, rng):
    ns = (4, 5, 6) if level == "full" else (4, 5)
    for n in ns:
        for _ in range(3):
            f = _random_indicator(n, rng)
            dec = spectral.decompose(f)
            if abs(dec.total - f.norm2()) > 1e-8 * max(f.norm2(), 1e-300):
                return False
            comps = dec.components
            for a, b in itertools.combinations(range(len(comps)), 2):
                if abs(np.mean(comps[a].values * comps[b].values)) > 1e-8 * f.norm2():
                    return False
            lo = spectral.level_one_coeffs(f)
            if np.max(np.abs(lo.evaluate() - comps[1].values)) > 1e-8:
                return False
            if abs(spectral.restriction_variance(f) * (n - 1) - dec.weights[1]) > 1e-8 * max(dec.weights[1], 1e-12):
                return False
    return True


def check_dictator_purity(level):
    for n in range(2, 7 if level == "full" else 6):
        U = perm_core.umvirate(n, (1,), (min(2, n),))
        w = spectral.decompose(spectral.SnFunction.indicator(U)).weights
        if any(abs(x) > 1e-10 for x in w[2:]):
            return False
    return True


def check_embedding(level):
    for n in range(1, 6 if level == "full" else 5):
        F = PermFamily.full(n)
        C = spread.embed(F)
        if len(set(C.sets)) != len(F):
            return False
        inter = C.matrix().astype(int) @ C.matrix().T.astype(int)
        if not np.array_equal(inter, perm_core.agreement_matrix(F.array, F.array)):
            return False
    return True


def check_spread_floor(level):
    for n in ((4, 5, 6) if level == "full" else (4, 5)):
        if spread.spreadness(spread.embed(PermFamily.full(n)), 3).r < n / math.e:
            return False
    return True


def check_oracle(level):
    top = 4 if level == "full" else 3
    for n in range(1, top + 1):
        for t in range(1, n + 1):
            e = extremal.exact_max_product(n, t)
            b = extremal.bb_max_product(n, t)
            if (e.product, e.status) != (b.product, b.status):
                return False
            if not (e.validate() and b.validate()):
                return False
            if e.product < math.factorial(n - t) ** 2:
                return False
    return True


def check_best_response(level, rng):
    n, t = 4, 2
    order = rng.permutation(24).tolist()
    prev = None
    for k in range(0, 25, 4):
        G = extremal.best_response(PermFamily.from_ranks(n, order[:k]), t)
        if prev is not None and not G.members <= prev.members:
            return False
        prev = G
    return True


def check_agreement_counts(level):
    top = 8 if level == "full" else 7
    for n in range(1, top + 1):
        for r in range(0, 4):
            if 2 * r > n:
                continue
            total = 0
            for j in range(0, n - 2 * r + 1):
                c = bounds.agreement_count_exact(n, r, j)
                if bounds.agreement_prob_formula(n, r, j) * math.factorial(n - r) != c:
                    return False
                total += c
            if total != math.factorial(n - r):
                return False
    return True


def check_main_bound(level):
    for n in range(2, 13):
        for t in range(1, n + 1):
            for m in range(0, n - t):
                lhs = bounds.main_bound(n, t, m) * 4
                rhs = bounds.main_bound(n, t, m + 1) * (n - m - t) ** 2
                if lhs != rhs:
                    return False
    return True


def check_crossover(level):
    for n in (256, 512, 1024):
        ratio = bounds.crossover_t(n) * math.log2(n) / n
        if not 0.5 < ratio <= 1.1:
            return False
    return True


CHECKS = [
    ("perm_core.distinct_agreement_le_n_minus_2", check_distinct_agreement, False),
    ("perm_core.umvirate_size_and_self_agreement", check_umvirates, False),
    ("perm_core.fixed_point_counts", check_fixed_points, False),
    ("perm_core.antipodal_cross_zero", check_antipodal, False),
    ("perm_core.restrict_idempotent_and_concat", check_restrict, True),
    ("spectral.parseval_orthogonality_level_one", check_spectral, True),
    ("spectral.dictator_purity", check_dictator_purity, False),
    ("spread.embedding_preserves_agreement", check_embedding, False),
    ("spread.full_sn_floor_n_over_e", check_spread_floor, False),
    ("extremal.bb_matches_exact", check_oracle, False),
    ("extremal.best_response_antitone", check_best_response, True),
    ("bounds.agreement_formula_vs_enumeration", check_agreement_counts, False),
    ("bounds.main_bound_recurrence", check_main_bound, False),
    ("bounds.crossover_ratio", check_crossover, False),
]


def run_suite(level: str = "quick", seed: int = 0):
    """Yield (name, passed) for every invariant check."""
    rng = np.random.default_rng(seed)
    for name, fn, needs_rng in CHECKS:
        try:
            ok = fn(level, rng) if needs_rng else fn(level)
        except Exception:  # noqa: BLE001 - a crashing check is a failing check
            ok = False
        yield name, bool(ok)
