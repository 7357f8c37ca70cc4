"""Search for pairs F, G in S_n maximizing |F||G| subject to no cross pair
agreeing on exactly t-1 positions, plus the density-bump scan and one round
of the global-restriction / common-restriction reduction.

Families are handled as Python-int bitsets over lexicographic ranks.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import lru_cache
from math import factorial

import numpy as np

from .errors import CapacityError, DimensionError, DomainError
from .perm_core import (
    PermFamily,
    RestrictionPattern,
    SubSpace,
    agreement_matrix,
    all_perms,
    antipodal_pair,
    is_cross_free,
    restrict,
    umvirate,
)
from .spectral import DEFAULT_DEPTH, global_restriction

EXACT_CAP = 4
BB_CAP = 6

EXACT = "exact-optimal"
LOWER = "lower-bound"


@lru_cache(maxsize=None)
def forbidden_masks(n: int, t: int) -> tuple[int, ...]:
    """mask[r] has bit s set iff perms of rank r and s agree on exactly t-1 positions."""
    if not 1 <= t <= n:
        raise DomainError(f"t={t} outside [1, {n}]")
    P = all_perms(n)
    A = agreement_matrix(P, P) == t - 1
    masks = []
    for row in A:
        packed = np.packbits(row, bitorder="little")
        masks.append(int.from_bytes(packed.tobytes(), "little"))
    return tuple(masks)


def best_response(F: PermFamily, t: int) -> PermFamily:
    """The largest G with no tau agreeing with any sigma in F on exactly t-1 positions."""
    n = F.n
    if not 1 <= t <= n:
        raise DomainError(f"t={t} outside [1, {n}]")
    masks = forbidden_masks(n, t)
    banned = 0
    for r in F.ranks:
        banned |= masks[r]
    allowed = ((1 << factorial(n)) - 1) & ~banned
    return PermFamily.from_ranks(n, _bits(allowed))


def _bits(mask: int):
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def closure(F: PermFamily, t: int, max_rounds: int = 100):
    """Iterate mutual best responses from F until (F*, G*) is a fixed point.

    Returns (F*, G*, rounds).
    """
    if not len(F):
        raise DomainError("closure needs a nonempty starting family")
    cur = F
    for rounds in range(1, max_rounds + 1):
        G = best_response(cur, t)
        nxt = best_response(G, t)
        if nxt.members == cur.members:
            return cur, G, rounds
        cur = nxt
    raise RuntimeError("closure did not stabilize")


@dataclass
class SearchResult:
    n: int
    t: int
    F: PermFamily
    G: PermFamily
    product: int
    status: str
    explored: int
    witness_bound: int

    def validate(self) -> bool:
        return is_cross_free(self.F, self.G, self.t) and len(self.F) * len(self.G) == self.product


def _check_nt(n, t, cap):
    if n > cap:
        raise CapacityError(f"n={n} exceeds the cap {cap} for this search")
    if not 1 <= t <= n:
        raise DomainError(f"t={t} outside [1, {n}]")


def exact_max_product(n: int, t: int) -> SearchResult:
    """Exhaustive scan over every subset F of S_n (n <= 4).

    The banned-set union for every subset mask is built by doubling:
    union[mask + 2^k] = union[mask] | forbidden[k] for mask < 2^k.
    """
    _check_nt(n, t, EXACT_CAP)
    N = factorial(n)
    masks = np.array(forbidden_masks(n, t), dtype=np.uint32)
    union = np.zeros(1 << N, dtype=np.uint32)
    for k in range(N):
        union[1 << k: 1 << (k + 1)] = union[: 1 << k] | masks[k]
    full = np.uint32((1 << N) - 1)
    g_size = np.bitwise_count(full & ~union).astype(np.int64)
    del union
    f_size = np.bitwise_count(np.arange(1 << N, dtype=np.uint32)).astype(np.int64)
    prod = f_size * g_size
    best = int(prod.argmax())
    F = PermFamily.from_ranks(n, _bits(best))
    G = best_response(F, t)
    return SearchResult(n, t, F, G, int(prod[best]), EXACT, 1 << N, factorial(n - t) ** 2)


class _Budget(Exception):
    pass


def _seed_pairs(n, t):
    """Feasible starting pairs: the t-umvirate and, for t >= 2, the antipodal pair."""
    U = umvirate(n, range(1, t + 1), range(1, t + 1))
    pairs = [(U, U)]
    if t >= 2 and n % 2 == 0:
        pairs.append(antipodal_pair(n))
    return pairs


def bb_max_product(n: int, t: int, node_budget: int = 10**7) -> SearchResult:
    """Branch and bound over membership of permutations in F.

    The identity is fixed in F (left translation preserves agreement counts).
    At each node, candidates that cannot shrink G are absorbed into F and
    candidates that would empty G are dropped.  The bound uses the sorted
    per-candidate damage to G: adding k candidates removes at least the k-th
    smallest damage.  Branching takes the candidate with the largest damage,
    include-branch first.
    """
    _check_nt(n, t, BB_CAP)
    N = factorial(n)
    masks = forbidden_masks(n, t)
    full = (1 << N) - 1

    best = {"product": 0, "F": 0}
    for F0, G0 in _seed_pairs(n, t):
        G0 = best_response(F0, t)
        p = len(F0) * len(G0)
        if p > best["product"]:
            best.update(product=p, F=F0.mask)

    nodes = 0
    sys.setrecursionlimit(max(sys.getrecursionlimit(), 4 * N + 100))

    def dfs(Fmask, fsize, G, cand):
        nonlocal nodes
        nodes += 1
        if nodes > node_budget:
            raise _Budget
        gsize = G.bit_count()
        live = []
        for c in cand:
            dmg = (masks[c] & G).bit_count()
            if dmg == 0:
                Fmask |= 1 << c
                fsize += 1
            elif dmg < gsize:
                live.append((dmg, c))
        prod = fsize * gsize
        if prod > best["product"]:
            best.update(product=prod, F=Fmask)
        if not live:
            return
        live.sort()
        bound = prod
        for k, (dmg, _) in enumerate(live, 1):
            bound = max(bound, (fsize + k) * (gsize - dmg))
        if bound <= best["product"]:
            return
        dmg, c = live[-1]
        rest = [x for _, x in live[:-1]]
        dfs(Fmask | (1 << c), fsize + 1, G & ~masks[c], rest)
        dfs(Fmask, fsize, G, rest)

    status = EXACT
    try:
        dfs(1, 1, full & ~masks[0], list(range(1, N)))
    except _Budget:
        status = LOWER
    F = PermFamily.from_ranks(n, _bits(best["F"]))
    G = best_response(F, t)
    return SearchResult(n, t, F, G, len(F) * len(G), status, nodes, factorial(n - t) ** 2)


# -- density bumps and reduction rounds ------------------------------------

def _restricted_count(A: PermFamily, i: int, j: int) -> int:
    if not len(A):
        return 0
    return int((A.array[:, i - 1] == j).sum())


def density_bump_search(A: PermFamily, B: PermFamily, m_thresh: float):
    """Smallest (i, j) with |A_{i->j}| > |A| m/n and |B_{i->j}| > |B| m/n, else None.

    Inputs or outputs fixed by either family's space are skipped.
    """
    if A.n != B.n:
        raise DimensionError("families live on different n")
    if not len(A) or not len(B):
        raise DomainError("density bump search needs nonempty families")
    n = A.n
    m = Fraction(m_thresh)
    fixed_in = set(A.ambient.fixed.inputs) | set(B.ambient.fixed.inputs)
    fixed_out = set(A.ambient.fixed.outputs) | set(B.ambient.fixed.outputs)
    for i in range(1, n + 1):
        if i in fixed_in:
            continue
        for j in range(1, n + 1):
            if j in fixed_out:
                continue
            if (_restricted_count(A, i, j) * n > len(A) * m
                    and _restricted_count(B, i, j) * n > len(B) * m):
                return (i, j)
    return None


def project_common(F: PermFamily, common: RestrictionPattern) -> PermFamily:
    """Drop commonly fixed coordinates and relabel the remaining outputs.

    Every member must extend ``common``; the result lives on S_{n-|common|}
    and keeps agreement counts on the remaining positions.
    """
    if not common:
        return PermFamily(F.n, F.members)
    keep_in = [i for i in range(1, F.n + 1) if i not in common.inputs]
    keep_out = [j for j in range(1, F.n + 1) if j not in common.outputs]
    relabel = {j: k for k, j in enumerate(keep_out, 1)}
    rows = set()
    for m in F.members:
        if not common.matches(m):
            raise DomainError(f"member {m} does not extend the common pattern {common}")
        rows.add(tuple(relabel[m[i - 1]] for i in keep_in))
    return PermFamily(len(keep_in), frozenset(rows))


@dataclass
class ReductionState:
    A: PermFamily
    B: PermFamily
    t_remaining: int
    common: RestrictionPattern = RestrictionPattern()
    history: list = field(default_factory=list)
    densities: list = field(default_factory=list)
    terminated: str | None = None

    def cross_free(self) -> bool:
        """Cross-(t_remaining - 1)-freeness measured off the common coordinates."""
        A = project_common(self.A, self.common)
        B = project_common(self.B, self.common)
        return is_cross_free(A, B, self.t_remaining)


def initial_state(A: PermFamily, B: PermFamily, t: int) -> ReductionState:
    st = ReductionState(A, B, t)
    if len(A) and len(B):
        st.densities.append((float(A.density()), float(B.density())))
    return st


def _prune(F: PermFamily, pattern: RestrictionPattern) -> PermFamily:
    """Members disagreeing with the pattern on every one of its inputs."""
    return F.filter(lambda m: all(m[i - 1] != j for i, j in pattern.pairs))


def _free_size(F: PermFamily) -> int:
    return F.n - F.ambient.k


def reduction_round(state: ReductionState, gamma: float, depth_cap: int = DEFAULT_DEPTH) -> ReductionState:
    """One iteration: global restriction of A, prune B off it, global
    restriction of B, prune A off it, then a common restriction i -> j.

    The common pair maximizes the smaller of the two density ratios over
    inputs and outputs unrestricted on both sides (ties: smallest (i, j)).
    """
    A, B = state.A, state.B
    if not len(A) or not len(B):
        return replace(state, terminated="empty-family", history=list(state.history),
                       densities=list(state.densities))
    if state.t_remaining < 2:
        raise DomainError("a reduction round needs t_remaining >= 2")
    if A.n != B.n:
        raise DimensionError("families live on different n")
    if not state.cross_free():
        raise DomainError("input pair is not cross free at t_remaining")

    history = list(state.history)
    densities = list(state.densities)

    def stop(reason, **log):
        history.append(log)
        return ReductionState(A, B, state.t_remaining, state.common, history, densities, reason)

    S, A1 = global_restriction(A, gamma, depth_cap)
    B1 = _prune(B, S)
    if not len(B1):
        return stop("empty-family", step="prune-B", pattern=str(S))
    S2, B2 = global_restriction(B1, gamma, depth_cap)
    A2 = _prune(A1, S2)
    if not len(A2):
        return stop("empty-family", step="prune-A", pattern=str(S2))

    fixed_in = set(A2.ambient.fixed.inputs) | set(B2.ambient.fixed.inputs)
    fixed_out = set(A2.ambient.fixed.outputs) | set(B2.ambient.fixed.outputs)
    fa, fb = _free_size(A2), _free_size(B2)
    best = None
    for i in range(1, A.n + 1):
        if i in fixed_in:
            continue
        for j in range(1, A.n + 1):
            if j in fixed_out:
                continue
            ra = Fraction(_restricted_count(A2, i, j) * fa, len(A2))
            rb = Fraction(_restricted_count(B2, i, j) * fb, len(B2))
            score = min(ra, rb)
            if best is None or score > best[0]:
                best = (score, i, j)
    if best is None or best[0] == 0:
        return stop("empty-family", step="common", A_pattern=str(S), B_pattern=str(S2))
    _, i, j = best
    step = RestrictionPattern(((i, j),))
    A3, B3 = restrict(A2, step), restrict(B2, step)
    common = state.common.concat(step)
    history.append({"A_pattern": str(S), "B_pattern": str(S2), "common": f"{i}->{j}",
                    "ratio": float(best[0])})
    densities.append((float(A3.density()), float(B3.density())))
    out = ReductionState(A3, B3, state.t_remaining - 1, common, history, densities)
    assert out.cross_free(), "reduction round broke cross-freeness"
    return out
