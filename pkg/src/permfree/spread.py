"""Cube embedding of permutation families, spreadness, and Monte Carlo
coverage / disjoint-split experiments.

Randomness comes from numpy's counter-based Philox generator.  Samples are
grouped in fixed blocks of ``BLOCK`` consecutive indices; block b draws from
``Philox(key=seed, counter=[0, 0, 0, b])``.  Hit counts are sums over blocks,
so the result does not depend on how blocks are spread over workers.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import DimensionError, DomainError
from .perm_core import PermFamily

BLOCK = 1024
SPREAD_DEPTH_CAP = 4


@dataclass(frozen=True)
class CubeFamily:
    ground_size: int
    sets: tuple  # tuple of frozensets over 1..ground_size

    def __post_init__(self):
        sets = tuple(frozenset(int(x) for x in s) for s in self.sets)
        for s in sets:
            if s and (min(s) < 1 or max(s) > self.ground_size):
                raise DomainError(f"set {sorted(s)} leaves the ground set 1..{self.ground_size}")
        object.__setattr__(self, "sets", sets)

    def __len__(self):
        return len(self.sets)

    def matrix(self) -> np.ndarray:
        """Members as a boolean (|sets|, N) incidence matrix."""
        M = np.zeros((len(self.sets), self.ground_size), dtype=bool)
        for r, s in enumerate(self.sets):
            M[r, [x - 1 for x in s]] = True
        return M

    def mean_size(self) -> float:
        """|mu_0| = sum |S| mu_0(S) under the uniform weight."""
        return sum(len(s) for s in self.sets) / len(self.sets)


def embed(F: PermFamily) -> CubeFamily:
    """sigma -> {(i-1) n + sigma(i)} inside {1..n^2}."""
    if not len(F):
        raise DomainError("cannot embed an empty family")
    n = F.n
    sets = tuple(frozenset((i - 1) * n + v for i, v in enumerate(m, 1)) for m in F)
    return CubeFamily(n * n, sets)


@dataclass(frozen=True)
class SpreadReport:
    r: float
    witness_X: tuple
    depth_cap: int
    witness_fraction: Fraction


def spreadness(C: CubeFamily, depth_cap: int = 3) -> SpreadReport:
    """min over probed X of (fraction of members containing X)^(-1/|X|).

    Only |X| <= depth_cap is probed, so r is exact for that depth and an
    upper estimate of the full spreadness otherwise.
    """
    if not len(C):
        raise DomainError("spreadness of an empty family is undefined")
    if not 1 <= depth_cap <= SPREAD_DEPTH_CAP:
        raise DomainError(f"depth_cap must lie in [1, {SPREAD_DEPTH_CAP}]")
    total = len(C)
    best = None  # (X, fraction)
    for d in range(1, depth_cap + 1):
        counts: dict = {}
        for s in C.sets:
            for X in itertools.combinations(sorted(s), d):
                counts[X] = counts.get(X, 0) + 1
        for X in sorted(counts):
            frac = Fraction(counts[X], total)
            # larger frac^(1/|X|) means smaller r
            if best is None or frac ** len(best[0]) > best[1] ** d:
                best = (X, frac)
    X, frac = best
    r = float(frac) ** (-1 / len(X))
    return SpreadReport(r, X, depth_cap, frac)


def theorem_bound(r: float, m: int, delta: float, mean_size: float):
    """1 - (5 / log2(r delta))^m |mu_0|, or None when r delta <= 1."""
    if r * delta <= 1:
        return None
    return 1 - (5 / math.log2(r * delta)) ** m * mean_size


@dataclass(frozen=True)
class CoverageEstimate:
    m: int
    delta: float
    samples: int
    hits: int
    seed: int
    r: float
    mean_size: float
    theorem_bound: float | None
    vacuous: bool

    @property
    def estimate(self) -> float:
        return self.hits / self.samples

    @property
    def std_error(self) -> float:
        p = self.estimate
        return math.sqrt(p * (1 - p) / self.samples)

    def as_dict(self) -> dict:
        return {
            "m": self.m, "delta": self.delta, "samples": self.samples, "hits": self.hits,
            "estimate": self.estimate, "std_error": self.std_error, "theorem_bound": self.theorem_bound,
            "vacuous": self.vacuous, "r": self.r, "mean_size": self.mean_size, "seed": self.seed,
        }


def block_generator(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed, counter=[0, 0, 0, block]))


def _block_hits(M: np.ndarray, p: float, seed: int, block: int, count: int) -> int:
    rng = block_generator(seed, block)
    W = rng.random((count, M.shape[1])) < p
    missing = (~W).astype(np.int32) @ M.T.astype(np.int32)
    return int(np.any(missing == 0, axis=1).sum())


def _blocks(samples: int):
    for b in range(-(-samples // BLOCK)):
        yield b, min(BLOCK, samples - b * BLOCK)


def coverage_mc(C: CubeFamily, m: int, delta: float, samples: int, seed: int = 0,
                workers: int = 1, spread: SpreadReport | None = None) -> CoverageEstimate:
    """Fraction of (m delta)-random subsets W containing some member."""
    p = m * delta
    if not 0 < p <= 1:
        raise DomainError(f"m * delta must lie in (0, 1], got {p}")
    if samples < 1:
        raise DomainError("samples must be positive")
    if spread is None:
        depth = min(SPREAD_DEPTH_CAP, max(len(s) for s in C.sets))
        spread = spreadness(C, max(depth, 1))
    M = C.matrix()
    jobs = list(_blocks(samples))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            hits = sum(pool.map(lambda job: _block_hits(M, p, seed, *job), jobs))
    else:
        hits = sum(_block_hits(M, p, seed, b, c) for b, c in jobs)
    bound = theorem_bound(spread.r, m, delta, C.mean_size())
    return CoverageEstimate(m, delta, samples, hits, seed, spread.r, C.mean_size(),
                            bound, bound is None or bound <= 0)


def _check_ground(A: CubeFamily, B: CubeFamily):
    if A.ground_size != B.ground_size:
        raise DimensionError(f"ground sizes differ: {A.ground_size} vs {B.ground_size}")


def find_disjoint_pair(A: CubeFamily, B: CubeFamily):
    """(a, b) with a, b disjoint, or None if the families cross-intersect."""
    _check_ground(A, B)
    if not len(A) or not len(B):
        return None
    inter = A.matrix().astype(np.int32) @ B.matrix().T.astype(np.int32)
    hits = np.argwhere(inter == 0)
    if hits.size:
        a, b = hits[0]
        return A.sets[a], B.sets[b]
    return None


def cross_one_check(A: CubeFamily, B: CubeFamily) -> bool:
    """True iff every member of A meets every member of B."""
    return find_disjoint_pair(A, B) is None


@dataclass
class SplitReport:
    trials: int
    seed: int
    a_inside: int = 0
    b_outside: int = 0
    both: int = 0
    witness: tuple | None = field(default=None)

    def frequencies(self) -> dict:
        return {
            "a_in_S": self.a_inside / self.trials,
            "b_in_complement": self.b_outside / self.trials,
            "both": self.both / self.trials,
        }


def disjoint_split_experiment(A: CubeFamily, B: CubeFamily, trials: int, seed: int = 0) -> SplitReport:
    """Sample 1/2-random S; count members of A inside S and of B inside S^c.

    A trial where both happen yields a disjoint (a, b) pair, which is
    recorded as the witness (first such trial).
    """
    _check_ground(A, B)
    MA = A.matrix().astype(np.int32)
    MB = B.matrix().astype(np.int32)
    rep = SplitReport(trials, seed)
    for b, count in _blocks(trials):
        S = block_generator(seed, b).random((count, A.ground_size)) < 0.5
        a_ok = ((~S).astype(np.int32) @ MA.T) == 0
        b_ok = (S.astype(np.int32) @ MB.T) == 0
        ea, eb = a_ok.any(axis=1), b_ok.any(axis=1)
        rep.a_inside += int(ea.sum())
        rep.b_outside += int(eb.sum())
        both = ea & eb
        rep.both += int(both.sum())
        if rep.witness is None and both.any():
            row = int(np.flatnonzero(both)[0])
            a_idx = int(np.flatnonzero(a_ok[row])[0])
            b_idx = int(np.flatnonzero(b_ok[row])[0])
            subset = frozenset(int(x) + 1 for x in np.flatnonzero(S[row]))
            rep.witness = (A.sets[a_idx], B.sets[b_idx], subset)
    return rep
