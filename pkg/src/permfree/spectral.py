"""Degree decomposition of real functions on S_n, the level-1 formula,
and globalness of families.

V_{<=d} is the span of the indicators of all umvirates with at most d fixed
coordinates.  Two permutations lie together in exactly C(a, k) umvirates of
size k, where a is their agreement count, so the Gram matrix of the indicator
rows is sum_{k<=d} C(a, k).  Its eigenvectors with non-negligible eigenvalue
span V_{<=d}; projections onto the nested spaces are differenced to get the
components f^{=d}.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy.special import comb as _comb

from .errors import CapacityError, DomainError, NumericError, PermfreeError
from .perm_core import (
    PermFamily,
    RestrictionPattern,
    SubSpace,
    agreement_matrix,
    all_perms,
    restrict,
)

DECOMPOSE_CAP = 7
DEPTH_CAP = 4
DEFAULT_DEPTH = 3
# eigenvalues below this fraction of the largest are treated as zero
RANK_TOL = 1e-10


class UndefinedGlobalnessError(PermfreeError, ValueError):
    pass


@dataclass(frozen=True)
class SnFunction:
    """Real values on S_m indexed by lexicographic rank.

    When ``space`` is set the domain is that sub-permutation space of S_n,
    identified with S_m (m = n - k) by relabelling free inputs and free
    outputs in increasing order.
    """

    n: int
    values: np.ndarray
    space: SubSpace | None = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (math.factorial(self.m),):
            raise DomainError(f"expected {math.factorial(self.m)} values, got {values.shape}")
        object.__setattr__(self, "values", values)

    @property
    def m(self) -> int:
        return self.n - (self.space.k if self.space is not None else 0)

    @classmethod
    def indicator(cls, A: PermFamily) -> "SnFunction":
        space = A.ambient
        m = space.n - space.k
        if m > DECOMPOSE_CAP + 1:
            raise CapacityError(f"indicator on S_{m} is too large")
        values = np.zeros(math.factorial(m))
        if len(A):
            local = to_local(A.array, space)
            values[ranks_of_rows(local)] = 1.0
        return cls(A.n, values, A.space)

    def mean(self) -> float:
        return float(self.values.mean())

    def norm2(self) -> float:
        return float(np.mean(self.values ** 2))


def to_local(rows: np.ndarray, space: SubSpace) -> np.ndarray:
    """Relabel member rows of a sub-permutation space onto S_m (one-based)."""
    ins = np.array(space.free_inputs, dtype=int) - 1
    outs = np.array(space.free_outputs, dtype=int)
    relabel = np.zeros(space.n + 1, dtype=int)
    relabel[outs] = np.arange(1, len(outs) + 1)
    return relabel[np.asarray(rows, dtype=int)[:, ins]]


def ranks_of_rows(rows: np.ndarray) -> np.ndarray:
    """Vectorized lexicographic ranks of one-based permutation rows."""
    rows = np.asarray(rows, dtype=np.int64)
    m = rows.shape[1]
    out = np.zeros(rows.shape[0], dtype=np.int64)
    for pos in range(m):
        smaller_later = (rows[:, pos + 1:] < rows[:, pos, None]).sum(axis=1)
        out += smaller_later * math.factorial(m - 1 - pos)
    return out


@lru_cache(maxsize=None)
def _agreements(m: int) -> np.ndarray:
    P = all_perms(m)
    return agreement_matrix(P, P)


@lru_cache(maxsize=None)
def _level_basis(m: int, d: int) -> np.ndarray:
    """Orthonormal basis (columns) of V_{<=d} on S_m."""
    size = math.factorial(m)
    if d >= m - 1:
        return np.eye(size)
    agree = _agreements(m)
    gram = np.zeros((size, size))
    for k in range(d + 1):
        gram += _comb(agree, k)
    evals, evecs = np.linalg.eigh(gram)
    keep = evals > RANK_TOL * evals.max()
    basis = evecs[:, keep]
    basis.setflags(write=False)
    return basis


def _project(m: int, d: int, values: np.ndarray) -> np.ndarray:
    if d < 0:
        return np.zeros_like(values)
    Q = _level_basis(m, d)
    return Q @ (Q.T @ values)


@dataclass(frozen=True)
class LevelDecomposition:
    components: list
    weights: list

    @property
    def total(self) -> float:
        return float(sum(self.weights))


def decompose(f: SnFunction) -> LevelDecomposition:
    m = f.m
    if m > DECOMPOSE_CAP:
        raise CapacityError(f"decomposition on S_{m} exceeds the cap m <= {DECOMPOSE_CAP}")
    if not np.all(np.isfinite(f.values)):
        raise NumericError("function has non-finite values")
    if m == 1:
        comps = [f.values.copy()]
    else:
        comps = []
        prev = np.zeros_like(f.values)
        for d in range(m):
            cur = _project(m, d, f.values) if d < m - 1 else f.values
            comps.append(cur - prev)
            prev = cur
    components = [SnFunction(f.n, c, f.space) for c in comps]
    weights = [float(np.mean(c ** 2)) for c in comps]
    return LevelDecomposition(components, weights)


def restriction_means(f: SnFunction) -> np.ndarray:
    """Matrix of E[f_{i->j}] over local coordinates (i, j) of S_m."""
    m = f.m
    P = all_perms(m)
    out = np.zeros((m, m))
    for i in range(m):
        for j in range(m):
            out[i, j] = f.values[P[:, i] == j + 1].mean()
    return out


@dataclass(frozen=True)
class LevelOneCoefficients:
    a: np.ndarray

    def evaluate(self) -> np.ndarray:
        """sum_ij a_ij x_{i->j} on every permutation of S_m, in rank order."""
        m = self.a.shape[0]
        P = all_perms(m).astype(int) - 1
        return self.a[np.arange(m), P].sum(axis=1)

    def weight(self) -> float:
        m = self.a.shape[0]
        return float((self.a ** 2).sum() / (m - 1))


def level_one_coeffs(f: SnFunction) -> LevelOneCoefficients:
    m = f.m
    if m < 2:
        raise DomainError("level-1 coefficients need n >= 2")
    means = restriction_means(f)
    return LevelOneCoefficients((1 - 1 / m) * (means - f.mean()))


def restriction_variance(f: SnFunction) -> float:
    """Variance over uniform (i, j) of E[f_{i->j}] - E[f]."""
    if f.m < 2:
        raise DomainError("restriction variance needs n >= 2")
    X = restriction_means(f) - f.mean()
    return float(np.mean(X ** 2))


# -- restriction scans ------------------------------------------------------

def restriction_counts(A: PermFamily, depth: int) -> dict:
    """|A_p| for every pattern p of exactly `depth` free coordinates with
    nonzero count.  Patterns are expressed in the original coordinates."""
    space = A.ambient
    free_in = space.free_inputs
    counts = {}
    if not len(A):
        return counts
    arr = A.array
    for I in itertools.combinations(free_in, depth):
        cols = arr[:, [i - 1 for i in I]]
        keys, cnt = np.unique(cols, axis=0, return_counts=True)
        for key, c in zip(keys.tolist(), cnt.tolist()):
            counts[RestrictionPattern(tuple(zip(I, key)))] = c
    return counts


def _free_size(A: PermFamily) -> int:
    return A.n - A.ambient.k


def restricted_density(A: PermFamily, count: int, depth: int) -> Fraction:
    return Fraction(count, math.factorial(_free_size(A) - depth))


@dataclass(frozen=True)
class GlobalnessReport:
    depth_cap: int
    gamma_density: float
    gamma_l2: float
    witness: RestrictionPattern
    witness_ratio: Fraction

    def rows(self):
        return [
            ("gamma_density", self.gamma_density, str(self.witness)),
            ("gamma_l2", self.gamma_l2, str(self.witness)),
        ]


def _root_greater(x: Fraction, dx: int, y: Fraction, dy: int) -> bool:
    """x^(1/dx) > y^(1/dy), exactly."""
    return x ** dy > y ** dx


def globalness(A, depth_cap: int = DEFAULT_DEPTH) -> GlobalnessReport:
    """Largest per-coordinate density gain over restrictions of size 1..depth_cap."""
    if isinstance(A, SnFunction):
        A = family_from_indicator(A)
    if not len(A):
        raise UndefinedGlobalnessError("globalness of an empty family is undefined")
    free = _free_size(A)
    depth_cap = min(depth_cap, free)
    if not 1 <= depth_cap <= DEPTH_CAP:
        raise DomainError(f"depth_cap must lie in [1, {DEPTH_CAP}]")
    base = A.density()
    best = None
    for d in range(1, depth_cap + 1):
        for p, c in sorted(restriction_counts(A, d).items(), key=lambda kv: kv[0].sort_key()):
            ratio = restricted_density(A, c, d) / base
            if best is None or _root_greater(ratio, d, best[1], len(best[0])):
                best = (p, ratio)
    p, ratio = best
    gamma = float(ratio) ** (1 / len(p))
    return GlobalnessReport(depth_cap, gamma, math.sqrt(gamma), p, ratio)


def family_from_indicator(f: SnFunction) -> PermFamily:
    vals = f.values
    if not np.all((vals == 0) | (vals == 1)):
        raise DomainError("globalness of a function needs a 0/1 indicator")
    space = f.space if f.space is not None else SubSpace(f.n)
    local = all_perms(f.m)[vals == 1].astype(int)
    ins = np.array(space.free_inputs) - 1
    outs = np.array(space.free_outputs)
    rows = np.zeros((local.shape[0], f.n), dtype=int)
    for i, j in space.fixed.pairs:
        rows[:, i - 1] = j
    rows[:, ins] = outs[local - 1]
    return PermFamily(f.n, frozenset(map(tuple, rows.tolist())), f.space)


def global_restriction(A: PermFamily, gamma: float, depth_cap: int = DEFAULT_DEPTH):
    """Restriction maximizing density(A_p) / gamma^|p| (empty pattern allowed).

    Returns (pattern, restricted family).  The choice always satisfies
    density(A_p) >= gamma^|p| * density(A).
    """
    if not len(A):
        raise UndefinedGlobalnessError("cannot restrict an empty family")
    g = Fraction(gamma)
    if g <= 0:
        raise DomainError("gamma must be positive")
    free = _free_size(A)
    depth_cap = min(depth_cap, free)
    base = A.density()
    best_p, best_val = RestrictionPattern(), base
    for d in range(1, depth_cap + 1):
        scale = g ** d
        for p, c in restriction_counts(A, d).items():
            val = restricted_density(A, c, d) / scale
            if val > best_val or (val == best_val and p.sort_key() < best_p.sort_key()):
                best_p, best_val = p, val
    out = restrict(A, best_p) if best_p else A
    gained = out.density()
    assert gained >= g ** len(best_p) * base, "density guarantee violated"
    return best_p, out


def level_d_audit(A: PermFamily, d: int, gamma: float) -> float:
    """Implied constant weights[d] / (mu^2 (gamma^4 log(1/mu) / d)^d)."""
    mu = float(A.density())
    if not 0 < mu < 1:
        raise DomainError("level-d audit needs 0 < mu(A) < 1 (log domain)")
    if not 1 <= d <= DEPTH_CAP:
        raise DomainError(f"d must lie in [1, {DEPTH_CAP}]")
    dec = decompose(SnFunction.indicator(A))
    if d >= len(dec.weights):
        raise DomainError(f"d={d} exceeds the decomposition range")
    w = dec.weights[d]
    if w < 1e-14:
        return 0.0
    return w / (mu ** 2 * (gamma ** 4 * math.log(1 / mu) / d) ** d)
