"""Permutations, permutation families, restrictions and the named constructions.

Positions and images are one-based throughout: ``images[i - 1]`` is sigma(i).
Families store members as image tuples; the lexicographic rank (factorial
number system) is the canonical index used by bitset and vector code.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from math import comb, factorial
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import CapacityError, DimensionError, DomainError, PatternError

# full S_n is materialized only up to this n (8! = 40320)
ENUM_CAP = 8
MAX_MEMBERS = factorial(ENUM_CAP)


def _check_images(images: Sequence[int]) -> tuple[int, ...]:
    images = tuple(int(x) for x in images)
    n = len(images)
    if n == 0:
        raise DomainError("a permutation needs n >= 1")
    if sorted(images) != list(range(1, n + 1)):
        raise DomainError(f"images {images} are not a bijection on 1..{n}")
    return images


def rank(images: Sequence[int]) -> int:
    """Lexicographic rank of a one-based permutation (Lehmer code)."""
    n = len(images)
    remaining = list(range(1, n + 1))
    r = 0
    for pos, v in enumerate(images):
        k = remaining.index(v)
        r += k * factorial(n - 1 - pos)
        del remaining[k]
    return r


def unrank(n: int, r: int) -> tuple[int, ...]:
    if not 0 <= r < factorial(n):
        raise DomainError(f"rank {r} out of range for n={n}")
    remaining = list(range(1, n + 1))
    out = []
    for pos in range(n):
        f = factorial(n - 1 - pos)
        k, r = divmod(r, f)
        out.append(remaining.pop(k))
    return tuple(out)


@dataclass(frozen=True)
class Permutation:
    images: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "images", _check_images(self.images))

    @property
    def n(self) -> int:
        return len(self.images)

    def __call__(self, i: int) -> int:
        return self.images[i - 1]

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(tuple(range(1, n + 1)))

    @classmethod
    def from_rank(cls, n: int, r: int) -> "Permutation":
        return cls(unrank(n, r))

    def rank(self) -> int:
        return rank(self.images)

    def fixed_points(self) -> int:
        return sum(1 for i, v in enumerate(self.images, 1) if i == v)

    def __str__(self):
        return " ".join(map(str, self.images))


def _images_of(x) -> tuple[int, ...]:
    if isinstance(x, Permutation):
        return x.images
    return tuple(int(v) for v in x)


@lru_cache(maxsize=None)
def all_perms(n: int) -> np.ndarray:
    """All of S_n as an (n!, n) int8 array of one-based images, in lex order."""
    if n < 1:
        raise DomainError("n must be positive")
    if n > ENUM_CAP:
        raise CapacityError(f"materializing S_{n} exceeds the enumeration cap n <= {ENUM_CAP}")
    arr = np.array(list(itertools.permutations(range(1, n + 1))), dtype=np.int8)
    arr.setflags(write=False)
    return arr


@lru_cache(maxsize=None)
def _rank_index(n: int) -> dict[tuple[int, ...], int]:
    return {tuple(int(v) for v in row): r for r, row in enumerate(all_perms(n))}


def rank_of(images: Sequence[int]) -> int:
    n = len(images)
    if n <= ENUM_CAP:
        return _rank_index(n)[tuple(images)]
    return rank(images)


@dataclass(frozen=True)
class RestrictionPattern:
    """A partial injection i -> j, kept sorted by input."""

    pairs: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        pairs = tuple(sorted((int(i), int(j)) for i, j in self.pairs))
        ins = [i for i, _ in pairs]
        outs = [j for _, j in pairs]
        if len(set(ins)) != len(ins):
            raise PatternError(f"repeated input in pattern {pairs}")
        if len(set(outs)) != len(outs):
            raise PatternError(f"repeated output in pattern {pairs}")
        object.__setattr__(self, "pairs", pairs)

    @classmethod
    def of(cls, inputs: Iterable[int], outputs: Iterable[int]) -> "RestrictionPattern":
        inputs, outputs = tuple(inputs), tuple(outputs)
        if len(inputs) != len(outputs):
            raise PatternError("inputs and outputs differ in length")
        return cls(tuple(zip(inputs, outputs)))

    @property
    def inputs(self) -> tuple[int, ...]:
        return tuple(i for i, _ in self.pairs)

    @property
    def outputs(self) -> tuple[int, ...]:
        return tuple(j for _, j in self.pairs)

    def __len__(self):
        return len(self.pairs)

    def __bool__(self):
        return bool(self.pairs)

    def sort_key(self):
        """Tie-break order: (size, inputs, outputs)."""
        return (len(self.pairs), self.inputs, self.outputs)

    def check(self, n: int) -> None:
        for i, j in self.pairs:
            if not (1 <= i <= n and 1 <= j <= n):
                raise PatternError(f"pair {i}->{j} outside [1, {n}]")

    def concat(self, other: "RestrictionPattern") -> "RestrictionPattern":
        merged = dict(self.pairs)
        for i, j in other.pairs:
            if merged.get(i, j) != j:
                raise PatternError(f"input {i} already sent to {merged[i]}, cannot send to {j}")
            merged[i] = j
        return RestrictionPattern(tuple(merged.items()))

    def matches(self, images: Sequence[int]) -> bool:
        return all(images[i - 1] == j for i, j in self.pairs)

    def __str__(self):
        if not self.pairs:
            return "-"
        return ",".join(f"{i}->{j}" for i, j in self.pairs)

    @classmethod
    def parse(cls, text: str) -> "RestrictionPattern":
        text = text.strip()
        if text in ("", "-"):
            return cls()
        pairs = []
        for part in text.split(","):
            i, j = part.split("->")
            pairs.append((int(i), int(j)))
        return cls(tuple(pairs))


@dataclass(frozen=True)
class SubSpace:
    n: int
    fixed: RestrictionPattern = RestrictionPattern()

    def __post_init__(self):
        self.fixed.check(self.n)

    @property
    def k(self) -> int:
        return len(self.fixed)

    @property
    def size(self) -> int:
        return factorial(self.n - self.k)

    @property
    def free_inputs(self) -> tuple[int, ...]:
        used = set(self.fixed.inputs)
        return tuple(i for i in range(1, self.n + 1) if i not in used)

    @property
    def free_outputs(self) -> tuple[int, ...]:
        used = set(self.fixed.outputs)
        return tuple(j for j in range(1, self.n + 1) if j not in used)

    def contains(self, images: Sequence[int]) -> bool:
        return self.fixed.matches(images)

    def non_intersecting(self, other: "SubSpace") -> bool:
        """True if some input is sent to different outputs by the two spaces."""
        mine = dict(self.fixed.pairs)
        return any(i in mine and mine[i] != j for i, j in other.fixed.pairs)


@dataclass(frozen=True)
class PermFamily:
    """A finite set of permutations of [n], optionally tagged with the
    sub-permutation space it is considered inside of."""

    n: int
    members: frozenset = field(default_factory=frozenset)
    space: SubSpace | None = None

    def __post_init__(self):
        if self.n < 1:
            raise DomainError("n must be positive")
        members = frozenset(_images_of(m) for m in self.members)
        for m in members:
            if len(m) != self.n:
                raise DimensionError(f"member {m} does not have n={self.n}")
        if len(members) > MAX_MEMBERS and self.n > ENUM_CAP:
            raise CapacityError("family too large to materialize")
        object.__setattr__(self, "members", members)
        if self.space is not None:
            if self.space.n != self.n:
                raise DimensionError("space and family disagree on n")
            for m in members:
                if not self.space.contains(m):
                    raise PatternError(f"member {m} lies outside its space")

    @classmethod
    def from_images(cls, n: int, rows: Iterable[Sequence[int]], space: SubSpace | None = None):
        rows = [_check_images(r) for r in rows]
        return cls(n, frozenset(rows), space)

    @classmethod
    def full(cls, n: int) -> "PermFamily":
        return cls(n, frozenset(map(tuple, all_perms(n).tolist())))

    @classmethod
    def empty(cls, n: int, space: SubSpace | None = None) -> "PermFamily":
        return cls(n, frozenset(), space)

    @classmethod
    def from_ranks(cls, n: int, ranks: Iterable[int]) -> "PermFamily":
        table = all_perms(n)
        return cls(n, frozenset(tuple(int(v) for v in table[r]) for r in ranks))

    def __len__(self):
        return len(self.members)

    def __iter__(self) -> Iterator[tuple[int, ...]]:
        return iter(self.sorted_members)

    def __contains__(self, item):
        return _images_of(item) in self.members

    @cached_property
    def sorted_members(self) -> tuple[tuple[int, ...], ...]:
        return tuple(sorted(self.members))

    @cached_property
    def array(self) -> np.ndarray:
        """Members as an (m, n) int array, lexicographically sorted."""
        if not self.members:
            return np.zeros((0, self.n), dtype=np.int16)
        arr = np.array(self.sorted_members, dtype=np.int16)
        arr.setflags(write=False)
        return arr

    @cached_property
    def ranks(self) -> frozenset:
        return frozenset(rank_of(m) for m in self.members)

    @cached_property
    def mask(self) -> int:
        """Bitset over lexicographic ranks."""
        out = 0
        for r in self.ranks:
            out |= 1 << r
        return out

    @property
    def ambient(self) -> SubSpace:
        return self.space if self.space is not None else SubSpace(self.n)

    @property
    def ambient_size(self) -> int:
        return self.ambient.size

    def density(self) -> Fraction:
        """Uniform measure of the family inside its ambient space."""
        return Fraction(len(self), self.ambient_size)

    def with_space(self, space: SubSpace | None) -> "PermFamily":
        return PermFamily(self.n, self.members, space)

    def filter(self, keep) -> "PermFamily":
        return PermFamily(self.n, frozenset(m for m in self.members if keep(m)), self.space)


def _check_same_n(a: int, b: int):
    if a != b:
        raise DimensionError(f"n mismatch: {a} vs {b}")


def intersection_size(a, b) -> int:
    """Number of positions where two permutations agree."""
    a, b = _images_of(a), _images_of(b)
    _check_same_n(len(a), len(b))
    return sum(1 for x, y in zip(a, b) if x == y)


def agreement_matrix(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Pairwise agreement counts between rows of two image arrays."""
    if X.shape[1] != Y.shape[1]:
        raise DimensionError(f"n mismatch: {X.shape[1]} vs {Y.shape[1]}")
    out = np.zeros((X.shape[0], Y.shape[0]), dtype=np.int16)
    for pos in range(X.shape[1]):
        out += X[:, pos, None] == Y[None, :, pos]
    return out


def find_cross_violation(F: PermFamily, G: PermFamily, t: int):
    """A pair (sigma, tau) agreeing on exactly t-1 positions, or None."""
    _check_same_n(F.n, G.n)
    if not 1 <= t <= F.n:
        raise DomainError(f"t={t} outside [1, {F.n}]")
    if not len(F) or not len(G):
        return None
    X, Y = F.array, G.array
    step = max(1, 2_000_000 // max(1, Y.shape[0]))
    for lo in range(0, X.shape[0], step):
        agree = agreement_matrix(X[lo:lo + step], Y)
        hits = np.argwhere(agree == t - 1)
        if hits.size:
            a, b = hits[0]
            return F.sorted_members[lo + a], G.sorted_members[b]
    return None


def is_cross_free(F: PermFamily, G: PermFamily, t: int) -> bool:
    """True iff no sigma in F and tau in G agree on exactly t-1 positions."""
    return find_cross_violation(F, G, t) is None


def umvirate(n: int, inputs: Sequence[int], outputs: Sequence[int]) -> PermFamily:
    """All permutations with sigma(inputs[l]) = outputs[l] for every l."""
    pattern = RestrictionPattern.of(inputs, outputs)
    pattern.check(n)
    free_in = [i for i in range(1, n + 1) if i not in pattern.inputs]
    free_out = [j for j in range(1, n + 1) if j not in pattern.outputs]
    if factorial(len(free_in)) > MAX_MEMBERS:
        raise CapacityError(f"umvirate of size {len(free_in)}! exceeds the member cap")
    members = set()
    base = [0] * n
    for i, j in pattern.pairs:
        base[i - 1] = j
    for perm in itertools.permutations(free_out):
        row = base[:]
        for i, j in zip(free_in, perm):
            row[i - 1] = j
        members.add(tuple(row))
    return PermFamily(n, frozenset(members))


def restrict(F: PermFamily, pattern: RestrictionPattern) -> PermFamily:
    """Members of F extending the pattern, tagged with the induced space."""
    pattern.check(F.n)
    combined = F.ambient.fixed.concat(pattern)
    space = SubSpace(F.n, combined)
    return PermFamily(F.n, frozenset(m for m in F.members if pattern.matches(m)), space)


def antipodal_pair(n: int) -> tuple[PermFamily, PermFamily]:
    """Block-preserving F and block-swapping G; every cross pair agrees nowhere."""
    if n < 2 or n % 2:
        raise DomainError(f"antipodal pair needs even n >= 2, got {n}")
    h = n // 2
    if factorial(h) ** 2 > MAX_MEMBERS:
        raise CapacityError(f"antipodal family of size ({h}!)^2 exceeds the member cap")
    low, high = range(1, h + 1), range(h + 1, n + 1)
    F, G = set(), set()
    for a in itertools.permutations(low):
        for b in itertools.permutations(high):
            F.add(a + b)
            G.add(b + a)
    return PermFamily(n, frozenset(F)), PermFamily(n, frozenset(G))


@lru_cache(maxsize=None)
def derangements(k: int) -> int:
    """D_k via D_k = (k-1)(D_{k-1} + D_{k-2})."""
    if k < 0:
        raise DomainError("k must be nonnegative")
    if k == 0:
        return 1
    if k == 1:
        return 0
    a, b = 1, 0
    for m in range(2, k + 1):
        a, b = b, (m - 1) * (a + b)
    return b


def count_with_fixed_points(n: int, j: int) -> int:
    """Number of sigma in S_n with exactly j fixed points."""
    if n < 0 or not 0 <= j <= n:
        raise DomainError(f"need 0 <= j <= n, got n={n}, j={j}")
    return comb(n, j) * derangements(n - j)


def fixed_point_histogram(n: int) -> list[int]:
    """Enumerated counts of permutations by number of fixed points."""
    perms = all_perms(n)
    fp = (perms == np.arange(1, n + 1, dtype=np.int8)).sum(axis=1)
    return np.bincount(fp, minlength=n + 1).tolist()


def unseparated_family(n: int) -> PermFamily:
    """Permutations mapping every pair {2k-1, 2k} onto some pair {2l-1, 2l}."""
    if n % 2:
        raise DomainError("n must be even")
    perms = all_perms(n)
    blocks = (perms - 1) // 2
    keep = np.all(blocks[:, 0::2] == blocks[:, 1::2], axis=1)
    return PermFamily.from_ranks(n, np.flatnonzero(keep).tolist())


def involution_family(n: int) -> PermFamily:
    """Fixed-point-free involutions: products of n/2 disjoint transpositions."""
    if n % 2:
        raise DomainError("n must be even")
    perms = all_perms(n).astype(np.int64)
    ident = np.arange(1, n + 1)
    squared = np.take_along_axis(perms, perms - 1, axis=1)
    keep = np.all(squared == ident, axis=1) & np.all(perms != ident, axis=1)
    return PermFamily.from_ranks(n, np.flatnonzero(keep).tolist())


def perturbed_umvirate(n: int, t: int) -> tuple[PermFamily, PermFamily, tuple[int, ...]]:
    """The near-extremal pair off the t-umvirate fixing [t].

    F gains one permutation sigma' that moves every point of [t]; G loses
    everything agreeing with sigma' on exactly t-1 positions.
    """
    if not 1 <= t < n:
        raise DomainError(f"need 1 <= t < n, got n={n}, t={t}")
    base = umvirate(n, range(1, t + 1), range(1, t + 1))
    if t == 1:
        extra = (2, 1) + tuple(range(3, n + 1))
    else:
        extra = tuple(range(2, t + 1)) + (1,) + tuple(range(t + 1, n + 1))
    F = PermFamily(n, base.members | {extra})
    G = base.filter(lambda tau: intersection_size(tau, extra) != t - 1)
    return F, G, extra
