"""Exact evaluation of the closed-form quantities: the induction bound,
tightness constructions, stability thresholds and agreement counts.

Everything is an int or a Fraction; log2 columns are computed only for display.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, factorial

import numpy as np

from .errors import CapacityError, DomainError
from .perm_core import ENUM_CAP, all_perms, count_with_fixed_points


def log2_exact(x) -> float:
    """log2 of a positive int or Fraction without float overflow."""
    if isinstance(x, Fraction):
        return log2_exact(x.numerator) - log2_exact(x.denominator)
    if x <= 0:
        raise DomainError("log2 of a non-positive value")
    shift = max(0, x.bit_length() - 64)
    return math.log2(x >> shift) + shift


def main_bound(n: int, t: int, m: int) -> int:
    """4^m ((n - m - t)!)^2."""
    if t < 1 or m < 0:
        raise DomainError("need t >= 1 and m >= 0")
    if m > n - t:
        raise DomainError(f"m={m} exceeds n - t = {n - t}")
    return 4 ** m * factorial(n - m - t) ** 2


def _need_even(n):
    if n < 2 or n % 2:
        raise DomainError(f"n must be even and positive, got {n}")


def antipodal_product(n: int) -> int:
    _need_even(n)
    return factorial(n // 2) ** 4


def crossover_t(n: int) -> int:
    """Smallest t <= n with ((n/2)!)^4 > ((n-t)!)^2.

    When no t qualifies (only n = 2) the answer is n.
    """
    target = antipodal_product(n)
    for t in range(1, n + 1):
        if target > factorial(n - t) ** 2:
            return t
    return n


def stability_threshold(n: int, t: int) -> Fraction:
    """(1 - (100 t)^-t) ((n-t)!)^2."""
    if not 1 <= t <= n:
        raise DomainError(f"need 1 <= t <= n, got n={n}, t={t}")
    return (1 - Fraction(1, (100 * t) ** t)) * factorial(n - t) ** 2


def single_family_threshold(n: int, t: int) -> Fraction:
    """(1 - 1/(2 (100 t)^t)) (n-t)!."""
    if not 1 <= t <= n:
        raise DomainError(f"need 1 <= t <= n, got n={n}, t={t}")
    return (1 - Fraction(1, 2 * (100 * t) ** t)) * factorial(n - t)


def unseparated_size(n: int) -> int:
    _need_even(n)
    return factorial(n // 2) * 2 ** (n // 2)


def involution_size(n: int) -> int:
    """(n-1)(n-3)...1."""
    _need_even(n)
    out = 1
    for k in range(n - 1, 0, -2):
        out *= k
    return out


def derangements(k: int) -> int:
    """D_k by inclusion-exclusion: sum_i (-1)^i k!/i!."""
    if k < 0:
        raise DomainError("k must be nonnegative")
    return sum((-1) ** i * (factorial(k) // factorial(i)) for i in range(k + 1))


def fixed_point_probability(n: int, j: int) -> Fraction:
    return Fraction(count_with_fixed_points(n, j), factorial(n))


# -- agreement counts inside an r-umvirate ---------------------------------
#
# Canonical setting: the reference permutation is the identity and the
# umvirate sends i -> r + i for i in [r].  Only positions 2r+1..n can be
# fixed points.

def _check_agreement(n, r, j):
    if n < 0 or r < 0 or j < 0:
        raise DomainError("n, r and j must be nonnegative")
    if 2 * r > n:
        raise DomainError(f"an r-umvirate avoiding the reference needs 2r <= n (n={n}, r={r})")
    if j > n - 2 * r:
        raise DomainError(f"j={j} exceeds the {n - 2 * r} positions that can agree")


def zero_agreement_count(n: int, r: int) -> int:
    """Members of the canonical r-umvirate with no agreement, by inclusion-exclusion
    over forced fixed points among the n - 2r free positions."""
    _check_agreement(n, r, 0)
    k = n - 2 * r
    return sum((-1) ** i * comb(k, i) * factorial(n - r - i) for i in range(k + 1))


def agreement_prob_formula(n: int, r: int, j: int) -> Fraction:
    """f(n, r, j) = C(n-2r, j) f(n-j, r, 0) (n-r-j)! / (n-r)!."""
    _check_agreement(n, r, j)
    base = Fraction(zero_agreement_count(n - j, r), factorial(n - j - r))
    return comb(n - 2 * r, j) * base * factorial(n - r - j) / factorial(n - r)


def agreement_count_exact(n: int, r: int, j: int) -> int:
    """Enumerated count of canonical r-umvirate members agreeing with the
    identity on exactly j positions."""
    if n > ENUM_CAP:
        raise CapacityError(f"n={n} exceeds the enumeration cap {ENUM_CAP}")
    _check_agreement(n, r, j)
    P = all_perms(n)
    inside = np.all(P[:, :r] == np.arange(r + 1, 2 * r + 1, dtype=np.int8), axis=1)
    agree = (P[inside] == np.arange(1, n + 1, dtype=np.int8)).sum(axis=1)
    return int((agree == j).sum())


def lemma_applicable(n: int, r: int, j: int) -> bool:
    """Preconditions of the agreement-count lower bound: n >= 20, r <= n/6, j <= r,
    and n - j - r >= 10 for the zero-agreement base."""
    return n >= 20 and 6 * r <= n and j <= r and n - j - r >= 10


def lemma_lower_bound(j: int) -> Fraction:
    """1 / (4 2^j j!)."""
    return Fraction(1, 4 * 2 ** j * factorial(j))


# -- tables -----------------------------------------------------------------

@dataclass
class BoundRow:
    label: str
    params: dict
    value: object  # int or Fraction
    applicable: bool | None = None

    @property
    def log2(self):
        if isinstance(self.value, (int, Fraction)) and not isinstance(self.value, bool) and self.value > 0:
            return log2_exact(self.value)
        return None

    def value_str(self) -> str:
        return str(self.value)


@dataclass
class BoundTable:
    rows: list = field(default_factory=list)

    def add(self, label, params, value, applicable=None):
        self.rows.append(BoundRow(label, params, value, applicable))
        return self


def main_table(n: int, t: int) -> BoundTable:
    if not 1 <= t <= n:
        raise DomainError(f"need 1 <= t <= n, got n={n}, t={t}")
    tab = BoundTable()
    for m in range(0, n - t + 1):
        tab.add("main_bound", {"n": n, "t": t, "m": m}, main_bound(n, t, m))
    tab.add("stability_threshold", {"n": n, "t": t}, stability_threshold(n, t))
    tab.add("single_family_threshold", {"n": n, "t": t}, single_family_threshold(n, t))
    if t - 1 <= n:
        tab.add("exactly_t_minus_1_fixed_points", {"n": n, "t": t},
                fixed_point_probability(n, t - 1))
    return tab


def tightness_table(n: int) -> BoundTable:
    _need_even(n)
    tab = BoundTable()
    tab.add("antipodal_product", {"n": n}, antipodal_product(n))
    ct = crossover_t(n)
    tab.add("crossover_t", {"n": n}, ct)
    tab.add("crossover_ratio", {"n": n}, ct * math.log2(n) / n)
    tab.add("unseparated_size", {"n": n}, unseparated_size(n))
    tab.add("involution_size", {"n": n}, involution_size(n))
    return tab


def perturbed_table(n: int, t: int) -> BoundTable:
    """Exact sizes of the perturbed umvirate pair against ((n-t)!)^2."""
    from .perm_core import perturbed_umvirate

    F, G, extra = perturbed_umvirate(n, t)
    tab = BoundTable()
    tab.add("perturbed_F", {"n": n, "t": t}, len(F))
    tab.add("perturbed_G", {"n": n, "t": t}, len(G))
    product = len(F) * len(G)
    tab.add("perturbed_product", {"n": n, "t": t}, product)
    tab.add("perturbed_ratio", {"n": n, "t": t}, Fraction(product, factorial(n - t) ** 2))
    tab.add("stability_threshold", {"n": n, "t": t}, stability_threshold(n, t))
    return tab
