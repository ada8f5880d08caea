"""Divisibility rules h_p, h_d, h_{d,k}, the prime labeling r and exact risk on {2,...,n}.

Every rule outputs 0 on a set of proper multiples of its divisor and 1
elsewhere, so none of them ever labels a prime as composite.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Union

import numpy as np

from .errors import DomainError, OutOfRangeError
from .primes import PrimeTable, prime_count

__all__ = [
    "PrimeRule",
    "DivisorRule",
    "ProgressionRule",
    "Hypothesis",
    "Label",
    "evaluate",
    "prime_label",
    "zero_count",
    "exact_generalization_error",
    "prime_rule",
    "prime_rules",
    "divisor_rules",
    "progression_rules",
    "to_token",
    "parse_hypothesis",
]


class _Rule:
    d: int

    def __call__(self, x: int) -> int:
        return evaluate(self, x)

    def zero_mask(self, xs: np.ndarray) -> np.ndarray:
        """Boolean mask of the points in ``xs`` that the rule sends to 0."""
        xs = np.asarray(xs)
        return (xs % self.d == 0) & (xs > self.d)

    def predict_pm(self, xs: np.ndarray) -> np.ndarray:
        """Outputs in +-1 form (0 becomes -1)."""
        return np.where(self.zero_mask(xs), -1, 1).astype(np.int8)


@dataclass(frozen=True)
class PrimeRule(_Rule):
    p: int

    def __post_init__(self):
        if self.p < 2:
            raise DomainError(f"prime rule needs p >= 2, got {self.p}")

    @property
    def d(self) -> int:
        return self.p


@dataclass(frozen=True)
class DivisorRule(_Rule):
    d: int

    def __post_init__(self):
        if self.d < 2:
            raise DomainError(f"divisor rule needs d >= 2, got {self.d}")


@dataclass(frozen=True)
class ProgressionRule(_Rule):
    d: int
    k: int

    def __post_init__(self):
        if self.d < 2 or self.k < 2:
            raise DomainError(f"progression rule needs d, k >= 2, got d={self.d}, k={self.k}")

    def zero_mask(self, xs: np.ndarray) -> np.ndarray:
        xs = np.asarray(xs)
        return (xs % self.d == 0) & (xs >= 2 * self.d) & (xs <= self.k * self.d)


Hypothesis = Union[PrimeRule, DivisorRule, ProgressionRule]


@dataclass(frozen=True)
class Label:
    value: int

    @property
    def pm_value(self) -> int:
        return 2 * self.value - 1

    def __int__(self) -> int:
        return self.value


def evaluate(h: Hypothesis, x: int) -> int:
    """Value of ``h`` at ``x``; ``x`` may be an arbitrary-precision int."""
    x = int(x)
    if x < 2:
        raise DomainError(f"instances start at 2, got {x}")
    d = h.d
    if x % d:
        return 1
    if isinstance(h, ProgressionRule):
        return 0 if 2 <= x // d <= h.k else 1
    return 0 if x > d else 1


def prime_label(x: int, table: PrimeTable) -> Label:
    if x < 2 or x > table.limit:
        raise OutOfRangeError(f"{x} outside labeled range [2, {table.limit}]")
    return Label(int(table.is_prime[x]))


def zero_count(h: Hypothesis, n: int) -> int:
    """How many x in [2, n] the rule sends to 0."""
    multiples = n // h.d
    if isinstance(h, ProgressionRule):
        multiples = min(h.k, multiples)
    return max(multiples - 1, 0)


def exact_generalization_error(h: Hypothesis, n: int, table: PrimeTable) -> Fraction:
    """P(h(X) != r(X)) for X uniform on {2, ..., n}, as an exact fraction.

    The zero set of every rule consists of composites, so the disagreements are
    exactly the composites the rule leaves at 1.
    """
    if n < 2:
        raise DomainError(f"domain bound must be >= 2, got {n}")
    composites = (n - 1) - prime_count(table, n)
    return Fraction(composites - zero_count(h, n), n - 1)


def prime_rule(p: int, table: PrimeTable) -> PrimeRule:
    """A PrimeRule whose divisor is checked against the table."""
    if p not in table:
        raise DomainError(f"{p} is not prime")
    return PrimeRule(int(p))


def prime_rules(table: PrimeTable, max_prime: int | None = None) -> list[PrimeRule]:
    primes = table.primes if max_prime is None else table.primes[table.primes <= max_prime]
    return [PrimeRule(int(p)) for p in primes]


def divisor_rules(max_d: int, min_d: int = 2) -> list[DivisorRule]:
    return [DivisorRule(d) for d in range(min_d, max_d + 1)]


def progression_rules(k: int, divisors: Iterable[int]) -> list[ProgressionRule]:
    return [ProgressionRule(int(d), k) for d in divisors]


def to_token(h: Hypothesis) -> str:
    if isinstance(h, PrimeRule):
        return f"p:{h.p}"
    if isinstance(h, ProgressionRule):
        return f"dk:{h.d}:{h.k}"
    return f"d:{h.d}"


def parse_hypothesis(token: str) -> Hypothesis:
    kind, _, rest = token.strip().partition(":")
    try:
        if kind == "p":
            return PrimeRule(int(rest))
        if kind == "d":
            return DivisorRule(int(rest))
        if kind == "dk":
            d, k = rest.split(":")
            return ProgressionRule(int(d), int(k))
    except ValueError as exc:
        raise DomainError(f"malformed hypothesis token {token!r}") from exc
    raise DomainError(f"unknown hypothesis token {token!r}")
