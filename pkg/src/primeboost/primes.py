"""Sieve of Eratosthenes, prime counting and factorization by sieved primes."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import CapacityError, DomainError, OutOfRangeError

__all__ = [
    "PrimeTable",
    "build_prime_table",
    "prime_count",
    "even_count",
    "factorize",
    "divisors",
    "small_primes",
]


def _sieve(limit: int) -> np.ndarray:
    is_prime = np.ones(limit + 1, dtype=bool)
    is_prime[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if is_prime[p]:
            is_prime[p * p :: p] = False
    return is_prime


@dataclass(frozen=True, eq=False)
class PrimeTable:
    """Primality flags, ordered primes and the cumulative count pi(x) up to ``limit``.

    All arrays are marked read-only, so a table can be shared freely between
    threads or shipped to worker processes.
    """

    limit: int
    is_prime: np.ndarray
    primes: np.ndarray
    pi_cumulative: np.ndarray

    def __len__(self) -> int:
        return len(self.primes)

    def __contains__(self, x: int) -> bool:
        if x < 0 or x > self.limit:
            raise OutOfRangeError(f"{x} outside sieve range [0, {self.limit}]")
        return bool(self.is_prime[x])

    def nth_prime(self, k: int) -> int:
        """The k-th prime, 1-based (``nth_prime(1) == 2``)."""
        if k < 1:
            raise DomainError("prime index is 1-based")
        if k > len(self.primes):
            raise CapacityError(f"table up to {self.limit} holds only {len(self.primes)} primes, need {k}")
        return int(self.primes[k - 1])


def build_prime_table(limit: int) -> PrimeTable:
    if limit < 2:
        raise DomainError(f"sieve limit must be >= 2, got {limit}")
    is_prime = _sieve(int(limit))
    primes = np.flatnonzero(is_prime).astype(np.int64)
    pi = np.cumsum(is_prime, dtype=np.int64)
    for arr in (is_prime, primes, pi):
        arr.setflags(write=False)
    return PrimeTable(limit=int(limit), is_prime=is_prime, primes=primes, pi_cumulative=pi)


@lru_cache(maxsize=32)
def small_primes(bound: int) -> np.ndarray:
    """All primes <= bound (cached; meant for small auxiliary bounds)."""
    if bound < 2:
        return np.empty(0, dtype=np.int64)
    arr = np.flatnonzero(_sieve(bound)).astype(np.int64)
    arr.setflags(write=False)
    return arr


def prime_count(table: PrimeTable, x: int) -> int:
    if x < 0:
        raise DomainError(f"pi(x) queried at negative x={x}")
    if x > table.limit:
        raise OutOfRangeError(f"pi({x}) requested but the sieve stops at {table.limit}")
    return int(table.pi_cumulative[x])


def even_count(n: int) -> int:
    """Number of even integers in [2, n]."""
    if n < 2:
        raise DomainError(f"even_count needs n >= 2, got {n}")
    return n // 2


def factorize(x: int, table: PrimeTable) -> list[tuple[int, int]]:
    """Prime factorization of ``x`` by trial division with the table's primes.

    Works for arbitrary-precision ``x`` as long as every prime factor but the
    largest is covered by the table (always true when ``x <= limit**2``).
    """
    x = int(x)
    if x < 2:
        raise DomainError(f"factorize needs x >= 2, got {x}")
    factors: list[tuple[int, int]] = []
    rest = x
    for p in table.primes.tolist():
        if p * p > rest:
            break
        if rest % p == 0:
            e = 0
            while rest % p == 0:
                rest //= p
                e += 1
            factors.append((p, e))
    else:
        if rest > 1 and table.limit * table.limit < rest:
            raise CapacityError(
                f"cannot finish factoring {x}: cofactor {rest} may have prime factors above {table.limit}"
            )
    if rest > 1:
        factors.append((rest, 1))
    return factors


def divisors(x: int, table: PrimeTable) -> list[int]:
    """All positive divisors of ``x`` in increasing order."""
    divs = [1]
    for p, e in factorize(x, table):
        divs = [d * p**i for d in divs for i in range(e + 1)]
    return sorted(divs)
