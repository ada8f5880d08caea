"""Shattering certificates, constructive shattered sets and VC-dimension bounds."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import CapacityError, DomainError
from .hypotheses import (
    Hypothesis,
    PrimeRule,
    ProgressionRule,
    evaluate,
    parse_hypothesis,
    prime_rules,
    to_token,
)
from .primes import PrimeTable, factorize, prime_count, small_primes

__all__ = [
    "Dichotomy",
    "ShatterCertificate",
    "ShatterFailure",
    "PrimeStructureReport",
    "VCBounds",
    "VCSearchResult",
    "floor_log2",
    "ceil_log2",
    "subset_enumeration",
    "construct_shatter_set",
    "construction_certificate",
    "realized_dichotomies",
    "check_shatter",
    "vc_dim_restricted_formula",
    "validate_certificate_prime_structure",
    "progression_vc_bounds",
    "certified_vc_progression",
]

Dichotomy = tuple[int, ...]

DEFAULT_SHATTER_CAP = 20
DEFAULT_MAX_ELL = 8


def floor_log2(m: int) -> int:
    if m < 1:
        raise DomainError(f"log2 undefined for {m}")
    return m.bit_length() - 1


def ceil_log2(m: int) -> int:
    if m < 1:
        raise DomainError(f"log2 undefined for {m}")
    return (m - 1).bit_length()


def _dichotomy_key(b: Dichotomy) -> str:
    return "".join(map(str, b))


@dataclass(frozen=True)
class ShatterCertificate:
    """A shattered set together with one witnessing rule per labeling.

    ``alternatives`` keeps every rule of the searched class that realizes a
    labeling, in class order; ``witnesses`` holds the first of them.
    """

    candidate_set: tuple[int, ...]
    witnesses: dict[Dichotomy, Hypothesis]
    alternatives: dict[Dichotomy, tuple[Hypothesis, ...]] = field(default_factory=dict, repr=False)

    shattered = True

    def __bool__(self) -> bool:
        return True

    def verify(self) -> bool:
        ell = len(self.candidate_set)
        if len(self.witnesses) != 2**ell:
            return False
        return all(
            tuple(evaluate(h, c) for c in self.candidate_set) == b for b, h in self.witnesses.items()
        )

    def to_json(self) -> dict:
        return {
            "shattered": True,
            "candidate_set": [str(c) for c in self.candidate_set],
            "witnesses": {_dichotomy_key(b): to_token(h) for b, h in sorted(self.witnesses.items())},
        }

    @classmethod
    def from_json(cls, obj: dict) -> "ShatterCertificate":
        witnesses = {
            tuple(int(ch) for ch in key): parse_hypothesis(tok) for key, tok in obj["witnesses"].items()
        }
        return cls(tuple(int(c) for c in obj["candidate_set"]), witnesses)


@dataclass(frozen=True)
class ShatterFailure:
    candidate_set: tuple[int, ...]
    missing: Dichotomy
    realized: frozenset

    shattered = False

    def __bool__(self) -> bool:
        return False

    def to_json(self) -> dict:
        return {
            "shattered": False,
            "candidate_set": [str(c) for c in self.candidate_set],
            "missing": _dichotomy_key(self.missing),
            "realized_count": len(self.realized),
        }


def _validate_set(C: Sequence[int]) -> tuple[int, ...]:
    C = tuple(int(c) for c in C)
    if any(c < 2 for c in C):
        raise DomainError("candidate points must be >= 2")
    if len(set(C)) != len(C):
        raise DomainError("candidate points must be distinct")
    return C


def realized_dichotomies(C: Sequence[int], hypotheses: Iterable[Hypothesis]) -> set[Dichotomy]:
    C = _validate_set(C)
    return {tuple(evaluate(h, c) for c in C) for h in hypotheses}


def check_shatter(
    C: Sequence[int], hypotheses: Iterable[Hypothesis], cap: int = DEFAULT_SHATTER_CAP
) -> ShatterCertificate | ShatterFailure:
    """Decide whether the finite class ``hypotheses`` shatters ``C``.

    Returns a re-verified certificate on success; otherwise a failure naming the
    first missing labeling in lexicographic order.
    """
    C = _validate_set(C)
    if len(C) > cap:
        raise CapacityError(f"set of size {len(C)} exceeds shattering cap {cap}")
    found: dict[Dichotomy, list[Hypothesis]] = {}
    for h in hypotheses:
        found.setdefault(tuple(evaluate(h, c) for c in C), []).append(h)
    if len(found) < 2 ** len(C):
        missing = next(b for b in itertools.product((0, 1), repeat=len(C)) if b not in found)
        return ShatterFailure(C, missing, frozenset(found))
    cert = ShatterCertificate(
        C,
        {b: hs[0] for b, hs in sorted(found.items())},
        {b: tuple(hs) for b, hs in sorted(found.items())},
    )
    if not cert.verify():
        raise AssertionError("certificate failed re-verification")
    return cert


def subset_enumeration(ell: int) -> list[frozenset[int]]:
    """Subsets A_1, ..., A_{2^ell} of {1..ell}; A_j holds i when bit i-1 of j-1 is set."""
    return [frozenset(i + 1 for i in range(ell) if (j >> i) & 1) for j in range(2**ell)]


def construct_shatter_set(ell: int, table: PrimeTable, max_ell: int = DEFAULT_MAX_ELL) -> list[int]:
    """Points c_1..c_ell shattered by the prime rules on the first 2^ell primes.

    c_i is the product of the p_j whose subset A_j contains i, a squarefree
    product of 2^(ell-1) primes. For ell = 1 that product is the bare prime p_2,
    which no rule sends to 0, so it is squared instead.
    """
    if ell < 1:
        raise DomainError(f"set size must be >= 1, got {ell}")
    if ell > max_ell:
        raise CapacityError(f"construction capped at ell={max_ell}")
    need = 2**ell
    if need > len(table):
        raise CapacityError(f"need {need} primes, table up to {table.limit} has {len(table)}")
    primes = [int(p) for p in table.primes[:need]]
    subsets = subset_enumeration(ell)
    out = []
    for i in range(1, ell + 1):
        out.append(math.prod(p for p, A in zip(primes, subsets) if i in A))
    if ell == 1:
        out[0] = out[0] ** 2
    return out


def construction_certificate(ell: int, table: PrimeTable) -> ShatterCertificate | ShatterFailure:
    C = construct_shatter_set(ell, table)
    return check_shatter(C, prime_rules(table)[: 2**ell])


def vc_dim_restricted_formula(n: int, table: PrimeTable) -> int:
    """floor(log2 pi(n)): VC dimension of the prime rules with p <= n."""
    if n < 2:
        raise DomainError(f"n must be >= 2, got {n}")
    return floor_log2(prime_count(table, n))


@dataclass(frozen=True)
class PrimeStructureReport:
    divisible_by_witness_product: bool
    exceeds_zeroing_primes: bool
    distinct_prime_factors: int
    required_prime_factors: int
    details: dict = field(default_factory=dict, compare=False)

    @property
    def enough_prime_factors(self) -> bool:
        return self.distinct_prime_factors >= self.required_prime_factors

    @property
    def passed(self) -> bool:
        return self.divisible_by_witness_product and self.exceeds_zeroing_primes and self.enough_prime_factors

    def to_json(self) -> dict:
        return {
            "divisible_by_witness_product": self.divisible_by_witness_product,
            "exceeds_zeroing_primes": self.exceeds_zeroing_primes,
            "enough_prime_factors": self.enough_prime_factors,
            "distinct_prime_factors": self.distinct_prime_factors,
            "required_prime_factors": self.required_prime_factors,
            "passed": self.passed,
        }


def validate_certificate_prime_structure(cert: ShatterCertificate, table: PrimeTable) -> PrimeStructureReport:
    """Check the divisibility structure forced on a set shattered by prime rules.

    Clauses: each c_i is divisible by the product of the 2^(ell-1) distinct
    witness primes that zero it, c_i exceeds each of them, and the product of
    all c_i has at least 2^ell - 1 distinct prime factors.
    """
    C = cert.candidate_set
    ell = len(C)
    if any(not isinstance(h, PrimeRule) for h in cert.witnesses.values()):
        raise DomainError("prime-structure validation needs prime-rule witnesses")
    divisible = True
    exceeds = True
    zeroing: dict[int, list[int]] = {}
    for i, c in enumerate(C):
        ps = sorted({h.p for b, h in cert.witnesses.items() if b[i] == 0})
        zeroing[c] = ps
        if len(ps) != 2 ** (ell - 1) or c % math.prod(ps) != 0:
            divisible = False
        if any(c <= p for p in ps):
            exceeds = False
    factors = set()
    for c in C:
        factors.update(p for p, _ in factorize(c, table))
    return PrimeStructureReport(
        divisible,
        exceeds,
        len(factors),
        2**ell - 1,
        {"zeroing_primes": zeroing, "prime_factors": sorted(factors)},
    )


@dataclass(frozen=True)
class VCBounds:
    lower: int
    upper: int
    eta: int
    lower_clamped: bool

    def to_json(self) -> dict:
        return {"lower": self.lower, "upper": self.upper, "eta": self.eta, "lower_clamped": self.lower_clamped}


def progression_vc_bounds(k: int) -> VCBounds:
    """Formula bounds on the VC dimension of the progression classes.

    upper = ceil(log2(k-1)) + 1 and lower = floor(log2 pi(eta)) with
    eta = floor(log2(k) / 2); lower is clamped to 0 when pi(eta) = 0.
    """
    if k < 2:
        raise DomainError(f"k must be >= 2, got {k}")
    upper = ceil_log2(k - 1) + 1
    eta = floor_log2(k) // 2
    pi_eta = len(small_primes(eta))
    if pi_eta == 0:
        return VCBounds(0, upper, eta, True)
    return VCBounds(floor_log2(pi_eta), upper, eta, False)


@dataclass(frozen=True)
class VCSearchResult:
    k: int
    domain_bound: int
    prime_only: bool
    lower: int
    upper: int
    status: str  # "certified", "exhausted" or "unresolved"
    certificate: ShatterCertificate | None
    checked_sets: int

    @property
    def dimension(self) -> int | None:
        return self.lower if self.lower == self.upper else None

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "domain_bound": self.domain_bound,
            "prime_only": self.prime_only,
            "dimension": self.dimension,
            "lower": self.lower,
            "upper": self.upper,
            "status": self.status,
            "checked_sets": self.checked_sets,
            "certificate": None if self.certificate is None else self.certificate.to_json(),
        }


def _class_divisors(x: int, k: int, pool: set[int]) -> int:
    return sum(1 for a in range(2, k + 1) if x % a == 0 and x // a in pool)


def certified_vc_progression(
    k: int,
    domain_bound: int,
    table: PrimeTable,
    prime_only: bool = False,
    budget: int = 1_000_000,
) -> VCSearchResult:
    """VC dimension of h_{d,k} (d prime when ``prime_only``) restricted to [2, domain_bound].

    The upper bound comes from the factor-count condition 2^(ell-1) <= k-1. Sets
    are searched by size; a shattered set needs an all-zero witness d, so it
    lies inside {2d, ..., kd}, and each member needs 2^(ell-1) class divisors.
    This makes the search exhaustive within the domain bound: when no set of
    size ell is shattered the dimension there is ell - 1 (status "exhausted").
    """
    M = domain_bound
    if k < 2:
        raise DomainError(f"k must be >= 2, got {k}")
    if M < 2 * k:
        raise DomainError(f"domain bound {M} must be >= 2k = {2 * k}")
    if M > table.limit:
        raise CapacityError(f"domain bound {M} exceeds sieve limit {table.limit}")
    half = M // 2
    if prime_only:
        pool_list = [int(p) for p in table.primes if p <= half]
        above = table.primes[table.primes > half]
        if len(above) == 0:
            raise CapacityError(f"no prime above {half} in the table")
        idle = int(above[0])
    else:
        pool_list = list(range(2, half + 1))
        idle = half + 1
    pool = set(pool_list)
    # rules with d > M/2 never fire on [2, M]; one of them stands in for all
    hyps = [ProgressionRule(d, k) for d in pool_list] + [ProgressionRule(idle, k)]

    lemma_upper = floor_log2(k - 1) + 1
    lower, cert, checked = 0, None, 0
    for ell in range(1, lemma_upper + 1):
        need = 2 ** (ell - 1)
        hit = None
        seen: set[tuple[int, ...]] = set()
        for d in pool_list:
            members = [a * d for a in range(2, k + 1) if a * d <= M]
            members = [x for x in members if _class_divisors(x, k, pool) >= need]
            for C in itertools.combinations(members, ell):
                if C in seen:
                    continue
                seen.add(C)
                checked += 1
                if checked > budget:
                    return VCSearchResult(k, M, prime_only, lower, lemma_upper, "unresolved", cert, checked)
                res = check_shatter(C, hyps)
                if res:
                    hit = res
                    break
            if hit:
                break
        if hit is None:
            return VCSearchResult(k, M, prime_only, lower, ell - 1, "exhausted", cert, checked)
        lower, cert = ell, hit
    return VCSearchResult(k, M, prime_only, lower, lemma_upper, "certified", cert, checked)
