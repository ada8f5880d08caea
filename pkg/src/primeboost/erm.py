"""Weighted empirical risk, coverage D(S, d) and the minimal-maximizer ERM rule.

Weights are kept exact (``Fraction``) when given as rationals and as float64
otherwise. Exact weights make coverage ties, and therefore the chosen divisor,
independent of summation order.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Sequence

import numpy as np

from .errors import DomainError
from .hypotheses import DivisorRule, Hypothesis
from .primes import PrimeTable, small_primes

__all__ = [
    "Sample",
    "make_sample",
    "coverage",
    "weighted_risk",
    "erm_select",
    "erm_fit",
    "ErmResult",
    "adversarial_sample",
    "sample_to_csv",
    "sample_from_csv",
    "FLOAT_TIE_TOL",
]

FLOAT_TIE_TOL = 1e-12


def _as_weights(weights) -> np.ndarray:
    if isinstance(weights, np.ndarray) and weights.dtype.kind == "f":
        return weights.astype(np.float64)
    ws = list(weights)
    if all(isinstance(w, Rational) for w in ws):
        return np.array([Fraction(w) for w in ws] or [], dtype=object)
    return np.asarray(ws, dtype=np.float64)


@dataclass(frozen=True, eq=False)
class Sample:
    """Instances X_i, prime labels r(X_i) and nonnegative weights summing to 1."""

    instances: np.ndarray
    labels: np.ndarray
    weights: np.ndarray
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        inst = np.asarray(self.instances, dtype=np.int64)
        labels = np.asarray(self.labels, dtype=np.int8)
        weights = _as_weights(self.weights)
        object.__setattr__(self, "instances", inst)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "weights", weights)
        if not (len(inst) == len(labels) == len(weights)):
            raise DomainError("instances, labels and weights differ in length")
        if len(inst) == 0:
            raise DomainError("empty sample")
        if inst.min() < 2:
            raise DomainError("instances must be >= 2")
        if np.any(weights < 0):
            raise DomainError("weights must be nonnegative")
        total = weights.sum()
        if self.is_exact:
            if total != 1:
                raise DomainError(f"weights sum to {total}, not 1")
        elif abs(total - 1.0) > 1e-12:
            raise DomainError(f"weights sum to {total!r}, not 1")

    def __len__(self) -> int:
        return len(self.instances)

    @property
    def is_exact(self) -> bool:
        return self.weights.dtype == object

    @property
    def composite_mask(self) -> np.ndarray:
        return self.labels == 0

    def with_weights(self, weights) -> "Sample":
        s = Sample(self.instances, self.labels, weights)
        s._cache.update(self._cache)  # incidence depends on instances only
        return s


def make_sample(instances: Sequence[int], table: PrimeTable, weights=None) -> Sample:
    """Attach prime labels from ``table``; uniform exact weights 1/m by default."""
    inst = np.asarray(instances, dtype=np.int64)
    if len(inst) and (inst.min() < 2 or inst.max() > table.limit):
        raise DomainError(f"instances must lie in [2, {table.limit}]")
    labels = table.is_prime[inst].astype(np.int8)
    if weights is None:
        weights = [Fraction(1, len(inst))] * len(inst)
    return Sample(inst, labels, weights)


def _sum_weights(weights: np.ndarray, mask: np.ndarray):
    if weights.dtype == object:
        return sum(weights[mask].tolist(), Fraction(0))
    return float(weights[mask].sum())


def coverage(S: Sample, d: int, weights=None):
    """Weight of composite instances that are proper multiples of ``d``."""
    if d < 2:
        raise DomainError(f"d must be >= 2, got {d}")
    w = S.weights if weights is None else _as_weights(weights)
    X = S.instances
    return _sum_weights(w, S.composite_mask & (X % d == 0) & (X > d))


def weighted_risk(S: Sample, h: Hypothesis, weights=None):
    """Weighted share of instances where ``h`` disagrees with the prime label."""
    w = S.weights if weights is None else _as_weights(weights)
    pred = np.where(h.zero_mask(S.instances), 0, 1)
    return _sum_weights(w, pred != S.labels)


def _prime_factor_pairs(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(row, prime) pairs listing the distinct prime factors of each value."""
    rows, ps = [], []
    rest = values.copy()
    for p in small_primes(math.isqrt(int(values.max())) if len(values) else 1).tolist():
        hit = np.flatnonzero(rest % p == 0)
        if hit.size == 0:
            continue
        rows.append(hit)
        ps.append(np.full(hit.size, p, dtype=np.int64))
        sub = rest[hit] // p
        while True:
            m = sub % p == 0
            if not m.any():
                break
            sub[m] //= p
        rest[hit] = sub
    big = np.flatnonzero(rest > 1)
    rows.append(big)
    ps.append(rest[big])
    return np.concatenate(rows), np.concatenate(ps)


def _incidence(S: Sample, prime_only: bool):
    """Candidate divisors and the (candidate, composite value) incidence pairs.

    Candidates are the proper divisors d (x/d >= 2) of the composite instances,
    or only their prime factors when ``prime_only``; 2 is always included.
    """
    key = ("incidence", prime_only)
    if key in S._cache:
        return S._cache[key]
    comp_idx = np.flatnonzero(S.composite_mask)
    values, inverse = np.unique(S.instances[comp_idx], return_inverse=True)
    if len(values):
        rows, ps = _prime_factor_pairs(values)
    else:
        rows = ps = np.empty(0, dtype=np.int64)
    if not prime_only:
        factor_lists: list[list[int]] = [[] for _ in values]
        for r, p in zip(rows.tolist(), ps.tolist()):
            factor_lists[r].append(p)
        rlist, dlist = [], []
        for r, (x, fs) in enumerate(zip(values.tolist(), factor_lists)):
            divs = [1]
            for p in fs:
                e, y = 0, x
                while y % p == 0:
                    y //= p
                    e += 1
                divs = [q * p**i for q in divs for i in range(e + 1)]
            for q in divs:
                if q >= 2 and 2 * q <= x:
                    rlist.append(r)
                    dlist.append(q)
        rows = np.asarray(rlist, dtype=np.int64)
        ps = np.asarray(dlist, dtype=np.int64)
    cands, cand_idx = np.unique(np.concatenate([[2], ps]).astype(np.int64), return_inverse=True)
    out = (comp_idx, inverse, values, cands, cand_idx[1:], rows)
    S._cache[key] = out
    return out


@dataclass(frozen=True)
class ErmResult:
    d: int
    coverage: object
    composite_weight: object

    @property
    def risk(self):
        return self.composite_weight - self.coverage


def _is_small_prime(d: int) -> bool:
    return d >= 2 and all(d % p for p in small_primes(math.isqrt(d)).tolist())


def erm_fit(S: Sample, weights=None, prime_only: bool = False) -> ErmResult:
    """Minimal divisor attaining the largest coverage, with its coverage and risk.

    Only proper divisors of composite instances can have positive coverage, so
    the search over all d >= 2 reduces to that finite candidate list (plus 2,
    the answer when every coverage is zero).
    """
    w = S.weights if weights is None else _as_weights(weights)
    if len(w) != len(S):
        raise DomainError("weights and sample differ in length")
    comp_idx, inverse, values, cands, cand_idx, rows = _incidence(S, prime_only)
    wc = w[comp_idx]
    if w.dtype == object:
        den = math.lcm(*(f.denominator for f in wc.tolist())) if len(wc) else 1
        vw = [0] * len(values)
        for i, f in zip(inverse.tolist(), wc.tolist()):
            vw[i] += f.numerator * (den // f.denominator)
        cov = [0] * len(cands)
        for c, r in zip(cand_idx.tolist(), rows.tolist()):
            cov[c] += vw[r]
        best = max(cov)
        j = cov.index(best)
        result = ErmResult(int(cands[j]), Fraction(best, den), Fraction(sum(vw), den))
    else:
        vw = np.bincount(inverse, weights=wc, minlength=len(values))
        cov = np.bincount(cand_idx, weights=vw[rows], minlength=len(cands))
        j = int(np.flatnonzero(cov >= cov.max() - FLOAT_TIE_TOL)[0])
        result = ErmResult(int(cands[j]), float(cov[j]), float(wc.sum()))
    assert _is_small_prime(result.d), f"ERM returned composite divisor {result.d}"
    return result


def erm_select(S: Sample, weights=None, prime_only: bool = False) -> int:
    return erm_fit(S, weights, prime_only).d


def adversarial_sample(m: int, table: PrimeTable, weights=None) -> Sample:
    """Products of consecutive primes p_1 p_2, p_3 p_4, ...: all composite, pairwise coprime."""
    if m < 1:
        raise DomainError(f"m must be >= 1, got {m}")
    table.nth_prime(2 * m)
    ps = table.primes[: 2 * m].tolist()
    inst = [ps[2 * i] * ps[2 * i + 1] for i in range(m)]
    if weights is None:
        weights = [Fraction(1, m)] * m
    return Sample(inst, [0] * m, weights)


def sample_to_csv(S: Sample, fh=None) -> str | None:
    """Write ``instance,label,weight`` rows to ``fh`` (or return the text)."""
    out = io.StringIO() if fh is None else fh
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["instance", "label", "weight"])
    for x, y, w in zip(S.instances.tolist(), S.labels.tolist(), S.weights.tolist()):
        writer.writerow([x, y, str(w) if S.is_exact else repr(float(w))])
    return out.getvalue() if fh is None else None


def sample_from_csv(fh) -> Sample:
    rows = list(csv.DictReader(fh))
    ws = [r["weight"] for r in rows]
    weights = [Fraction(w) for w in ws] if all("/" in w or w.isdigit() for w in ws) else [float(w) for w in ws]
    return Sample([int(r["instance"]) for r in rows], [int(r["label"]) for r in rows], weights)
