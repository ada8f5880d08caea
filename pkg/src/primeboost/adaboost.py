"""AdaBoost with divisibility rules as the base class."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .erm import Sample, erm_fit
from .hypotheses import DivisorRule, Hypothesis, PrimeRule

__all__ = [
    "BoostRound",
    "BoostTrace",
    "EPS_FLOOR",
    "weak_learn",
    "weight_from_error",
    "update_distribution",
    "run_adaboost",
    "strong_classify",
    "strong_predict",
]

EPS_FLOOR = 1e-12


@dataclass(frozen=True)
class BoostRound:
    t: int
    d: int
    eps: float
    W: float
    clamped: bool = False

    @property
    def hypothesis(self) -> Hypothesis:
        return PrimeRule(self.d)


@dataclass(frozen=True)
class BoostTrace:
    rounds: tuple[BoostRound, ...]
    status: str  # "completed", "stopped_perfect" or "stopped_degenerate"
    distributions: tuple[np.ndarray, ...] = field(default=(), repr=False, compare=False)


def _check_dist(dist) -> np.ndarray:
    dist = np.asarray(dist, dtype=np.float64)
    if np.any(dist < 0) or abs(dist.sum() - 1.0) > 1e-10:
        raise ValueError("distribution must be nonnegative and sum to 1")
    return dist


def weak_learn(S: Sample, dist, prime_only: bool = True) -> tuple[int, float]:
    """Best rule under ``dist`` (minimal divisor on ties) and its weighted error."""
    dist = _check_dist(dist)
    if len(dist) != len(S):
        raise ValueError("sample and distribution differ in length")
    res = erm_fit(S, dist, prime_only=prime_only)
    return res.d, max(res.risk, 0.0)


def weight_from_error(eps: float, eps_floor: float = EPS_FLOOR) -> float:
    """W = 1/2 ln(1/eps - 1), natural log, eps clamped to [floor, 1 - floor]."""
    e = min(max(float(eps), eps_floor), 1.0 - eps_floor)
    return 0.5 * math.log(1.0 / e - 1.0)


def update_distribution(dist, W: float, h: Hypothesis, S: Sample) -> np.ndarray:
    """Multiply D_i by exp(-W r_i h_i) with +-1 labels and predictions, then renormalize."""
    dist = _check_dist(dist)
    r = 2 * S.labels.astype(np.int64) - 1
    agree = r * h.predict_pm(S.instances)
    new = dist * np.exp(-W * agree)
    return new / new.sum()


def run_adaboost(
    S: Sample, T: int, prime_only: bool = True, eps_floor: float = EPS_FLOOR
) -> BoostTrace:
    """T rounds of weak_learn -> weight_from_error -> update_distribution.

    A round with zero error stops the loop (status ``stopped_perfect``), as does
    a round whose error is clamped at the top (``stopped_degenerate``). Errors
    above 1/2 keep their negative weight.
    """
    if T < 1:
        raise ValueError(f"need at least one round, got T={T}")
    m = len(S)
    dist = np.full(m, 1.0 / m)
    rounds, dists = [], [dist]
    status = "completed"
    for t in range(1, T + 1):
        d, eps = weak_learn(S, dist, prime_only)
        clamped = not (eps_floor <= eps <= 1.0 - eps_floor)
        W = weight_from_error(eps, eps_floor)
        rounds.append(BoostRound(t, d, eps, W, clamped))
        if eps == 0.0:
            status = "stopped_perfect"
            break
        if eps > 1.0 - eps_floor:
            status = "stopped_degenerate"
            break
        dist = update_distribution(dist, W, DivisorRule(d), S)
        dists.append(dist)
    return BoostTrace(tuple(rounds), status, tuple(dists))


def strong_predict(trace: BoostTrace, xs: np.ndarray) -> np.ndarray:
    """sign(sum_t W_t h_t(x)) in +-1 form with sign(0) = +1, vectorized over ``xs``."""
    if not trace.rounds:
        raise ValueError("trace has no rounds")
    xs = np.asarray(xs)
    score = np.zeros(xs.shape, dtype=np.float64)
    for rnd in trace.rounds:
        score += rnd.W * DivisorRule(rnd.d).predict_pm(xs)
    return np.where(score < 0, -1, 1).astype(np.int8)


def strong_classify(trace: BoostTrace, x: int) -> int:
    if not trace.rounds:
        raise ValueError("trace has no rounds")
    score = sum(r.W * (2 * DivisorRule(r.d)(x) - 1) for r in trace.rounds)
    return -1 if score < 0 else 1
