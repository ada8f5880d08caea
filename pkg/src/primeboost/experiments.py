"""Seeded Monte Carlo harness for the ERM and AdaBoost weight-convergence experiments.

Each (n, trial) pair draws its sample from its own PCG64 substream, spawned
from the run seed with key (n, trial), so results do not depend on worker
count or scheduling order.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .adaboost import run_adaboost, strong_predict
from .erm import Sample, erm_fit, make_sample
from .errors import DomainError, OutOfRangeError
from .hypotheses import DivisorRule, exact_generalization_error
from .primes import PrimeTable, build_prime_table, even_count, prime_count

__all__ = [
    "ExperimentConfig",
    "DEFAULT_CONFIG",
    "RoundRecord",
    "TrialRecord",
    "CSV_COLUMNS",
    "trial_rng",
    "sample_uniform",
    "mu_n",
    "hoeffding_bound",
    "h2_deviation_bound",
    "analytic_first_weight",
    "run_erm_convergence",
    "run_weight_convergence",
    "run_experiments",
    "summarize",
    "write_csv",
    "read_csv",
    "records_to_json",
]

CLASSES = ("primes", "divisors")


@dataclass(frozen=True)
class ExperimentConfig:
    n_grid: tuple[int, ...]
    m_rule: tuple[float, int]
    trials: int
    rounds: int
    seed: int = 0
    hypothesis_class: str = "primes"

    def __post_init__(self):
        object.__setattr__(self, "n_grid", tuple(int(n) for n in self.n_grid))
        c, q = self.m_rule
        object.__setattr__(self, "m_rule", (float(c), int(q)))
        if not self.n_grid or any(n < 4 for n in self.n_grid):
            raise DomainError("every n in the grid must be >= 4")
        if list(self.n_grid) != sorted(set(self.n_grid)):
            raise DomainError("n_grid must be strictly ascending")
        if self.m_rule[1] not in (2, 3) or self.m_rule[0] <= 0:
            raise DomainError("m_rule needs c > 0 and exponent q in {2, 3}")
        if self.trials < 1 or self.rounds < 1:
            raise DomainError("trials and rounds must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise DomainError("seed must be a 64-bit unsigned integer")
        if self.hypothesis_class not in CLASSES:
            raise DomainError(f"class must be one of {CLASSES}")

    def m_for(self, n: int) -> int:
        """m_n = ceil(c (ln n)^q)."""
        c, q = self.m_rule
        return math.ceil(c * math.log(n) ** q)

    @property
    def prime_only(self) -> bool:
        return self.hypothesis_class == "primes"

    def to_json(self) -> dict:
        return {
            "n_grid": list(self.n_grid),
            "m_rule": list(self.m_rule),
            "trials": self.trials,
            "rounds": self.rounds,
            "seed": self.seed,
            "class": self.hypothesis_class,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "ExperimentConfig":
        required = ("n_grid", "m_rule", "trials", "rounds", "class")
        missing = [k for k in required if k not in obj]
        if missing:
            raise DomainError(f"config is missing fields: {', '.join(missing)}")
        unknown = set(obj) - set(required) - {"seed"}
        if unknown:
            raise DomainError(f"unknown config fields: {', '.join(sorted(unknown))}")
        return cls(
            n_grid=obj["n_grid"],
            m_rule=tuple(obj["m_rule"]),
            trials=int(obj["trials"]),
            rounds=int(obj["rounds"]),
            seed=int(obj.get("seed", 0)),
            hypothesis_class=obj["class"],
        )

    @classmethod
    def load(cls, path: str | os.PathLike) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.from_json(json.load(fh))


DEFAULT_CONFIG = ExperimentConfig(
    n_grid=(10**2, 10**3, 10**4, 10**5, 10**6), m_rule=(1.0, 3), trials=100, rounds=5, seed=0
)


@dataclass(frozen=True)
class RoundRecord:
    t: int
    d_t: int
    eps_t: float
    W_t: float


@dataclass(frozen=True)
class TrialRecord:
    experiment: str  # "erm" or "boost"
    n: int
    m: int
    trial: int
    d_S: int
    L_gen: Fraction
    rounds: tuple[RoundRecord, ...] = ()
    acc_strong: float | None = None
    acc_baseline: float | None = None
    status: str = "completed"

    @property
    def dS_ne_2(self) -> bool:
        return self.d_S != 2

    @property
    def L_gen_float(self) -> float:
        return float(self.L_gen)


def trial_rng(seed: int, n: int, trial: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(n, trial))))


def sample_uniform(n: int, m: int, rng: np.random.Generator, table: PrimeTable) -> Sample:
    """m i.i.d. uniform draws from {2, ..., n} with weights 1/m and prime labels."""
    if n > table.limit:
        raise OutOfRangeError(f"n={n} exceeds sieve limit {table.limit}")
    if n < 2 or m < 1:
        raise DomainError(f"need n >= 2 and m >= 1, got n={n}, m={m}")
    xs = rng.integers(0, n - 1, size=m, dtype=np.int64) + 2
    return make_sample(xs, table)


def mu_n(n: int, table: PrimeTable) -> Fraction:
    """Mean step of the even-composite (+1) / prime (0) / odd-composite (-1) walk."""
    return Fraction(2 * (even_count(n) - 1) + prime_count(table, n), n - 1) - 1


def hoeffding_bound(n: int, m: int, table: PrimeTable) -> float:
    """exp(-m mu_n^2 / 2), an upper bound on P(d_S != 2); 1 when mu_n <= 0."""
    mu = mu_n(n, table)
    if mu <= 0:
        return 1.0
    return math.exp(-m * float(mu) ** 2 / 2)


def h2_deviation_bound(n: int, table: PrimeTable) -> Fraction:
    """(3/2 + pi(n)) / (n - 1), the bound on |L(h_2) - 1/2|."""
    return Fraction(3 + 2 * prime_count(table, n), 2 * (n - 1))


def analytic_first_weight(n: int, table: PrimeTable) -> float:
    """|W| that the round-1 rule h_2 gets when its error equals L_{D_n}(h_2)."""
    L = float(exact_generalization_error(DivisorRule(2), n, table))
    return 0.5 * abs(math.log(L / (1 - L)))


def _erm_trial(config: ExperimentConfig, n: int, trial: int, table: PrimeTable) -> TrialRecord:
    m = config.m_for(n)
    S = sample_uniform(n, m, trial_rng(config.seed, n, trial), table)
    d = erm_fit(S, prime_only=config.prime_only).d
    L = exact_generalization_error(DivisorRule(d), n, table)
    return TrialRecord("erm", n, m, trial, d, L)


def _boost_trial(config: ExperimentConfig, n: int, trial: int, table: PrimeTable, domain) -> TrialRecord:
    m = config.m_for(n)
    S = sample_uniform(n, m, trial_rng(config.seed, n, trial), table)
    trace = run_adaboost(S, config.rounds, prime_only=config.prime_only)
    d = trace.rounds[0].d
    L = exact_generalization_error(DivisorRule(d), n, table)
    xs, r_pm = domain
    acc = int(np.count_nonzero(strong_predict(trace, xs) == r_pm)) / (n - 1)
    base = float(1 - exact_generalization_error(DivisorRule(2), n, table))
    rounds = tuple(RoundRecord(r.t, r.d, float(r.eps), float(r.W)) for r in trace.rounds)
    return TrialRecord("boost", n, m, trial, d, L, rounds, acc, base, trace.status)


def _run_block(config: ExperimentConfig, experiment: str, n: int, trials: Sequence[int], table: PrimeTable):
    if experiment == "erm":
        return [_erm_trial(config, n, i, table) for i in trials]
    xs = np.arange(2, n + 1, dtype=np.int64)
    r_pm = np.where(table.is_prime[2 : n + 1], 1, -1).astype(np.int8)
    return [_boost_trial(config, n, i, table, (xs, r_pm)) for i in trials]


_WORKER_TABLE: PrimeTable | None = None


def _init_worker(limit: int) -> None:
    global _WORKER_TABLE
    _WORKER_TABLE = build_prime_table(limit)


def _worker_block(args):
    config, experiment, n, trials = args
    return _run_block(config, experiment, n, trials, _WORKER_TABLE)


def run_experiments(
    config: ExperimentConfig,
    table: PrimeTable | None = None,
    workers: int = 1,
    experiments: Iterable[str] = ("erm", "boost"),
) -> list[TrialRecord]:
    """Run the requested experiments over the grid; records sorted by (experiment, n, trial)."""
    experiments = tuple(experiments)
    for e in experiments:
        if e not in ("erm", "boost"):
            raise DomainError(f"unknown experiment {e!r}")
    limit = max(config.n_grid)
    if table is None:
        table = build_prime_table(limit)
    elif table.limit < limit:
        raise OutOfRangeError(f"grid reaches n={limit} but the sieve stops at {table.limit}")
    trials = list(range(config.trials))
    records: list[TrialRecord] = []
    if workers <= 1:
        for e in experiments:
            for n in config.n_grid:
                records.extend(_run_block(config, e, n, trials, table))
    else:
        chunk = max(1, math.ceil(config.trials / workers))
        jobs = [
            (config, e, n, trials[i : i + chunk])
            for e in experiments
            for n in config.n_grid
            for i in range(0, len(trials), chunk)
        ]
        with ProcessPoolExecutor(workers, initializer=_init_worker, initargs=(table.limit,)) as pool:
            for block in pool.map(_worker_block, jobs):
                records.extend(block)
    order = {"erm": 0, "boost": 1}
    records.sort(key=lambda r: (order[r.experiment], r.n, r.trial))
    return records


def run_erm_convergence(config: ExperimentConfig, table: PrimeTable | None = None, workers: int = 1):
    return run_experiments(config, table, workers, ("erm",))


def run_weight_convergence(config: ExperimentConfig, table: PrimeTable | None = None, workers: int = 1):
    return run_experiments(config, table, workers, ("boost",))


def summarize(records: Sequence[TrialRecord], table: PrimeTable) -> list[dict]:
    """Per-(experiment, n) aggregates next to the matching theoretical quantities."""
    groups: dict[tuple[str, int], list[TrialRecord]] = {}
    for r in records:
        groups.setdefault((r.experiment, r.n), []).append(r)
    out = []
    for (exp, n), rs in groups.items():
        Ls = [r.L_gen_float for r in rs]
        row = {
            "experiment": exp,
            "n": n,
            "m": rs[0].m,
            "trials": len(rs),
            "mean_L": statistics.fmean(Ls),
            "median_L": statistics.median(Ls),
            "freq_dS_ne_2": sum(r.dS_ne_2 for r in rs) / len(rs),
            "hoeffding_bound": hoeffding_bound(n, rs[0].m, table),
        }
        if exp == "boost":
            row["median_abs_W1"] = statistics.median(abs(r.rounds[0].W_t) for r in rs)
            row["analytic_abs_W1"] = analytic_first_weight(n, table)
            row["median_max_abs_W"] = statistics.median(max(abs(x.W_t) for x in r.rounds) for r in rs)
            row["max_acc_gap"] = max(abs(r.acc_strong - r.acc_baseline) for r in rs)
        out.append(row)
    return out


CSV_COLUMNS = [
    "experiment", "n", "m", "trial", "t", "d_t", "eps_t", "W_t", "d_S",
    "L_gen_num", "L_gen_den", "L_gen_float", "dS_ne_2", "acc_strong", "acc_baseline", "status",
]


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _rows(records: Iterable[TrialRecord]):
    for r in records:
        common = {
            "experiment": r.experiment,
            "n": r.n,
            "m": r.m,
            "trial": r.trial,
            "d_S": r.d_S,
            "L_gen_num": r.L_gen.numerator,
            "L_gen_den": r.L_gen.denominator,
            "L_gen_float": r.L_gen_float,
            "dS_ne_2": int(r.dS_ne_2),
            "acc_strong": r.acc_strong,
            "acc_baseline": r.acc_baseline,
            "status": r.status,
        }
        if not r.rounds:
            yield {**common, "t": None, "d_t": None, "eps_t": None, "W_t": None}
        for rnd in r.rounds:
            yield {**common, "t": rnd.t, "d_t": rnd.d_t, "eps_t": rnd.eps_t, "W_t": rnd.W_t}


def write_csv(records: Iterable[TrialRecord], destination) -> None:
    """Emit records in the fixed column schema, one row per round for boosting trials.

    ``destination`` is a path or an open text file.
    """
    def emit(fh):
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in _rows(records):
            writer.writerow([_fmt(row[c]) for c in CSV_COLUMNS])

    if hasattr(destination, "write"):
        emit(destination)
        return
    try:
        with open(destination, "w", newline="") as fh:
            emit(fh)
    except OSError as exc:
        raise OSError(f"cannot write CSV to {destination}: {exc.strerror or exc}") from exc


def read_csv(source) -> list[TrialRecord]:
    """Inverse of ``write_csv``."""
    if hasattr(source, "read"):
        text = source.read()
    else:
        with open(source, newline="") as fh:
            text = fh.read()
    opt_float = lambda s: float(s) if s else None  # noqa: E731
    records: list[TrialRecord] = []
    current: dict | None = None
    for row in csv.DictReader(io.StringIO(text)):
        key = (row["experiment"], int(row["n"]), int(row["trial"]))
        if current is None or current["key"] != key:
            current = {
                "key": key,
                "fields": dict(
                    experiment=row["experiment"],
                    n=int(row["n"]),
                    m=int(row["m"]),
                    trial=int(row["trial"]),
                    d_S=int(row["d_S"]),
                    L_gen=Fraction(int(row["L_gen_num"]), int(row["L_gen_den"])),
                    acc_strong=opt_float(row["acc_strong"]),
                    acc_baseline=opt_float(row["acc_baseline"]),
                    status=row["status"],
                ),
                "rounds": [],
            }
            records.append(current)
        if row["t"]:
            current["rounds"].append(
                RoundRecord(int(row["t"]), int(row["d_t"]), float(row["eps_t"]), float(row["W_t"]))
            )
    return [TrialRecord(**c["fields"], rounds=tuple(c["rounds"])) for c in records]


def records_to_json(records: Iterable[TrialRecord]) -> list[dict]:
    out = []
    for r in records:
        d = asdict(r)
        d["L_gen"] = f"{r.L_gen.numerator}/{r.L_gen.denominator}"
        d["L_gen_float"] = r.L_gen_float
        d["dS_ne_2"] = r.dS_ne_2
        out.append(d)
    return out
