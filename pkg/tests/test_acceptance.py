"""Exit criteria. Each test is one criterion; the terminal summary prints PASS/FAIL per test."""

import itertools
import math
import statistics
import time
from fractions import Fraction

import numpy as np
import pytest

from primeboost.cli import main
from primeboost.erm import adversarial_sample, erm_fit, make_sample, weighted_risk
from primeboost.experiments import (
    DEFAULT_CONFIG,
    ExperimentConfig,
    analytic_first_weight,
    h2_deviation_bound,
    hoeffding_bound,
    run_experiments,
    summarize,
)
from primeboost.hypotheses import DivisorRule, PrimeRule, ProgressionRule, prime_rules, progression_rules
from primeboost.primes import build_prime_table, prime_count
from primeboost.shattering import (
    certified_vc_progression,
    check_shatter,
    construct_shatter_set,
    realized_dichotomies,
    validate_certificate_prime_structure,
    vc_dim_restricted_formula,
)

from oracles import is_prime_td


@pytest.fixture(scope="module")
def default_run(big_table):
    assert DEFAULT_CONFIG.n_grid == (10**2, 10**3, 10**4, 10**5, 10**6)
    assert DEFAULT_CONFIG.m_rule == (1.0, 3) and DEFAULT_CONFIG.trials == 100 and DEFAULT_CONFIG.rounds == 5
    records = run_experiments(DEFAULT_CONFIG, big_table)
    erm = [r for r in records if r.experiment == "erm"]
    boost = [r for r in records if r.experiment == "boost"]
    return erm, boost


def test_criterion_01_six_ten_worked_example():
    t0 = time.perf_counter()
    cert = check_shatter([6, 10], [PrimeRule(p) for p in (2, 3, 5, 7)])
    assert cert.shattered
    assert cert.witnesses == {
        (0, 0): PrimeRule(2),
        (0, 1): PrimeRule(3),
        (1, 0): PrimeRule(5),
        (1, 1): PrimeRule(7),
    }
    assert time.perf_counter() - t0 < 1


def test_criterion_02_twelve_eighteen_worked_example():
    t0 = time.perf_counter()
    cert = check_shatter([12, 18], progression_rules(3, range(2, 10)))
    assert cert.shattered
    expected = {
        (0, 0): ProgressionRule(6, 3),
        (0, 1): ProgressionRule(4, 3),
        (1, 0): ProgressionRule(9, 3),
        (1, 1): ProgressionRule(7, 3),
    }
    for b, h in expected.items():
        assert tuple(h(c) for c in (12, 18)) == b
        assert h in cert.alternatives[b]
    # the first three labelings have a unique witness with d <= 9
    for b in [(0, 0), (0, 1), (1, 0)]:
        assert cert.alternatives[b] == (expected[b],)
    assert time.perf_counter() - t0 < 1


def test_criterion_03_constructive_shattering():
    t0 = time.perf_counter()
    table = build_prime_table(1000)
    for ell in range(1, 5):
        C = construct_shatter_set(ell, table)
        cert = check_shatter(C, prime_rules(table)[: 2**ell])
        assert cert.shattered and cert.verify()
        rep = validate_certificate_prime_structure(cert, table)
        assert rep.divisible_by_witness_product
        assert rep.exceeds_zeroing_primes
        assert rep.enough_prime_factors
    assert all(type(c) is int for c in construct_shatter_set(4, table))
    assert time.perf_counter() - t0 < 5


def test_criterion_04_certified_small_dimensions(table):
    t0 = time.perf_counter()
    got = {
        "H_2": certified_vc_progression(2, 200, table, prime_only=False).dimension,
        "H_3": certified_vc_progression(3, 200, table, prime_only=False).dimension,
        "H_4": certified_vc_progression(4, 200, table, prime_only=False).dimension,
        "H'_3": certified_vc_progression(3, 200, table, prime_only=True).dimension,
    }
    assert got == {"H_2": 1, "H_3": 2, "H_4": 2, "H'_3": 1}
    assert time.perf_counter() - t0 < 60


def test_criterion_05_restricted_vc_formula(table):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    for n in (10, 100):
        ell = vc_dim_restricted_formula(n, table)
        pi_n = prime_count(table, n)
        G = prime_rules(table, n)
        assert len(G) == pi_n
        C = construct_shatter_set(ell, table)
        assert table.primes[2**ell - 1] <= n
        assert check_shatter(C, G).shattered
        assert pi_n < 2 ** (ell + 1)
        small = [int(p) for p in table.primes if p <= n]
        for trial in range(100):
            if trial % 2:
                # products of small primes, the points most likely to be split
                C = set()
                while len(C) < ell + 1:
                    k = int(rng.integers(2, 2 ** (ell + 1) + 1))
                    C.add(math.prod(int(p) for p in rng.choice(small, size=min(k, len(small)), replace=False)))
            else:
                C = set(rng.choice(np.arange(2, 10**4), size=ell + 1, replace=False).tolist())
            assert len(realized_dichotomies(sorted(C), G)) <= pi_n < 2 ** (ell + 1)
    assert time.perf_counter() - t0 < 30


def test_criterion_06_erm_primality(table):
    t0 = time.perf_counter()
    rng = np.random.default_rng(6)
    total = brute_checked = 0
    for n, m in itertools.product((10**2, 10**4), (10, 100)):
        for _ in range(2500):
            xs = rng.integers(2, n + 1, size=m)
            S = make_sample(xs, table)
            d = erm_fit(S).d
            assert is_prime_td(d)
            total += 1
            if n == 10**2:
                # exhaustive argmax over every d in [2, max x] with integer counts (weights are uniform)
                comp = xs[~table.is_prime[xs]]
                counts = [int(np.count_nonzero((comp % k == 0) & (comp > k))) for k in range(2, int(xs.max()) + 1)]
                assert d == 2 + int(np.argmax(counts))
                brute_checked += 1
    assert total == 10**4 and brute_checked == 5000
    assert time.perf_counter() - t0 < 60


def test_criterion_07_adversarial_bound(table):
    t0 = time.perf_counter()
    for m in range(2, 11):
        vectors = {
            "uniform": [Fraction(1, m)] * m,
            "geometric": [Fraction(2 ** (m - 1 - i), 2**m - 1) for i in range(m)],
            "one-hot-leaning": [Fraction(9, 10)] + [Fraction(1, 10 * (m - 1))] * (m - 1),
        }
        for ws in vectors.values():
            S = adversarial_sample(m, table, ws)
            floor = 1 - max(ws)
            top = int(S.instances.max())
            for d in range(2, top + 1):
                assert weighted_risk(S, DivisorRule(d)) >= floor
    assert time.perf_counter() - t0 < 10


def test_criterion_08_erm_convergence(default_run, big_table):
    erm, _ = default_run
    by_n = {}
    for r in erm:
        by_n.setdefault(r.n, []).append(r)
        if r.d_S == 2:
            assert abs(r.L_gen - Fraction(1, 2)) <= h2_deviation_bound(r.n, big_table)
    assert sorted(by_n) == list(DEFAULT_CONFIG.n_grid)
    for n, rs in by_n.items():
        freq = sum(r.dS_ne_2 for r in rs) / len(rs)
        bound = hoeffding_bound(n, rs[0].m, big_table)
        assert freq <= bound + 3 * math.sqrt(bound * (1 - bound) / len(rs))
    assert sum(r.d_S == 2 for r in by_n[10**6]) >= 95


def test_criterion_09_weight_decay(default_run, big_table):
    _, boost = default_run
    by_n = {}
    for r in boost:
        by_n.setdefault(r.n, []).append(r)
        cum, eps1 = 0.0, r.rounds[0].eps_t
        for rnd in r.rounds:
            # relative 1e-12 slack absorbs float rounding in the reweighting
            assert math.exp(-2 * cum) * eps1 * (1 - 1e-12) <= rnd.eps_t <= math.exp(2 * cum) * eps1 * (1 + 1e-12)
            cum += abs(rnd.W_t)
    medians = [statistics.median(max(abs(x.W_t) for x in r.rounds) for r in by_n[n]) for n in DEFAULT_CONFIG.n_grid]
    inversions = sum(b > a for a, b in zip(medians, medians[1:]))
    assert inversions <= 1
    target = analytic_first_weight(10**6, big_table)
    assert target == pytest.approx(0.158304, abs=1e-6)
    median_w1 = statistics.median(abs(r.rounds[0].W_t) for r in by_n[10**6])
    assert abs(median_w1 - target) <= 0.05


def test_criterion_10_futility(default_run):
    t0 = time.perf_counter()
    _, boost = default_run
    top = [r for r in boost if r.n == 10**6]
    assert len(top) == 100
    assert all(len(r.rounds) == 5 for r in top)
    assert all(abs(r.acc_strong - r.acc_baseline) <= 0.02 for r in top)
    assert time.perf_counter() - t0 < 120


def test_criterion_11_reproducible_csv(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text('{"n_grid": [100, 1000, 10000], "m_rule": [1, 3], "trials": 10, "rounds": 5, "seed": 42, "class": "primes"}')
    outs = []
    for i, workers in enumerate(("1", "1", "3")):
        dest = tmp_path / f"run{i}.csv"
        assert main(["experiment", "--config", str(cfg), "--output", str(dest), "--workers", workers]) == 0
        outs.append(dest.read_bytes())
    assert outs[0] == outs[1] == outs[2]
    assert len(outs[0].splitlines()) > 1
