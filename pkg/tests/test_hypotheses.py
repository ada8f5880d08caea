from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from primeboost.errors import DomainError, OutOfRangeError
from primeboost.hypotheses import (
    DivisorRule,
    Label,
    PrimeRule,
    ProgressionRule,
    evaluate,
    exact_generalization_error,
    parse_hypothesis,
    prime_label,
    prime_rule,
    to_token,
)
from primeboost.primes import prime_count

from oracles import brute_error, is_prime_td, zero_td


class TestEvaluate:
    def test_worked_examples(self):
        assert evaluate(PrimeRule(5), 10) == 0
        assert evaluate(PrimeRule(5), 6) == 1
        assert evaluate(PrimeRule(3), 7) == 1
        assert evaluate(ProgressionRule(9, 3), 18) == 0
        assert evaluate(ProgressionRule(9, 3), 12) == 1

    def test_divisor_itself_is_one(self):
        assert evaluate(DivisorRule(6), 6) == 1
        assert evaluate(ProgressionRule(6, 5), 6) == 1
        assert evaluate(ProgressionRule(6, 5), 30) == 0
        assert evaluate(ProgressionRule(6, 5), 36) == 1

    def test_arbitrary_precision(self):
        big = 2**200 * 3
        assert evaluate(PrimeRule(3), big) == 0
        assert evaluate(PrimeRule(5), big) == 1
        assert evaluate(ProgressionRule(2**199, 6), big) == 0

    def test_domain(self):
        with pytest.raises(DomainError):
            evaluate(PrimeRule(2), 1)

    def test_constructor_validation(self):
        with pytest.raises(DomainError):
            DivisorRule(1)
        with pytest.raises(DomainError):
            ProgressionRule(3, 1)

    def test_prime_rule_checked(self, table):
        assert prime_rule(7, table) == PrimeRule(7)
        with pytest.raises(DomainError):
            prime_rule(9, table)

    @given(st.integers(2, 300), st.integers(2, 20), st.integers(2, 3000))
    def test_matches_set_definition(self, d, k, x):
        assert evaluate(DivisorRule(d), x) == zero_td("divisor", d, x)
        assert evaluate(ProgressionRule(d, k), x) == zero_td("progression", d, x, k)

    @given(st.integers(2, 300), st.integers(2, 20))
    def test_vectorized_agrees(self, d, k):
        xs = np.arange(2, 2000)
        for h in (DivisorRule(d), ProgressionRule(d, k)):
            assert h.zero_mask(xs).tolist() == [evaluate(h, int(x)) == 0 for x in xs]
            assert h.predict_pm(xs).tolist() == [2 * evaluate(h, int(x)) - 1 for x in xs]


class TestProperties:
    def test_no_prime_misidentified(self, table):
        primes = table.primes[table.primes <= 2000].tolist()
        for d in range(2, 60):
            for h in (DivisorRule(d), ProgressionRule(d, 2), ProgressionRule(d, 7)):
                assert all(evaluate(h, p) == 1 for p in primes)

    @given(st.integers(2, 200), st.integers(2, 30), st.integers(2, 5000))
    def test_progression_zero_implies_divisor_zero(self, d, k, x):
        if evaluate(ProgressionRule(d, k), x) == 0:
            assert evaluate(DivisorRule(d), x) == 0

    @given(st.integers(2, 500))
    def test_divisor_dominance(self, d):
        xs = np.arange(2, 3000)
        zero_d = DivisorRule(d).zero_mask(xs)
        for p in (q for q in range(2, d + 1) if d % q == 0 and is_prime_td(q)):
            assert not (zero_d & ~DivisorRule(p).zero_mask(xs)).any()


class TestLabels:
    @pytest.mark.parametrize("x, value", [(7, 1), (9, 0), (2, 1)])
    def test_prime_label(self, table, x, value):
        lab = prime_label(x, table)
        assert lab.value == value
        assert lab.pm_value == 2 * value - 1

    def test_pm_mapping(self):
        assert Label(0).pm_value == -1 and Label(1).pm_value == 1

    def test_out_of_range(self, table):
        with pytest.raises(OutOfRangeError):
            prime_label(table.limit + 1, table)


class TestGeneralizationError:
    def test_examples(self, table):
        assert exact_generalization_error(PrimeRule(2), 10, table) == Fraction(1, 9)
        assert exact_generalization_error(DivisorRule(11), 10, table) == Fraction(5, 9)
        assert exact_generalization_error(PrimeRule(7), 10, table) == Fraction(5, 9)

    def test_h2_closed_form(self, table):
        # 1 - pi(n)/(n-1) - (t(n)-1)/(n-1)
        for n in range(2, 2000):
            closed = 1 - Fraction(prime_count(table, n), n - 1) - Fraction(n // 2 - 1, n - 1)
            assert exact_generalization_error(DivisorRule(2), n, table) == closed

    def test_matches_brute_force(self, table):
        for n in (2, 3, 10, 57, 100, 1000):
            for d in range(2, 51):
                assert exact_generalization_error(DivisorRule(d), n, table) == brute_error("divisor", d, n)
                for k in (2, 3, 7):
                    assert exact_generalization_error(ProgressionRule(d, k), n, table) == brute_error(
                        "progression", d, n, k
                    )

    def test_out_of_range(self, table):
        with pytest.raises(OutOfRangeError):
            exact_generalization_error(DivisorRule(2), table.limit + 1, table)


class TestSerialization:
    @pytest.mark.parametrize("h, tok", [(PrimeRule(5), "p:5"), (DivisorRule(12), "d:12"), (ProgressionRule(9, 3), "dk:9:3")])
    def test_round_trip(self, h, tok):
        assert to_token(h) == tok
        assert parse_hypothesis(tok) == h

    @pytest.mark.parametrize("tok", ["x:3", "p:", "dk:3", "d:1"])
    def test_rejects_malformed(self, tok):
        with pytest.raises(DomainError):
            parse_hypothesis(tok)
