"""Divisibility hypothesis classes over the integers: shattering, VC bounds, ERM and AdaBoost."""

from .adaboost import BoostTrace, run_adaboost, strong_classify, weak_learn, weight_from_error
from .erm import Sample, adversarial_sample, coverage, erm_select, make_sample, weighted_risk
from .errors import CapacityError, DomainError, OutOfRangeError
from .hypotheses import DivisorRule, PrimeRule, ProgressionRule, evaluate, exact_generalization_error
from .primes import PrimeTable, build_prime_table, even_count, factorize, prime_count
from .shattering import check_shatter, construct_shatter_set, certified_vc_progression, progression_vc_bounds

__version__ = "0.1.0"
