"""Reference computations written independently of the package.

Everything here is plain Python (itertools, math) or scipy, so a bug in the
vectorised package code cannot leak into the expected values.
"""

import itertools
import math

from scipy import stats


def profiles_pm1(n):
    return itertools.product((-1, 1), repeat=n)


def weighted_approves(x, w, quota):
    return sum(wi * xi for wi, xi in zip(w, x)) >= (2 * quota - 1) * sum(w)


def likelihood(x, p, validity):
    return math.prod(pi if xi == validity else 1 - pi for xi, pi in zip(x, p))


def consensus_probability(p, approves, validity=1):
    """Sum of profile likelihoods over profiles where the rule is correct."""
    total = 0.0
    for x in profiles_pm1(len(p)):
        outcome = 1 if approves(x) else -1
        if outcome == validity:
            total += likelihood(x, p, validity)
    return total


def log_odds(p):
    return math.log(p / (1 - p))


def welfare_sides(x, p, alpha, lr, la):
    approve = (1 - alpha) * (1 + lr) * likelihood(x, p, 1)
    reject = alpha * (1 + la) * likelihood(x, p, -1)
    return approve, reject


def binomial_tail(p, n, k_min):
    """P(Bin(n, p) >= k_min) from scipy's survival function."""
    return float(stats.binom.sf(k_min - 1, n, p))


def example1_optimal_hand():
    """Hand expansion of the Example 1 optimal-rule probability."""
    return 0.9 ** 2 + 2 * 0.9 * 0.1 * (0.6 ** 3 + 3 * 0.6 ** 2 * 0.4)


def log_growth_closed_form(q, q1, delta, lr, la, T):
    """log(p_T / p_0) for the unclamped geometric trajectory."""
    qa = 1 - q - q1
    return T * (q * math.log(1 + delta) + (lr * q1 + la * qa) * math.log(1 - delta))
