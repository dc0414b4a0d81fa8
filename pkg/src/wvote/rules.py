"""Majority rules, log-odds weights and the welfare-optimal quota.

Decision profiles are ``{-1, +1}`` arrays.  Every rule here can be applied to
a single profile or, through :meth:`DecisionRule.decide_many`, to a stacked
``(m, n)`` matrix of profiles, which is what the exact enumerators and the
Monte-Carlo estimator use.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb
from typing import Sequence

import numpy as np

from .core import (BlockValidity, DegenerateCommitteeError, Outcome, WelfareParams,
                   as_votes)

ENUMERATION_LIMIT = 20
# past this size the per-profile likelihood is accumulated in log space
_LOG_SPACE_FROM = 13
_CHUNK_ROWS = 1 << 16


def unweighted_decision(votes: Sequence[int], q: float) -> Outcome:
    x = as_votes(votes)
    return Outcome.APPROVE if int(x.sum()) >= (2 * q - 1) * x.size else Outcome.REJECT


def weighted_decision(votes: Sequence[int], weights: Sequence[float], qbar: float) -> Outcome:
    """Approve iff ``sum(w_i x_i) >= (2 qbar - 1) * sum(w)``; ties approve."""
    x = as_votes(votes)
    w = np.asarray(weights, dtype=float)
    if w.shape != x.shape:
        raise ValueError(f"length mismatch: {x.size} votes, {w.size} weights")
    if np.any(w < 0):
        raise ValueError("weights must be non-negative")
    if w[0] > 0 and np.all(w == w[0]):
        # equal positive weights are just vote counting; avoids float ties
        return unweighted_decision(x, qbar)
    return Outcome.APPROVE if float(w @ x) >= (2 * qbar - 1) * w.sum() else Outcome.REJECT


def reduced_decision(votes: Sequence[int], w_normalized: Sequence[float], qbar: float) -> Outcome:
    """Approval test on normalized weights: ``sum(w'_i y_i) >= qbar``, ``y = (x+1)/2``."""
    x = as_votes(votes)
    w = np.asarray(w_normalized, dtype=float)
    if w.shape != x.shape:
        raise ValueError(f"length mismatch: {x.size} votes, {w.size} weights")
    if abs(w.sum() - 1.0) > 1e-9:
        raise ValueError(f"weights are not normalized (sum = {w.sum()!r})")
    y = (x + 1) // 2
    return Outcome.APPROVE if float(w @ y) >= qbar else Outcome.REJECT


def optimal_weight(p):
    """Log-odds weight ``ln(p / (1 - p))``; accepts scalars or arrays."""
    arr = np.asarray(p, dtype=float)
    if np.any((arr <= 0) | (arr >= 1)):
        raise ValueError(f"profile out of open unit interval: {p!r}")
    w = np.log(arr) - np.log1p(-arr)
    return float(w) if w.ndim == 0 else w


def normalize_weights(w: Sequence[float]) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    total = w.sum()
    if total <= 0:
        raise DegenerateCommitteeError("degenerate committee: total weight is zero")
    return w / total


def optimal_quota_unclamped(w: Sequence[float], params: WelfareParams) -> float:
    total = float(np.sum(w))
    if total <= 0:
        raise DegenerateCommitteeError("degenerate committee: total weight is zero")
    return 0.5 * (1.0 - params.bias / total)


def optimal_quota(w: Sequence[float], params: WelfareParams) -> float:
    """Welfare-optimal quota for total weight ``sum(w)``, clamped to [0.5, 1]."""
    return min(1.0, max(0.5, optimal_quota_unclamped(w, params)))


@dataclass(frozen=True)
class DecisionRule:
    """A (weighted) majority rule; ``weights=None`` means one vote each."""

    quota: float
    weights: np.ndarray | None = None

    @classmethod
    def unweighted(cls, q: float) -> "DecisionRule":
        if not (0.5 <= q <= 1.0):
            raise ValueError(f"unweighted quota must lie in [0.5, 1], got {q!r}")
        return cls(q)

    @classmethod
    def weighted(cls, weights: Sequence[float], quota: float) -> "DecisionRule":
        w = np.asarray(weights, dtype=float)
        if np.any(w < 0):
            raise ValueError("weights must be non-negative")
        return cls(quota, w)

    @classmethod
    def optimal(cls, profiles: Sequence[float], params: WelfareParams,
                clamp: bool = True) -> "DecisionRule":
        """Log-odds weights with the welfare-optimal quota.

        With ``clamp=False`` the quota may leave [0.5, 1]; that unclamped rule
        is the exact welfare maximizer for every ``params``.
        """
        w = optimal_weight(np.asarray(profiles, dtype=float))
        w = np.atleast_1d(w)
        q = optimal_quota(w, params) if clamp else optimal_quota_unclamped(w, params)
        return cls(q, w)

    def threshold(self, n: int) -> float:
        total = n if self.weights is None else float(self.weights.sum())
        return (2 * self.quota - 1) * total

    def decide(self, votes: Sequence[int]) -> Outcome:
        if self.weights is None:
            return unweighted_decision(votes, self.quota)
        return weighted_decision(votes, self.weights, self.quota)

    def decide_many(self, X: np.ndarray) -> np.ndarray:
        """Outcomes (+1/-1) for each row of a stacked decision-profile matrix."""
        X = np.asarray(X)
        n = X.shape[1]
        if self.weights is not None and self.weights.size != n:
            raise ValueError(f"rule has {self.weights.size} weights, profiles have {n} votes")
        if self.weights is None or (self.weights[0] > 0 and np.all(self.weights == self.weights[0])):
            score = X.sum(axis=1)
            thr = (2 * self.quota - 1) * n
        else:
            score = X @ self.weights
            thr = self.threshold(n)
        return np.where(score >= thr, 1, -1).astype(np.int8)


def all_decision_profiles(n: int) -> np.ndarray:
    """Every profile in ``{-1, +1}^n`` as rows of a ``(2**n, n)`` int8 matrix."""
    k = np.arange(1 << n, dtype=np.int64)[:, None]
    bits = (k >> np.arange(n - 1, -1, -1)) & 1
    return (2 * bits - 1).astype(np.int8)


def _iter_profile_chunks(n: int):
    total = 1 << n
    shifts = np.arange(n - 1, -1, -1)
    for start in range(0, total, _CHUNK_ROWS):
        k = np.arange(start, min(total, start + _CHUNK_ROWS), dtype=np.int64)[:, None]
        yield (2 * ((k >> shifts) & 1) - 1).astype(np.int8)


def _likelihood(X: np.ndarray, p: np.ndarray, validity: int) -> np.ndarray:
    correct = X == validity
    if p.size < _LOG_SPACE_FROM:
        return np.where(correct, p, 1.0 - p).prod(axis=1)
    return np.exp(np.where(correct, np.log(p), np.log1p(-p)).sum(axis=1))


def _check_enumerable(n: int, limit: int):
    if n > limit:
        raise ValueError(
            f"committee of {n} exceeds the enumeration limit {limit}; "
            "use consensus_probability_mc instead")


def consensus_probability_exact(profiles: Sequence[float], rule: DecisionRule,
                                conditioned_on: BlockValidity = BlockValidity.VALID,
                                limit: int = ENUMERATION_LIMIT) -> float:
    """Probability that ``rule`` reaches the correct outcome, by enumeration.

    For a valid block this is P(approve | valid); for an invalid block it is
    P(reject | invalid).  Voters err independently, each with probability
    ``1 - p_i``.
    """
    p = np.asarray(profiles, dtype=float)
    n = p.size
    _check_enumerable(n, limit)
    b = int(conditioned_on)
    total = 0.0
    for X in _iter_profile_chunks(n):
        hit = rule.decide_many(X) == b
        if hit.any():
            total += float(_likelihood(X[hit], p, b).sum())
    return total


def consensus_probability_mc(profiles: Sequence[float], rule: DecisionRule,
                             conditioned_on: BlockValidity = BlockValidity.VALID,
                             trials: int = 100_000, seed: int | None = 0,
                             chunk: int = 1 << 17) -> tuple[float, float]:
    """Monte-Carlo estimate of :func:`consensus_probability_exact`.

    Returns the estimate and its 95% normal-approximation half width.
    Draws are made sequentially in chunks from one generator seeded with
    ``seed``, so the result depends on ``seed`` and ``chunk`` only.
    """
    if trials < 1:
        raise ValueError("trials must be positive")
    p = np.asarray(profiles, dtype=float)
    b = int(conditioned_on)
    rng = np.random.default_rng(seed)
    hits = 0
    done = 0
    while done < trials:
        m = min(chunk, trials - done)
        correct = rng.random((m, p.size)) < p
        X = np.where(correct, b, -b).astype(np.int8)
        hits += int(np.count_nonzero(rule.decide_many(X) == b))
        done += m
    est = hits / trials
    return est, 1.96 * np.sqrt(est * (1.0 - est) / trials)


def expected_welfare(profiles: Sequence[float], rule: DecisionRule, params: WelfareParams) -> float:
    """Expected collective welfare up to the rule-independent constant."""
    pi_valid = consensus_probability_exact(profiles, rule, BlockValidity.VALID)
    pi_invalid = consensus_probability_exact(profiles, rule, BlockValidity.INVALID)
    return ((1 - params.alpha) * (1 + params.loss_reject_valid) * pi_valid
            + params.alpha * (1 + params.loss_accept_invalid) * pi_invalid)


def _oracle_sides(X: np.ndarray, p: np.ndarray, params: WelfareParams):
    # welfare contribution of each profile if approved (lhs) vs rejected (rhs)
    lhs = (1 - params.alpha) * (1 + params.loss_reject_valid) * _likelihood(X, p, 1)
    rhs = params.alpha * (1 + params.loss_accept_invalid) * _likelihood(X, p, -1)
    return lhs, rhs


def oracle_optimal_rule(profiles: Sequence[float], params: WelfareParams) -> dict[tuple[int, ...], Outcome]:
    """Welfare-optimal outcome for every decision profile, by direct comparison."""
    p = np.asarray(profiles, dtype=float)
    _check_enumerable(p.size, ENUMERATION_LIMIT)
    out = {}
    for X in _iter_profile_chunks(p.size):
        lhs, rhs = _oracle_sides(X, p, params)
        for row, approve in zip(X, lhs > rhs):
            out[tuple(int(v) for v in row)] = Outcome.APPROVE if approve else Outcome.REJECT
    return out


def verify_optimal_rule(profiles: Sequence[float], params: WelfareParams,
                    rel_tol: float = 1e-9) -> bool:
    """Check the log-odds weighted rule against the per-profile oracle.

    Profiles whose two welfare contributions agree to ``rel_tol`` are ties;
    either outcome is optimal there, so they are skipped.
    """
    p = np.asarray(profiles, dtype=float)
    _check_enumerable(p.size, ENUMERATION_LIMIT)
    rule = DecisionRule.optimal(p, params, clamp=False)
    for X in _iter_profile_chunks(p.size):
        lhs, rhs = _oracle_sides(X, p, params)
        oracle = np.where(lhs > rhs, 1, -1)
        tie = np.abs(lhs - rhs) <= rel_tol * np.maximum(lhs, rhs)
        if np.any((rule.decide_many(X) != oracle) & ~tie):
            return False
    return True


def winning_profiles(rule: DecisionRule, n: int) -> list[tuple[int, ...]]:
    """All decision profiles a rule approves, in enumeration order."""
    X = all_decision_profiles(n)
    return [tuple(int(v) for v in row) for row in X[rule.decide_many(X) == 1]]


def binomial_tail(p: float, n: int, k_min: int) -> float:
    """P(at least ``k_min`` successes out of ``n`` with success probability ``p``)."""
    return sum(comb(n, k) * p ** k * (1 - p) ** (n - k) for k in range(k_min, n + 1))


__all__ = [
    "ENUMERATION_LIMIT", "DecisionRule", "all_decision_profiles", "binomial_tail",
    "consensus_probability_exact", "consensus_probability_mc", "expected_welfare",
    "normalize_weights", "optimal_quota", "optimal_quota_unclamped", "optimal_weight",
    "oracle_optimal_rule", "reduced_decision", "unweighted_decision", "verify_optimal_rule",
    "weighted_decision", "winning_profiles",
]
