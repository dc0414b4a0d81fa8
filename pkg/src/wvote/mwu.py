"""Multiplicative-weights updates of voting profiles.

A vote is scored against the block's true validity::

                      valid block        invalid block
    approve (+1)      p * (1 + d)        p * (1 - d)**l_a
    reject (-1)       p * (1 - d)**l_r   p * (1 + d)

A missing vote also counts as -1 but is always charged ``(1 - d)**l_r``, and
the product is clamped into ``[0.5, 1 - cap_margin]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

import numpy as np

from .core import (DEFAULT_CAP_MARGIN, PROFILE_FLOOR, BlockValidity, ConfigError,
                   clamp_profile)


class VoteClass(Enum):
    CORRECT = "correct"
    ABSTAINED = "abstained_or_rejected_valid"
    APPROVED_INVALID = "approved_invalid"


@dataclass(frozen=True)
class UpdateParams:
    delta: float = 1e-3
    loss_reject_valid: float = 1e-2
    loss_accept_invalid: float = 12.0
    grace_period: int = 1
    cap_margin: float = DEFAULT_CAP_MARGIN
    suspension_enabled: bool = False

    def __post_init__(self):
        if not (0.0 < self.delta < 1.0):
            raise ConfigError(f"delta must lie in (0, 1), got {self.delta!r}")
        if self.loss_reject_valid <= 0 or self.loss_accept_invalid <= 0:
            raise ConfigError("losses must be strictly positive")
        if self.grace_period < 0:
            raise ConfigError("grace_period must be non-negative")
        if not (0.0 < self.cap_margin < 0.5):
            raise ConfigError(f"cap_margin must lie in (0, 0.5), got {self.cap_margin!r}")

    @property
    def cap(self) -> float:
        return 1.0 - self.cap_margin


@dataclass(frozen=True)
class BehaviorMix:
    """Long-run behaviour: fraction ``q`` correct, ``q1`` abstaining on valid blocks.

    The remaining ``1 - q - q1`` approves invalid blocks.
    """

    q: float
    q1: float = 0.0

    def __post_init__(self):
        if not (0 <= self.q <= 1 and 0 <= self.q1 <= 1):
            raise ConfigError("behaviour fractions must lie in [0, 1]")
        if self.q + self.q1 > 1 + 1e-12:
            raise ConfigError(f"q + q1 must not exceed 1, got {self.q + self.q1!r}")

    @property
    def q_invalid(self) -> float:
        return max(0.0, 1.0 - self.q - self.q1)


def classify_vote(vote: int, validity: BlockValidity | int, abstained: bool = False) -> VoteClass:
    """Score a +1/-1 vote against the ground-truth validity of the block.

    A missing vote is encoded as -1 but never earns the reward for rejecting
    an invalid block; pass ``abstained=True`` for it.
    """
    if abstained:
        return VoteClass.ABSTAINED
    if vote == int(validity):
        return VoteClass.CORRECT
    if int(validity) == BlockValidity.VALID:
        return VoteClass.ABSTAINED
    return VoteClass.APPROVED_INVALID


def update_factor(cls: VoteClass, params: UpdateParams) -> float:
    if cls is VoteClass.CORRECT:
        return 1.0 + params.delta
    loss = params.loss_reject_valid if cls is VoteClass.ABSTAINED else params.loss_accept_invalid
    return (1.0 - params.delta) ** loss


def raw_update(p: float, cls: VoteClass, params: UpdateParams) -> float:
    return p * update_factor(cls, params)


def mwu_update(p: float, cls: VoteClass, params: UpdateParams) -> float:
    return clamp_profile(raw_update(p, cls, params), PROFILE_FLOOR, params.cap_margin)


def initialize_profile() -> float:
    return PROFILE_FLOOR


def suspension_check(raw: float, slot: int, params: UpdateParams) -> bool:
    """Whether a validator whose *unclamped* updated profile is ``raw`` is suspended.

    The clamped profile never drops below the floor, so the raw value is the
    only one that can trigger suspension.
    """
    return params.suspension_enabled and slot >= params.grace_period and raw < PROFILE_FLOOR


def run_trajectory(p0: float, schedule: Iterable[VoteClass], params: UpdateParams,
                   overrides: Mapping[int, UpdateParams] | None = None) -> np.ndarray:
    """Clamped profiles after each scheduled update.

    ``overrides`` maps a step index to the parameters used at that step, for
    time-varying ``(delta, l_r, l_a)`` sequences.
    """
    overrides = overrides or {}
    out = []
    p = p0
    for t, cls in enumerate(schedule):
        p = mwu_update(p, cls, overrides.get(t, params))
        out.append(p)
    return np.array(out)


def unclamped_log_growth(mix: BehaviorMix, params: UpdateParams) -> float:
    """Per-slot log growth of an unclamped profile following ``mix``."""
    lr, la = params.loss_reject_valid, params.loss_accept_invalid
    return (mix.q * math.log1p(params.delta)
            + (lr * mix.q1 + la * mix.q_invalid) * math.log1p(-params.delta))


@lru_cache(maxsize=64)
def periodic_pattern(mix: BehaviorMix, period: int) -> tuple[VoteClass, ...]:
    """One period of vote classes with each class spread evenly."""
    counts = [round(mix.q * period), round(mix.q1 * period)]
    counts.append(period - counts[0] - counts[1])
    if counts[2] < 0:
        counts[1] += counts[2]
        counts[2] = 0
    # interleave the three classes evenly over the period
    slots = [((k + 0.5) / c, order, cls)
             for order, (cls, c) in enumerate(zip(VoteClass, counts)) for k in range(c)]
    slots.sort(key=lambda s: s[:2])
    return tuple(s[2] for s in slots)


def make_schedule(mix: BehaviorMix, length: int, kind: str = "periodic",
                  rng: np.random.Generator | None = None, period: int = 20) -> list[VoteClass]:
    """Per-slot vote classes realising ``mix``.

    ``periodic`` repeats a fixed pattern of ``period`` slots in which each
    class occurs ``round(fraction * period)`` times, spread evenly.
    ``seeded_random`` draws each slot independently from ``rng``.
    """
    if kind == "periodic":
        pat = periodic_pattern(mix, period)
        return [pat[t % period] for t in range(length)]
    if kind == "seeded_random":
        rng = rng if rng is not None else np.random.default_rng(0)
        probs = np.array([mix.q, mix.q1, mix.q_invalid])
        idx = rng.choice(3, size=length, p=probs / probs.sum())
        classes = list(VoteClass)
        return [classes[i] for i in idx]
    raise ValueError(f"unknown schedule kind {kind!r}")


def tolerance_constants(params: UpdateParams) -> tuple[float, float]:
    """Constants ``(c1, c2)`` of the sustain condition ``q >= c1 (1 - c2 q1)``."""
    lr, la, d = params.loss_reject_valid, params.loss_accept_invalid, params.delta
    if lr >= la:
        raise ConfigError("tolerance analysis needs loss_reject_valid < loss_accept_invalid")
    c1 = 1.0 / (1.0 - math.log1p(d) / (la * math.log1p(-d)))
    c2 = 1.0 - lr / la
    return c1, c2


def sustains_profile(mix: BehaviorMix, params: UpdateParams) -> bool:
    """Whether following ``mix`` keeps an unclamped profile at or above its start."""
    c1, c2 = tolerance_constants(params)
    return mix.q >= c1 * (1.0 - c2 * mix.q1)


def minimum_correct_fraction(params: UpdateParams) -> float:
    """Lower bound on ``q`` implied by sustaining, valid for every ``q1``."""
    c1, c2 = tolerance_constants(params)
    return (c1 - c1 * c2) / (1.0 - c1 * c2)


def with_delta(params: UpdateParams, delta: float) -> UpdateParams:
    return replace(params, delta=delta)


def steps_to_cap(trajectory: Sequence[float], params: UpdateParams) -> int | None:
    hit = np.flatnonzero(np.asarray(trajectory) >= params.cap)
    return int(hit[0]) + 1 if hit.size else None
