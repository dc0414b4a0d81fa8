"""Shared value types and invariant checks.

Votes, block validity and consensus outcomes are all encoded as +1/-1 so
that decision profiles can be handled as plain integer numpy arrays.  A vote
of -1 stands for both an explicit rejection and a missing vote.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Sequence

import numpy as np

PROFILE_FLOOR = 0.5
DEFAULT_CAP_MARGIN = 1e-5


class BlockValidity(IntEnum):
    VALID = 1
    INVALID = -1


class Outcome(IntEnum):
    APPROVE = 1
    REJECT = -1


class ConfigError(ValueError):
    """Raised for parameter sets that violate a documented invariant."""


class DegenerateCommitteeError(ValueError):
    """All committee weights are zero, so no weighted rule is defined."""


def clamp_profile(raw: float, floor: float = PROFILE_FLOOR,
                  cap_margin: float = DEFAULT_CAP_MARGIN) -> float:
    """Clamp a raw profile value into ``[floor, 1 - cap_margin]``."""
    return min(1.0 - cap_margin, max(floor, raw))


def check_profile(p: float, cap_margin: float = DEFAULT_CAP_MARGIN) -> float:
    p = float(p)
    if not (PROFILE_FLOOR <= p <= 1.0 - cap_margin):
        raise ConfigError(
            f"voting profile {p!r} outside [{PROFILE_FLOOR}, {1.0 - cap_margin!r}]")
    return p


def as_votes(votes: Sequence[int]) -> np.ndarray:
    """Return ``votes`` as an int8 array, checking every entry is +1 or -1."""
    x = np.asarray(votes)
    if x.ndim != 1:
        raise ValueError("a decision profile is a 1-d sequence of votes")
    if x.size == 0:
        raise ValueError("empty committee")
    if not np.all((x == 1) | (x == -1)):
        raise ValueError(f"votes must be +1 or -1, got {x.tolist()}")
    return x.astype(np.int8)


@dataclass(frozen=True)
class WelfareParams:
    """Prior invalid-block probability and the two loss magnitudes.

    ``loss_reject_valid`` is the loss for rejecting a valid block and
    ``loss_accept_invalid`` the loss for appending an invalid one.
    """

    alpha: float = 0.5
    loss_reject_valid: float = 1e-2
    loss_accept_invalid: float = 12.0

    def __post_init__(self):
        if not (0.0 < self.alpha < 1.0):
            raise ConfigError(f"alpha must lie in (0, 1), got {self.alpha!r}")
        if self.loss_reject_valid <= 0 or self.loss_accept_invalid <= 0:
            raise ConfigError("losses must be strictly positive")
        if self.loss_reject_valid > self.loss_accept_invalid:
            warnings.warn(
                "loss_reject_valid > loss_accept_invalid; the model assumes "
                "rejecting a valid block is much cheaper than accepting an "
                "invalid one", stacklevel=3)

    @property
    def bias(self) -> float:
        """Log prior-and-loss offset ``ln((1-a)/a) + ln((1+lr)/(1+la))``."""
        return (np.log((1.0 - self.alpha) / self.alpha)
                + np.log1p(self.loss_reject_valid) - np.log1p(self.loss_accept_invalid))


@dataclass(frozen=True)
class Member:
    id: int
    profile: float
    stake: float = 1.0


@dataclass(frozen=True)
class Committee:
    slot: int
    members: tuple[Member, ...]
    cap_margin: float = field(default=DEFAULT_CAP_MARGIN, repr=False)

    def __post_init__(self):
        if len(self.members) < 1:
            raise ConfigError("a committee needs at least one member")
        ids = [m.id for m in self.members]
        if len(set(ids)) != len(ids):
            raise ConfigError(f"duplicate validator ids in committee: {ids}")
        for m in self.members:
            if m.id < 0:
                raise ConfigError(f"validator id must be non-negative, got {m.id}")
            if m.stake < 0:
                raise ConfigError(f"stake must be non-negative, got {m.stake}")
            check_profile(m.profile, self.cap_margin)

    @classmethod
    def from_profiles(cls, profiles: Sequence[float], slot: int = 0,
                      stakes: Sequence[float] | None = None,
                      cap_margin: float = DEFAULT_CAP_MARGIN) -> "Committee":
        stakes = [1.0] * len(profiles) if stakes is None else stakes
        members = tuple(Member(i, float(p), float(s))
                        for i, (p, s) in enumerate(zip(profiles, stakes)))
        return cls(slot, members, cap_margin)

    @property
    def n(self) -> int:
        return len(self.members)

    @property
    def ids(self) -> np.ndarray:
        return np.array([m.id for m in self.members], dtype=np.int64)

    @property
    def profiles(self) -> np.ndarray:
        return np.array([m.profile for m in self.members])

    @property
    def stakes(self) -> np.ndarray:
        return np.array([m.stake for m in self.members])
