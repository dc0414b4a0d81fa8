"""Slot-by-slot committee consensus with adversarial vote blocking.

Each slot draws a committee, proposes a block with known validity, collects
votes according to every member's behaviour policy, decides with log-odds
weights and the configured quota, then applies the multiplicative update to
every committee member.

Randomness comes from independent substreams keyed by ``(seed, slot,
purpose)``; see :func:`substream`.  Adding or removing draws for one purpose
never shifts the numbers seen by another.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum
from typing import Sequence

import numpy as np

from .core import (BlockValidity, ConfigError, DegenerateCommitteeError, Outcome,
                   WelfareParams, clamp_profile)
from .mwu import (BehaviorMix, UpdateParams, VoteClass, periodic_pattern, classify_vote,
                  suspension_check, update_factor)
from .rules import normalize_weights, optimal_quota, optimal_weight, weighted_decision

FALLBACK_QUOTA = 2 / 3


class Purpose(IntEnum):
    COMMITTEE = 0
    BLOCK = 1
    VOTES = 2


def substream(seed: int, slot: int, purpose: Purpose) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, slot, int(purpose)]))


@dataclass(frozen=True)
class BehaviorPolicy:
    """How a validator acts when selected.

    ``honest`` always votes correctly, ``blocked`` never gets a vote through,
    ``mixed`` follows a :class:`BehaviorMix` either periodically (phase set by
    the validator id) or by independent per-slot draws.
    """

    kind: str = "honest"
    mix: BehaviorMix | None = None
    schedule: str = "periodic"
    period: int = 20

    def __post_init__(self):
        if self.kind not in ("honest", "blocked", "mixed"):
            raise ConfigError(f"unknown behaviour kind {self.kind!r}")
        if self.kind == "mixed":
            if self.mix is None:
                raise ConfigError("mixed behaviour needs a BehaviorMix")
            if self.schedule not in ("periodic", "seeded_random"):
                raise ConfigError(f"unknown schedule kind {self.schedule!r}")

    @classmethod
    def honest(cls):
        return cls("honest")

    @classmethod
    def blocked(cls):
        return cls("blocked")

    @classmethod
    def mixed(cls, mix: BehaviorMix, schedule: str = "periodic", period: int = 20):
        return cls("mixed", mix, schedule, period)

    def action(self, slot: int, validator_id: int, u: float) -> VoteClass:
        """Intended action for this slot; ``u`` is a uniform draw for random schedules."""
        if self.kind == "honest":
            return VoteClass.CORRECT
        if self.kind == "blocked":
            return VoteClass.ABSTAINED
        if self.schedule == "periodic":
            return periodic_pattern(self.mix, self.period)[(slot + validator_id) % self.period]
        if u < self.mix.q:
            return VoteClass.CORRECT
        if u < self.mix.q + self.mix.q1:
            return VoteClass.ABSTAINED
        return VoteClass.APPROVED_INVALID


@dataclass(frozen=True)
class ScenarioConfig:
    population: int = 100
    initial_profile: float | tuple[float, ...] = 0.9
    stake: float | tuple[float, ...] = 1.0
    committee_size: int | None = None
    committee_mode: str = "all"
    adversary_fraction: float = 0.4
    adversary_behavior: BehaviorPolicy = field(default_factory=BehaviorPolicy.blocked)
    honest_behavior: BehaviorPolicy = field(default_factory=BehaviorPolicy.honest)
    welfare: WelfareParams = field(default_factory=WelfareParams)
    update: UpdateParams = field(default_factory=UpdateParams)
    quota_policy: str = "fixed"
    fixed_quota: float = 2 / 3
    horizon: int = 1000
    seed: int = 0
    validity_policy: str = "all_valid"

    def __post_init__(self):
        if self.population < 1:
            raise ConfigError("population must be positive")
        if not (0.0 <= self.adversary_fraction <= 1.0):
            raise ConfigError(f"adversary_fraction must lie in [0, 1], got {self.adversary_fraction!r}")
        if self.horizon < 1:
            raise ConfigError("horizon must be at least 1")
        n = self.committee_size
        if n is not None and not (1 <= n <= self.population):
            raise ConfigError(f"committee_size must lie in [1, population], got {n}")
        if self.committee_mode not in ("all", "persistent", "resample"):
            raise ConfigError(f"unknown committee_mode {self.committee_mode!r}")
        if self.committee_mode != "all" and n is None:
            raise ConfigError(f"committee_mode {self.committee_mode!r} needs committee_size")
        if self.quota_policy not in ("fixed", "optimal"):
            raise ConfigError(f"unknown quota_policy {self.quota_policy!r}")
        if not (0.5 <= self.fixed_quota <= 1.0):
            raise ConfigError(f"fixed_quota must lie in [0.5, 1], got {self.fixed_quota!r}")
        if self.validity_policy not in ("all_valid", "prior"):
            raise ConfigError(f"unknown validity_policy {self.validity_policy!r}")
        for name in ("initial_profile", "stake"):
            v = getattr(self, name)
            if not np.isscalar(v) and len(v) != self.population:
                raise ConfigError(f"{name} has {len(v)} entries for {self.population} validators")
        p = np.broadcast_to(np.asarray(self.initial_profile, dtype=float), (self.population,))
        if np.any((p < 0.5) | (p > self.update.cap)):
            raise ConfigError("initial profiles must lie in [0.5, 1 - cap_margin]")
        if np.any(np.asarray(self.stake, dtype=float) < 0):
            raise ConfigError("stakes must be non-negative")

    @property
    def n_adversarial(self) -> int:
        return int(round(self.adversary_fraction * self.population))


@dataclass
class SimulationState:
    stakes: np.ndarray
    profiles: np.ndarray
    suspended: np.ndarray
    behaviors: list[BehaviorPolicy]
    committed: int = 0
    persistent_committee: np.ndarray | None = None

    @property
    def ids(self) -> np.ndarray:
        return np.arange(self.profiles.size)

    @property
    def active(self) -> np.ndarray:
        return (self.stakes > 0) & ~self.suspended

    @classmethod
    def from_config(cls, config: ScenarioConfig) -> "SimulationState":
        N = config.population
        k = config.n_adversarial
        # the first k validator ids are the adversary-controlled ones
        behaviors = [config.adversary_behavior] * k + [config.honest_behavior] * (N - k)
        return cls(
            stakes=np.broadcast_to(np.asarray(config.stake, dtype=float), (N,)).copy(),
            profiles=np.broadcast_to(np.asarray(config.initial_profile, dtype=float), (N,)).copy(),
            suspended=np.zeros(N, dtype=bool),
            behaviors=behaviors,
        )


@dataclass(frozen=True)
class SlotRecord:
    slot: int
    committee: np.ndarray
    block_validity: BlockValidity
    votes: np.ndarray
    weights: np.ndarray
    quota: float
    outcome: Outcome
    weighted_approval_fraction: float
    profiles: np.ndarray
    committed_count: int
    fallback: bool = False
    suspended: tuple[int, ...] = ()


def select_committee(stakes: Sequence[float], n: int, rng: np.random.Generator,
                     eligible: Sequence[bool] | None = None) -> np.ndarray:
    """Draw ``n`` distinct validators, each draw proportional to remaining stake.

    Uses exponential race keys ``log(u) / stake``: the top ``n`` keys are
    distributed exactly as ``n`` sequential stake-weighted draws without
    replacement.  Returns ids in draw order; when every eligible validator is
    needed they are all returned in id order without consuming randomness.
    """
    stakes = np.asarray(stakes, dtype=float)
    ok = stakes > 0
    if eligible is not None:
        ok &= np.asarray(eligible, dtype=bool)
    candidates = np.flatnonzero(ok)
    if candidates.size < n:
        raise ValueError(
            f"insufficient active validators: need {n}, have {candidates.size}")
    if candidates.size == n:
        return candidates
    keys = np.log(rng.random(candidates.size)) / stakes[candidates]
    order = np.argsort(-keys, kind="stable")[:n]
    return candidates[order]


def propose_block(policy: str, alpha: float, rng: np.random.Generator) -> BlockValidity:
    if policy == "all_valid":
        return BlockValidity.VALID
    if policy == "prior":
        return BlockValidity.INVALID if rng.random() < alpha else BlockValidity.VALID
    raise ValueError(f"unknown validity policy {policy!r}")


def collect_votes(committee: Sequence[int], validity: BlockValidity,
                  behaviors: Sequence[BehaviorPolicy], slot: int,
                  rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Votes of the committee and a mask of members whose vote never arrived.

    One uniform is drawn per validator in the whole population, indexed by
    id, so a validator's draw does not depend on who else sits on the
    committee.
    """
    u = rng.random(len(behaviors))
    b = int(validity)
    votes = np.empty(len(committee), dtype=np.int8)
    abstained = np.zeros(len(committee), dtype=bool)
    for k, i in enumerate(committee):
        act = behaviors[i].action(slot, int(i), u[i])
        if act is VoteClass.CORRECT:
            votes[k] = b
        elif act is VoteClass.ABSTAINED:
            votes[k] = -1
            abstained[k] = True
        else:
            votes[k] = -b
    return votes, abstained


def _committee_for_slot(state: SimulationState, slot: int, config: ScenarioConfig) -> np.ndarray:
    active = state.active
    if config.committee_mode == "all":
        return select_committee(state.stakes, int(active.sum()), None, active)
    n = config.committee_size
    if config.committee_mode == "persistent":
        pc = state.persistent_committee
        if pc is None or not np.all(active[pc]):
            pc = select_committee(state.stakes, n, substream(config.seed, slot, Purpose.COMMITTEE), active)
            state.persistent_committee = pc
        return pc
    return select_committee(state.stakes, n, substream(config.seed, slot, Purpose.COMMITTEE), active)


def process_slot(state: SimulationState, slot: int, config: ScenarioConfig) -> SlotRecord:
    """Run one slot in place on ``state`` and return what happened."""
    committee = _committee_for_slot(state, slot, config)
    validity = propose_block(config.validity_policy, config.welfare.alpha,
                             substream(config.seed, slot, Purpose.BLOCK))
    votes, abstained = collect_votes(committee, validity, state.behaviors, slot,
                                     substream(config.seed, slot, Purpose.VOTES))
    y = (votes + 1) // 2

    fallback = False
    raw_w = np.atleast_1d(optimal_weight(state.profiles[committee]))
    try:
        w = normalize_weights(raw_w)
        if config.quota_policy == "optimal":
            quota = optimal_quota(raw_w, config.welfare)
        else:
            quota = config.fixed_quota
        outcome = weighted_decision(votes, w, quota)
    except DegenerateCommitteeError:
        fallback = True
        raw_w = np.ones(committee.size)
        w = raw_w / committee.size
        quota = FALLBACK_QUOTA
        outcome = weighted_decision(votes, w, quota)
    # same summation on both sides, so a unanimous vote gives exactly 1.0
    fraction = float(raw_w[y == 1].sum() / raw_w.sum())
    if outcome is Outcome.APPROVE:
        state.committed += 1

    params = config.update
    newly_suspended = []
    for k, i in enumerate(committee):
        cls = classify_vote(int(votes[k]), validity, bool(abstained[k]))
        raw = state.profiles[i] * update_factor(cls, params)
        if suspension_check(raw, slot, params):
            state.suspended[i] = True
            newly_suspended.append(int(i))
        state.profiles[i] = clamp_profile(raw, 0.5, params.cap_margin)

    return SlotRecord(
        slot=slot, committee=committee.copy(), block_validity=validity, votes=votes,
        weights=w, quota=quota, outcome=outcome, weighted_approval_fraction=fraction,
        profiles=state.profiles.copy(), committed_count=state.committed,
        fallback=fallback, suspended=tuple(newly_suspended))


def run_scenario(config: ScenarioConfig) -> list[SlotRecord]:
    state = SimulationState.from_config(config)
    return [process_slot(state, t, config) for t in range(config.horizon)]


def approval_series(records: Sequence[SlotRecord]) -> np.ndarray:
    return np.array([r.weighted_approval_fraction for r in records])


def profile_matrix(records: Sequence[SlotRecord]) -> np.ndarray:
    """``(T, N)`` matrix of every validator's profile after each slot."""
    return np.vstack([r.profiles for r in records])


def recovery_slot(records: Sequence[SlotRecord], threshold: float = 2 / 3) -> int | None:
    """First slot whose weighted approval fraction reaches ``threshold``."""
    for r in records:
        if r.weighted_approval_fraction >= threshold:
            return r.slot
    return None


def cap_slot(records: Sequence[SlotRecord], ids: Sequence[int], cap: float) -> int | None:
    """First slot whose *decision* used capped profiles for all of ``ids``."""
    P = profile_matrix(records)[:, list(ids)]
    hit = np.flatnonzero(np.all(P >= cap, axis=1))
    return int(hit[0]) + 1 if hit.size else None
