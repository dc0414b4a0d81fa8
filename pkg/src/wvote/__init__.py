"""Weighted majority voting for proof-of-stake committees.

Log-odds vote weights with a welfare-optimal quota, multiplicative-weights
updates of validators' voting profiles, and a slot-level simulator of
consensus recovery under vote blocking.
"""

__version__ = "0.1.0"

from .core import (BlockValidity, Committee, ConfigError, DegenerateCommitteeError, Member,
                   Outcome, WelfareParams, clamp_profile)
from .mwu import (BehaviorMix, UpdateParams, VoteClass, classify_vote, initialize_profile,
                  make_schedule, minimum_correct_fraction, mwu_update, run_trajectory,
                  suspension_check, sustains_profile, tolerance_constants)
from .rules import (DecisionRule, consensus_probability_exact, consensus_probability_mc,
                    expected_welfare, normalize_weights, optimal_quota, optimal_weight,
                    oracle_optimal_rule, reduced_decision, unweighted_decision,
                    verify_optimal_rule, weighted_decision)
from .sim import (BehaviorPolicy, ScenarioConfig, SlotRecord, collect_votes, process_slot,
                  propose_block, recovery_slot, run_scenario, select_committee)
