# %% [markdown]
# # Log-odds weights and the optimal quota
#
# Five validators: two reliable ones (profile 0.9) and three mediocre ones
# (0.6).  We compare the plain 2/3 vote count with the weighted rule whose
# weights are the log-odds of each profile.

# %%
import numpy as np

from wvote import (DecisionRule, WelfareParams, consensus_probability_exact, normalize_weights,
                   optimal_quota, optimal_weight)
from wvote.rules import winning_profiles

profiles = np.array([0.9, 0.9, 0.6, 0.6, 0.6])
symmetric = WelfareParams(alpha=0.5, loss_reject_valid=1.0, loss_accept_invalid=1.0)

w = optimal_weight(profiles)
print("raw weights       ", np.round(w, 3))
print("normalized weights", np.round(normalize_weights(w), 3))

# %% [markdown]
# With a neutral prior and equal losses the optimal quota is exactly 1/2, so
# the rule is a simple weighted majority.

# %%
rules = {
    "2/3 vote count": DecisionRule.unweighted(2 / 3),
    "log-odds, optimal quota": DecisionRule.optimal(profiles, symmetric),
    "log-odds, 2/3 quota": DecisionRule.weighted(w, 2 / 3),
    "(1/3,1/3,1/9,1/9,1/9), 2/3": DecisionRule.weighted([1 / 3, 1 / 3, 1 / 9, 1 / 9, 1 / 9], 2 / 3),
}
for name, rule in rules.items():
    print(f"{name:28s} quota {rule.quota:.3f}  P(approve valid) = "
          f"{consensus_probability_exact(profiles, rule):.4f}")

# %% [markdown]
# The vote count does worse than the weakest validator on its own.  The
# weighted rule approves whenever both strong validators approve, and
# otherwise lets the weak validators break the tie.

# %%
for x in winning_profiles(rules["log-odds, optimal quota"], 5):
    print(x)

# %% [markdown]
# ## Relative power depends on the rest of the committee
#
# The same 0.99 validator carries very different normalized weight
# depending on who else sits on the committee, and the optimal quota moves
# with the total weight.  Here the losses are asymmetric: appending an
# invalid block costs 12, rejecting a valid one costs 0.01.

# %%
asymmetric = WelfareParams(alpha=0.5, loss_reject_valid=1e-2, loss_accept_invalid=12.0)
committees = {
    "0.99 + 0.70 x 9": [0.99] + [0.7] * 9,
    "0.99 + 0.95 x 9": [0.99] + [0.95] * 9,
    "0.99 x 2 + 0.95 + 0.70 x 7": [0.99, 0.99, 0.95] + [0.7] * 7,
}
for name, ps in committees.items():
    wc = optimal_weight(np.array(ps))
    print(f"{name:28s} share of the 0.99 validator {normalize_weights(wc)[0]:.3f}  "
          f"quota {optimal_quota(wc, asymmetric):.3f}")
