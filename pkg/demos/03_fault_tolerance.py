# %% [markdown]
# # How much misbehaviour does a profile tolerate?
#
# A validator votes correctly a fraction ``q`` of the time, skips valid
# blocks a fraction ``q1`` of the time and approves invalid blocks the rest
# of the time.  Its profile keeps growing exactly when
# ``q >= c1 * (1 - c2 * q1)``.

# %%
import numpy as np

from wvote import BehaviorMix, UpdateParams, make_schedule, run_trajectory, sustains_profile
from wvote.mwu import minimum_correct_fraction, steps_to_cap, tolerance_constants

params = UpdateParams(delta=1e-3, loss_reject_valid=1e-2, loss_accept_invalid=12.0)
c1, c2 = tolerance_constants(params)
print(f"c1 = {c1:.4f}, c2 = {c2:.5f}, q never below {minimum_correct_fraction(params):.4f}")

# %% [markdown]
# Skipping votes is cheap, approving invalid blocks is not.  Each row below
# fixes the abstention rate and shows the smallest correct-vote share that
# still sustains the profile.

# %%
for q1 in (0.0, 0.05, 0.2, 0.5, 0.9):
    needed = c1 * (1 - c2 * q1)
    print(f"q1 = {q1:.2f}: need q >= {needed:.4f} "
          f"(tolerates {max(0.0, 1 - q1 - needed):.4f} invalid approvals)")

# %% [markdown]
# ## A faulty stretch followed by recovery
#
# 80% correct, 10% offline, 10% approving invalid blocks drags a 0.9 profile
# down to the floor.  Switching to 95% correct with 5% offline slots brings
# it back to the cap, almost linearly.

# %%
faulty = make_schedule(BehaviorMix(0.8, 0.1), 10_000, "periodic")
recover = make_schedule(BehaviorMix(0.95, 0.05), 3_000, "periodic")
print("sustains faulty mix:", sustains_profile(BehaviorMix(0.8, 0.1), params))
for delta in (1e-2, 2e-2, 1e-3):
    p = UpdateParams(delta=delta)
    down = run_trajectory(0.9, faulty, p)
    up = run_trajectory(down[-1], recover, p)
    print(f"delta={delta:g}: after the faulty stretch {down[-1]:.3f}, "
          f"back at the cap after {steps_to_cap(up, p)} slots")

# %%
up = run_trajectory(0.5, recover, UpdateParams(delta=1e-3))
n = steps_to_cap(up, UpdateParams(delta=1e-3))
t = np.arange(n)
slope, intercept = np.polyfit(t, up[:n], 1)
print(f"linear fit over {n} slots: slope {slope:.2e}/slot, "
      f"max deviation {np.max(np.abs(up[:n] - (slope * t + intercept))):.3f}")
