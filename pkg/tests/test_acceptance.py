"""Acceptance criteria, one check per criterion at its stated tolerance.

Each check returns ``(passed, detail)``.  Under pytest every result is
also collected into a PASS/FAIL line printed in the terminal summary; run
this file directly (``python3 tests/test_acceptance.py``) to print the lines
without pytest.
"""

import filecmp
import math
import sys
import tempfile
from pathlib import Path

import numpy as np
import pytest

import oracles
from wvote.cli import main as cli_main
from wvote.core import WelfareParams
from wvote.mwu import (BehaviorMix, UpdateParams, make_schedule, run_trajectory, steps_to_cap,
                       sustains_profile, tolerance_constants)
from wvote.rules import (DecisionRule, consensus_probability_exact, normalize_weights,
                         optimal_quota, optimal_weight)
from wvote.sim import ScenarioConfig, approval_series, cap_slot, recovery_slot, run_scenario

EX1 = [0.9, 0.9, 0.6, 0.6, 0.6]
EX3 = {1: [0.99] + [0.7] * 9, 2: [0.99] + [0.95] * 9, 3: [0.99, 0.99, 0.95] + [0.7] * 7}
ASYMMETRIC = WelfareParams(0.5, 1e-2, 12.0)
SYMMETRIC = WelfareParams(0.5, 1.0, 1.0)


def _close(x, target, tol):
    return abs(x - target) <= tol


def ac01_example1_unweighted():
    p = consensus_probability_exact(EX1, DecisionRule.unweighted(2 / 3))
    return _close(p, 0.5638, 0.005), f"P = {p:.4f} (target 0.5638 +/- 0.005)"


def ac02_example1_optimal():
    rule = DecisionRule.optimal(EX1, SYMMETRIC)
    p_opt = consensus_probability_exact(EX1, rule)
    w = normalize_weights(optimal_weight(np.array(EX1)))
    p_w = consensus_probability_exact(EX1, DecisionRule.weighted(w, 2 / 3))
    p_v = consensus_probability_exact(EX1, DecisionRule.weighted([1 / 3, 1 / 3, 1 / 9, 1 / 9, 1 / 9], 2 / 3))
    ok = (rule.quota == 0.5 and _close(p_opt, 0.9266, 0.005)
          and np.all(np.abs(w - [0.392, 0.392, 0.072, 0.072, 0.072]) <= 0.001)
          and _close(p_w, 0.81, 0.005) and _close(p_v, 0.85, 0.005))
    return ok, (f"optimal {p_opt:.4f}, weights {np.round(w, 4).tolist()}, "
                f"2/3 with w {p_w:.4f}, 2/3 with v {p_v:.4f}")


def ac03_weights():
    a, b = optimal_weight(0.9), optimal_weight(0.99)
    ok = _close(a, 2.197, 0.001) and _close(b, 4.595, 0.001) and b / a > 2
    return ok, f"w(0.9) = {a:.4f}, w(0.99) = {b:.4f}, ratio {b / a:.3f}"


def ac04_example3():
    quotas, first = {}, {}
    for k, ps in EX3.items():
        w = optimal_weight(np.array(ps))
        quotas[k] = float(optimal_quota(w, ASYMMETRIC))
        first[k] = float(normalize_weights(w)[0])
    ok = (all(_close(quotas[k], t, 0.002) for k, t in zip((1, 2, 3), (0.604, 0.540, 0.570)))
          and all(_close(first[k], t, 0.002) for k, t in zip((1, 2, 3), (0.376, 0.148, 0.254)))
          and _close(normalize_weights(optimal_weight(np.array(EX3[3])))[2], 0.163, 0.002))
    return ok, (f"quotas {[round(quotas[k], 4) for k in (1, 2, 3)]}, "
                f"w'_1 {[round(first[k], 4) for k in (1, 2, 3)]}")


def ac05_optimal_rule_oracle(n_committees=500):
    # weighted rule with the unclamped quota vs the per-profile welfare comparison
    rng = np.random.default_rng(20240601)
    mismatches = ties = compared = 0
    for _ in range(n_committees):
        n = int(rng.integers(1, 9))
        p = rng.uniform(0.5, 0.99, n)
        alpha = rng.uniform(0.1, 0.9)
        lr, la = sorted(rng.uniform(0.1, 20, 2))
        params = WelfareParams(alpha, lr, la)
        rule = DecisionRule.optimal(p, params, clamp=False)
        for x in oracles.profiles_pm1(n):
            a, r = oracles.welfare_sides(x, p, alpha, lr, la)
            if abs(a - r) <= 1e-9 * max(a, r):
                ties += 1
                continue
            compared += 1
            mismatches += int(rule.decide(x)) != (1 if a > r else -1)
    return mismatches == 0, (f"{n_committees} committees, {compared} profiles compared, "
                             f"{ties} ties exempt, {mismatches} mismatches")


def ac06_sustain_equivalence(T=10_000):
    grid = np.round(np.arange(0, 1.0001, 0.05), 10)
    checked = disagreements = skipped = 0
    for delta in (1e-3, 1e-2, 1e-1):
        for la in (1.0, 12.0):
            for lr in (1e-2, 0.5):
                if lr >= la:
                    continue
                params = UpdateParams(delta=delta, loss_reject_valid=lr, loss_accept_invalid=la)
                c1, c2 = tolerance_constants(params)
                for q in grid:
                    for q1 in grid[grid <= 1 - q + 1e-12]:
                        if abs(q - c1 * (1 - c2 * q1)) <= 1e-12:
                            skipped += 1
                            continue
                        growth = oracles.log_growth_closed_form(q, q1, delta, lr, la, T)
                        checked += 1
                        disagreements += sustains_profile(BehaviorMix(q, min(q1, 1 - q)), params) != (growth >= 0)
    return disagreements == 0, f"{checked} grid points, {skipped} boundary, {disagreements} disagreements"


def ac07_recovery_shape(horizon=600):
    lines, ok = [], True
    for v in (0.4, 0.5, 0.6):
        crossings = {}
        for delta in (1e-3, 2e-3):
            cfg = ScenarioConfig(adversary_fraction=v, horizon=horizon,
                                 update=UpdateParams(delta=delta))
            recs = run_scenario(cfg)
            a = approval_series(recs)
            inc = np.diff(a)
            monotone = bool(np.all(inc >= 0))
            crossings[delta] = recovery_slot(recs)
            cs = cap_slot(recs, range(cfg.n_adversarial, cfg.population), cfg.update.cap)
            bend = False
            if cs is not None and 6 <= cs < len(inc) - 5:
                before, after = inc[cs - 6:cs - 1].mean(), inc[cs:cs + 5].mean()
                bend = after < 0.01 * before
            ok &= monotone and crossings[delta] is not None and bend
            lines.append(f"v={v} d={delta:g}: monotone={monotone} cross={crossings[delta]} "
                         f"cap={cs} bend={bend}")
        earlier = None not in crossings.values() and crossings[2e-3] < crossings[1e-3]
        ok &= earlier
    return ok, "; ".join(lines)


def _r_squared(y):
    t = np.arange(y.size)
    fit = np.polyval(np.polyfit(t, y, 1), t)
    return 1 - np.sum((y - fit) ** 2) / np.sum((y - y.mean()) ** 2)


def ac08_trajectory_shape():
    faulty = make_schedule(BehaviorMix(0.8, 0.1), 10_000, "periodic")
    recover = make_schedule(BehaviorMix(0.95, 0.05), 5_000, "periodic")
    ok, parts, steps = True, [], {}
    for delta in (1e-2, 2e-2, 1e-3):
        params = UpdateParams(delta=delta)
        down = run_trajectory(0.9, faulty, params)
        declining = down[-1] < 0.9 and down[-1000:].mean() < down[:1000].mean()
        if delta != 1e-3:
            ok &= declining
            parts.append(f"d={delta:g} decline {0.9:.2f}->{down[-1]:.3f}")
        up = run_trajectory(down[-1], recover, params)
        steps[delta] = steps_to_cap(up, params)
        if delta != 1e-2:
            r2 = _r_squared(up[:steps[delta]]) if steps[delta] and steps[delta] > 2 else float("nan")
            ok &= steps[delta] is not None and r2 >= 0.98
            parts.append(f"d={delta:g} cap after {steps[delta]} (R^2 {r2:.4f})")
    ok &= steps[2e-2] < steps[1e-3]
    return ok, "; ".join(parts)


def ac09_condorcet():
    worst = 0.0
    for n in range(1, 16, 2):
        for p in (0.51, 0.6, 0.75, 0.9, 0.99):
            exact = consensus_probability_exact([p] * n, DecisionRule.unweighted(0.5))
            worst = max(worst, abs(exact - oracles.binomial_tail(p, n, n // 2 + 1)))
    return worst <= 1e-12, f"max |exact - binomial tail| = {worst:.2e}"


def ac10_determinism():
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        codes = [cli_main(["simulate", "fig2", "--out", str(tmp / d)]) for d in ("a", "b")]
        csvs = sorted(p.relative_to(tmp / "a") for p in (tmp / "a").rglob("*.csv"))
        same = all(filecmp.cmp(tmp / "a" / c, tmp / "b" / c, shallow=False) for c in csvs)
    return codes == [0, 0] and len(csvs) == 4 and same, f"{len(csvs)} CSV files compared, identical={same}"


CRITERIA = [
    ("AC1 example 1 unweighted probability", ac01_example1_unweighted),
    ("AC2 example 1 optimal rule", ac02_example1_optimal),
    ("AC3 log-odds weights", ac03_weights),
    ("AC4 example 3 quotas and weights", ac04_example3),
    ("AC5 weighted rule equals welfare oracle", ac05_optimal_rule_oracle),
    ("AC6 sustain condition equals trajectory sign", ac06_sustain_equivalence),
    ("AC7 blocking recovery shape", ac07_recovery_shape),
    ("AC8 profile decline and recovery shape", ac08_trajectory_shape),
    ("AC9 simple majority equals binomial tail", ac09_condorcet),
    ("AC10 byte-identical simulate reruns", ac10_determinism),
]


def _line(name, ok, detail):
    return f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}"


@pytest.mark.parametrize("name,check", CRITERIA, ids=[c[0].split()[0] for c in CRITERIA])
def test_criterion(name, check):
    from conftest import ACCEPTANCE_LINES
    ok, detail = check()
    line = _line(name, ok, detail)
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


if __name__ == "__main__":
    results = [(name, *check()) for name, check in CRITERIA]
    for r in results:
        print(_line(*r))
    sys.exit(0 if all(ok for _, ok, _ in results) else 1)
