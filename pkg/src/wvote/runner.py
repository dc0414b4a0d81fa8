"""Execute parsed configs and write CSV/JSON results plus a run manifest."""

from __future__ import annotations

import csv
import hashlib
import json
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .config import CommitteeSpec, RunSpec, TrajectorySpec
from .core import BlockValidity
from .mwu import (BehaviorMix, make_schedule, run_trajectory, steps_to_cap, sustains_profile,
                  tolerance_constants, unclamped_log_growth)
from .rules import (DecisionRule, consensus_probability_exact, expected_welfare,
                    normalize_weights, optimal_quota_unclamped, optimal_weight)
from .sim import ScenarioConfig, approval_series, recovery_slot, run_scenario

MANIFEST = "manifest.json"


def fmt(x) -> str:
    """Shortest text that parses back to the identical float."""
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([v if isinstance(v, str) else fmt(v) for v in row])


def write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _simulate(cfg: ScenarioConfig, out: Path) -> dict:
    records = run_scenario(cfg)
    write_csv(out / "per_slot.csv",
              ["slot", "weighted_approval_fraction", "outcome", "committed_count"],
              ((r.slot, r.weighted_approval_fraction, int(r.outcome), r.committed_count)
               for r in records))
    write_csv(out / "profiles.csv", ["slot", "validator_id", "profile"],
              ((r.slot, i, p) for r in records for i, p in enumerate(r.profiles)))
    approval = approval_series(records)
    final = records[-1].profiles
    return {
        "recovery_slot": recovery_slot(records),
        "committed": records[-1].committed_count,
        "skipped": len(records) - records[-1].committed_count,
        "final_approval_fraction": float(approval[-1]),
        "fallback_slots": [r.slot for r in records if r.fallback],
        "suspended": sorted(i for r in records for i in r.suspended),
        "final_profiles": [float(p) for p in final],
        "files": ["per_slot.csv", "profiles.csv"],
    }


def trajectory_for(spec: TrajectorySpec) -> tuple[np.ndarray, list]:
    rng = np.random.default_rng(spec.seed)
    schedule, phase = [], []
    for k, (mix, length) in enumerate(spec.phases):
        schedule += make_schedule(mix, length, spec.schedule, rng)
        phase += [k] * length
    return run_trajectory(spec.p0, schedule, spec.update), list(zip(phase, schedule))


def _trajectory(spec: TrajectorySpec, out: Path) -> dict:
    traj, steps = trajectory_for(spec)
    write_csv(out / "trajectory.csv", ["step", "phase", "vote_class", "profile"],
              ((t, ph, cls.value, p) for t, ((ph, cls), p) in enumerate(zip(steps, traj))))
    c1, c2 = tolerance_constants(spec.update)
    phases = []
    for k, (mix, length) in enumerate(spec.phases):
        idx = [t for t, (ph, _) in enumerate(steps) if ph == k]
        seg = traj[idx] if idx else np.array([])
        phases.append({
            "q": mix.q, "q1": mix.q1, "length": length,
            "sustains": sustains_profile(mix, spec.update),
            "unclamped_log_growth_per_slot": unclamped_log_growth(mix, spec.update),
            "end_profile": float(seg[-1]) if seg.size else None,
        })
    return {
        "p0": spec.p0, "final_profile": float(traj[-1]) if traj.size else spec.p0,
        "min_profile": float(traj.min()) if traj.size else spec.p0,
        "steps_to_cap": steps_to_cap(traj, spec.update),
        "c1": c1, "c2": c2, "phases": phases, "files": ["trajectory.csv"],
    }


def committee_report(profiles, spec: CommitteeSpec) -> dict:
    p = np.asarray(profiles, dtype=float)
    w = np.atleast_1d(optimal_weight(p))
    q_raw = optimal_quota_unclamped(w, spec.welfare)
    report = {
        "profiles": p.tolist(), "raw_weights": w.tolist(),
        "normalized_weights": normalize_weights(w).tolist(),
        "quota_unclamped": q_raw, "quota": min(1.0, max(0.5, q_raw)),
    }
    if p.size <= 20:
        rules = {
            "optimal": DecisionRule.optimal(p, spec.welfare),
            "unweighted": DecisionRule.unweighted(spec.quota),
            "weighted_fixed_quota": DecisionRule.weighted(w, spec.quota),
        }
        report["p_approve_valid"] = {k: consensus_probability_exact(p, r, BlockValidity.VALID)
                                     for k, r in rules.items()}
        report["p_reject_invalid"] = {k: consensus_probability_exact(p, r, BlockValidity.INVALID)
                                      for k, r in rules.items()}
        report["expected_welfare"] = {k: expected_welfare(p, r, spec.welfare)
                                      for k, r in rules.items()}
    return report


def _committee(spec: CommitteeSpec, out: Path) -> dict:
    reports = {name: committee_report(ps, spec) for name, ps in spec.committees}
    write_csv(out / "committees.csv",
              ["committee", "member", "profile", "raw_weight", "normalized_weight"],
              ((name, i, p, w, wn) for name, rep in reports.items()
               for i, (p, w, wn) in enumerate(zip(rep["profiles"], rep["raw_weights"],
                                                 rep["normalized_weights"]))))
    return {"committees": reports, "files": ["committees.csv"]}


_RUNNERS = {"simulate": _simulate, "trajectory": _trajectory, "committee": _committee}


def _gnuplot(run: RunSpec, out: Path) -> str:
    lines = ["set datafile separator ','", "set key autotitle columnhead"]
    if run.mode == "simulate":
        lines += ["set xlabel 'slot'", "set ylabel 'weighted approval fraction'",
                  "plot " + ", ".join(
                      [f"'{(Path(lbl) / 'per_slot.csv').as_posix()}' using 1:2 with lines title '{lbl or run.name}'"
                       for lbl, _ in run.variants] + ["2/3 with lines dashtype 2 title '2/3'"])]
    elif run.mode == "trajectory":
        lines += ["set xlabel 'slot'", "set ylabel 'voting profile'",
                  "plot " + ", ".join(
                      f"'{(Path(lbl) / 'trajectory.csv').as_posix()}' using 1:4 with lines title '{lbl or run.name}'"
                      for lbl, _ in run.variants)]
    else:
        lines += ["set style data histograms",
                  "plot 'committees.csv' using 5:xtic(1) title 'normalized weight'"]
    (out / "plot.gp").write_text("\n".join(lines) + "\n", encoding="utf-8")
    return "plot.gp"


def _digest(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def execute(run: RunSpec, out: str | Path, gnuplot: bool = False) -> dict:
    """Run every variant of ``run`` under ``out`` and write the manifest.

    Single-variant runs write directly into ``out``; otherwise each variant
    gets a subdirectory named by its label.
    """
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    started = datetime.now(timezone.utc).isoformat()
    outputs = []
    summaries = {}
    for label, spec in run.variants:
        vdir = out / label if label else out
        vdir.mkdir(parents=True, exist_ok=True)
        summary = _RUNNERS[run.mode](spec, vdir)
        summary["variant"] = label or "main"
        summary["config"] = run.resolved["variants"][label or "main"]
        summary["manifest"] = Path("..", MANIFEST).as_posix() if label else MANIFEST
        write_json(vdir / "summary.json", summary)
        summaries[label or "main"] = summary
        outputs += [(vdir / f).relative_to(out).as_posix() for f in summary["files"] + ["summary.json"]]
    if gnuplot:
        outputs.append(_gnuplot(run, out))
    manifest = {
        "tool": "wvote", "version": __version__,
        "name": run.name, "mode": run.mode, "seed": run.resolved["seed"],
        "config": run.resolved,
        "started": started, "finished": datetime.now(timezone.utc).isoformat(),
        "outputs": [{"path": p, "sha256": _digest(out / p)} for p in outputs],
    }
    write_json(out / MANIFEST, manifest)
    return {"manifest": manifest, "summaries": summaries}
