"""Command-line interface.

Exit codes: 0 success, 2 usage or configuration error, 3 runtime error
(for example an unwritable output directory).
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, bundled_configs, load_config, parse_list, parse_number
from .core import BlockValidity, WelfareParams, as_votes
from .mwu import BehaviorMix, UpdateParams, minimum_correct_fraction, sustains_profile, tolerance_constants
from .rules import (DecisionRule, binomial_tail, consensus_probability_exact,
                    consensus_probability_mc, normalize_weights, optimal_quota_unclamped,
                    optimal_weight)
from .runner import execute, fmt

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3
OUTPUT_ENV = "WVOTE_OUTPUT_DIR"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_CONFIG)


def _profiles(args) -> np.ndarray:
    text = " ".join(args.profiles or [])
    if getattr(args, "file", None):
        text += " " + Path(args.file).read_text(encoding="utf-8")
    values = parse_list(text)
    if not values:
        raise ConfigError("no profiles given")
    for v in values:
        if not (0.0 < v < 1.0):
            raise ConfigError(f"profile {v!r} is outside the open interval (0, 1)")
    return np.array(values)


def _welfare(args) -> WelfareParams:
    return WelfareParams(args.alpha, args.lr, args.la)


def _print_table(header, rows):
    cells = [header] + [[c if isinstance(c, str) else f"{c:.6f}" for c in row] for row in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    for r in cells:
        print("  ".join(c.rjust(w) for c, w in zip(r, widths)))


def cmd_weights(args) -> int:
    p = _profiles(args)
    w = np.atleast_1d(optimal_weight(p))
    wn = normalize_weights(w) if w.sum() > 0 else np.full_like(w, np.nan)
    rows = list(zip(p, w, wn))
    if args.csv:
        print("profile,raw_weight,normalized_weight")
        for row in rows:
            print(",".join(fmt(v) for v in row))
    else:
        _print_table(["profile", "raw_weight", "normalized_weight"], rows)
    return EXIT_OK


def cmd_quota(args) -> int:
    w = np.atleast_1d(optimal_weight(_profiles(args)))
    raw = optimal_quota_unclamped(w, _welfare(args))
    print(f"total_weight      {w.sum():.6f}")
    print(f"quota_unclamped   {raw:.6f}")
    print(f"quota             {min(1.0, max(0.5, raw)):.6f}")
    return EXIT_OK


def _rule(args, p) -> DecisionRule:
    if args.rule == "optimal":
        return DecisionRule.optimal(p, _welfare(args))
    if args.rule == "majority":
        return DecisionRule.unweighted(args.quota)
    w = parse_list(args.weights) if args.weights else optimal_weight(p)
    return DecisionRule.weighted(np.atleast_1d(w), args.quota)


def cmd_prob(args) -> int:
    p = _profiles(args)
    rule = _rule(args, p)
    validity = BlockValidity.VALID if args.validity == "valid" else BlockValidity.INVALID
    print(f"rule              {args.rule} (quota {rule.quota:.6f})")
    if args.method == "exact":
        prob = consensus_probability_exact(p, rule, validity)
        print(f"probability       {prob:.6f}")
    else:
        prob, hw = consensus_probability_mc(p, rule, validity, args.trials, args.seed)
        print(f"probability       {prob:.6f} +/- {hw:.6f} (95%, {args.trials} trials)")
    if args.condorcet_check:
        if not (np.all(p == p[0]) and p.size % 2 == 1):
            raise ConfigError("--condorcet-check needs an odd number of identical profiles")
        n = p.size
        tail = binomial_tail(float(p[0]), n, n // 2 + 1)
        simple = consensus_probability_exact(p, DecisionRule.unweighted(0.5), validity)
        print(f"binomial_tail     {tail:.15f}")
        print(f"simple_majority   {simple:.15f}")
        print(f"abs_difference    {abs(tail - simple):.3e}")
    return EXIT_OK


def cmd_decide(args) -> int:
    votes = as_votes([int(v) for v in parse_list(args.votes)])
    if args.weights:
        w = np.array(parse_list(args.weights))
    elif args.profiles:
        w = np.atleast_1d(optimal_weight(_profiles(args)))
    else:
        w = np.ones(votes.size)
    if args.quota is None:
        quota = min(1.0, max(0.5, optimal_quota_unclamped(w, _welfare(args))))
    else:
        quota = parse_number(args.quota)
    outcome = DecisionRule.weighted(w, quota).decide(votes)
    frac = float(normalize_weights(w) @ ((votes + 1) // 2))
    print(f"weighted_approval {frac:.6f}")
    print(f"quota             {quota:.6f}")
    print(f"outcome           {outcome.name.lower()}")
    return EXIT_OK


def cmd_tolerance(args) -> int:
    params = UpdateParams(delta=args.delta, loss_reject_valid=args.lr, loss_accept_invalid=args.la)
    c1, c2 = tolerance_constants(params)
    print(f"c1                {c1:.6f}")
    print(f"c2                {c2:.6f}")
    print(f"min_correct_q     {minimum_correct_fraction(params):.6f}")
    if args.q is not None:
        mix = BehaviorMix(args.q, args.q1)
        verdict = "sustains" if sustains_profile(mix, params) else "degrades"
        print(f"required_q        {c1 * (1 - c2 * mix.q1):.6f}")
        print(f"verdict           {verdict}")
    return EXIT_OK


def _resolve_config(name: str) -> Path:
    path = Path(name)
    if path.exists():
        return path
    bundled = bundled_configs()
    if name in bundled:
        return bundled[name]
    raise ConfigError(f"no config file {name!r} and no bundled config of that name "
                      f"(bundled: {', '.join(bundled)})")


def _out_dir(args, default_name: str) -> Path:
    if args.out:
        return Path(args.out)
    return Path(os.environ.get(OUTPUT_ENV, "wvote-out")) / default_name


def cmd_simulate(args) -> int:
    path = _resolve_config(args.config)
    run = load_config(path, seed=args.seed)
    out = _out_dir(args, run.name)
    try:
        result = execute(run, out, gnuplot=args.gnuplot_script)
    except OSError as e:
        print(f"error: cannot write results to {out}: {e.strerror}", file=sys.stderr)
        return EXIT_RUNTIME
    for label, s in result["summaries"].items():
        extra = f" recovery_slot={s['recovery_slot']}" if "recovery_slot" in s else ""
        print(f"{run.name}/{label}:{extra} -> {out}")
    return EXIT_OK


def _sweep_one(job):
    path, out, seed, gnuplot = job
    run = load_config(path, seed=seed)
    execute(run, out, gnuplot=gnuplot)
    return run.name, str(out)


def cmd_sweep(args) -> int:
    paths = [_resolve_config(c) for c in args.configs]
    runs = [load_config(p, seed=args.seed) for p in paths]  # validate everything up front
    base = Path(args.out) if args.out else Path(os.environ.get(OUTPUT_ENV, "wvote-out"))
    names = [r.name for r in runs]
    if len(set(names)) != len(names):
        raise ConfigError(f"sweep configs must have distinct names, got {names}")
    jobs = [(p, base / r.name, args.seed, args.gnuplot_script) for p, r in zip(paths, runs)]
    try:
        if args.jobs == 1:
            done = [_sweep_one(j) for j in jobs]
        else:
            with ProcessPoolExecutor(max_workers=args.jobs) as pool:
                done = list(pool.map(_sweep_one, jobs))
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    for name, out in done:
        print(f"{name} -> {out}")
    return EXIT_OK


def cmd_configs(args) -> int:
    for name, path in bundled_configs().items():
        print(f"{name:12s} {path}")
    return EXIT_OK


def _add_welfare(p):
    p.add_argument("--alpha", type=parse_number, default=0.5, help="prior probability of an invalid block")
    p.add_argument("--lr", type=parse_number, default=1e-2, help="loss for rejecting a valid block")
    p.add_argument("--la", type=parse_number, default=12.0, help="loss for approving an invalid block")


def _add_profiles(p):
    p.add_argument("profiles", nargs="*",
                   help="voting profiles, e.g. 0.9 0.9 0.6*3")
    p.add_argument("--file", help="read further profiles from a whitespace/comma separated file")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="wvote",
        description="Weighted majority voting for proof-of-stake committees.",
        epilog="exit codes: 0 success, 2 usage/config error, 3 runtime error. "
               f"Output directories default to ${OUTPUT_ENV} or ./wvote-out.",
    )
    parser.add_argument("--version", action="version", version=f"wvote {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("weights", help="log-odds weights of a committee")
    _add_profiles(p)
    p.add_argument("--csv", action="store_true", help="print CSV instead of a table")
    p.set_defaults(func=cmd_weights)

    p = sub.add_parser("quota", help="welfare-optimal quota")
    _add_profiles(p)
    _add_welfare(p)
    p.set_defaults(func=cmd_quota)

    p = sub.add_parser("prob", help="probability of a correct consensus outcome")
    _add_profiles(p)
    _add_welfare(p)
    p.add_argument("--rule", choices=["optimal", "majority", "weighted"], default="optimal")
    p.add_argument("--quota", type=parse_number, default=2 / 3,
                   help="quota for --rule majority/weighted (default 2/3)")
    p.add_argument("--weights", help="explicit weights for --rule weighted (default log-odds)")
    p.add_argument("--validity", choices=["valid", "invalid"], default="valid")
    p.add_argument("--method", choices=["exact", "mc"], default="exact")
    p.add_argument("--trials", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--condorcet-check", action="store_true",
                   help="compare simple majority with the binomial tail (identical profiles)")
    p.set_defaults(func=cmd_prob)

    p = sub.add_parser("decide", help="evaluate one weighted decision")
    p.add_argument("--votes", required=True, help="votes as +1/-1, e.g. 1,1,-1,-1,-1")
    p.add_argument("--profiles", nargs="+", help="profiles; weights become their log-odds")
    p.add_argument("--weights", help="explicit weights")
    p.add_argument("--quota", help="quota; default is the welfare-optimal one")
    _add_welfare(p)
    p.set_defaults(func=cmd_decide)

    p = sub.add_parser("tolerance", help="fault-tolerance constants and verdict")
    p.add_argument("--delta", type=parse_number, default=1e-3)
    p.add_argument("--lr", type=parse_number, default=1e-2)
    p.add_argument("--la", type=parse_number, default=12.0)
    p.add_argument("--q", type=parse_number, help="fraction of correct votes")
    p.add_argument("--q1", type=parse_number, default=0.0, help="fraction of abstentions on valid blocks")
    p.set_defaults(func=cmd_tolerance)

    p = sub.add_parser("simulate", help="run one config file or bundled config")
    p.add_argument("config", help="path to an .ini config, or a bundled name such as fig2")
    p.add_argument("--out", help="output directory")
    p.add_argument("--seed", type=int, default=None, help="override the config seed (config default 0)")
    p.add_argument("--gnuplot-script", action="store_true", help="also write plot.gp")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="run several configs concurrently")
    p.add_argument("configs", nargs="+")
    p.add_argument("--out", help="parent output directory; each config gets <out>/<name>")
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--gnuplot-script", action="store_true")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("configs", help="list bundled configs")
    p.set_defaults(func=cmd_configs)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
