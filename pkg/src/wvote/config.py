"""Experiment configuration files.

Configs are INI files read with :mod:`configparser`.  Every key is optional;
the defaults reproduce the 40%-blocking recovery run (``alpha = 1/2``,
``l_r = 0.01``, ``l_a = 12``, ``delta = 0.001``, fixed 2/3 quota, 100
validators at profile 0.9).  Grammar::

    [scenario]
    name = fig2
    mode = simulate            ; simulate | trajectory | committee
    horizon = 600              ; slots (simulate mode)
    seed = 0

    [population]
    size = 100
    initial_profile = 0.9      ; one value, or a list (see below)
    stake = 1
    committee_size =           ; empty: the whole active population
    committee_mode = all       ; all | persistent | resample

    [adversary]
    fraction = 0.4             ; the first round(fraction * size) ids
    behavior = blocked         ; blocked | honest | mixed
    q = 0.8                    ; mixed only
    q1 = 0.1
    schedule = periodic        ; periodic | seeded_random

    [welfare]
    alpha = 0.5
    loss_reject_valid = 0.01
    loss_accept_invalid = 12

    [update]
    delta = 0.001, 0.002       ; a list runs one variant per value
    grace_period = 1
    cap_margin = 1e-5
    suspension = false

    [rule]
    quota_policy = fixed       ; fixed | optimal
    quota = 2/3

    [blocks]
    validity_policy = all_valid   ; all_valid | prior

    [trajectory]               ; trajectory mode
    p0 = 0.9
    phases = 0.8:0.1:10000, 0.95:0.05:3000   ; q:q1:length per phase
    schedule = periodic        ; periodic | seeded_random

    [committee]                ; committee mode, one key per committee
    c1 = 0.99, 0.7*9

Lists are comma or whitespace separated; ``x*k`` repeats ``x`` k times;
numbers may be written as fractions such as ``2/3``.
"""

from __future__ import annotations

import configparser
from dataclasses import asdict, dataclass, field, replace
from fractions import Fraction
from pathlib import Path
from typing import Any

from .core import ConfigError, WelfareParams
from .mwu import BehaviorMix, UpdateParams
from .sim import BehaviorPolicy, ScenarioConfig

MODES = ("simulate", "trajectory", "committee")

_KNOWN = {
    "scenario": {"name", "mode", "horizon", "seed"},
    "population": {"size", "initial_profile", "stake", "committee_size", "committee_mode"},
    "adversary": {"fraction", "behavior", "q", "q1", "schedule"},
    "welfare": {"alpha", "loss_reject_valid", "loss_accept_invalid"},
    "update": {"delta", "grace_period", "cap_margin", "suspension"},
    "rule": {"quota_policy", "quota"},
    "blocks": {"validity_policy"},
    "trajectory": {"p0", "phases", "schedule"},
    "committee": None,
}


def parse_number(text: str) -> float:
    try:
        return float(Fraction(text.strip()))
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"not a number: {text!r}") from None


def parse_list(text: str) -> list[float]:
    """Parse ``"0.99, 0.7*9"`` style lists."""
    out: list[float] = []
    for tok in text.replace(",", " ").split():
        if "*" in tok:
            value, count = tok.split("*", 1)
            try:
                k = int(count)
            except ValueError:
                raise ConfigError(f"bad repeat count in {tok!r}") from None
            out += [parse_number(value)] * k
        else:
            out.append(parse_number(tok))
    return out


@dataclass(frozen=True)
class TrajectorySpec:
    p0: float
    phases: tuple[tuple[BehaviorMix, int], ...]
    schedule: str
    update: UpdateParams
    seed: int = 0


@dataclass(frozen=True)
class CommitteeSpec:
    committees: tuple[tuple[str, tuple[float, ...]], ...]
    welfare: WelfareParams
    quota: float = 2 / 3


@dataclass
class RunSpec:
    name: str
    mode: str
    variants: list[tuple[str, Any]]
    resolved: dict = field(default_factory=dict)


class _Reader:
    def __init__(self, cp: configparser.ConfigParser):
        self.cp = cp

    def raw(self, section, key, default=None):
        if self.cp.has_option(section, key):
            v = self.cp.get(section, key).strip()
            return v if v != "" else default
        return default

    def num(self, section, key, default):
        v = self.raw(section, key)
        if v is None:
            return default
        try:
            return parse_number(v)
        except ConfigError as e:
            raise ConfigError(f"[{section}] {key}: {e}") from None

    def integer(self, section, key, default):
        v = self.num(section, key, default)
        if v is None:
            return None
        if v != int(v):
            raise ConfigError(f"[{section}] {key}: expected an integer, got {v!r}")
        return int(v)

    def nums(self, section, key, default):
        v = self.raw(section, key)
        if v is None:
            return default
        try:
            return parse_list(v)
        except ConfigError as e:
            raise ConfigError(f"[{section}] {key}: {e}") from None

    def flag(self, section, key, default):
        if self.raw(section, key) is None:
            return default
        try:
            return self.cp.getboolean(section, key)
        except ValueError:
            raise ConfigError(f"[{section}] {key}: expected true/false") from None


def _check_keys(cp: configparser.ConfigParser):
    for section in cp.sections():
        if section not in _KNOWN:
            raise ConfigError(f"unknown section [{section}]")
        allowed = _KNOWN[section]
        if allowed is None:
            continue
        for key in cp.options(section):
            if key not in allowed:
                raise ConfigError(f"unknown key {key!r} in [{section}]")


def _scalar_or_tuple(values: list[float]):
    return values[0] if len(values) == 1 else tuple(values)


def parse_config(text: str, name: str = "run", seed: int | None = None) -> RunSpec:
    """Parse config text into a :class:`RunSpec`; ``seed`` overrides the file."""
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        cp.read_string(text)
    except configparser.Error as e:
        raise ConfigError(f"malformed config: {e}") from None
    _check_keys(cp)
    r = _Reader(cp)

    mode = r.raw("scenario", "mode", "simulate")
    if mode not in MODES:
        raise ConfigError(f"[scenario] mode: expected one of {MODES}, got {mode!r}")
    name = r.raw("scenario", "name", name)
    seed = r.integer("scenario", "seed", 0) if seed is None else seed

    welfare = WelfareParams(
        alpha=r.num("welfare", "alpha", 0.5),
        loss_reject_valid=r.num("welfare", "loss_reject_valid", 1e-2),
        loss_accept_invalid=r.num("welfare", "loss_accept_invalid", 12.0),
    )
    deltas = r.nums("update", "delta", [1e-3])
    if not deltas:
        raise ConfigError("[update] delta: empty list")
    base_update = dict(
        loss_reject_valid=welfare.loss_reject_valid,
        loss_accept_invalid=welfare.loss_accept_invalid,
        grace_period=r.integer("update", "grace_period", 1),
        cap_margin=r.num("update", "cap_margin", 1e-5),
        suspension_enabled=r.flag("update", "suspension", False),
    )
    updates = [UpdateParams(delta=d, **base_update) for d in deltas]

    def label(d):
        return f"delta-{d!r}" if len(updates) > 1 else ""

    if mode == "committee":
        if not cp.has_section("committee") or not cp.options("committee"):
            raise ConfigError("committee mode needs a [committee] section with at least one entry")
        committees = tuple((k, tuple(r.nums("committee", k, []))) for k in cp.options("committee"))
        for k, ps in committees:
            if not ps:
                raise ConfigError(f"[committee] {k}: empty profile list")
        spec = CommitteeSpec(committees, welfare, r.num("rule", "quota", 2 / 3))
        variants = [("", spec)]
    elif mode == "trajectory":
        phases = []
        text = r.raw("trajectory", "phases", "0.8:0.1:10000")
        for tok in text.replace(",", " ").split():
            parts = tok.split(":")
            if len(parts) != 3:
                raise ConfigError(f"[trajectory] phases: expected q:q1:length, got {tok!r}")
            mix = BehaviorMix(parse_number(parts[0]), parse_number(parts[1]))
            phases.append((mix, int(parse_number(parts[2]))))
        schedule = r.raw("trajectory", "schedule", "periodic")
        if schedule not in ("periodic", "seeded_random"):
            raise ConfigError(f"[trajectory] schedule: unknown kind {schedule!r}")
        p0 = r.num("trajectory", "p0", 0.9)
        variants = [(label(u.delta), TrajectorySpec(p0, tuple(phases), schedule, u, seed))
                    for u in updates]
    else:
        size = r.integer("population", "size", 100)
        behavior = r.raw("adversary", "behavior", "blocked")
        if behavior == "mixed":
            adv = BehaviorPolicy.mixed(
                BehaviorMix(r.num("adversary", "q", 0.8), r.num("adversary", "q1", 0.1)),
                r.raw("adversary", "schedule", "periodic"))
        elif behavior in ("blocked", "honest"):
            adv = BehaviorPolicy(behavior)
        else:
            raise ConfigError(f"[adversary] behavior: unknown kind {behavior!r}")
        base = ScenarioConfig(
            population=size,
            initial_profile=_scalar_or_tuple(r.nums("population", "initial_profile", [0.9])),
            stake=_scalar_or_tuple(r.nums("population", "stake", [1.0])),
            committee_size=r.integer("population", "committee_size", None),
            committee_mode=r.raw("population", "committee_mode", "all"),
            adversary_fraction=r.num("adversary", "fraction", 0.4),
            adversary_behavior=adv,
            welfare=welfare,
            update=updates[0],
            quota_policy=r.raw("rule", "quota_policy", "fixed"),
            fixed_quota=r.num("rule", "quota", 2 / 3),
            horizon=r.integer("scenario", "horizon", 1000),
            seed=seed,
            validity_policy=r.raw("blocks", "validity_policy", "all_valid"),
        )
        variants = [(label(u.delta), replace(base, update=u)) for u in updates]

    return RunSpec(name, mode, variants, resolved={
        "name": name, "mode": mode, "seed": seed,
        "variants": {lbl or "main": _jsonable(asdict(v)) for lbl, v in variants},
    })


def load_config(path: str | Path, seed: int | None = None) -> RunSpec:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e.strerror}") from None
    return parse_config(text, name=path.stem, seed=seed)


def bundled_configs() -> dict[str, Path]:
    d = Path(__file__).parent / "configs"
    return {p.stem: p for p in sorted(d.glob("*.ini"))}


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if hasattr(obj, "item"):
        return obj.item()
    return obj
