"""Population endowments: profiles, generation, file I/O and calibration.

A population is a flat list of agents in three contiguous blocks (pure
buyers, then pure sellers, then buyer-sellers) with dense ids. Initial
balances come either from a CSV file (one agent per row) or from an
`EndowmentProfile`, which describes counts, the fraction of each selling
kind that holds shares at all, and the distributions that share holdings
and cash are drawn from.

Holdings are whole shares; share draws are rounded to the nearest integer
and holders get at least one share. Cash draws are floored at
`cash_floor`. Generation consumes randomness in a fixed documented order
(see `generate_population`), so a profile plus a seed pins down the
population exactly.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .core import (
    AgentKind,
    AgentState,
    ConfigError,
    EndowmentError,
    ModelParams,
    Rng,
    make_rng,
)
from .engine import run_day
from .metrics import DayMetrics, aggregate

__all__ = [
    "CalibrationTargets",
    "DEFAULT_BOXES",
    "DEFAULT_TARGETS",
    "DistSpec",
    "EndowmentProfile",
    "calibrate_profile",
    "evaluate_profile",
    "generate_population",
    "load_population",
    "load_profile",
    "save_population",
    "save_profile",
    "simulate_profile_day",
]

DIST_FAMILIES = ("constant", "uniform-integer", "lognormal-rounded", "pareto-rounded")


@dataclass(frozen=True)
class DistSpec:
    """One endowment distribution.

    Families and their arguments:

    * ``constant``: {value}
    * ``uniform-integer``: {lo, hi}, both ends inclusive
    * ``lognormal-rounded``: {mu, sigma} of the underlying normal, rounded
      to the nearest whole number
    * ``pareto-rounded``: {shape, scale}, heavy-tailed with minimum
      ``scale``, drawn as scale * (1 - U) ** (-1 / shape) and rounded
    """

    family: str
    args: dict[str, float] = field(default_factory=dict)

    def validate(self) -> None:
        if self.family not in DIST_FAMILIES:
            raise ConfigError(
                f"unknown distribution family {self.family!r}; expected one of {DIST_FAMILIES}"
            )
        required = {
            "constant": ("value",),
            "uniform-integer": ("lo", "hi"),
            "lognormal-rounded": ("mu", "sigma"),
            "pareto-rounded": ("shape", "scale"),
        }[self.family]
        missing = [k for k in required if k not in self.args]
        extra = [k for k in self.args if k not in required]
        if missing or extra:
            raise ConfigError(
                f"distribution {self.family!r}: missing args {missing}, unexpected {extra}"
            )
        a = self.args
        if self.family == "constant" and a["value"] < 0:
            raise ConfigError(f"constant value {a['value']} negative")
        if self.family == "uniform-integer":
            lo, hi = a["lo"], a["hi"]
            if lo != int(lo) or hi != int(hi) or not 0 <= lo <= hi:
                raise ConfigError(f"uniform-integer bounds ({lo}, {hi}) invalid")
        if self.family == "lognormal-rounded" and a["sigma"] < 0:
            raise ConfigError(f"lognormal sigma {a['sigma']} negative")
        if self.family == "pareto-rounded":
            if a["shape"] <= 0 or a["scale"] < 0:
                raise ConfigError(
                    f"pareto shape/scale ({a['shape']}, {a['scale']}) invalid"
                )

    def sample(self, n: int, rng: Rng) -> np.ndarray:
        """Draw n values as floats; rounded families return whole numbers."""
        a = self.args
        if self.family == "constant":
            return np.full(n, float(a["value"]))
        if self.family == "uniform-integer":
            return rng.integers(int(a["lo"]), int(a["hi"]) + 1, size=n).astype(float)
        if self.family == "lognormal-rounded":
            return np.rint(rng.lognormal(a["mu"], a["sigma"], size=n))
        if self.family == "pareto-rounded":
            u = rng.random(n)
            return np.rint(a["scale"] * (1.0 - u) ** (-1.0 / a["shape"]))
        raise ConfigError(f"unknown distribution family {self.family!r}")

    def to_json_dict(self) -> dict:
        return {"family": self.family, **self.args}

    @classmethod
    def from_json_dict(cls, d: dict) -> "DistSpec":
        if "family" not in d:
            raise ConfigError(f"distribution spec {d!r} lacks a family")
        args = {k: float(v) for k, v in d.items() if k != "family"}
        spec = cls(family=d["family"], args=args)
        spec.validate()
        return spec


@dataclass(frozen=True)
class EndowmentProfile:
    """Recipe for generating a population.

    Share distributions are separate per selling kind because the two kinds
    need not hold similar stakes; cash distributions are separate per buying
    kind for the same reason. `ps_holder_frac` and `bs_holder_frac` give the
    probability that a seller of that kind holds any shares at all; the rest
    start the day with zero and can never offer.
    """

    share_dist_ps: DistSpec
    share_dist_bs: DistSpec
    cash_dist_pb: DistSpec
    cash_dist_bs: DistSpec
    n_pb: int = 727
    n_ps: int = 413
    n_bs: int = 225
    ps_holder_frac: float = 1.0
    bs_holder_frac: float = 1.0
    cash_floor: float = 0.0

    def validate(self) -> None:
        problems = []
        for name in ("n_pb", "n_ps", "n_bs"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 0:
                problems.append(f"{name}={v!r} not a nonnegative int")
        for name in ("ps_holder_frac", "bs_holder_frac"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                problems.append(f"{name}={v!r} not in [0, 1]")
        if self.cash_floor < 0:
            problems.append(f"cash_floor={self.cash_floor!r} negative")
        if problems:
            raise ConfigError("invalid profile: " + "; ".join(problems))
        for name in ("share_dist_ps", "share_dist_bs", "cash_dist_pb", "cash_dist_bs"):
            try:
                getattr(self, name).validate()
            except ConfigError as e:
                raise ConfigError(f"{name}: {e}") from None

    def to_json_dict(self) -> dict:
        return {
            "n_pb": self.n_pb,
            "n_ps": self.n_ps,
            "n_bs": self.n_bs,
            "ps_holder_frac": self.ps_holder_frac,
            "bs_holder_frac": self.bs_holder_frac,
            "share_dist_ps": self.share_dist_ps.to_json_dict(),
            "share_dist_bs": self.share_dist_bs.to_json_dict(),
            "cash_dist_pb": self.cash_dist_pb.to_json_dict(),
            "cash_dist_bs": self.cash_dist_bs.to_json_dict(),
            "cash_floor": self.cash_floor,
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "EndowmentProfile":
        try:
            profile = cls(
                share_dist_ps=DistSpec.from_json_dict(d["share_dist_ps"]),
                share_dist_bs=DistSpec.from_json_dict(d["share_dist_bs"]),
                cash_dist_pb=DistSpec.from_json_dict(d["cash_dist_pb"]),
                cash_dist_bs=DistSpec.from_json_dict(d["cash_dist_bs"]),
                n_pb=int(d.get("n_pb", 727)),
                n_ps=int(d.get("n_ps", 413)),
                n_bs=int(d.get("n_bs", 225)),
                ps_holder_frac=float(d.get("ps_holder_frac", 1.0)),
                bs_holder_frac=float(d.get("bs_holder_frac", 1.0)),
                cash_floor=float(d.get("cash_floor", 0.0)),
            )
        except KeyError as e:
            raise ConfigError(f"profile lacks required key {e.args[0]!r}") from None
        profile.validate()
        return profile


def load_profile(path) -> EndowmentProfile:
    p = Path(path)
    try:
        with open(p, encoding="utf-8") as f:
            d = json.load(f)
    except FileNotFoundError:
        raise EndowmentError(f"profile file not found: {p}") from None
    except json.JSONDecodeError as e:
        raise EndowmentError(f"profile file {p} is not valid JSON: {e}") from None
    if not isinstance(d, dict):
        raise EndowmentError(f"profile file {p} must hold a JSON object")
    return EndowmentProfile.from_json_dict(d)


def save_profile(profile: EndowmentProfile, path, metadata: dict | None = None) -> None:
    """Write a profile as JSON; `metadata` is stored under "calibration"."""
    d = profile.to_json_dict()
    if metadata:
        d["calibration"] = metadata
    with open(path, "w", encoding="utf-8") as f:
        json.dump(d, f, indent=2, sort_keys=False)
        f.write("\n")


def generate_population(profile: EndowmentProfile, rng: Rng) -> list[AgentState]:
    """Draw a fresh population from `profile`.

    Blocks and draw order: pure-buyer cash, pure-seller holder uniforms,
    pure-seller shares (drawn for every agent, zeroed for non-holders so the
    stream does not depend on the holder outcomes), buyer-seller holder
    uniforms, buyer-seller shares, buyer-seller cash.
    """
    profile.validate()
    agents: list[AgentState] = []
    next_id = 0

    cash_pb = _cash_values(profile.cash_dist_pb, profile.n_pb, profile.cash_floor, rng)
    for i in range(profile.n_pb):
        agents.append(AgentState(next_id, AgentKind.PURE_BUYER, 0, cash_pb[i]))
        next_id += 1

    holder_ps = rng.random(profile.n_ps) < profile.ps_holder_frac
    shares_ps = _share_values(profile.share_dist_ps, profile.n_ps, rng)
    for i in range(profile.n_ps):
        s = shares_ps[i] if holder_ps[i] else 0
        agents.append(AgentState(next_id, AgentKind.PURE_SELLER, s, Fraction(0)))
        next_id += 1

    holder_bs = rng.random(profile.n_bs) < profile.bs_holder_frac
    shares_bs = _share_values(profile.share_dist_bs, profile.n_bs, rng)
    cash_bs = _cash_values(profile.cash_dist_bs, profile.n_bs, profile.cash_floor, rng)
    for i in range(profile.n_bs):
        s = shares_bs[i] if holder_bs[i] else 0
        agents.append(AgentState(next_id, AgentKind.BUYER_SELLER, s, cash_bs[i]))
        next_id += 1

    return agents


def _share_values(dist: DistSpec, n: int, rng: Rng) -> list[int]:
    vals = np.maximum(1.0, np.rint(dist.sample(n, rng)))
    return [int(v) for v in vals]


def _cash_values(
    dist: DistSpec, n: int, floor: float, rng: Rng
) -> list[Fraction]:
    vals = np.maximum(floor, dist.sample(n, rng))
    # rounded draws are whole numbers; the integer constructor is much
    # cheaper than the float one
    return [
        Fraction(int(v)) if v.is_integer() else Fraction(float(v)) for v in vals
    ]


# endowment CSV column layout; kind uses the short labels PS / PB / BS
_CSV_HEADER = ["kind", "shares", "cash"]
_KIND_LABELS = {k.value: k for k in AgentKind}


def load_population(path) -> list[AgentState]:
    """Read agents from CSV with header kind,shares,cash.

    Cash is parsed as an exact decimal. Malformed input raises
    EndowmentError naming the offending data row (1-based).
    """
    p = Path(path)
    try:
        f = open(p, newline="", encoding="utf-8")
    except FileNotFoundError:
        raise EndowmentError(f"endowment file not found: {p}") from None
    with f:
        reader = csv.reader(f)
        try:
            header = next(reader)
        except StopIteration:
            raise EndowmentError(f"{p}: empty file, expected header kind,shares,cash") from None
        if [h.strip() for h in header] != _CSV_HEADER:
            raise EndowmentError(
                f"{p}: bad header {header!r}, expected kind,shares,cash"
            )
        agents: list[AgentState] = []
        for i, row in enumerate(reader, start=1):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue  # blank line
            if len(row) != 3:
                raise EndowmentError(f"{p}: row {i}: expected 3 fields, got {len(row)}")
            kind_s, shares_s, cash_s = (c.strip() for c in row)
            kind = _KIND_LABELS.get(kind_s)
            if kind is None:
                raise EndowmentError(
                    f"{p}: row {i}: unknown kind {kind_s!r}, expected PS, PB or BS"
                )
            try:
                shares = int(shares_s)
            except ValueError:
                raise EndowmentError(f"{p}: row {i}: shares {shares_s!r} not an integer") from None
            if shares < 0:
                raise EndowmentError(f"{p}: row {i}: shares {shares} negative")
            try:
                cash = Fraction(cash_s)
            except (ValueError, ZeroDivisionError):
                raise EndowmentError(f"{p}: row {i}: cash {cash_s!r} not a decimal") from None
            if cash < 0:
                raise EndowmentError(f"{p}: row {i}: cash {cash_s} negative")
            agents.append(AgentState(len(agents), kind, shares, cash))
    return agents


def _decimal_str(x: Fraction) -> str:
    """Exact decimal rendering when the denominator allows one."""
    if x.denominator == 1:
        return str(x.numerator)
    d = x.denominator
    twos = fives = 0
    while d % 2 == 0:
        d //= 2
        twos += 1
    while d % 5 == 0:
        d //= 5
        fives += 1
    if d != 1:
        return repr(float(x))  # no finite decimal form, best effort
    k = max(twos, fives)
    digits = abs(x.numerator) * 10**k // x.denominator
    s = str(digits).rjust(k + 1, "0")
    out = s[:-k] + "." + s[-k:] if k else s
    out = out.rstrip("0").rstrip(".")
    return "-" + out if x < 0 else out


def save_population(population: Sequence[AgentState], path) -> None:
    """Write agents as CSV (kind,shares,cash); reloads to equal balances."""
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(_CSV_HEADER)
        for a in population:
            w.writerow([a.kind.value, a.shares, _decimal_str(a.cash)])


def simulate_profile_day(
    profile: EndowmentProfile,
    params: ModelParams,
    seed: int | np.random.SeedSequence,
) -> DayMetrics:
    """Generate a fresh population from `profile` and run one day.

    The seed is split into a generation stream and a day stream, so the
    whole experiment is pinned by one seed.
    """
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    gen_ss, day_ss = ss.spawn(2)
    population = generate_population(profile, make_rng(gen_ss))
    _, day = run_day(population, params, day_ss)
    return day


@dataclass(frozen=True)
class CalibrationTargets:
    """Target day-metric means the calibrator steers towards."""

    liquidity_ratio: float
    n_offers: float
    n_trades: float
    offered_shares: float
    traded_shares: float

    FIELDS = ("liquidity_ratio", "n_offers", "n_trades", "offered_shares", "traded_shares")

    def validate(self) -> None:
        for name in self.FIELDS:
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and v > 0 and math.isfinite(v)):
                raise ConfigError(f"target {name}={v!r} must be positive and finite")


# reproduction targets for the default market configuration
DEFAULT_TARGETS = CalibrationTargets(
    liquidity_ratio=0.139,
    n_offers=69.0,
    n_trades=130.0,
    offered_shares=4746.0,
    traded_shares=614.28,
)

# Random-search boxes. Share holdings and cash are explored over lognormal
# and heavy-tail families; the slot layout is <slot>_{mu,sigma} for the
# lognormal candidate and <slot>_{shape,scale} for the pareto candidate.
# Centers reflect the structure the targets impose: a couple hundred
# share-holding sellers with skewed stakes, and buyer cash heavy-tailed
# enough that the few who can afford shares at all can afford several.
DEFAULT_BOXES: dict[str, tuple[float, float]] = {
    "ps_holder_frac": (0.40, 0.64),
    "bs_holder_frac": (0.60, 0.86),
    "ps_share_mu": (3.2, 4.2),
    "ps_share_sigma": (0.5, 1.2),
    "ps_share_shape": (1.2, 2.4),
    "ps_share_scale": (8.0, 35.0),
    "bs_share_mu": (4.5, 5.6),
    "bs_share_sigma": (0.7, 1.5),
    "bs_share_shape": (1.1, 2.2),
    "bs_share_scale": (40.0, 140.0),
    "pb_cash_mu": (1.4, 2.6),
    "pb_cash_sigma": (1.7, 2.7),
    "pb_cash_shape": (1.05, 1.7),
    "pb_cash_scale": (2.0, 15.0),
    "bs_cash_mu": (1.8, 3.0),
    "bs_cash_sigma": (1.8, 2.8),
    "bs_cash_shape": (1.05, 1.7),
    "bs_cash_scale": (3.0, 20.0),
}

_SLOT_FIELDS = {
    "ps_share": "share_dist_ps",
    "bs_share": "share_dist_bs",
    "pb_cash": "cash_dist_pb",
    "bs_cash": "cash_dist_bs",
}


def _sample_candidate(boxes: dict[str, tuple[float, float]], rng: Rng) -> EndowmentProfile:
    """One uniform draw from the boxes; each slot also flips its family."""

    def u(name: str) -> float:
        lo, hi = boxes[name]
        return float(rng.uniform(lo, hi))

    dists: dict[str, DistSpec] = {}
    for slot, fieldname in _SLOT_FIELDS.items():
        lognormal = rng.random() < 0.5
        if lognormal:
            dists[fieldname] = DistSpec(
                "lognormal-rounded", {"mu": u(f"{slot}_mu"), "sigma": u(f"{slot}_sigma")}
            )
        else:
            dists[fieldname] = DistSpec(
                "pareto-rounded", {"shape": u(f"{slot}_shape"), "scale": u(f"{slot}_scale")}
            )
    return EndowmentProfile(
        ps_holder_frac=u("ps_holder_frac"),
        bs_holder_frac=u("bs_holder_frac"),
        **dists,
    )


def evaluate_profile(
    profile: EndowmentProfile,
    targets: CalibrationTargets,
    params: ModelParams,
    reps: int,
    seed: int,
    weights: dict[str, float] | None = None,
) -> tuple[float, dict[str, float]]:
    """Mean day metrics of `profile` over `reps` days and their weighted
    squared relative error against `targets`.

    Evaluation seeds depend only on (seed, rep), so different profiles
    evaluated under the same seed share their randomness and compare with
    less noise. Returns (objective, mean metrics dict).
    """
    days = [
        simulate_profile_day(profile, params, np.random.SeedSequence(seed, spawn_key=(2, r)))
        for r in range(reps)
    ]
    agg = aggregate(days)
    sim = {name: agg.mean(name) for name in CalibrationTargets.FIELDS}
    if sim["liquidity_ratio"] is None:
        return math.inf, {k: (v if v is not None else math.nan) for k, v in sim.items()}
    w = weights or {}
    obj = 0.0
    for name in CalibrationTargets.FIELDS:
        t = getattr(targets, name)
        obj += w.get(name, 1.0) * ((sim[name] - t) / t) ** 2
    return obj, sim


def calibrate_profile(
    targets: CalibrationTargets,
    search_budget: int,
    seed: int,
    *,
    params: ModelParams | None = None,
    reps: int = 200,
    boxes: dict[str, tuple[float, float]] | None = None,
    initial: Sequence[EndowmentProfile] = (),
    weights: dict[str, float] | None = None,
    progress: Callable[[int, float, float], None] | None = None,
) -> tuple[EndowmentProfile, float]:
    """Random-search calibration of an endowment profile.

    Evaluates `search_budget` candidate profiles (any in `initial` first,
    then uniform draws from `boxes`) against `targets`, each over `reps`
    simulated days with common random numbers, and returns the best profile
    with its achieved objective. Deterministic in (seed, budget, reps); ties
    keep the earliest candidate. `progress`, if given, is called after each
    candidate with (index, objective, best_so_far).
    """
    targets.validate()
    if search_budget < 1:
        raise ConfigError(f"search_budget={search_budget} must be at least 1")
    if reps < 1:
        raise ConfigError(f"reps={reps} must be at least 1")
    params = params if params is not None else ModelParams.baseline()
    params.validate()
    boxes = dict(DEFAULT_BOXES if boxes is None else boxes)
    missing = [k for k in DEFAULT_BOXES if k not in boxes]
    if missing:
        raise ConfigError(f"boxes missing entries: {missing}")

    cand_rng = make_rng(np.random.SeedSequence(seed, spawn_key=(1,)))
    best: EndowmentProfile | None = None
    best_obj = math.inf
    for idx in range(search_budget):
        if idx < len(initial):
            candidate = initial[idx]
            candidate.validate()
        else:
            candidate = _sample_candidate(boxes, cand_rng)
        obj, _ = evaluate_profile(candidate, targets, params, reps, seed, weights)
        if obj < best_obj:
            best, best_obj = candidate, obj
        if progress is not None:
            progress(idx, obj, best_obj)
    assert best is not None
    return best, best_obj
