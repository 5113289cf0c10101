"""Monte Carlo batches and one-dimensional parameter sweeps.

Every repetition is an independent experiment: a fresh population (drawn
from a profile, or copied from a fixed roster) trading for one day. The
seed of experiment `r` at sweep position `i` is derived as
``SeedSequence(master_seed, spawn_key=(i, r))``; batches sit at position 0
unless told otherwise. Seeds therefore never depend on worker scheduling,
and results are joined in repetition order, so aggregate output is
identical for any ``jobs`` value.
"""

from __future__ import annotations

import csv
import json
import multiprocessing
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from .core import AgentState, ConfigError, ModelParams
from .endowments import EndowmentProfile, load_population, simulate_profile_day
from .engine import run_day
from .metrics import METRIC_FIELDS, AggregateMetrics, DayMetrics, aggregate

__all__ = [
    "PopulationSource",
    "SweepSpec",
    "apply_axis",
    "experiment_seed",
    "run_batch",
    "run_sweep",
    "sweep_axes",
    "write_sweep_csv",
    "write_sweep_json",
]

# a population source is a profile to draw from, a fixed roster to copy, or
# a path to an endowment CSV
PopulationSource = Union[EndowmentProfile, Sequence[AgentState], str, Path]

# sweep axes beyond plain parameter fields; these move the market valuation
# envelope and re-derive the per-kind price bounds from it
_COMPOSITE_AXES = ("market_range", "market_width", "market_midpoint")

_INT_FIELDS = {"bs_search_len", "n_trading_iters"}


def sweep_axes() -> tuple[str, ...]:
    """All accepted values for SweepSpec.parameter."""
    return ModelParams.field_names() + _COMPOSITE_AXES


def experiment_seed(master_seed: int, axis_index: int, rep: int) -> np.random.SeedSequence:
    """Seed of one experiment; stable contract, safe to rely on in scripts."""
    return np.random.SeedSequence(master_seed, spawn_key=(axis_index, rep))


def apply_axis(base: ModelParams, parameter: str, value) -> ModelParams:
    """Return `base` with one sweep axis set to `value`.

    Composite axes: ``market_range`` takes a (lo, hi) pair; ``market_width``
    resizes the envelope around its current midpoint; ``market_midpoint``
    recenters it at its current width. All three re-derive the per-kind
    price bounds. Raises ConfigError naming the value if the result is not
    a valid parameter set.
    """
    try:
        if parameter in _COMPOSITE_AXES:
            if parameter == "market_range":
                try:
                    lo, hi = value
                except (TypeError, ValueError):
                    raise ConfigError(
                        f"market_range value {value!r} must be a (lo, hi) pair"
                    ) from None
                return base.with_ranges_from_market(float(lo), float(hi))
            if parameter == "market_width":
                mid = (base.market_lo + base.market_hi) / 2.0
                w = float(value)
                return base.with_ranges_from_market(mid - w / 2.0, mid + w / 2.0)
            mid = float(value)
            w = base.market_hi - base.market_lo
            return base.with_ranges_from_market(mid - w / 2.0, mid + w / 2.0)
        if parameter not in ModelParams.field_names():
            raise ConfigError(
                f"unknown sweep parameter {parameter!r}; valid axes: {', '.join(sweep_axes())}"
            )
        if parameter in _INT_FIELDS:
            if float(value) != int(value):
                raise ConfigError(f"{parameter} value {value!r} must be an integer")
            value = int(value)
        if parameter == "debit_exit_fee":
            value = bool(value)
        return base.replace(**{parameter: value})
    except ConfigError as e:
        raise ConfigError(f"sweep value {value!r} for {parameter!r}: {e}") from None


def _resolve_source(source: PopulationSource) -> EndowmentProfile | list[AgentState]:
    if isinstance(source, EndowmentProfile):
        return source
    if isinstance(source, (str, Path)):
        return load_population(source)
    roster = list(source)
    for a in roster:
        if not isinstance(a, AgentState):
            raise ConfigError(f"population roster contains a non-agent: {a!r}")
    return roster


def _one_experiment(
    resolved: EndowmentProfile | list[AgentState],
    params: ModelParams,
    master_seed: int,
    axis_index: int,
    rep: int,
) -> DayMetrics:
    ss = experiment_seed(master_seed, axis_index, rep)
    if isinstance(resolved, EndowmentProfile):
        return simulate_profile_day(resolved, params, ss)
    population = [a.copy() for a in resolved]
    _, day = run_day(population, params, ss)
    return day


# worker-side state for multiprocessing, set once per worker by _init_worker
_WORKER_CTX: dict = {}


def _init_worker(resolved, params, master_seed, axis_index) -> None:
    _WORKER_CTX["args"] = (resolved, params, master_seed, axis_index)


def _worker_rep(rep: int) -> DayMetrics:
    resolved, params, master_seed, axis_index = _WORKER_CTX["args"]
    return _one_experiment(resolved, params, master_seed, axis_index, rep)


def run_batch(
    params: ModelParams,
    source: PopulationSource,
    reps: int,
    master_seed: int,
    jobs: int = 1,
    axis_index: int = 0,
) -> AggregateMetrics:
    """Run `reps` independent one-day experiments and aggregate them.

    With a profile source each experiment regenerates its population; with
    a roster or file source each experiment starts from a copy of the same
    balances. Output is independent of `jobs`.
    """
    params.validate()
    if reps < 1:
        raise ConfigError(f"reps={reps} must be at least 1")
    if jobs < 1:
        raise ConfigError(f"jobs={jobs} must be at least 1")
    resolved = _resolve_source(source)
    if jobs == 1 or reps == 1:
        days = [
            _one_experiment(resolved, params, master_seed, axis_index, r)
            for r in range(reps)
        ]
    else:
        chunk = max(1, reps // (jobs * 4))
        with multiprocessing.Pool(
            processes=jobs,
            initializer=_init_worker,
            initargs=(resolved, params, master_seed, axis_index),
        ) as pool:
            days = list(pool.imap(_worker_rep, range(reps), chunksize=chunk))
    return aggregate(days)


@dataclass(frozen=True)
class SweepSpec:
    """One-dimensional sweep: `parameter` takes each of `values` in turn."""

    parameter: str
    values: tuple
    reps: int = 1000
    master_seed: int = 0
    base_params: ModelParams = field(default_factory=ModelParams)

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(self.values))

    def validate(self) -> None:
        self.base_params.validate()
        if not self.values:
            raise ConfigError("sweep has no values")
        if self.reps < 1:
            raise ConfigError(f"reps={self.reps} must be at least 1")
        # applying every value up front surfaces bad ones before any
        # simulation has run
        for v in self.values:
            apply_axis(self.base_params, self.parameter, v)


def run_sweep(
    spec: SweepSpec, source: PopulationSource, jobs: int = 1
) -> list[tuple[object, AggregateMetrics]]:
    """Run one batch per sweep value; returns (value, aggregate) pairs.

    Value `i` uses seeds derived at axis position `i`, so adding a value to
    the end of a sweep never changes the results of the earlier ones.
    """
    spec.validate()
    resolved = _resolve_source(source)
    out: list[tuple[object, AggregateMetrics]] = []
    for i, v in enumerate(spec.values):
        params_v = apply_axis(spec.base_params, spec.parameter, v)
        agg = run_batch(
            params_v, resolved, spec.reps, spec.master_seed, jobs=jobs, axis_index=i
        )
        out.append((v, agg))
    return out


# sweep CSV carries the headline metric means, one row per value
_SWEEP_CSV_FIELDS = (
    "liquidity_ratio",
    "n_offers",
    "n_trades",
    "offered_shares",
    "traded_shares",
)


def _value_str(v) -> str:
    if isinstance(v, (tuple, list)):
        return ":".join(repr(float(x)) for x in v)
    return repr(v) if isinstance(v, float) else str(v)


def write_sweep_csv(
    results: Sequence[tuple[object, AggregateMetrics]], path
) -> None:
    """One row per sweep value with full-precision metric means."""
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(("value",) + _SWEEP_CSV_FIELDS)
        for value, agg in results:
            row = [_value_str(value)]
            for name in _SWEEP_CSV_FIELDS:
                m = agg.mean(name)
                row.append("" if m is None else repr(m))
            w.writerow(row)


def write_sweep_json(
    spec: SweepSpec,
    results: Sequence[tuple[object, AggregateMetrics]],
    path,
) -> None:
    """Sweep output with dispersion: adds per-metric standard deviations and
    experiment counts to the same means the CSV carries."""
    rows = []
    for value, agg in results:
        rec: dict = {"value": value}
        rec.update(agg.to_record())
        rows.append(rec)
    doc = {
        "parameter": spec.parameter,
        "reps": spec.reps,
        "master_seed": spec.master_seed,
        "metrics": list(METRIC_FIELDS),
        "rows": rows,
    }
    with open(path, "w", encoding="utf-8") as f:
        json.dump(doc, f, indent=2)
        f.write("\n")
