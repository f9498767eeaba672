"""Experiment harness: run configuration grids, collect per-run metrics,
and emit machine-readable results.

Experiments are described in an INI-style plan file (one section per
experiment, comma-separated values expand into a grid) and produce one
:class:`RunRecord` per repetition of each grid point.  Records stream to
a json-lines file as they complete, so partial results survive an
interrupted run; a fixed-header CSV can be emitted from any record list.
The harness executes one pipeline run at a time (each internally
parallel) so wall-time rows are never contended.
"""

from __future__ import annotations

import configparser
import dataclasses
import json
import math
import statistics
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from .bfgs import CONVERGED, DIVERGED, DOMAIN_ERROR, STOPPED, BfgsOutcome
from .driver import ZeusConfig, ZeusResult, zeus_run
from .objectives import ObjectiveSpec, get_objective

__all__ = [
    "CSV_HEADER",
    "CORRECT_RADIUS",
    "STRICT_RADIUS",
    "RunRecord",
    "ExperimentPlan",
    "PlanEntry",
    "PlanError",
    "parse_plan",
    "run_experiment",
    "emit_results",
    "read_records",
    "count_within",
    "euclidean_error",
    "speedup_study",
    "SpeedupRow",
    "ackley_audit",
    "AckleyAudit",
]

# A local solution counts as correct within this distance of the known
# optimum; the stricter radius is the desirable-error scale used when a
# near-exact hit is required.
CORRECT_RADIUS = 0.5
STRICT_RADIUS = 1e-6

_CSV_FIELDS = [
    "experiment",
    "objective",
    "dim",
    "N",
    "iter_pso",
    "iter_bfgs",
    "required_c",
    "seed",
    "rep",
    "wall_time_s",
    "best_f",
    "euclid_error",
    "n_correct",
    "converged",
    "diverged",
    "stopped",
    "domain_error",
]
CSV_HEADER = ",".join(_CSV_FIELDS)


class PlanError(ValueError):
    """The experiment plan file is malformed or inconsistent."""


@dataclass(frozen=True)
class RunRecord:
    """Metrics of one pipeline execution within an experiment."""

    experiment: str
    objective: str
    dim: int
    N: int
    iter_pso: int
    iter_bfgs: int
    required_c: int
    seed: int
    rep: int
    wall_time_s: float
    best_f: float
    best_point: tuple[float, ...]
    euclid_error: float
    n_correct: int
    converged: int
    diverged: int
    stopped: int
    domain_error: int

    def csv_row(self) -> str:
        values = [getattr(self, name) for name in _CSV_FIELDS]
        return ",".join(repr(v) if isinstance(v, float) else str(v)
                        for v in values)

    def to_json(self) -> str:
        payload = dataclasses.asdict(self)
        payload["best_point"] = list(self.best_point)
        return json.dumps(payload)

    @classmethod
    def from_json(cls, line: str) -> "RunRecord":
        payload = json.loads(line)
        payload["best_point"] = tuple(payload["best_point"])
        return cls(**payload)


def euclidean_error(point: Sequence[float], optimum: Sequence[float]) -> float:
    """Euclidean distance between an estimate and the known optimum."""
    return float(
        np.linalg.norm(np.asarray(point, float) - np.asarray(optimum, float))
    )


def count_within(
    outcomes: Iterable[BfgsOutcome],
    optimum: Sequence[float],
    radius: float = CORRECT_RADIUS,
) -> int:
    """Number of outcomes whose final point lies within ``radius`` of the
    optimum."""
    target = np.asarray(optimum, float)
    return sum(
        1
        for o in outcomes
        if float(np.linalg.norm(np.asarray(o.x_final) - target)) < radius
    )


@dataclass(frozen=True)
class PlanEntry:
    """One grid point: an experiment id, an objective, and a config."""

    experiment: str
    spec: ObjectiveSpec
    config: ZeusConfig


@dataclass
class ExperimentPlan:
    """Expanded plan: entries, repetitions, base seed, output base path."""

    entries: list[PlanEntry]
    repetitions: int
    base_seed: int
    output: Path | None = None

    def __post_init__(self):
        if self.repetitions < 1:
            raise PlanError("repetitions must be at least 1")
        if not self.entries:
            raise PlanError("plan has no experiments")


_PLAN_KEYS = {"repetitions", "output"}
_INT_KEYS = {"dim", "N", "iter_pso", "iter_bfgs", "iter_ls", "required_c",
             "workers"}
_FLOAT_KEYS = {"theta", "lower", "upper", "w", "c1_pso", "c2_pso",
               "c1_armijo", "alpha0", "shrink"}
_BOOL_KEYS = {"deterministic"}
_GRID_KEYS = {"objective"} | _INT_KEYS | _FLOAT_KEYS
_ENTRY_KEYS = _GRID_KEYS | _BOOL_KEYS


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("true", "yes", "on", "1"):
        return True
    if lowered in ("false", "no", "off", "0"):
        return False
    raise PlanError(f"not a boolean: {text!r}")


def _convert(key: str, text: str):
    if key in _INT_KEYS:
        return int(text)
    if key in _FLOAT_KEYS:
        return float(text)
    if key in _BOOL_KEYS:
        return _parse_bool(text)
    return text.strip()


def _expand_section(name: str, raw: dict[str, str]) -> list[tuple[str, dict]]:
    unknown = set(raw) - _ENTRY_KEYS
    if unknown:
        raise PlanError(
            f"[{name}] has unknown keys: {', '.join(sorted(unknown))}"
        )
    if "objective" not in raw:
        raise PlanError(f"[{name}] is missing the 'objective' key")
    fixed: dict = {}
    varied: list[tuple[str, list]] = []
    for key, text in raw.items():
        parts = [p.strip() for p in text.split(",") if p.strip()]
        if not parts:
            raise PlanError(f"[{name}] key {key!r} has no value")
        values = [_convert(key, p) for p in parts]
        if len(values) == 1:
            fixed[key] = values[0]
        elif key in _GRID_KEYS:
            varied.append((key, values))
        else:
            raise PlanError(f"[{name}] key {key!r} cannot take a value list")
    points: list[tuple[str, dict]] = []

    def recurse(index: int, chosen: dict, label: list[str]):
        if index == len(varied):
            suffix = f"[{','.join(label)}]" if label else ""
            points.append((name + suffix, {**fixed, **chosen}))
            return
        key, values = varied[index]
        for value in values:
            recurse(index + 1, {**chosen, key: value},
                    label + [f"{key}={value}"])

    recurse(0, {}, [])
    return points


def _entry_from_point(experiment: str, point: dict, seed: int) -> PlanEntry:
    settings = dict(point)
    objective = settings.pop("objective")
    dim = settings.pop("dim", 2)
    spec = get_objective(objective, dim)
    lower = settings.pop("lower", spec.lower)
    upper = settings.pop("upper", spec.upper)
    pso_kwargs = {k: settings.pop(k) for k in ("w", "c1_pso", "c2_pso")
                  if k in settings}
    ls_kwargs = {k: settings.pop(k) for k in ("c1_armijo", "alpha0", "shrink")
                 if k in settings}
    from .linesearch import LineSearchParams
    from .pso import PsoParams

    config = ZeusConfig(
        N=settings.pop("N", 1024),
        dim=dim,
        range=(lower, upper),
        seed=seed,
        pso=PsoParams(**pso_kwargs),
        ls=LineSearchParams(**ls_kwargs),
        **settings,
    )
    return PlanEntry(experiment=experiment, spec=spec, config=config)


def parse_plan(path, base_seed: int, output=None) -> ExperimentPlan:
    """Load and expand an experiment plan file.

    The file has one ``[plan]`` section (keys ``repetitions`` and
    optionally ``output``) plus one section per experiment whose keys
    mirror the configuration fields; comma-separated values expand into
    the cartesian grid.  The base seed comes from the caller, never the
    file, and rep r of every grid point runs with seed ``base_seed + r``.

    Raises
    ------
    PlanError
        Unknown keys, missing sections, or unparseable values.
    """
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str  # keep key case: N and theta are distinct names
    read = parser.read(str(path))
    if not read:
        raise OSError(f"cannot read plan file: {path}")
    repetitions = 1
    if parser.has_section("plan"):
        plan_raw = dict(parser.items("plan"))
        unknown = set(plan_raw) - _PLAN_KEYS
        if unknown:
            raise PlanError(
                f"[plan] has unknown keys: {', '.join(sorted(unknown))}"
            )
        if "repetitions" in plan_raw:
            repetitions = int(plan_raw["repetitions"])
        if output is None and "output" in plan_raw:
            output = plan_raw["output"]
    entries = []
    for section in parser.sections():
        if section == "plan":
            continue
        for experiment, point in _expand_section(
            section, dict(parser.items(section))
        ):
            entries.append(_entry_from_point(experiment, point, base_seed))
    return ExperimentPlan(
        entries=entries,
        repetitions=repetitions,
        base_seed=base_seed,
        output=None if output is None else Path(output),
    )


def _record_from_result(
    entry: PlanEntry, rep: int, result: ZeusResult
) -> RunRecord:
    spec = entry.spec
    cfg = entry.config
    tallies = {CONVERGED: 0, DIVERGED: 0, STOPPED: 0, DOMAIN_ERROR: 0}
    for outcome in result.per_run:
        tallies[outcome.status] += 1
    if spec.optimum_x is None:
        error = math.nan
        n_correct = 0
    else:
        error = euclidean_error(result.best.x_final, spec.optimum_x)
        n_correct = count_within(result.per_run, spec.optimum_x)
    return RunRecord(
        experiment=entry.experiment,
        objective=spec.name,
        dim=cfg.dim,
        N=cfg.N,
        iter_pso=cfg.iter_pso,
        iter_bfgs=cfg.iter_bfgs,
        required_c=cfg.required_c,
        seed=cfg.seed,
        rep=rep,
        wall_time_s=result.wall_time,
        best_f=result.best.f_final,
        best_point=result.best.x_final,
        euclid_error=error,
        n_correct=n_correct,
        converged=tallies[CONVERGED],
        diverged=tallies[DIVERGED],
        stopped=tallies[STOPPED],
        domain_error=tallies[DOMAIN_ERROR],
    )


def run_experiment(
    plan: ExperimentPlan,
    progress: Callable[[RunRecord], None] | None = None,
) -> list[RunRecord]:
    """Execute every grid point ``plan.repetitions`` times.

    Repetition r runs with seed ``base_seed + r``.  When the plan has an
    output path, each record is appended to ``<output>.jsonl`` as soon as
    its run completes.  Runs execute one at a time.
    """
    records: list[RunRecord] = []
    stream = None
    if plan.output is not None:
        plan.output.parent.mkdir(parents=True, exist_ok=True)
        stream = open(plan.output.with_suffix(".jsonl"), "a")
    try:
        for entry in plan.entries:
            for rep in range(plan.repetitions):
                cfg = replace(entry.config, seed=plan.base_seed + rep)
                result = zeus_run(entry.spec.fn, cfg)
                record = _record_from_result(
                    replace(entry, config=cfg), rep, result
                )
                records.append(record)
                if stream is not None:
                    stream.write(record.to_json() + "\n")
                    stream.flush()
                if progress is not None:
                    progress(record)
    finally:
        if stream is not None:
            stream.close()
    return records


def emit_results(records: Sequence[RunRecord], fmt: str, path) -> Path:
    """Write records as ``csv`` (fixed header, no best_point column) or
    ``jsonl``/``json-lines`` (full records, one object per line)."""
    if fmt == "json-lines":
        fmt = "jsonl"
    if fmt not in ("csv", "jsonl"):
        raise ValueError(f"unknown results format: {fmt!r}")
    path = Path(path)
    with open(path, "w") as handle:
        if fmt == "csv":
            handle.write(CSV_HEADER + "\n")
            for record in records:
                handle.write(record.csv_row() + "\n")
        else:
            for record in records:
                handle.write(record.to_json() + "\n")
    return path


def read_records(path) -> list[RunRecord]:
    """Read back records from a json-lines file."""
    records = []
    with open(path) as handle:
        for line in handle:
            line = line.strip()
            if line:
                records.append(RunRecord.from_json(line))
    return records


@dataclass(frozen=True)
class SpeedupRow:
    workers: int
    wall_time: float
    speedup: float


def speedup_study(
    f: Callable,
    cfg: ZeusConfig,
    worker_counts: Sequence[int],
    repetitions: int = 5,
) -> list[SpeedupRow]:
    """Median wall time and speedup relative to one worker.

    Every row reruns the identical seeded configuration, varying only the
    worker count; deterministic mode is switched off so timing reflects
    the production path.  ``repetitions`` must be at least 5 for stable
    medians.
    """
    if repetitions < 5:
        raise ValueError("speedup_study needs at least 5 repetitions")
    counts = list(worker_counts)
    if 1 not in counts:
        counts.insert(0, 1)
    medians: dict[int, float] = {}
    for workers in counts:
        run_cfg = replace(cfg, workers=workers, deterministic=False)
        times = []
        for _ in range(repetitions):
            times.append(zeus_run(f, run_cfg).wall_time)
        medians[workers] = statistics.median(times)
    base = medians[1]
    return [
        SpeedupRow(workers=w, wall_time=medians[w], speedup=base / medians[w])
        for w in counts
    ]


@dataclass
class AckleyAudit:
    """Populations illustrating the gradient-norm criterion misfiring on
    a function whose derivative fails to exist at its global minimum."""

    result: ZeusResult
    diverged_near_origin: list[tuple[int, float]]
    converged_high: list[tuple[int, float]]

    @property
    def flagged(self) -> bool:
        return bool(self.diverged_near_origin) and bool(self.converged_high)


def ackley_audit(
    n: int = 1000,
    seed: int = 0,
    theta: float = 1e-6,
    iter_bfgs: int = 150,
    workers: int = 0,
    near_radius: float = 0.1,
    high_value: float = 1.0,
) -> AckleyAudit:
    """Run 2-D Ackley and split outcomes into the two telltale groups.

    Runs that walk into the origin well can never satisfy the gradient
    test (the derivative does not exist at the minimum) and exhaust their
    iteration budget with tiny final norms, while runs trapped in outer
    local minima report convergence at function values far above 0.
    """
    spec = get_objective("ackley", 2)
    cfg = ZeusConfig(
        N=n,
        dim=2,
        range=(spec.lower, spec.upper),
        iter_pso=0,
        iter_bfgs=iter_bfgs,
        theta=theta,
        required_c=n,
        seed=seed,
        workers=workers,
    )
    result = zeus_run(spec.fn, cfg)
    diverged_near = []
    converged_high = []
    for i, outcome in enumerate(result.per_run):
        distance = float(np.linalg.norm(outcome.x_final))
        if outcome.status == DIVERGED and distance < near_radius:
            diverged_near.append((i, distance))
        elif outcome.status == CONVERGED and outcome.f_final > high_value:
            converged_high.append((i, outcome.f_final))
    return AckleyAudit(
        result=result,
        diverged_near_origin=diverged_near,
        converged_high=converged_high,
    )
