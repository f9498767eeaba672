"""End-to-end pipeline: seeded swarm, PSO sweeps, multistart BFGS with
early stopping, and reduction to the best outcome.

Shared state between concurrent runs is exactly one monotone convergence
counter (atomic increment-and-fetch) and one one-way stop flag (atomic
set, relaxed read).  Each run that converges increments the counter, and
the run that makes it reach ``required_c`` raises the stop flag; runs
observing the flag at the top of an iteration terminate with status
``stopped`` but still contribute their last iterate to the reduction.

Sequential mode (``workers=0``) executes runs in particle order and
breaks out of the loop as soon as enough have converged, so later
particles are never launched.  Parallel mode launches every particle and
relies on the stop flag instead.
"""

from __future__ import annotations

import logging
import math
import multiprocessing
import time
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .bfgs import CONVERGED, DOMAIN_ERROR, BfgsOutcome, bfgs_run
from .linesearch import LineSearchParams
from .pso import PsoParams, init_swarm, update_swarm
from .streams import make_start_streams

__all__ = [
    "ZeusConfig",
    "ZeusResult",
    "NoValidOptimumError",
    "zeus_run",
    "reduce_best",
    "make_start_streams",
]

log = logging.getLogger(__name__)


class NoValidOptimumError(RuntimeError):
    """Every launched run ended in a domain error; no optimum to report."""


@dataclass
class ZeusConfig:
    """All pipeline hyperparameters.

    ``required_c`` of None means "all particles" (no early stop).  In
    deterministic mode early stopping is disabled outright (``required_c``
    is treated as N), which makes results bit-identical across worker
    counts; outside it, which runs get stopped depends on timing and is
    the one admitted source of nondeterminism.
    """

    N: int
    dim: int
    range: tuple[float, float]
    iter_pso: int = 5
    iter_bfgs: int = 1000
    iter_ls: int = 20
    theta: float = 1e-6
    required_c: int | None = None
    pso: PsoParams = field(default_factory=PsoParams)
    ls: LineSearchParams = field(default_factory=LineSearchParams)
    seed: int = 0
    workers: int = 0
    deterministic: bool = False

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("N must be at least 1")
        if self.dim < 1:
            raise ValueError("dim must be at least 1")
        lower, upper = self.range
        if not lower < upper:
            raise ValueError("range requires lower < upper")
        if self.required_c is None:
            self.required_c = self.N
        if not 1 <= self.required_c <= self.N:
            raise ValueError("required_c must be in [1, N]")
        if min(self.iter_pso, self.iter_bfgs) < 0:
            raise ValueError("iteration budgets must be non-negative")
        if self.theta <= 0.0:
            raise ValueError("theta must be positive")
        if self.workers < 0:
            raise ValueError("workers must be non-negative")
        # The flat iteration fields are authoritative; keep the nested
        # parameter blocks in agreement so either view can be consumed.
        self.pso = replace(self.pso, iter_pso=self.iter_pso)
        self.ls = replace(self.ls, iter_ls=self.iter_ls)


@dataclass
class ZeusResult:
    """Outcome of one full pipeline execution.

    ``per_run`` holds one entry per launched start (in sequential mode
    early stopping means later particles are never launched and do not
    appear).  ``converged_count`` equals the number of entries with
    status ``converged``.
    """

    best: BfgsOutcome
    per_run: list[BfgsOutcome]
    converged_count: int
    wall_time: float
    pso_best_before_bfgs: float


def reduce_best(outcomes: Sequence[BfgsOutcome]) -> tuple[BfgsOutcome, int]:
    """Minimum ``f_final`` among non-domain-error outcomes, lowest index
    on ties.

    Raises
    ------
    NoValidOptimumError
        The list is empty or every outcome is a domain error.
    """
    best: BfgsOutcome | None = None
    best_index = -1
    for i, outcome in enumerate(outcomes):
        if outcome.status == DOMAIN_ERROR or math.isnan(outcome.f_final):
            continue
        if best is None or outcome.f_final < best.f_final:
            best = outcome
            best_index = i
    if best is None:
        raise NoValidOptimumError("all runs ended in domain errors")
    return best, best_index


# Worker-process globals, populated once per worker by _init_worker so
# per-chunk task payloads stay tiny.
_WORKER: dict = {}


def _init_worker(f, starts, theta, iter_bfgs, ls, required_c, counter, flag):
    _WORKER["f"] = f
    _WORKER["starts"] = starts
    _WORKER["theta"] = theta
    _WORKER["iter_bfgs"] = iter_bfgs
    _WORKER["ls"] = ls
    _WORKER["required_c"] = required_c
    _WORKER["counter"] = counter
    _WORKER["flag"] = flag


def _run_chunk(bounds: tuple[int, int]) -> list[tuple[int, BfgsOutcome]]:
    lo, hi = bounds
    f = _WORKER["f"]
    starts = _WORKER["starts"]
    theta = _WORKER["theta"]
    iter_bfgs = _WORKER["iter_bfgs"]
    ls = _WORKER["ls"]
    required_c = _WORKER["required_c"]
    counter = _WORKER["counter"]
    flag = _WORKER["flag"]

    def probe() -> bool:
        return flag.value != 0

    results = []
    for i in range(lo, hi):
        outcome = bfgs_run(f, starts[i], theta, iter_bfgs, ls, probe)
        if outcome.status == CONVERGED:
            with counter.get_lock():
                counter.value += 1
                reached = counter.value == required_c
            if reached:
                flag.value = 1
        results.append((i, outcome))
    return results


def _run_parallel(
    f, starts: np.ndarray, cfg: ZeusConfig, required_c: int
) -> list[BfgsOutcome]:
    n = len(starts)
    try:
        ctx = multiprocessing.get_context("fork")
    except ValueError:  # platforms without fork
        ctx = multiprocessing.get_context()
    counter = ctx.Value("q", 0)
    flag = ctx.Value("i", 0)
    chunk = max(1, min(512, -(-n // (cfg.workers * 4))))
    tasks = [(lo, min(lo + chunk, n)) for lo in range(0, n, chunk)]
    per_run: list[BfgsOutcome | None] = [None] * n
    with ctx.Pool(
        processes=cfg.workers,
        initializer=_init_worker,
        initargs=(f, starts, cfg.theta, cfg.iter_bfgs, cfg.ls, required_c,
                  counter, flag),
    ) as pool:
        for chunk_results in pool.imap_unordered(_run_chunk, tasks):
            for i, outcome in chunk_results:
                per_run[i] = outcome
    return per_run  # type: ignore[return-value]


def _run_sequential(
    f, starts: np.ndarray, cfg: ZeusConfig, required_c: int
) -> list[BfgsOutcome]:
    per_run: list[BfgsOutcome] = []
    converged = 0
    for i in range(len(starts)):
        outcome = bfgs_run(f, starts[i], cfg.theta, cfg.iter_bfgs, cfg.ls)
        per_run.append(outcome)
        if outcome.status == CONVERGED:
            converged += 1
            if converged == required_c:
                break
    return per_run


def zeus_run(f: Callable[[Sequence], object], cfg: ZeusConfig) -> ZeusResult:
    """Run the full pipeline on objective ``f``.

    Phases: (1) seed the swarm from per-particle substreams of
    ``cfg.seed``; (2) ``cfg.iter_pso`` swarm sweeps; (3) one BFGS run per
    particle from its final swarm position, early-stopped after
    ``cfg.required_c`` convergences; (4) reduction to the best outcome.

    In parallel mode the objective must be picklable or inheritable by
    worker processes (module-level functions always are).

    Raises
    ------
    NoValidOptimumError
        Every launched run ended in a domain error.
    """
    t0 = time.perf_counter()
    streams = make_start_streams(cfg.seed, cfg.N, cfg.dim)
    state = init_swarm(f, cfg.N, cfg.range, streams, dim=cfg.dim)
    for _ in range(cfg.iter_pso):
        update_swarm(state, f, cfg.pso, streams)
    pso_best = state.global_best_val

    required_c = cfg.N if cfg.deterministic else cfg.required_c
    starts = state.positions
    if cfg.workers == 0:
        per_run = _run_sequential(f, starts, cfg, required_c)
    else:
        per_run = _run_parallel(f, starts, cfg, required_c)

    best, _ = reduce_best(per_run)
    converged_count = sum(1 for o in per_run if o.status == CONVERGED)
    lower, upper = cfg.range
    exits = sum(
        1 for o in per_run if any(not lower <= v <= upper for v in o.x_final)
    )
    if exits:
        log.debug("%d of %d final iterates left the search range", exits,
                  len(per_run))
    return ZeusResult(
        best=best,
        per_run=per_run,
        converged_count=converged_count,
        wall_time=time.perf_counter() - t0,
        pso_best_before_bfgs=pso_best,
    )
