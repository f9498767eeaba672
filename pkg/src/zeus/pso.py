"""Particle-swarm phase: improve random starting points before local
refinement.

A swarm of N particles moves under inertia plus attraction toward each
particle's best visited position and the swarm's best.  The per-particle
update within one sweep is embarrassingly parallel; the global-best
reduction is a barrier between sweeps, and every particle in a sweep sees
the global best from the previous barrier, never a mid-sweep value.  That
makes seeded runs reproducible regardless of particle processing order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .streams import ParticleStreams

__all__ = ["PsoParams", "SwarmState", "init_swarm", "update_swarm"]


@dataclass(frozen=True)
class PsoParams:
    """Velocity-update coefficients and sweep count.

    ``w`` is the inertia weight, ``c1_pso`` the cognitive (personal-best)
    coefficient, ``c2_pso`` the social (global-best) coefficient.
    """

    w: float = 0.5
    c1_pso: float = 1.2
    c2_pso: float = 1.5
    iter_pso: int = 0

    def __post_init__(self):
        # Zero coefficients are degenerate but well defined (a zero inertia
        # with zero attractions freezes the swarm), so only negatives are
        # rejected.
        if self.w < 0.0 or self.c1_pso < 0.0 or self.c2_pso < 0.0:
            raise ValueError("PSO coefficients must be non-negative")
        if self.iter_pso < 0:
            raise ValueError("iter_pso must be non-negative")


@dataclass
class SwarmState:
    """Positions, velocities and bests for N particles.

    Invariants between sweeps: ``personal_best_val[i]`` equals the
    objective at ``personal_best_pos[i]`` and never increases, and
    ``global_best_val`` is the minimum personal-best value with ties
    broken toward the lowest particle index.
    """

    positions: np.ndarray
    velocities: np.ndarray
    personal_best_pos: np.ndarray
    personal_best_val: np.ndarray
    global_best_pos: np.ndarray
    global_best_val: float

    @property
    def n(self) -> int:
        return self.positions.shape[0]

    @property
    def dim(self) -> int:
        return self.positions.shape[1]


def _reduce_global_best(state: SwarmState) -> None:
    best = int(np.argmin(state.personal_best_val))
    state.global_best_pos = state.personal_best_pos[best].copy()
    state.global_best_val = float(state.personal_best_val[best])


def init_swarm(
    f: Callable[[Sequence[float]], float],
    n: int,
    search_range: tuple[float, float],
    rng: ParticleStreams,
    dim: int | None = None,
) -> SwarmState:
    """Uniformly seeded swarm over the search box.

    Particle i draws its position uniformly in [lower, upper) and its
    velocity uniformly in [-(upper - lower), upper - lower) per
    coordinate, both from substream i.  Personal bests start at the
    initial positions; the global best is the minimum evaluation with
    lowest-index tie-break.
    """
    if n < 1:
        raise ValueError("swarm needs at least one particle")
    lower, upper = search_range
    if not lower < upper:
        raise ValueError("search range requires lower < upper")
    if dim is None:
        dim = rng.dim
    vel_range = upper - lower

    positions = np.empty((n, dim))
    velocities = np.empty((n, dim))
    values = np.empty(n)
    for i in range(n):
        positions[i] = rng.draw_uniform(i, lower, upper, dim)
        velocities[i] = rng.draw_uniform(i, -vel_range, vel_range, dim)
        values[i] = f(positions[i].tolist())

    state = SwarmState(
        positions=positions,
        velocities=velocities,
        personal_best_pos=positions.copy(),
        personal_best_val=values,
        global_best_pos=np.empty(dim),
        global_best_val=np.inf,
    )
    _reduce_global_best(state)
    return state


def update_swarm(
    state: SwarmState,
    f: Callable[[Sequence[float]], float],
    params: PsoParams,
    rng: ParticleStreams,
) -> SwarmState:
    """One velocity/position sweep over all particles, in place.

    Per particle, with fresh per-coordinate uniforms r1, r2 in [0, 1)
    drawn from its own substream:

        v' = w v + c1_pso * r1 * (p - x) + c2_pso * r2 * (g - x)
        x' = x + v'

    where g is the global best from the previous barrier.  Positions are
    not clamped to the search box.  Personal bests update immediately;
    the global best is recomputed once at the end of the sweep.  Returns
    the same state object.
    """
    n, dim = state.n, state.dim
    g = state.global_best_pos.copy()
    positions = state.positions
    velocities = state.velocities
    best_pos = state.personal_best_pos
    best_val = state.personal_best_val
    for i in range(n):
        r = rng.draw_uniform(i, 0.0, 1.0, 2 * dim)
        x = positions[i]
        v = (
            params.w * velocities[i]
            + params.c1_pso * r[:dim] * (best_pos[i] - x)
            + params.c2_pso * r[dim:] * (g - x)
        )
        x = x + v
        velocities[i] = v
        positions[i] = x
        fval = f(x.tolist())
        if fval < best_val[i]:
            best_val[i] = fval
            best_pos[i] = x
    _reduce_global_best(state)
    return state
