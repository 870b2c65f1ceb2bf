"""Reinforced walk simulation.

The walk remembers only per-family direction counts: conditionally on the
past, the next step of a stream that has taken k >= 1 steps with counts c
uses direction i with probability

    P(i) = p * c[i] / k + (1 - p) / (m - 1) * (1 - c[i] / k),

the law obtained by recalling a uniformly chosen past step of the stream
and repeating it with probability p, else deviating to one of the other
m - 1 directions uniformly.  Directions are sampled by inverse CDF over
the categories in index order.  Every step consumes exactly one stream
variate (the first step's variate goes unused in deterministic mode), so
a trajectory is a pure function of (seed, parameters) and the ensemble
kernels can replay any replicate bit for bit.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, DomainError
from .lattice import LatticeSpec, WalkType
from .rng import step_uniform, stream_key

# Largest array (bytes) any single simulation call will allocate.
MEMORY_BOUND = 2_000_000_000


class FirstStepMode(enum.Enum):
    DETERMINISTIC = "deterministic"
    UNIFORM = "uniform"


def reinforced_index(counts, k: int, p: float, m: int, u: float) -> int:
    """Inverse-CDF sample from the reinforced direction law.

    The loop mirrors the compiled ensemble kernel operation for operation,
    so both paths draw identical directions from identical variates.
    """
    q = (1.0 - p) / (m - 1)
    invk = 1.0 / k
    acc = 0.0
    for i in range(m):
        ci = counts[i] * invk
        acc += p * ci + q * (1.0 - ci)
        if u < acc:
            return i
    return m - 1


def first_index(m: int, u: float, mode: FirstStepMode, fixed: int) -> int:
    """Direction of a stream's first step."""
    if mode is FirstStepMode.UNIFORM:
        i = int(u * m)
        return m - 1 if i >= m else i
    return fixed


@dataclass
class WalkState:
    """Mutable state of a single walk: position, per-family counts, step count."""

    spec: LatticeSpec
    p: float
    key: int
    mode: FirstStepMode
    steps_taken: int
    position: np.ndarray
    counts_u: np.ndarray
    counts_w: np.ndarray


def new_walk(
    spec: LatticeSpec,
    p: float,
    seed: int,
    mode: FirstStepMode = FirstStepMode.DETERMINISTIC,
) -> WalkState:
    if not 0.0 < p <= 1.0:
        raise DomainError(f"p must lie in (0, 1], got {p!r}")
    return WalkState(
        spec=spec,
        p=p,
        key=stream_key(seed, 0),
        mode=mode,
        steps_taken=0,
        position=np.zeros(spec.dimension),
        counts_u=np.zeros(spec.m, dtype=np.int64),
        counts_w=np.zeros(spec.m_prime, dtype=np.int64),
    )


def step(state: WalkState) -> np.ndarray:
    """Advance the walk one step and return the step vector taken."""
    spec = state.spec
    t = state.steps_taken
    u = step_uniform(state.key, t)
    if spec.walk_type is WalkType.TYPE2 and (t & 1):
        family, counts, m, fixed = spec.w.vectors, state.counts_w, spec.m_prime, spec.j0
        k = t >> 1
    elif spec.walk_type is WalkType.TYPE2:
        family, counts, m, fixed = spec.u.vectors, state.counts_u, spec.m, spec.i0
        k = t >> 1
    else:
        family, counts, m, fixed = spec.u.vectors, state.counts_u, spec.m, spec.i0
        k = t
    if k == 0:
        idx = first_index(m, u, state.mode, fixed)
    else:
        idx = reinforced_index(counts, k, state.p, m, u)
    counts[idx] += 1
    vec = family[idx]
    state.position += vec
    state.steps_taken += 1
    return vec.copy()


def simulate(
    spec: LatticeSpec,
    p: float,
    n: int,
    seed: int,
    mode: FirstStepMode = FirstStepMode.DETERMINISTIC,
) -> np.ndarray:
    """Full trajectory S_0, ..., S_n as an (n + 1, d) array."""
    if n < 0:
        raise DomainError(f"n must be nonnegative, got {n!r}")
    if (n + 1) * spec.dimension * 8 > MEMORY_BOUND:
        raise CapacityError(
            f"trajectory of {n + 1} x {spec.dimension} doubles exceeds the "
            f"{MEMORY_BOUND} byte bound; retain fewer steps"
        )
    state = new_walk(spec, p, seed, mode)
    out = np.zeros((n + 1, spec.dimension))
    for i in range(n):
        step(state)
        out[i + 1] = state.position
    return out


def positions_at(
    spec: LatticeSpec,
    p: float,
    n: int,
    time_grid,
    seed: int,
    mode: FirstStepMode = FirstStepMode.DETERMINISTIC,
) -> np.ndarray:
    """Positions S_floor(2 n t) for each t in time_grid, as a (len, d) array."""
    if n < 0:
        raise DomainError(f"n must be nonnegative, got {n!r}")
    grid = list(time_grid)
    for t in grid:
        if not 0.0 <= t <= 1.0:
            raise DomainError(f"time grid must lie in [0, 1], got {t!r}")
    targets = [int(2 * n * t) for t in grid]
    order = np.argsort(targets, kind="stable")
    state = new_walk(spec, p, seed, mode)
    out = np.zeros((len(grid), spec.dimension))
    for pos_idx in order:
        while state.steps_taken < targets[pos_idx]:
            step(state)
        out[pos_idx] = state.position
    return out
