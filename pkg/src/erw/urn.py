"""Reinforced color urns.

An urn holds balls of m colors and starts from a single ball.  Each epoch
draws a ball uniformly, returns it, and adds one ball: of the drawn color
with probability p, else of a color chosen uniformly among the other
m - 1.  Exactly one ball is added per epoch, so the count vector after
epoch n sums to n.  The added color's law given counts c with n balls is

    P(i) = p * c[i] / n + (1 - p) / (m - 1) * (1 - c[i] / n),

which is the same categorical law as the walk module's per-stream
direction sampling; both modules call the same inverse-CDF kernel and
consume their streams with the same indexing, so an urn path coincides
bit for bit with the direction counts of a one-stream walk run from the
same seed.  A walk with position functional sum_i X_n^i u_i (plus the
second family's urn for two-stream walks) therefore reproduces the walk's
even-step distribution exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .lattice import LatticeSpec, WalkType
from .rng import step_uniform, stream_key
from .walk import FirstStepMode, first_index, reinforced_index


@dataclass
class UrnState:
    """Mutable urn state; epoch equals the number of balls."""

    m: int
    p: float
    key: int
    counts: np.ndarray
    epoch: int


def new_urn(
    m: int,
    p: float,
    seed: int,
    color: int = 0,
    mode: FirstStepMode = FirstStepMode.DETERMINISTIC,
) -> UrnState:
    """Urn after epoch 1: a single ball, of `color` or uniformly drawn."""
    if m < 2:
        raise DomainError(f"an urn needs at least two colors, got m = {m!r}")
    if not 0.0 < p <= 1.0:
        raise DomainError(f"p must lie in (0, 1], got {p!r}")
    if not 0 <= color < m:
        raise DomainError(f"color {color!r} is not a valid index for {m} colors")
    key = stream_key(seed, 0)
    first = first_index(m, step_uniform(key, 0), mode, color)
    counts = np.zeros(m, dtype=np.int64)
    counts[first] = 1
    return UrnState(m=m, p=p, key=key, counts=counts, epoch=1)


def draw_and_reinforce(urn: UrnState) -> int:
    """Run one epoch and return the color added."""
    u = step_uniform(urn.key, urn.epoch)
    idx = reinforced_index(urn.counts, urn.epoch, urn.p, urn.m, u)
    urn.counts[idx] += 1
    urn.epoch += 1
    return idx


def urn_path(
    m: int,
    p: float,
    epochs: int,
    seed: int,
    color: int = 0,
    mode: FirstStepMode = FirstStepMode.DETERMINISTIC,
) -> np.ndarray:
    """Count vectors X_1, ..., X_epochs as an (epochs, m) int array."""
    if epochs < 1:
        raise DomainError(f"epochs must be at least 1, got {epochs!r}")
    urn = new_urn(m, p, seed, color=color, mode=mode)
    out = np.zeros((epochs, m), dtype=np.int64)
    out[0] = urn.counts
    for e in range(1, epochs):
        draw_and_reinforce(urn)
        out[e] = urn.counts
    return out


def erw_via_urns(
    spec: LatticeSpec,
    x_path: np.ndarray,
    y_path: np.ndarray | None = None,
) -> np.ndarray:
    """Even-step positions S_0, S_2, S_4, ... from urn count paths.

    Type 2 walks take two independent urn paths of equal length, one per
    family; S_{2r} = X_r @ U + Y_r @ W.  Type 1 walks take a single path
    read at even epochs: S_{2r} = X_{2r} @ U.
    """
    x_path = np.asarray(x_path)
    if x_path.ndim != 2 or x_path.shape[1] != spec.m:
        raise DomainError(
            f"x_path must have shape (epochs, {spec.m}), got {x_path.shape}"
        )
    if spec.walk_type is WalkType.TYPE2:
        if y_path is None:
            raise DomainError("a type 2 walk needs a second urn path")
        y_path = np.asarray(y_path)
        if y_path.ndim != 2 or y_path.shape[1] != spec.m_prime:
            raise DomainError(
                f"y_path must have shape (epochs, {spec.m_prime}), got {y_path.shape}"
            )
        if len(x_path) != len(y_path):
            raise DomainError(
                f"urn paths disagree in length: {len(x_path)} vs {len(y_path)}"
            )
        body = x_path.astype(float) @ spec.u.vectors + y_path.astype(float) @ spec.w.vectors
    else:
        if y_path is not None:
            raise DomainError("a type 1 walk uses a single urn path")
        even = x_path[1::2]
        body = even.astype(float) @ spec.u.vectors
    out = np.zeros((len(body) + 1, spec.dimension))
    out[1:] = body
    return out
