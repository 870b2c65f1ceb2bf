"""Exact finite-horizon distributions in rational arithmetic.

Small-depth reference distributions, enumerated with Fraction weights so
distributional identities can be asserted with total-variation distance
exactly zero: the alternating walk evolved over its joint count vector,
the one- and two-urn representations, the two-stage draw/reinforce
mechanism (not collapsed to the categorical law), and a history-resolved
sampler that remembers the full step sequence rather than counts.  Floats
are converted to Fractions exactly, so position keys collide exactly when
the underlying coordinates do.
"""

from __future__ import annotations

from fractions import Fraction
from math import comb

import numpy as np

from .errors import DomainError
from .lattice import LatticeSpec, WalkType
from .walk import FirstStepMode

Dist = dict  # state -> Fraction, summing to 1


def _check_p(p: Fraction) -> Fraction:
    if not 0 < p <= 1:
        raise DomainError(f"p must lie in (0, 1], got {p!r}")
    return p


def reinforced_law(counts: tuple, k: int, p: Fraction, m: int):
    """Categorical law of the next direction given stream counts (k >= 1)."""
    q = (1 - p) / (m - 1)
    return [
        (i, p * Fraction(counts[i], k) + q * Fraction(k - counts[i], k))
        for i in range(m)
    ]


def mechanism_law(counts: tuple, k: int, p: Fraction, m: int):
    """Same law derived through the two-stage mechanism: draw a uniformly
    chosen past entry, repeat it with probability p, else deviate uniformly.
    Kept independent of reinforced_law so tests can compare the two."""
    weights = [Fraction(0)] * m
    deviate = (1 - p) / (m - 1)
    for j in range(m):
        drawn = Fraction(counts[j], k)
        if drawn == 0:
            continue
        weights[j] += drawn * p
        for i in range(m):
            if i != j:
                weights[i] += drawn * deviate
    return [(i, weights[i]) for i in range(m)]


def first_law(m: int, fixed: int, mode: FirstStepMode):
    if mode is FirstStepMode.UNIFORM:
        share = Fraction(1, m)
        return [(i, share) for i in range(m)]
    return [(fixed, Fraction(1))]


def _bump(counts: tuple, i: int) -> tuple:
    return counts[:i] + (counts[i] + 1,) + counts[i + 1 :]


def _evolve(dist: Dist, law) -> Dist:
    out: Dist = {}
    for state, weight in dist.items():
        for new_state, move_weight in law(state):
            if move_weight == 0:
                continue
            out[new_state] = out.get(new_state, Fraction(0)) + weight * move_weight
    return out


def walk_count_distribution(
    spec: LatticeSpec,
    p,
    n_steps: int,
    mode: FirstStepMode = FirstStepMode.DETERMINISTIC,
) -> Dist:
    """Joint distribution of the walk's count vectors after n_steps steps.

    States are (counts_u, counts_w) tuples for type 2 walks and counts_u
    tuples for type 1; the walk is evolved step by step with its actual
    schedule (strict alternation for type 2), so this enumerates the walk
    as defined rather than any urn shortcut.
    """
    p = _check_p(Fraction(p))
    m, mp = spec.m, spec.m_prime
    two = spec.walk_type is WalkType.TYPE2
    start = ((0,) * m, (0,) * mp) if two else (0,) * m
    dist: Dist = {start: Fraction(1)}
    for t in range(n_steps):
        if two and (t & 1):
            k, family_m, fixed = t >> 1, mp, spec.j0

            def law(state, k=k, family_m=family_m, fixed=fixed):
                cu, cw = state
                moves = (
                    first_law(family_m, fixed, mode)
                    if k == 0
                    else reinforced_law(cw, k, p, family_m)
                )
                return [((cu, _bump(cw, i)), w) for i, w in moves]

        elif two:
            k, family_m, fixed = t >> 1, m, spec.i0

            def law(state, k=k, family_m=family_m, fixed=fixed):
                cu, cw = state
                moves = (
                    first_law(family_m, fixed, mode)
                    if k == 0
                    else reinforced_law(cu, k, p, family_m)
                )
                return [((_bump(cu, i), cw), w) for i, w in moves]

        else:
            k, family_m, fixed = t, m, spec.i0

            def law(state, k=k, family_m=family_m, fixed=fixed):
                moves = (
                    first_law(family_m, fixed, mode)
                    if k == 0
                    else reinforced_law(state, k, p, family_m)
                )
                return [(_bump(state, i), w) for i, w in moves]

        dist = _evolve(dist, law)
    return dist


def urn_count_distribution(
    m: int,
    p,
    epochs: int,
    color: int,
    mode: FirstStepMode = FirstStepMode.DETERMINISTIC,
    law=reinforced_law,
) -> Dist:
    """Distribution of the urn count vector X_epochs; `law` selects the
    transition derivation (categorical or two-stage mechanism)."""
    if epochs < 1:
        raise DomainError(f"epochs must be at least 1, got {epochs!r}")
    p = _check_p(Fraction(p))
    dist: Dist = {}
    for i, w in first_law(m, color, mode):
        dist[_bump((0,) * m, i)] = w
    for n in range(1, epochs):

        def transition(state, n=n):
            return [(_bump(state, i), w) for i, w in law(state, n, p, m)]

        dist = _evolve(dist, transition)
    return dist


def history_count_distribution(
    m: int,
    p,
    n_steps: int,
    fixed: int = 0,
    mode: FirstStepMode = FirstStepMode.DETERMINISTIC,
) -> Dist:
    """Count distribution of a single stream enumerated over full histories.

    The recall step picks a past *index* uniformly, so this does not assume
    the counts are a sufficient statistic; projecting to counts at the end
    gives an independent check of the collapsed law.
    """
    p = _check_p(Fraction(p))
    deviate = (1 - p) / (m - 1)
    dist: Dist = {(i,): w for i, w in first_law(m, fixed, mode)}
    for t in range(1, n_steps):
        out: Dist = {}
        for history, weight in dist.items():
            share = Fraction(1, t)
            moves = [Fraction(0)] * m
            for j in range(t):
                moves[history[j]] += share * p
                for i in range(m):
                    if i != history[j]:
                        moves[i] += share * deviate
            for i in range(m):
                if moves[i] == 0:
                    continue
                key = history + (i,)
                out[key] = out.get(key, Fraction(0)) + weight * moves[i]
        dist = out
    counts: Dist = {}
    for history, weight in dist.items():
        c = [0] * m
        for i in history:
            c[i] += 1
        key = tuple(c)
        counts[key] = counts.get(key, Fraction(0)) + weight
    return counts


def _exact_rows(vectors: np.ndarray):
    return [tuple(Fraction(x) for x in row) for row in vectors]


def _push(dist_positions: Dist, key, weight) -> None:
    dist_positions[key] = dist_positions.get(key, Fraction(0)) + weight


def _position(counts, rows, dim: int):
    total = [Fraction(0)] * dim
    for c, row in zip(counts, rows):
        if c:
            for axis in range(dim):
                total[axis] += c * row[axis]
    return tuple(total)


def walk_position_distribution(
    spec: LatticeSpec,
    p,
    double_steps: int,
    mode: FirstStepMode = FirstStepMode.DETERMINISTIC,
) -> Dist:
    """Exact distribution of S_{2k} for the walk itself."""
    n_steps = 2 * double_steps
    counts = walk_count_distribution(spec, p, n_steps, mode)
    u_rows = _exact_rows(spec.u.vectors)
    w_rows = _exact_rows(spec.w.vectors)
    d = spec.dimension
    out: Dist = {}
    if spec.walk_type is WalkType.TYPE2:
        for (cu, cw), weight in counts.items():
            pos = tuple(
                a + b
                for a, b in zip(_position(cu, u_rows, d), _position(cw, w_rows, d))
            )
            _push(out, pos, weight)
    else:
        for cu, weight in counts.items():
            _push(out, _position(cu, u_rows, d), weight)
    return out


def urn_position_distribution(
    spec: LatticeSpec,
    p,
    double_steps: int,
    mode: FirstStepMode = FirstStepMode.DETERMINISTIC,
) -> Dist:
    """Exact distribution of S_{2k} built from the urn representation:
    two independent urns for type 2, a single urn at even epochs for type 1."""
    u_rows = _exact_rows(spec.u.vectors)
    w_rows = _exact_rows(spec.w.vectors)
    d = spec.dimension
    out: Dist = {}
    if spec.walk_type is WalkType.TYPE2:
        x_dist = urn_count_distribution(spec.m, p, double_steps, spec.i0, mode)
        y_dist = urn_count_distribution(spec.m_prime, p, double_steps, spec.j0, mode)
        x_pos = [(_position(c, u_rows, d), w) for c, w in x_dist.items()]
        y_pos = [(_position(c, w_rows, d), w) for c, w in y_dist.items()]
        for px, wx in x_pos:
            for py, wy in y_pos:
                _push(out, tuple(a + b for a, b in zip(px, py)), wx * wy)
    else:
        x_dist = urn_count_distribution(spec.m, p, 2 * double_steps, spec.i0, mode)
        for c, w in x_dist.items():
            _push(out, _position(c, u_rows, d), w)
    return out


def total_variation(d1: Dist, d2: Dist) -> Fraction:
    keys = set(d1) | set(d2)
    gap = sum(abs(d1.get(k, Fraction(0)) - d2.get(k, Fraction(0))) for k in keys)
    return gap / 2


def state_count_estimate(spec: LatticeSpec, depth: int) -> int:
    """Upper bound on enumerated count states at `depth` double-steps."""
    if spec.walk_type is WalkType.TYPE2:
        return comb(depth + spec.m - 1, spec.m - 1) * comb(
            depth + spec.m_prime - 1, spec.m_prime - 1
        )
    return comb(2 * depth + spec.m - 1, spec.m - 1)
