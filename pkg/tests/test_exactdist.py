"""Exact finite-horizon distributions in rational arithmetic."""

from fractions import Fraction

import pytest

from erw import exactdist, lattice
from erw.errors import DomainError
from erw.lattice import WalkType
from erw.walk import FirstStepMode

DET = FirstStepMode.DETERMINISTIC
UNI = FirstStepMode.UNIFORM


def fr(x, y=1):
    return Fraction(x, y)


def test_reinforced_law_is_a_probability_vector():
    law = dict(exactdist.reinforced_law((2, 1, 0), 3, fr(1, 3), 3))
    assert sum(law.values()) == 1
    assert all(w >= 0 for w in law.values())
    # color 0 with p = 1/3: p * 2/3 + (1 - p)/2 * (1 - 2/3)
    assert law[0] == fr(1, 3) * fr(2, 3) + fr(2, 3) / 2 * fr(1, 3)


def test_mechanism_law_equals_reinforced_law():
    # drawing a past entry then repeat-or-deviate gives the categorical form
    for m in (2, 3, 6):
        for p in (fr(1, 4), fr(1, 2), fr(9, 10)):
            for counts in [(1,) + (0,) * (m - 1), tuple(range(m)), (3,) * m]:
                k = sum(counts)
                if k == 0:
                    continue
                assert exactdist.mechanism_law(counts, k, p, m) == (
                    exactdist.reinforced_law(counts, k, p, m)
                )


def test_first_law_modes():
    assert dict(exactdist.first_law(4, 2, DET)) == {2: 1}
    assert dict(exactdist.first_law(4, 2, UNI)) == {i: fr(1, 4) for i in range(4)}


@pytest.mark.parametrize("m", [2, 3, 6])
@pytest.mark.parametrize("p", [fr(1, 4), fr(1, 2), fr(9, 10)])
def test_history_recall_collapses_to_counts(m, p):
    # recalling a uniform past index is distributionally the same as
    # sampling from the count-based categorical law
    for k in range(1, 4):
        by_counts = exactdist.urn_count_distribution(m, p, k, 0, DET)
        by_history = exactdist.history_count_distribution(m, p, k, 0, DET)
        assert exactdist.total_variation(by_counts, by_history) == 0


def test_history_recall_collapses_under_uniform_first_step():
    m, p = 3, fr(2, 5)
    for k in (1, 2, 3):
        by_counts = exactdist.urn_count_distribution(m, p, k, 0, UNI)
        by_history = exactdist.history_count_distribution(m, p, k, 0, UNI)
        assert exactdist.total_variation(by_counts, by_history) == 0


def test_urn_count_distribution_supports_and_sums():
    dist = exactdist.urn_count_distribution(3, fr(1, 2), 4, 0, DET)
    assert sum(dist.values()) == 1
    for counts in dist:
        assert sum(counts) == 4
        assert counts[0] >= 1  # the initial ball never leaves


def test_walk_count_distribution_tracks_both_families():
    spec = lattice.preset("brick_wall")
    dist = exactdist.walk_count_distribution(spec, fr(1, 3), 4, DET)
    assert sum(dist.values()) == 1
    for cu, cw in dist:
        assert sum(cu) == 2 and sum(cw) == 2  # 4 steps alternate U, W, U, W


def exact_mean(dist):
    total = None
    for key, weight in dist.items():
        term = tuple(weight * x for x in key)
        total = term if total is None else tuple(a + b for a, b in zip(total, term))
    return total


def stream_mean_after(vectors, m, p, steps, first):
    """E[sum of a single reinforced stream] by the exact recursion
    E[T_{k+1}] = (1 + a/k) E[T_k] + (1 - a) mean, from E[T_1] = first."""
    a = fr(m) * p - 1
    a /= m - 1
    mean = tuple(
        sum(Fraction(v[j]) for v in vectors) / m for j in range(len(vectors[0]))
    )
    total = first
    for k in range(1, steps):
        total = tuple(
            (1 + fr(1, k) * a) * t + (1 - a) * mu for t, mu in zip(total, mean)
        )
    return total


@pytest.mark.parametrize("name,p", [("brick_wall", fr(1, 3)), ("example6", fr(2, 5))])
def test_position_law_first_moment_matches_recursion(name, p):
    spec = lattice.preset(name)
    k = 3
    dist = exactdist.walk_position_distribution(spec, p, k, DET)
    mean = exact_mean(dist)
    u_rows = [tuple(Fraction(x) for x in row) for row in spec.u.vectors]
    w_rows = [tuple(Fraction(x) for x in row) for row in spec.w.vectors]
    eu = stream_mean_after(u_rows, spec.m, p, k, u_rows[spec.i0])
    ew = stream_mean_after(w_rows, spec.m_prime, p, k, w_rows[spec.j0])
    assert mean == tuple(a + b for a, b in zip(eu, ew))


def test_type1_position_law_first_moment_matches_recursion():
    spec = lattice.preset("zd1")
    p = fr(3, 5)
    k = 3  # 6 steps
    dist = exactdist.walk_position_distribution(spec, p, k, DET)
    mean = exact_mean(dist)
    rows = [tuple(Fraction(x) for x in row) for row in spec.u.vectors]
    expected = stream_mean_after(rows, spec.m, p, 2 * k, rows[spec.i0])
    assert mean == expected


@pytest.mark.parametrize("name", ["zd1", "brick_wall", "example5"])
@pytest.mark.parametrize("mode", [DET, UNI])
def test_walk_and_urn_position_laws_coincide(name, mode):
    spec = lattice.preset(name)
    p = fr(1, 2)
    for k in (1, 2):
        walk_law = exactdist.walk_position_distribution(spec, p, k, mode)
        urn_law = exactdist.urn_position_distribution(spec, p, k, mode)
        assert exactdist.total_variation(walk_law, urn_law) == 0


def test_total_variation_extremes():
    d1 = {(0,): fr(1, 2), (1,): fr(1, 2)}
    assert exactdist.total_variation(d1, d1) == 0
    d2 = {(2,): fr(1, 2), (3,): fr(1, 2)}
    assert exactdist.total_variation(d1, d2) == 1
    d3 = {(0,): fr(1, 4), (1,): fr(3, 4)}
    assert exactdist.total_variation(d1, d3) == fr(1, 4)


def test_p_equal_one_is_deterministic():
    spec = lattice.preset("brick_wall")
    dist = exactdist.walk_position_distribution(spec, fr(1), 2, DET)
    assert len(dist) == 1
    ((key, weight),) = dist.items()
    assert weight == 1
    # two (u0, w0) rounds: 2 * ((1,0) + (1,0))
    assert key == (Fraction(4), Fraction(0))


def test_state_count_estimate_grows():
    spec = lattice.preset("example6")
    small = exactdist.state_count_estimate(spec, 2)
    large = exactdist.state_count_estimate(spec, 4)
    assert 0 < small < large


def test_bad_arguments():
    with pytest.raises(DomainError):
        exactdist.urn_count_distribution(3, fr(1, 2), 0, 0)
    with pytest.raises(DomainError):
        exactdist.walk_count_distribution(lattice.preset("zd1"), fr(3, 2), 2)
