"""Granular rationals and rounded threshold grids."""

import math
from fractions import Fraction

import pytest

from boxmso.core.errors import OutOfRangeError
from boxmso.engine.rounding import GranularRational, RoundedSet, rounded_set


def test_granular_rational():
    half = GranularRational.of(Fraction(3, 2), 2)
    assert half.numerator == 3
    assert half.value == Fraction(3, 2)
    assert str(half) == "3/2"
    with pytest.raises(OutOfRangeError):
        GranularRational.of(Fraction(1, 3), 2)


def test_powers_of_two():
    assert RoundedSet(Fraction(2), 8).values == [0, 1, 2, 4, 8]


def test_floor_and_ceiling_grid():
    rs = RoundedSet(Fraction(3, 2), 10)
    assert rs.values == [0, 1, 2, 3, 4, 5, 6, 7, 8, 10]
    assert 10 in rs and 9 not in rs
    assert rs.round_up(9) == 10
    assert rs.round_up(3) == 3
    assert rs.round_up(0) == 0


def test_rounding_outside_the_range():
    rs = RoundedSet(Fraction(3, 2), 10)
    with pytest.raises(OutOfRangeError):
        rs.round_up(11)
    with pytest.raises(OutOfRangeError):
        RoundedSet(Fraction(1), 10)


def test_dense_grid_keeps_every_numerator():
    rs = RoundedSet(Fraction(11, 10), 5)
    assert rs.dense
    assert len(rs) == 6
    assert rs.round_up(Fraction(7, 2)) == 4


def test_granularity_scales_members():
    rs = RoundedSet(Fraction(2), 4, granularity=2)
    assert rs.numerators == [0, 1, 2, 4, 8]
    assert Fraction(1, 2) in rs
    assert Fraction(1, 3) not in rs


@pytest.mark.parametrize("b", [1, 2, 3, 5])
def test_round_up_stays_within_the_accuracy(b):
    rs = rounded_set(b, 50)
    for m in range(1, 51):
        up = rs.round_up(m)
        assert m <= up <= rs.alpha * m


def test_grid_size_is_logarithmic():
    for b in range(1, 9):
        for limit in (1, 7, 100, 1000):
            for gamma in (1, 5, 12):
                rs = rounded_set(b, limit, gamma)
                bound = 2 * math.log(max(gamma * limit, 1)) / math.log(rs.alpha) + 4
                assert len(rs) <= bound


def test_rounded_set_needs_positive_b():
    with pytest.raises(OutOfRangeError):
        rounded_set(0, 10)


def _exact_grid(alpha: Fraction, top: int) -> list[int]:
    members, power = {0, top}, Fraction(1)
    while math.floor(power) <= top:
        members.update(m for m in (math.floor(power), math.ceil(power)) if m <= top)
        power *= alpha
    return sorted(members)


@pytest.mark.parametrize(
    "alpha, top",
    [
        (Fraction(3, 2), 10),
        (Fraction(2), 1024),
        (Fraction(11, 10), 5000),
        (Fraction(301, 300), 4000),
    ],
)
def test_grid_matches_exact_powers(alpha, top):
    assert RoundedSet(alpha, top).numerators == _exact_grid(alpha, top)


@pytest.mark.slow
def test_fine_grids_over_large_ranges_stay_sorted_and_sparse():
    rs = rounded_set(3600, 10**9, 12)
    numerators = rs.numerators
    assert numerators == sorted(set(numerators))
    assert numerators[0] == 0 and numerators[-1] == rs.top
    assert len(rs) <= 2 * math.log(rs.top) / math.log(rs.alpha) + 4
    for m in (1, 3601, 10**6 + 7, rs.top - 1):
        up = rs.round_up_numerator(m)
        assert m <= up <= rs.alpha * m
