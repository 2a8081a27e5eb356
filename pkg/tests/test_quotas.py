from fractions import Fraction

import pytest

from apportion import InputError, VoteTally, compute_quotas, hare_niemeyer


def test_integer_ideals(worked_example):
    report = compute_quotas(worked_example, 10)
    assert report.ideals == (Fraction(6), Fraction(3), Fraction(1))
    assert report.lowers == (6, 3, 1)
    assert report.uppers == (6, 3, 1)
    assert report.remainders == (Fraction(0), Fraction(0), Fraction(0))
    assert report.ideal_quota == Fraction(100)


def test_fractional_ideals(three_way):
    report = compute_quotas(three_way, 10)
    assert report.ideals == (Fraction(53, 10), Fraction(12, 5), Fraction(23, 10))
    assert report.lowers == (5, 2, 2)
    assert report.uppers == (6, 3, 3)
    assert report.remainders == (Fraction(3, 10), Fraction(2, 5), Fraction(3, 10))
    assert report.ideal_quota == Fraction(10)


def test_remainders_stay_below_one(three_way):
    report = compute_quotas(three_way, 137)
    for ideal, lower, remainder in zip(report.ideals, report.lowers, report.remainders):
        assert remainder == ideal - lower
        assert 0 <= remainder < 1


def test_empty_house():
    report = compute_quotas(VoteTally(("A", "B"), (5, 3)), 0)
    assert report.lowers == (0, 0)
    assert report.uppers == (0, 0)
    assert report.ideal_quota is None


def test_negative_house_rejected(worked_example):
    with pytest.raises(InputError):
        compute_quotas(worked_example, -1)


def test_residuals_for_allocation(three_way):
    report = compute_quotas(three_way, 10)
    allocation = hare_niemeyer(three_way, 10)
    assert report.residuals_for(allocation) == (
        Fraction(3, 10),
        Fraction(-3, 5),
        Fraction(3, 10),
    )
