import pytest

from apportion import VoteTally


@pytest.fixture
def worked_example():
    """Three parties splitting 1000 votes with integer ideal seat counts."""
    return VoteTally(("A", "B", "C"), (600, 300, 100))


@pytest.fixture
def three_way():
    """Fractional quotas everywhere; methods disagree at N=10."""
    return VoteTally(("A", "B", "C"), (53, 24, 23))


@pytest.fixture
def close_race():
    """Two small and two large parties; remainder and divisor logic split."""
    return VoteTally(("A", "B", "C", "D"), (78, 78, 422, 422))
