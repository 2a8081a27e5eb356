"""Brute-force and cross-form checks that treat the engines as black boxes."""

from fractions import Fraction

import pytest

from apportion import (
    DHONDT,
    HARE,
    SAINTE_LAGUE,
    EnumerationGuardError,
    InputError,
    InstanceSpace,
    SuiteReport,
    VoteTally,
    bias_montecarlo,
    check_quota_property,
    compute_quotas,
    enumerate_allocations,
    equivalence_suite,
    find_house_monotonicity_violation,
    find_quota_violation,
    hare_niemeyer,
    highest_averages,
)


class TestInstanceSpace:
    def test_trials_are_reproducible(self):
        space = InstanceSpace.default(trials=20, master_seed=7)
        again = InstanceSpace.default(trials=20, master_seed=7)
        for i in range(20):
            assert space.trial_instance(i) == again.trial_instance(i)

    def test_trials_respect_the_declared_ranges(self):
        space = InstanceSpace(
            parties=(2, 5), votes=(0, 99), house=(1, 30), trials=60, master_seed=1
        )
        for i in range(60):
            trial = space.trial_instance(i)
            k = trial.tally.party_count
            assert 2 <= k <= 5
            assert trial.tally.party_ids == tuple(f"P{j + 1}" for j in range(k))
            assert all(0 <= v <= 99 for v in trial.tally.votes)
            assert 1 <= trial.house_size <= 30
            assert trial.tie.mode == "random"

    def test_all_zero_draws_are_redrawn(self):
        # with a 0..1 vote range many trials draw all zeros; each must end
        # up with at least one positive count or VoteTally would reject it
        space = InstanceSpace(
            parties=(2, 3), votes=(0, 1), house=(1, 5), trials=200, master_seed=5
        )
        for i in range(200):
            assert any(space.trial_instance(i).tally.votes)

    def test_index_bounds(self):
        space = InstanceSpace.default(trials=3, master_seed=0)
        with pytest.raises(InputError):
            space.trial_instance(3)
        with pytest.raises(InputError):
            space.trial_instance(-1)

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"parties": (5, 2)},
            {"parties": (0, 3)},
            {"votes": (0, 0)},
            {"votes": (-1, 10)},
            {"house": (-2, 5)},
            {"trials": -1},
            {"master_seed": -1},
        ],
    )
    def test_validation(self, kwargs):
        base = dict(parties=(2, 4), votes=(0, 100), house=(1, 20),
                    trials=10, master_seed=0)
        with pytest.raises(InputError):
            InstanceSpace(**{**base, **kwargs})


class TestEnumeration:
    def test_three_parties_four_seats(self):
        vectors = list(enumerate_allocations(3, 4))
        assert len(vectors) == 15
        assert vectors == sorted(vectors)  # lexicographic
        assert all(sum(v) == 4 for v in vectors)
        assert vectors[0] == (0, 0, 4)
        assert vectors[-1] == (4, 0, 0)

    def test_degenerate_cases(self):
        assert list(enumerate_allocations(1, 7)) == [(7,)]
        assert list(enumerate_allocations(4, 0)) == [(0, 0, 0, 0)]

    def test_guard(self):
        with pytest.raises(EnumerationGuardError):
            enumerate_allocations(10, 1000)

    def test_invalid_arguments(self):
        with pytest.raises(InputError):
            enumerate_allocations(0, 5)
        with pytest.raises(InputError):
            enumerate_allocations(3, -1)


class TestQuotaProperty:
    def test_within_bounds(self, worked_example):
        allocation = hare_niemeyer(worked_example, 10)
        ok, violations = check_quota_property(worked_example, 10, allocation)
        assert ok and violations == ()

    def test_dhondt_overshoot_detected(self):
        tally = VoteTally(("A", "B", "C"), (88, 6, 6))
        allocation, _ = highest_averages(tally, 10, DHONDT, with_trace=False)
        ok, violations = check_quota_property(tally, 10, allocation)
        assert not ok
        (violation,) = violations
        assert violation.party == "A"
        assert (violation.seats, violation.lower, violation.upper) == (10, 8, 9)

    def test_rejects_foreign_allocation(self, three_way, close_race):
        with pytest.raises(InputError):
            check_quota_property(three_way, 10, hare_niemeyer(close_race, 10))
        with pytest.raises(InputError):
            check_quota_property(three_way, 10, hare_niemeyer(three_way, 7))


def test_hare_minimizes_total_deviation_from_ideal():
    """Brute force: no seat vector beats Hare on sum |ideal - seats|."""
    space = InstanceSpace(
        parties=(2, 4), votes=(0, 50), house=(1, 8), trials=60, master_seed=9
    )
    for i in range(space.trials):
        trial = space.trial_instance(i)
        tally, n = trial.tally, trial.house_size
        report = compute_quotas(tally, n)
        hare = hare_niemeyer(tally, n, trial.tie)
        cost = sum(abs(r) for r in report.residuals_for(hare))
        best = min(
            sum(abs(ideal - s) for ideal, s in zip(report.ideals, vector))
            for vector in enumerate_allocations(tally.party_count, n)
        )
        assert cost == best


class TestEquivalenceSuite:
    def test_forms_agree_across_a_random_space(self):
        space = InstanceSpace.default(trials=300, master_seed=0)
        report = equivalence_suite(space)
        assert report.suite == "equivalence"
        assert report.trials_run == 300
        assert report.agreements == 300
        assert report.disagreements == ()
        assert report.stats["hare_quota_ok"] == 300

    def test_parallel_run_is_identical_to_serial(self):
        space = InstanceSpace.default(trials=120, master_seed=4)
        assert equivalence_suite(space, jobs=3) == equivalence_suite(space, jobs=1)

    def test_empty_space(self):
        report = equivalence_suite(InstanceSpace.default(trials=0, master_seed=0))
        assert (report.trials_run, report.agreements) == (0, 0)

    def test_report_invariant_enforced(self):
        space = InstanceSpace.default(trials=5, master_seed=0)
        with pytest.raises(InputError):
            SuiteReport(suite="equivalence", space=space, trials_run=5, agreements=3)


class TestPathologySearches:
    def test_dhondt_breaks_quota_somewhere(self):
        space = InstanceSpace(
            parties=(2, 6), votes=(0, 1000), house=(1, 50), trials=2000, master_seed=3
        )
        witness = find_quota_violation(space, DHONDT)
        assert witness is not None
        assert witness.trial.index == 57  # earliest hit in this space
        assert witness.violations
        for violation in witness.violations:
            n = witness.seats[witness.trial.tally.party_ids.index(violation.party)]
            assert n == violation.seats
            assert not violation.lower <= n <= violation.upper

    def test_hare_never_breaks_quota(self):
        space = InstanceSpace(
            parties=(2, 6), votes=(0, 1000), house=(1, 50), trials=2000, master_seed=3
        )
        assert find_quota_violation(space, HARE) is None

    def test_hare_alabama_paradox_found(self):
        space = InstanceSpace(
            parties=(2, 4), votes=(1, 30), house=(2, 30), trials=2000, master_seed=11
        )
        witness = find_house_monotonicity_violation(space, HARE)
        assert witness is not None
        assert witness.trial.index == 31
        assert witness.losers
        ids = witness.trial.tally.party_ids
        for pid in witness.losers:
            i = ids.index(pid)
            assert witness.seats_larger[i] < witness.seats_smaller[i]

    @pytest.mark.parametrize("method", [DHONDT, SAINTE_LAGUE])
    def test_divisor_methods_are_house_monotone(self, method):
        space = InstanceSpace(
            parties=(2, 4), votes=(1, 30), house=(2, 30), trials=2000, master_seed=11
        )
        assert find_house_monotonicity_violation(space, method) is None


class TestBias:
    SPACE = InstanceSpace(
        parties=(2, 6), votes=(0, 10**6), house=(1, 100), trials=200, master_seed=13
    )

    def test_largest_party_advantage_is_exact(self):
        report = bias_montecarlo(self.SPACE)
        rank1 = report.stats["by_rank"]["1"]
        assert rank1["trials"] == 200
        assert rank1["mean_dhondt_minus_hare"] == Fraction(59, 200)
        assert rank1["mean_dhondt_minus_sainte_lague"] == Fraction(57, 200)
        largest = report.stats["mean_seats_largest"]
        assert largest[HARE] == Fraction(2313, 100)
        assert largest[DHONDT] == Fraction(937, 40)
        assert largest[SAINTE_LAGUE] == Fraction(1157, 50)
        assert largest[DHONDT] > largest[SAINTE_LAGUE] > largest[HARE]

    def test_parallel_run_is_identical_to_serial(self):
        assert bias_montecarlo(self.SPACE, jobs=3) == bias_montecarlo(self.SPACE)
