"""Exact domain types shared by every allocation engine.

All fractional quantities — vote shares, ideal seat counts, residuals,
divisor bids, multipliers — are `fractions.Fraction` values built from
Python integers, so comparisons are exact and equal values are detected
reliably.  Nothing in this package goes through binary floating point.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction


class InputError(ValueError):
    """A tally, seed distribution, or run configuration is invalid."""


class EnumerationGuardError(InputError):
    """An exhaustive enumeration would exceed the configured size guard."""


class IterationGuardError(RuntimeError):
    """An open-ended loop passed its iteration guard without stopping.

    Raised instead of looping for hours when an adversarial input pushes a
    stop criterion astronomically far out (for example a party holding many
    first-stage seats on a microscopic vote share).
    """


DETERMINISTIC = "deterministic"
SEEDED_RANDOM = "random"

# stop_reason values reported by the two-stage runs
STOP_RESIDUAL = "all-residuals-below-one"
STOP_CAP = "cap-reached"
STOP_FIXED = "fixed-extra-exhausted"


@dataclass(frozen=True)
class VoteTally:
    """Party identifiers with their raw vote counts.

    Identifiers are opaque strings preserved verbatim; votes are
    non-negative integers with at least one party polling a positive
    count.  Vote shares are exposed as exact rationals via :meth:`share`.
    """

    party_ids: tuple[str, ...]
    votes: tuple[int, ...]

    def __post_init__(self):
        if not self.party_ids:
            raise InputError("tally must contain at least one party")
        if len(self.party_ids) != len(self.votes):
            raise InputError("party_ids and votes must have equal length")
        if len(set(self.party_ids)) != len(self.party_ids):
            raise InputError("duplicate party id in tally")
        for pid, v in zip(self.party_ids, self.votes):
            if isinstance(v, bool) or not isinstance(v, int) or v < 0:
                raise InputError(f"party {pid!r}: votes must be a non-negative integer")
        if not any(self.votes):
            raise InputError("at least one party must have positive votes")

    @classmethod
    def from_pairs(cls, pairs) -> "VoteTally":
        pairs = list(pairs)
        return cls(tuple(p for p, _ in pairs), tuple(v for _, v in pairs))

    @property
    def party_count(self) -> int:
        return len(self.party_ids)

    @property
    def total_votes(self) -> int:
        return sum(self.votes)

    def share(self, index: int) -> Fraction:
        """Exact vote share of the party at ``index``."""
        return Fraction(self.votes[index], self.total_votes)


@dataclass(frozen=True)
class TiePolicy:
    """Total order used wherever exact values compare equal.

    ``deterministic`` prefers the party with more raw votes, breaking
    remaining ties by input position.  ``random`` orders the parties by a
    pseudo-random permutation drawn once from ``rng_seed``; the permutation
    replaces the classical trick of nudging tied values by a tiny random
    epsilon, so runs stay exact and replayable.
    """

    mode: str = DETERMINISTIC
    rng_seed: int | None = None

    def __post_init__(self):
        if self.mode not in (DETERMINISTIC, SEEDED_RANDOM):
            raise InputError(f"unknown tie mode {self.mode!r}")
        if self.mode == SEEDED_RANDOM and self.rng_seed is None:
            raise InputError("random tie policy requires rng_seed")
        if self.mode == DETERMINISTIC and self.rng_seed is not None:
            raise InputError("rng_seed applies to the random tie policy only")

    def ranks(self, tally: VoteTally) -> tuple[int, ...]:
        """Tie rank per party index; the lower rank wins a tie."""
        k = tally.party_count
        if self.mode == DETERMINISTIC:
            order = sorted(range(k), key=lambda i: (-tally.votes[i], i))
        else:
            order = list(range(k))
            random.Random(self.rng_seed).shuffle(order)
        ranks = [0] * k
        for position, index in enumerate(order):
            ranks[index] = position
        return tuple(ranks)


@dataclass(frozen=True)
class TieEvent:
    """Record of one tie: who was tied, and who the policy picked."""

    context: str
    tied: tuple[str, ...]
    winners: tuple[str, ...]


@dataclass(frozen=True)
class QuotaReport:
    """Ideal seat counts and integer quota bounds for one house size.

    ``remainders[i]`` is the fractional part of the ideal count
    (``ideals[i] - lowers[i]``, always in [0, 1)).  ``ideal_quota`` is the
    votes-per-seat price ``V/N``, undefined for an empty house.
    """

    party_ids: tuple[str, ...]
    house_size: int
    ideals: tuple[Fraction, ...]
    lowers: tuple[int, ...]
    uppers: tuple[int, ...]
    remainders: tuple[Fraction, ...]
    ideal_quota: Fraction | None

    def residuals_for(self, allocation: "Allocation") -> tuple[Fraction, ...]:
        """Exact ideal-minus-assigned residual per party under ``allocation``."""
        if allocation.party_ids != self.party_ids:
            raise InputError("allocation refers to a different party set")
        if allocation.house_size != self.house_size:
            raise InputError("allocation was computed for a different house size")
        return tuple(ideal - n for ideal, n in zip(self.ideals, allocation.seats))


@dataclass(frozen=True)
class Allocation:
    """A complete seat assignment: who got how many, and how."""

    party_ids: tuple[str, ...]
    seats: tuple[int, ...]
    house_size: int
    method: str
    form: str
    tie_events: tuple[TieEvent, ...] = ()

    def __post_init__(self):
        if len(self.party_ids) != len(self.seats):
            raise InputError("party_ids and seats must have equal length")
        if any(n < 0 for n in self.seats):
            raise InputError("negative seat count")
        if sum(self.seats) != self.house_size:
            raise InputError(
                f"seats sum to {sum(self.seats)}, expected house size {self.house_size}"
            )

    def seat_of(self, party_id: str) -> int:
        return self.seats[self.party_ids.index(party_id)]


@dataclass(frozen=True)
class DivisorStep:
    """State of the bidding table just before one seat is handed out.

    ``present_quota[i]`` is the votes-per-seat price at which party ``i``
    won its most recent seat (``None`` while seatless); ``next_quota[i]``
    is its standing bid for the next seat.
    """

    step: int
    seats_before: tuple[int, ...]
    present_quota: tuple[Fraction | None, ...]
    next_quota: tuple[Fraction, ...]
    winner: str


@dataclass(frozen=True)
class MultiplierStep:
    """One probe of the multiplier search: M, the seats it implies, their sum."""

    action: str  # "start" | "raise" | "lower" | "deassign"
    multiplier: Fraction
    seats: tuple[int, ...]
    total: int


@dataclass(frozen=True)
class TraceTable:
    """Step-by-step account of a divisor-table or multiplier run.

    For multiplicative runs, ``witness`` is a multiplier under which the
    rounded per-party counts sum exactly to the house size.
    ``witness_is_exact`` flips to False when a tie forced de-assignment:
    the witness multiplier then over-fills the house before the policy
    strips the surplus.  ``implied_quota`` converts the witness to the
    votes-per-seat scale when the rounding rule has a standard one
    (``V/M`` for floor rounding, ``V/(2M)`` for nearest rounding).
    """

    form: str
    method: str
    party_ids: tuple[str, ...]
    steps: tuple
    final_seats: tuple[int, ...]
    witness: Fraction | None = None
    witness_is_exact: bool = True
    implied_quota: Fraction | None = None


@dataclass(frozen=True)
class SeedDistribution:
    """First-stage (district) seats to be topped up toward proportionality.

    ``cap`` bounds the number of top-up seats in the residual-stop
    sequential run; ``fixed_extra`` demands an exact number of top-up
    seats instead.  The two are mutually exclusive.
    """

    party_ids: tuple[str, ...]
    district_seats: tuple[int, ...]
    cap: int | None = None
    fixed_extra: int | None = None

    def __post_init__(self):
        if len(self.party_ids) != len(self.district_seats):
            raise InputError("party_ids and district_seats must have equal length")
        for pid, d in zip(self.party_ids, self.district_seats):
            if isinstance(d, bool) or not isinstance(d, int) or d < 0:
                raise InputError(
                    f"party {pid!r}: district seats must be a non-negative integer"
                )
        if self.cap is not None and self.cap < 0:
            raise InputError("cap must be non-negative")
        if self.fixed_extra is not None and self.fixed_extra < 0:
            raise InputError("fixed_extra must be non-negative")
        if self.cap is not None and self.fixed_extra is not None:
            raise InputError("cap and fixed_extra are mutually exclusive")

    @property
    def total(self) -> int:
        return sum(self.district_seats)


@dataclass(frozen=True)
class SeatAward:
    """One top-up seat granted to the party with the largest deficit."""

    iteration: int
    house_target: int
    party: str
    deficit: Fraction


@dataclass(frozen=True)
class SweepStep:
    """Multiplier-sweep snapshot: M and the extra seats it implies."""

    multiplier: Fraction
    extra_seats: tuple[int, ...]
    total_extra: int


@dataclass(frozen=True)
class SeededRun:
    """Outcome of a two-stage run: district seats plus proportional top-up.

    ``stop_iteration`` is the number of top-up seats awarded.
    ``residuals`` are the ideal-minus-assigned gaps at the stopping point
    (for multiplier runs, evaluated at ``multiplier``).
    ``multiplier_interval``, when set, is one bracket of multipliers
    consistent with the reported seats: every M strictly inside it yields
    the same top-up counts, and the reported ``multiplier`` itself also
    does unless a tie forced de-assignment (then ``tie_events`` is
    non-empty and the interval is dropped).
    """

    party_ids: tuple[str, ...]
    district_seats: tuple[int, ...]
    extra_seats: tuple[int, ...]
    totals: tuple[int, ...]
    stop_iteration: int
    stop_reason: str
    residuals: tuple[Fraction, ...]
    awards: tuple[SeatAward, ...] = ()
    sweep: tuple[SweepStep, ...] = ()
    multiplier: Fraction | None = None
    multiplier_interval: tuple[Fraction, Fraction] | None = None
    tie_events: tuple[TieEvent, ...] = ()

    def __post_init__(self):
        if any(x < 0 for x in self.extra_seats):
            raise InputError("negative extra seat count")
        expected = tuple(d + x for d, x in zip(self.district_seats, self.extra_seats))
        if expected != self.totals:
            raise InputError("totals must equal district_seats + extra_seats")

    @property
    def house_size(self) -> int:
        return sum(self.totals)
