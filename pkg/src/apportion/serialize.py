"""JSON encoding/decoding for the exact domain objects.

Rationals travel as ``{"num": int, "den": int}`` — never as decimals, so
a report can be re-parsed into the identical exact values.  ``dumps`` is
canonical (sorted keys, fixed indentation, trailing newline): identical
data always produces byte-identical output.
"""

from __future__ import annotations

import dataclasses
import json
from fractions import Fraction

from .types import (
    Allocation,
    DivisorStep,
    MultiplierStep,
    QuotaReport,
    SeatAward,
    SeededRun,
    SweepStep,
    TieEvent,
    TraceTable,
    VoteTally,
)


def jsonify(value):
    """Recursively convert domain values to plain JSON-compatible data.

    Floats are deliberately unsupported: anything inexact reaching this
    function is a bug upstream.
    """
    if isinstance(value, Fraction):
        return {"num": value.numerator, "den": value.denominator}
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        return {
            f.name: jsonify(getattr(value, f.name))
            for f in dataclasses.fields(value)
        }
    if isinstance(value, dict):
        return {str(k): jsonify(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonify(v) for v in value]
    if value is None or isinstance(value, (bool, int, str)):
        return value
    raise TypeError(f"cannot serialise {type(value).__name__} value {value!r}")


def dumps(payload) -> str:
    """Canonical JSON text for a payload of plain/domain values."""
    return json.dumps(jsonify(payload), sort_keys=True, indent=2) + "\n"


def fraction_from_json(obj) -> Fraction | None:
    if obj is None:
        return None
    return Fraction(obj["num"], obj["den"])


def tie_event_from_json(obj) -> TieEvent:
    return TieEvent(
        context=obj["context"],
        tied=tuple(obj["tied"]),
        winners=tuple(obj["winners"]),
    )


def tally_from_json(obj) -> VoteTally:
    return VoteTally(tuple(obj["party_ids"]), tuple(obj["votes"]))


def allocation_from_json(obj) -> Allocation:
    return Allocation(
        party_ids=tuple(obj["party_ids"]),
        seats=tuple(obj["seats"]),
        house_size=obj["house_size"],
        method=obj["method"],
        form=obj["form"],
        tie_events=tuple(tie_event_from_json(e) for e in obj["tie_events"]),
    )


def quota_report_from_json(obj) -> QuotaReport:
    return QuotaReport(
        party_ids=tuple(obj["party_ids"]),
        house_size=obj["house_size"],
        ideals=tuple(fraction_from_json(x) for x in obj["ideals"]),
        lowers=tuple(obj["lowers"]),
        uppers=tuple(obj["uppers"]),
        remainders=tuple(fraction_from_json(x) for x in obj["remainders"]),
        ideal_quota=fraction_from_json(obj["ideal_quota"]),
    )


def _step_from_json(obj):
    if "step" in obj:
        return DivisorStep(
            step=obj["step"],
            seats_before=tuple(obj["seats_before"]),
            present_quota=tuple(fraction_from_json(x) for x in obj["present_quota"]),
            next_quota=tuple(fraction_from_json(x) for x in obj["next_quota"]),
            winner=obj["winner"],
        )
    return MultiplierStep(
        action=obj["action"],
        multiplier=fraction_from_json(obj["multiplier"]),
        seats=tuple(obj["seats"]),
        total=obj["total"],
    )


def trace_from_json(obj) -> TraceTable:
    return TraceTable(
        form=obj["form"],
        method=obj["method"],
        party_ids=tuple(obj["party_ids"]),
        steps=tuple(_step_from_json(s) for s in obj["steps"]),
        final_seats=tuple(obj["final_seats"]),
        witness=fraction_from_json(obj["witness"]),
        witness_is_exact=obj["witness_is_exact"],
        implied_quota=fraction_from_json(obj["implied_quota"]),
    )


def seeded_run_from_json(obj) -> SeededRun:
    interval = obj["multiplier_interval"]
    return SeededRun(
        party_ids=tuple(obj["party_ids"]),
        district_seats=tuple(obj["district_seats"]),
        extra_seats=tuple(obj["extra_seats"]),
        totals=tuple(obj["totals"]),
        stop_iteration=obj["stop_iteration"],
        stop_reason=obj["stop_reason"],
        residuals=tuple(fraction_from_json(x) for x in obj["residuals"]),
        awards=tuple(
            SeatAward(
                iteration=a["iteration"],
                house_target=a["house_target"],
                party=a["party"],
                deficit=fraction_from_json(a["deficit"]),
            )
            for a in obj["awards"]
        ),
        sweep=tuple(
            SweepStep(
                multiplier=fraction_from_json(s["multiplier"]),
                extra_seats=tuple(s["extra_seats"]),
                total_extra=s["total_extra"],
            )
            for s in obj["sweep"]
        ),
        multiplier=fraction_from_json(obj["multiplier"]),
        multiplier_interval=(
            None
            if interval is None
            else (fraction_from_json(interval[0]), fraction_from_json(interval[1]))
        ),
        tie_events=tuple(tie_event_from_json(e) for e in obj["tie_events"]),
    )
