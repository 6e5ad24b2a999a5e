"""Placement policies over availability rectangles.

Each policy ranks the feasible rectangles of one request by a single
criterion (start time, free-PE count, rectangle duration, or their
product) and takes the minimum or maximum.  Score ties always fall to the
earliest start time, which shortens waiting.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING, Callable, Sequence

if TYPE_CHECKING:
    from .calendar import AvailabilityRectangle


class Policy(str, Enum):
    """The seven placement strategies, in canonical order."""

    FF = "ff"
    PE_B = "pe_b"
    DU_B = "du_b"
    PEDU_B = "pedu_b"
    PE_W = "pe_w"
    DU_W = "du_w"
    PEDU_W = "pedu_w"

    @classmethod
    def from_token(cls, token: str) -> "Policy":
        try:
            return cls(token.strip().lower())
        except ValueError:
            valid = ", ".join(p.value for p in cls)
            raise ValueError(f"unknown policy {token!r}; expected one of: {valid}") from None


#: Canonical ordering used for reports and plots.
POLICY_ORDER: tuple[Policy, ...] = tuple(Policy)


@dataclass(frozen=True)
class RectangleScore:
    """Scoring view of a rectangle: free-PE count, rectangle duration,
    their product, and the candidate start.  Open-ended rectangles score
    infinite duration and area."""

    pe_count: int
    duration: int | float
    area: int | float
    start: int


def score(rect: "AvailabilityRectangle") -> RectangleScore:
    dur = rect.duration
    return RectangleScore(
        pe_count=rect.pe_count,
        duration=dur,
        area=rect.pe_count * dur,
        start=rect.start,
    )


_KeyFn = Callable[["AvailabilityRectangle"], tuple]

_KEYS: dict[Policy, _KeyFn] = {
    Policy.FF: lambda r: (r.start,),
    Policy.PE_B: lambda r: (r.pe_count, r.start),
    Policy.PE_W: lambda r: (-r.pe_count, r.start),
    Policy.DU_B: lambda r: (r.duration, r.start),
    Policy.DU_W: lambda r: (-r.duration, r.start),
    Policy.PEDU_B: lambda r: (r.pe_count * r.duration, r.start),
    Policy.PEDU_W: lambda r: (-(r.pe_count * r.duration), r.start),
}


def select(
    rectangles: Sequence["AvailabilityRectangle"], policy: Policy
) -> "AvailabilityRectangle":
    """Pick one rectangle per the policy; ties go to the earliest start.

    Pure function of its inputs: any permutation of the same rectangles
    yields the same choice, since candidate starts are distinct.
    """
    if not rectangles:
        raise ValueError("cannot select from zero feasible rectangles")
    return min(rectangles, key=_KEYS[policy])
