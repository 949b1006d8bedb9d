"""Defect specifications: what can go wrong on a fabricated mesh.

A defect names a physical location and the faulty behaviour realized there.
Planning only needs the location; simulation applies the behaviour.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from .exceptions import DefectError
from .mesh import Crossing, Mesh, Segment


@dataclass(frozen=True)
class SegmentLoss:
    """Excess loss on one segment; eta is the amplitude transmissivity in [0, 1]."""

    segment: Segment
    eta: float

    def __post_init__(self):
        object.__setattr__(self, "segment", Segment(*self.segment))
        if not 0.0 <= self.eta <= 1.0:
            raise DefectError(f"transmissivity must lie in [0, 1], got {self.eta}")


@dataclass(frozen=True)
class StuckCrossing:
    """Crossing unresponsive to control, frozen at (theta, phi)."""

    crossing: Crossing
    theta: float
    phi: float

    def __post_init__(self):
        object.__setattr__(self, "crossing", Crossing(*self.crossing))


@dataclass(frozen=True)
class RangeLimitedCrossing:
    """Crossing with a restricted extinction-ratio range: theta is clipped."""

    crossing: Crossing
    theta_min: float
    theta_max: float

    def __post_init__(self):
        object.__setattr__(self, "crossing", Crossing(*self.crossing))
        ok = 0.0 <= self.theta_min <= self.theta_max <= 1.5707963267948967
        if not ok:
            raise DefectError(
                f"need 0 <= theta_min <= theta_max <= pi/2, got "
                f"[{self.theta_min}, {self.theta_max}]"
            )


CROSSING_PHASE = "crossing"
OUTPUT_PHASE = "output"


@dataclass(frozen=True)
class DeadPhaseShifter:
    """Phase shifter stuck at a value.

    ``site`` is either ``("crossing", Crossing)`` for the input-arm shifter of
    a crossing, or ``("output", mode)`` for an output-layer shifter.
    """

    site: tuple
    value: float

    def __post_init__(self):
        kind = self.site[0]
        if kind == CROSSING_PHASE:
            object.__setattr__(self, "site", (CROSSING_PHASE, Crossing(*self.site[1])))
        elif kind == OUTPUT_PHASE:
            object.__setattr__(self, "site", (OUTPUT_PHASE, int(self.site[1])))
        else:
            raise DefectError(f"unknown phase shifter site {self.site!r}")

    @classmethod
    def at_crossing(cls, crossing: Crossing, value: float) -> "DeadPhaseShifter":
        return cls((CROSSING_PHASE, Crossing(*crossing)), value)

    @classmethod
    def at_output(cls, mode: int, value: float) -> "DeadPhaseShifter":
        return cls((OUTPUT_PHASE, mode), value)


DefectSpec = Union[SegmentLoss, StuckCrossing, RangeLimitedCrossing, DeadPhaseShifter]


def validate_defect(mesh: Mesh, defect: DefectSpec) -> None:
    """Check that the defect references a real location on the mesh."""
    if isinstance(defect, SegmentLoss):
        mesh.check_segment(defect.segment)
    elif isinstance(defect, (StuckCrossing, RangeLimitedCrossing)):
        if not mesh.has_crossing(defect.crossing):
            raise DefectError(f"crossing {defect.crossing} does not exist in {mesh!r}")
    elif isinstance(defect, DeadPhaseShifter):
        kind, where = defect.site
        if kind == CROSSING_PHASE:
            if not mesh.has_crossing(where):
                raise DefectError(f"crossing {where} does not exist in {mesh!r}")
        else:
            if not 1 <= where <= mesh.n:
                raise DefectError(f"output mode {where} out of range for {mesh!r}")
    else:
        raise DefectError(f"unknown defect kind {type(defect).__name__}")


def defect_segments(mesh: Mesh, defect: DefectSpec) -> tuple[Segment, ...]:
    """Single-mode segments equivalent to the defect.

    A faulty crossing is equivalent to independent defects on its two input
    segments: if those stay dark, no light ever enters the crossing.  A dead
    crossing phase shifter sits on the crossing's lower input segment; a dead
    output shifter is treated as a defect on the adjacent output lead.
    """
    validate_defect(mesh, defect)
    if isinstance(defect, SegmentLoss):
        return (defect.segment,)
    if isinstance(defect, (StuckCrossing, RangeLimitedCrossing)):
        c, m = defect.crossing
        return (Segment(m, c - 1), Segment(m + 1, c - 1))
    kind, where = defect.site
    if kind == CROSSING_PHASE:
        c, m = where
        return (Segment(m, c - 1),)
    return (Segment(where, mesh.d),)
