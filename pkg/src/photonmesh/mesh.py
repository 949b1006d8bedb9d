"""Mesh geometry: layouts, crossings, segments and component inventory.

A mesh is a planar network of 2x2 tunable couplers ("crossings", each one
MZI bundled with its input phase shifter) arranged in columns, plus a final
layer of output phase shifters.  Conventions used throughout the package:

* modes are numbered 1..n with mode n drawn at the top of the diagram,
* columns are numbered 1..d, light propagates from column 1 to column d,
* a crossing is identified by ``(column, lower_mode)`` and couples modes
  ``lower_mode`` and ``lower_mode + 1``,
* a crossing ``(c, m)`` exists iff ``m == c (mod 2)`` (1-based parity rule),
* a segment ``(mode, slot)`` is the stretch of one mode between columns
  ``slot`` and ``slot + 1``; slot 0 is the input lead, slot d the output lead.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, NamedTuple, Optional

import numpy as np

from .exceptions import LayoutError, SettingsError

RECTANGULAR = "rectangular"
SHALLOW_BRICK_WALL = "shallow_brick_wall"


class Crossing(NamedTuple):
    column: int
    lower_mode: int


class Segment(NamedTuple):
    mode: int
    slot: int


@dataclass(frozen=True)
class MeshLayout:
    """Geometry descriptor: kind, mode count n and column depth d."""

    kind: str
    n: int
    d: int

    def __post_init__(self):
        if self.kind not in (RECTANGULAR, SHALLOW_BRICK_WALL):
            raise LayoutError(f"unknown layout kind {self.kind!r}")
        if self.n < 2:
            raise LayoutError(f"mode count must be >= 2, got {self.n}")
        if self.kind == RECTANGULAR and self.d != self.n:
            raise LayoutError(
                f"rectangular layout requires depth d == n, got d={self.d}, n={self.n}"
            )
        if self.kind == SHALLOW_BRICK_WALL and not 1 <= self.d < self.n:
            raise LayoutError(
                f"shallow layout requires 1 <= d < n, got d={self.d}, n={self.n}"
            )

    @classmethod
    def rectangular(cls, n: int) -> "MeshLayout":
        return cls(RECTANGULAR, n, n)

    @classmethod
    def shallow(cls, n: int, d: int) -> "MeshLayout":
        return cls(SHALLOW_BRICK_WALL, n, d)


class ComponentCounts(NamedTuple):
    beamsplitters: int
    phase_shifters: int
    total: int


def crossing_exists(layout: MeshLayout, column: int, lower_mode: int) -> bool:
    return (
        1 <= column <= layout.d
        and 1 <= lower_mode <= layout.n - 1
        and lower_mode % 2 == column % 2
    )


def template_crossings(layout: MeshLayout) -> frozenset[tuple[int, int]]:
    """All (column, lower_mode) pairs admitted by the parity rule."""
    return frozenset(
        (c, m)
        for c in range(1, layout.d + 1)
        for m in range(1, layout.n)
        if m % 2 == c % 2
    )


def reflected_template_crossings(layout: MeshLayout) -> frozenset[tuple[int, int]]:
    """The left-right mirror image of the parity pattern (anti-parity brick).

    Columns are compacted to start at 1; for n = 2 the mirror collapses onto
    the canonical single-crossing pattern.
    """
    anti = [
        (c, m)
        for c in range(1, layout.d + 1)
        for m in range(1, layout.n)
        if m % 2 != c % 2
    ]
    if not anti:
        return frozenset()
    shift = min(c for c, _ in anti) - 1
    return frozenset((c - shift, m) for c, m in anti)


class Mesh:
    """Immutable mesh geometry built from a :class:`MeshLayout`.

    Crossings are ordered by (column, lower_mode); this order indexes the
    per-crossing settings arrays.
    """

    def __init__(self, layout: MeshLayout):
        self.layout = layout
        self.crossings: tuple[Crossing, ...] = tuple(
            Crossing(c, m) for (c, m) in sorted(template_crossings(layout))
        )
        self._index = {x: i for i, x in enumerate(self.crossings)}
        self._by_column: dict[int, tuple[Crossing, ...]] = {}
        for x in self.crossings:
            self._by_column.setdefault(x.column, ())
        for x in self.crossings:
            self._by_column[x.column] = self._by_column[x.column] + (x,)

    @property
    def n(self) -> int:
        return self.layout.n

    @property
    def d(self) -> int:
        return self.layout.d

    def __eq__(self, other) -> bool:
        return isinstance(other, Mesh) and self.layout == other.layout

    def __hash__(self) -> int:
        return hash(self.layout)

    def __repr__(self) -> str:
        return f"Mesh({self.layout})"

    def index_of(self, crossing: Crossing) -> int:
        try:
            return self._index[Crossing(*crossing)]
        except KeyError:
            raise LayoutError(f"crossing {crossing} does not exist in {self!r}") from None

    def has_crossing(self, crossing: Crossing) -> bool:
        return Crossing(*crossing) in self._index

    def column(self, c: int) -> tuple[Crossing, ...]:
        return self._by_column.get(c, ())

    def crossing_on_mode(self, column: int, mode: int) -> Optional[Crossing]:
        """The crossing in ``column`` touching ``mode``, if any.

        At most one of (column, mode) and (column, mode - 1) satisfies the
        parity rule, so the result is unique.
        """
        if not 1 <= column <= self.d:
            return None
        if crossing_exists(self.layout, column, mode):
            return Crossing(column, mode)
        if crossing_exists(self.layout, column, mode - 1):
            return Crossing(column, mode - 1)
        return None

    def segments(self) -> Iterator[Segment]:
        for mode in range(1, self.n + 1):
            for slot in range(self.d + 1):
                yield Segment(mode, slot)

    def num_segments(self) -> int:
        return self.n * (self.d + 1)

    def contains_segment(self, segment: Segment) -> bool:
        mode, slot = segment
        return 1 <= mode <= self.n and 0 <= slot <= self.d

    def check_segment(self, segment: Segment) -> Segment:
        segment = Segment(*segment)
        if not self.contains_segment(segment):
            raise LayoutError(f"segment {segment} out of range for {self!r}")
        return segment


def build_mesh(layout: MeshLayout) -> Mesh:
    """Construct the mesh for a validated layout."""
    return Mesh(layout)


def component_counts(mesh: Mesh) -> ComponentCounts:
    """Beam-splitter and phase-shifter inventory.

    Every crossing carries one phase shifter; the output layer carries n - 1
    (one mode is the global-phase reference).
    """
    bs = len(mesh.crossings)
    ps = bs + mesh.n - 1
    return ComponentCounts(bs, ps, bs + ps)


def neighbors(mesh: Mesh, segment: Segment) -> tuple[Optional[Crossing], Optional[Crossing]]:
    """Crossings adjacent to a segment: (left, in column slot) and (right, slot+1)."""
    mode, slot = mesh.check_segment(segment)
    left = mesh.crossing_on_mode(slot, mode) if slot >= 1 else None
    right = mesh.crossing_on_mode(slot + 1, mode) if slot + 1 <= mesh.d else None
    return left, right


class MeshSettings:
    """Programmable state: per-crossing (theta, phi) plus output phases.

    theta is the coupler angle in [0, pi/2] (0 = bar, pi/2 = cross), phi the
    input-arm phase in [0, 2*pi).  Arrays are indexed by the mesh crossing
    order; ``output_phases`` has one entry per mode.
    """

    def __init__(self, mesh: Mesh, thetas=None, phis=None, output_phases=None):
        k = len(mesh.crossings)
        self.mesh = mesh
        self.thetas = np.zeros(k) if thetas is None else np.asarray(thetas, dtype=float).copy()
        self.phis = np.zeros(k) if phis is None else np.asarray(phis, dtype=float).copy()
        self.output_phases = (
            np.zeros(mesh.n)
            if output_phases is None
            else np.asarray(output_phases, dtype=float).copy()
        )
        if self.thetas.shape != (k,) or self.phis.shape != (k,):
            raise SettingsError(
                f"settings cover {self.thetas.shape[0]} crossings, mesh has {k}"
            )
        if self.output_phases.shape != (mesh.n,):
            raise SettingsError(
                f"output phase vector has length {self.output_phases.shape[0]}, "
                f"expected {mesh.n}"
            )

    @classmethod
    def bar_state(cls, mesh: Mesh) -> "MeshSettings":
        """All crossings bar, all phases zero (the identity configuration)."""
        return cls(mesh)

    def copy(self) -> "MeshSettings":
        return MeshSettings(self.mesh, self.thetas, self.phis, self.output_phases)

    def get(self, crossing: Crossing) -> tuple[float, float]:
        i = self.mesh.index_of(crossing)
        return float(self.thetas[i]), float(self.phis[i])

    def set(self, crossing: Crossing, theta: float, phi: float) -> None:
        i = self.mesh.index_of(crossing)
        self.thetas[i] = theta
        self.phis[i] = phi

    def validate_for(self, mesh: Mesh) -> None:
        if mesh != self.mesh:
            raise SettingsError(f"settings built for {self.mesh!r}, applied to {mesh!r}")
