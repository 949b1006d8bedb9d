"""Routing plans that isolate defects, and embedding of smaller targets.

A single-segment defect is circumvented by routing one discarded input port
to one discarded output port along a path through the defect: crossings on
the defect's diagonal are fixed to cross (fully transmissive), crossings met
while following the mesh edges toward the appropriate corners are fixed to
bar (fully reflective).  Where a walk leaves the mesh at an interior port,
the staircase of boundary crossings between that port and the corner is
barred as well; this is exactly what leaves one-less-mode worth of tunable
crossings behind.

Every segment lies on one diagonal, fixed by parity: northwest-southeast
when (mode - slot) is even (the path descends toward the output side),
northeast-southwest otherwise (the path ascends).  Plans for ascending
diagonals leave a left-right mirrored tunable pattern; embedding handles
both orientations exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .decompose import asap_schedule, solve_reflected
from .defects import DefectSpec, defect_segments
from .exceptions import EmbedStructureError, PlanError, UnsalvageableError
from .mesh import (
    RECTANGULAR,
    Crossing,
    Mesh,
    MeshLayout,
    MeshSettings,
    Segment,
    build_mesh,
    reflected_template_crossings,
    template_crossings,
)
from .simulate import transfer

TWO_PI = 2.0 * np.pi

NWSE = "nwse"
NESW = "nesw"
ABOVE = "above"
BELOW = "below"


@dataclass(frozen=True)
class DiagonalClass:
    orientation: str  # NWSE or NESW
    side: str  # ABOVE or BELOW the corresponding corner-to-corner diagonal


def orientation_of(segment: Segment) -> str:
    """Diagonal orientation admitted by the parity rule."""
    mode, slot = segment
    return NWSE if (mode - slot) % 2 == 0 else NESW


def classify_segment(mesh: Mesh, segment: Segment) -> DiagonalClass:
    """Orientation and side of the diagonal through a segment.

    Interior segments have exactly one through-going diagonal (the left and
    right neighbor crossings couple (m, m+1) on one side and (m-1, m) on the
    other); boundary segments take the orientation of the edge path they sit
    on, which extends the same parity rule.
    """
    mode, slot = mesh.check_segment(segment)
    orientation = orientation_of(Segment(mode, slot))
    if orientation == NWSE:
        # Descending diagonals share mode + slot; the one through the
        # top-left corner has mode + slot == n.
        side = ABOVE if mode + slot >= mesh.n else BELOW
    else:
        # Ascending diagonals share slot - mode; the one through the
        # bottom-left corner has slot - mode == -1.
        side = BELOW if slot - mode >= -1 else ABOVE
    return DiagonalClass(orientation, side)


@dataclass(frozen=True)
class RoutingPlan:
    """Fixed crossings, discarded ports and isolated segments of a plan."""

    layout: MeshLayout
    fixed_cross: frozenset[Crossing]
    fixed_bar: frozenset[Crossing]
    dont_care: frozenset[Crossing]
    discarded_inputs: tuple[int, ...]
    discarded_outputs: tuple[int, ...]
    isolated_segments: frozenset[Segment]

    @classmethod
    def empty(cls, mesh: Mesh) -> "RoutingPlan":
        return cls(mesh.layout, frozenset(), frozenset(), frozenset(), (), (), frozenset())

    @property
    def k(self) -> int:
        return len(self.discarded_inputs)

    def fixed_crossings(self) -> frozenset[Crossing]:
        return self.fixed_cross | self.fixed_bar | self.dont_care

    def is_tunable(self, crossing: Crossing) -> bool:
        return Crossing(*crossing) not in self.fixed_crossings()

    def used_inputs(self) -> list[int]:
        dropped = set(self.discarded_inputs)
        return [m for m in range(1, self.layout.n + 1) if m not in dropped]

    def used_outputs(self) -> list[int]:
        dropped = set(self.discarded_outputs)
        return [m for m in range(1, self.layout.n + 1) if m not in dropped]

    def input_relabel(self) -> dict[int, int]:
        """Order-preserving compaction old -> new over the used input ports."""
        return {old: i + 1 for i, old in enumerate(self.used_inputs())}

    def output_relabel(self) -> dict[int, int]:
        return {old: i + 1 for i, old in enumerate(self.used_outputs())}


def _first_crossing(layout: MeshLayout, k: int) -> Optional[Crossing]:
    c = 1 if k % 2 == 1 else 2
    return Crossing(c, k) if c <= layout.d else None


def _last_crossing(layout: MeshLayout, k: int) -> Optional[Crossing]:
    c = layout.d if layout.d % 2 == k % 2 else layout.d - 1
    return Crossing(c, k) if c >= 1 else None


def plan_single(mesh: Mesh, defect_segment: Segment) -> RoutingPlan:
    """Plan isolating one defective segment.

    Both walks fix every crossing they traverse: crossings that move the walk
    toward its vertical tendency are crossed, the rest (met only on the
    extreme modes) are barred.  Walks ending on an interior port additionally
    bar the boundary staircase between that port and the corner.
    """
    seg = mesh.check_segment(defect_segment)
    orientation = orientation_of(seg)
    crosses: set[Crossing] = set()
    bars: set[Crossing] = set()
    isolated: set[Segment] = {seg}

    def walk(direction: int, upward: bool) -> int:
        mode, slot = seg
        while (slot < mesh.d) if direction > 0 else (slot > 0):
            x = mesh.crossing_on_mode(slot + (direction > 0), mode)
            if x is not None:
                toward = (x.lower_mode == mode) == upward
                if toward:
                    crosses.add(x)
                    mode += 1 if x.lower_mode == mode else -1
                else:
                    bars.add(x)
            slot += direction
            isolated.add(Segment(mode, slot))
        return mode

    out_port = walk(+1, upward=(orientation == NESW))
    in_port = walk(-1, upward=(orientation == NWSE))

    def bar_staircase(start: int, step: int, pick) -> None:
        k = start
        while 1 <= k <= mesh.n - 1:
            x = pick(mesh.layout, k)
            if x is not None:
                bars.add(x)
            k += step

    if orientation == NWSE:
        bar_staircase(in_port + 1, +2, _first_crossing)
        bar_staircase(out_port - 2, -2, _last_crossing)
    else:
        bar_staircase(in_port - 2, -2, _first_crossing)
        bar_staircase(out_port + 1, +2, _last_crossing)

    return RoutingPlan(
        layout=mesh.layout,
        fixed_cross=frozenset(crosses),
        fixed_bar=frozenset(bars),
        dont_care=frozenset(),
        discarded_inputs=(in_port,),
        discarded_outputs=(out_port,),
        isolated_segments=frozenset(isolated),
    )


def reduce_defects(mesh: Mesh, defects: Sequence[DefectSpec]) -> tuple[Segment, ...]:
    """Distinct single-mode defect segments equivalent to the defect list."""
    seen: dict[Segment, None] = {}
    for defect in defects:
        for seg in defect_segments(mesh, defect):
            seen[seg] = None
    return tuple(sorted(seen, key=lambda s: (s.slot, s.mode)))


def merge_plans(plans: Sequence[RoutingPlan]) -> RoutingPlan:
    """Union of plans from one mesh; conflicting claims become don't-cares.

    A crossing required as cross by one plan and bar by another carries no
    light once both paths are isolated, so any setting works; discarded port
    lists are deduplicated and the result must stay square.
    """
    plans = list(plans)
    if not plans:
        raise PlanError("nothing to merge")
    layout = plans[0].layout
    if any(p.layout != layout for p in plans):
        raise PlanError("plans were built for different meshes")

    claims: dict[Crossing, set[str]] = {}
    for plan in plans:
        for x in plan.fixed_cross:
            claims.setdefault(x, set()).add("cross")
        for x in plan.fixed_bar:
            claims.setdefault(x, set()).add("bar")
        for x in plan.dont_care:
            claims.setdefault(x, set()).update(("cross", "bar"))

    cross = frozenset(x for x, c in claims.items() if c == {"cross"})
    bar = frozenset(x for x, c in claims.items() if c == {"bar"})
    dont = frozenset(x for x, c in claims.items() if len(c) == 2)

    d_in = tuple(sorted({p for plan in plans for p in plan.discarded_inputs}))
    d_out = tuple(sorted({p for plan in plans for p in plan.discarded_outputs}))
    if len(d_in) != len(d_out):
        raise PlanError(
            f"merged plan discards {len(d_in)} inputs but {len(d_out)} outputs; "
            "the defect cluster cannot be circumvented by independent paths"
        )
    isolated = frozenset().union(*(plan.isolated_segments for plan in plans))
    return RoutingPlan(layout, cross, bar, dont, d_in, d_out, isolated)


def _trace_isolated(mesh: Mesh, cross, bar, dont, discarded_inputs):
    """Follow discarded-input light through the fixed crossings.

    Returns (isolated segments, exit modes); raises if the light would leak
    into a crossing that must stay tunable or carries used light through a
    don't-care crossing.
    """
    iso = {m: (m in set(discarded_inputs)) for m in range(1, mesh.n + 1)}
    segments = {Segment(m, 0) for m in discarded_inputs}
    for c in range(1, mesh.d + 1):
        for x in mesh.column(c):
            lo, hi = iso[x.lower_mode], iso[x.lower_mode + 1]
            if x in cross:
                iso[x.lower_mode], iso[x.lower_mode + 1] = hi, lo
            elif x in bar or x in dont:
                if x in dont and lo != hi:
                    raise PlanError(
                        f"don't-care crossing {x} would mix used and isolated light"
                    )
            elif lo != hi:
                raise PlanError(f"tunable crossing {x} would leak isolated light")
        for m in range(1, mesh.n + 1):
            if iso[m]:
                segments.add(Segment(m, c))
    exits = tuple(sorted(m for m in iso if iso[m]))
    return frozenset(segments), exits


def _assemble_plan(mesh: Mesh, claims: dict, discarded_inputs) -> RoutingPlan:
    """Build a plan from setting claims, deriving isolation and exit ports."""
    cross = frozenset(x for x, c in claims.items() if c == {"cross"})
    bar = frozenset(x for x, c in claims.items() if c == {"bar"})
    dont = frozenset(x for x, c in claims.items() if len(c) == 2)
    d_in = tuple(sorted(set(discarded_inputs)))
    isolated, d_out = _trace_isolated(mesh, cross, bar, dont, d_in)
    if len(d_out) != len(d_in):
        raise PlanError(
            f"{len(d_in)} discarded inputs exit at {len(d_out)} output ports"
        )
    return RoutingPlan(mesh.layout, cross, bar, dont, d_in, d_out, isolated)


def _claims_of(plan: RoutingPlan, claims: dict) -> dict:
    for x in plan.fixed_cross:
        claims.setdefault(x, set()).add("cross")
    for x in plan.fixed_bar:
        claims.setdefault(x, set()).add("bar")
    for x in plan.dont_care:
        claims.setdefault(x, set()).update(("cross", "bar"))
    return claims


def _plan_on_template(template: str, layout: MeshLayout, segment: Segment):
    """Fixed sets and discarded input for a defect inside a virtual circuit.

    For the canonical template this is a direct plan.  A reflected template
    is the canonical mesh seen in a mirror: mode flip for odd sizes, column
    reversal for even depths; the plan of the transformed problem maps back
    through the same mirror (column reversal exchanges the roles of the
    discarded input and output).
    """
    base = build_mesh(layout)
    if template == "canonical":
        p = plan_single(base, segment)
        return p.fixed_cross, p.fixed_bar, p.discarded_inputs[0]
    n, d = layout.n, layout.d
    if n % 2 == 1:
        p = plan_single(base, Segment(n + 1 - segment.mode, segment.slot))
        flip = lambda x: Crossing(x.column, n - x.lower_mode)  # noqa: E731
        return (
            frozenset(flip(x) for x in p.fixed_cross),
            frozenset(flip(x) for x in p.fixed_bar),
            n + 1 - p.discarded_inputs[0],
        )
    if d % 2 == 0:
        p = plan_single(base, Segment(segment.mode, d - segment.slot))
        rev = lambda x: Crossing(d + 1 - x.column, x.lower_mode)  # noqa: E731
        return (
            frozenset(rev(x) for x in p.fixed_cross),
            frozenset(rev(x) for x in p.fixed_bar),
            p.discarded_outputs[0],
        )
    raise PlanError(
        f"no mirror transform exists for a reflected {layout.kind} "
        f"template with n={n}, d={d}"
    )


def _compose_sequential(mesh: Mesh, segments) -> RoutingPlan:
    """Circumvent defects one at a time, re-planning inside the survivor.

    Independent per-defect paths can compete for the same edge port; planning
    the next defect in the effective interferometer left by the previous
    plans always succeeds.  The virtual plan's fixed crossings pull back to
    physical ones through the label propagation map.
    """
    remaining = list(segments)
    claims: dict = {}
    d_in: set[int] = set()
    plan: Optional[RoutingPlan] = None
    while remaining:
        seg = remaining[0]
        if plan is None:
            step = plan_single(mesh, seg)
            _claims_of(step, claims)
            d_in.update(step.discarded_inputs)
        else:
            analysis = analyze_plan(mesh, plan)
            if analysis.template == "invalid":
                raise PlanError(
                    "defect cluster cannot be circumvented: "
                    + "; ".join(analysis.problems)
                )
            eff_layout, in_map, _ = effective_layout(mesh, plan)
            occ = analysis.occupancy[seg]
            if occ[0] != "wire":
                raise PlanError(f"lost track of defect segment {tuple(seg)}")
            vcross, vbar, vport = _plan_on_template(
                analysis.template, eff_layout, Segment(occ[1], occ[2])
            )
            inverse_cols = {vc: x for x, vc in analysis.virtual_columns.items()}
            for vx in vcross:
                claims.setdefault(inverse_cols[tuple(vx)], set()).add("cross")
            for vx in vbar:
                claims.setdefault(inverse_cols[tuple(vx)], set()).add("bar")
            inverse_in = {v: k for k, v in in_map.items()}
            d_in.add(inverse_in[vport])
        plan = _assemble_plan(mesh, claims, d_in)
        still = [r for r in remaining if r not in plan.isolated_segments]
        if len(still) == len(remaining):
            raise PlanError(f"no progress isolating segment {tuple(seg)}")
        remaining = still
    return plan if plan is not None else RoutingPlan.empty(mesh)


def plan_defects(mesh: Mesh, defects: Sequence[DefectSpec]) -> RoutingPlan:
    """Plan circumventing every defect in the list.

    Defect segments are first planned independently and merged, preferring
    candidates whose path already isolates other defect segments (defects on
    a shared path then cost a single discarded port pair).  Clusters whose
    independent paths collide fall back to sequential circumvention inside
    the shrinking effective interferometer.
    """
    segments = list(reduce_defects(mesh, defects))
    if not segments:
        return RoutingPlan.empty(mesh)
    try:
        remaining = list(segments)
        merged = RoutingPlan.empty(mesh)
        while remaining:
            candidates = [(seg, plan_single(mesh, seg)) for seg in remaining]
            _, best = max(
                candidates,
                key=lambda item: (
                    sum(r in item[1].isolated_segments for r in remaining),
                    -item[0].slot,
                    -item[0].mode,
                ),
            )
            merged = merge_plans([merged, best])
            remaining = [r for r in remaining if r not in merged.isolated_segments]
        if merged.k and analyze_plan(mesh, merged).template == "invalid":
            raise PlanError("independent paths interfere")
    except UnsalvageableError:
        raise
    except PlanError:
        merged = _compose_sequential(mesh, segments)
    return merged


def effective_layout(mesh: Mesh, plan: RoutingPlan):
    """Layout of the surviving interferometer plus the port relabel maps."""
    if plan.layout != mesh.layout:
        raise PlanError(f"plan built for {plan.layout}, applied to {mesh.layout}")
    if len(plan.discarded_inputs) != len(plan.discarded_outputs):
        raise PlanError("plan discards unequal numbers of input and output ports")
    k = plan.k
    n = mesh.n - k
    if n < 2:
        raise UnsalvageableError(
            f"{k} discarded port pairs leave {n} mode(s); nothing left to salvage"
        )
    if mesh.layout.kind == RECTANGULAR:
        layout = MeshLayout.rectangular(n)
    else:
        d = mesh.d - k
        if d < 1:
            raise UnsalvageableError(
                f"{k} discarded port pairs leave depth {d}; nothing left to salvage"
            )
        layout = MeshLayout.shallow(n, d)
    return layout, plan.input_relabel(), plan.output_relabel()


@dataclass
class PlanAnalysis:
    """Virtual circuit left behind by a plan, from label propagation.

    ``stream`` interleaves, in application order, tunable ops
    ("op", crossing, lower_wire) and unit-modulus constants picked up by used
    wires from fixed crossings ("const", wire, factor).  ``occupancy`` maps
    every physical segment to ("wire", index, virtual_slot) or ("iso", tag),
    locating each segment inside the effective interferometer.
    """

    template: str  # "canonical", "reflected" or "invalid"
    stream: list
    virtual_columns: dict[Crossing, tuple[int, int]]  # crossing -> (vcol, wire)
    wire_at_mode: dict[int, int]  # final physical mode -> wire
    occupancy: dict[Segment, tuple]
    tunable_count: int
    effective_n: int
    problems: list[str] = field(default_factory=list)

    @property
    def free_phase_shifters(self) -> int:
        # One phase per tunable crossing plus the independent output phases of
        # the surviving interferometer (one of its ports is the global
        # reference, the discarded ports' shifters are unusable).
        return self.tunable_count + self.effective_n - 1


def analyze_plan(mesh: Mesh, plan: RoutingPlan) -> PlanAnalysis:
    """Propagate port labels through the fixed crossings of a plan.

    Bars preserve the wire on its mode, fixed crosses swap a wire with the
    isolated path light (picking up the cross matrix entry -1 when the wire
    descends), and every tunable crossing must couple two adjacent labeled
    wires.  The tunable crossings, scheduled as early as parity allows, must
    reproduce the surviving layout's crossing pattern or its mirror image.
    """
    eff_layout, in_map, _ = effective_layout(mesh, plan)
    problems: list[str] = []
    iso_inputs = set(plan.discarded_inputs)
    state: dict[int, tuple] = {}
    for mode in range(1, mesh.n + 1):
        state[mode] = ("iso", mode) if mode in iso_inputs else ("wire", in_map[mode])

    stream: list = []
    ops: list[tuple[Crossing, int]] = []
    last_vcol: dict[int, int] = {}
    occupancy: dict[Segment, tuple] = {}

    def record_slot(slot):
        for mode, s in state.items():
            if s[0] == "wire":
                occupancy[Segment(mode, slot)] = ("wire", s[1], last_vcol.get(s[1], 0))
            else:
                occupancy[Segment(mode, slot)] = s

    record_slot(0)
    for c in range(1, mesh.d + 1):
        for x in mesh.column(c):
            lo = state[x.lower_mode]
            hi = state[x.lower_mode + 1]
            if x in plan.fixed_cross:
                if lo[0] == "wire" and hi[0] == "wire":
                    problems.append(f"fixed cross {x} mixes two used wires")
                if lo[0] == "wire":
                    # ascending wire picks up the +1 entry; nothing to record
                    pass
                if hi[0] == "wire":
                    stream.append(("const", hi[1], -1.0))
                state[x.lower_mode], state[x.lower_mode + 1] = hi, lo
            elif x in plan.dont_care:
                if lo[0] == "wire" or hi[0] == "wire":
                    problems.append(f"don't-care crossing {x} carries used light")
            elif x in plan.fixed_bar:
                pass
            else:
                if lo[0] != "wire" or hi[0] != "wire":
                    problems.append(f"tunable crossing {x} touches an isolated mode")
                    continue
                if hi[1] != lo[1] + 1:
                    problems.append(
                        f"tunable crossing {x} couples non-adjacent wires "
                        f"{lo[1]} and {hi[1]}"
                    )
                    continue
                a = lo[1]
                vcol = max(last_vcol.get(a, 0), last_vcol.get(a + 1, 0)) + 1
                last_vcol[a] = vcol
                last_vcol[a + 1] = vcol
                stream.append(("op", x, a))
                ops.append((x, a, vcol))
        record_slot(c)

    iso_final = {mode for mode, s in state.items() if s[0] == "iso"}
    if iso_final != set(plan.discarded_outputs):
        problems.append(
            f"isolated light exits at {sorted(iso_final)}, "
            f"plan discards outputs {sorted(plan.discarded_outputs)}"
        )
    wire_at_mode = {mode: s[1] for mode, s in state.items() if s[0] == "wire"}

    virtual_columns = {x: (col, a) for x, a, col in ops}
    vset = {(col, a) for (col, a) in virtual_columns.values()}
    if problems:
        template = "invalid"
    elif vset == template_crossings(eff_layout):
        template = "canonical"
    elif vset == reflected_template_crossings(eff_layout):
        template = "reflected"
    else:
        template = "invalid"
        problems.append("surviving tunable crossings do not form a full template")

    return PlanAnalysis(
        template=template,
        stream=stream,
        virtual_columns=virtual_columns,
        wire_at_mode=wire_at_mode,
        occupancy=occupancy,
        tunable_count=len(ops),
        effective_n=eff_layout.n,
        problems=problems,
    )


def plan_settings(mesh: Mesh, plan: RoutingPlan) -> MeshSettings:
    """Fixed settings only: crosses at theta = pi/2, everything else bar."""
    settings = MeshSettings.bar_state(mesh)
    for x in plan.fixed_cross:
        settings.set(x, np.pi / 2, 0.0)
    return settings


def embed_target(mesh: Mesh, plan: RoutingPlan, target: MeshSettings) -> MeshSettings:
    """Full mesh settings realizing ``target`` on the surviving ports.

    Target settings address the effective layout.  For canonical survivors
    they transfer one-to-one; for mirrored survivors the target matrix is
    re-factored through the reflected template.  The -1 entries wires pick up
    from fixed crosses are compensated through the phase of the next tunable
    crossing downstream (and ultimately the output phases), so the effective
    matrix equals the target exactly.
    """
    eff_layout, _, out_map = effective_layout(mesh, plan)
    eff_mesh = build_mesh(eff_layout)
    target.validate_for(eff_mesh)

    analysis = analyze_plan(mesh, plan)
    if analysis.template == "invalid":
        raise EmbedStructureError(
            "plan leaves an unusable structure: " + "; ".join(analysis.problems)
        )

    if analysis.template == "canonical":
        virtual = {x: target.get(Crossing(col, a)) for x, (col, a) in analysis.virtual_columns.items()}
        target_out = target.output_phases
    else:
        if eff_layout.kind != RECTANGULAR:
            raise EmbedStructureError(
                "mirrored shallow structures cannot realize canonical shallow "
                "targets; plan the defect on the opposite diagonal"
            )
        mirror_ops, target_out = solve_reflected(transfer(eff_mesh, target))
        mcols = asap_schedule([p for p, _, _ in mirror_ops])
        by_slot = {(col, p): (theta, phi) for col, (p, theta, phi) in zip(mcols, mirror_ops)}
        if set(by_slot) != set(analysis.virtual_columns.values()):
            raise EmbedStructureError("reflected factorization does not match the plan")
        virtual = {x: by_slot[key] for x, key in analysis.virtual_columns.items()}

    settings = plan_settings(mesh, plan)
    kappa = np.ones(eff_layout.n, dtype=complex)
    for item in analysis.stream:
        if item[0] == "const":
            _, wire, factor = item
            kappa[wire - 1] *= factor
        else:
            _, x, a = item
            theta, phi = virtual[x]
            phi_phys = (phi - np.angle(kappa[a - 1]) + np.angle(kappa[a])) % TWO_PI
            settings.set(x, theta, phi_phys)
            kappa[a - 1] = kappa[a]

    for mode, wire in analysis.wire_at_mode.items():
        if out_map.get(mode) != wire:
            raise EmbedStructureError(
                f"wire {wire} exits at port {mode}, expected port of new label "
                f"{out_map.get(mode)}"
            )
        settings.output_phases[mode - 1] = (
            float(target_out[wire - 1]) - float(np.angle(kappa[wire - 1]))
        ) % TWO_PI
    return settings


def tunable_crossings(mesh: Mesh, plan: RoutingPlan) -> list[Crossing]:
    fixed = plan.fixed_crossings()
    return [x for x in mesh.crossings if x not in fixed]
