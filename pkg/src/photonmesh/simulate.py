"""Transfer-matrix simulation, field probes and plan verification.

The forward model multiplies column-embedded crossing matrices from input to
output, inserts diagonal amplitude factors for lossy segments at their slot
boundaries, and finishes with the output phase layer:

    U = diag(e^{i*out}) * L_d * M_d * ... * L_1 * M_1 * L_0

Internal field amplitudes are obtained by truncating the same product at a
segment's slot, so a probe at slot d reproduces the full matrix row exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as kernels
from .defects import (
    CROSSING_PHASE,
    DeadPhaseShifter,
    RangeLimitedCrossing,
    SegmentLoss,
    StuckCrossing,
    validate_defect,
)
from .exceptions import EmbedError, LayoutError, PlanError
from .mesh import Mesh, MeshSettings, Segment, template_crossings


def _realized_angles(mesh: Mesh, settings: MeshSettings, defects):
    """Per-crossing (theta, phi) and output phases with defect behaviour applied."""
    settings.validate_for(mesh)
    thetas = settings.thetas.copy()
    phis = settings.phis.copy()
    out = settings.output_phases.copy()
    losses = []
    for defect in defects or ():
        validate_defect(mesh, defect)
        if isinstance(defect, SegmentLoss):
            losses.append(defect)
        elif isinstance(defect, StuckCrossing):
            i = mesh.index_of(defect.crossing)
            thetas[i] = defect.theta
            phis[i] = defect.phi
        elif isinstance(defect, RangeLimitedCrossing):
            i = mesh.index_of(defect.crossing)
            thetas[i] = min(max(thetas[i], defect.theta_min), defect.theta_max)
        elif isinstance(defect, DeadPhaseShifter):
            kind, where = defect.site
            if kind == CROSSING_PHASE:
                phis[mesh.index_of(where)] = defect.value
            else:
                out[where - 1] = defect.value
    return thetas, phis, out, losses


def _build_events(mesh: Mesh, settings: MeshSettings, defects):
    """Flatten the mesh into the kernel event stream.

    Returns (kinds, rows, avals, bvals, cuts): cuts[s] is the event index up
    to which the product gives incident amplitudes on slot-s segments (slot-s
    losses and later columns excluded).
    """
    thetas, phis, out, losses = _realized_angles(mesh, settings, defects)
    loss_by_slot: dict[int, list[SegmentLoss]] = {}
    for loss in losses:
        loss_by_slot.setdefault(loss.segment.slot, []).append(loss)

    kinds, rows, avals, bvals = [], [], [], []
    cuts = [0]

    def add_losses(slot):
        for loss in loss_by_slot.get(slot, ()):
            kinds.append(1)
            rows.append(loss.segment.mode - 1)
            avals.append(complex(loss.eta))
            bvals.append(0.0)

    for c in range(1, mesh.d + 1):
        add_losses(c - 1)
        for x in mesh.column(c):
            i = mesh.index_of(x)
            kinds.append(0)
            rows.append(x.lower_mode - 1)
            avals.append(np.exp(1j * phis[i]))
            bvals.append(thetas[i])
        cuts.append(len(kinds))
    add_losses(mesh.d)
    for mode in range(mesh.n):
        kinds.append(1)
        rows.append(mode)
        avals.append(np.exp(1j * out[mode]))
        bvals.append(0.0)

    return (
        np.asarray(kinds, dtype=np.int8),
        np.asarray(rows, dtype=np.int32),
        np.asarray(avals, dtype=complex),
        np.asarray(bvals, dtype=float),
        cuts,
    )


def transfer(mesh: Mesh, settings: MeshSettings, defects=None) -> np.ndarray:
    """Full n x n transfer matrix of the configured (possibly defective) mesh."""
    kinds, rows, avals, bvals, _ = _build_events(mesh, settings, defects)
    u = np.eye(mesh.n, dtype=complex)
    kernels.apply_events(u, kinds, rows, avals, bvals, 0, len(kinds))
    return u


def probe_amplitudes(mesh: Mesh, settings: MeshSettings, segments, defects=None):
    """Incident field amplitude on each segment for unit input on every port.

    Returns {segment: row} where row[j] is the amplitude on the segment when
    a unit field enters input port j+1.
    """
    segments = [mesh.check_segment(s) for s in segments]
    by_slot: dict[int, list[Segment]] = {}
    for s in segments:
        by_slot.setdefault(s.slot, []).append(s)
    kinds, rows, avals, bvals, cuts = _build_events(mesh, settings, defects)
    u = np.eye(mesh.n, dtype=complex)
    result = {}
    prev = 0
    for slot in range(mesh.d + 1):
        kernels.apply_events(u, kinds, rows, avals, bvals, prev, cuts[slot])
        prev = cuts[slot]
        for seg in by_slot.get(slot, ()):
            result[seg] = u[seg.mode - 1].copy()
    return result


def amplitude_at(mesh: Mesh, settings: MeshSettings, input_port: int, segment, defects=None) -> complex:
    """Field amplitude on ``segment`` for a unit field entering ``input_port``."""
    if not 1 <= input_port <= mesh.n:
        raise LayoutError(f"input port {input_port} out of range for {mesh!r}")
    row = probe_amplitudes(mesh, settings, [segment], defects)[Segment(*segment)]
    return complex(row[input_port - 1])


def effective_matrix(mesh: Mesh, settings: MeshSettings, plan, defects=None) -> np.ndarray:
    """Transfer matrix restricted to used ports, reindexed by the relabel maps."""
    if plan.layout != mesh.layout:
        raise PlanError(f"plan built for {plan.layout}, applied to {mesh.layout}")
    u = transfer(mesh, settings, defects)
    in_map = plan.input_relabel()
    out_map = plan.output_relabel()
    cols = [old - 1 for old in sorted(in_map, key=in_map.get)]
    rows = [old - 1 for old in sorted(out_map, key=out_map.get)]
    return u[np.ix_(rows, cols)]


def max_isolated_light(mesh: Mesh, settings: MeshSettings, plan, defects=None) -> float:
    """Largest field modulus on any isolated segment over all used inputs."""
    used_cols = [p - 1 for p in plan.used_inputs()]
    if not plan.isolated_segments or not used_cols:
        return 0.0
    probes = probe_amplitudes(mesh, settings, plan.isolated_segments, defects)
    return max(float(np.max(np.abs(row[used_cols]))) for row in probes.values())


@dataclass
class VerificationReport:
    """Bundle of the checks that certify a routing plan on a mesh."""

    zero_light: float
    target_error: float
    counts_ok: bool
    structure_ok: bool
    independence_ok: bool
    template: str
    effective_n: int
    effective_d: int
    tunable_count: int
    free_phase_shifters: int
    independence_error: float
    zero_light_tol: float = 1e-12
    target_tol: float = 1e-10
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return (
            self.zero_light < self.zero_light_tol
            and self.target_error < self.target_tol
            and self.counts_ok
            and self.structure_ok
            and self.independence_ok
        )

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "zero_light": self.zero_light,
            "target_error": self.target_error,
            "counts_ok": self.counts_ok,
            "structure_ok": self.structure_ok,
            "independence_ok": self.independence_ok,
            "independence_error": self.independence_error,
            "template": self.template,
            "effective_layout": {"n": self.effective_n, "d": self.effective_d},
            "tunable_count": self.tunable_count,
            "free_phase_shifters": self.free_phase_shifters,
            "zero_light_tol": self.zero_light_tol,
            "target_tol": self.target_tol,
            "notes": self.notes,
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


def _independence_variants(defects):
    """Alternative realizations of the same defect list."""
    defects = list(defects or ())
    variants = []
    for i, d in enumerate(defects):
        if isinstance(d, SegmentLoss):
            alts = [SegmentLoss(d.segment, eta) for eta in (1.0, 0.5, 0.1)]
        elif isinstance(d, StuckCrossing):
            alts = [
                StuckCrossing(d.crossing, 0.31, 1.7),
                StuckCrossing(d.crossing, 1.25, 5.1),
            ]
        elif isinstance(d, RangeLimitedCrossing):
            alts = [
                RangeLimitedCrossing(d.crossing, 0.1, 1.2),
                RangeLimitedCrossing(d.crossing, 0.6, 0.9),
            ]
        elif isinstance(d, DeadPhaseShifter):
            alts = [DeadPhaseShifter(d.site, v) for v in (0.7, 2.9)]
        else:
            alts = []
        for alt in alts:
            variant = list(defects)
            variant[i] = alt
            variants.append(variant)
    return variants


def verify_plan(
    mesh: Mesh,
    plan,
    defects=None,
    target: MeshSettings | None = None,
    zero_light_tol: float = 1e-12,
    target_tol: float = 1e-10,
) -> VerificationReport:
    """Run every certification check for a plan; failures land in the report.

    The checks: no light on isolated segments from any used input, exact
    reproduction of the target on the surviving ports, component counts and
    template structure of the surviving tunable crossings, and invariance of
    the effective matrix under changed defect realizations and flipped
    don't-care settings.
    """
    from .circumvent import analyze_plan, effective_layout, embed_target, plan_settings
    from .mesh import build_mesh

    eff_layout, _, _ = effective_layout(mesh, plan)
    eff_mesh = build_mesh(eff_layout)
    if target is None:
        target = MeshSettings.bar_state(eff_mesh)

    notes = []
    analysis = analyze_plan(mesh, plan)
    template_size = len(template_crossings(eff_layout))
    counts_ok = (
        analysis.tunable_count == template_size
        and analysis.free_phase_shifters == template_size + eff_layout.n - 1
    )
    structure_ok = analysis.template in ("canonical", "reflected")

    try:
        settings = embed_target(mesh, plan, target)
        target_matrix = transfer(eff_mesh, target)
        eff = effective_matrix(mesh, settings, plan, defects)
        target_error = float(np.max(np.abs(eff - target_matrix)))
    except EmbedError as exc:
        notes.append(f"embedding failed: {exc}")
        settings = plan_settings(mesh, plan)
        eff = None
        target_error = float("inf")

    zero_light = max_isolated_light(mesh, settings, plan, defects)

    independence_error = 0.0
    if eff is not None:
        for variant in _independence_variants(defects):
            dev = np.max(np.abs(effective_matrix(mesh, settings, plan, variant) - eff))
            independence_error = max(independence_error, float(dev))
        dont_care = sorted(plan.dont_care)
        if dont_care:
            if len(dont_care) <= 4:
                flip_sets = range(1, 1 << len(dont_care))
            else:
                flip_sets = [1 << i for i in range(len(dont_care))] + [(1 << len(dont_care)) - 1]
                notes.append("don't-care flip sweep sampled (large set)")
            for mask in flip_sets:
                flipped = settings.copy()
                for i, x in enumerate(dont_care):
                    if mask >> i & 1:
                        flipped.set(x, np.pi / 2, 0.0)
                dev = np.max(np.abs(effective_matrix(mesh, flipped, plan, defects) - eff))
                independence_error = max(independence_error, float(dev))
    independence_ok = eff is not None and independence_error < target_tol

    return VerificationReport(
        zero_light=zero_light,
        target_error=target_error,
        counts_ok=counts_ok,
        structure_ok=structure_ok,
        independence_ok=independence_ok,
        template=analysis.template,
        effective_n=eff_layout.n,
        effective_d=eff_layout.d,
        tunable_count=analysis.tunable_count,
        free_phase_shifters=analysis.free_phase_shifters,
        independence_error=independence_error,
        zero_light_tol=zero_light_tol,
        target_tol=target_tol,
        notes=notes,
    )
