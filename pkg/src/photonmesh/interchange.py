"""Mesh interchange documents and matrix file I/O.

The interchange document is a UTF-8 JSON object with fields

    layout         {"kind", "n", "d"}
    crossings      [{"c", "m", "theta", "phi", "state"}, ...]
    output_phases  [radians, one per mode]
    defects        [...]                      (optional)
    plan           {...}                      (optional)
    target         {"matrix": [[[re, im], ...], ...]}   (optional)

Angles are radians as decimal numbers; loss is amplitude transmissivity in
[0, 1].  Matrices exchanged as standalone files are either JSON (the target
object above, or a bare nested list of [re, im] pairs) or CSV with rows of
interleaved re,im values.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .circumvent import RoutingPlan, effective_layout
from .defects import (
    CROSSING_PHASE,
    OUTPUT_PHASE,
    DeadPhaseShifter,
    DefectSpec,
    RangeLimitedCrossing,
    SegmentLoss,
    StuckCrossing,
    validate_defect,
)
from .exceptions import SerializationError, UnsalvageableError
from .mesh import Crossing, Mesh, MeshLayout, MeshSettings, Segment, build_mesh


def _crossing_state(plan: Optional[RoutingPlan], crossing: Crossing) -> str:
    if plan is None:
        return "tunable"
    if crossing in plan.fixed_cross:
        return "fixed_cross"
    if crossing in plan.fixed_bar:
        return "fixed_bar"
    if crossing in plan.dont_care:
        return "dont_care"
    return "tunable"


def defect_to_dict(defect: DefectSpec) -> dict:
    if isinstance(defect, SegmentLoss):
        return {
            "kind": "segment_loss",
            "mode": defect.segment.mode,
            "slot": defect.segment.slot,
            "eta": defect.eta,
        }
    if isinstance(defect, StuckCrossing):
        c, m = defect.crossing
        return {"kind": "stuck_crossing", "c": c, "m": m, "theta": defect.theta, "phi": defect.phi}
    if isinstance(defect, RangeLimitedCrossing):
        c, m = defect.crossing
        return {
            "kind": "range_limited_crossing",
            "c": c,
            "m": m,
            "theta_min": defect.theta_min,
            "theta_max": defect.theta_max,
        }
    if isinstance(defect, DeadPhaseShifter):
        kind, where = defect.site
        if kind == CROSSING_PHASE:
            site = {"type": "crossing", "c": where.column, "m": where.lower_mode}
        else:
            site = {"type": "output", "mode": where}
        return {"kind": "dead_phase_shifter", "site": site, "value": defect.value}
    raise SerializationError(f"cannot serialize defect {defect!r}")


def defect_from_dict(doc: dict) -> DefectSpec:
    try:
        kind = doc["kind"]
        if kind == "segment_loss":
            return SegmentLoss(Segment(doc["mode"], doc["slot"]), doc["eta"])
        if kind == "stuck_crossing":
            return StuckCrossing(Crossing(doc["c"], doc["m"]), doc["theta"], doc["phi"])
        if kind == "range_limited_crossing":
            return RangeLimitedCrossing(
                Crossing(doc["c"], doc["m"]), doc["theta_min"], doc["theta_max"]
            )
        if kind == "dead_phase_shifter":
            site = doc["site"]
            if site["type"] == "crossing":
                return DeadPhaseShifter.at_crossing(Crossing(site["c"], site["m"]), doc["value"])
            if site["type"] == "output":
                return DeadPhaseShifter.at_output(site["mode"], doc["value"])
        raise SerializationError(f"unknown defect kind {kind!r}")
    except (KeyError, TypeError) as exc:
        raise SerializationError(f"malformed defect entry: {exc}") from exc


def plan_to_dict(mesh: Mesh, plan: RoutingPlan) -> dict:
    doc = {
        "fixed_cross": sorted([c, m] for c, m in plan.fixed_cross),
        "fixed_bar": sorted([c, m] for c, m in plan.fixed_bar),
        "dont_care": sorted([c, m] for c, m in plan.dont_care),
        "discarded_inputs": list(plan.discarded_inputs),
        "discarded_outputs": list(plan.discarded_outputs),
        "isolated_segments": sorted([m, s] for m, s in plan.isolated_segments),
        "input_relabel": {str(k): v for k, v in plan.input_relabel().items()},
        "output_relabel": {str(k): v for k, v in plan.output_relabel().items()},
    }
    try:
        layout, _, _ = effective_layout(mesh, plan)
        doc["effective_layout"] = {"kind": layout.kind, "n": layout.n, "d": layout.d}
    except UnsalvageableError:
        pass
    return doc


def plan_from_dict(mesh: Mesh, doc: dict) -> RoutingPlan:
    try:
        return RoutingPlan(
            layout=mesh.layout,
            fixed_cross=frozenset(Crossing(c, m) for c, m in doc.get("fixed_cross", [])),
            fixed_bar=frozenset(Crossing(c, m) for c, m in doc.get("fixed_bar", [])),
            dont_care=frozenset(Crossing(c, m) for c, m in doc.get("dont_care", [])),
            discarded_inputs=tuple(sorted(doc.get("discarded_inputs", []))),
            discarded_outputs=tuple(sorted(doc.get("discarded_outputs", []))),
            isolated_segments=frozenset(
                Segment(m, s) for m, s in doc.get("isolated_segments", [])
            ),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise SerializationError(f"malformed plan entry: {exc}") from exc


def matrix_to_pairs(u: np.ndarray) -> list:
    u = np.asarray(u, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in u]


def matrix_from_pairs(rows) -> np.ndarray:
    try:
        u = np.array([[complex(re, im) for re, im in row] for row in rows])
    except (TypeError, ValueError) as exc:
        raise SerializationError(f"malformed matrix: {exc}") from exc
    if u.ndim != 2:
        raise SerializationError("matrix must be two-dimensional")
    return u


@dataclass
class ParsedDocument:
    mesh: Mesh
    settings: MeshSettings
    defects: tuple[DefectSpec, ...]
    plan: Optional[RoutingPlan]
    target: Optional[np.ndarray]
    warnings: list[str] = field(default_factory=list)


def mesh_to_dict(
    mesh: Mesh,
    settings: Optional[MeshSettings] = None,
    defects=(),
    plan: Optional[RoutingPlan] = None,
    target: Optional[np.ndarray] = None,
) -> dict:
    if settings is None:
        settings = MeshSettings.bar_state(mesh)
    settings.validate_for(mesh)
    doc = {
        "layout": {"kind": mesh.layout.kind, "n": mesh.n, "d": mesh.d},
        "crossings": [
            {
                "c": x.column,
                "m": x.lower_mode,
                "theta": float(settings.thetas[i]),
                "phi": float(settings.phis[i]),
                "state": _crossing_state(plan, x),
            }
            for i, x in enumerate(mesh.crossings)
        ],
        "output_phases": [float(p) for p in settings.output_phases],
        "defects": [defect_to_dict(d) for d in defects],
    }
    if plan is not None:
        doc["plan"] = plan_to_dict(mesh, plan)
    if target is not None:
        doc["target"] = {"matrix": matrix_to_pairs(target)}
    return doc


def serialize_mesh(mesh, settings=None, defects=(), plan=None, target=None, indent=None) -> str:
    return json.dumps(mesh_to_dict(mesh, settings, defects, plan, target), indent=indent)


def parse_mesh(doc) -> ParsedDocument:
    """Parse an interchange document (JSON text or an already-decoded dict)."""
    if isinstance(doc, (str, bytes)):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as exc:
            raise SerializationError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise SerializationError("interchange document must be a JSON object")
    warnings: list[str] = []

    try:
        layout_doc = doc["layout"]
        layout = MeshLayout(layout_doc["kind"], layout_doc["n"], layout_doc["d"])
    except KeyError as exc:
        raise SerializationError(f"missing layout field: {exc}") from exc
    mesh = build_mesh(layout)

    settings = MeshSettings.bar_state(mesh)
    seen = set()
    for entry in doc.get("crossings", []):
        try:
            crossing = Crossing(entry["c"], entry["m"])
            theta, phi = entry["theta"], entry["phi"]
        except (KeyError, TypeError) as exc:
            raise SerializationError(f"malformed crossing entry: {exc}") from exc
        if not mesh.has_crossing(crossing):
            raise SerializationError(
                f"crossing {tuple(crossing)} violates the parity rule for "
                f"{layout.kind}(n={layout.n}, d={layout.d})"
            )
        if crossing in seen:
            raise SerializationError(f"duplicate crossing entry {tuple(crossing)}")
        seen.add(crossing)
        settings.set(crossing, theta, phi)
    missing = len(mesh.crossings) - len(seen)
    if missing:
        warnings.append(f"{missing} crossing(s) missing; defaulted to bar state")

    if "output_phases" in doc:
        phases = doc["output_phases"]
        if len(phases) != mesh.n:
            raise SerializationError(
                f"output_phases has length {len(phases)}, expected {mesh.n}"
            )
        settings.output_phases = np.asarray(phases, dtype=float)
    else:
        warnings.append("output_phases missing; defaulted to all-zero")

    defects = tuple(defect_from_dict(d) for d in doc.get("defects", []))
    for defect in defects:
        validate_defect(mesh, defect)

    plan = plan_from_dict(mesh, doc["plan"]) if "plan" in doc else None
    target = None
    if "target" in doc:
        target = matrix_from_pairs(doc["target"].get("matrix", []))

    return ParsedDocument(mesh, settings, defects, plan, target, warnings)


def read_matrix(path: str) -> np.ndarray:
    """Read a complex matrix from a .json or .csv file."""
    if str(path).lower().endswith(".csv"):
        rows = []
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                vals = [float(v) for v in line.split(",")]
                if len(vals) % 2:
                    raise SerializationError(
                        "CSV matrix rows must interleave re,im pairs"
                    )
                rows.append([complex(vals[i], vals[i + 1]) for i in range(0, len(vals), 2)])
        u = np.array(rows)
        if u.ndim != 2 or u.shape[0] != u.shape[1]:
            raise SerializationError(f"CSV matrix is not square: shape {u.shape}")
        return u
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if isinstance(doc, dict):
        doc = doc.get("matrix", doc)
    return matrix_from_pairs(doc)


def write_matrix(path: str, u: np.ndarray) -> None:
    if str(path).lower().endswith(".csv"):
        u = np.asarray(u, dtype=complex)
        with open(path, "w", encoding="utf-8") as fh:
            for row in u:
                fh.write(",".join(f"{float(z.real)!r},{float(z.imag)!r}" for z in row) + "\n")
        return
    with open(path, "w", encoding="utf-8") as fh:
        json.dump({"matrix": matrix_to_pairs(u)}, fh)
