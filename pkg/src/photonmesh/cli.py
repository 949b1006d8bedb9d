"""Command-line front end: decompose, plan, compile, verify, yield.

Exit codes: 0 success (verify: report passed), 1 verification failure,
2 input validation error, 3 I/O error, 4 unsalvageable mesh.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .circumvent import effective_layout, embed_target, plan_defects
from .decompose import clements_decompose
from .exceptions import PhotonMeshError, UnsalvageableError
from .interchange import mesh_to_dict, parse_mesh, read_matrix
from .mesh import MeshLayout, build_mesh
from .simulate import transfer, verify_plan
from .yield_analysis import (
    APPROXIMATE,
    EXACT,
    max_modes_overhead,
    monte_carlo_yield,
    tolerance_curve,
)

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_INVALID_INPUT = 2
EXIT_IO = 3
EXIT_UNSALVAGEABLE = 4


def _read_document(path):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_mesh(fh.read())


def _write_json(path, doc):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def _cmd_decompose(args) -> int:
    u = read_matrix(args.matrix)
    settings = clements_decompose(u)
    mesh = build_mesh(MeshLayout.rectangular(u.shape[0]))
    _write_json(args.out, mesh_to_dict(mesh, settings))
    print(f"decomposed {u.shape[0]}x{u.shape[0]} unitary -> {args.out}")
    return EXIT_OK


def _cmd_plan(args) -> int:
    doc = _read_document(args.mesh)
    for w in doc.warnings:
        print(f"warning: {w}", file=sys.stderr)
    plan = plan_defects(doc.mesh, doc.defects)
    layout, _, _ = effective_layout(doc.mesh, plan)
    _write_json(
        args.out,
        mesh_to_dict(doc.mesh, doc.settings, doc.defects, plan, doc.target),
    )
    print(
        f"planned around {len(doc.defects)} defect(s): effective "
        f"{layout.n}-mode depth-{layout.d} interferometer -> {args.out}"
    )
    return EXIT_OK


def _cmd_compile(args) -> int:
    doc = _read_document(args.mesh)
    plan = doc.plan if doc.plan is not None else plan_defects(doc.mesh, doc.defects)
    layout, _, _ = effective_layout(doc.mesh, plan)
    u_target = read_matrix(args.target)
    if u_target.shape[0] != layout.n:
        raise PhotonMeshError(
            f"target is {u_target.shape[0]}x{u_target.shape[0]}, effective "
            f"interferometer has {layout.n} modes"
        )
    target_settings = clements_decompose(u_target)
    settings = embed_target(doc.mesh, plan, target_settings)
    _write_json(
        args.out,
        mesh_to_dict(doc.mesh, settings, doc.defects, plan, u_target),
    )
    print(f"compiled {layout.n}x{layout.n} target onto {doc.mesh.n}-mode mesh -> {args.out}")
    return EXIT_OK


def _cmd_verify(args) -> int:
    doc = _read_document(args.mesh)
    plan = doc.plan if doc.plan is not None else plan_defects(doc.mesh, doc.defects)
    target = clements_decompose(doc.target) if doc.target is not None else None
    report = verify_plan(doc.mesh, plan, doc.defects, target)
    text = report.to_json(indent=2)
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    print(text)
    return EXIT_OK if report.passed else EXIT_VERIFY_FAILED


def _parse_grid(spec: str):
    spec = spec.strip()
    if not spec:
        raise PhotonMeshError("empty epsilon grid")
    if ":" in spec:
        parts = spec.split(":")
        if len(parts) != 3:
            raise PhotonMeshError(f"grid spec must be start:stop:count, got {spec!r}")
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
        if not (0 < start <= stop <= 1) or count < 1:
            raise PhotonMeshError(f"invalid grid range {spec!r}")
        return list(np.geomspace(start, stop, count))
    grid = [float(v) for v in spec.split(",") if v.strip()]
    if not grid or sorted(grid) != grid or grid[0] <= 0 or grid[-1] > 1:
        raise PhotonMeshError(f"grid must be ascending probabilities in (0, 1], got {spec!r}")
    return grid


def _cmd_yield(args) -> int:
    grid = _parse_grid(args.epsilon_grid)
    overheads = [float(v) for v in args.overhead.split(",") if v.strip()]
    if not overheads or any(r < 0 for r in overheads):
        raise PhotonMeshError(f"invalid overhead list {args.overhead!r}")
    count_model = EXACT if args.count_model == "exact" else APPROXIMATE
    out = Path(args.out)
    for r in overheads:
        rows = tolerance_curve(r, grid, count_model)
        if len(overheads) == 1:
            path = out
        else:
            path = out.with_name(f"{out.stem}_r{round(r * 100):03d}{out.suffix or '.csv'}")
        lines = ["epsilon,max_n"]
        if args.mc_trials:
            lines[0] += ",mc_estimate,mc_stderr"
        for eps, max_n in rows:
            row = f"{np.format_float_positional(eps, trim='-')},{max_n}"
            if args.mc_trials:
                m = int(np.floor(r * max_n))
                est = monte_carlo_yield(
                    max(max_n, 1), m, eps, args.mc_trials, args.seed, count_model
                )
                row += f",{est.estimate!r},{est.stderr!r}"
            lines.append(row)
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + "\n")
        print(f"overhead {r:g}: wrote {len(rows)} rows -> {path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="photonmesh",
        description="Compile, defect-circumvent and verify programmable interferometer meshes.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decompose", help="factor a unitary into mesh settings")
    p.add_argument("--matrix", required=True, help="unitary matrix file (.json or .csv)")
    p.add_argument("--out", required=True, help="output interchange document")
    p.set_defaults(func=_cmd_decompose)

    p = sub.add_parser("plan", help="compute a routing plan around the listed defects")
    p.add_argument("--mesh", required=True, help="interchange document with defects")
    p.add_argument("--out", required=True, help="output interchange document")
    p.set_defaults(func=_cmd_plan)

    p = sub.add_parser("compile", help="embed a target unitary onto the surviving mesh")
    p.add_argument("--mesh", required=True, help="interchange document (with plan or defects)")
    p.add_argument("--target", required=True, help="target unitary matrix file")
    p.add_argument("--out", required=True, help="output interchange document")
    p.set_defaults(func=_cmd_compile)

    p = sub.add_parser("verify", help="verify a planned/compiled mesh document")
    p.add_argument("--mesh", required=True, help="interchange document")
    p.add_argument("--report", help="also write the JSON report here")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("yield", help="defect-tolerance curves and Monte Carlo checks")
    p.add_argument(
        "--epsilon-grid",
        required=True,
        help="comma list or geometric range start:stop:count of defect probabilities",
    )
    p.add_argument("--overhead", required=True, help="comma list of overhead ratios m/n")
    p.add_argument("--out", required=True, help="output CSV path (suffixed per overhead)")
    p.add_argument("--count-model", choices=["approximate", "exact"], default="approximate")
    p.add_argument("--mc-trials", type=int, default=0, help="add Monte Carlo columns")
    p.add_argument("--seed", type=int, default=0, help="Monte Carlo seed")
    p.set_defaults(func=_cmd_yield)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UnsalvageableError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNSALVAGEABLE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (PhotonMeshError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID_INPUT


if __name__ == "__main__":
    sys.exit(main())
