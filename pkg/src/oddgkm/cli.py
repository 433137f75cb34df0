"""Command-line front end.

Exit status: 0 when the command succeeds or its verdict is true, 1 when a
verdict is false, 2 on unreadable or malformed input.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import catalog
from .cohomology import (
    AutomorphismError,
    automorphism_invariant_betti,
    cohomology_report,
    graded_piece,
    orientability_check,
    ordinary_betti,
    top_degree,
)
from .exactalg import format_rational
from .graphs import (
    EvenGkmGraph,
    GkmConnectionError,
    GraphNotSignedError,
    GraphStructureError,
    OddGkmGraph,
    all_two_faces,
    alternating_check,
    classify_face_shape,
    curvature_gate,
    validate_even,
    validate_odd,
)
from .io import SchemaError, dumps_graph, graph_to_json, load_automorphism, load_graph, save_graph
from .reduction import ReductionError, reduce_odd_to_even, splitting_check


class InputError(Exception):
    pass


def _emit(args, payload: dict, text: str) -> None:
    if args.json:
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print(text)


def _odd_only(g, command: str) -> OddGkmGraph:
    if not isinstance(g, OddGkmGraph):
        raise InputError(f"{command} needs an odd graph")
    return g


def cmd_validate(args) -> int:
    g = load_graph(args.file)
    if isinstance(g, EvenGkmGraph):
        if args.curvature:
            raise InputError("--curvature applies to odd graphs")
        report = validate_even(g, args.k)
        gate = None
    else:
        report = validate_odd(g, args.k)
        gate = curvature_gate(g, args.curvature) if args.curvature else None
    ok = report.valid and (gate is None or gate.passed)
    lines = [f"GKM_{args.k}: {'valid' if report.valid else 'invalid'}"]
    lines += [f"  violation: {v.message}" for v in report.violations]
    lines += [f"  warning: {w}" for w in report.warnings]
    if gate is not None:
        lines.append(f"curvature gate ({gate.mode}): {'pass' if gate.passed else 'fail'}")
        lines += [f"  square {s} has a disallowed valence" for s in gate.bad_squares]
        lines += [f"  face {sorted(f)} has a disallowed shape" for f in gate.bad_faces]
    payload = {"valid": ok, "report": report.to_json(),
               "gate": gate.to_json() if gate is not None else None}
    _emit(args, payload, "\n".join(lines))
    return 0 if ok else 1


def cmd_betti(args) -> int:
    g = load_graph(args.file)
    report = cohomology_report(g)
    _emit(args, report.to_json(), str(report.betti))
    return 0


def cmd_equivariant(args) -> int:
    g = load_graph(args.file)
    cutoff = 2 * top_degree(g) if args.max_degree is None else args.max_degree
    dims = {m: graded_piece(g, m).dim for m in range(cutoff + 1)}
    text = "\n".join(f"H^{m}_T: {d}" for m, d in dims.items())
    _emit(args, {"equivariant_dims": {str(m): d for m, d in dims.items()}}, text)
    return 0


def cmd_reduce(args) -> int:
    g = _odd_only(load_graph(args.file), "reduce")
    result = reduce_odd_to_even(g)
    if args.output:
        save_graph(result.graph, args.output)
    if args.json:
        print(json.dumps(result.to_json(), indent=2, sort_keys=True))
    else:
        print(f"k = {result.k}")
        if not args.output:
            print(dumps_graph(result.graph), end="")
    return 0


def cmd_orientable(args) -> int:
    g = load_graph(args.file)
    target = g if isinstance(g, EvenGkmGraph) else reduce_odd_to_even(g).graph
    ok = orientability_check(target)
    n = target.uniform_valence
    betti = ordinary_betti(target)
    _emit(args, {"orientable": ok, "valence": n, "betti": list(betti.values)},
          f"{'orientable' if ok else 'not orientable'} (b_{2 * n} = {betti[2 * n]})")
    return 0 if ok else 1


def cmd_split_check(args) -> int:
    g = _odd_only(load_graph(args.file), "split-check")
    report = splitting_check(g, args.max_degree)
    lines = [f"k = {report.k}, cutoff = {report.cutoff}"]
    for row in report.rows:
        expected = "" if row.expected is None else f" expected {row.expected}"
        lines.append(f"  deg {row.degree:>3} {row.check:<16} {row.dim_odd}{expected}"
                     f"  {'ok' if row.ok else 'FAIL'}")
    omega = report.omega
    if hasattr(omega, "coefficients"):
        coeffs = ", ".join(f"{c}: {format_rational(a)}" for c, a in omega.coefficients.items())
        lines.append(f"omega (degree {omega.degree}): {coeffs}")
    else:
        lines.append(f"omega not found: {omega.reason}; squares {omega.squares}")
    lines.append(f"dim H^{2 * report.k + 1}_T = {report.odd_generator_dim}")
    lines.append(f"betti {report.betti} = reduced {report.reduced_betti} x sphere: "
                 f"{report.betti_corollary}")
    lines.append(f"reduced graph orientable: {report.reduced_orientable}")
    lines.append(f"verdict: {'splits' if report.verdict else 'splitting not certified'}")
    _emit(args, report.to_json(), "\n".join(lines))
    return 0 if report.verdict else 1


def cmd_faces(args) -> int:
    g = load_graph(args.file)
    faces = []
    for face in all_two_faces(g):
        if isinstance(face, EvenGkmGraph):
            item = {"vertices": sorted(face.vertices), "edges": sorted(e.id for e in face.edges)}
        else:
            item = {"circles": sorted(face.circles), "squares": sorted(s.id for s in face.squares)}
            if args.classify:
                item["shape"] = classify_face_shape(face).value
        faces.append(item)
    faces.sort(key=lambda f: json.dumps(f, sort_keys=True))
    lines = []
    for f in faces:
        nodes = f.get("vertices", f.get("circles"))
        parts = f.get("edges", f.get("squares"))
        shape = f"  [{f['shape']}]" if "shape" in f else ""
        lines.append(f"{' '.join(nodes)} | {' '.join(parts)}{shape}")
    _emit(args, {"faces": faces}, "\n".join(lines) if lines else "no 2-faces")
    return 0


def cmd_alternating(args) -> int:
    g = _odd_only(load_graph(args.file), "alternating")
    try:
        result = alternating_check(g)
    except GraphNotSignedError as exc:
        raise InputError(str(exc)) from None
    payload = {"alternating": result.alternating, "failing": result.failing,
               "sums": {s: [format_rational(x) for x in v] for s, v in result.sums.items()}}
    text = "alternating" if result else "not alternating: " + ", ".join(result.failing)
    _emit(args, payload, text)
    return 0 if result else 1


def cmd_invariants(args) -> int:
    g = load_graph(args.file)
    sigma = load_automorphism(args.automorphism)
    betti = automorphism_invariant_betti(g, sigma)
    _emit(args, {"betti": list(betti.values), "beyond": list(betti.beyond)}, str(betti))
    return 0


def cmd_catalog(args) -> int:
    try:
        g = catalog.make_standard(args.name, signed=args.signed)
    except catalog.UnknownCatalogName:
        raise InputError(f"unknown catalog name {args.name!r}; known: "
                         + ", ".join(catalog.catalog_names())) from None
    if args.output:
        save_graph(g, args.output)
    else:
        print(json.dumps(graph_to_json(g), indent=2, sort_keys=True))
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", default=argparse.SUPPRESS,
                        help="machine-readable output")
    parser = argparse.ArgumentParser(prog="oddgkm", parents=[common],
                                     description="Cohomology of even and odd GKM graphs.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text, graph=True):
        p = sub.add_parser(name, parents=[common], help=help_text)
        if graph:
            p.add_argument("file", help="graph JSON file")
        p.set_defaults(func=func)
        return p

    p = add("validate", cmd_validate, "check the GKM conditions")
    p.add_argument("--k", type=int, default=2, help="independence order (default 2)")
    p.add_argument("--curvature", choices=["nonneg", "positive"], help="also run a curvature gate")
    add("betti", cmd_betti, "ordinary Betti numbers")
    p = add("equivariant", cmd_equivariant, "graded equivariant dimensions")
    p.add_argument("--max-degree", type=int, help="highest degree (default twice the top degree)")
    p = add("reduce", cmd_reduce, "collapse an odd graph to its even graph")
    p.add_argument("-o", "--output", help="write the reduced graph here")
    add("orientable", cmd_orientable, "orientability of an even graph (or of the reduction)")
    p = add("split-check", cmd_split_check, "degreewise check of the odd-sphere splitting")
    p.add_argument("--max-degree", type=int, help="cutoff (default twice the top degree)")
    p = add("faces", cmd_faces, "list 2-faces")
    p.add_argument("--classify", action="store_true", help="tag odd faces with their shape")
    add("alternating", cmd_alternating, "check a signed odd graph is alternating")
    p = add("invariants", cmd_invariants, "Betti numbers of the invariants of an automorphism")
    p.add_argument("--automorphism", required=True, help="automorphism JSON file")
    p = add("catalog", cmd_catalog, "emit a named example graph", graph=False)
    p.add_argument("name", help="catalog name, e.g. chain or pinwheel(3)")
    p.add_argument("--signed", action="store_true", help="signed decoration")
    p.add_argument("-o", "--output", help="write the graph here")
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    if not hasattr(args, "json"):
        args.json = False
    try:
        return args.func(args)
    except (SchemaError, InputError, GraphStructureError, GkmConnectionError, ReductionError,
            AutomorphismError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
