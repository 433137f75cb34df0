"""JSON reading and writing for graphs and automorphisms.

Graph documents look like::

    {"kind": "odd", "torus_rank": 2, "signed": false,
     "circles": ["v0", "v1"],
     "squares": [{"id": "e0", "weight": [1, 0],
                  "incidences": [{"circle": "v0", "sign": 1},
                                 {"circle": "v1", "sign": -1}]}]}

Even graphs carry ``"vertices"`` and ``"edges"`` (``{"id", "from", "to",
"weight"}``, each unoriented edge listed once) and optionally a
``"connection"`` list of ``{"along": dart, "maps": {dart: dart}}`` where a
dart is an edge id, prefixed with ``~`` for the reverse orientation.
Rationals are JSON integers or strings ``"p/q"``.  Schema problems raise
:class:`SchemaError` carrying a JSON pointer to the offending value.
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

from .cohomology import Automorphism
from .exactalg import format_rational
from .graphs import (
    Dart,
    EvenGkmGraph,
    GkmGraph,
    GraphStructureError,
    Incidence,
    OddGkmGraph,
    ProjectiveWeight,
    Square,
)


class SchemaError(ValueError):
    """A document does not match the graph schema; ``pointer`` locates the problem."""

    def __init__(self, pointer: str, message: str):
        super().__init__(f"{pointer or '/'}: {message}")
        self.pointer = pointer


def _ptr(*parts) -> str:
    return "".join("/" + str(p).replace("~", "~0").replace("/", "~1") for p in parts)


def _require(obj, key, kind, *path):
    if not isinstance(obj, dict):
        raise SchemaError(_ptr(*path), "expected an object")
    if key not in obj:
        raise SchemaError(_ptr(*path, key), "missing required field")
    value = obj[key]
    if kind is not None and not isinstance(value, kind) or isinstance(value, bool) and kind is int:
        raise SchemaError(_ptr(*path, key), f"expected {_kind_name(kind)}")
    return value


def _kind_name(kind) -> str:
    names = {str: "a string", int: "an integer", list: "an array", dict: "an object",
             bool: "a boolean"}
    return names.get(kind, str(kind))


def _rational(value, *path) -> Fraction:
    if isinstance(value, bool) or not isinstance(value, (int, str)):
        raise SchemaError(_ptr(*path), "rationals must be integers or 'p/q' strings")
    try:
        return Fraction(value)
    except (ValueError, ZeroDivisionError):
        raise SchemaError(_ptr(*path), f"cannot parse rational {value!r}") from None


def _vector(value, rank, *path) -> tuple[Fraction, ...]:
    if not isinstance(value, list):
        raise SchemaError(_ptr(*path), "expected an array of rationals")
    if len(value) != rank:
        raise SchemaError(_ptr(*path), f"expected {rank} entries, got {len(value)}")
    vec = tuple(_rational(x, *path, i) for i, x in enumerate(value))
    if not any(vec):
        raise SchemaError(_ptr(*path), "zero weight")
    return vec


def _names(value, *path) -> list[str]:
    if not isinstance(value, list):
        raise SchemaError(_ptr(*path), "expected an array of names")
    seen = set()
    for i, x in enumerate(value):
        if not isinstance(x, str):
            raise SchemaError(_ptr(*path, i), "expected a string")
        if x in seen:
            raise SchemaError(_ptr(*path, i), f"duplicate name {x!r}")
        seen.add(x)
    return list(value)


def _parse_dart(text, edges, *path) -> Dart:
    if not isinstance(text, str):
        raise SchemaError(_ptr(*path), "expected a dart name")
    dart = Dart(text[1:], False) if text.startswith("~") else Dart(text, True)
    if dart.edge not in edges:
        raise SchemaError(_ptr(*path), f"unknown edge {dart.edge!r}")
    return dart


def graph_from_json(doc) -> GkmGraph:
    if not isinstance(doc, dict):
        raise SchemaError("", "expected an object")
    kind = _require(doc, "kind", str)
    rank = _require(doc, "torus_rank", int)
    if rank < 1:
        raise SchemaError("/torus_rank", "torus rank must be positive")
    signed = doc.get("signed", False)
    if not isinstance(signed, bool):
        raise SchemaError("/signed", "expected a boolean")
    meta = doc.get("meta")
    if meta is not None and not isinstance(meta, dict):
        raise SchemaError("/meta", "expected an object")
    if kind == "even":
        return _even_from_json(doc, rank, signed, meta)
    if kind == "odd":
        return _odd_from_json(doc, rank, signed, meta)
    raise SchemaError("/kind", f"unknown kind {kind!r} (expected 'even' or 'odd')")


def _even_from_json(doc, rank, signed, meta) -> EvenGkmGraph:
    vertices = _names(_require(doc, "vertices", list), "vertices")
    known = set(vertices)
    edges = []
    ids = set()
    for i, e in enumerate(_require(doc, "edges", list)):
        eid = _require(e, "id", str, "edges", i)
        if eid in ids:
            raise SchemaError(_ptr("edges", i, "id"), f"duplicate edge id {eid!r}")
        ids.add(eid)
        ends = []
        for key in ("from", "to"):
            v = _require(e, key, str, "edges", i)
            if v not in known:
                raise SchemaError(_ptr("edges", i, key), f"unknown vertex {v!r}")
            ends.append(v)
        if ends[0] == ends[1]:
            raise SchemaError(_ptr("edges", i, "to"), "an edge cannot join a vertex to itself")
        w = _vector(_require(e, "weight", list, "edges", i), rank, "edges", i, "weight")
        edges.append((eid, ends[0], ends[1], w))
    g = EvenGkmGraph.build(rank, vertices, edges, signed=signed, meta=meta)
    if "connection" in doc and doc["connection"] is not None:
        conn = {}
        entries = doc["connection"]
        if not isinstance(entries, list):
            raise SchemaError("/connection", "expected an array")
        for i, entry in enumerate(entries):
            along = _parse_dart(_require(entry, "along", str, "connection", i), ids,
                                "connection", i, "along")
            maps = _require(entry, "maps", dict, "connection", i)
            conn[along] = {
                _parse_dart(k, ids, "connection", i, "maps", k):
                    _parse_dart(v, ids, "connection", i, "maps", k)
                for k, v in maps.items()
            }
        g = g.with_connection(conn)
    return g


def _odd_from_json(doc, rank, signed, meta) -> OddGkmGraph:
    circles = _names(_require(doc, "circles", list), "circles")
    known = set(circles)
    squares = []
    ids = set()
    for i, s in enumerate(_require(doc, "squares", list)):
        sid = _require(s, "id", str, "squares", i)
        if sid in ids:
            raise SchemaError(_ptr("squares", i, "id"), f"duplicate square id {sid!r}")
        ids.add(sid)
        weight = ProjectiveWeight.of(_vector(_require(s, "weight", list, "squares", i), rank,
                                             "squares", i, "weight"))
        incs = _require(s, "incidences", list, "squares", i)
        out = []
        seen = set()
        for j, inc in enumerate(incs):
            at = ("squares", i, "incidences", j)
            c = _require(inc, "circle", str, *at)
            if c not in known:
                raise SchemaError(_ptr(*at, "circle"), f"unknown circle {c!r}")
            if c in seen:
                raise SchemaError(_ptr(*at, "circle"), f"circle {c!r} repeated in one square")
            seen.add(c)
            default = (1, -1)[j] if len(incs) == 2 else 1
            sign = inc.get("sign", default)
            if sign not in (1, -1) or isinstance(sign, bool):
                raise SchemaError(_ptr(*at, "sign"), "sign must be 1 or -1")
            ew = inc.get("edge_weight")
            if ew is not None:
                ew = _vector(ew, rank, *at, "edge_weight")
                if ProjectiveWeight.of(ew) != weight:
                    raise SchemaError(_ptr(*at, "edge_weight"),
                                      "edge weight is not +- the square weight")
            elif signed:
                raise SchemaError(_ptr(*at, "edge_weight"),
                                  "signed graphs need an edge weight on every incidence")
            out.append(Incidence(c, sign, ew))
        squares.append(Square(sid, weight, tuple(out)))
    try:
        return OddGkmGraph(rank, tuple(circles), tuple(squares), meta)
    except GraphStructureError as exc:
        raise SchemaError("", str(exc)) from None


def _vec_json(vec) -> list:
    return [format_rational(Fraction(x)) for x in vec]


def graph_to_json(g: GkmGraph) -> dict:
    """Canonical JSON form: ids sorted, rationals reduced."""
    if isinstance(g, EvenGkmGraph):
        doc = {"kind": "even", "torus_rank": g.torus_rank, "signed": g.signed,
               "vertices": sorted(g.vertices),
               "edges": [{"id": e.id, "from": e.source, "to": e.target,
                          "weight": _vec_json(e.weight)}
                         for e in sorted(g.edges, key=lambda e: e.id)]}
        if g.connection:
            doc["connection"] = [
                {"along": str(d), "maps": {str(f): str(img) for f, img in
                                           sorted(g.connection[d].items(), key=lambda t: str(t[0]))}}
                for d in sorted(g.connection, key=str)
            ]
    else:
        doc = {"kind": "odd", "torus_rank": g.torus_rank, "signed": g.signed,
               "circles": sorted(g.circles),
               "squares": []}
        for s in sorted(g.squares, key=lambda s: s.id):
            incs = []
            for inc in s.incidences:
                item = {"circle": inc.circle, "sign": inc.sign}
                if inc.edge_weight is not None:
                    item["edge_weight"] = _vec_json(inc.edge_weight)
                incs.append(item)
            doc["squares"].append({"id": s.id, "weight": _vec_json(s.weight.vector),
                                   "incidences": incs})
    if isinstance(g.meta, dict) and g.meta:
        doc["meta"] = dict(g.meta)
    return doc


def dumps_graph(g: GkmGraph) -> str:
    return json.dumps(graph_to_json(g), indent=2, sort_keys=True) + "\n"


def loads_graph(text: str) -> GkmGraph:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError("", f"malformed JSON: {exc}") from None
    return graph_from_json(doc)


def load_graph(path) -> GkmGraph:
    return loads_graph(Path(path).read_text())


def save_graph(g: GkmGraph, path) -> None:
    Path(path).write_text(dumps_graph(g))


# -- automorphisms -----------------------------------------------------------

def automorphism_from_json(doc) -> Automorphism:
    """``{"node_map": {...}, "part_map": {...}, "theta_signs": {...}, "linear": [[...]]}``."""
    if not isinstance(doc, dict):
        raise SchemaError("", "expected an object")
    maps = []
    for key in ("node_map", "part_map"):
        value = _require(doc, key, dict)
        for k, v in value.items():
            if not isinstance(v, str):
                raise SchemaError(_ptr(key, k), "expected a string")
        maps.append(dict(value))
    signs = doc.get("theta_signs", {}) or {}
    if not isinstance(signs, dict):
        raise SchemaError("/theta_signs", "expected an object")
    for k, v in signs.items():
        if v not in (1, -1) or isinstance(v, bool):
            raise SchemaError(_ptr("theta_signs", k), "sign must be 1 or -1")
    linear = doc.get("linear")
    if linear is not None:
        if not isinstance(linear, list) or not all(isinstance(r, list) for r in linear):
            raise SchemaError("/linear", "expected a matrix (array of rows)")
        linear = [[_rational(x, "linear", i, j) for j, x in enumerate(row)]
                  for i, row in enumerate(linear)]
    return Automorphism(maps[0], maps[1], dict(signs), linear)


def automorphism_to_json(sigma: Automorphism) -> dict:
    return {"node_map": dict(sorted(sigma.node_map.items())),
            "part_map": dict(sorted(sigma.part_map.items())),
            "theta_signs": dict(sorted(sigma.theta_signs.items())),
            "linear": None if sigma.linear is None
            else [[format_rational(Fraction(x)) for x in row] for row in sigma.linear]}


def load_automorphism(path) -> Automorphism:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError("", f"malformed JSON: {exc}") from None
    return automorphism_from_json(doc)
