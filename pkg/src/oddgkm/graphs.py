"""Even and odd GKM graphs: data model, validators, connections and faces.

An even graph has vertices joined by edges carrying weights in t*_Q (up to
sign unless the graph is signed).  Edges are stored once; the two
orientations ("darts") are synthesized.  An odd graph has circles and
squares; every square carries a weight and a list of incidences, each with
an orientation sign and, for signed graphs, a signed edge weight.
"""

from __future__ import annotations

import enum
import itertools
from collections import deque
from dataclasses import dataclass, field, replace
from functools import cached_property
from fractions import Fraction
from typing import Iterable, Mapping, NamedTuple, Sequence

from .exactalg import ExactAlgebraError, primitive_integer_vector, qvector


class GraphStructureError(ValueError):
    """Raised for malformed input: dangling references, duplicate ids, bad weights."""


class GkmConnectionError(ValueError):
    """Raised when the GKM3 connection is not well-defined."""


class GraphNotSignedError(ValueError):
    pass


# -- weights -----------------------------------------------------------------

@dataclass(frozen=True, order=True)
class ProjectiveWeight:
    """A weight modulo sign: primitive integer vector, first nonzero entry positive."""

    vector: tuple[int, ...]

    @classmethod
    def of(cls, vec: Sequence) -> "ProjectiveWeight":
        try:
            prim = primitive_integer_vector(qvector(vec))
        except ExactAlgebraError as exc:
            raise GraphStructureError(str(exc)) from exc
        first = next(v for v in prim if v)
        if first < 0:
            prim = tuple(-v for v in prim)
        return cls(prim)

    @property
    def rank(self) -> int:
        return len(self.vector)

    def as_fractions(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(v) for v in self.vector)

    def __str__(self) -> str:
        return "(" + ",".join(str(v) for v in self.vector) + ")"


def vector_rank(vectors: Sequence[Sequence]) -> int:
    """Rank of a handful of short rational vectors (plain elimination)."""
    rows = [[Fraction(x) for x in v] for v in vectors]
    rank = 0
    ncols = len(rows[0]) if rows else 0
    for col in range(ncols):
        pivot = next((i for i in range(rank, len(rows)) if rows[i][col]), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        for i in range(len(rows)):
            if i != rank and rows[i][col]:
                f = rows[i][col] / rows[rank][col]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[rank])]
        rank += 1
    return rank


def independent(vectors: Sequence[Sequence]) -> bool:
    return vector_rank(vectors) == len(vectors)


def in_span(target: Sequence, spanning: Sequence[Sequence]) -> bool:
    return vector_rank(list(spanning) + [target]) == vector_rank(spanning)


def span_coefficients(target: Sequence, basis: Sequence[Sequence]):
    """Coefficients of ``target`` in terms of independent ``basis``, or None."""
    n = len(basis)
    r = len(target)
    # augmented system: columns are basis vectors
    rows = [[Fraction(basis[j][i]) for j in range(n)] + [Fraction(target[i])] for i in range(r)]
    piv_cols = []
    rank = 0
    for col in range(n):
        pivot = next((i for i in range(rank, r) if rows[i][col]), None)
        if pivot is None:
            return None
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        p = rows[rank][col]
        rows[rank] = [x / p for x in rows[rank]]
        for i in range(r):
            if i != rank and rows[i][col]:
                f = rows[i][col]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[rank])]
        piv_cols.append(col)
        rank += 1
    if any(rows[i][n] for i in range(rank, r)):
        return None
    return tuple(rows[i][n] for i in range(n))


def _sign_and_constant(target, moved, along, signed: bool):
    """Solve ``target = sign*moved + c*along``; return (sign, c) or None."""
    coeffs = span_coefficients(target, [moved, along])
    if coeffs is None:
        return None
    lam, c = coeffs
    if lam == 1 or (lam == -1 and not signed):
        return int(lam), c
    return None


# -- even graphs -------------------------------------------------------------

class Dart(NamedTuple):
    """An oriented edge: the stored edge traversed forwards or backwards."""

    edge: str
    forward: bool = True

    @property
    def reverse(self) -> "Dart":
        return Dart(self.edge, not self.forward)

    def __str__(self) -> str:
        return self.edge if self.forward else f"~{self.edge}"


@dataclass(frozen=True)
class Edge:
    id: str
    source: str
    target: str
    weight: tuple[Fraction, ...]


@dataclass(frozen=True)
class EvenGkmGraph:
    torus_rank: int
    vertices: tuple[str, ...]
    edges: tuple[Edge, ...]
    signed: bool = False
    connection: Mapping | None = field(default=None, compare=False, hash=False)
    meta: Mapping | None = field(default=None, compare=False, hash=False)

    def __post_init__(self):
        seen = set()
        for v in self.vertices:
            if v in seen:
                raise GraphStructureError(f"duplicate vertex {v!r}")
            seen.add(v)
        ids = set()
        for e in self.edges:
            if e.id in ids:
                raise GraphStructureError(f"duplicate edge id {e.id!r}")
            ids.add(e.id)
            for end in (e.source, e.target):
                if end not in seen:
                    raise GraphStructureError(f"edge {e.id!r} references unknown vertex {end!r}")
            if e.source == e.target:
                raise GraphStructureError(f"edge {e.id!r} is a loop at {e.source!r}")
            if len(e.weight) != self.torus_rank:
                raise GraphStructureError(f"edge {e.id!r} weight has wrong length")
            if not any(e.weight):
                raise GraphStructureError(f"edge {e.id!r} has zero weight")

    @classmethod
    def build(cls, torus_rank: int, vertices: Iterable[str], edges: Iterable, signed: bool = False,
              meta=None) -> "EvenGkmGraph":
        """Build from ``(id, source, target, weight)`` tuples.

        Unsigned weights are stored in canonical projective form.
        """
        out = []
        for eid, src, dst, w in edges:
            w = qvector(w)
            if len(w) != torus_rank:
                raise GraphStructureError(f"edge {eid!r} weight has wrong length")
            if not signed:
                w = ProjectiveWeight.of(w).as_fractions()
            out.append(Edge(str(eid), str(src), str(dst), w))
        return cls(torus_rank, tuple(str(v) for v in vertices), tuple(out), signed, None, meta)

    # incidence helpers
    @cached_property
    def edge_map(self) -> dict[str, Edge]:
        return {e.id: e for e in self.edges}

    @cached_property
    def _darts_at(self) -> dict[str, tuple]:
        out = {v: [] for v in self.vertices}
        for e in self.edges:
            out[e.source].append(Dart(e.id, True))
            out[e.target].append(Dart(e.id, False))
        return {v: tuple(ds) for v, ds in out.items()}

    def initial(self, d: Dart) -> str:
        e = self.edge_map[d.edge]
        return e.source if d.forward else e.target

    def terminal(self, d: Dart) -> str:
        return self.initial(d.reverse)

    def weight(self, d: Dart) -> tuple[Fraction, ...]:
        w = self.edge_map[d.edge].weight
        if self.signed and not d.forward:
            return tuple(-x for x in w)
        return w

    def projective_weight(self, d: Dart) -> ProjectiveWeight:
        return ProjectiveWeight.of(self.weight(d))

    def darts(self) -> list[Dart]:
        return [Dart(e.id, f) for e in self.edges for f in (True, False)]

    def darts_at(self, v: str) -> list[Dart]:
        return list(self._darts_at[v])

    def valence(self, v: str) -> int:
        return len(self.darts_at(v))

    @property
    def valences(self) -> dict[str, int]:
        return {v: self.valence(v) for v in self.vertices}

    @property
    def uniform_valence(self) -> int | None:
        vals = set(self.valences.values())
        if len(vals) == 1:
            return vals.pop()
        return None

    @property
    def kind(self) -> str:
        return "even"

    def with_connection(self, connection) -> "EvenGkmGraph":
        return replace(self, connection=connection)


# -- odd graphs --------------------------------------------------------------

@dataclass(frozen=True)
class Incidence:
    circle: str
    sign: int = 1
    edge_weight: tuple[Fraction, ...] | None = None


@dataclass(frozen=True)
class Square:
    id: str
    weight: ProjectiveWeight
    incidences: tuple[Incidence, ...]

    @property
    def circles(self) -> tuple[str, ...]:
        return tuple(i.circle for i in self.incidences)

    @property
    def valence(self) -> int:
        return len(self.incidences)

    @property
    def floating(self) -> bool:
        return self.valence == 1

    @property
    def grounded(self) -> bool:
        return self.valence >= 2

    def sign_at(self, circle: str) -> int:
        for inc in self.incidences:
            if inc.circle == circle:
                return inc.sign
        raise KeyError(circle)

    def incidence_at(self, circle: str) -> Incidence:
        for inc in self.incidences:
            if inc.circle == circle:
                return inc
        raise KeyError(circle)


def make_square(sid: str, weight: Sequence, incidences: Sequence) -> Square:
    """Build a square; incidences are circle names, dicts or Incidence objects.

    Missing signs default to (+1, -1) in incidence order on 2-valent squares
    and +1 otherwise.
    """
    items = []
    for inc in incidences:
        if isinstance(inc, Incidence):
            items.append((inc.circle, inc.sign, inc.edge_weight))
        elif isinstance(inc, str):
            items.append((inc, None, None))
        else:
            ew = inc.get("edge_weight")
            items.append((inc["circle"], inc.get("sign"), None if ew is None else qvector(ew)))
    defaults = (1, -1) if len(items) == 2 else (1,) * len(items)
    out = tuple(
        Incidence(str(c), int(defaults[i] if s is None else s), ew)
        for i, (c, s, ew) in enumerate(items)
    )
    return Square(str(sid), ProjectiveWeight.of(weight), out)


@dataclass(frozen=True)
class OddGkmGraph:
    torus_rank: int
    circles: tuple[str, ...]
    squares: tuple[Square, ...]
    meta: Mapping | None = field(default=None, compare=False, hash=False)

    def __post_init__(self):
        known = set()
        for c in self.circles:
            if c in known:
                raise GraphStructureError(f"duplicate circle {c!r}")
            known.add(c)
        ids = set()
        for s in self.squares:
            if s.id in ids:
                raise GraphStructureError(f"duplicate square id {s.id!r}")
            ids.add(s.id)
            if s.weight.rank != self.torus_rank:
                raise GraphStructureError(f"square {s.id!r} weight has wrong length")
            seen = set()
            for inc in s.incidences:
                if inc.circle not in known:
                    raise GraphStructureError(
                        f"square {s.id!r} references unknown circle {inc.circle!r}")
                if inc.circle in seen:
                    raise GraphStructureError(
                        f"square {s.id!r} is incident to {inc.circle!r} twice")
                seen.add(inc.circle)
                if inc.sign not in (1, -1):
                    raise GraphStructureError(f"square {s.id!r}: sign must be +1 or -1")
                if inc.edge_weight is not None:
                    if len(inc.edge_weight) != self.torus_rank:
                        raise GraphStructureError(
                            f"square {s.id!r}: edge weight at {inc.circle!r} has wrong length")
                    if ProjectiveWeight.of(inc.edge_weight) != s.weight:
                        raise GraphStructureError(
                            f"square {s.id!r}: edge weight at {inc.circle!r} is not "
                            f"+-{s.weight}")

    @property
    def kind(self) -> str:
        return "odd"

    @property
    def signed(self) -> bool:
        incs = [i for s in self.squares for i in s.incidences]
        return bool(incs) and all(i.edge_weight is not None for i in incs)

    @cached_property
    def square_map(self) -> dict[str, Square]:
        return {s.id: s for s in self.squares}

    @cached_property
    def _squares_at(self) -> dict[str, tuple]:
        out = {c: [] for c in self.circles}
        for s in self.squares:
            for c in s.circles:
                out[c].append(s)
        return {c: tuple(ss) for c, ss in out.items()}

    def squares_at(self, circle: str) -> list[Square]:
        return list(self._squares_at[circle])

    def valence(self, circle: str) -> int:
        return len(self.squares_at(circle))

    @property
    def valences(self) -> dict[str, int]:
        return {c: self.valence(c) for c in self.circles}

    @property
    def uniform_valence(self) -> int | None:
        vals = set(self.valences.values())
        if len(vals) == 1:
            return vals.pop()
        return None

    def floating_squares_at(self, circle: str) -> list[Square]:
        return [s for s in self.squares_at(circle) if s.floating]


GkmGraph = EvenGkmGraph | OddGkmGraph


# -- reports -----------------------------------------------------------------

@dataclass
class Violation:
    kind: str
    message: str
    witnesses: tuple = ()

    def to_json(self) -> dict:
        return {"kind": self.kind, "message": self.message,
                "witnesses": [str(w) for w in self.witnesses]}


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    info: dict = field(default_factory=dict)

    @property
    def valid(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.valid

    def add(self, kind: str, message: str, *witnesses):
        self.violations.append(Violation(kind, message, tuple(witnesses)))

    def to_json(self) -> dict:
        return {"valid": self.valid,
                "violations": [v.to_json() for v in self.violations],
                "warnings": list(self.warnings),
                "info": self.info}


def _connected(nodes: Sequence[str], neighbours) -> bool:
    if not nodes:
        return True
    seen = {nodes[0]}
    queue = deque([nodes[0]])
    while queue:
        u = queue.popleft()
        for w in neighbours(u):
            if w not in seen:
                seen.add(w)
                queue.append(w)
    return len(seen) == len(nodes)


def _check_independence(report, where: str, labelled_weights, k: int):
    size = min(k, len(labelled_weights))
    if size < 2:
        return
    for combo in itertools.combinations(labelled_weights, size):
        if not independent([w for _, w in combo]):
            report.add("independence",
                       f"{size} weights at {where} are linearly dependent",
                       where, *(label for label, _ in combo))


# -- even validation and connection ------------------------------------------

def validate_even(g: EvenGkmGraph, k: int = 2) -> ValidationReport:
    """GKM_k checks on an even graph, plus connection checks if one is attached."""
    if k < 2:
        raise ValueError("k must be at least 2")
    report = ValidationReport()
    valences = g.valences
    if len(set(valences.values())) > 1:
        report.add("valence", f"valences are not uniform: {valences}")
    report.info["valence"] = g.uniform_valence
    for d in g.darts():
        w, wr = g.weight(d), g.weight(d.reverse)
        expected = tuple(-x for x in w) if g.signed else w
        if wr != expected:
            report.add("reversal", f"weight of reversed {d} is inconsistent", d)
    for v in g.vertices:
        _check_independence(report, v, [(d, g.weight(d)) for d in g.darts_at(v)], k)
    if g.connection is not None:
        _check_connection(g, report)
    return report


def _check_connection(g: EvenGkmGraph, report: ValidationReport):
    conn = g.connection
    for e in g.darts():
        if e not in conn:
            report.add("connection", f"no connection map along {e}", e)
            continue
        m = conn[e]
        src = g.darts_at(g.initial(e))
        dst = g.darts_at(g.terminal(e))
        if set(m) != set(src) or sorted(m.values()) != sorted(dst):
            report.add("connection", f"map along {e} is not a bijection E_i(e) -> E_t(e)", e)
            continue
        if m[e] != e.reverse:
            report.add("connection", f"connection along {e} does not send it to its reverse", e)
        back = conn.get(e.reverse)
        if back is None or any(back.get(m[f]) != f for f in src):
            report.add("connection", f"connection along reverse of {e} is not the inverse", e)
        for f in src:
            if f == e:
                continue
            sol = _sign_and_constant(g.weight(m[f]), g.weight(f), g.weight(e), g.signed)
            if sol is None:
                branch = "alpha(f) + c alpha(e)" if g.signed else "+-alpha(f) + c alpha(e)"
                report.add("connection",
                           f"weight of image of {f} along {e} is not {branch}", e, f)
            elif sol[1].denominator != 1:
                report.warnings.append(
                    f"non-integer connection constant {sol[1]} for ({e}, {f})")


def infer_connection_gkm3(g: EvenGkmGraph) -> EvenGkmGraph:
    """Attach the canonical connection of a GKM3 graph.

    For each dart ``e`` and each other dart ``f`` at ``i(e)``, the image is
    the unique dart ``e'`` at ``t(e)`` (other than the reverse of ``e``) with
    ``alpha(e') = +-alpha(f) + c alpha(e)``; signed graphs need the + branch.
    """
    conn: dict[Dart, dict[Dart, Dart]] = {}
    for e in g.darts():
        at_end = [d for d in g.darts_at(g.terminal(e)) if d != e.reverse]
        m = {e: e.reverse}
        for f in g.darts_at(g.initial(e)):
            if f == e:
                continue
            hits = [d for d in at_end
                    if _sign_and_constant(g.weight(d), g.weight(f), g.weight(e), g.signed)]
            if len(hits) != 1:
                raise GkmConnectionError(
                    f"connection not well-defined at ({e}, {f}): {len(hits)} candidate edges")
            m[f] = hits[0]
        if len(set(m.values())) != len(m):
            raise GkmConnectionError(f"connection not well-defined along {e}: not injective")
        conn[e] = m
    return g.with_connection(conn)


def connection_constants(g: EvenGkmGraph) -> dict:
    """``(e, f) -> (sign, c)`` with ``alpha(nabla_e f) = sign*alpha(f) + c*alpha(e)``."""
    if g.connection is None:
        raise ValueError("graph has no connection")
    out = {}
    for e, m in g.connection.items():
        for f, img in m.items():
            if f != e:
                out[(e, f)] = _sign_and_constant(g.weight(img), g.weight(f), g.weight(e), g.signed)
    return out


# -- odd validation and connection -------------------------------------------

def validate_odd(g: OddGkmGraph, k: int = 2) -> ValidationReport:
    if k < 2:
        raise ValueError("k must be at least 2")
    report = ValidationReport()
    valences = g.valences
    if len(set(valences.values())) > 1:
        report.add("valence", f"circle valences are not uniform: {valences}")
    report.info["valence"] = g.uniform_valence
    for s in g.squares:
        if s.valence < 1:
            report.add("square-valence", f"square {s.id} has no incidences", s.id)
    for c in g.circles:
        _check_independence(report, c,
                            [(s.id, s.weight.vector) for s in g.squares_at(c)], k)

    def neighbours(c):
        return {x for s in g.squares_at(c) for x in s.circles}

    if not _connected(list(g.circles), neighbours):
        report.add("connected", "graph is not connected")
    report.info["floating"] = {c: len(g.floating_squares_at(c)) for c in g.circles}
    return report


@dataclass
class OddConnectionTable:
    maps: dict = field(default_factory=dict)       # (c1, c2, s0) -> {s: s'}
    constants: dict = field(default_factory=dict)  # (c1, c2, s0, s) -> (sign, c)
    warnings: list = field(default_factory=list)

    def transport(self, c1: str, c2: str, s0: str, s: str) -> str:
        return self.maps[(c1, c2, s0)][s]

    def __len__(self) -> int:
        return len(self.maps)


def infer_odd_connection_gkm3(g: OddGkmGraph) -> OddConnectionTable:
    table = OddConnectionTable()
    for s0 in g.squares:
        if not s0.grounded:
            continue
        for c1, c2 in itertools.permutations(s0.circles, 2):
            m = {s0.id: s0.id}
            for s in g.squares_at(c1):
                if s.id == s0.id:
                    continue
                hits = []
                for t in g.squares_at(c2):
                    if t.id == s0.id:
                        continue
                    sol = _sign_and_constant(t.weight.vector, s.weight.vector,
                                             s0.weight.vector, False)
                    if sol is not None:
                        hits.append((t.id, sol))
                if len(hits) != 1:
                    raise GkmConnectionError(
                        f"odd connection not well-defined at ({c1}, {c2}, {s0.id}, {s.id}): "
                        f"{len(hits)} candidate squares")
                m[s.id] = hits[0][0]
                table.constants[(c1, c2, s0.id, s.id)] = hits[0][1]
                if hits[0][1][1].denominator != 1:
                    table.warnings.append(
                        f"non-integer constant {hits[0][1][1]} at ({c1}, {c2}, {s0.id}, {s.id})")
            if len(set(m.values())) != len(m):
                raise GkmConnectionError(
                    f"odd connection not well-defined at ({c1}, {c2}, {s0.id}): not injective")
            table.maps[(c1, c2, s0.id)] = m
    # property (2): the reverse transport is the inverse
    for (c1, c2, s0), m in table.maps.items():
        back = table.maps[(c2, c1, s0)]
        if any(back[v] != u for u, v in m.items()):
            raise GkmConnectionError(f"odd connection at ({c1}, {c2}, {s0}) is not invertible")
    return table


# -- faces -------------------------------------------------------------------

class FaceShape(enum.Enum):
    PINWHEEL_1 = "PINWHEEL_1"
    CHAIN_2A = "CHAIN_2A"
    LUNE_2B = "LUNE_2B"
    TRIANGLE_3 = "TRIANGLE_3"
    QUADRANGLE_4 = "QUADRANGLE_4"
    OTHER = "OTHER"


def extract_two_face(g: GkmGraph, base: str, pair: Sequence):
    """The 2-face through ``base`` spanned by two incident edges (or squares).

    Collects, from ``base`` outwards, every edge/square whose weight lies in
    the span of the two given weights.  ``pair`` holds darts or edge ids for
    even graphs and square ids for odd graphs.
    """
    if isinstance(g, EvenGkmGraph):
        return _even_face(g, base, pair)
    return _odd_face(g, base, pair)


def _as_dart(g: EvenGkmGraph, base: str, d) -> Dart:
    if isinstance(d, Dart):
        return d
    e = g.edge_map[d]
    return Dart(e.id, e.source == base)


def _even_face(g: EvenGkmGraph, base: str, pair) -> EvenGkmGraph:
    d1, d2 = (_as_dart(g, base, d) for d in pair)
    for d in (d1, d2):
        if g.initial(d) != base:
            raise ValueError(f"{d} does not start at {base}")
    span = [g.weight(d1), g.weight(d2)]
    if not independent(span):
        raise ValueError("pair weights are dependent")
    verts, edges = {base}, set()
    queue = deque([base])
    while queue:
        u = queue.popleft()
        for d in g.darts_at(u):
            if in_span(g.weight(d), span):
                edges.add(d.edge)
                w = g.terminal(d)
                if w not in verts:
                    verts.add(w)
                    queue.append(w)
    return EvenGkmGraph(g.torus_rank,
                        tuple(v for v in g.vertices if v in verts),
                        tuple(e for e in g.edges if e.id in edges),
                        g.signed)


def _odd_face(g: OddGkmGraph, base: str, pair) -> OddGkmGraph:
    sq = g.square_map
    s1, s2 = (sq[p] for p in pair)
    for s in (s1, s2):
        if base not in s.circles:
            raise ValueError(f"square {s.id} is not incident to {base}")
    span = [s1.weight.vector, s2.weight.vector]
    if not independent(span):
        raise ValueError("pair weights are dependent")
    circles, squares = {base}, set()
    queue = deque([base])
    while queue:
        c = queue.popleft()
        for s in g.squares_at(c):
            if in_span(s.weight.vector, span):
                squares.add(s.id)
                for c2 in s.circles:
                    if c2 not in circles:
                        circles.add(c2)
                        queue.append(c2)
    return OddGkmGraph(g.torus_rank,
                       tuple(c for c in g.circles if c in circles),
                       tuple(s for s in g.squares if s.id in squares))


def transport_two_face(g: GkmGraph, base: str, pair: Sequence, connection=None):
    """The same face traced by sliding along the connection instead of spans."""
    if isinstance(g, EvenGkmGraph):
        if g.connection is None:
            g = infer_connection_gkm3(g)
        conn = g.connection
        start = frozenset(_as_dart(g, base, d) for d in pair)
        seen_pairs = {start}
        queue = deque([start])
        verts, edges = {base}, set()
        while queue:
            darts = tuple(queue.popleft())
            for a, b in ((darts[0], darts[1]), (darts[1], darts[0])):
                edges.add(a.edge)
                verts.add(g.terminal(a))
                nxt = frozenset((a.reverse, conn[a][b]))
                if nxt not in seen_pairs:
                    seen_pairs.add(nxt)
                    queue.append(nxt)
        return EvenGkmGraph(g.torus_rank,
                            tuple(v for v in g.vertices if v in verts),
                            tuple(e for e in g.edges if e.id in edges),
                            g.signed)
    table = connection if connection is not None else infer_odd_connection_gkm3(g)
    sq = g.square_map
    start = (base, frozenset(pair))
    seen = {start}
    queue = deque([start])
    circles, squares = set(), set()
    while queue:
        c, ss = queue.popleft()
        circles.add(c)
        squares.update(ss)
        ss = tuple(ss)
        for a, b in ((ss[0], ss[1]), (ss[1], ss[0])):
            if not sq[a].grounded:
                continue
            for c2 in sq[a].circles:
                if c2 == c:
                    continue
                nxt = (c2, frozenset((a, table.transport(c, c2, a, b))))
                if nxt not in seen:
                    seen.add(nxt)
                    queue.append(nxt)
    for s in squares:
        circles.update(sq[s].circles)
    return OddGkmGraph(g.torus_rank,
                       tuple(c for c in g.circles if c in circles),
                       tuple(s for s in g.squares if s.id in squares))


def face_key(face: GkmGraph) -> tuple:
    if isinstance(face, EvenGkmGraph):
        return ("even", frozenset(face.vertices), frozenset(e.id for e in face.edges))
    return ("odd", frozenset(face.circles), frozenset(s.id for s in face.squares))


def all_two_faces(g: GkmGraph) -> list:
    """Every distinct 2-face, found from every base and every incident pair."""
    faces = {}
    if isinstance(g, EvenGkmGraph):
        for v in g.vertices:
            for d1, d2 in itertools.combinations(g.darts_at(v), 2):
                face = _even_face(g, v, (d1, d2))
                faces.setdefault(face_key(face), face)
    else:
        for c in g.circles:
            for s1, s2 in itertools.combinations(g.squares_at(c), 2):
                face = _odd_face(g, c, (s1.id, s2.id))
                faces.setdefault(face_key(face), face)
    return list(faces.values())


def classify_face_shape(face: OddGkmGraph) -> FaceShape:
    n = len(face.circles)
    vals = sorted(s.valence for s in face.squares)
    if any(face.valence(c) != 2 for c in face.circles):
        return FaceShape.OTHER
    if n == 1 and vals == [1, 1]:
        return FaceShape.PINWHEEL_1
    if n == 2 and vals == [1, 1, 2]:
        return FaceShape.CHAIN_2A
    if n == 2 and vals == [2, 2]:
        return FaceShape.LUNE_2B

    def neighbours(c):
        return {x for s in face.squares_at(c) for x in s.circles}

    if n in (3, 4) and vals == [2] * n and _connected(list(face.circles), neighbours):
        return FaceShape.TRIANGLE_3 if n == 3 else FaceShape.QUADRANGLE_4
    return FaceShape.OTHER


@dataclass
class GateReport:
    mode: str
    passed: bool
    bad_squares: list = field(default_factory=list)
    bad_faces: list = field(default_factory=list)
    shapes: dict = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.passed

    def to_json(self) -> dict:
        return {"mode": self.mode, "passed": self.passed,
                "bad_squares": list(self.bad_squares),
                "bad_faces": [sorted(f) for f in self.bad_faces],
                "shapes": dict(self.shapes)}


def curvature_gate(g: OddGkmGraph, mode: str = "nonneg") -> GateReport:
    """Combinatorial consequences of a lower curvature bound.

    ``nonneg``: squares have valence 1 or 2 and every 2-face is one of the
    five catalogued shapes.  ``positive``: every square is floating.
    """
    if mode not in ("nonneg", "positive"):
        raise ValueError(f"unknown mode {mode!r}")
    allowed = {1} if mode == "positive" else {1, 2}
    report = GateReport(mode, True)
    report.bad_squares = [s.id for s in g.squares if s.valence not in allowed]
    for face in all_two_faces(g):
        shape = classify_face_shape(face)
        report.shapes[shape.value] = report.shapes.get(shape.value, 0) + 1
        ok = shape is FaceShape.PINWHEEL_1 if mode == "positive" else shape is not FaceShape.OTHER
        if not ok:
            report.bad_faces.append(frozenset(face.circles) | frozenset(s.id for s in face.squares))
    report.passed = not report.bad_squares and not report.bad_faces
    return report


def detect_biangles(g: EvenGkmGraph) -> list[EvenGkmGraph]:
    """All 2-faces with exactly two vertices.

    A signed GKM3 graph has none, so a nonempty result certifies that the
    weights admit no consistent signed structure.
    """
    return [f for f in all_two_faces(g) if len(f.vertices) == 2]


@dataclass
class AlternatingResult:
    alternating: bool
    failing: list = field(default_factory=list)
    sums: dict = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.alternating


def alternating_check(g: OddGkmGraph) -> AlternatingResult:
    if not g.signed:
        raise GraphNotSignedError("graph is not signed")
    result = AlternatingResult(True)
    for s in g.squares:
        total = tuple(sum(col, Fraction(0)) for col in zip(*(i.edge_weight for i in s.incidences)))
        result.sums[s.id] = total
        if any(total):
            result.failing.append(s.id)
    result.alternating = not result.failing
    return result


@dataclass
class FloatingProfile:
    counts: dict
    constant: bool
    k: int | None


def floating_profile(g: OddGkmGraph) -> FloatingProfile:
    counts = {c: len(g.floating_squares_at(c)) for c in g.circles}
    values = set(counts.values())
    constant = len(values) <= 1
    k = values.pop() if constant and values else None
    return FloatingProfile(counts, constant, k)


def with_signed_edge_weights(g: OddGkmGraph) -> OddGkmGraph:
    """Decorate every incidence with ``sign * weight`` (the (+w, -w) pattern)."""
    squares = tuple(
        replace(s, incidences=tuple(
            replace(i, edge_weight=tuple(Fraction(i.sign * x) for x in s.weight.vector))
            for i in s.incidences))
        for s in g.squares)
    return replace(g, squares=squares)
