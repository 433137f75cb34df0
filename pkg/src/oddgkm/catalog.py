"""Named example graphs and the product constructions behind them.

Even graphs (the GKM graphs of the standard torus actions):

===================  =====================================================
point                one vertex, rank 1
s2_interval          two vertices, one edge of weight (1)
s4_lune              two vertices, edges (1,0) and (0,1)
cp2_triangle         edges (1,0), (0,1), (1,-1)
s2xs2_quadrangle     4-cycle with alternating weights (1,0), (0,1)
cube3                the 3-cube, direction-i edges of weight e_i
===================  =====================================================

Odd graphs: ``pinwheel(n)``, ``chain``, ``lune_odd``, ``triangle_odd``,
``quadrangle_odd`` and ``m9`` (cube3 times S^3 in rank 4).  Vertices of
cube-like graphs are named by bit strings so that antipodal maps are easy to
write down.
"""

from __future__ import annotations

import re
from dataclasses import replace
from fractions import Fraction
from typing import Sequence

from .graphs import (
    EvenGkmGraph,
    GraphStructureError,
    OddGkmGraph,
    ProjectiveWeight,
    Square,
    Incidence,
    independent,
)

EVEN_NAMES = ("point", "s2_interval", "s4_lune", "cp2_triangle", "s2xs2_quadrangle", "cube3")
ODD_NAMES = ("pinwheel", "chain", "lune_odd", "triangle_odd", "quadrangle_odd", "m9")


class UnknownCatalogName(KeyError):
    pass


def _unit(r: int, i: int) -> tuple[int, ...]:
    return tuple(int(j == i) for j in range(r))


def _cube(dim: int, signed: bool = False) -> EvenGkmGraph:
    verts = [format(i, f"0{dim}b")[::-1] for i in range(2 ** dim)]
    edges = []
    for v in verts:
        for i in range(dim):
            if v[i] == "0":
                w = v[:i] + "1" + v[i + 1:]
                edges.append((f"v{v}-v{w}", f"v{v}", f"v{w}", _unit(dim, i)))
    return EvenGkmGraph.build(dim, [f"v{v}" for v in verts], edges, signed=signed)


def _even(name: str, signed: bool) -> EvenGkmGraph:
    if name == "point":
        return EvenGkmGraph.build(1, ["v0"], [], signed=signed)
    if name == "s2_interval":
        return EvenGkmGraph.build(1, ["v0", "v1"], [("e0", "v0", "v1", (1,))], signed=signed)
    if name == "s4_lune":
        return EvenGkmGraph.build(2, ["v0", "v1"], [("e0", "v0", "v1", (1, 0)),
                                                    ("e1", "v0", "v1", (0, 1))], signed=signed)
    if name == "cp2_triangle":
        # signed: the weights of the standard almost complex structure
        return EvenGkmGraph.build(2, ["v0", "v1", "v2"], [
            ("e01", "v0", "v1", (1, 0)),
            ("e02", "v0", "v2", (0, 1)),
            ("e12", "v1", "v2", (-1, 1)),
        ], signed=signed)
    if name == "s2xs2_quadrangle":
        return EvenGkmGraph.build(2, ["v00", "v10", "v11", "v01"], [
            ("v00-v10", "v00", "v10", (1, 0)),
            ("v10-v11", "v10", "v11", (0, 1)),
            ("v01-v11", "v01", "v11", (1, 0)),
            ("v00-v01", "v00", "v01", (0, 1)),
        ], signed=signed)
    if name == "cube3":
        return _cube(3, signed)
    raise UnknownCatalogName(name)


def make_standard(name: str, signed: bool = False):
    """Return the named catalog graph.

    ``pinwheel(n)`` may be written ``"pinwheel(3)"`` or ``"pinwheel3"``.
    ``signed`` applies to even graphs (signed weights) and to odd graphs
    (every incidence gets the edge weight ``sign * weight``).
    """
    m = re.fullmatch(r"pinwheel\(?(\d+)\)?", name)
    if m:
        g = pinwheel(int(m.group(1)))
    elif name in EVEN_NAMES:
        return _even(name, signed)
    elif name == "chain":
        g = cross_with_odd_sphere(lift(_even("s2_interval", False), 2), [(0, 1)])
    elif name == "lune_odd":
        g = cross_with_circle(_even("s4_lune", False))
    elif name == "triangle_odd":
        g = cross_with_circle(_even("cp2_triangle", False))
    elif name == "quadrangle_odd":
        g = cross_with_circle(_even("s2xs2_quadrangle", False))
    elif name == "m9":
        g = cross_with_odd_sphere(lift(_even("cube3", False), 4), [_unit(4, 3)])
    else:
        raise UnknownCatalogName(name)
    if signed:
        from .graphs import with_signed_edge_weights
        g = with_signed_edge_weights(g)
    return replace(g, meta={"name": name})


def pinwheel(n: int) -> OddGkmGraph:
    if n < 1:
        raise ValueError("pinwheel needs at least one square")
    point = EvenGkmGraph.build(n, ["v0"], [])
    return cross_with_odd_sphere(point, [_unit(n, i) for i in range(n)])


def catalog_names() -> list[str]:
    return list(EVEN_NAMES) + ["pinwheel(n)"] + [n for n in ODD_NAMES if n != "pinwheel"]


def lift(g: EvenGkmGraph, rank: int) -> EvenGkmGraph:
    """Pad every weight with zeros up to ``rank`` coordinates."""
    if rank < g.torus_rank:
        raise ValueError("cannot lift to a smaller rank")
    pad = (Fraction(0),) * (rank - g.torus_rank)
    edges = tuple(replace(e, weight=tuple(e.weight) + pad) for e in g.edges)
    return EvenGkmGraph(rank, g.vertices, edges, g.signed)


def cross_with_circle(g: EvenGkmGraph) -> OddGkmGraph:
    """The odd graph of ``M x S^1`` with the torus acting trivially on the circle.

    Each edge becomes a 2-valent square with signs (+1, -1) on (source, target).
    """
    return cross_with_odd_sphere(g, [])


def cross_with_odd_sphere(g: EvenGkmGraph, extra: Sequence[Sequence]) -> OddGkmGraph:
    """The odd graph of ``M x S^(2m+1)``: one floating square per extra weight at every circle."""
    extra = [tuple(Fraction(x) for x in w) for w in extra]
    for w in extra:
        if len(w) != g.torus_rank:
            raise GraphStructureError("extra weight has the wrong length")
    for v in g.vertices:
        ws = [g.weight(d) for d in g.darts_at(v)] + extra
        for i in range(len(ws)):
            for j in range(i + 1, len(ws)):
                if not independent([ws[i], ws[j]]):
                    raise GraphStructureError(
                        f"extra weights are not independent of the weights at {v}")
    squares = [
        Square(e.id, ProjectiveWeight.of(e.weight),
               (Incidence(e.source, 1), Incidence(e.target, -1)))
        for e in g.edges
    ]
    for v in g.vertices:
        for j, w in enumerate(extra):
            squares.append(Square(f"{v}:f{j}", ProjectiveWeight.of(w), (Incidence(v, 1),)))
    return OddGkmGraph(g.torus_rank, g.vertices, tuple(squares))


def antipodal_automorphism(g, theta_sign: int = -1):
    """The map flipping every bit of a cube-style vertex name.

    Works for graphs built from ``s2xs2_quadrangle`` and ``cube3`` (and their
    products with odd spheres).  For odd graphs every circle gets the
    theta-sign ``theta_sign``; the torus acts trivially.
    """
    from .cohomology import Automorphism

    def flip(name: str) -> str:
        if not re.fullmatch(r"v[01]+", name):
            raise ValueError(f"vertex {name!r} is not a bit string")
        return "v" + "".join("1" if b == "0" else "0" for b in name[1:])

    if isinstance(g, EvenGkmGraph):
        vmap = {v: flip(v) for v in g.vertices}
        by_ends = {}
        for e in g.edges:
            by_ends.setdefault(frozenset((e.source, e.target, tuple(e.weight))), []).append(e.id)
        emap = {}
        for e in g.edges:
            key = frozenset((vmap[e.source], vmap[e.target], tuple(e.weight)))
            emap[e.id] = by_ends[key][0]
        return Automorphism(vmap, emap, {}, None)
    cmap = {c: flip(c) for c in g.circles}
    smap = {}
    by_key = {}
    for s in g.squares:
        by_key[(frozenset(s.circles), s.weight)] = s.id
    for s in g.squares:
        smap[s.id] = by_key[(frozenset(cmap[c] for c in s.circles), s.weight)]
    return Automorphism(cmap, smap, {c: theta_sign for c in g.circles}, None)
