"""Reducing an odd GKM graph to an even one, and checking the sphere splitting.

The reduction keeps every circle as a vertex, turns each 2-valent square
into an edge carrying the square's weight, and forgets the floating
squares; their (constant) number per circle is the ``k`` of the odd sphere
``S^(2k+1)`` that should split off.  The splitting check then compares the
equivariant cohomology of the odd graph with that of the reduced graph
degree by degree, using an explicit degree-(2k+1) class ``omega``.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction

from .cohomology import (
    BettiVector,
    GradedClass,
    _coordinate_rows,
    _row_rank,
    convolve,
    graded_piece,
    nodes,
    orientability_check,
    ordinary_betti,
    polynomial_split_check,
    relations,
    sphere_betti,
    top_degree,
)
from .exactalg import HomogeneousPoly, kernel, multiplication_matrix, poly_multiply, restriction_rows
from .graphs import (
    EvenGkmGraph,
    OddGkmGraph,
    floating_profile,
    infer_connection_gkm3,
    validate_even,
    validate_odd,
)


class ReductionError(ValueError):
    pass


@dataclass
class ReductionResult:
    graph: EvenGkmGraph
    k: int
    circle_map: dict
    square_map: dict

    def to_json(self) -> dict:
        from .io import graph_to_json
        return {"k": self.k, "graph": graph_to_json(self.graph),
                "circle_map": dict(self.circle_map), "square_map": dict(self.square_map)}


def reduce_odd_to_even(g: OddGkmGraph) -> ReductionResult:
    """Collapse ``g`` to its even graph; the result carries the inferred connection."""
    for s in g.squares:
        if s.valence >= 3:
            raise ReductionError(f"reduction undefined: square {s.id} has valence {s.valence}")
    report = validate_odd(g, 3)
    if not report.valid:
        raise ReductionError("graph is not a valid GKM_3 odd graph: "
                             + "; ".join(v.message for v in report.violations))
    profile = floating_profile(g)
    if not profile.constant:
        raise ReductionError("graph violates the reduction hypotheses: floating counts "
                             f"differ between circles {profile.counts}")
    edges = []
    square_map = {}
    for s in g.squares:
        if s.grounded:
            c1, c2 = s.circles
            edges.append((s.id, c1, c2, s.weight.vector))
            square_map[s.id] = s.id
    gamma = EvenGkmGraph.build(g.torus_rank, g.circles, edges, meta={"reduced_from": _name(g)})
    gamma = infer_connection_gkm3(gamma)
    check = validate_even(gamma, 3)
    if not check.valid:
        raise ReductionError("reduced graph fails GKM_3 validation: "
                             + "; ".join(v.message for v in check.violations))
    return ReductionResult(gamma, profile.k, {c: c for c in g.circles}, square_map)


def _name(g) -> str | None:
    return (g.meta or {}).get("name") if isinstance(g.meta, dict) else None


# -- omega -------------------------------------------------------------------

@dataclass
class OmegaClass:
    coefficients: dict            # circle -> Fraction a_c
    degree: int
    polys: dict                   # circle -> HomogeneousPoly a_c * prod(floating weights)
    cls: GradedClass = field(repr=False)

    def to_json(self) -> dict:
        return {"degree": self.degree,
                "coefficients": {c: str(a) for c, a in self.coefficients.items()},
                "polys": {c: str(p) for c, p in self.polys.items()}}


@dataclass
class Obstruction:
    reason: str
    nullity: int
    squares: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {"reason": self.reason, "nullity": self.nullity, "squares": list(self.squares)}


def floating_product(g: OddGkmGraph, circle: str) -> HomogeneousPoly:
    out = HomogeneousPoly.constant(g.torus_rank, 1)
    for s in g.floating_squares_at(circle):
        out = poly_multiply(out, HomogeneousPoly.linear_form(s.weight.vector))
    return out


def find_omega(g: OddGkmGraph) -> OmegaClass | Obstruction:
    """Solve for the scalars a_c making ``a_c * prod(floating weights)`` a class."""
    red = reduce_odd_to_even(g)
    circles = list(g.circles)
    index = {c: i for i, c in enumerate(circles)}
    base = {c: floating_product(g, c) for c in circles}
    rows = []
    for s in g.squares:
        if not s.grounded:
            continue
        (c1, e1), (c2, e2) = [(i.circle, i.sign) for i in s.incidences]
        block = restriction_rows(s.weight.vector, red.k)
        f1 = _integer_coeffs(base[c1])
        f2 = _integer_coeffs(base[c2])
        for brow in block:
            row = [0] * len(circles)
            row[index[c1]] += e1 * sum(a * b for a, b in zip(brow, f1))
            row[index[c2]] += e2 * sum(a * b for a, b in zip(brow, f2))
            if any(row):
                rows.append(row)
    ker = kernel(rows, len(circles))
    if ker.nullity != 1:
        reason = ("no nonzero solution" if ker.nullity == 0
                  else f"solution space has dimension {ker.nullity}")
        return Obstruction(reason, ker.nullity, _witness_chain(g, base, red.k))
    vec = ker.basis[0]
    if any(x == 0 for x in vec):
        zero = [c for c, x in zip(circles, vec) if x == 0]
        return Obstruction(f"solution vanishes at circles {zero}", 1, _witness_chain(g, base, red.k))
    first = vec[0]
    coeffs = {c: Fraction(x, first) for c, x in zip(circles, vec)}
    polys = {c: base[c].scale(coeffs[c]) for c in circles}
    cls = GradedClass(g, 2 * red.k + 1, tuple(polys[c] for c in circles))
    return OmegaClass(coeffs, 2 * red.k + 1, polys, cls)


def _integer_coeffs(p: HomogeneousPoly) -> list[int]:
    lcm = math.lcm(*(c.denominator for c in p.coeffs)) if p.coeffs else 1
    return [int(c * lcm) for c in p.coeffs]


def _ratio(g, base, s, k):
    """a_c2 / a_c1 forced by square ``s``, or None if it does not pin it down."""
    (c1, e1), (c2, e2) = [(i.circle, i.sign) for i in s.incidences]
    block = restriction_rows(s.weight.vector, k)
    r1 = [sum(a * b for a, b in zip(row, base[c1].coeffs)) for row in block]
    r2 = [sum(a * b for a, b in zip(row, base[c2].coeffs)) for row in block]
    # e1 * a1 * r1 + e2 * a2 * r2 == 0
    for x, y in zip(r1, r2):
        if y:
            ratio = Fraction(-e1) * x / (e2 * y)
            ok = all(e1 * u + e2 * ratio * v == 0 for u, v in zip(r1, r2))
            return ratio if ok else Fraction(0)
    return None


def _witness_chain(g: OddGkmGraph, base, k) -> list:
    """Squares of a spanning tree plus the first square inconsistent with it."""
    values = {}
    parent = {}
    for root in g.circles:
        if root in values:
            continue
        values[root] = Fraction(1)
        queue = deque([root])
        while queue:
            c = queue.popleft()
            for s in g.squares_at(c):
                if not s.grounded:
                    continue
                other = s.circles[1] if s.circles[0] == c else s.circles[0]
                ratio = _ratio(g, base, s, k)
                if ratio is None:
                    continue
                if s.circles[0] != c:
                    ratio = 1 / ratio if ratio else Fraction(0)
                val = values[c] * ratio
                if other not in values:
                    values[other] = val
                    parent[other] = (c, s.id)
                    queue.append(other)
                elif values[other] != val or val == 0:
                    return _path(parent, c) + [s.id] + list(reversed(_path(parent, other)))
    return []


def _path(parent, c) -> list:
    out = []
    while c in parent:
        c, sid = parent[c]
        out.append(sid)
    return list(reversed(out))


# -- splitting ---------------------------------------------------------------

@dataclass
class SplitRow:
    degree: int
    dim_odd: int
    dim_reduced: int | None
    expected: int | None
    check: str
    ok: bool

    def to_json(self) -> dict:
        return {"degree": self.degree, "dim": self.dim_odd, "dim_reduced": self.dim_reduced,
                "expected": self.expected, "check": self.check, "ok": self.ok}


@dataclass
class SplittingReport:
    k: int
    cutoff: int
    rows: list
    omega: OmegaClass | Obstruction
    constraints_identical: bool
    odd_generator_dim: int
    betti: BettiVector
    reduced_betti: BettiVector
    betti_corollary: bool
    reduced_orientable: bool
    verdict: bool

    def __bool__(self) -> bool:
        return self.verdict

    def failures(self) -> list:
        return [r for r in self.rows if not r.ok]

    def to_json(self) -> dict:
        return {"k": self.k, "cutoff": self.cutoff,
                "rows": [r.to_json() for r in self.rows],
                "omega": self.omega.to_json(),
                "omega_found": isinstance(self.omega, OmegaClass),
                "constraints_identical": self.constraints_identical,
                "odd_generator_dim": self.odd_generator_dim,
                "betti": list(self.betti.values),
                "reduced_betti": list(self.reduced_betti.values),
                "betti_corollary": self.betti_corollary,
                "reduced_orientable": self.reduced_orientable,
                "verdict": self.verdict}


def _same_constraints(g: OddGkmGraph, gamma: EvenGkmGraph) -> bool:
    """The even part of ``g`` and ``gamma`` impose literally the same relations."""
    def key(rels):
        return sorted((tuple(sorted(i for i, _ in r.terms)), r.weight) for r in rels)
    return nodes(g) == nodes(gamma) and key(relations(g, "P")) == key(relations(gamma, "even"))


def omega_images(g: OddGkmGraph, omega: OmegaClass, m_even: int) -> list[list[int]]:
    """Ambient vectors of ``b * omega`` for each basis vector b of H^m_even."""
    lower = graded_piece(g, m_even)
    d = lower.poly_degree
    n_lo = lower.block_size
    lcm = math.lcm(*(x.denominator for x in omega.coefficients.values()))
    # sparse multiplication tables: per circle, source index -> [(target, coeff)]
    tables = []
    n_hi = 0
    for c in nodes(g):
        mat = multiplication_matrix(omega.polys[c], d)
        n_hi = len(mat)
        table = [[] for _ in range(n_lo)]
        for i, row in enumerate(mat):
            for j, x in enumerate(row):
                if x:
                    table[j].append((i, int(x * lcm)))
        tables.append(table)
    out = []
    for vec in lower.kernel.basis:
        new = [0] * (n_hi * len(tables))
        for b, table in enumerate(tables):
            off_lo, off_hi = b * n_lo, b * n_hi
            for j in range(n_lo):
                x = vec[off_lo + j]
                if x:
                    for i, c in table[j]:
                        new[off_hi + i] += c * x
        out.append(new)
    return out


def splitting_check(g: OddGkmGraph, cutoff: int | None = None) -> SplittingReport:
    """Degreewise certificate for ``H_T(g) = H_T(reduced) (x) H(S^(2k+1))``."""
    red = reduce_odd_to_even(g)
    gamma, k = red.graph, red.k
    top = top_degree(g)
    cutoff = 2 * top if cutoff is None else cutoff
    omega = find_omega(g)
    rows = []
    for m in range(cutoff + 1):
        dim = graded_piece(g, m).dim
        if m % 2 == 0:
            other = graded_piece(gamma, m).dim
            rows.append(SplitRow(m, dim, other, other, "even part", dim == other))
            continue
        l = (m - 1) // 2
        if l < k:
            rows.append(SplitRow(m, dim, None, 0, "odd vanishing", dim == 0))
            continue
        shifted = m - (2 * k + 1)
        expected = graded_piece(g, shifted).dim
        rows.append(SplitRow(m, dim, None, expected, "odd shift", dim == expected))
        if isinstance(omega, OmegaClass):
            images = omega_images(g, omega, shifted)
            rank = _row_rank(_coordinate_rows(graded_piece(g, m), images), dim) if images else 0
            rows.append(SplitRow(m, rank, None, expected, "omega injective", rank == expected))
    betti = ordinary_betti(g)
    reduced_betti = ordinary_betti(gamma)
    predicted = convolve(reduced_betti.values, sphere_betti(2 * k + 1))
    corollary = predicted == betti.values
    split_ok, quotient = polynomial_split_check(betti.values, k)
    corollary = corollary and split_ok and quotient == reduced_betti.values[:len(quotient)] \
        and not any(reduced_betti.values[len(quotient):])
    generator_dim = graded_piece(g, 2 * k + 1).dim
    same = _same_constraints(g, gamma)
    verdict = (same and isinstance(omega, OmegaClass) and all(r.ok for r in rows)
               and corollary and generator_dim == 1)
    return SplittingReport(k, cutoff, rows, omega, same, generator_dim, betti, reduced_betti,
                           corollary, orientability_check(gamma), verdict)
