"""Equivariant and ordinary cohomology of even and odd GKM graphs.

Everything is computed one cohomological degree at a time.  A degree-``m``
piece of the equivariant cohomology is the kernel of a stacked system of
divisibility constraints on tuples of homogeneous polynomials (one per
vertex or circle):

* even graph, ``m = 2d``: ``alpha(e) | f_i(e) - f_t(e)`` for every edge;
* odd graph, ``m = 2d``: ``P_c == P_c'  mod alpha(s)`` for circles of a square;
* odd graph, ``m = 2d + 1``: ``sum_c eps_c Q_c == 0  mod alpha(s)`` per square.

Ordinary Betti numbers are the dimensions of the quotient by the span of
``x_i * H^(m-2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Mapping, Sequence

from flint import fmpq, fmpq_mat

from .exactalg import (
    HomogeneousPoly,
    Kernel,
    _basis,
    is_divisible,
    kernel,
    poly_space_dim,
    restriction_rows,
)
from .graphs import EvenGkmGraph, GkmGraph, OddGkmGraph, ProjectiveWeight


# -- constraint systems ------------------------------------------------------

@dataclass(frozen=True)
class Relation:
    """``sum coeff * block == 0  mod weight`` over the listed blocks."""

    terms: tuple[tuple[int, int], ...]
    weight: tuple[int, ...]
    source: str


def nodes(g: GkmGraph) -> tuple[str, ...]:
    return g.vertices if isinstance(g, EvenGkmGraph) else g.circles


def top_degree(g: GkmGraph) -> int:
    """2n for an n-valent even graph, 2n+1 for an odd graph with n-valent circles."""
    vals = list(g.valences.values())
    n = max(vals) if vals else 0
    return 2 * n if isinstance(g, EvenGkmGraph) else 2 * n + 1


def part_of(g: GkmGraph, m: int) -> str:
    if isinstance(g, EvenGkmGraph):
        return "even" if m % 2 == 0 else "zero"
    return "P" if m % 2 == 0 else "Q"


@lru_cache(maxsize=None)
def relations(g: GkmGraph, part: str) -> tuple[Relation, ...]:
    index = {v: i for i, v in enumerate(nodes(g))}
    out = []
    if part == "even":
        for e in g.edges:
            w = ProjectiveWeight.of(e.weight).vector
            out.append(Relation(((index[e.source], 1), (index[e.target], -1)), w, e.id))
    elif part == "P":
        for s in g.squares:
            first = s.circles[0] if s.circles else None
            for c in s.circles[1:]:
                out.append(Relation(((index[first], 1), (index[c], -1)), s.weight.vector, s.id))
    elif part == "Q":
        for s in g.squares:
            if s.incidences:
                out.append(Relation(tuple((index[i.circle], i.sign) for i in s.incidences),
                                    s.weight.vector, s.id))
    return tuple(out)


def constraint_rows(g: GkmGraph, m: int) -> tuple[list[list[int]], int]:
    """Integer constraint matrix for the degree-``m`` piece and its column count."""
    part = part_of(g, m)
    d = m // 2
    if part == "zero" or d < 0:
        return [], 0
    size = poly_space_dim(g.torus_rank, d)
    ncols = size * len(nodes(g))
    rows = []
    for rel in relations(g, part):
        block = restriction_rows(rel.weight, d)
        for brow in block:
            row = [0] * ncols
            for idx, coeff in rel.terms:
                off = idx * size
                for j, x in enumerate(brow):
                    if x:
                        row[off + j] += coeff * x
            rows.append(row)
    return rows, ncols


# -- graded pieces -----------------------------------------------------------

@dataclass(frozen=True)
class GradedPiece:
    graph: GkmGraph = field(repr=False)
    degree: int
    poly_degree: int
    part: str
    block_size: int
    kernel: Kernel = field(repr=False)

    @property
    def dim(self) -> int:
        return self.kernel.nullity

    @property
    def ncols(self) -> int:
        return self.kernel.ncols

    def polys(self, vec: Sequence) -> tuple[HomogeneousPoly, ...]:
        r, d, n = self.graph.torus_rank, self.poly_degree, self.block_size
        return tuple(
            HomogeneousPoly(r, d, tuple(Fraction(x) for x in vec[i * n:(i + 1) * n]))
            for i in range(len(nodes(self.graph)))
        )

    def classes(self) -> list["GradedClass"]:
        out = []
        for vec, s in zip(self.kernel.basis, self.kernel.scale):
            polys = tuple(p.scale(Fraction(1, s)) for p in self.polys(vec))
            out.append(GradedClass(self.graph, self.degree, polys, check=False))
        return out


@lru_cache(maxsize=None)
def graded_piece(g: GkmGraph, m: int) -> GradedPiece:
    part = part_of(g, m)
    d = m // 2
    if part == "zero" or m < 0:
        return GradedPiece(g, m, d, part, 0, kernel([], 0))
    rows, ncols = constraint_rows(g, m)
    return GradedPiece(g, m, d, part, poly_space_dim(g.torus_rank, d), kernel(rows, ncols))


@dataclass(frozen=True)
class GradedClass:
    """A homogeneous equivariant class: one polynomial per vertex or circle.

    For odd graphs an even degree means the ``P`` part and an odd degree the
    ``Q`` part (the coefficient of theta).
    """

    graph: GkmGraph = field(repr=False)
    degree: int
    polys: tuple[HomogeneousPoly, ...]
    check: bool = field(default=True, compare=False, repr=False)

    def __post_init__(self):
        if not self.check:
            return
        g, m = self.graph, self.degree
        if len(self.polys) != len(nodes(g)):
            raise ValueError("need one polynomial per vertex/circle")
        part = part_of(g, m)
        if part == "zero":
            if any(not p.is_zero() for p in self.polys):
                raise ValueError("even graphs have no odd-degree classes")
            return
        for p in self.polys:
            if p.degree != m // 2 or p.rank != g.torus_rank:
                raise ValueError(f"polynomials must have degree {m // 2} in {g.torus_rank} vars")
        for rel in relations(g, part):
            total = HomogeneousPoly.zero(g.torus_rank, m // 2)
            for idx, coeff in rel.terms:
                total = total + self.polys[idx].scale(coeff)
            if not is_divisible(total, rel.weight):
                raise ValueError(f"relation at {rel.source} fails")

    @property
    def parity(self) -> str:
        return part_of(self.graph, self.degree)

    def as_dict(self) -> dict:
        return dict(zip(nodes(self.graph), self.polys))


def equivariant_graded_dim(g: GkmGraph, m: int):
    """``(dim H^m_T, basis)`` with the basis as a list of GradedClass."""
    piece = graded_piece(g, m)
    return piece.dim, piece.classes()


# -- module structure --------------------------------------------------------

@lru_cache(maxsize=None)
def _shift_table(rank: int, degree: int, var: int) -> tuple[int, ...]:
    src, dst = _basis(rank, degree), _basis(rank, degree + 1)
    return tuple(dst.index[m[:var] + (m[var] + 1,) + m[var + 1:]] for m in src.monomials)


def times_variables(g: GkmGraph, lower: GradedPiece) -> list[list[int]]:
    """Ambient vectors ``x_i * b`` for every basis vector ``b`` of ``lower``."""
    r = g.torus_rank
    d = lower.poly_degree
    n_lo, n_hi = lower.block_size, poly_space_dim(r, d + 1)
    k = len(nodes(g))
    out = []
    for vec in lower.kernel.basis:
        for var in range(r):
            table = _shift_table(r, d, var)
            new = [0] * (k * n_hi)
            for b in range(k):
                for j in range(n_lo):
                    x = vec[b * n_lo + j]
                    if x:
                        new[b * n_hi + table[j]] = x
            out.append(new)
    return out


def _coordinate_rows(piece: GradedPiece, vectors: Sequence[Sequence]) -> list[list[int]]:
    # the free entries determine a kernel vector; column scaling keeps rank
    return [[v[f] for f in piece.kernel.free] for v in vectors]


def _row_rank(rows: Sequence[Sequence], ncols: int) -> int:
    if not rows or ncols == 0:
        return 0
    return kernel([list(r) for r in rows], ncols).rank


@lru_cache(maxsize=None)
def decomposable_rank(g: GkmGraph, m: int) -> int:
    """dim of ``S^+ . H_T`` inside ``H^m_T``."""
    lower = graded_piece(g, m - 2)
    upper = graded_piece(g, m)
    if lower.dim == 0 or upper.dim == 0:
        return 0
    products = times_variables(g, lower)
    return _row_rank(_coordinate_rows(upper, products), upper.dim)


def ordinary_dim(g: GkmGraph, m: int) -> int:
    return graded_piece(g, m).dim - decomposable_rank(g, m)


@dataclass(frozen=True)
class BettiVector:
    values: tuple[int, ...]
    beyond: tuple[int, ...] = ()

    @property
    def top(self) -> int:
        return len(self.values) - 1

    @property
    def total(self) -> int:
        return sum(self.values)

    def __getitem__(self, i):
        return self.values[i]

    def __len__(self) -> int:
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    def __eq__(self, other):
        if isinstance(other, BettiVector):
            return self.values == other.values
        return self.values == tuple(other)

    def __hash__(self):
        return hash(self.values)

    def __str__(self) -> str:
        return "(" + ",".join(str(b) for b in self.values) + ")"


def ordinary_betti(g: GkmGraph, extra: int = 4) -> BettiVector:
    """Betti numbers b_0..b_top; ``beyond`` holds b_(top+1)..b_(top+extra)."""
    top = top_degree(g)
    values = tuple(ordinary_dim(g, m) for m in range(top + 1))
    beyond = tuple(ordinary_dim(g, m) for m in range(top + 1, top + extra + 1))
    return BettiVector(values, beyond)


# -- diagnostics -------------------------------------------------------------

def free_module_dims(betti: Sequence[int], rank: int, m: int) -> int:
    """dim in degree m of a free module with generators counted by ``betti``."""
    total = 0
    for j, b in enumerate(betti):
        if b and (m - j) >= 0 and (m - j) % 2 == 0:
            total += b * poly_space_dim(rank, (m - j) // 2)
    return total


@dataclass
class FormalityReport:
    formal: bool
    total_betti: int
    expected_total: int
    mismatches: dict = field(default_factory=dict)  # m -> (dim, predicted)
    cutoff: int = 0

    def __bool__(self) -> bool:
        return self.formal

    def to_json(self) -> dict:
        return {"formal": self.formal, "total_betti": self.total_betti,
                "expected_total": self.expected_total, "cutoff": self.cutoff,
                "freeness_mismatches": {str(m): list(v) for m, v in self.mismatches.items()}}


def formality_check(g: GkmGraph, cutoff: int | None = None) -> FormalityReport:
    """Total Betti number versus the fixed-set count, plus Hilbert-series freeness."""
    betti = ordinary_betti(g)
    top = top_degree(g)
    cutoff = 2 * top if cutoff is None else cutoff
    expected = len(g.vertices) if isinstance(g, EvenGkmGraph) else 2 * len(g.circles)
    mismatches = {}
    for m in range(cutoff + 1):
        actual = graded_piece(g, m).dim
        predicted = free_module_dims(betti.values, g.torus_rank, m)
        if actual != predicted:
            mismatches[m] = (actual, predicted)
    formal = betti.total == expected and not mismatches and not any(betti.beyond)
    return FormalityReport(formal, betti.total, expected, mismatches, cutoff)


def orientability_check(g: EvenGkmGraph) -> bool:
    """An n-valent graph is orientable iff its degree-2n cohomology is nonzero."""
    if not isinstance(g, EvenGkmGraph):
        raise TypeError("orientability is defined for even graphs")
    n = g.uniform_valence
    if n is None:
        raise ValueError("graph does not have uniform valence")
    return ordinary_dim(g, 2 * n) >= 1


def poincare_duality(betti: Sequence[int]) -> bool:
    b = list(betti)
    return b == b[::-1]


def polynomial_split_check(betti: Sequence[int], k: int):
    """Divide the Poincare polynomial by ``1 + t^(2k+1)``.

    Returns ``(ok, quotient)``.  ``ok`` needs an exact division with a
    non-negative quotient supported in even degrees.
    """
    b = list(betti)
    while len(b) > 1 and b[-1] == 0:
        b.pop()
    step = 2 * k + 1
    top = len(b) - 1
    qlen = top - step + 1
    if qlen <= 0:
        return False, None
    q = []
    for i in range(qlen):
        q.append(b[i] - (q[i - step] if i >= step else 0))
    remainder = [b[i] - (q[i - step] if 0 <= i - step < qlen else 0) for i in range(qlen, top + 1)]
    if any(remainder):
        return False, None
    quotient = tuple(q)
    ok = all(x >= 0 for x in quotient) and all(x == 0 for x in quotient[1::2])
    return ok, quotient


def convolve(a: Sequence[int], b: Sequence[int]) -> tuple[int, ...]:
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return tuple(out)


def sphere_betti(dim: int) -> tuple[int, ...]:
    return (1,) + (0,) * (dim - 1) + (1,) if dim > 0 else (2,)


@dataclass
class CohomologyReport:
    equivariant_dims: dict
    betti: BettiVector
    formal: bool
    orientable: bool | None

    def to_json(self) -> dict:
        return {"equivariant_dims": {str(m): d for m, d in self.equivariant_dims.items()},
                "betti": list(self.betti.values),
                "formal": self.formal,
                "orientable": self.orientable}


def cohomology_report(g: GkmGraph, cutoff: int | None = None) -> CohomologyReport:
    top = top_degree(g)
    cutoff = top + 4 if cutoff is None else cutoff
    dims = {m: graded_piece(g, m).dim for m in range(cutoff + 1)}
    orientable = orientability_check(g) if isinstance(g, EvenGkmGraph) else None
    return CohomologyReport(dims, ordinary_betti(g), formality_check(g, cutoff).formal, orientable)


# -- automorphisms -----------------------------------------------------------

class AutomorphismError(ValueError):
    pass


@dataclass
class Automorphism:
    """A finite-order symmetry of a graph acting on equivariant classes.

    ``node_map`` permutes vertices/circles, ``part_map`` edges/squares,
    ``theta_signs`` gives the sign picked up by theta at each (target)
    circle, and ``linear`` is an r x r matrix acting on weights
    (``alpha -> linear @ alpha``); None means the identity.
    """

    node_map: Mapping[str, str]
    part_map: Mapping[str, str]
    theta_signs: Mapping[str, int] = field(default_factory=dict)
    linear: Sequence[Sequence] | None = None

    def matrix(self, r: int) -> list[list[Fraction]]:
        if self.linear is None:
            return [[Fraction(int(i == j)) for j in range(r)] for i in range(r)]
        mat = [[Fraction(x) for x in row] for row in self.linear]
        if len(mat) != r or any(len(row) != r for row in mat):
            raise AutomorphismError(f"linear action must be {r} x {r}")
        return mat

    def eta(self, circle: str) -> int:
        return int(self.theta_signs.get(circle, 1))


def _apply_matrix(mat, vec):
    return tuple(sum((a * Fraction(b) for a, b in zip(row, vec)), Fraction(0)) for row in mat)


def check_automorphism(g: GkmGraph, sigma: Automorphism) -> int:
    """Validate ``sigma`` against ``g`` and return its order."""
    r = g.torus_rank
    mat = sigma.matrix(r)
    names = set(nodes(g))
    if set(sigma.node_map) != names or set(sigma.node_map.values()) != names:
        raise AutomorphismError("node map is not a permutation of the vertices/circles")
    if isinstance(g, EvenGkmGraph):
        parts = {e.id: e for e in g.edges}
    else:
        parts = g.square_map
    if set(sigma.part_map) != set(parts) or set(sigma.part_map.values()) != set(parts):
        raise AutomorphismError("part map is not a permutation of the edges/squares")
    for c, eta in sigma.theta_signs.items():
        if c not in names or eta not in (1, -1):
            raise AutomorphismError(f"bad theta sign at {c!r}")
    for pid, item in parts.items():
        image = parts[sigma.part_map[pid]]
        if isinstance(g, EvenGkmGraph):
            ends = {sigma.node_map[item.source], sigma.node_map[item.target]}
            if ends != {image.source, image.target}:
                raise AutomorphismError(f"edge {pid} is not mapped onto an edge with matching ends")
            w, w_img = item.weight, image.weight
        else:
            if {sigma.node_map[c] for c in item.circles} != set(image.circles):
                raise AutomorphismError(f"square {pid} is not mapped onto matching circles")
            w, w_img = item.weight.vector, image.weight.vector
            signs = [image.sign_at(sigma.node_map[c]) * sigma.eta(sigma.node_map[c])
                     for c in item.circles]
            own = [item.sign_at(c) for c in item.circles]
            if signs != own and signs != [-x for x in own]:
                raise AutomorphismError(f"square {pid}: incidence signs are not preserved")
        if ProjectiveWeight.of(_apply_matrix(mat, w)) != ProjectiveWeight.of(w_img):
            raise AutomorphismError(f"{pid}: weight is not compatible with the linear action")
    # order of the combined action
    node = dict(sigma.node_map)
    part = dict(sigma.part_map)
    eta = {c: sigma.eta(c) for c in names}
    power = [row[:] for row in mat]
    ident = [[Fraction(int(i == j)) for j in range(r)] for i in range(r)]
    for order in range(1, 1001):
        if (all(node[c] == c for c in names) and all(part[p] == p for p in parts)
                and all(eta[c] == 1 for c in names) and power == ident):
            return order
        # compose with sigma once more
        node = {c: sigma.node_map[node[c]] for c in names}
        part = {p: sigma.part_map[part[p]] for p in parts}
        eta = {c: eta_c for c, eta_c in
               ((sigma.node_map[c0], sigma.eta(sigma.node_map[c0]) * e0) for c0, e0 in
                ((c, eta[c]) for c in names))}
        power = [[sum((mat[i][t] * power[t][j] for t in range(r)), Fraction(0))
                  for j in range(r)] for i in range(r)]
    raise AutomorphismError("automorphism does not have finite order")


@lru_cache(maxsize=None)
def _substitution_matrix(rank: int, degree: int, linear: tuple) -> tuple:
    """Matrix of the algebra map sending x_i to the linear form with vector column i."""
    images = [HomogeneousPoly.linear_form([linear[row][i] for row in range(rank)])
              for i in range(rank)]
    basis = _basis(rank, degree)
    cols = []
    for mono in basis.monomials:
        p = HomogeneousPoly.from_terms(rank, degree, {mono: 1}).substitute(images)
        cols.append(p.coeffs)
    return tuple(tuple(cols[j][i] for j in range(basis.size)) for i in range(basis.size))


def act(g: GkmGraph, sigma: Automorphism, piece: GradedPiece, vec: Sequence) -> list[Fraction]:
    """Image of an ambient vector of ``piece`` under ``sigma``."""
    r = g.torus_rank
    names = nodes(g)
    index = {c: i for i, c in enumerate(names)}
    n = piece.block_size
    sub = None
    if sigma.linear is not None:
        sub = _substitution_matrix(r, piece.poly_degree,
                                   tuple(tuple(row) for row in sigma.matrix(r)))
    out = [Fraction(0)] * len(vec)
    for c in names:
        src = index[c]
        tgt_name = sigma.node_map[c]
        tgt = index[tgt_name]
        block = vec[src * n:(src + 1) * n]
        if sub is not None:
            block = [sum((a * b for a, b in zip(row, block)), Fraction(0)) for row in sub]
        sign = sigma.eta(tgt_name) if piece.part == "Q" else 1
        for j, x in enumerate(block):
            out[tgt * n + j] = sign * Fraction(x)
    return out


def _qmat(columns: Sequence[Sequence[Fraction]], nrows: int) -> fmpq_mat:
    """fmpq matrix whose columns are the given Fraction vectors."""
    entries = []
    for i in range(nrows):
        for col in columns:
            x = Fraction(col[i])
            entries.append(fmpq(x.numerator, x.denominator))
    return fmpq_mat(nrows, len(columns), entries)


def _invariant_quotient_dim(g: GkmGraph, sigma: Automorphism, order: int, m: int) -> int:
    piece = graded_piece(g, m)
    if piece.dim == 0:
        return 0
    k = piece.kernel
    dim = piece.dim
    t = _qmat([k.coordinates(act(g, sigma, piece, vec)) for vec in k.basis], dim)
    # the projector up to the harmless factor 1/order
    proj = fmpq_mat(dim, dim, [int(i == j) for i in range(dim) for j in range(dim)])
    power = proj
    for _ in range(order - 1):
        power = t * power
        proj = proj + power
    invariant = proj.rank()
    lower = graded_piece(g, m - 2)
    if lower.dim == 0:
        return invariant
    products = _qmat([k.coordinates(v) for v in times_variables(g, lower)], dim)
    return invariant - (proj * products).rank()


def automorphism_invariant_betti(g: GkmGraph, sigma: Automorphism, extra: int = 4) -> BettiVector:
    """Betti numbers of the invariant part of the graph cohomology.

    Uses the averaging projector over the cyclic group generated by
    ``sigma`` on every graded piece; the invariant ordinary cohomology is the
    invariant equivariant cohomology modulo the invariant decomposables.
    """
    order = check_automorphism(g, sigma)
    top = top_degree(g)
    values = tuple(_invariant_quotient_dim(g, sigma, order, m) for m in range(top + 1))
    beyond = tuple(_invariant_quotient_dim(g, sigma, order, m)
                   for m in range(top + 1, top + extra + 1))
    return BettiVector(values, beyond)
