"""Independent reference computations used to cross-check the library.

Nothing here imports the linear algebra or constraint builders under test:
ranks come from textbook Fraction elimination, divisibility from sympy
polynomial division after a change of coordinates, and Betti numbers of
products from plain convolution.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

import sympy


def fraction_rank(rows) -> int:
    """Rank by Gauss-Jordan elimination over Fractions."""
    mat = [[Fraction(x) for x in row] for row in rows]
    if not mat:
        return 0
    ncols = len(mat[0])
    rank = 0
    for col in range(ncols):
        pivot = next((i for i in range(rank, len(mat)) if mat[i][col] != 0), None)
        if pivot is None:
            continue
        mat[rank], mat[pivot] = mat[pivot], mat[rank]
        p = mat[rank][col]
        mat[rank] = [x / p for x in mat[rank]]
        for i in range(len(mat)):
            if i != rank and mat[i][col] != 0:
                f = mat[i][col]
                mat[i] = [a - f * b for a, b in zip(mat[i], mat[rank])]
        rank += 1
    return rank


def monomials(rank: int, degree: int):
    """All exponent tuples, in no particular order (the oracle does not care)."""
    return [e for e in itertools.product(range(degree + 1), repeat=rank) if sum(e) == degree]


def divisibility_rows_by_division(rank: int, degree: int, alpha) -> list[list[Fraction]]:
    """Constraint rows for 'alpha divides g', via sympy division.

    Change coordinates so that the linear form alpha becomes the variable
    ``y``, divide the generic polynomial by ``y`` and require the remainder
    to vanish.  Columns are indexed by :func:`monomials`.
    """
    xs = sympy.symbols(f"x1:{rank + 1}")
    y = sympy.Symbol("y")
    alpha = [sympy.Rational(str(Fraction(a))) for a in alpha]
    p = next(i for i, a in enumerate(alpha) if a != 0)
    # x_p expressed through y = <alpha, x> and the remaining x_j
    x_p = (y - sum(alpha[j] * xs[j] for j in range(rank) if j != p)) / alpha[p]
    monos = monomials(rank, degree)
    cs = sympy.symbols(f"c0:{len(monos)}")
    generic = sum(c * sympy.prod([xs[i] ** e[i] for i in range(rank)]) for c, e in zip(cs, monos))
    moved = sympy.expand(generic.subs(xs[p], x_p))
    gens = [y] + [xs[j] for j in range(rank) if j != p]
    _, remainder = sympy.div(sympy.Poly(moved, *gens), sympy.Poly(y, *gens))
    rows = []
    for coeff in remainder.coeffs():
        row = [Fraction(str(sympy.Rational(coeff.coeff(c)))) for c in cs]
        rows.append(row)
    return rows


def divisible_subspace_dim(rank: int, degree: int, alpha) -> int:
    rows = divisibility_rows_by_division(rank, degree, alpha)
    return len(monomials(rank, degree)) - fraction_rank(rows)


def graded_dim_by_division(g, m: int) -> int:
    """dim H^m_T of an even or odd graph from first principles.

    Unknowns are one generic polynomial per vertex/circle; each relation
    contributes the remainder-vanishing conditions of its combination.
    """
    from oddgkm.graphs import EvenGkmGraph

    r = g.torus_rank
    even = isinstance(g, EvenGkmGraph)
    if even and m % 2:
        return 0
    d = m // 2
    names = list(g.vertices if even else g.circles)
    monos = monomials(r, d)
    n = len(monos)
    relations = []  # (list of (index, coeff), weight)
    if even:
        for e in g.edges:
            relations.append(([(names.index(e.source), 1), (names.index(e.target), -1)], e.weight))
    elif m % 2 == 0:
        for s in g.squares:
            cs = s.circles
            for c in cs[1:]:
                relations.append(([(names.index(cs[0]), 1), (names.index(c), -1)],
                                  s.weight.vector))
    else:
        for s in g.squares:
            relations.append(([(names.index(i.circle), i.sign) for i in s.incidences],
                              s.weight.vector))
    rows = []
    for terms, weight in relations:
        block = divisibility_rows_by_division(r, d, weight)
        for brow in block:
            row = [Fraction(0)] * (n * len(names))
            for idx, coeff in terms:
                for j, x in enumerate(brow):
                    row[idx * n + j] += coeff * x
            rows.append(row)
    total = n * len(names)
    return total - fraction_rank(rows) if rows else total


def kunneth(*factors) -> tuple[int, ...]:
    """Betti numbers of a product: convolution of the factors' Betti vectors."""
    out = [1]
    for f in factors:
        new = [0] * (len(out) + len(f) - 1)
        for i, a in enumerate(out):
            for j, b in enumerate(f):
                new[i + j] += a * b
        out = new
    return tuple(out)


S1 = (1, 1)
S2 = (1, 0, 1)
S3 = (1, 0, 0, 1)
S4 = (1, 0, 0, 0, 1)
CP2 = (1, 0, 1, 0, 1)


def sphere(n: int) -> tuple[int, ...]:
    return (1,) + (0,) * (n - 1) + (1,)


def invariant_betti_of_signed_permutation(generators, top: int) -> tuple[int, ...]:
    """Invariant Betti numbers of a product of spheres under a signed permutation.

    ``generators`` lists ``(degree, image_index, sign)``: the fundamental
    class of each sphere factor is sent to ``sign`` times another one of
    the same degree.  The cohomology basis consists of products of distinct
    generators; the induced action permutes this basis up to sign (with the
    Koszul sign for reordering odd classes), and each cycle of basis elements
    contributes one invariant iff its signs multiply to +1.
    """
    n = len(generators)

    def image(mono):
        imgs = [generators[i][1] for i in mono]
        sign = 1
        for i in mono:
            sign *= generators[i][2]
        # sort the images, tracking transpositions of odd-degree classes
        imgs = list(imgs)
        for a in range(len(imgs)):
            for b in range(len(imgs) - 1 - a):
                if imgs[b] > imgs[b + 1]:
                    if generators[imgs[b]][0] % 2 and generators[imgs[b + 1]][0] % 2:
                        sign = -sign
                    imgs[b], imgs[b + 1] = imgs[b + 1], imgs[b]
        return tuple(imgs), sign

    out = [0] * (top + 1)
    seen = set()
    for size in range(n + 1):
        for mono in itertools.combinations(range(n), size):
            if mono in seen:
                continue
            total, cur = 1, mono
            while True:
                seen.add(cur)
                cur, sign = image(cur)
                total *= sign
                if cur == mono:
                    break
            deg = sum(generators[i][0] for i in mono)
            if total == 1 and deg <= top:
                out[deg] += 1
    return tuple(out)
