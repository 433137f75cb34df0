"""Exact rational linear algebra and homogeneous polynomials.

Polynomials live in one degree at a time and are stored as coefficient
vectors against a fixed graded-lexicographic monomial basis.  Every
graded dimension computed elsewhere in the package is the nullity of a
stacked system built from :func:`divisibility_constraints`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

from flint import fmpq, fmpz_mat, nmod_mat

Rational = Fraction
QVector = tuple  # tuple[Fraction, ...]

# 62-bit primes used for pivot detection; a prime is "unlucky" only if it
# divides a maximal minor, which the exact kernel check catches.
_PRIMES = (
    4611686018427387847,
    4611686018427387817,
    4611686018427387787,
    4611686018427387733,
    4611686018427387709,
    4611686018427387631,
)


class ExactAlgebraError(ValueError):
    pass


# -- rationals ---------------------------------------------------------------

def to_rational(value) -> Fraction:
    """Parse an int, Fraction or ``"p/q"`` string into a reduced Fraction."""
    if isinstance(value, bool):
        raise ExactAlgebraError(f"not a rational: {value!r}")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, fmpq):
        return Fraction(int(value.p), int(value.q))
    if isinstance(value, str):
        text = value.strip()
        try:
            if "/" in text:
                num, den = text.split("/")
                return Fraction(int(num), int(den))
            return Fraction(int(text))
        except (ValueError, ZeroDivisionError) as exc:
            raise ExactAlgebraError(f"not a rational: {value!r}") from exc
    raise ExactAlgebraError(f"not a rational: {value!r}")


def format_rational(q: Fraction) -> int | str:
    """JSON form: integers stay integers, everything else becomes ``"p/q"``."""
    q = Fraction(q)
    if q.denominator == 1:
        return q.numerator
    return f"{q.numerator}/{q.denominator}"


def qvector(values: Iterable) -> tuple[Fraction, ...]:
    return tuple(to_rational(v) for v in values)


def primitive_integer_vector(vec: Sequence) -> tuple[int, ...]:
    """Scale a nonzero rational vector to coprime integers, keeping its sign."""
    vec = [Fraction(v) for v in vec]
    if not any(vec):
        raise ExactAlgebraError("zero weight")
    lcm = math.lcm(*(v.denominator for v in vec))
    ints = [int(v * lcm) for v in vec]
    g = math.gcd(*ints)
    return tuple(i // g for i in ints)


# -- monomials ---------------------------------------------------------------

@dataclass(frozen=True)
class MonomialBasis:
    rank: int
    degree: int
    monomials: tuple[tuple[int, ...], ...]
    index: dict = field(compare=False, repr=False, hash=False)

    @property
    def size(self) -> int:
        return len(self.monomials)

    def __len__(self) -> int:
        return len(self.monomials)

    def __iter__(self):
        return iter(self.monomials)


def _compositions(rank: int, degree: int):
    # descending in the first exponent, then recursively: graded-lex order
    if rank == 0:
        if degree == 0:
            yield ()
        return
    if rank == 1:
        yield (degree,)
        return
    for first in range(degree, -1, -1):
        for rest in _compositions(rank - 1, degree - first):
            yield (first,) + rest


@lru_cache(maxsize=None)
def _basis(rank: int, degree: int) -> MonomialBasis:
    if degree < 0:
        monos: tuple = ()
    else:
        monos = tuple(_compositions(rank, degree))
    return MonomialBasis(rank, degree, monos, {m: i for i, m in enumerate(monos)})


def monomial_basis(rank: int, degree: int) -> MonomialBasis:
    """Exponent tuples of all degree-``degree`` monomials in ``rank`` variables.

    >>> monomial_basis(2, 2).monomials
    ((2, 0), (1, 1), (0, 2))
    """
    if rank < 1:
        raise ExactAlgebraError("rank must be at least 1")
    if degree < 0:
        raise ExactAlgebraError("degree must be non-negative")
    return _basis(rank, degree)


def poly_space_dim(rank: int, degree: int) -> int:
    """dim S^degree for ``rank`` generators; zero in negative degree."""
    if degree < 0:
        return 0
    if rank == 0:
        return 1 if degree == 0 else 0
    return math.comb(degree + rank - 1, rank - 1)


# -- polynomials -------------------------------------------------------------

@dataclass(frozen=True)
class HomogeneousPoly:
    rank: int
    degree: int
    coeffs: tuple[Fraction, ...]

    def __post_init__(self):
        expected = poly_space_dim(self.rank, self.degree)
        if len(self.coeffs) != expected:
            raise ExactAlgebraError(
                f"expected {expected} coefficients for rank {self.rank}, "
                f"degree {self.degree}; got {len(self.coeffs)}"
            )

    @classmethod
    def zero(cls, rank: int, degree: int) -> "HomogeneousPoly":
        return cls(rank, degree, (Fraction(0),) * poly_space_dim(rank, degree))

    @classmethod
    def from_terms(cls, rank: int, degree: int, terms: dict) -> "HomogeneousPoly":
        basis = _basis(rank, degree)
        coeffs = [Fraction(0)] * basis.size
        for mono, c in terms.items():
            mono = tuple(mono)
            if len(mono) != rank or sum(mono) != degree:
                raise ExactAlgebraError(f"monomial {mono} not in rank {rank}, degree {degree}")
            coeffs[basis.index[mono]] += Fraction(c)
        return cls(rank, degree, tuple(coeffs))

    @classmethod
    def linear_form(cls, vector: Sequence) -> "HomogeneousPoly":
        vec = qvector(vector)
        r = len(vec)
        terms = {tuple(int(i == j) for i in range(r)): v for j, v in enumerate(vec)}
        return cls.from_terms(r, 1, terms)

    @classmethod
    def constant(cls, rank: int, value=1) -> "HomogeneousPoly":
        return cls(rank, 0, (Fraction(value),))

    @property
    def basis(self) -> MonomialBasis:
        return _basis(self.rank, self.degree)

    def terms(self) -> dict:
        return {m: c for m, c in zip(self.basis.monomials, self.coeffs) if c}

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def _check_compatible(self, other: "HomogeneousPoly"):
        if self.rank != other.rank or self.degree != other.degree:
            raise ExactAlgebraError("rank or degree mismatch")

    def __add__(self, other: "HomogeneousPoly") -> "HomogeneousPoly":
        self._check_compatible(other)
        return HomogeneousPoly(self.rank, self.degree,
                               tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other: "HomogeneousPoly") -> "HomogeneousPoly":
        self._check_compatible(other)
        return HomogeneousPoly(self.rank, self.degree,
                               tuple(a - b for a, b in zip(self.coeffs, other.coeffs)))

    def __neg__(self) -> "HomogeneousPoly":
        return self.scale(-1)

    def scale(self, c) -> "HomogeneousPoly":
        c = Fraction(c)
        return HomogeneousPoly(self.rank, self.degree, tuple(c * a for a in self.coeffs))

    def __mul__(self, other):
        if isinstance(other, HomogeneousPoly):
            return poly_multiply(self, other)
        return self.scale(other)

    __rmul__ = scale

    def substitute(self, images: Sequence["HomogeneousPoly"]) -> "HomogeneousPoly":
        """Replace variable ``x_i`` by the linear form ``images[i]``."""
        if len(images) != self.rank:
            raise ExactAlgebraError("need one image per variable")
        target = images[0].rank
        out = HomogeneousPoly.zero(target, self.degree)
        for mono, c in self.terms().items():
            term = HomogeneousPoly.constant(target, c)
            for img, e in zip(images, mono):
                for _ in range(e):
                    term = poly_multiply(term, img)
            out = out + term
        return out

    def __str__(self) -> str:
        names = [f"x{i + 1}" for i in range(self.rank)]
        parts = []
        for mono, c in self.terms().items():
            factors = [n if e == 1 else f"{n}^{e}" for n, e in zip(names, mono) if e]
            parts.append(f"{c}*{'*'.join(factors)}" if factors else str(c))
        return " + ".join(parts) if parts else "0"


@lru_cache(maxsize=None)
def _product_table(rank: int, deg_a: int, deg_b: int) -> tuple:
    """(i, j) -> index of monomial_i * monomial_j in the product basis."""
    ba, bb, bc = _basis(rank, deg_a), _basis(rank, deg_b), _basis(rank, deg_a + deg_b)
    return tuple(
        tuple(bc.index[tuple(x + y for x, y in zip(ma, mb))] for mb in bb.monomials)
        for ma in ba.monomials
    )


def poly_multiply(a: HomogeneousPoly, b: HomogeneousPoly) -> HomogeneousPoly:
    if a.rank != b.rank:
        raise ExactAlgebraError(f"rank mismatch: {a.rank} vs {b.rank}")
    table = _product_table(a.rank, a.degree, b.degree)
    out = [Fraction(0)] * poly_space_dim(a.rank, a.degree + b.degree)
    for i, ca in enumerate(a.coeffs):
        if not ca:
            continue
        row = table[i]
        for j, cb in enumerate(b.coeffs):
            if cb:
                out[row[j]] += ca * cb
    return HomogeneousPoly(a.rank, a.degree + b.degree, tuple(out))


def multiplication_matrix(p: HomogeneousPoly, degree: int) -> list[list[Fraction]]:
    """Matrix of ``g -> p*g`` from degree ``degree`` to ``degree + p.degree``.

    Rows index the target basis, columns the source basis.
    """
    table = _product_table(p.rank, degree, p.degree)
    n_out = poly_space_dim(p.rank, degree + p.degree)
    n_in = poly_space_dim(p.rank, degree)
    mat = [[Fraction(0)] * n_in for _ in range(n_out)]
    for col in range(n_in):
        row = table[col]
        for j, c in enumerate(p.coeffs):
            if c:
                mat[row[j]][col] += c
    return mat


# -- divisibility ------------------------------------------------------------

def hyperplane_parametrization(alpha: Sequence) -> list[tuple[int, ...]]:
    """Integer basis of ``ker <alpha, .>``, pivoting on alpha's first nonzero entry."""
    a = primitive_integer_vector(alpha)
    r = len(a)
    p = next(i for i, v in enumerate(a) if v)
    vectors = []
    for j in range(r):
        if j == p:
            continue
        v = [0] * r
        v[j] = a[p]
        v[p] = -a[j]
        g = math.gcd(*v)
        vectors.append(tuple(x // g for x in v))
    return vectors


@lru_cache(maxsize=None)
def _restriction_matrix(alpha: tuple[int, ...], degree: int) -> tuple:
    r = len(alpha)
    params = hyperplane_parametrization(alpha)
    # x_i restricted to the hyperplane, as a linear form in r-1 parameters
    images = [
        HomogeneousPoly(r - 1, 1, tuple(Fraction(v[i]) for v in params)) if r > 1
        else None
        for i in range(r)
    ]
    src = _basis(r, degree)
    dst = _basis(r - 1, degree)
    if r == 1:
        # the hyperplane is the origin: only the constant term survives
        col = [1] if degree == 0 else []
        return tuple(tuple(col) for _ in range(dst.size)) if dst.size else ()
    powers: dict = {}

    def power(i, e):
        key = (i, e)
        if key not in powers:
            powers[key] = (HomogeneousPoly.constant(r - 1) if e == 0
                           else poly_multiply(power(i, e - 1), images[i]))
        return powers[key]

    columns = []
    for mono in src.monomials:
        term = HomogeneousPoly.constant(r - 1)
        for i, e in enumerate(mono):
            if e:
                term = poly_multiply(term, power(i, e))
        columns.append([int(c) for c in term.coeffs])
    return tuple(tuple(columns[j][i] for j in range(src.size)) for i in range(dst.size))


def divisibility_constraints(rank: int, degree: int, alpha: Sequence) -> list[list[Fraction]]:
    """Rows ``C`` with ``C @ coeffs(g) == 0`` iff ``<alpha, x>`` divides ``g``.

    ``g`` is a degree-``degree`` polynomial in ``rank`` variables; the test is
    restriction to the hyperplane ``ker alpha``.  The row space depends only on
    the line through ``alpha``.
    """
    alpha = qvector(alpha)
    if len(alpha) != rank:
        raise ExactAlgebraError(f"weight {alpha} does not have length {rank}")
    if not any(alpha):
        raise ExactAlgebraError("zero weight")
    key = _canonical_line(alpha)
    return [[Fraction(x) for x in row] for row in _restriction_matrix(key, degree)]


def restriction_rows(alpha: Sequence, degree: int) -> tuple:
    """Integer form of :func:`divisibility_constraints` (cached, no copying)."""
    return _restriction_matrix(_canonical_line(qvector(alpha)), degree)


def _canonical_line(alpha) -> tuple[int, ...]:
    a = primitive_integer_vector(alpha)
    first = next(v for v in a if v)
    return tuple(-v for v in a) if first < 0 else a


def is_divisible(g: HomogeneousPoly, alpha: Sequence) -> bool:
    rows = restriction_rows(alpha, g.degree)
    return all(sum(c * x for c, x in zip(row, g.coeffs)) == 0 for row in rows)


# -- exact rank and nullspace -----------------------------------------------

def _integer_rows(matrix) -> list[list[int]]:
    rows = []
    for row in matrix:
        row = [Fraction(x) for x in row]
        lcm = math.lcm(*(x.denominator for x in row)) if row else 1
        rows.append([int(x * lcm) for x in row])
    return rows


def _pivots(red, rank: int, ncols: int) -> list[int]:
    """Pivot columns of a matrix in reduced row echelon form."""
    pivots = []
    j = 0
    for i in range(rank):
        # pivots move strictly right, so resume the scan where the last one was
        while not int(red[i, j]):
            j += 1
        pivots.append(j)
        j += 1
    return pivots


@dataclass
class Kernel:
    """Exact kernel of an integer matrix.

    ``basis[j]`` is an integer vector whose entry at ``free[j]`` is
    ``scale[j] > 0`` and whose other free entries vanish, so a kernel vector
    ``w`` has coordinates ``w[free[j]] / scale[j]`` in this basis.
    """

    rank: int
    ncols: int
    free: list[int]
    basis: list[list[int]]
    scale: list[int]

    @property
    def nullity(self) -> int:
        return len(self.free)

    def coordinates(self, vec: Sequence) -> list[Fraction]:
        return [Fraction(vec[f]) / s for f, s in zip(self.free, self.scale)]

    def fraction_basis(self) -> list[tuple[Fraction, ...]]:
        return [tuple(Fraction(x, s) for x in v) for v, s in zip(self.basis, self.scale)]


def kernel(rows: Sequence[Sequence[int]], ncols: int) -> Kernel:
    """Exact kernel of an integer matrix given as a list of rows.

    Pivots are found modulo a large prime, the pivot block is solved exactly,
    and the resulting kernel is checked over Z.  A failed check only means the
    prime was unlucky, so the next prime is tried.
    """
    rows = [r for r in rows if any(r)]
    if any(len(r) != ncols for r in rows):
        raise ExactAlgebraError("ragged matrix")
    if not rows or ncols == 0:
        basis = [[int(i == j) for i in range(ncols)] for j in range(ncols)]
        return Kernel(0, ncols, list(range(ncols)), basis, [1] * ncols)

    m = len(rows)
    flat = [x for r in rows for x in r]
    big = fmpz_mat(m, ncols, flat)
    for prime in _PRIMES:
        red, rk = nmod_mat(m, ncols, [x % prime for x in flat], prime).rref()
        piv_cols = _pivots(red, rk, ncols)
        pivot_set = set(piv_cols)
        free = [j for j in range(ncols) if j not in pivot_set]
        if not free:
            return Kernel(rk, ncols, [], [], [])
        # independent rows of the pivot-column block
        sub_t = nmod_mat(rk, m, [rows[i][j] % prime for j in piv_cols for i in range(m)], prime)
        red_t, _ = sub_t.rref()
        piv_rows = _pivots(red_t, rk, m)
        block = fmpz_mat(rk, rk, [rows[i][j] for i in piv_rows for j in piv_cols])
        rhs = fmpz_mat(rk, len(free), [rows[i][j] for i in piv_rows for j in free])
        sol = block.solve(rhs)
        num, den = sol.numer_denom()
        den = int(den)
        num_cols = list(zip(*[[-int(x) for x in row] for row in num.tolist()]))
        basis = []
        for k, j in enumerate(free):
            vec = [0] * ncols
            vec[j] = den
            for pc, x in zip(piv_cols, num_cols[k]):
                vec[pc] = x
            g = math.gcd(*vec)
            basis.append([x // g for x in vec] if g != 1 else vec)
        kern = fmpz_mat(len(free), ncols, [x for v in basis for x in v]).transpose()
        if (big * kern).is_zero():
            return Kernel(rk, ncols, free, basis, [v[j] for v, j in zip(basis, free)])
    raise ExactAlgebraError("kernel verification failed for every prime")


def rank_and_nullspace(matrix, ncols: int | None = None):
    """Exact rank over Q and a nullspace basis of a rational matrix.

    ``matrix`` is a sequence of rows; pass ``ncols`` when there may be no
    rows.  Returns ``(rank, basis)`` with each basis vector a tuple of
    Fractions; the basis is the reduced one (identity on the free columns).
    """
    rows = _integer_rows(matrix)
    if ncols is None:
        if not rows:
            raise ExactAlgebraError("ncols is required for a matrix with no rows")
        ncols = len(rows[0])
    k = kernel(rows, ncols)
    return k.rank, k.fraction_basis()


def rank(matrix, ncols: int | None = None) -> int:
    return rank_and_nullspace(matrix, ncols)[0]


def nullity(matrix, ncols: int) -> int:
    return ncols - rank_and_nullspace(matrix, ncols)[0]


def span_rank(vectors: Sequence[Sequence], length: int) -> int:
    """Dimension of the Q-span of ``vectors`` (each of length ``length``)."""
    if not vectors:
        return 0
    # rank of the row matrix
    return rank_and_nullspace(vectors, length)[0]


def mat_vec(matrix, vec) -> list[Fraction]:
    return [sum((Fraction(a) * b for a, b in zip(row, vec)), Fraction(0)) for row in matrix]

