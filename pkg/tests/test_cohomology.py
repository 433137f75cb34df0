from __future__ import annotations

import math
from dataclasses import replace

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oddgkm.catalog import antipodal_automorphism, make_standard, pinwheel
from oddgkm.cohomology import (
    Automorphism,
    AutomorphismError,
    automorphism_invariant_betti,
    GradedClass,
    check_automorphism,
    cohomology_report,
    equivariant_graded_dim,
    formality_check,
    graded_piece,
    ordinary_betti,
    orientability_check,
    poincare_duality,
    polynomial_split_check,
    top_degree,
)
from oddgkm.exactalg import HomogeneousPoly
from oddgkm.graphs import (
    EvenGkmGraph,
    Incidence,
    OddGkmGraph,
    ProjectiveWeight,
    Square,
    floating_profile,
)
from oracles import (
    CP2,
    S1,
    S2,
    S4,
    graded_dim_by_division,
    invariant_betti_of_signed_permutation,
    kunneth,
)


def identity(g):
    if isinstance(g, EvenGkmGraph):
        return Automorphism({v: v for v in g.vertices}, {e.id: e.id for e in g.edges})
    return Automorphism({c: c for c in g.circles}, {s.id: s.id for s in g.squares})


def flip_sign(g: OddGkmGraph, square_id: str, which=(0,)) -> OddGkmGraph:
    squares = []
    for s in g.squares:
        if s.id == square_id:
            s = replace(s, incidences=tuple(replace(i, sign=-i.sign) if k in which else i
                                            for k, i in enumerate(s.incidences)))
        squares.append(s)
    return replace(g, squares=tuple(squares))


def non_free_graph() -> OddGkmGraph:
    """Two circles in rank 3 whose theta-part is not a free module."""
    sq = (
        Square("a", ProjectiveWeight.of((0, 0, 1)), (Incidence("c1", 1),)),
        Square("b", ProjectiveWeight.of((1, 1, 0)), (Incidence("c0", 1), Incidence("c1", 1))),
        Square("c", ProjectiveWeight.of((1, 0, 0)), (Incidence("c1", -1), Incidence("c0", 1))),
    )
    return OddGkmGraph(3, ("c0", "c1"), sq)


# -- equivariant dimensions ---------------------------------------------------------

def test_pinwheel2_degree5():
    dim, basis = equivariant_graded_dim(pinwheel(2), 5)
    assert dim == 1
    (cls,) = basis
    assert cls.polys[0] == HomogeneousPoly.from_terms(2, 2, {(1, 1): 1})


@pytest.mark.parametrize("d", range(5))
def test_point_has_no_constraints(d):
    g = make_standard("point")
    assert equivariant_graded_dim(g, 2 * d)[0] == 1
    g4 = EvenGkmGraph.build(3, ["v"], [])
    assert equivariant_graded_dim(g4, 2 * d)[0] == math.comb(d + 2, 2)
    assert equivariant_graded_dim(g4, 2 * d + 1)[0] == 0


def test_chain_degree3():
    dim, (cls,) = equivariant_graded_dim(make_standard("chain"), 3)
    assert dim == 1
    y = HomogeneousPoly.linear_form((0, 1))
    a = cls.polys[0].coeffs[1]
    assert cls.polys[0] == y.scale(a) and cls.polys[1] == y.scale(a)


def test_graded_class_checks_relations():
    g = make_standard("chain")
    y = HomogeneousPoly.linear_form((0, 1))
    GradedClass(g, 3, (y, y))
    with pytest.raises(ValueError):
        GradedClass(g, 3, (y, y.scale(2)))
    with pytest.raises(ValueError):
        GradedClass(g, 3, (HomogeneousPoly.linear_form((1, 0)),) * 2)


@pytest.mark.parametrize("name", ["chain", "triangle_odd", "cube3", "pinwheel(2)"])
def test_basis_classes_satisfy_relations(name):
    g = make_standard(name)
    for m in range(8):
        for cls in graded_piece(g, m).classes():
            GradedClass(g, m, cls.polys)


# -- Betti numbers ------------------------------------------------------------------

def test_betti_examples():
    assert ordinary_betti(pinwheel(2)) == (1, 0, 0, 0, 0, 1)
    assert ordinary_betti(make_standard("lune_odd")) == kunneth(S4, S1)
    assert ordinary_betti(make_standard("point")) == (1,)
    assert ordinary_betti(make_standard("cp2_triangle")) == CP2
    assert ordinary_betti(make_standard("cube3")) == kunneth(S2, S2, S2)


def test_betti_bounded_by_equivariant_dims():
    g = make_standard("triangle_odd")
    report = cohomology_report(g)
    for m, b in enumerate(report.betti):
        assert b <= report.equivariant_dims[m]
    assert report.to_json()["betti"] == [1, 1, 1, 1, 1, 1]


def test_formality_examples():
    assert formality_check(make_standard("chain"))
    assert formality_check(make_standard("chain")).total_betti == 4
    for n in (1, 2, 3):
        assert formality_check(pinwheel(n)).total_betti == 2


def test_non_free_graph_is_not_formal():
    g = non_free_graph()
    report = formality_check(g, 8)
    assert not report
    assert report.total_betti != report.expected_total
    assert report.mismatches
    # the engine's dimensions are confirmed by the division oracle
    for m in range(7):
        assert graded_piece(g, m).dim == graded_dim_by_division(g, m)


def test_flipping_one_sign_breaks_duality_but_not_freeness():
    g = flip_sign(make_standard("quadrangle_odd"), "v00-v10")
    betti = ordinary_betti(g)
    assert betti == (1, 0, 2, 4, 1, 0)
    assert not poincare_duality(betti)
    assert formality_check(g)
    for m in range(7):
        assert graded_piece(g, m).dim == graded_dim_by_division(g, m)


def test_orientability():
    assert orientability_check(make_standard("cp2_triangle"))
    assert orientability_check(make_standard("point"))
    assert orientability_check(make_standard("cube3"))
    with pytest.raises(TypeError):
        orientability_check(make_standard("chain"))


# -- polynomial split --------------------------------------------------------------

def test_split_examples():
    assert polynomial_split_check((1, 0, 1, 1, 0, 1), 1) == (True, (1, 0, 1))
    assert polynomial_split_check((1, 0, 0, 0, 0, 1), 2) == (True, (1,))
    ok, _ = polynomial_split_check((1, 0, 0, 0, 3, 3, 0, 0, 0, 1), 1)
    assert not ok
    assert polynomial_split_check((1, 1, 1, 1, 1, 1), 0) == (True, (1, 0, 1, 0, 1))


@settings(max_examples=50)
@given(st.lists(st.integers(0, 4), min_size=1, max_size=5), st.integers(0, 3))
def test_split_recovers_even_factor(half, k):
    even = [0] * (2 * len(half) - 1)
    for i, x in enumerate(half):
        even[2 * i] = x
    even[0] = max(even[0], 1)
    while len(even) > 1 and even[-1] == 0:
        even.pop()
    product = kunneth(even, (1,) + (0,) * (2 * k) + (1,))
    ok, q = polynomial_split_check(product, k)
    assert ok and q == tuple(even)


# -- automorphisms ------------------------------------------------------------------

def test_identity_invariants_equal_betti():
    g = make_standard("chain")
    assert check_automorphism(g, identity(g)) == 1
    assert automorphism_invariant_betti(g, identity(g)) == ordinary_betti(g)


def quad_swap(g):
    vmap = {"v00": "v00", "v11": "v11", "v10": "v01", "v01": "v10"}
    smap = {"v00-v10": "v00-v01", "v00-v01": "v00-v10", "v10-v11": "v01-v11",
            "v01-v11": "v10-v11"}
    return Automorphism(vmap, smap, {}, [[0, 1], [1, 0]])


def test_quadrangle_swap_invariants():
    g = make_standard("quadrangle_odd")
    sigma = quad_swap(g)
    assert check_automorphism(g, sigma) == 2
    expected = invariant_betti_of_signed_permutation([(2, 1, 1), (2, 0, 1), (1, 2, 1)], 5)
    assert expected == (1, 1, 1, 1, 1, 1)
    assert automorphism_invariant_betti(g, sigma) == expected


def test_quadrangle_rotation_invariants():
    g = make_standard("quadrangle_odd")
    sigma = antipodal_automorphism(g, theta_sign=1)
    expected = invariant_betti_of_signed_permutation([(2, 0, -1), (2, 1, -1), (1, 2, 1)], 5)
    assert expected == (1, 1, 0, 0, 1, 1)
    assert automorphism_invariant_betti(g, sigma) == expected


def test_cube_antipodal_quotient_is_not_orientable():
    g = make_standard("cube3")
    b = automorphism_invariant_betti(g, antipodal_automorphism(g))
    assert b == invariant_betti_of_signed_permutation([(2, i, -1) for i in range(3)], 6)
    assert b[6] == 0


def test_incompatible_automorphisms_rejected():
    g = make_standard("quadrangle_odd")
    sigma = quad_swap(g)
    with pytest.raises(AutomorphismError):
        check_automorphism(g, Automorphism(sigma.node_map, sigma.part_map, {}, None))
    bad = dict(sigma.node_map)
    bad["v00"], bad["v11"] = "v11", "v00"
    with pytest.raises(AutomorphismError):
        check_automorphism(g, Automorphism(bad, sigma.part_map, {}, sigma.linear))
    chain = make_standard("chain")
    flipped = Automorphism({"v0": "v1", "v1": "v0"}, {"e0": "e0", "v0:f0": "v1:f0",
                                                      "v1:f0": "v0:f0"}, {"v0": 1, "v1": -1})
    with pytest.raises(AutomorphismError):
        check_automorphism(chain, flipped)


def test_chain_reflection():
    chain = make_standard("chain")
    sigma = Automorphism({"v0": "v1", "v1": "v0"},
                         {"e0": "e0", "v0:f0": "v1:f0", "v1:f0": "v0:f0"}, {"v0": -1, "v1": -1})
    # S^2 x S^3 with the antipodal map on S^2 and a reflection of S^3
    assert automorphism_invariant_betti(chain, sigma) == \
        invariant_betti_of_signed_permutation([(2, 0, -1), (3, 1, -1)], 5)


# -- properties on small random graphs --------------------------------------------------

@st.composite
def small_odd_graphs(draw):
    r = draw(st.integers(2, 3))
    n = draw(st.integers(1, 3))
    circles = tuple(f"c{i}" for i in range(n))
    squares = []
    for j in range(draw(st.integers(1, 4))):
        size = draw(st.integers(1, min(2, n)))
        members = draw(st.lists(st.sampled_from(circles), min_size=size, max_size=size,
                                unique=True))
        w = draw(st.lists(st.integers(-2, 2), min_size=r, max_size=r).filter(any))
        signs = draw(st.lists(st.sampled_from((1, -1)), min_size=size, max_size=size))
        squares.append(Square(f"s{j}", ProjectiveWeight.of(w),
                              tuple(Incidence(c, e) for c, e in zip(members, signs))))
    return OddGkmGraph(r, circles, tuple(squares))


@settings(max_examples=25, deadline=None)
@given(small_odd_graphs(), st.integers(0, 5))
def test_engine_matches_division_oracle(g, m):
    assert graded_piece(g, m).dim == graded_dim_by_division(g, m)


@settings(max_examples=25, deadline=None)
@given(small_odd_graphs(), st.data())
def test_flipping_both_signs_of_a_square_changes_nothing(g, data):
    s = data.draw(st.sampled_from(g.squares))
    flipped = flip_sign(g, s.id, which=range(s.valence))
    for m in range(7):
        assert graded_piece(g, m).dim == graded_piece(flipped, m).dim


@pytest.mark.parametrize("name", ["pinwheel(2)", "pinwheel(3)", "chain", "m9"])
def test_odd_vanishing_below_floating_threshold(name):
    g = make_standard(name)
    k = floating_profile(g).k
    for l in range(k):
        assert graded_piece(g, 2 * l + 1).dim == 0
    assert graded_piece(g, 2 * k + 1).dim == 1


def test_top_degree():
    assert top_degree(make_standard("cube3")) == 6
    assert top_degree(make_standard("m9")) == 9
    assert top_degree(pinwheel(4)) == 9
