import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import linprog
from scipy.spatial import ConvexHull

from pellspace.pellytope import build_fan, build_pellytope, pellytope_poly, ray_generators
from pellspace.polyhedra import (
    AmbiguousVertex,
    LatticePolytope,
    NotACone,
    NotFlag,
    RayOnExistingRay,
    SimplicialFan,
    check_simple_and_facets,
    extract_flag_complex,
    fan_product,
    is_refinement,
    star,
    stellar_refine,
    vertices_from_fan,
)

SEGMENT = SimplicialFan.build(1, [(1,), (-1,)], [(0,), (1,)])
QUADRANTS = fan_product(SEGMENT, SEGMENT)


def pairs(fan, names):
    """Non-edges of a fan as sets of ray names."""
    return {frozenset(names[fan.rays[i]] for i in p) for p in extract_flag_complex(fan).non_edges}


def test_quadrant_product():
    assert QUADRANTS.dim == 2
    assert sorted(QUADRANTS.rays) == sorted([(1, 0), (-1, 0), (0, 1), (0, -1)])
    assert len(QUADRANTS.maximal_cones) == 4
    assert QUADRANTS.check_complete(samples=100, seed=3)


def test_product_with_zero_fan():
    f = fan_product(build_fan(2), SimplicialFan.zero())
    assert f.same_as(build_fan(2))


def test_product_cone_count():
    assert len(fan_product(build_fan(2), SEGMENT).maximal_cones) == 10


def test_refine_quadrants_gives_pell_fan():
    f = stellar_refine(QUADRANTS, (1, -1))
    assert f.n_rays == 5 and len(f.maximal_cones) == 5
    assert f.same_as(build_fan(2))


def test_refine_at_existing_ray():
    with pytest.raises(RayOnExistingRay):
        stellar_refine(QUADRANTS, (1, 0))


def test_refine_to_dimension_three():
    f = stellar_refine(fan_product(build_fan(2), SEGMENT), (0, 1, -1))
    assert f.n_rays == 8 and len(f.maximal_cones) == 12
    assert f.check_complete(samples=100, seed=1)


def test_star_of_boundary_ray_is_segment():
    st_ = star(build_fan(2), (0,))
    assert st_.fan.dim == 1 and st_.fan.n_rays == 2 and len(st_.fan.maximal_cones) == 2


def test_star_of_middle_ray_is_quadrants():
    st_ = star(build_fan(3), (1,)).fan
    assert st_.dim == 2 and st_.n_rays == 4 and len(st_.maximal_cones) == 4
    fc = extract_flag_complex(st_)
    # two disjoint incompatible pairs, like the product of two segments
    assert len(fc.non_edges) == 2 and len(frozenset().union(*fc.non_edges)) == 4


def test_star_of_maximal_cone_is_zero_fan():
    cone = build_fan(3).maximal_cones[0]
    st_ = star(build_fan(3), cone).fan
    assert st_.dim == 0 and st_.n_rays == 0 and len(st_.maximal_cones) == 1


def test_star_of_non_cone():
    with pytest.raises(NotACone):
        star(build_fan(2), (0, 2))


@pytest.mark.parametrize("d", [2, 3, 4])
def test_star_dimension_and_cone_count(d):
    fan = build_fan(d)
    for k in range(fan.n_rays):
        st_ = star(fan, (k,)).fan
        assert st_.dim == d - 1
        assert len(st_.maximal_cones) == len(fan.cones_containing((k,)))


def test_flag_complex_of_pell_fan_d2():
    names = {(1, 0): "e1", (0, 1): "e2", (-1, 0): "-e1", (0, -1): "-e2", (1, -1): "e1-e2"}
    got = pairs(build_fan(2), names)
    want = {frozenset(p) for p in [("e1", "-e1"), ("e2", "-e2"), ("e1", "-e2"), ("e2", "e1-e2"), ("-e1", "e1-e2")]}
    assert got == want


def test_flag_complex_of_quadrants():
    names = {(1, 0): "e1", (0, 1): "e2", (-1, 0): "-e1", (0, -1): "-e2"}
    assert pairs(QUADRANTS, names) == {frozenset(("e1", "-e1")), frozenset(("e2", "-e2"))}


def test_flag_complex_of_segment():
    assert extract_flag_complex(SEGMENT).non_edges == {frozenset((0, 1))}


def test_boundary_of_triangle_is_not_flag():
    # the three 2-cones around the origin in the plane, without the 3-cone: hollow triangle
    fan = SimplicialFan.build(3, [(1, 0, 0), (0, 1, 0), (0, 0, 1)], [(0, 1), (1, 2), (0, 2)])
    with pytest.raises(NotFlag) as exc:
        extract_flag_complex(fan)
    assert exc.value.clique == (0, 1, 2)


def test_vertices_of_segment():
    verts = vertices_from_fan([(0,), (1,)], SEGMENT)
    assert set(verts.values()) == {(0,), (1,)}


def test_vertices_of_p2():
    verts = vertices_from_fan(pellytope_poly(2).terms, build_fan(2))
    assert len(set(verts.values())) == 5


def test_quadrants_do_not_resolve_p2():
    with pytest.raises(AmbiguousVertex) as exc:
        vertices_from_fan(pellytope_poly(2).terms, QUADRANTS)
    gens = [QUADRANTS.rays[i] for i in exc.value.cone]
    assert sorted(gens) == sorted([(1, 0), (0, -1)])


@pytest.mark.parametrize("d,facets,vertices", [(1, 2, 2), (2, 5, 5), (3, 8, 12)])
def test_simple_and_facets(d, facets, vertices):
    rep = check_simple_and_facets(build_pellytope(d), build_fan(d))
    assert (rep.facets, rep.vertices, rep.simple) == (facets, vertices, True)


def lp_vertices(points):
    """Points that are not convex combinations of the others."""
    out = set()
    for k, p in enumerate(points):
        others = np.array([q for j, q in enumerate(points) if j != k], dtype=float).T
        A = np.vstack([others, np.ones(others.shape[1])])
        res = linprog(np.zeros(others.shape[1]), A_eq=A, b_eq=list(p) + [1.0], bounds=(0, None))
        if res.status != 0:
            out.add(tuple(p))
    return out


@pytest.mark.parametrize("d", [2, 3, 4])
def test_vertices_agree_with_lp_oracle(d):
    poly = build_pellytope(d)
    assert lp_vertices(poly.support) == set(poly.vertices)


@pytest.mark.parametrize("d", [2, 3, 4])
def test_hull_facet_normals_are_the_rays(d):
    poly = build_pellytope(d)
    hull = ConvexHull(np.array(poly.support, dtype=float))
    normals = set()
    for eq in hull.equations:
        # scipy gives outward normals; inner normals are their negatives
        n = -eq[:-1] / np.abs(eq[:-1][np.abs(eq[:-1]) > 1e-9]).min()
        normals.add(tuple(int(round(x)) for x in n))
    assert normals == set(ray_generators(d))


def test_refinement_relations():
    fine, coarse = build_fan(2), QUADRANTS
    rep = is_refinement(fine, coarse)
    assert rep.refines and len(rep.cone_map) == 5
    assert is_refinement(coarse, coarse).refines
    back = is_refinement(coarse, fine)
    assert not back.refines and back.missing_rays == ((1, -1),)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(-9, 9), min_size=3, max_size=3).filter(any))
def test_every_direction_lies_in_some_cone(v):
    assert build_fan(3).locate(v)


def test_json_round_trip():
    f = build_fan(3)
    assert SimplicialFan.from_json(f.to_json()) == f
    poly = build_pellytope(2)
    assert poly.to_json()["vertices"] == [list(v) for v in poly.vertices]


def test_lattice_polytope_rejects_foreign_vertices():
    with pytest.raises(ValueError):
        LatticePolytope(1, ((0,), (1,)), ((2,),))
