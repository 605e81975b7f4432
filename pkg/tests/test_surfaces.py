import itertools
import random
from fractions import Fraction

import pytest

from anglers.angles import AngleAssignment, find_angle_structure, perturb, t_max
from anglers.census import one_edge, partially_flat_suite, two_boundary, valence_eight_family
from anglers.surfaces import (
    AdmissibleDisk,
    SurfaceComplex,
    SurfaceError,
    boundary_parallel,
    cell_structure,
    check_admissibility,
    classify_disk,
    disjoint_union,
    edge_tube,
    euler_characteristics,
    ext,
    frontier_euler,
    frontier_surface,
    inner,
    inner_angles,
    lemma_check,
    prop_verdict,
    surface_from_dict,
)


def strict(tri):
    out = find_angle_structure(tri)
    assert out.status == "strictly_feasible"
    return out.witness


def frontier_family(tri, max_edges=3):
    comps = [c for c, _ in tri.boundary_components()]
    edges = range(len(tri.edge_classes))
    for rc in range(len(comps) + 1):
        for B in itertools.combinations(comps, rc):
            for rx in range(min(max_edges, len(edges)) + 1):
                for X in itertools.combinations(edges, rx):
                    s = frontier_surface(tri, B, X)
                    if s is not None and s.disks:
                        yield B, X, s


@pytest.mark.parametrize("maker", [one_edge, lambda: valence_eight_family(2), two_boundary])
def test_edge_tubes_have_zero_chi(maker):
    tri = maker()
    alpha = strict(tri)
    for ec in tri.edge_classes:
        s = edge_tube(tri, [ec.id])
        assert len(s.disks) == ec.valence
        v = prop_verdict(tri, s, inner_angles(tri, s, alpha))
        assert v.chi == 0 and v.chi_angle == 0
        assert v.label == "tube"
        assert set(v.lemma.disk_types) == {"IV"}


def test_disjoint_tubes_are_additive():
    tri = valence_eight_family(1)
    alpha = strict(tri)
    a, b = edge_tube(tri, [0]), edge_tube(tri, [1])
    u = disjoint_union(a, b)
    chi = [euler_characteristics(tri, s, inner_angles(tri, s, alpha)).chi_combinatorial for s in (a, b, u)]
    assert chi[2] == chi[0] + chi[1] == 0


@pytest.mark.parametrize("maker", [one_edge, lambda: valence_eight_family(2), two_boundary])
def test_frontier_surfaces_match_independent_chi(maker):
    tri = maker()
    alpha = strict(tri)
    count = 0
    for B, X, s in frontier_family(tri):
        assert check_admissibility(tri, s).ok
        theta = inner_angles(tri, s, alpha)
        rep = euler_characteristics(tri, s, theta)
        assert rep.chi_angle == rep.chi_combinatorial
        assert rep.chi_combinatorial == frontier_euler(tri, B, X)
        v = prop_verdict(tri, s, theta)
        assert v.holds
        count += 1
    assert count > 0


def test_type_three_disks_occur_and_give_negative_chi():
    tri = two_boundary()
    alpha = strict(tri)
    link = next(ec.id for ec in tri.edge_classes
                if len({tri.boundary_component_of(ec.corners[0].tet, v) for v in (0, 1, 2, 3)}) > 1
                and _ends(tri, ec)[0] != _ends(tri, ec)[1])
    s = frontier_surface(tri, [0], [link])
    types = [classify_disk(d) for d in s.disks]
    assert "III" in types
    v = prop_verdict(tri, s, inner_angles(tri, s, alpha))
    assert v.consistent and v.chi < 0 and v.label == "negative"


def _ends(tri, ec):
    from anglers.triangulation import EDGE_VERTICES

    c = ec.corners[0]
    a, b = EDGE_VERTICES[c.edge]
    return tri.boundary_component_of(c.tet, a), tri.boundary_component_of(c.tet, b)


def test_boundary_parallel_surface_is_type_one():
    tri = one_edge()
    s = boundary_parallel(tri)
    v = prop_verdict(tri, s, inner_angles(tri, s, strict(tri)))
    assert set(v.lemma.disk_types) == {"I"}
    assert v.chi == -2 and v.label == "negative"


SUITE = partially_flat_suite(12, seed=5)


@pytest.mark.parametrize("index", range(len(SUITE)))
def test_identity_under_perturbed_structures(index):
    tri, beta = SUITE[index]
    alpha = perturb(tri, beta, t_max(tri, beta).value / 2)
    for B, X, s in frontier_family(tri, max_edges=2):
        theta = inner_angles(tri, s, alpha)
        assert theta.exact
        v = prop_verdict(tri, s, theta)
        assert v.consistent and v.chi_angle == v.chi
        assert v.holds
        assert (v.chi == 0) == all(t == "IV" for t in v.lemma.disk_types)


def test_zero_cell_sums():
    tri = valence_eight_family(1)
    alpha = strict(tri)
    for s in (frontier_surface(tri, [0], []), edge_tube(tri, [0])):
        lemma = lemma_check(tri, s, inner_angles(tri, s, alpha))
        assert lemma.ok
        assert lemma.vertex_sums or lemma.external_sums
        assert all(x == 2 for x in lemma.vertex_sums)
        assert all(x == 1 for x in lemma.external_sums)


def test_disk_margin_matches_formula():
    tri = one_edge()
    alpha = AngleAssignment([Fraction(1, 6)] * 12)
    s = boundary_parallel(tri)
    lemma = lemma_check(tri, s, inner_angles(tri, s, alpha))
    # a type I disk at vertex v has margin pi - (sum of the three angles at v)
    assert lemma.disk_margins == [Fraction(1, 2)] * len(s.disks)


def test_condition_two_violations():
    tri = one_edge()
    same = AdmissibleDisk(0, [inner(0, 1), inner(0, 1), inner(0, 2)])
    rep = check_admissibility(tri, SurfaceComplex([same], []))
    assert any("condition (2)" in v and "both ends" in v for v in rep.violations)
    adjacent = AdmissibleDisk(0, [inner(0, 1), ext(0, 2), inner(0, 3)])
    rep = check_admissibility(tri, SurfaceComplex([adjacent], []))
    assert any("adjacent" in v for v in rep.violations)


def test_condition_three_violation():
    tri = one_edge()
    disk = AdmissibleDisk(0, [ext(0, 1), ext(0, 1), inner(0, 2)])
    rep = check_admissibility(tri, SurfaceComplex([disk], []))
    assert any("condition (3)" in v for v in rep.violations)


def test_condition_one_violation():
    tri = one_edge()
    rep = check_admissibility(tri, SurfaceComplex([AdmissibleDisk(0, [])], []))
    assert any("condition (1)" in v for v in rep.violations)


def test_broken_pairing_detected():
    tri = one_edge()
    s = edge_tube(tri, [0])
    p = list(s.pairings)
    (a, b), (c, d) = p[0], p[1]
    p[0], p[1] = (a, d), (c, b)
    with pytest.raises(SurfaceError):
        cell_structure(tri, SurfaceComplex(s.disks, p))


def test_unpaired_hexagon_side_is_an_error():
    tri = one_edge()
    s = boundary_parallel(tri)
    with pytest.raises(SurfaceError):
        cell_structure(tri, SurfaceComplex(s.disks, s.pairings[1:]))


def test_surface_file_round_trip():
    tri = two_boundary()
    s = frontier_surface(tri, [0], [1])
    again = surface_from_dict(s.to_dict())
    assert again.to_dict() == s.to_dict()


def test_classification():
    assert classify_disk(AdmissibleDisk(0, [inner(0, 1), inner(0, 2), inner(0, 3)])) == "I"
    assert classify_disk(AdmissibleDisk(0, [inner(0, 2), inner(0, 3), inner(1, 3), inner(1, 2)])) == "II"
    assert classify_disk(AdmissibleDisk(0, [ext(0, 2), ext(0, 3), inner(1, 2), inner(1, 3)])) == "III"
    assert classify_disk(AdmissibleDisk(0, [ext(0, 2), ext(1, 2), ext(1, 3), ext(0, 3)])) == "IV"


def test_random_frontier_surfaces_on_larger_covers():
    tri = valence_eight_family(3, seed=1)
    alpha = strict(tri)
    rng = random.Random(0)
    comps = [c for c, _ in tri.boundary_components()]
    for _ in range(10):
        B = rng.sample(comps, rng.randint(0, len(comps)))
        X = rng.sample(range(len(tri.edge_classes)), rng.randint(1, 3))
        s = frontier_surface(tri, B, X)
        if s is None or not s.disks:
            continue
        v = prop_verdict(tri, s, inner_angles(tri, s, alpha))
        assert v.consistent and v.chi == frontier_euler(tri, B, X)
