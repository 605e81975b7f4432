import itertools
import random

import pytest
from hypothesis import given, strategies as st

from anglers.census import ONE_EDGE, VALENCE_EIGHT, one_edge, random_triangulation, valence_eight
from anglers.triangulation import (
    EDGE_VERTICES,
    TriangulationError,
    UnionFind,
    build_triangulation,
    from_dict,
    validate,
)

from conftest import triangulations

PAIRS = list(itertools.combinations(range(4), 2))


def orbit_partition(tri):
    """Brute-force edge orbits: glue the three edges of every paired face."""
    uf = UnionFind(6 * tri.tet_count)
    for g in tri.gluings:
        (t, f), (t2, _) = g.src, g.dst
        for a, b in itertools.combinations([x for x in range(4) if x != f], 2):
            image = tuple(sorted((g.perm[a], g.perm[b])))
            uf.union(6 * t + PAIRS.index((a, b)), 6 * t2 + PAIRS.index(image))
    return sorted(sorted(group) for group in uf.groups())


def boundary_oracle(tri):
    """Per-component chi of the truncation surface, counted directly."""
    n = tri.tet_count
    tris = UnionFind(4 * n)
    ends = {}
    for t in range(n):
        for v in range(4):
            for w in range(4):
                if w != v:
                    ends[t, v, w] = len(ends)
    end_uf = UnionFind(len(ends))
    for g in tri.gluings:
        (t, f), (t2, _) = g.src, g.dst
        for v in range(4):
            if v == f:
                continue
            tris.union(4 * t + v, 4 * t2 + g.perm[v])
            for w in range(4):
                if w not in (v, f):
                    end_uf.union(ends[t, v, w], ends[t2, g.perm[v], g.perm[w]])
    out = []
    for comp in tris.groups():
        members = set(comp)
        faces = len(members)
        verts = {end_uf.find(ends[t, v, w]) for (t, v, w) in ends if 4 * t + v in members}
        out.append(len(verts) - 3 * faces // 2 + faces)
    return sorted(out)


@given(triangulations())
def test_edge_classes_match_orbit_oracle(tri):
    ours = sorted(sorted(c.slot for c in ec.corners) for ec in tri.edge_classes)
    assert ours == orbit_partition(tri)


@given(triangulations())
def test_edge_class_ids_ordered_by_smallest_slot(tri):
    firsts = [min(c.slot for c in ec.corners) for ec in tri.edge_classes]
    assert firsts == sorted(firsts)
    assert [ec.id for ec in tri.edge_classes] == list(range(len(tri.edge_classes)))


@given(triangulations())
def test_boundary_chi_matches_direct_count(tri):
    assert sorted(chi for _, chi in tri.boundary_components()) == boundary_oracle(tri)


@given(triangulations())
def test_total_boundary_chi_is_twice_edges_minus_tets(tri):
    total = sum(chi for _, chi in tri.boundary_components())
    assert total == 2 * len(tri.edge_classes) - 2 * tri.tet_count


@given(triangulations())
def test_valences_sum_to_six_n(tri):
    assert sum(ec.valence for ec in tri.edge_classes) == 6 * tri.tet_count


@given(triangulations())
def test_round_trip(tri):
    again = from_dict(tri.to_dict())
    assert again.to_dict() == tri.to_dict()
    assert [ec.corners for ec in again.edge_classes] == [ec.corners for ec in tri.edge_classes]


@given(triangulations(max_tets=4), st.integers(0, 2**32 - 1))
def test_relabelling_tetrahedra_preserves_valences(tri, seed):
    rng = random.Random(seed)
    order = list(range(tri.tet_count))
    rng.shuffle(order)
    records = [((order[g.src[0]], g.src[1]), (order[g.dst[0]], g.dst[1]), g.perm) for g in tri.gluings]
    other = build_triangulation(tri.tet_count, records)
    assert sorted(ec.valence for ec in other.edge_classes) == sorted(ec.valence for ec in tri.edge_classes)
    assert sorted(c for _, c in other.boundary_components()) == sorted(c for _, c in tri.boundary_components())


def test_one_edge_instance():
    tri = one_edge()
    assert [ec.valence for ec in tri.edge_classes] == [12]
    assert tri.boundary_components() == [(0, -2)]
    assert validate(tri).ok


def test_valence_eight_instance():
    tri = valence_eight()
    assert [ec.valence for ec in tri.edge_classes] == [8, 8, 8]
    assert [chi for _, chi in tri.boundary_components()] == [-2]


def test_even_permutation_rejected_or_reported():
    data = dict(ONE_EDGE, gluings=[dict(g) for g in ONE_EDGE["gluings"]])
    data["gluings"][0]["perm"] = [1, 0, 3, 2]
    with pytest.raises(TriangulationError):
        from_dict(data)
    rep = validate(from_dict(data, require_oriented=False))
    assert any("orientability" in f for f in rep.failures)


def test_missing_face_rejected():
    data = dict(VALENCE_EIGHT, gluings=VALENCE_EIGHT["gluings"][:-1])
    with pytest.raises(TriangulationError):
        from_dict(data)


def test_face_glued_twice_rejected():
    gl = list(ONE_EDGE["gluings"])
    gl[3] = {"from": [0, 0], "to": [1, 2], "perm": [2, 0, 3, 1]}
    with pytest.raises(TriangulationError):
        from_dict({"tets": 2, "gluings": gl})


def test_self_gluing_of_a_face_rejected():
    gl = [{"from": [0, 0], "to": [0, 0], "perm": [0, 2, 1, 3]}]
    with pytest.raises(TriangulationError):
        from_dict({"tets": 1, "gluings": gl})


def test_single_tetrahedron_sphere_boundary_warns():
    # faces 0<->1 and 2<->3 of one tetrahedron
    tri = build_triangulation(1, [((0, 0), (0, 1), (1, 0, 3, 2)), ((0, 2), (0, 3), (1, 0, 3, 2))],
                              require_oriented=False)
    rep = validate(tri)
    assert [c for _, c in rep.boundary] == [2, 2]
    assert len([w for w in rep.warnings if "non-negative" in w]) == 2


def test_edge_vertices_table():
    assert list(EDGE_VERTICES) == PAIRS
    for e, (a, b) in enumerate(EDGE_VERTICES):
        (c, d) = EDGE_VERTICES[5 - e]
        assert {a, b}.isdisjoint({c, d})
