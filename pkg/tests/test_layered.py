import math
from fractions import Fraction

import numpy as np
import pytest

from anglers.angles import FLAT, LemmaViolation, check_partially_flat, find_angle_structure, perturb, t_max, verify
from anglers.census import heptagon_pyramids, regular_cube, two_cube_decomposition
from anglers.layered import (
    DiagonalMissesHyperbolicSpace,
    Decomposition,
    FacePairing,
    LayeredError,
    PolyhedralCell,
    build,
    cone_cell,
    decomposition_from_dict,
    face_triangulation,
    insert_flat_layers,
)


def cone_count(cell):
    """Oracle: a face missing the apex contributes (size - 2) tetrahedra."""
    return sum(len(f) - 2 for f in cell.faces if cell.apex not in f)


def cube_cell():
    return decomposition_from_dict({"cells": [regular_cube(math.pi / 4)], "pairings": []}).cells[0]


TETRA = PolyhedralCell([0, 1, 2, 3], [[1, 2, 3], [0, 3, 2], [0, 1, 3], [0, 2, 1]])
PRISM = PolyhedralCell(
    [0, 1, 2, 3, 4, 5], [[0, 1, 2], [3, 5, 4], [0, 3, 4, 1], [1, 4, 5, 2], [2, 5, 3, 0]]
)


@pytest.mark.parametrize("cell,expected", [(TETRA, 1), (PRISM, 3), (None, 6)])
def test_cone_sizes(cell, expected):
    cell = cell or cube_cell()
    cell.check()
    tets = cone_cell(cell)
    assert len(tets) == expected == cone_count(cell)
    assert all(t.apex == cell.apex for t in tets)
    assert all(len(set(t.vertices)) == 4 for t in tets)


def test_face_fan_uses_apex_when_present():
    cube = cube_cell()
    for f, face in enumerate(cube.faces):
        fan = face_triangulation(cube, f)
        assert fan.cone_vertex == (cube.apex if cube.apex in face else min(face))
        assert len(fan.triangles) == len(face) - 2
        assert all(fan.cone_vertex in t for t in fan.triangles)


def test_flat_layers_on_a_quadrilateral():
    assert insert_flat_layers([0, 1, 2, 3], 0, 2) == []
    assert insert_flat_layers([0, 1, 2, 3], 0, 0) == []
    (layer,) = insert_flat_layers([0, 1, 2, 3], 0, 1)
    assert set(layer.old_diagonal) == {1, 3} and set(layer.new_diagonal) == {0, 2}


@pytest.mark.parametrize("n", range(4, 10))
def test_flat_layer_count(n):
    poly = list(range(n))
    for j in range(1, n):
        layers = insert_flat_layers(poly, 0, j)
        # arcs of lengths j-1 and n-j-1 each need (length - 1) switches, empty arcs none
        expected = max(j - 2, 0) + max(n - j - 2, 0)
        assert len(layers) == expected
        for layer in layers:
            v, a, b, vp = layer.vertices
            assert (v, vp) == (0, j)
            assert set(layer.old_diagonal) == {vp, a}
            assert set(layer.new_diagonal) == {v, b}


def test_heptagon_switch_sequence():
    layers = insert_flat_layers(list(range(7)), 0, 4)
    got = [(l.arc, l.switch, l.vertices) for l in layers]
    assert got == [("u", 1, (0, 1, 2, 4)), ("u", 2, (0, 2, 3, 4)), ("w", 1, (0, 6, 5, 4))]


def test_heptagon_pyramids_build():
    d = decomposition_from_dict(heptagon_pyramids())
    out = build(d)
    cones = sum(cone_count(c) for c in d.cells)
    assert out.flats_per_pairing[0] == 3
    assert out.flat_count == sum(out.flats_per_pairing)
    assert out.triangulation.tet_count == cones + out.flat_count
    tri = out.triangulation
    assert sum(ec.valence for ec in tri.edge_classes) == 6 * tri.tet_count
    # every flat tet has exactly two pi corners, on opposite edges
    for t, tag in enumerate(out.tags):
        if tag == FLAT:
            vals = [out.flat_values[6 * t + e] for e in range(6)]
            ones = [e for e, x in enumerate(vals) if x == 1]
            assert len(ones) == 2 and ones[0] + ones[1] == 5
            assert sum(vals) == 2


def test_provenance_records_every_tet():
    out = build(decomposition_from_dict(heptagon_pyramids()))
    kinds = [p["kind"] for p in out.provenance]
    assert kinds.count("flat") == out.flat_count
    assert len(kinds) == out.triangulation.tet_count
    assert out.provenance_dict()["flats_per_pairing"] == out.flats_per_pairing


def two_tetrahedra(corr):
    return Decomposition(
        [PolyhedralCell(list(TETRA.vertices), [list(f) for f in TETRA.faces], None, i) for i in range(2)],
        [FacePairing((0, f), (1, f), corr(f)) for f in range(4)],
    )


def test_two_tetrahedra_identity_gluing():
    # mirror gluing of every face: the double of a tetrahedron
    out = build(two_tetrahedra(lambda f: list(TETRA.faces[f])))
    assert out.triangulation.tet_count == 2
    assert out.flat_count == 0
    assert out.triangulation.oriented


def test_bad_correspondence_rejected():
    d = decomposition_from_dict(heptagon_pyramids())
    bad = list(d.pairings[0].correspondence)
    bad[0], bad[1] = bad[1], bad[0]
    d.pairings[0] = FacePairing(d.pairings[0].src, d.pairings[0].dst, bad)
    with pytest.raises(LayeredError, match="cyclic order"):
        build(d)


def test_unpaired_faces_rejected():
    d = decomposition_from_dict(heptagon_pyramids())
    d.pairings.pop()
    with pytest.raises(LayeredError, match="not paired"):
        build(d)


def test_face_paired_twice_rejected():
    d = decomposition_from_dict(heptagon_pyramids())
    d.pairings.append(d.pairings[0])
    with pytest.raises(LayeredError, match="paired twice"):
        build(d)


def test_non_orientable_gluing_rejected():
    def corr(f):
        face = TETRA.faces[f]
        # one face glued with the reflected correspondence, the rest as in the double
        return [face[0], face[2], face[1]] if f == 0 else list(face)

    with pytest.raises(LayeredError, match="not orientable"):
        build(two_tetrahedra(corr))


def test_rotated_gluing_stays_orientable():
    for shift in (1, 2):
        out = build(two_tetrahedra(lambda f: TETRA.faces[f][shift:] + TETRA.faces[f][:shift]))
        assert out.triangulation.oriented


def test_degenerate_cell_rejected():
    cell = PolyhedralCell([0, 1, 2, 3], [[1, 2, 3], [0, 3, 2], [0, 1, 3]])
    with pytest.raises(LayeredError):
        cell.check()


@pytest.fixture(scope="module")
def two_cubes():
    return decomposition_from_dict(two_cube_decomposition())


def test_two_cube_geometric_pipeline(two_cubes):
    out = build(two_cubes, geometric=True)
    assert out.triangulation.tet_count == 12 + out.flat_count
    assert check_partially_flat(out.triangulation, out.beta, tol=1e-9) == []
    assert find_angle_structure(out.triangulation).status == "strictly_feasible"
    bound = t_max(out.triangulation, out.beta)
    alpha = perturb(out.triangulation, out.beta, bound.value / 2)
    assert verify(out.triangulation, alpha, tol=1e-9).passed


def test_round_trip(two_cubes):
    again = decomposition_from_dict(two_cubes.to_dict())
    assert again.to_dict() == two_cubes.to_dict()
    a, b = build(again), build(two_cubes)
    assert a.triangulation.to_dict() == b.triangulation.to_dict()


def test_diagonal_outside_hyperbolic_space(two_cubes):
    # push the cube far out so its long diagonals leave the ball
    data = two_cubes.to_dict()
    for cell in data["cells"]:
        cell["vertices"] = [[1.0] + [3 * x for x in v[1:]] for v in cell["vertices"]]
    with pytest.raises(DiagonalMissesHyperbolicSpace) as info:
        build(decomposition_from_dict(data), geometric=True)
    assert info.value.cell in (0, 1)
    assert len(info.value.pair) == 2
    assert str(info.value.pair[0]) in str(info.value)


def test_all_flat_edge_raises_lemma_violation():
    # synthetic output where every tet is flat
    from anglers.layered import LayeredOutput, _check_lemma
    from anglers.census import one_edge

    tri = one_edge()
    out = LayeredOutput(tri, [FLAT] * tri.tet_count, [], [])
    with pytest.raises(LemmaViolation):
        _check_lemma(out)
