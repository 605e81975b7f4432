"""Small triangulations and angle data used by the tests and scripts.

Nothing here is a census in the enumerative sense: instances are found by
seeded random search over odd-permutation gluings, or built as cyclic covers.
"""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Callable

import numpy as np

from .angles import (
    FLAT,
    AnglePolytope,
    HYPERIDEAL,
    PartiallyFlatAssignment,
    build_polytope,
    check_partially_flat,
    flat_pattern,
    solve,
    solve_float,
)
from .triangulation import (
    ALL_PERMS,
    VERTEX_EDGES,
    IdealTriangulation,
    UnionFind,
    build_triangulation,
    from_dict,
    map_edge,
    perm_sign,
)

# Two tetrahedra, one edge of valence 12, genus-2 boundary.
ONE_EDGE = {
    "tets": 2,
    "gluings": [
        {"from": [0, 0], "to": [1, 1], "perm": [1, 3, 0, 2]},
        {"from": [0, 1], "to": [0, 2], "perm": [1, 2, 3, 0]},
        {"from": [0, 3], "to": [1, 0], "perm": [1, 2, 3, 0]},
        {"from": [1, 2], "to": [1, 3], "perm": [2, 0, 3, 1]},
    ],
}

# Four tetrahedra, three edges of valence 8, genus-2 boundary.
VALENCE_EIGHT = {
    "tets": 4,
    "gluings": [
        {"from": [0, 0], "to": [1, 1], "perm": [1, 0, 2, 3]},
        {"from": [0, 1], "to": [0, 2], "perm": [1, 2, 3, 0]},
        {"from": [0, 3], "to": [2, 3], "perm": [1, 0, 2, 3]},
        {"from": [1, 0], "to": [3, 3], "perm": [3, 1, 2, 0]},
        {"from": [1, 2], "to": [1, 3], "perm": [2, 0, 3, 1]},
        {"from": [2, 0], "to": [3, 1], "perm": [1, 3, 0, 2]},
        {"from": [2, 1], "to": [2, 2], "perm": [1, 2, 3, 0]},
        {"from": [3, 0], "to": [3, 2], "perm": [2, 3, 1, 0]},
    ],
}


def one_edge() -> IdealTriangulation:
    return from_dict(ONE_EDGE)


def valence_eight() -> IdealTriangulation:
    return from_dict(VALENCE_EIGHT)


def random_triangulation(n: int, rng: random.Random, oriented: bool = True) -> IdealTriangulation:
    faces = [(t, f) for t in range(n) for f in range(4)]
    rng.shuffle(faces)
    gluings = []
    for i in range(0, len(faces), 2):
        (t, f), (t2, f2) = faces[i], faces[i + 1]
        perms = [p for p in ALL_PERMS if p[f] == f2 and (not oriented or perm_sign(p) < 0)]
        gluings.append(((t, f), (t2, f2), rng.choice(perms)))
    return build_triangulation(n, gluings, require_oriented=oriented)


def search(
    n: int, predicate: Callable[[IdealTriangulation], bool], rng: random.Random, tries: int = 200_000
) -> IdealTriangulation:
    for _ in range(tries):
        tri = random_triangulation(n, rng)
        if predicate(tri):
            return tri
    raise RuntimeError(f"no {n}-tetrahedron triangulation found in {tries} tries")


def is_connected(tri: IdealTriangulation) -> bool:
    uf = UnionFind(tri.tet_count)
    for g in tri.gluings:
        uf.union(g.src[0], g.dst[0])
    return len(uf.groups()) == 1


def edge_holonomy(tri: IdealTriangulation, shift: dict[tuple[int, int], int], k: int) -> list[int]:
    """Total cocycle shift around each edge class (mod k)."""
    out = []
    for ec in tri.edge_classes:
        c0 = ec.corners[0]
        t, e = c0.tet, c0.edge
        a, b = (x for x in range(4) if x not in _verts(e))
        tet, edge, exit_face, other = t, e, a, b
        total = 0
        while True:
            total += shift[tet, exit_face]
            t2, _, perm = tri.glued(tet, exit_face)
            tet, edge, exit_face, other = t2, map_edge(perm, edge), perm[other], perm[exit_face]
            if (tet, edge, exit_face) == (t, e, a):
                break
        out.append(total % k)
    return out


def _verts(e: int) -> tuple[int, int]:
    from .triangulation import EDGE_VERTICES

    return EDGE_VERTICES[e]


def cyclic_cover(tri: IdealTriangulation, k: int, rng: random.Random, tries: int = 20_000) -> IdealTriangulation:
    """A connected k-fold cyclic cover in which every edge lifts with its valence.

    Tetrahedron ``(t, i)`` of the cover gets id ``t * k + i``.
    """
    gl = tri.gluings
    for _ in range(tries):
        shift = {}
        for g in gl:
            s = rng.randrange(k)
            shift[g.src] = s
            shift[g.dst] = (-s) % k
        if any(edge_holonomy(tri, shift, k)):
            continue
        records = []
        for g in gl:
            for i in range(k):
                j = (i + shift[g.src]) % k
                records.append(((g.src[0] * k + i, g.src[1]), (g.dst[0] * k + j, g.dst[1]), g.perm))
        cover = build_triangulation(tri.tet_count * k, records)
        if is_connected(cover):
            return cover
    raise RuntimeError(f"no connected {k}-fold cover with trivial edge holonomy found")


def valence_eight_family(copies: int, seed: int = 0) -> IdealTriangulation:
    """Connected triangulation with ``4 * copies`` tetrahedra, every edge of valence 8."""
    base = valence_eight()
    if copies == 1:
        return base
    return cyclic_cover(base, copies, random.Random(seed))


def low_valence(n: int, seed: int = 0) -> IdealTriangulation:
    """Random connected triangulation with some edge class of valence 1 or 2."""
    rng = random.Random(seed)
    return search(n, lambda T: is_connected(T) and min(c.valence for c in T.edge_classes) <= 2, rng)


def random_strict_direction(
    tri: IdealTriangulation, values: list, free: list[int], rng: random.Random, scale: int = 6
) -> list[Fraction]:
    """Random rational direction that keeps every edge sum fixed."""
    delta = [Fraction(0)] * len(values)
    free_set = set(free)
    for ec in tri.edge_classes:
        slots = [c.slot for c in ec.corners if c.slot in free_set]
        if len(slots) < 2:
            continue
        raw = [rng.randint(-scale, scale) for _ in slots]
        mean = Fraction(sum(raw), len(raw))
        for s, r in zip(slots, raw):
            delta[s] = r - mean
    return delta


def max_strict_step(tri: IdealTriangulation, values: list, delta: list, hyperideal_tets: list[int]) -> Fraction | None:
    """Largest step keeping positivity and vertex sums < 1 on the given tetrahedra."""
    best = None
    for t in hyperideal_tets:
        for e in range(6):
            s = 6 * t + e
            if delta[s] < 0:
                bound = values[s] / -delta[s]
                best = bound if best is None else min(best, bound)
        for v in range(4):
            slots = [6 * t + e for e in VERTEX_EDGES[v]]
            d = sum(delta[s] for s in slots)
            if d > 0:
                bound = (1 - sum(values[s] for s in slots)) / d
                best = bound if best is None else min(best, bound)
    return best


def jiggle(tri, values, hyperideal_tets, rng) -> list:
    """Move an interior point a random fraction of the way to the boundary."""
    free = [6 * t + e for t in hyperideal_tets for e in range(6)]
    delta = random_strict_direction(tri, values, free, rng)
    step = max_strict_step(tri, values, delta, hyperideal_tets)
    if not step:
        return list(values)
    frac = Fraction(rng.randint(1, 9), 10)
    return [v + frac * step * d for v, d in zip(values, delta)]


def float_max_slack(poly: AnglePolytope) -> float | None:
    """Floating-point optimum of the max-slack program; a cheap prefilter."""
    out = solve_float(poly)
    return None if out is None else float(out.slack)


def random_partially_flat(
    tri: IdealTriangulation, rng: random.Random, flat_count: int = 1
) -> PartiallyFlatAssignment | None:
    """A random exact partially flat assignment with ``flat_count`` flat tetrahedra, if the
    chosen flats admit one."""
    flats = rng.sample(range(tri.tet_count), flat_count)
    fixed = {}
    for t in flats:
        for e, v in enumerate(flat_pattern(rng.randrange(3))):
            fixed[6 * t + e] = v
    poly = build_polytope(tri, fixed)
    if any(not slots for _, slots, _ in poly.equalities):
        return None
    approx = float_max_slack(poly)
    if approx is None or approx < 1e-9:
        return None
    outcome = solve(poly)
    if outcome.status != "strictly_feasible":
        return None
    hyper = [t for t in range(tri.tet_count) if t not in flats]
    values = jiggle(tri, outcome.witness.values, hyper, rng)
    tags = [FLAT if t in flats else HYPERIDEAL for t in range(tri.tet_count)]
    beta = PartiallyFlatAssignment(values, tags)
    if check_partially_flat(tri, beta):
        return None
    return beta


def partially_flat_suite(count: int, seed: int = 0, max_tets: int = 6):
    """``count`` pairs (triangulation, beta) over random triangulations with 2..max_tets tetrahedra."""
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        n = rng.randint(2, max_tets)
        tri = random_triangulation(n, rng)
        flats = rng.randint(1, max(1, n // 3))
        beta = random_partially_flat(tri, rng, flats)
        if beta is not None:
            out.append((tri, beta))
    return out


def random_strict(tri: IdealTriangulation, base: list, rng: random.Random, rounds: int = 3) -> list:
    """Random strict angle structure near ``base`` (a strict structure, exact)."""
    values = list(base)
    tets = list(range(tri.tet_count))
    for _ in range(rounds):
        values = jiggle(tri, values, tets, rng)
    return values


# Two boundary components (genus 5 and genus 2) with a strict angle structure.
TWO_BOUNDARY = {
    "tets": 7,
    "gluings": [
        {"from": [0, 0], "to": [5, 3], "perm": [3, 2, 0, 1]},
        {"from": [0, 1], "to": [1, 2], "perm": [0, 2, 1, 3]},
        {"from": [0, 2], "to": [3, 2], "perm": [3, 1, 2, 0]},
        {"from": [0, 3], "to": [4, 2], "perm": [3, 0, 1, 2]},
        {"from": [1, 0], "to": [6, 2], "perm": [2, 0, 3, 1]},
        {"from": [1, 1], "to": [5, 2], "perm": [1, 2, 3, 0]},
        {"from": [1, 3], "to": [4, 1], "perm": [0, 3, 2, 1]},
        {"from": [2, 0], "to": [4, 0], "perm": [0, 1, 3, 2]},
        {"from": [2, 1], "to": [3, 3], "perm": [1, 3, 0, 2]},
        {"from": [2, 2], "to": [5, 1], "perm": [0, 2, 1, 3]},
        {"from": [2, 3], "to": [6, 3], "perm": [0, 2, 1, 3]},
        {"from": [3, 0], "to": [4, 3], "perm": [3, 1, 2, 0]},
        {"from": [3, 1], "to": [6, 0], "perm": [2, 0, 3, 1]},
        {"from": [5, 0], "to": [6, 1], "perm": [1, 0, 2, 3]},
    ],
}


def two_boundary() -> IdealTriangulation:
    return from_dict(TWO_BOUNDARY)


# -- polyhedral decompositions ----------------------------------------------------


def heptagon_pyramids() -> dict:
    """Two heptagonal pyramids glued along everything.

    The first is coned from a base vertex labelled 0. The second cones the
    shared heptagon from the vertex matched with 4, which forces three flat
    layers on that face.
    """
    base = list(range(7))
    sides = [[7, k, (k + 1) % 7] for k in range(7)]
    cell = {"vertices": list(range(8)), "faces": [base] + sides}
    phi = {k: (4 - k) % 7 for k in range(7)}
    phi[7] = 7
    pairings = [{"from": [0, 0], "to": [1, 0], "correspondence": [phi[k] for k in base]}]
    for f, face in enumerate(sides, start=1):
        image = [phi[x] for x in face]
        target = next(i for i, g in enumerate(cell["faces"]) if set(g) == set(image))
        pairings.append({"from": [0, f], "to": [1, target], "correspondence": image})
    return {"cells": [cell, cell], "pairings": pairings}


def cube_radius(angle: float) -> float:
    """Klein-model half side of the regular hyperideal cube with the given dihedral angle."""
    c = np.cos(angle)
    return float(np.sqrt(c / (1 + c)))


def regular_cube(angle: float) -> dict:
    """Vertex ``b`` sits at ``(1, +-r, +-r, +-r)`` with the sign of coordinate k read off bit k."""
    r = cube_radius(angle)
    coords = [[1.0] + [(-r if (b >> k) & 1 else r) for k in range(3)] for b in range(8)]
    faces = []
    for k in range(3):
        i, j = (x for x in range(3) if x != k)
        for s in (0, 1):
            cyc = [(0, 0), (1, 0), (1, 1), (0, 1)]
            faces.append([(s << k) | (a << i) | (b << j) for a, b in cyc])
    return {"vertices": coords, "faces": faces}


def _cube_edge_classes(faces: list[list[int]], pairings: list[tuple]) -> list[int]:
    edges = sorted({frozenset((f[i], f[(i + 1) % 4])) for f in faces for i in range(4)}, key=sorted)
    index = {(c, e): 12 * c + n for c in range(2) for n, e in enumerate(edges)}
    uf = UnionFind(24)
    for (ca, fa), (cb, _), corr in pairings:
        src = faces[fa]
        for i in range(4):
            a, b = src[i], src[(i + 1) % 4]
            j = src.index(a), src.index(b)
            uf.union(index[ca, frozenset((a, b))], index[cb, frozenset((corr[j[0]], corr[j[1]]))])
    return sorted(len(g) for g in uf.groups())


def two_cube_decomposition(angle: float = np.pi / 4, seed: int = 0, tries: int = 200_000) -> dict:
    """Two regular hyperideal cubes glued so every edge class has ``2pi / angle`` cube edges.

    Gluings are drawn at random; the returned one also builds an orientable
    layered triangulation.
    """
    from .layered import LayeredError, build, decomposition_from_dict

    cube = regular_cube(angle)
    faces = cube["faces"]
    valence = round(2 * np.pi / angle)
    rng = random.Random(seed)
    slots = [(c, f) for c in range(2) for f in range(6)]
    for _ in range(tries):
        rng.shuffle(slots)
        pairings = []
        for i in range(0, 12, 2):
            (ca, fa), (cb, fb) = slots[i], slots[i + 1]
            dst = faces[fb]
            rot, rev = rng.randrange(4), rng.random() < 0.5
            cyc = dst[rot:] + dst[:rot]
            if rev:
                cyc = [cyc[0]] + cyc[1:][::-1]
            pairings.append(((ca, fa), (cb, fb), cyc))
        if any(n != valence for n in _cube_edge_classes(faces, pairings)):
            continue
        data = {
            "cells": [cube, cube],
            "pairings": [{"from": list(a), "to": list(b), "correspondence": c} for a, b, c in pairings],
        }
        try:
            build(decomposition_from_dict(data))
        except LayeredError:
            continue
        return data
    raise RuntimeError("no two-cube gluing found")
