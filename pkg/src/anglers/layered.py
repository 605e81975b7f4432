"""Layered triangulations of polyhedral decompositions.

Each cell is coned from its lowest vertex. A face that avoids the apex is
coned from its own lowest vertex. Two cells that share a face may cone it
from different vertices. Then flat tetrahedra, one per diagonal switch, are
stacked between the two fans.

Vertex labels are ``(cell, vertex id)``. A flat tetrahedron on a shared face
uses the labels of the cell on the ``from`` side of the pairing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .angles import FLAT, HYPERIDEAL, PartiallyFlatAssignment, edge_profiles, LemmaViolation
from .geometry import EdgeMissesHyperbolicSpace, GeometryError, angles_from_vertices
from .triangulation import EDGE_INDEX, EDGE_VERTICES, IdealTriangulation, build_triangulation, perm_sign

Label = tuple[int, int]


class LayeredError(ValueError):
    pass


class DiagonalMissesHyperbolicSpace(LayeredError):
    def __init__(self, cell: int, pair: tuple[int, int]):
        super().__init__(f"cell {cell}: segment between vertices {pair[0]} and {pair[1]} misses hyperbolic space")
        self.cell = cell
        self.pair = pair


@dataclass
class PolyhedralCell:
    vertices: list[int]
    faces: list[list[int]]
    coords: dict[int, np.ndarray] | None = None
    id: int = 0

    def edges(self) -> dict[frozenset, int]:
        count: dict[frozenset, int] = {}
        for face in self.faces:
            for a, b in zip(face, face[1:] + face[:1]):
                key = frozenset((a, b))
                count[key] = count.get(key, 0) + 1
        return count

    def check(self) -> None:
        known = set(self.vertices)
        if len(known) != len(self.vertices):
            raise LayeredError(f"cell {self.id}: repeated vertex id")
        for i, face in enumerate(self.faces):
            if len(face) < 3 or len(set(face)) != len(face):
                raise LayeredError(f"cell {self.id}: degenerate face {i}")
            if not set(face) <= known:
                raise LayeredError(f"cell {self.id}: face {i} uses unknown vertices")
        edges = self.edges()
        bad = [tuple(sorted(e)) for e, n in edges.items() if n != 2]
        if bad:
            raise LayeredError(f"cell {self.id}: edges {bad[:3]} do not lie on exactly two faces")
        used = {v for f in self.faces for v in f}
        if len(used) - len(edges) + len(self.faces) != 2:
            raise LayeredError(f"cell {self.id}: face lattice is not a sphere")
        if self.coords is not None and set(self.coords) != known:
            raise LayeredError(f"cell {self.id}: coordinates missing for some vertices")

    @property
    def apex(self) -> int:
        return min(self.vertices)


@dataclass
class FacePairing:
    src: tuple[int, int]  # (cell, face index)
    dst: tuple[int, int]
    correspondence: list[int]  # vertex of dst matched with the i-th vertex of the src face


@dataclass
class Decomposition:
    cells: list[PolyhedralCell]
    pairings: list[FacePairing]

    def to_dict(self) -> dict:
        cells = []
        for c in self.cells:
            if c.coords is not None and c.vertices == list(range(len(c.vertices))):
                verts = [[float(x) for x in c.coords[v]] for v in c.vertices]
            else:
                verts = list(c.vertices)
            cells.append({"vertices": verts, "faces": [list(f) for f in c.faces]})
        pairs = [
            {"from": list(p.src), "to": list(p.dst), "correspondence": list(p.correspondence)} for p in self.pairings
        ]
        return {"cells": cells, "pairings": pairs}


def decomposition_from_dict(data: Mapping) -> Decomposition:
    try:
        cells = []
        for i, raw in enumerate(data["cells"]):
            verts = raw["vertices"]
            coords = None
            if verts and all(isinstance(v, (list, tuple)) for v in verts):
                coords = {k: np.asarray(v, dtype=float) for k, v in enumerate(verts)}
                if any(c.shape != (4,) for c in coords.values()):
                    raise LayeredError(f"cell {i}: coordinates must have four entries")
                ids = list(range(len(verts)))
            else:
                ids = [int(v) for v in verts]
            faces = [[int(v) for v in f] for f in raw["faces"]]
            cells.append(PolyhedralCell(ids, faces, coords, i))
        pairings = [
            FacePairing(
                (int(p["from"][0]), int(p["from"][1])),
                (int(p["to"][0]), int(p["to"][1])),
                [int(v) for v in p["correspondence"]],
            )
            for p in data["pairings"]
        ]
    except (KeyError, TypeError, IndexError, ValueError) as exc:
        if isinstance(exc, LayeredError):
            raise
        raise LayeredError(f"malformed decomposition: {exc}") from exc
    return Decomposition(cells, pairings)


# -- coning ----------------------------------------------------------------------


@dataclass(frozen=True)
class Fan:
    cone_vertex: int
    triangles: tuple[tuple[int, int, int], ...]


def face_triangulation(cell: PolyhedralCell, face: int, apex: int | None = None) -> Fan:
    """Fan of a face: from the apex if the face contains it, else from its lowest vertex."""
    apex = cell.apex if apex is None else apex
    cyc = cell.faces[face]
    w = apex if apex in cyc else min(cyc)
    i = cyc.index(w)
    rot = cyc[i:] + cyc[:i]
    return Fan(w, tuple((w, rot[k], rot[k + 1]) for k in range(1, len(rot) - 1)))


@dataclass(frozen=True)
class ConeTet:
    cell: int
    apex: int
    base_face: int
    base_vertex: int
    vertices: tuple[int, int, int, int]  # apex first, then a fan triangle


def cone_cell(cell: PolyhedralCell, apex: int | None = None) -> list[ConeTet]:
    apex = cell.apex if apex is None else apex
    if apex not in cell.vertices:
        raise LayeredError(f"apex {apex} is not a vertex of cell {cell.id}")
    out = []
    for f, face in enumerate(cell.faces):
        if apex in face:
            continue
        fan = face_triangulation(cell, f, apex)
        for tri in fan.triangles:
            out.append(ConeTet(cell.id, apex, f, fan.cone_vertex, (apex,) + tri))
    return out


@dataclass(frozen=True)
class FlatLayer:
    vertices: tuple[int, int, int, int]  # (v, x_k, x_{k+1}, v')
    arc: str  # "u" or "w"
    switch: int  # k, starting at 1
    old_diagonal: tuple[int, int]
    new_diagonal: tuple[int, int]


def insert_flat_layers(polygon: Sequence[int], v: int, v_prime: int) -> list[FlatLayer]:
    """Flat tetrahedra turning the fan at ``v_prime`` into the fan at ``v``.

    ``polygon`` is the cyclic vertex list of the face. Going around it from
    ``v`` one meets ``u_1..u_i`` before ``v_prime`` and then ``w_j..w_1``.
    Switch k on the u-arc replaces the diagonal ``v' u_k`` by ``v u_{k+1}``.
    The w-arc works the same way.
    """
    poly = list(polygon)
    if v not in poly or v_prime not in poly:
        raise LayeredError("cone vertices are not on the polygon")
    if v == v_prime:
        return []
    i0 = poly.index(v)
    rot = poly[i0:] + poly[:i0]
    p = rot.index(v_prime)
    u = rot[1:p]
    w = list(reversed(rot[p + 1:]))
    layers = []
    for arc, seq in (("u", u), ("w", w)):
        for k in range(1, len(seq)):
            a, b = seq[k - 1], seq[k]
            layers.append(FlatLayer((v, a, b, v_prime), arc, k, (v_prime, a), (v, b)))
    return layers


# -- assembly ----------------------------------------------------------------------


@dataclass
class LayeredOutput:
    triangulation: IdealTriangulation
    tags: list[str]
    provenance: list[dict]
    labels: list[tuple[Label, ...]]
    beta: PartiallyFlatAssignment | None = None
    flat_values: dict[int, Fraction] = field(default_factory=dict)  # slot -> 0 or 1
    flats_per_pairing: list[int] = field(default_factory=list)

    @property
    def flat_count(self) -> int:
        return sum(tag == FLAT for tag in self.tags)

    def provenance_dict(self) -> dict:
        return {"tetrahedra": self.provenance, "flats_per_pairing": self.flats_per_pairing}

    def tags_dict(self) -> dict:
        from .triangulation import Corner

        return {
            "mode": "rational-pi",
            "tags": {str(t): tag for t, tag in enumerate(self.tags)},
            "values": {Corner.from_slot(s).key: str(v) for s, v in sorted(self.flat_values.items())},
        }


def _check_correspondence(src: Sequence[int], dst: Sequence[int], corr: Sequence[int]) -> None:
    n = len(dst)
    if len(src) != n or sorted(corr) != sorted(dst):
        raise LayeredError("pairing correspondence is not a bijection of the two faces")
    pos = [dst.index(x) for x in corr]
    step = (pos[1] - pos[0]) % n
    if step not in (1, n - 1) or any((pos[i + 1] - pos[i]) % n != step for i in range(n - 1)):
        raise LayeredError("pairing correspondence does not respect the cyclic order")


class _Assembler:
    def __init__(self, decomp: Decomposition):
        self.decomp = decomp
        self.labels: list[list[Label]] = []
        self.prov: list[dict] = []
        self.flat_diagonals: dict[int, tuple[frozenset, frozenset]] = {}
        # (t1, f1, t2, f2, perm) in the initial vertex order
        self.gluings: list[tuple[int, int, int, int, tuple[int, ...]]] = []

    def add_tet(self, labels: Sequence[Label], prov: dict) -> int:
        self.labels.append(list(labels))
        self.prov.append(prov)
        return len(self.labels) - 1

    def face_of(self, t: int, tri: frozenset) -> int:
        (f,) = [i for i, lab in enumerate(self.labels[t]) if lab not in tri]
        return f

    def glue(self, a: tuple[int, int, dict], b: tuple[int, int, dict]) -> None:
        """Glue two exposed faces; each carries a map from its tet labels to common labels."""
        (t1, f1, m1), (t2, f2, m2) = a, b
        inv2 = {common: own for own, common in m2.items()}
        perm = [0] * 4
        perm[f1] = f2
        for i, lab in enumerate(self.labels[t1]):
            if i != f1:
                perm[i] = self.labels[t2].index(inv2[m1[lab]])
        self.gluings.append((t1, f1, t2, f2, tuple(perm)))


def build(decomp: Decomposition, geometric: bool = False) -> LayeredOutput:
    """Cone every cell, stack flat layers on mismatched faces, glue everything.

    With ``geometric=True`` the cone tetrahedra get dihedral angles from the
    vertex coordinates and the flat ones get their flat pattern.
    """
    cells = decomp.cells
    for c in cells:
        c.check()
        if geometric and c.coords is None:
            raise LayeredError(f"cell {c.id} has no coordinates")
    asm = _Assembler(decomp)
    # cone tetrahedra and their faces keyed by label triple
    exposed: dict[int, dict[frozenset, tuple[int, int]]] = {}
    for c in cells:
        inside: dict[frozenset, tuple[int, int]] = {}
        boundary: dict[frozenset, tuple[int, int]] = {}
        cone = cone_cell(c)
        face_triangles = {}
        for f in range(len(c.faces)):
            for tri in face_triangulation(c, f).triangles:
                face_triangles[frozenset((c.id, v) for v in tri)] = f
        for ct in cone:
            labs = [(c.id, v) for v in ct.vertices]
            t = asm.add_tet(
                labs,
                {"kind": "cone", "cell": c.id, "apex": ct.apex, "base_face": ct.base_face,
                 "base_vertex": ct.base_vertex, "vertices": list(ct.vertices)},
            )
            for f in range(4):
                tri = frozenset(lab for i, lab in enumerate(labs) if i != f)
                if tri in face_triangles:
                    boundary[tri] = (t, f)
                elif tri in inside:
                    t2, f2 = inside.pop(tri)
                    ident = {lab: lab for lab in labs}
                    asm.glue((t2, f2, {lab: lab for lab in asm.labels[t2]}), (t, f, ident))
                else:
                    inside[tri] = (t, f)
        if inside:
            raise LayeredError(f"cell {c.id}: coning left unmatched interior triangles")
        exposed[c.id] = boundary

    seen_faces = set()
    flats_per_pairing = []
    for p_idx, pair in enumerate(decomp.pairings):
        (ca, fa), (cb, fb) = pair.src, pair.dst
        for key in (pair.src, pair.dst):
            if key in seen_faces:
                raise LayeredError(f"face {key} is paired twice")
            if not (0 <= key[0] < len(cells) and 0 <= key[1] < len(cells[key[0]].faces)):
                raise LayeredError(f"pairing refers to missing face {key}")
            seen_faces.add(key)
        A, B = cells[ca], cells[cb]
        face_a, face_b = A.faces[fa], B.faces[fb]
        _check_correspondence(face_a, face_b, pair.correspondence)
        to_a = {(cb, y): (ca, x) for x, y in zip(face_a, pair.correspondence)}
        fan_a = face_triangulation(A, fa)
        fan_b = face_triangulation(B, fb)
        v = fan_a.cone_vertex
        v_prime = to_a[cb, fan_b.cone_vertex][1]
        # the stack starts on B's side: its fan triangles, in A's labels
        current: dict[frozenset, tuple[int, int, dict]] = {}
        for tri in fan_b.triangles:
            key_b = frozenset((cb, y) for y in tri)
            t, f = exposed[cb].pop(key_b)
            m = {lab: to_a.get(lab, lab) for lab in asm.labels[t]}
            current[frozenset(to_a[lab] for lab in key_b)] = (t, f, m)
        layers = insert_flat_layers(face_a, v, v_prime)
        flats_per_pairing.append(len(layers))
        for k, layer in enumerate(layers):
            labs = [(ca, x) for x in layer.vertices]
            t = asm.add_tet(
                labs,
                {"kind": "flat", "pairing": p_idx, "arc": layer.arc, "switch": layer.switch,
                 "vertices": list(layer.vertices), "faces": [list(pair.src), list(pair.dst)]},
            )
            asm.flat_diagonals[t] = (
                frozenset((ca, x) for x in layer.old_diagonal),
                frozenset((ca, x) for x in layer.new_diagonal),
            )
            ident = {lab: lab for lab in labs}
            vv, a, b, vp = labs
            for bottom in (frozenset((vv, a, vp)), frozenset((a, b, vp))):
                if bottom not in current:
                    raise LayeredError(f"pairing {p_idx}: layer {k} does not sit on the current fan")
                asm.glue(current.pop(bottom), (t, asm.face_of(t, bottom), ident))
            for top in (frozenset((vv, a, b)), frozenset((vv, b, vp))):
                current[top] = (t, asm.face_of(t, top), ident)
        for tri in fan_a.triangles:
            key_a = frozenset((ca, x) for x in tri)
            if key_a not in current:
                raise LayeredError(f"pairing {p_idx}: fans do not match after the flat layers")
            t, f = exposed[ca].pop(key_a)
            asm.glue(current.pop(key_a), (t, f, {lab: lab for lab in asm.labels[t]}))
    leftover = [(c, f) for c in exposed for f in exposed[c].values()]
    if leftover:
        raise LayeredError(f"{len(leftover)} cell face triangles are not paired")

    tri, labels = _orient_and_build(asm)
    tags = [FLAT if p["kind"] == "flat" else HYPERIDEAL for p in asm.prov]
    flat_values = {}
    for t, (old, new) in asm.flat_diagonals.items():
        for e, (i, j) in enumerate(EDGE_VERTICES):
            pair = frozenset((labels[t][i], labels[t][j]))
            flat_values[6 * t + e] = Fraction(1) if pair in (old, new) else Fraction(0)
    out = LayeredOutput(tri, tags, asm.prov, labels, None, flat_values, flats_per_pairing)
    _check_lemma(out)
    if geometric:
        out.beta = _geometric_beta(decomp, out)
    return out


def _orient_and_build(asm: _Assembler) -> tuple[IdealTriangulation, list[tuple[Label, ...]]]:
    n = len(asm.labels)
    flip: list[int | None] = [None] * n
    adj: dict[int, list[tuple[int, int]]] = {t: [] for t in range(n)}
    for t1, _, t2, _, perm in asm.gluings:
        need = 1 if perm_sign(perm) > 0 else 0  # even perms need exactly one flipped end
        adj[t1].append((t2, need))
        adj[t2].append((t1, need))
    for root in range(n):
        if flip[root] is not None:
            continue
        flip[root] = 0
        stack = [root]
        while stack:
            t = stack.pop()
            for u, need in adj[t]:
                want = flip[t] ^ need
                if flip[u] is None:
                    flip[u] = want
                    stack.append(u)
                elif flip[u] != want:
                    raise LayeredError("the layered triangulation is not orientable")
    swap = (0, 1, 3, 2)
    ident = (0, 1, 2, 3)
    sigma = [swap if f else ident for f in flip]
    records = []
    for t1, f1, t2, f2, perm in asm.gluings:
        s1, s2 = sigma[t1], sigma[t2]
        new = [0] * 4
        for i in range(4):
            new[s1[i]] = s2[perm[i]]
        records.append(((t1, s1[f1]), (t2, s2[f2]), tuple(new)))
    labels = []
    for t in range(n):
        labs = [None] * 4
        for i in range(4):
            labs[sigma[t][i]] = asm.labels[t][i]
        labels.append(tuple(labs))
    return build_triangulation(n, records), labels


def _check_lemma(out: LayeredOutput) -> None:
    tri = out.triangulation
    for ec in tri.edge_classes:
        if all(out.tags[c.tet] == FLAT for c in ec.corners):
            raise LemmaViolation(ec.id)


def _geometric_beta(decomp: Decomposition, out: LayeredOutput, tol: float = 1e-9) -> PartiallyFlatAssignment:
    tri = out.triangulation
    values: list = [None] * (6 * tri.tet_count)
    for t, labs in enumerate(out.labels):
        if out.tags[t] == FLAT:
            for e in range(6):
                values[6 * t + e] = out.flat_values[6 * t + e]
            continue
        cell = labs[0][0]
        coords = [decomp.cells[cell].coords[v] for _, v in labs]
        try:
            angles = angles_from_vertices(coords)
        except EdgeMissesHyperbolicSpace as exc:
            i, j = exc.pair
            raise DiagonalMissesHyperbolicSpace(cell, (labs[i][1], labs[j][1])) from exc
        except GeometryError as exc:
            raise LayeredError(f"cell {cell}: {exc}") from exc
        for e in range(6):
            values[6 * t + e] = float(angles[e]) / math.pi
    beta = PartiallyFlatAssignment(values, list(out.tags))
    for ec in tri.edge_classes:
        total = sum(float(values[c.slot]) for c in ec.corners)
        if abs(total - 2) * math.pi > tol:
            raise LayeredError(f"edge e{ec.id}: angle sum {total:.12g}pi differs from 2pi")
    edge_profiles(tri, beta)
    return beta
