"""Ideal triangulations as face gluings of truncated tetrahedra.

Vertices of a tetrahedron are 0..3. Face ``i`` is the hexagonal face opposite
vertex ``i``; the truncation triangle at vertex ``i`` is external face ``i``.
Edges are numbered by their vertex pair in lexicographic order, so edge ``i``
and edge ``5 - i`` are opposite.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from itertools import permutations
from typing import Iterable, Mapping, Sequence

EDGE_VERTICES: tuple[tuple[int, int], ...] = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))
EDGE_INDEX: dict[tuple[int, int], int] = {}
for _i, (_a, _b) in enumerate(EDGE_VERTICES):
    EDGE_INDEX[_a, _b] = EDGE_INDEX[_b, _a] = _i
VERTEX_EDGES: tuple[tuple[int, int, int], ...] = tuple(
    tuple(i for i, pair in enumerate(EDGE_VERTICES) if v in pair) for v in range(4)
)
ALL_PERMS: tuple[tuple[int, ...], ...] = tuple(permutations(range(4)))


class TriangulationError(ValueError):
    pass


def edge_index(a: int, b: int) -> int:
    return EDGE_INDEX[a, b]


def opposite_edge(e: int) -> int:
    return 5 - e


def perm_sign(perm: Sequence[int]) -> int:
    sign = 1
    seen = [False] * len(perm)
    for i in range(len(perm)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def perm_inverse(perm: Sequence[int]) -> tuple[int, ...]:
    inv = [0] * len(perm)
    for i, p in enumerate(perm):
        inv[p] = i
    return tuple(inv)


def map_edge(perm: Sequence[int], e: int) -> int:
    a, b = EDGE_VERTICES[e]
    return EDGE_INDEX[perm[a], perm[b]]


class UnionFind:
    def __init__(self, size: int):
        self.parent = list(range(size))

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            # keep the smaller representative so component order is stable
            if rb < ra:
                ra, rb = rb, ra
            self.parent[rb] = ra

    def groups(self) -> list[list[int]]:
        out: dict[int, list[int]] = {}
        for x in range(len(self.parent)):
            out.setdefault(self.find(x), []).append(x)
        return [out[k] for k in sorted(out)]


@dataclass(frozen=True)
class FaceGluing:
    src: tuple[int, int]
    dst: tuple[int, int]
    perm: tuple[int, ...]

    def inverse(self) -> FaceGluing:
        return FaceGluing(self.dst, self.src, perm_inverse(self.perm))

    @property
    def odd(self) -> bool:
        return perm_sign(self.perm) < 0


@dataclass(frozen=True, order=True)
class Corner:
    tet: int
    edge: int

    @property
    def slot(self) -> int:
        return 6 * self.tet + self.edge

    @property
    def key(self) -> str:
        return f"{self.tet}.{self.edge}"

    @classmethod
    def from_slot(cls, slot: int) -> Corner:
        return cls(slot // 6, slot % 6)

    @classmethod
    def parse(cls, key: str) -> Corner:
        t, e = key.split(".")
        return cls(int(t), int(e))


@dataclass(frozen=True)
class EdgeClass:
    id: int
    corners: tuple[Corner, ...]
    reversed_self: bool = False

    @property
    def valence(self) -> int:
        return len(self.corners)


@dataclass
class ValidationReport:
    failures: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    edge_table: list[tuple[int, int, list[str]]] = field(default_factory=list)
    boundary: list[tuple[int, int]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def format(self) -> str:
        lines = ["edge classes:"]
        for cid, valence, corners in self.edge_table:
            lines.append(f"  e{cid}  valence {valence:2d}  " + " ".join(corners))
        lines.append("boundary components:")
        for comp, chi in self.boundary:
            lines.append(f"  b{comp}  chi = {chi}")
        lines.extend(f"FAIL: {msg}" for msg in self.failures)
        lines.extend(f"WARNING: {msg}" for msg in self.warnings)
        return "\n".join(lines)


class IdealTriangulation:
    """Closed-interior gluing of ``tet_count`` truncated tetrahedra.

    Instances are immutable after construction; use :func:`build_triangulation`.
    """

    def __init__(self, tet_count: int, table: Mapping[tuple[int, int], tuple[int, int, tuple[int, ...]]]):
        self.tet_count = tet_count
        self._table = dict(table)
        self.edge_classes, self._corner_class = self._walk_edges()

    def glued(self, tet: int, face: int) -> tuple[int, int, tuple[int, ...]]:
        """Return ``(tet2, face2, perm)`` for the gluing leaving ``(tet, face)``."""
        return self._table[tet, face]

    @property
    def gluings(self) -> list[FaceGluing]:
        """One gluing per unordered face pair, from the smaller face."""
        out = []
        for (t, f), (t2, f2, perm) in sorted(self._table.items()):
            if (t, f) <= (t2, f2):
                out.append(FaceGluing((t, f), (t2, f2), perm))
        return out

    @property
    def corners(self) -> list[Corner]:
        return [Corner(t, e) for t in range(self.tet_count) for e in range(6)]

    @property
    def oriented(self) -> bool:
        return all(g.odd for g in self.gluings)

    def edge_class_of(self, corner: Corner) -> int:
        return self._corner_class[corner.slot]

    def edge_class_of_slot(self, slot: int) -> int:
        return self._corner_class[slot]

    def _walk_edges(self) -> tuple[tuple[EdgeClass, ...], list[int]]:
        n = 6 * self.tet_count
        owner = [-1] * n
        classes: list[EdgeClass] = []
        for start in range(n):
            if owner[start] >= 0:
                continue
            cid = len(classes)
            t, e = divmod(start, 6)
            a, b = EDGE_VERTICES[e]
            c, d = (x for x in range(4) if x not in (a, b))
            flag0 = (t, e, c)
            order: list[int] = []
            seen_twice = False
            tet, edge, exit_face, other = t, e, c, d
            while True:
                slot = 6 * tet + edge
                if owner[slot] == cid:
                    seen_twice = True
                else:
                    owner[slot] = cid
                    order.append(slot)
                t2, _, perm = self._table[tet, exit_face]
                # enter through perm[exit_face], leave through the other face at the edge
                tet, edge, exit_face, other = t2, map_edge(perm, edge), perm[other], perm[exit_face]
                if (tet, edge, exit_face) == flag0:
                    break
            classes.append(EdgeClass(cid, tuple(Corner.from_slot(s) for s in order), seen_twice))
        return tuple(classes), owner

    @cached_property
    def _boundary(self) -> tuple[list[int], list[tuple[int, int]], int]:
        tri_uf = UnionFind(4 * self.tet_count)
        end_uf = UnionFind(12 * self.tet_count)
        for (t, f), (t2, _, perm) in self._table.items():
            for v in range(4):
                if v != f:
                    tri_uf.union(4 * t + v, 4 * t2 + perm[v])
            for e, (a, b) in enumerate(EDGE_VERTICES):
                if f in (a, b):
                    continue
                e2 = map_edge(perm, e)
                for end, v in enumerate((a, b)):
                    end2 = EDGE_VERTICES[e2].index(perm[v])
                    end_uf.union(12 * t + 2 * e + end, 12 * t2 + 2 * e2 + end2)
        comps = tri_uf.groups()
        comp_of = [0] * (4 * self.tet_count)
        for cid, members in enumerate(comps):
            for m in members:
                comp_of[m] = cid
        vertices = [0] * len(comps)
        for group in end_uf.groups():
            slot = group[0]
            t, rest = divmod(slot, 12)
            e, end = divmod(rest, 2)
            vertices[comp_of[4 * t + EDGE_VERTICES[e][end]]] += 1
        chis = []
        for cid, members in enumerate(comps):
            faces = len(members)
            chis.append((cid, vertices[cid] - 3 * faces // 2 + faces))
        edge_end_orbits = sum(vertices)
        return comp_of, chis, edge_end_orbits

    def boundary_components(self) -> list[tuple[int, int]]:
        """``(component id, Euler characteristic)`` for each boundary surface."""
        return list(self._boundary[1])

    def boundary_component_of(self, tet: int, vertex: int) -> int:
        return self._boundary[0][4 * tet + vertex]

    @property
    def edge_end_orbits(self) -> int:
        return self._boundary[2]

    def to_dict(self) -> dict:
        return {
            "tets": self.tet_count,
            "gluings": [
                {"from": list(g.src), "to": list(g.dst), "perm": list(g.perm)} for g in self.gluings
            ],
        }

    def __repr__(self) -> str:
        vals = [c.valence for c in self.edge_classes]
        return f"IdealTriangulation(tets={self.tet_count}, valences={vals})"


def _as_gluing(item) -> FaceGluing:
    if isinstance(item, FaceGluing):
        return item
    if isinstance(item, Mapping):
        src, dst, perm = item["from"], item["to"], item["perm"]
    else:
        src, dst, perm = item
    return FaceGluing((int(src[0]), int(src[1])), (int(dst[0]), int(dst[1])), tuple(int(p) for p in perm))


def build_triangulation(
    tet_count: int, gluings: Iterable, require_oriented: bool = True
) -> IdealTriangulation:
    """Build and check a triangulation from face gluings.

    Each unordered face pair may be given once (the inverse is derived) or in
    both directions, in which case the two records must be mutually inverse.
    """
    if tet_count < 1:
        raise TriangulationError("need at least one tetrahedron")
    table: dict[tuple[int, int], tuple[int, int, tuple[int, ...]]] = {}
    explicit: set[tuple[int, int]] = set()
    for item in gluings:
        g = _as_gluing(item)
        for t, f in (g.src, g.dst):
            if not (0 <= t < tet_count and 0 <= f < 4):
                raise TriangulationError(f"face {(t, f)} out of range")
        if sorted(g.perm) != [0, 1, 2, 3]:
            raise TriangulationError(f"{list(g.perm)} is not a permutation of 0..3")
        if g.perm[g.src[1]] != g.dst[1]:
            raise TriangulationError(f"perm {list(g.perm)} does not map face {g.src} to face {g.dst}")
        if g.src == g.dst:
            raise TriangulationError(f"face {g.src} glued to itself")
        if g.src in explicit:
            raise TriangulationError(f"duplicate face {g.src}")
        explicit.add(g.src)
        inv = g.inverse()
        for rec in (g, inv):
            prev = table.get(rec.src)
            entry = (rec.dst[0], rec.dst[1], rec.perm)
            if prev is None:
                table[rec.src] = entry
            elif prev != entry:
                if rec is inv and prev[:2] == entry[:2]:
                    raise TriangulationError(f"gluings at {g.src} and {g.dst} are not mutually inverse")
                raise TriangulationError(f"duplicate face {rec.src}")
    for t in range(tet_count):
        for f in range(4):
            if (t, f) not in table:
                raise TriangulationError(f"missing face gluing {(t, f)}")
    if require_oriented:
        for (t, f), (t2, f2, perm) in sorted(table.items()):
            if perm_sign(perm) > 0:
                raise TriangulationError(f"even permutation on faces {(t, f)}-{(t2, f2)}")
    return IdealTriangulation(tet_count, table)


def from_dict(data: Mapping, require_oriented: bool = True) -> IdealTriangulation:
    try:
        n = int(data["tets"])
        raw = list(data["gluings"])
    except (KeyError, TypeError) as exc:
        raise TriangulationError(f"malformed triangulation record: {exc}") from exc
    return build_triangulation(n, raw, require_oriented=require_oriented)


def edge_classes(tri: IdealTriangulation) -> list[EdgeClass]:
    return list(tri.edge_classes)


def boundary_components(tri: IdealTriangulation) -> list[tuple[int, int]]:
    return tri.boundary_components()


def validate(tri: IdealTriangulation) -> ValidationReport:
    report = ValidationReport()
    for (t, f), (t2, f2, perm) in sorted(tri._table.items()):
        back = tri._table.get((t2, f2))
        if back is None or back[:2] != (t, f) or tuple(perm[i] for i in back[2]) != (0, 1, 2, 3):
            report.failures.append(f"gluing {(t, f)}-{(t2, f2)} is not an involution")
    for g in tri.gluings:
        if not g.odd:
            report.failures.append(
                f"orientability: even permutation {list(g.perm)} on faces {g.src}-{g.dst}"
            )
    for ec in tri.edge_classes:
        report.edge_table.append((ec.id, ec.valence, [c.key for c in ec.corners]))
        if ec.reversed_self:
            report.failures.append(f"edge class e{ec.id} is identified with itself in reverse")
    report.boundary = tri.boundary_components()
    for comp, chi in report.boundary:
        if chi >= 0:
            report.warnings.append(f"boundary component b{comp}: non-negative boundary Euler characteristic ({chi})")
    return report
