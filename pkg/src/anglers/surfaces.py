"""Admissible surfaces given as explicit cell complexes.

A surface is a list of disks, one per piece of the surface inside a
tetrahedron, plus a pairing of disk sides across hexagonal faces. Each disk
corner lies on a 1-cell of the truncated tetrahedron. That 1-cell is either
an edge ``e`` (internal corner) or the external edge where hexagonal face
``f`` meets the truncation triangle at vertex ``v`` (external corner).
Consecutive corners must lie on a common 2-cell, and the side between them
runs through that 2-cell.

Angles are handled in units of pi, like in :mod:`anglers.angles`. The inner
angle of an external corner is therefore 1/2.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence, Union

from .angles import AngleAssignment, Number
from .triangulation import EDGE_INDEX, EDGE_VERTICES, VERTEX_EDGES, IdealTriangulation, UnionFind

HALF = Fraction(1, 2)
Cell = tuple  # ("hex", f) or ("tri", v)
Side = tuple[int, int]  # (disk index, side index); side s runs from corner s to corner s + 1


class SurfaceError(ValueError):
    """Malformed or inconsistent surface encoding."""


@dataclass(frozen=True)
class SurfaceCorner:
    kind: str  # internal | external
    edge: int | None = None
    vertex: int | None = None
    face: int | None = None

    @classmethod
    def internal(cls, edge: int) -> SurfaceCorner:
        return cls("internal", edge=edge)

    @classmethod
    def external(cls, vertex: int, face: int) -> SurfaceCorner:
        return cls("external", vertex=vertex, face=face)

    @property
    def is_internal(self) -> bool:
        return self.kind == "internal"

    def check(self) -> None:
        if self.is_internal:
            if self.edge is None or not 0 <= self.edge < 6:
                raise SurfaceError(f"internal corner with bad edge {self.edge!r}")
        elif self.kind == "external":
            if self.vertex not in range(4) or self.face not in range(4) or self.vertex == self.face:
                raise SurfaceError(f"external corner ({self.vertex}, {self.face}) is not an external edge")
        else:
            raise SurfaceError(f"unknown corner kind {self.kind!r}")

    def cells(self) -> frozenset:
        """2-cells of the truncated tetrahedron containing this corner's 1-cell."""
        if self.is_internal:
            return frozenset(("hex", f) for f in range(4) if f not in EDGE_VERTICES[self.edge])
        return frozenset({("hex", self.face), ("tri", self.vertex)})

    def adjacent(self, other: SurfaceCorner) -> bool:
        """Do the two 1-cells share a 0-cell of the truncated tetrahedron?"""
        if self.is_internal == other.is_internal:
            if self.is_internal:
                return False  # distinct edges meet only at truncation triangles
            return self.vertex == other.vertex and self != other
        i, x = (self, other) if self.is_internal else (other, self)
        return x.vertex in EDGE_VERTICES[i.edge] and x.face not in EDGE_VERTICES[i.edge]

    def mapped(self, perm: Sequence[int]) -> SurfaceCorner:
        if self.is_internal:
            a, b = EDGE_VERTICES[self.edge]
            return SurfaceCorner.internal(EDGE_INDEX[perm[a], perm[b]])
        return SurfaceCorner.external(perm[self.vertex], perm[self.face])

    def to_dict(self) -> dict:
        if self.is_internal:
            return {"kind": "internal", "edge": self.edge}
        return {"kind": "external", "vertex": self.vertex, "face": self.face}

    def label(self) -> str:
        if self.is_internal:
            a, b = EDGE_VERTICES[self.edge]
            return f"edge {a}{b}"
        return f"ext({self.vertex},{self.face})"


def ext(vertex: int, face: int) -> SurfaceCorner:
    return SurfaceCorner.external(vertex, face)


def inner(a: int, b: int) -> SurfaceCorner:
    return SurfaceCorner.internal(EDGE_INDEX[a, b])


@dataclass
class AdmissibleDisk:
    tet: int
    corners: list[SurfaceCorner]

    @property
    def k(self) -> int:
        return len(self.corners)

    def side_ends(self, s: int) -> tuple[SurfaceCorner, SurfaceCorner]:
        return self.corners[s], self.corners[(s + 1) % self.k]

    def side_cells(self, s: int) -> frozenset:
        a, b = self.side_ends(s)
        return a.cells() & b.cells()

    def side_cell(self, s: int) -> Cell:
        cells = self.side_cells(s)
        if len(cells) != 1:
            raise SurfaceError(f"side {s} of a disk in tet {self.tet} does not run through a unique 2-cell")
        return next(iter(cells))

    @property
    def external_count(self) -> int:
        return sum(not c.is_internal for c in self.corners)


@dataclass
class SurfaceComplex:
    disks: list[AdmissibleDisk]
    pairings: list[tuple[Side, Side]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "disks": [{"tet": d.tet, "corners": [c.to_dict() for c in d.corners]} for d in self.disks],
            "pairings": [[list(a), list(b)] for a, b in self.pairings],
        }


def surface_from_dict(data: Mapping) -> SurfaceComplex:
    try:
        disks = []
        for raw in data["disks"]:
            corners = []
            for c in raw["corners"]:
                if c["kind"] == "internal":
                    corner = SurfaceCorner.internal(int(c["edge"]))
                else:
                    corner = SurfaceCorner(str(c["kind"]), vertex=int(c["vertex"]), face=int(c["face"]))
                corner.check()
                corners.append(corner)
            disks.append(AdmissibleDisk(int(raw["tet"]), corners))
        pairings = [((int(a[0]), int(a[1])), (int(b[0]), int(b[1]))) for a, b in data.get("pairings", [])]
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        if isinstance(exc, SurfaceError):
            raise
        raise SurfaceError(f"malformed surface: {exc}") from exc
    return SurfaceComplex(disks, pairings)


# -- admissibility and disk types ---------------------------------------------


@dataclass
class AdmissibilityReport:
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def check_admissibility(tri: IdealTriangulation, surface: SurfaceComplex) -> AdmissibilityReport:
    """Encodable parts of the admissibility conditions, disk by disk.

    (1) the boundary circle meets the 1-skeleton; (2) no side through a
    hexagonal face joins a 1-cell to itself or to an adjacent 1-cell; (3) no
    side through a truncation triangle joins a 1-cell to itself.
    """
    report = AdmissibilityReport()
    for d, disk in enumerate(surface.disks):
        if not 0 <= disk.tet < tri.tet_count:
            raise SurfaceError(f"disk {d} refers to tetrahedron {disk.tet}")
        for c in disk.corners:
            c.check()
        if not disk.corners:
            report.violations.append(f"disk {d}: condition (1), boundary misses the 1-skeleton")
            continue
        for s in range(disk.k):
            a, b = disk.side_ends(s)
            cells = disk.side_cells(s)
            if not cells:
                report.violations.append(f"disk {d} side {s}: {a.label()} and {b.label()} share no 2-cell")
                continue
            if a == b:
                kinds = sorted({c[0] for c in cells})
                if "hex" in kinds:
                    report.violations.append(f"disk {d} side {s}: condition (2), both ends on {a.label()}")
                if "tri" in kinds:
                    report.violations.append(f"disk {d} side {s}: condition (3), both ends on {a.label()}")
            elif a.adjacent(b):
                (cell,) = cells
                if cell[0] == "hex":
                    report.violations.append(
                        f"disk {d} side {s}: condition (2), ends on adjacent 1-cells {a.label()}, {b.label()}"
                    )
    return report


def classify_disk(disk: AdmissibleDisk) -> str:
    n_ext = disk.external_count
    n_int = disk.k - n_ext
    if disk.k == 3 and n_int == 3:
        return "I"
    if disk.k == 4:
        return {4: "II", 2: "III", 0: "IV"}.get(n_int, "other")
    return "other"


# -- cell structure ----------------------------------------------------------


@dataclass
class CellStructure:
    """Derived 0-cells and edge counts of a surface complex."""

    zero_cells: list[list[tuple[int, int]]]  # each a list of (disk, corner index)
    paired: list[tuple[Side, Side, bool]]  # (side, side, reversed)
    boundary_sides: list[Side]
    faces: int

    @property
    def closed(self) -> bool:
        return not self.boundary_sides

    @property
    def edges(self) -> int:
        return len(self.paired) + len(self.boundary_sides)

    def internal(self, surface: SurfaceComplex, cell: list[tuple[int, int]]) -> bool:
        d, i = cell[0]
        return surface.disks[d].corners[i].is_internal

    def euler(self) -> int:
        return len(self.zero_cells) - self.edges + self.faces


def _zero_cells(sizes: Sequence[int], pairs: Iterable[tuple[Side, Side, bool]]) -> list[list[tuple[int, int]]]:
    offsets = [0]
    for k in sizes:
        offsets.append(offsets[-1] + k)
    uf = UnionFind(offsets[-1])

    def slot(d: int, i: int) -> int:
        return offsets[d] + i % sizes[d]

    for (d, s), (d2, s2), rev in pairs:
        if rev:
            uf.union(slot(d, s), slot(d2, s2 + 1))
            uf.union(slot(d, s + 1), slot(d2, s2))
        else:
            uf.union(slot(d, s), slot(d2, s2))
            uf.union(slot(d, s + 1), slot(d2, s2 + 1))
    where = {}
    for d, k in enumerate(sizes):
        for i in range(k):
            where[offsets[d] + i] = (d, i)
    return [[where[x] for x in group] for group in uf.groups()]


def cell_structure(tri: IdealTriangulation, surface: SurfaceComplex) -> CellStructure:
    """Check the pairing against the face gluings and derive the 0-cells.

    Every side through a hexagonal face must be paired with a side in the glued
    face whose endpoints are the images of its own endpoints. Sides through
    truncation triangles lie on the boundary of the manifold and stay unpaired.
    """
    disks = surface.disks
    used: dict[Side, Side] = {}
    oriented = []
    for a, b in surface.pairings:
        for d, s in (a, b):
            if not (0 <= d < len(disks) and 0 <= s < disks[d].k):
                raise SurfaceError(f"pairing refers to missing side {(d, s)}")
            if (d, s) in used:
                raise SurfaceError(f"side {(d, s)} is paired twice")
        if a == b:
            raise SurfaceError(f"side {a} paired with itself")
        used[a], used[b] = b, a
        (d, s), (d2, s2) = a, b
        cell = disks[d].side_cell(s)
        if cell[0] != "hex":
            raise SurfaceError(f"side {a} lies in a truncation triangle and cannot be paired")
        t2, f2, perm = tri.glued(disks[d].tet, cell[1])
        if disks[d2].tet != t2 or disks[d2].side_cell(s2) != ("hex", f2):
            raise SurfaceError(f"sides {a} and {b} do not lie in glued faces")
        p, q = (c.mapped(perm) for c in disks[d].side_ends(s))
        u, v = disks[d2].side_ends(s2)
        if (p, q) == (u, v):
            oriented.append((a, b, False))
        elif (p, q) == (v, u):
            oriented.append((a, b, True))
        else:
            raise SurfaceError(f"endpoints of sides {a} and {b} do not match under the gluing")
    boundary = []
    for d, disk in enumerate(disks):
        for s in range(disk.k):
            if (d, s) in used:
                continue
            if disk.side_cell(s)[0] == "hex":
                raise SurfaceError(f"side {(d, s)} in a hexagonal face is unpaired")
            boundary.append((d, s))
    zero = _zero_cells([d.k for d in disks], oriented)
    for cell in zero:
        kinds = {disks[d].corners[i].is_internal for d, i in cell}
        if len(kinds) > 1:
            raise SurfaceError(f"0-cell mixes internal and external corners: {cell}")
        if kinds == {True}:
            classes = {tri.edge_class_of_slot(6 * disks[d].tet + disks[d].corners[i].edge) for d, i in cell}
            if len(classes) > 1:
                raise SurfaceError(f"0-cell meets several edge classes: {sorted(classes)}")
    return CellStructure(zero, oriented, boundary, len(disks))


# -- angles and the Euler characteristic --------------------------------------


@dataclass
class InnerAngles:
    theta: list[list[Number]]  # per disk, per corner; units of pi

    @property
    def exact(self) -> bool:
        return all(isinstance(v, Fraction) for row in self.theta for v in row)


def inner_angles(tri: IdealTriangulation, surface: SurfaceComplex, alpha: AngleAssignment) -> InnerAngles:
    exact = alpha.exact
    half: Number = HALF if exact else 0.5
    theta = []
    for disk in surface.disks:
        if not 0 <= disk.tet < tri.tet_count:
            raise SurfaceError(f"disk refers to tetrahedron {disk.tet}")
        row = []
        for c in disk.corners:
            c.check()
            row.append(alpha.values[6 * disk.tet + c.edge] if c.is_internal else half)
        theta.append(row)
    return InnerAngles(theta)


def _close(a: Number, b: Number, tol: float) -> bool:
    if isinstance(a, Fraction) and isinstance(b, (Fraction, int)):
        return a == b
    return abs(float(a) - float(b)) <= tol


@dataclass
class LemmaReport:
    vertex_sums: list[Number]  # internal 0-cells, units of pi (should be 2)
    external_sums: list[Number]  # external 0-cells (should be 1 with two corners)
    disk_margins: list[Number]  # (k - 2) - sum(theta), units of pi
    disk_types: list[str]
    failures: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures


def lemma_check(
    tri: IdealTriangulation, surface: SurfaceComplex, theta: InnerAngles, tol: float = 1e-12
) -> LemmaReport:
    """Inner-angle identities at 0-cells and the per-disk bound with its equality case."""
    cells = cell_structure(tri, surface)
    failures = []
    vsums, xsums = [], []
    for cell in cells.zero_cells:
        total = sum((theta.theta[d][i] for d, i in cell), Fraction(0) if theta.exact else 0.0)
        if cells.internal(surface, cell):
            vsums.append(total)
            if not _close(total, 2, tol):
                failures.append(f"internal 0-cell {cell}: angle sum {float(total):.12g}pi != 2pi")
        else:
            xsums.append(total)
            if len(cell) != 2:
                failures.append(f"external 0-cell {cell} has {len(cell)} corners, expected 2")
    margins, types = [], []
    for d, disk in enumerate(surface.disks):
        total = sum(theta.theta[d], Fraction(0) if theta.exact else 0.0)
        margin = (disk.k - 2) - total
        kind = classify_disk(disk)
        margins.append(margin)
        types.append(kind)
        if isinstance(margin, Fraction):
            negative, zero = margin < 0, margin == 0
        else:
            negative, zero = margin < -tol, abs(margin) <= tol
        if negative:
            failures.append(f"disk {d}: inner angles exceed (k-2)pi by {float(-margin):.3g}pi")
        if zero != (kind == "IV"):
            failures.append(f"disk {d}: equality case {'holds' if zero else 'fails'} for a type {kind} disk")
    return LemmaReport(vsums, xsums, margins, types, failures)


@dataclass
class EulerReport:
    chi_combinatorial: Fraction
    chi_angle: Number
    closed: bool
    chi_direct: int  # V - E + F of the surface itself
    chi_double: int | None = None

    @property
    def consistent(self) -> bool:
        if isinstance(self.chi_angle, Fraction):
            return self.chi_angle == self.chi_combinatorial
        return math.isclose(float(self.chi_angle), float(self.chi_combinatorial), abs_tol=1e-9)


def _double(surface: SurfaceComplex, cells: CellStructure) -> tuple[list[int], list[tuple[Side, Side, bool]]]:
    n = len(surface.disks)
    sizes = [d.k for d in surface.disks] * 2
    pairs = list(cells.paired)
    pairs += [((d + n, s), (d2 + n, s2), rev) for (d, s), (d2, s2), rev in cells.paired]
    pairs += [((d, s), (d + n, s), False) for d, s in cells.boundary_sides]
    return sizes, pairs


def euler_characteristics(tri: IdealTriangulation, surface: SurfaceComplex, theta: InnerAngles) -> EulerReport:
    """Combinatorial and angle-sum Euler characteristics.

    Bounded surfaces are doubled along their boundary. Their characteristic is
    half that of the (closed) double, for the cell count and the angle sum alike.
    """
    cells = cell_structure(tri, surface)
    zero = Fraction(0) if theta.exact else 0.0
    angle_sum = sum((sum(row, zero) - (len(row) - 2) for row in theta.theta), zero)
    direct = cells.euler()
    if cells.closed:
        return EulerReport(Fraction(direct), angle_sum / 2, True, direct)
    sizes, pairs = _double(surface, cells)
    v = len(_zero_cells(sizes, pairs))
    chi_double = v - len(pairs) + len(sizes)
    # the double carries every disk twice
    chi_angle_double = angle_sum
    return EulerReport(Fraction(chi_double, 2), chi_angle_double / 2, False, direct, chi_double)


@dataclass
class Verdict:
    chi: Fraction
    chi_angle: Number
    consistent: bool
    all_type_iv: bool
    offending_disks: list[tuple[int, str]]
    lemma: LemmaReport

    @property
    def holds(self) -> bool:
        """The inequality and its equality case, on a consistent encoding."""
        if not self.consistent:
            return False
        return self.chi <= 0 and ((self.chi == 0) == self.all_type_iv)

    @property
    def label(self) -> str:
        if not self.consistent:
            return "inconsistent"
        if not self.holds:
            return "violated"
        return "tube" if self.chi == 0 else "negative"

    def format(self) -> str:
        lines = [
            f"chi (combinatorial): {self.chi}",
            f"chi (angle sum): {self.chi_angle}",
            f"disk types: {dict(sorted(Counter(self.lemma.disk_types).items()))}",
        ]
        if not self.consistent:
            lines.append("encoding inconsistent: angle-sum and combinatorial chi differ")
        lines.extend(f"lemma: {f}" for f in self.lemma.failures)
        if self.offending_disks and self.chi == 0:
            lines.append("non-tube disks: " + ", ".join(f"{d} ({t})" for d, t in self.offending_disks))
        lines.append(f"verdict: {self.label}")
        return "\n".join(lines)


def prop_verdict(tri: IdealTriangulation, surface: SurfaceComplex, theta: InnerAngles) -> Verdict:
    """chi <= 0 with equality exactly for unions of type IV disks."""
    lemma = lemma_check(tri, surface, theta)
    euler = euler_characteristics(tri, surface, theta)
    consistent = euler.consistent and not any("0-cell" in f for f in lemma.failures)
    types = lemma.disk_types
    offending = [(d, t) for d, t in enumerate(types) if t != "IV"]
    return Verdict(euler.chi_combinatorial, euler.chi_angle, consistent, not offending, offending, lemma)


# -- test surfaces -----------------------------------------------------------


def auto_pair(
    tri: IdealTriangulation,
    disks: list[AdmissibleDisk],
    content: Sequence[tuple[frozenset, frozenset]] | None = None,
) -> SurfaceComplex:
    """Pair hexagonal sides across face gluings by matching endpoint 1-cells.

    Parallel arcs in one face share their endpoint 1-cells. ``content`` tells
    them apart: for each disk it gives the vertices and edges of the
    tetrahedron on the near side of the disk.
    """

    def key(d: int, s: int, tet: int, face: int, perm: Sequence[int] | None) -> tuple:
        ends = disks[d].side_ends(s)
        extra: tuple = ()
        if content is not None:
            verts, edges = content[d]
            own = disks[d].side_cell(s)[1]
            verts = {v for v in verts if v != own}
            edges = {e for e in edges if own not in EDGE_VERTICES[e]}
            if perm is not None:
                verts = {perm[v] for v in verts}
                edges = {EDGE_INDEX[perm[a], perm[b]] for a, b in (EDGE_VERTICES[e] for e in edges)}
            extra = (frozenset(verts), frozenset(edges))
        if perm is not None:
            ends = tuple(c.mapped(perm) for c in ends)
        return (tet, face, frozenset(ends)) + extra

    index: dict[tuple, list[Side]] = {}
    for d, disk in enumerate(disks):
        for s in range(disk.k):
            cell = disk.side_cell(s)
            if cell[0] == "hex":
                index.setdefault(key(d, s, disk.tet, cell[1], None), []).append((d, s))
    pairs, done = [], set()
    for d, disk in enumerate(disks):
        for s in range(disk.k):
            cell = disk.side_cell(s)
            if cell[0] != "hex" or (d, s) in done:
                continue
            t2, f2, perm = tri.glued(disk.tet, cell[1])
            cands = [x for x in index.get(key(d, s, t2, f2, perm), []) if x != (d, s) and x not in done]
            if len(cands) != 1:
                raise SurfaceError(f"side {(d, s)}: {len(cands)} candidate partners")
            pairs.append(((d, s), cands[0]))
            done.update({(d, s), cands[0]})
    return SurfaceComplex(disks, pairs)


def edge_tube(tri: IdealTriangulation, edge_classes: Iterable[int]) -> SurfaceComplex:
    """Frontier of a regular neighbourhood of the given edges: type IV disks only."""
    return frontier_surface(tri, (), edge_classes)


def boundary_parallel(tri: IdealTriangulation, components: Iterable[int] | None = None) -> SurfaceComplex:
    """Closed surface parallel to the chosen boundary components: type I disks."""
    if components is None:
        components = [c for c, _ in tri.boundary_components()]
    return frontier_surface(tri, components, ())


def _shape_disk(verts: set[int], edges: set[int]) -> list[SurfaceCorner] | None:
    """Frontier disk of one connected piece of a neighbourhood inside a tetrahedron."""
    if len(edges) == 0 and len(verts) == 1:
        (a,) = verts
        return [inner(a, x) for x in range(4) if x != a]
    if len(edges) != 1:
        return None
    (e,) = edges
    a, b = EDGE_VERTICES[e]
    c, d = (x for x in range(4) if x not in (a, b))
    if not verts:
        return [ext(a, c), ext(b, c), ext(b, d), ext(a, d)]
    if verts == {a, b}:
        return [inner(a, c), inner(a, d), inner(b, d), inner(b, c)]
    if len(verts) == 1:
        (b,) = verts
        (a,) = (x for x in EDGE_VERTICES[e] if x != b)
        return [ext(a, c), ext(a, d), inner(b, c), inner(b, d)]
    return None


def frontier_surface(
    tri: IdealTriangulation, components: Iterable[int], edge_classes: Iterable[int]
) -> SurfaceComplex | None:
    """Frontier of a regular neighbourhood of some boundary components and edges.

    Returns ``None`` when some tetrahedron meets the neighbourhood in a piece
    whose frontier is not one of the small disk shapes handled here.
    """
    comps, classes = set(components), set(edge_classes)
    disks, content = [], []
    for t in range(tri.tet_count):
        verts = {v for v in range(4) if tri.boundary_component_of(t, v) in comps}
        edges = {e for e in range(6) if tri.edge_class_of_slot(6 * t + e) in classes}
        uf = UnionFind(10)  # 0..3 vertices, 4..9 edges
        for e in edges:
            for v in EDGE_VERTICES[e]:
                if v in verts:
                    uf.union(v, 4 + e)
        for group in uf.groups():
            gv = {x for x in group if x < 4 and x in verts}
            ge = {x - 4 for x in group if x >= 4 and x - 4 in edges}
            if not gv and not ge:
                continue
            corners = _shape_disk(gv, ge)
            if corners is None:
                return None
            disks.append(AdmissibleDisk(t, corners))
            content.append((frozenset(gv), frozenset(ge)))
    return auto_pair(tri, disks, content)


def frontier_euler(tri: IdealTriangulation, components: Iterable[int], edge_classes: Iterable[int]) -> int:
    """Euler characteristic of the same frontier, from the boundary and edge ends alone.

    Each chosen edge removes one disk from the parallel copy of the boundary for
    every end it has on a chosen component; the tubes themselves add nothing.
    """
    comps = set(components)
    chi = sum(x for c, x in tri.boundary_components() if c in comps)
    for ec in tri.edge_classes:
        if ec.id in set(edge_classes):
            c0 = ec.corners[0]
            a, b = EDGE_VERTICES[c0.edge]
            chi -= sum(tri.boundary_component_of(c0.tet, v) in comps for v in (a, b))
    return chi


def disjoint_union(*surfaces: SurfaceComplex) -> SurfaceComplex:
    disks, pairs, offset = [], [], 0
    for s in surfaces:
        disks.extend(s.disks)
        pairs.extend(((a + offset, i), (b + offset, j)) for (a, i), (b, j) in s.pairings)
        offset += len(s.disks)
    return SurfaceComplex(disks, pairs)
