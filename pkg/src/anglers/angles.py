"""Angle structures: the linear system, exact feasibility, verification and
the perturbation of partially flat assignments into strict ones.

All angles inside this module are measured in units of pi, so the linear
system has rational data: edge sums equal 2, vertex sums are below 1.
Values are either :class:`~fractions.Fraction` (exact mode) or ``float``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence, Union

import numpy as np

from .simplex import maximize
from .triangulation import EDGE_VERTICES, VERTEX_EDGES, Corner, IdealTriangulation

Number = Union[Fraction, float]
HYPERIDEAL = "hyperideal"
FLAT = "flat"


class AngleError(ValueError):
    pass


class LemmaViolation(AngleError):
    """An edge class carries no angle strictly between 0 and pi."""

    def __init__(self, edge: int):
        super().__init__(f"edge with no interior angle: e{edge}")
        self.edge = edge


def parse_value(raw) -> Number:
    if isinstance(raw, str):
        return Fraction(raw)
    if isinstance(raw, int):
        return Fraction(raw)
    return float(raw)


def format_value(v: Number):
    return str(v) if isinstance(v, Fraction) else float(v)


@dataclass
class AngleAssignment:
    """One angle per corner slot (``6 * tet + edge``), in units of pi."""

    values: list[Number]

    @property
    def exact(self) -> bool:
        return all(isinstance(v, Fraction) for v in self.values)

    def __getitem__(self, corner: Corner) -> Number:
        return self.values[corner.slot]

    def radians(self) -> np.ndarray:
        return np.array([float(v) for v in self.values]) * math.pi

    def tet_angles(self, tet: int) -> list[Number]:
        return self.values[6 * tet: 6 * tet + 6]

    @classmethod
    def from_radians(cls, values: Sequence[float]) -> AngleAssignment:
        return cls([float(v) / math.pi for v in values])

    def to_dict(self) -> dict:
        exact = self.exact
        vals = {}
        for slot, v in enumerate(self.values):
            key = Corner.from_slot(slot).key
            vals[key] = str(v) if exact else float(v) * math.pi
        return {"mode": "rational-pi" if exact else "radians", "values": vals}


@dataclass
class PartiallyFlatAssignment(AngleAssignment):
    tags: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        out = super().to_dict()
        out["tags"] = {str(t): tag for t, tag in enumerate(self.tags)}
        return out


def assignment_from_dict(data: Mapping, tet_count: int) -> AngleAssignment:
    mode = data.get("mode")
    if mode not in ("rational-pi", "radians"):
        raise AngleError(f"unknown angle mode {mode!r}")
    raw = data.get("values", {})
    values: list[Number | None] = [None] * (6 * tet_count)
    for key, v in raw.items():
        c = Corner.parse(key)
        if not (0 <= c.tet < tet_count and 0 <= c.edge < 6):
            raise AngleError(f"corner {key} out of range")
        if mode == "rational-pi":
            values[c.slot] = Fraction(v) if isinstance(v, (str, int)) else float(v)
        else:
            values[c.slot] = float(v) / math.pi
    missing = [Corner.from_slot(s).key for s, v in enumerate(values) if v is None]
    if missing:
        raise AngleError(f"missing corner values: {', '.join(missing)}")
    if "tags" in data:
        tags = [data["tags"].get(str(t), HYPERIDEAL) for t in range(tet_count)]
        bad = [t for t in tags if t not in (FLAT, HYPERIDEAL)]
        if bad:
            raise AngleError(f"unknown tetrahedron tag {bad[0]!r}")
        return PartiallyFlatAssignment(values, tags)
    return AngleAssignment(values)


# -- the linear system ------------------------------------------------------


@dataclass
class AnglePolytope:
    """Max-slack LP: maximize s with corner >= s, edge sums = 2, vertex sums + s <= 1.

    ``fixed`` corners take prescribed values and drop out of the system; their
    contribution moves to the equality right-hand sides. Vertex rows exist only
    for (tet, vertex) triples whose three corners are all free.
    """

    tri: IdealTriangulation
    free: list[int]
    equalities: list[tuple[int, list[int], Fraction]]  # (edge class, free slots, rhs)
    vertex_rows: list[tuple[tuple[int, int], list[int]]]
    fixed: dict[int, Fraction]

    @property
    def dimensions(self) -> dict:
        return {
            "variables": len(self.free) + 1,
            "equalities": len(self.equalities),
            "vertex_inequalities": len(self.vertex_rows),
            "positivity_inequalities": len(self.free),
        }


def build_polytope(tri: IdealTriangulation, fixed: Mapping[int, Number] | None = None) -> AnglePolytope:
    fixed = {s: Fraction(v) for s, v in (fixed or {}).items()}
    free_set = [s for s in range(6 * tri.tet_count) if s not in fixed]
    eqs = []
    for ec in tri.edge_classes:
        slots = [c.slot for c in ec.corners if c.slot not in fixed]
        rhs = 2 - sum((fixed[c.slot] for c in ec.corners if c.slot in fixed), Fraction(0))
        eqs.append((ec.id, slots, rhs))
    rows = []
    for t in range(tri.tet_count):
        for v in range(4):
            slots = [6 * t + e for e in VERTEX_EDGES[v]]
            if not any(s in fixed for s in slots):
                rows.append(((t, v), slots))
    return AnglePolytope(tri, free_set, eqs, rows, fixed)


@dataclass
class FarkasCertificate:
    """Multipliers proving that no strictly positive solution exists.

    For every free corner c: ``edge[e(c)] + sum(vertex rows through c) - corner[c] == 0``;
    vertex and corner multipliers are non-negative with positive total mass, and
    ``sum(rhs * edge) + sum(vertex) <= 0``. Pairing the identity with a strict
    solution yields ``0 < 0``.
    """

    edge: dict[int, Fraction]
    vertex: dict[tuple[int, int], Fraction]
    corner: dict[int, Fraction]

    def recombine(self, poly: AnglePolytope) -> tuple[Fraction, Fraction]:
        """Return ``(bound, mass)``; a valid certificate has bound <= 0 < mass.

        Raises :class:`AngleError` when the linear identity or a sign fails.
        """
        coeff = {s: Fraction(0) for s in poly.free}
        for eid, slots, _ in poly.equalities:
            for s in slots:
                coeff[s] += self.edge.get(eid, 0)
        for key, slots in poly.vertex_rows:
            for s in slots:
                coeff[s] += self.vertex.get(key, 0)
        for s in poly.free:
            if coeff[s] - self.corner.get(s, 0) != 0:
                raise AngleError(f"certificate identity fails at corner {Corner.from_slot(s).key}")
        if any(v < 0 for v in self.vertex.values()) or any(v < 0 for v in self.corner.values()):
            raise AngleError("certificate has a negative inequality multiplier")
        bound = sum((rhs * self.edge.get(eid, 0) for eid, _, rhs in poly.equalities), Fraction(0))
        bound += sum(self.vertex.values(), Fraction(0))
        mass = sum(self.vertex.values(), Fraction(0)) + sum(self.corner.values(), Fraction(0))
        return bound, mass

    def verify(self, poly: AnglePolytope) -> bool:
        try:
            bound, mass = self.recombine(poly)
        except AngleError:
            return False
        return bound <= 0 < mass

    def to_dict(self) -> dict:
        return {
            "edge_multipliers": {f"e{k}": str(v) for k, v in sorted(self.edge.items()) if v},
            "vertex_multipliers": {f"{t}.v{v}": str(x) for (t, v), x in sorted(self.vertex.items()) if x},
            "corner_multipliers": {Corner.from_slot(s).key: str(x) for s, x in sorted(self.corner.items()) if x},
        }


@dataclass
class LPOutcome:
    status: str  # strictly_feasible | boundary_feasible | infeasible
    slack: Fraction
    witness: AngleAssignment | None = None
    certificate: FarkasCertificate | None = None
    pivots: int = 0


def solve(poly: AnglePolytope) -> LPOutcome:
    free = poly.free
    col = {s: i for i, s in enumerate(free)}
    nf = len(free)
    sp, sm = nf, nf + 1  # s = s_plus - s_minus
    ncols = nf + 2
    A_eq, b_eq = [], []
    for _, slots, rhs in poly.equalities:
        row = [0] * ncols
        for s in slots:
            row[col[s]] += 1
        row[sp], row[sm] = len(slots), -len(slots)
        A_eq.append(row)
        b_eq.append(rhs)
    A_ub, b_ub = [], []
    for _, slots in poly.vertex_rows:
        row = [0] * ncols
        for s in slots:
            row[col[s]] += 1
        row[sp], row[sm] = 4, -4
        A_ub.append(row)
        b_ub.append(1)
    # s <= 1 keeps the program bounded when no vertex row exists
    cap = [0] * ncols
    cap[sp], cap[sm] = 1, -1
    A_ub.append(cap)
    b_ub.append(1)
    c = [0] * ncols
    c[sp], c[sm] = 1, -1
    res = maximize(c, A_ub, b_ub, A_eq, b_eq)
    if res.status != "optimal":
        # infeasible only when some equality has no free corner and nonzero rhs
        bad = [eid for eid, slots, rhs in poly.equalities if not slots and rhs != 0]
        raise AngleError(f"edge sums cannot be met: edge classes {bad}")
    s_star = res.x[sp] - res.x[sm]
    values: list[Number] = [Fraction(0)] * (6 * poly.tri.tet_count)
    for slot, v in poly.fixed.items():
        values[slot] = v
    for s in free:
        values[s] = res.x[col[s]] + s_star
    witness = AngleAssignment(values)
    if s_star > 0:
        return LPOutcome("strictly_feasible", s_star, witness, None, res.pivots)
    y_eq = {poly.equalities[i][0]: res.y_eq[i] for i in range(len(poly.equalities))}
    z = {poly.vertex_rows[i][0]: res.y_ub[i] for i in range(len(poly.vertex_rows))}
    w = {}
    for s in free:
        w[s] = Fraction(0)
    for eid, slots, _ in poly.equalities:
        for s in slots:
            w[s] += y_eq[eid]
    for key, slots in poly.vertex_rows:
        for s in slots:
            w[s] += z[key]
    cert = FarkasCertificate(y_eq, z, w)
    if s_star == 0:
        return LPOutcome("boundary_feasible", s_star, witness, cert, res.pivots)
    return LPOutcome("infeasible", s_star, None, cert, res.pivots)


def solve_float(poly: AnglePolytope) -> LPOutcome | None:
    """The max-slack program in floating point (HiGHS).

    Returns ``None`` when the edge equations alone are inconsistent. The
    status uses a 1e-9 band around zero; no certificate is produced.
    """
    from scipy.optimize import linprog

    col = {s: i for i, s in enumerate(poly.free)}
    n = len(col) + 1
    A_eq = np.zeros((len(poly.equalities), n))
    b_eq = np.zeros(len(poly.equalities))
    for i, (_, slots, rhs) in enumerate(poly.equalities):
        for s in slots:
            A_eq[i, col[s]] += 1
        b_eq[i] = float(rhs)
    A_ub = np.zeros((len(poly.vertex_rows) + len(poly.free), n))
    for i, (_, slots) in enumerate(poly.vertex_rows):
        A_ub[i, [col[s] for s in slots]] = 1
        A_ub[i, -1] = 1
    for i, s in enumerate(poly.free, start=len(poly.vertex_rows)):
        A_ub[i, col[s]] = -1
        A_ub[i, -1] = 1
    b_ub = np.concatenate([np.ones(len(poly.vertex_rows)), np.zeros(len(poly.free))])
    c = np.zeros(n)
    c[-1] = -1
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq,
                  bounds=[(None, None)] * (n - 1) + [(None, 1)], method="highs")
    if res.status != 0:
        return None
    slack = float(-res.fun)
    status = "strictly_feasible" if slack > 1e-9 else ("boundary_feasible" if slack > -1e-9 else "infeasible")
    witness = None
    if status != "infeasible":
        values: list[Number] = [0.0] * (6 * poly.tri.tet_count)
        for s, v in poly.fixed.items():
            values[s] = float(v)
        for s, i in col.items():
            values[s] = float(res.x[i])
        witness = AngleAssignment(values)
    return LPOutcome(status, slack, witness, None, int(getattr(res, "nit", 0)))


def find_angle_structure(tri: IdealTriangulation) -> LPOutcome:
    return solve(build_polytope(tri))


# -- verification ------------------------------------------------------------


@dataclass
class VerifyReport:
    exact: bool
    edge_residuals: dict[int, float]
    vertex_margins: dict[tuple[int, int], float]
    min_angle: float
    failures: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    @property
    def min_vertex_margin(self) -> float:
        return min(self.vertex_margins.values())

    def format(self) -> str:
        lines = [
            f"mode: {'exact' if self.exact else 'float'}",
            f"max edge residual: {max(self.edge_residuals.values()):.3e}",
            f"min vertex margin: {self.min_vertex_margin:.6g}",
            f"min angle: {self.min_angle:.6g}",
        ]
        lines.extend(f"FAIL: {f}" for f in self.failures)
        lines.append("PASS" if self.passed else "FAILED")
        return "\n".join(lines)


def verify(tri: IdealTriangulation, alpha: AngleAssignment, tol: float = 1e-12) -> VerifyReport:
    """Check the strict angle-structure conditions; residuals and margins in radians."""
    if len(alpha.values) != 6 * tri.tet_count:
        raise AngleError("assignment does not cover all corners")
    exact = alpha.exact
    vals = alpha.values
    failures = []
    residuals = {}
    for ec in tri.edge_classes:
        total = sum(vals[c.slot] for c in ec.corners)
        res = abs(total - 2)
        residuals[ec.id] = float(res) * math.pi
        if (exact and res != 0) or (not exact and residuals[ec.id] > tol):
            failures.append(f"edge e{ec.id}: angle sum {float(total):.15g}pi != 2pi")
    margins = {}
    for t in range(tri.tet_count):
        for v in range(4):
            total = sum(vals[6 * t + e] for e in VERTEX_EDGES[v])
            margins[t, v] = float(1 - total) * math.pi
            if not (total < 1):
                failures.append(f"tet {t} vertex {v}: angle sum {float(total):.15g}pi >= pi")
    for slot, v in enumerate(vals):
        if not (v > 0):
            failures.append(f"corner {Corner.from_slot(slot).key}: angle {float(v):.15g}pi <= 0")
    return VerifyReport(exact, residuals, margins, float(min(vals)) * math.pi, failures)


# -- partially flat assignments and the perturbation ------------------------


@dataclass(frozen=True)
class EdgeProfile:
    edge: int
    m: int  # zero angles
    n: int  # pi angles
    k: int  # angles strictly between 0 and pi

    @property
    def valence(self) -> int:
        return self.m + self.n + self.k

    @property
    def coefficient(self) -> Fraction:
        return Fraction(self.m - 3 * self.n, self.k)


def flat_pattern(pi_pair: int) -> list[Fraction]:
    """Flat tetrahedron angles: pi on edges ``pi_pair`` and ``5 - pi_pair``."""
    return [Fraction(1) if e in (pi_pair, 5 - pi_pair) else Fraction(0) for e in range(6)]


def is_flat_pattern(angles: Sequence[Number]) -> bool:
    return any(list(angles) == flat_pattern(i) for i in range(3))


def _kind(v: Number) -> str:
    if v == 0:
        return "zero"
    if v == 1:
        return "pi"
    return "interior"


def edge_profiles(tri: IdealTriangulation, beta: AngleAssignment) -> list[EdgeProfile]:
    out = []
    for ec in tri.edge_classes:
        kinds = [_kind(beta.values[c.slot]) for c in ec.corners]
        prof = EdgeProfile(ec.id, kinds.count("zero"), kinds.count("pi"), kinds.count("interior"))
        if prof.k == 0:
            raise LemmaViolation(ec.id)
        out.append(prof)
    return out


def check_partially_flat(tri: IdealTriangulation, beta: PartiallyFlatAssignment, tol: float = 1e-9) -> list[str]:
    """Return the list of violated conditions (empty when ``beta`` is valid)."""
    problems = []
    exact = beta.exact
    if len(beta.tags) != tri.tet_count:
        return ["tags do not cover all tetrahedra"]
    for t, tag in enumerate(beta.tags):
        angles = beta.tet_angles(t)
        if tag == FLAT:
            if not is_flat_pattern(angles):
                problems.append(f"tet {t} tagged flat without the flat pattern")
        else:
            if not all(0 < a < 1 for a in angles):
                problems.append(f"hyperideal tet {t} has an angle outside (0, pi)")
            for v in range(4):
                if not sum(angles[e] for e in VERTEX_EDGES[v]) < 1:
                    problems.append(f"hyperideal tet {t} vertex {v}: angle sum >= pi")
    for ec in tri.edge_classes:
        total = sum(beta.values[c.slot] for c in ec.corners)
        if (exact and total != 2) or (not exact and abs(float(total) - 2) * math.pi > tol):
            problems.append(f"edge e{ec.id}: angle sum {float(total):.12g}pi != 2pi")
    try:
        edge_profiles(tri, beta)
    except LemmaViolation as exc:
        problems.append(str(exc))
    return problems


@dataclass(frozen=True)
class TMax:
    value: Number  # units of pi
    kind: str  # positivity | vertex | flat | cap
    where: object = None

    def describe(self) -> str:
        if self.kind == "positivity":
            return f"angle at corner {Corner.from_slot(self.where).key} reaches 0"
        if self.kind == "vertex":
            t, v = self.where
            return f"vertex sum at tet {t} vertex {v} reaches pi"
        if self.kind == "flat":
            return "pi - 3t reaches 0 on flat tetrahedra"
        return "cap pi/3"


def _coefficients(tri: IdealTriangulation, beta: AngleAssignment) -> list[Fraction]:
    profiles = edge_profiles(tri, beta)
    coeffs = [Fraction(0)] * (6 * tri.tet_count)
    for ec, prof in zip(tri.edge_classes, profiles):
        for c in ec.corners:
            coeffs[c.slot] = prof.coefficient
    return coeffs


def t_max(tri: IdealTriangulation, beta: AngleAssignment) -> TMax:
    """Supremum of the admissible perturbation parameter (units of pi).

    Exact when ``beta`` is rational. Capped at 1/3; the cap coincides with the
    flat-tetrahedron bound whenever a pi-angle is present.
    """
    coeffs = _coefficients(tri, beta)
    vals = beta.values
    has_pi = any(v == 1 for v in vals)
    best = TMax(Fraction(1, 3), "flat" if has_pi else "cap")
    for slot, v in enumerate(vals):
        if _kind(v) == "interior" and coeffs[slot] > 0:
            bound = v / coeffs[slot]
            if bound < best.value:
                best = TMax(bound, "positivity", slot)
    for t in range(tri.tet_count):
        angles = beta.tet_angles(t)
        if any(_kind(a) != "interior" for a in angles):
            continue
        for vtx in range(4):
            slots = [6 * t + e for e in VERTEX_EDGES[vtx]]
            csum = sum(coeffs[s] for s in slots)
            if csum < 0:
                bound = (1 - sum(vals[s] for s in slots)) / -csum
                if bound < best.value:
                    best = TMax(bound, "vertex", (t, vtx))
    return best


def perturb(tri: IdealTriangulation, beta: AngleAssignment, t: Number, check: bool = True) -> AngleAssignment:
    """Deform ``beta`` into ``alpha_t``: 0 -> t, pi -> pi - 3t, interior -> beta - c_e t."""
    if isinstance(t, int):
        t = Fraction(t)
    coeffs = _coefficients(tri, beta)
    if check:
        bound = t_max(tri, beta).value
        if not (0 < t < bound):
            raise AngleError(f"t = {float(t):.6g}pi outside the admissible interval (0, {float(bound):.6g}pi)")
    out: list[Number] = []
    for slot, v in enumerate(beta.values):
        kind = _kind(v)
        if kind == "zero":
            out.append(t)
        elif kind == "pi":
            out.append(1 - 3 * t)
        else:
            out.append(v - coeffs[slot] * t)
    return AngleAssignment(out)


def binding_slack(tri: IdealTriangulation, beta: AngleAssignment, bound: TMax) -> float:
    """Float slack (radians) of the constraint that defines ``bound``, evaluated at t = bound."""
    alpha = perturb(tri, beta, float(bound.value), check=False)
    vals = alpha.values
    if bound.kind == "positivity":
        return float(vals[bound.where]) * math.pi
    if bound.kind == "vertex":
        t, v = bound.where
        return (1 - sum(float(vals[6 * t + e]) for e in VERTEX_EDGES[v])) * math.pi
    if bound.kind == "flat":
        return (1 - 3 * float(bound.value)) * math.pi
    return math.nan


def corner_label(slot: int) -> str:
    c = Corner.from_slot(slot)
    a, b = EDGE_VERTICES[c.edge]
    return f"tet {c.tet} edge {a}{b}"
