"""Total volume of an angle structure and its maximization by projected ascent.

The optimizer works in radians. Its gradient comes from the Schlafli formula
``dV/dtheta = -length/2``. Each corner lies in exactly one edge class, so
projecting onto "edge sums fixed" means subtracting the per-class mean.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .angles import AngleAssignment, AngleError, verify
from .geometry import volume_and_lengths
from .triangulation import EDGE_VERTICES, VERTEX_EDGES, Corner, IdealTriangulation


@dataclass
class VolumeReport:
    total_volume: float
    per_tet_volumes: list[float]
    gradient_norm: float
    edge_length_residual: float
    lengths: np.ndarray = field(repr=False, default_factory=lambda: np.zeros(0))

    def to_dict(self) -> dict:
        return {
            "volume": self.total_volume,
            "per_tet_volumes": self.per_tet_volumes,
            "gradient_norm": self.gradient_norm,
            "edge_length_residual": self.edge_length_residual,
        }


@dataclass
class MaximizeOptions:
    tol: float = 1e-8  # projected-gradient norm at which we stop
    max_iters: int = 2000
    guard: float = 1e-8  # minimum strict margin (radians) every iterate keeps
    initial_step: float = 1.0
    grow: float = 2.0  # next trial step is at most grow * last accepted step
    shrink: float = 0.5
    armijo: float = 1e-4
    min_step: float = 1e-14
    threads: int = 1


@dataclass
class MaximizeResult:
    angles: AngleAssignment
    report: VolumeReport
    status: str  # critical | boundary | max_iters
    iterations: int
    history: list[float]
    pinned: list[str] = field(default_factory=list)
    stalled: bool = False  # line search ran out of float resolution before reaching tol
    margin_history: list[float] = field(default_factory=list)  # smallest constraint margin per iterate

    def to_dict(self) -> dict:
        out = {
            "status": self.status,
            "iterations": self.iterations,
            "stalled": self.stalled,
            "min_margin": self.margin_history[-1] if self.margin_history else None,
            "volume": self.report.total_volume,
            "residuals": {
                "gradient_norm": self.report.gradient_norm,
                "edge_length": self.report.edge_length_residual,
            },
        }
        if self.pinned:
            out["pinned"] = self.pinned
        return out


class _Evaluator:
    def __init__(self, tri: IdealTriangulation, threads: int = 1):
        self.tri = tri
        self.threads = max(1, threads)
        self.classes = [np.array([c.slot for c in ec.corners]) for ec in tri.edge_classes]

    def _one(self, angles: np.ndarray) -> tuple[float, np.ndarray]:
        return volume_and_lengths(angles)

    def evaluate(self, x: np.ndarray) -> tuple[list[float], np.ndarray]:
        blocks = [x[6 * t: 6 * t + 6] for t in range(self.tri.tet_count)]
        if self.threads > 1:
            with ThreadPoolExecutor(self.threads) as pool:
                results = list(pool.map(self._one, blocks))
        else:
            results = [self._one(b) for b in blocks]
        vols = [v for v, _ in results]
        lengths = np.concatenate([l for _, l in results])
        return vols, lengths

    def project(self, g: np.ndarray) -> np.ndarray:
        out = g.copy()
        for slots in self.classes:
            out[slots] -= g[slots].mean()
        return out

    def residual(self, lengths: np.ndarray) -> float:
        worst = 0.0
        for slots in self.classes:
            vals = lengths[slots]
            worst = max(worst, float(vals.max() - vals.min()))
        return worst

    def report(self, x: np.ndarray) -> tuple[VolumeReport, np.ndarray]:
        vols, lengths = self.evaluate(x)
        grad = self.project(-0.5 * lengths)
        rep = VolumeReport(float(math.fsum(vols)), vols, float(np.linalg.norm(grad)), self.residual(lengths), lengths)
        return rep, grad


def _margins(tri: IdealTriangulation, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    X = x.reshape(tri.tet_count, 6)
    vert = np.stack([math.pi - X[:, list(VERTEX_EDGES[v])].sum(axis=1) for v in range(4)], axis=1)
    return x, vert.ravel()


def total_volume(tri: IdealTriangulation, alpha: AngleAssignment, threads: int = 1) -> VolumeReport:
    """Volume of a strict angle structure, with the matching residual of edge lengths."""
    rep = verify(tri, alpha, tol=1e-9)
    if not rep.passed:
        raise AngleError("volume needs a strict angle structure: " + "; ".join(rep.failures[:3]))
    report, _ = _Evaluator(tri, threads).report(alpha.radians())
    return report


class _Constraints:
    """Angle positivity (``x_s >= guard``) and vertex sums (``sum <= pi - guard``).

    Constraint ids ``0..6n-1`` are angles, ``6n + 4t + v`` is vertex ``v`` of tet ``t``.
    Normals point out of the feasible region.
    """

    def __init__(self, tri: IdealTriangulation):
        self.tri = tri
        n = 6 * tri.tet_count
        self.size = n
        normals = np.zeros((n + 4 * tri.tet_count, n))
        normals[np.arange(n), np.arange(n)] = -1.0
        for t in range(tri.tet_count):
            for v in range(4):
                normals[n + 4 * t + v, [6 * t + e for e in VERTEX_EDGES[v]]] = 1.0
        self.normals = normals
        edges = np.zeros((len(tri.edge_classes), n))
        for i, ec in enumerate(tri.edge_classes):
            edges[i, [c.slot for c in ec.corners]] = 1.0
        self.edges = edges

    def margins(self, x: np.ndarray) -> np.ndarray:
        pos, vert = _margins(self.tri, x)
        return np.concatenate([pos, vert])

    def project(self, g: np.ndarray, active: list[int]) -> tuple[np.ndarray, np.ndarray]:
        """Project ``g`` onto directions keeping edge sums and active margins fixed.

        Returns the projection and the multipliers of the active constraints.
        """
        M = np.vstack([self.edges, self.normals[active]]) if active else self.edges
        lam, *_ = np.linalg.lstsq(M.T, g, rcond=None)
        d = g - M.T @ lam
        return d, lam[len(self.edges):]

    def slack_scale(self, x: np.ndarray, guard: float) -> np.ndarray:
        """Per-slot scale: the smallest margin among the constraints involving that slot."""
        pos, vert = _margins(self.tri, x)
        vert = vert.reshape(self.tri.tet_count, 4)
        out = pos.copy()
        for e, (a, b) in enumerate(EDGE_VERTICES):
            out[e::6] = np.minimum(out[e::6], np.minimum(vert[:, a], vert[:, b]))
        return np.maximum(out, guard)

    def scaled_direction(self, g: np.ndarray, scale: np.ndarray, active: list[int]) -> np.ndarray:
        """Ascent direction in the metric ``diag(1/scale)`` within the same constraints."""
        M = np.vstack([self.edges, self.normals[active]]) if active else self.edges
        MD = M * scale
        lam, *_ = np.linalg.lstsq(MD @ M.T, MD @ g, rcond=None)
        return scale * (g - M.T @ lam)

    def max_step(self, x: np.ndarray, d: np.ndarray, guard: float, active: list[int]) -> float:
        m = self.margins(x) - guard
        rate = self.normals @ d  # margins shrink at this rate
        rate[active] = 0.0
        moving = rate > 1e-15
        if not np.any(moving):
            return math.inf
        return max(float(np.min(m[moving] / rate[moving])), 0.0)

    def describe(self, cid: int) -> str:
        if cid < self.size:
            return f"angle at corner {Corner.from_slot(cid).key} -> 0"
        t, v = divmod(cid - self.size, 4)
        return f"vertex sum at tet {t} vertex {v} -> pi"


def maximize(
    tri: IdealTriangulation, start: AngleAssignment, options: MaximizeOptions | None = None
) -> MaximizeResult:
    """Projected gradient ascent of the volume with Armijo backtracking.

    Steps are taken in a diagonal metric scaled by each angle's distance to
    its nearest constraint, so degenerating tetrahedra (where the volume is
    stiff) approach the boundary geometrically rather than sublinearly. The
    stopping test uses the plain projected gradient. Constraints whose margin has come down to the guard are held there (the
    ascent direction is projected along them as well) until their multiplier
    says the volume would rather move away from them.
    """
    opts = options or MaximizeOptions()
    rep = verify(tri, start, tol=1e-9)
    if not rep.passed:
        raise AngleError("start is not a strict angle structure: " + "; ".join(rep.failures[:3]))
    if rep.min_angle < opts.guard or rep.min_vertex_margin < opts.guard:
        raise AngleError("start violates the guard margin")
    ev = _Evaluator(tri, opts.threads)
    cons = _Constraints(tri)
    x = start.radians()
    report, _ = ev.report(x)
    history = [report.total_volume]
    margin_history = [float(cons.margins(x).min())]
    status, stalled = "max_iters", False
    active: list[int] = []
    it = 0
    last_step = 0.0
    while True:
        g = -0.5 * report.lengths
        while True:
            d, mult = cons.project(g, active)
            # outward normals: a multiplier <= 0 means the volume pulls the point inward
            release = [c for c, m in zip(active, mult) if m < -opts.tol]
            if not release:
                break
            worst = min(zip(mult, active))[1]
            active.remove(worst)
        if float(np.linalg.norm(d)) <= opts.tol:
            status = "boundary" if active else "critical"
            break
        if it >= opts.max_iters:
            break
        d = cons.scaled_direction(g, cons.slack_scale(x, opts.guard), active)
        cap = cons.max_step(x, d, opts.guard, active)
        step = min(cap, max(opts.initial_step, opts.grow * last_step))
        slope = float(g @ d)
        accepted = False
        while step >= opts.min_step:
            x_new = x + step * d
            new_report, _ = ev.report(x_new)
            gain = new_report.total_volume - report.total_volume
            if gain >= opts.armijo * step * slope and gain > 0:
                accepted = True
                break
            step *= opts.shrink
        if not accepted:
            if active:
                status = "boundary"
            else:
                status, stalled = "critical", True
            break
        x, report, last_step = x_new, new_report, step
        history.append(report.total_volume)
        it += 1
        margins = cons.margins(x)
        margin_history.append(float(margins.min()))
        for cid in np.flatnonzero(margins <= opts.guard * (1 + 1e-6) + 1e-15):
            if int(cid) not in active:
                active.append(int(cid))
    pinned = [cons.describe(c) for c in sorted(active)] if status == "boundary" else []
    return MaximizeResult(
        AngleAssignment.from_radians(x), report, status, it, history, pinned, stalled, margin_history
    )
