"""Hyperideal tetrahedra: realizability, Gram matrices, edge lengths, volume.

Angle sextuples are indexed like triangulation edges (radians). The Gram
matrix is indexed by faces: entry (i, j) is ``-cos`` of the angle at the edge
shared by faces i and j, which joins the two vertices other than i and j.
Minkowski vectors use the form ``-x0*y0 + x1*y1 + x2*y2 + x3*y3``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.integrate import quad
from scipy.special import spence

from .config import TOLERANCES
from .triangulation import EDGE_INDEX, EDGE_VERTICES, VERTEX_EDGES

MINKOWSKI = np.diag([-1.0, 1.0, 1.0, 1.0])


class GeometryError(ValueError):
    pass


class EdgeMissesHyperbolicSpace(GeometryError):
    def __init__(self, pair: tuple[int, int], value: float):
        super().__init__(f"edge misses hyperbolic space between vertices {pair} (<p,q> = {value:.6g})")
        self.pair = pair


def minkowski(x, y) -> float:
    return float(x @ MINKOWSKI @ y)


def _as_angles(angles) -> np.ndarray:
    a = np.asarray(angles, dtype=float)
    if a.shape != (6,):
        raise GeometryError("expected six dihedral angles")
    return a


def is_flat(angles, tol: float = 0.0) -> bool:
    a = _as_angles(angles)
    for i in range(3):
        pattern = np.zeros(6)
        pattern[i] = pattern[5 - i] = math.pi
        if np.all(np.abs(a - pattern) <= tol):
            return True
    return False


def is_realizable(angles, margin: float | None = None) -> tuple[bool, str | None]:
    """Strict hyperideal test. Returns ``(ok, diagnostic)``."""
    margin = TOLERANCES.realizability_margin if margin is None else margin
    a = _as_angles(angles)
    if np.any(a < 0) or np.any(a > math.pi):
        raise GeometryError("angle outside [0, pi]")
    for e, val in enumerate(a):
        if not (margin < val < math.pi - margin):
            return False, f"angle at edge {EDGE_VERTICES[e]} not in (0, pi)"
    for v in range(4):
        s = a[list(VERTEX_EDGES[v])].sum()
        if not s < math.pi - margin:
            return False, f"vertex {v}: angle sum {s:.12g} >= pi"
    return True, None


def gram_from_angles(angles, check: bool = True) -> np.ndarray:
    a = _as_angles(angles)
    if check:
        ok, why = is_realizable(a)
        if not ok:
            raise GeometryError(f"not a hyperideal angle sextuple: {why}")
    G = np.eye(4)
    for i in range(4):
        for j in range(i + 1, 4):
            G[i, j] = G[j, i] = -math.cos(a[5 - EDGE_INDEX[i, j]])
    if check:
        det = np.linalg.det(G)
        cof = cofactors(G)
        if not (det < 0 and np.all(np.diag(cof) < 0)):
            raise GeometryError(
                f"realization failed: det = {det:.3e}, diagonal cofactors = {np.diag(cof)}"
            )
    return G


def cofactors(G: np.ndarray) -> np.ndarray:
    """Cofactor matrix (symmetric input, so also the adjugate)."""
    C = np.empty((4, 4))
    for i in range(4):
        for j in range(4):
            minor = np.delete(np.delete(G, i, axis=0), j, axis=1)
            C[i, j] = (-1) ** (i + j) * np.linalg.det(minor)
    return C


def signature(G: np.ndarray, tol: float = 1e-12) -> tuple[int, int]:
    ev = np.linalg.eigvalsh(G)
    return int(np.sum(ev > tol)), int(np.sum(ev < -tol))


def edge_lengths(G: np.ndarray) -> np.ndarray:
    """Distances between truncation planes along each edge.

    For the edge joining vertices k and l: ``cosh(len) = c_kl / sqrt(c_kk c_ll)``.
    """
    C = cofactors(G)
    out = np.empty(6)
    tol = TOLERANCES.degeneration
    for e, (k, l) in enumerate(EDGE_VERTICES):
        prod = C[k, k] * C[l, l]
        if prod <= 0:
            raise GeometryError(f"degenerate vertex at edge {(k, l)}")
        arg = C[k, l] / math.sqrt(prod)
        if arg < 1 - tol:
            raise GeometryError(f"degenerate edge {(k, l)}: cosh argument {arg:.6g} < 1")
        out[e] = math.acosh(max(arg, 1.0))
    return out


def _li2(z: complex) -> complex:
    return spence(1 - z)


def _volume_closed_form(a: np.ndarray) -> float:
    # A, B, C meet at vertex 0; D, E, F are their opposite edges
    A, B, C, D, E, F = a[0], a[1], a[2], a[5], a[4], a[3]
    ea, eb, ec, ed, ee, ef = np.exp(1j * np.array([A, B, C, D, E, F]))

    def U(z):
        return 0.5 * (
            _li2(z) + _li2(ea * eb * ed * ee * z) + _li2(ea * ec * ed * ef * z) + _li2(eb * ec * ee * ef * z)
            - _li2(-ea * eb * ec * z) - _li2(-ea * ee * ef * z) - _li2(-eb * ed * ef * z) - _li2(-ec * ed * ee * z)
        )

    det = np.linalg.det(gram_from_angles(a, check=False))
    root = np.sqrt(complex(det))
    num = -2 * (math.sin(A) * math.sin(D) + math.sin(B) * math.sin(E) + math.sin(C) * math.sin(F))
    den = (ea * ed + eb * ee + ec * ef + ea * eb * ef + ea * ec * ee + eb * ec * ed
           + ed * ee * ef + ea * eb * ec * ed * ee * ef)
    z_minus = (num - 2 * root) / den
    z_plus = (num + 2 * root) / den
    return 0.5 * float((U(z_plus) - U(z_minus)).imag)


def tet_volume(angles) -> float:
    """Volume of the truncated hyperideal tetrahedron; 0 for the flat pattern."""
    a = _as_angles(angles)
    if is_flat(a):
        return 0.0
    ok, why = is_realizable(a)
    if not ok:
        raise GeometryError(f"volume undefined: {why}")
    return _volume_closed_form(a)


def lobachevsky(x: float) -> float:
    """Lobachevsky function by quadrature of ``-log|2 sin t|``.

    The ``log t`` singularity is integrated in closed form; the rest is smooth
    on [0, pi/2], and the function is odd about every multiple of pi.
    """
    x = math.fmod(x, math.pi)
    if x < 0:
        x += math.pi
    if x > math.pi / 2:
        return -lobachevsky(math.pi - x)
    if x == 0:
        return 0.0

    def smooth(t: float) -> float:
        return -math.log(math.sin(t) / t) if t > 0 else 0.0

    rest, _ = quad(smooth, 0, x, limit=200, epsabs=1e-15)
    return -x * math.log(2) - (x * math.log(x) - x) + rest


IDEAL_REGULAR = np.full(6, math.pi / 3)


def tet_volume_schlafli(angles) -> float:
    """Independent volume: integrate ``dV = -1/2 sum(len * dtheta)`` from the
    regular ideal tetrahedron along a straight path in angle space."""
    a = _as_angles(angles)
    ok, why = is_realizable(a)
    if not ok:
        raise GeometryError(f"volume undefined: {why}")
    step = a - IDEAL_REGULAR

    def rate(t: float) -> float:
        point = IDEAL_REGULAR + t * step
        return -0.5 * float(edge_lengths(gram_from_angles(point, check=False)) @ step)

    base = 3 * lobachevsky(math.pi / 3)
    val, _ = quad(rate, 0.0, 1.0, limit=200, epsabs=1e-13, epsrel=1e-12)
    return base + val


@dataclass(frozen=True)
class TetGeometry:
    angles: np.ndarray
    gram: np.ndarray
    edge_lengths: np.ndarray
    volume: float


def tet_geometry(angles) -> TetGeometry:
    a = _as_angles(angles)
    G = gram_from_angles(a)
    return TetGeometry(a, G, edge_lengths(G), _volume_closed_form(a))


def volume_and_lengths(angles) -> tuple[float, np.ndarray]:
    """Volume and edge lengths of a strict tetrahedron, skipping the realizability checks."""
    a = _as_angles(angles)
    G = gram_from_angles(a, check=False)
    return _volume_closed_form(a), edge_lengths(G)


# -- Minkowski realizations --------------------------------------------------


def _boost_to_time_axis(c: np.ndarray) -> np.ndarray:
    """Lorentz transformation sending the future timelike direction of ``c`` to e0."""
    norm = math.sqrt(-minkowski(c, c))
    u = c / norm
    if u[0] < 0:
        u = -u
    gamma = u[0]
    beta = u[1:] / gamma
    b2 = float(beta @ beta)
    L = np.eye(4)
    L[0, 0] = gamma
    L[0, 1:] = -gamma * beta
    L[1:, 0] = -gamma * beta
    if b2 > 0:
        L[1:, 1:] += (gamma - 1) * np.outer(beta, beta) / b2
    return L


def realize(angles) -> np.ndarray:
    """Vertex coordinates (rows) of a hyperideal tetrahedron with the given angles.

    Vertices are normalized to ``<v, v> = 1`` and placed with ``x0 > 0``.
    """
    G = gram_from_angles(angles)
    w, Q = np.linalg.eigh(G)
    order = np.argsort(w)  # the single negative eigenvalue first
    w, Q = w[order], Q[:, order]
    N = np.diag(np.sqrt(np.abs(w))) @ Q.T  # columns are face normals
    V = N @ np.linalg.inv(G)  # columns: dual basis, <v_k, n_i> = delta_ki
    verts = []
    for k in range(4):
        v = V[:, k]
        verts.append(v / math.sqrt(minkowski(v, v)))
    verts = np.array(verts)
    centre = verts.sum(axis=0)
    if centre[0] < 0:
        verts, centre = -verts, -centre
    L = _boost_to_time_axis(centre)
    verts = verts @ L.T
    if np.any(verts[:, 0] <= 0):
        raise GeometryError("realization failed: vertices not in a common affine chart")
    return verts


def normalize_vertex(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    q = minkowski(x, x)
    if q <= 0:
        raise GeometryError(f"vertex {x} is not hyperideal (<x,x> = {q:.6g})")
    x = x / math.sqrt(q)
    return -x if x[0] < 0 else x


def angles_from_vertices(vertices: Sequence, tol: float = 1e-10) -> np.ndarray:
    """Dihedral angles of the hyperideal tetrahedron spanned by four vertices."""
    P = np.array([normalize_vertex(v) for v in vertices])
    for e, (k, l) in enumerate(EDGE_VERTICES):
        ip = minkowski(P[k], P[l])
        if not ip < -1 - tol:
            raise EdgeMissesHyperbolicSpace((k, l), ip)
    normals = []
    for i in range(4):
        others = np.array([P[j] for j in range(4) if j != i]) @ MINKOWSKI
        _, sv, vt = np.linalg.svd(others)
        if sv[-1] < 1e-12 * sv[0]:
            raise GeometryError("coplanar vertices")
        n = vt[-1]
        q = minkowski(n, n)
        if q <= 0:
            raise GeometryError(f"face {i} misses hyperbolic space")
        n = n / math.sqrt(q)
        if minkowski(n, P[i]) < 0:
            n = -n
        normals.append(n)
    out = np.empty(6)
    for e, (k, l) in enumerate(EDGE_VERTICES):
        i, j = (x for x in range(4) if x not in (k, l))
        c = -minkowski(normals[i], normals[j])
        out[e] = math.acos(min(1.0, max(-1.0, c)))
    return out
