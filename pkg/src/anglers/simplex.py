"""Exact rational two-phase simplex with Bland's rule.

Solves ``max c.x`` subject to ``A_ub x <= b_ub``, ``A_eq x = b_eq``, ``x >= 0``
over :class:`fractions.Fraction`. Optimal solutions come with dual
multipliers; infeasible problems come with a Farkas ray.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

ZERO = Fraction(0)
ONE = Fraction(1)


@dataclass
class LPResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: list[Fraction] = field(default_factory=list)
    value: Fraction | None = None
    # optimal: A_ub^T y_ub + A_eq^T y_eq >= c, y_ub >= 0, b.y == value
    # infeasible: same sign pattern with c replaced by 0 and b.y < 0
    y_ub: list[Fraction] = field(default_factory=list)
    y_eq: list[Fraction] = field(default_factory=list)
    pivots: int = 0


def _frac(v) -> Fraction:
    return v if isinstance(v, Fraction) else Fraction(v)


class _Tableau:
    def __init__(self, rows, rhs, basis, ncols):
        self.rows = rows  # list of dict col -> Fraction (sparse)
        self.rhs = rhs
        self.basis = basis
        self.ncols = ncols
        self.pivots = 0

    def reduced_costs(self, cost: Sequence[Fraction]) -> list[Fraction]:
        d = list(cost)
        for r, row in enumerate(self.rows):
            cb = cost[self.basis[r]]
            if cb:
                for j, a in row.items():
                    d[j] -= cb * a
        return d

    def objective(self, cost: Sequence[Fraction]) -> Fraction:
        return sum((cost[self.basis[r]] * self.rhs[r] for r in range(len(self.rows))), ZERO)

    def pivot(self, r: int, j: int, d: list[Fraction]) -> None:
        row = self.rows[r]
        piv = row[j]
        if piv != ONE:
            inv = ONE / piv
            for k in row:
                row[k] *= inv
            self.rhs[r] *= inv
        for i, other in enumerate(self.rows):
            if i == r:
                continue
            f = other.get(j)
            if not f:
                continue
            for k, a in row.items():
                v = other.get(k, ZERO) - f * a
                if v:
                    other[k] = v
                else:
                    other.pop(k, None)
            self.rhs[i] -= f * self.rhs[r]
        f = d[j]
        if f:
            for k, a in row.items():
                d[k] -= f * a
        self.basis[r] = j
        self.pivots += 1

    def run(self, d: list[Fraction], allowed: Sequence[bool]) -> str:
        """Bland's rule iterations on reduced costs ``d`` (maximization)."""
        while True:
            enter = next((j for j in range(self.ncols) if allowed[j] and d[j] > 0), None)
            if enter is None:
                return "optimal"
            best = None
            for r, row in enumerate(self.rows):
                a = row.get(enter)
                if a is not None and a > 0:
                    ratio = self.rhs[r] / a
                    key = (ratio, self.basis[r])
                    if best is None or key < best[0]:
                        best = (key, r)
            if best is None:
                return "unbounded"
            self.pivot(best[1], enter, d)


def maximize(
    c: Sequence,
    A_ub: Sequence[Sequence] = (),
    b_ub: Sequence = (),
    A_eq: Sequence[Sequence] = (),
    b_eq: Sequence = (),
) -> LPResult:
    n = len(c)
    m_ub, m_eq = len(A_ub), len(A_eq)
    m = m_ub + m_eq
    # columns: x (n) | slacks (m_ub) | artificials (m)
    slack0, art0 = n, n + m_ub
    ncols = art0 + m
    rows: list[dict[int, Fraction]] = []
    rhs: list[Fraction] = []
    basis: list[int] = []
    flipped: list[bool] = []
    needs_art: list[bool] = []
    for i in range(m):
        src, b = (A_ub[i], b_ub[i]) if i < m_ub else (A_eq[i - m_ub], b_eq[i - m_ub])
        row = {j: _frac(a) for j, a in enumerate(src) if a}
        if i < m_ub:
            row[slack0 + i] = ONE
        b = _frac(b)
        flip = b < 0
        if flip:
            row = {j: -a for j, a in row.items()}
            b = -b
        use_slack = i < m_ub and not flip
        if not use_slack:
            row[art0 + i] = ONE
        rows.append(row)
        rhs.append(b)
        basis.append(slack0 + i if use_slack else art0 + i)
        flipped.append(flip)
        needs_art.append(not use_slack)
    tab = _Tableau(rows, rhs, basis, ncols)
    allowed = [True] * (art0) + [False] * m

    if any(needs_art):
        cost1 = [ZERO] * ncols
        for i in range(m):
            if needs_art[i]:
                cost1[art0 + i] = -ONE
        d1 = tab.reduced_costs(cost1)
        tab.run(d1, allowed)
        if tab.objective(cost1) < 0:
            y = _row_duals(tab, d1, cost1, art0, slack0, m_ub, flipped, m)
            return LPResult("infeasible", y_ub=y[:m_ub], y_eq=y[m_ub:], pivots=tab.pivots)
        # drive zero-level artificials out of the basis where possible
        for r in range(m):
            if tab.basis[r] >= art0:
                j = next((k for k in sorted(tab.rows[r]) if k < art0), None)
                if j is not None:
                    tab.pivot(r, j, d1)

    cost = [_frac(v) for v in c] + [ZERO] * (ncols - n)
    d = tab.reduced_costs(cost)
    status = tab.run(d, allowed)
    if status == "unbounded":
        return LPResult("unbounded", pivots=tab.pivots)
    x = [ZERO] * n
    for r, j in enumerate(tab.basis):
        if j < n:
            x[j] = tab.rhs[r]
    y = _row_duals(tab, d, cost, art0, slack0, m_ub, flipped, m)
    value = sum((cost[j] * x[j] for j in range(n)), ZERO)
    return LPResult("optimal", x, value, y[:m_ub], y[m_ub:], pivots=tab.pivots)


def _row_duals(tab, d, cost, art0, slack0, m_ub, flipped, m) -> list[Fraction]:
    """Read row duals off the identity columns: y_i = c_j - d_j for column e_i."""
    y = []
    for i in range(m):
        col = slack0 + i if (i < m_ub and not flipped[i]) else art0 + i
        yi = cost[col] - d[col]
        y.append(-yi if flipped[i] else yi)
    return y
