"""Exact rational linear programming: two-phase tableau simplex, Bland's rule.

Coefficients go in as ``Fraction`` (or ints) and results come back as
``Fraction``. The pivoting runs on ``gmpy2.mpq`` for speed; values are
identical since both are exact.
"""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass
from fractions import Fraction

from gmpy2 import mpq

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

_ZERO = mpq(0)


def _to_fraction(q) -> Fraction:
    return Fraction(int(q.numerator), int(q.denominator))


@dataclass
class LPResult:
    status: str
    value: Fraction | None = None
    x: list[Fraction] | None = None
    pivots: int = 0

    @property
    def feasible(self) -> bool:
        return self.status != INFEASIBLE

    def __getitem__(self, var: int) -> Fraction:
        return self.x[var]


class LinearProgram:
    """Small LP builder; variables are integer handles.

    >>> lp = LinearProgram()
    >>> x, y = lp.var(), lp.var()
    >>> lp.add({x: 1, y: 1}, "<=", 1)
    >>> lp.maximize({x: 2, y: 1})
    >>> lp.solve().value
    Fraction(2, 1)
    """

    def __init__(self):
        self._lower: list[Fraction | None] = []
        self._rows: list[tuple[dict[int, Fraction], str, Fraction]] = []
        self._objective: dict[int, Fraction] = {}
        self._sign = 1

    def var(self, lower: Fraction | int | None = 0) -> int:
        """New variable with lower bound ``lower`` (``None`` for free)."""
        self._lower.append(None if lower is None else Fraction(lower))
        return len(self._lower) - 1

    def vars(self, count: int, lower=0) -> list[int]:
        return [self.var(lower) for _ in range(count)]

    def add(self, coeffs: Mapping[int, Fraction], sense: str, rhs) -> None:
        if sense not in ("<=", ">=", "=="):
            raise ValueError(f"unknown constraint sense {sense!r}")
        self._rows.append(({k: Fraction(v) for k, v in coeffs.items() if v != 0}, sense, Fraction(rhs)))

    def maximize(self, coeffs: Mapping[int, Fraction]) -> None:
        self._objective = {k: Fraction(v) for k, v in coeffs.items()}
        self._sign = 1

    def minimize(self, coeffs: Mapping[int, Fraction]) -> None:
        self._objective = {k: Fraction(v) for k, v in coeffs.items()}
        self._sign = -1

    # -- standard form ---------------------------------------------------------

    def _columns(self):
        """Map each variable to (column, sign) pairs after bound shifts/splits."""
        cols: list[list[tuple[int, int]]] = []
        n = 0
        for lower in self._lower:
            if lower is None:
                cols.append([(n, 1), (n + 1, -1)])
                n += 2
            else:
                cols.append([(n, 1)])
                n += 1
        return cols, n

    def solve(self) -> LPResult:
        cols, n_struct = self._columns()
        rows = []
        for coeffs, sense, rhs in self._rows:
            row = {}
            shift = Fraction(0)
            for var, c in coeffs.items():
                lower = self._lower[var]
                if lower:
                    shift += c * lower
                for col, sgn in cols[var]:
                    row[col] = row.get(col, 0) + sgn * c
            rows.append((row, sense, rhs - shift))
        objective = {}
        obj_shift = Fraction(0)
        for var, c in self._objective.items():
            lower = self._lower[var]
            if lower:
                obj_shift += c * lower
            for col, sgn in cols[var]:
                objective[col] = objective.get(col, 0) + self._sign * sgn * c

        result = _simplex(rows, objective, n_struct)
        if result.status != OPTIMAL:
            return result
        xs = result.x
        values = []
        for var, lower in enumerate(self._lower):
            v = sum(sgn * xs[col] for col, sgn in cols[var])
            values.append(v + (lower or 0))
        value = self._sign * result.value + obj_shift
        return LPResult(OPTIMAL, value, values, result.pivots)


def _simplex(rows, objective, n_struct) -> LPResult:
    """Maximize ``objective`` subject to ``rows`` with all columns >= 0."""
    m = len(rows)
    # slack/surplus columns
    n_slack = sum(1 for _, sense, _ in rows if sense != "==")
    n_cols = n_struct + n_slack
    tableau: list[list] = []
    basis: list[int] = []
    needs_artificial: list[int] = []
    slack_col = n_struct
    for r, (coeffs, sense, rhs) in enumerate(rows):
        line = [_ZERO] * n_cols
        for col, c in coeffs.items():
            line[col] = mpq(c)
        rhs = mpq(rhs)
        slack = None
        if sense != "==":
            slack = slack_col
            line[slack] = mpq(1) if sense == "<=" else mpq(-1)
            slack_col += 1
        if rhs < 0:
            line = [-v for v in line]
            rhs = -rhs
        line.append(rhs)
        tableau.append(line)
        if slack is not None and line[slack] == 1:
            basis.append(slack)
        else:
            basis.append(-1)
            needs_artificial.append(r)

    n_art = len(needs_artificial)
    total = n_cols + n_art
    for r, line in enumerate(tableau):
        rhs = line.pop()
        line.extend([_ZERO] * n_art)
        line.append(rhs)
    for k, r in enumerate(needs_artificial):
        tableau[r][n_cols + k] = mpq(1)
        basis[r] = n_cols + k

    pivots = 0
    if n_art:
        cost = [_ZERO] * n_cols + [mpq(-1)] * n_art
        status, count = _run(tableau, basis, cost, total, m)
        pivots += count
        phase1 = _objective_value(tableau, basis, cost)
        if phase1 < 0:
            return LPResult(INFEASIBLE, pivots=pivots)
        # drive zero-valued artificials out of the basis
        keep = []
        for r in range(m):
            if basis[r] >= n_cols:
                line = tableau[r]
                col = next((c for c in range(n_cols) if line[c] != 0), None)
                if col is None:
                    continue  # redundant row
                _pivot(tableau, basis, r, col)
                pivots += 1
            keep.append(r)
        tableau = [tableau[r][:n_cols] + [tableau[r][-1]] for r in keep]
        basis = [basis[r] for r in keep]
        m = len(tableau)

    cost = [_ZERO] * n_cols
    for col, c in objective.items():
        cost[col] = mpq(c)
    status, count = _run(tableau, basis, cost, n_cols, m)
    pivots += count
    if status == UNBOUNDED:
        return LPResult(UNBOUNDED, pivots=pivots)
    x = [_ZERO] * n_cols
    for r, b in enumerate(basis):
        x[b] = tableau[r][-1]
    value = sum((cost[c] * x[c] for c in range(n_cols)), _ZERO)
    return LPResult(
        OPTIMAL,
        _to_fraction(value),
        [_to_fraction(v) for v in x[:n_struct]],
        pivots,
    )


def _objective_value(tableau, basis, cost):
    return sum((cost[b] * tableau[r][-1] for r, b in enumerate(basis)), _ZERO)


def _pivot(tableau, basis, r, col):
    line = tableau[r]
    p = line[col]
    if p != 1:
        line = [v / p for v in line]
        tableau[r] = line
    for k, other in enumerate(tableau):
        if k == r:
            continue
        f = other[col]
        if f != 0:
            tableau[k] = [a - f * b for a, b in zip(other, line)]
    basis[r] = col


def _run(tableau, basis, cost, n_cols, m):
    """Primal simplex with Bland's rule on columns ``[0, n_cols)``."""
    count = 0
    while True:
        in_basis = set(basis)
        entering = None
        for col in range(n_cols):
            if col in in_basis:
                continue
            reduced = cost[col] - sum(
                (cost[basis[r]] * tableau[r][col] for r in range(m)), _ZERO
            )
            if reduced > 0:
                entering = col
                break
        if entering is None:
            return OPTIMAL, count
        leaving = None
        best = None
        for r in range(m):
            a = tableau[r][entering]
            if a > 0:
                ratio = tableau[r][-1] / a
                if best is None or ratio < best or (ratio == best and basis[r] < basis[leaving]):
                    best, leaving = ratio, r
        if leaving is None:
            return UNBOUNDED, count
        _pivot(tableau, basis, leaving, entering)
        count += 1
