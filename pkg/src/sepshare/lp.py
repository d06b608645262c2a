"""Exact linear programming over the rationals.

Solves  maximize c.x  subject to  A.x <= b, x >= 0  with a dense two-phase
tableau simplex using Bland's rule, so runs are deterministic and never
cycle.  All arithmetic is fractions.Fraction; statuses are values, not
exceptions, because infeasible and unbounded programs are legitimate
outcomes for callers.

Intended for the small programs this package produces (tens of variables,
hundreds of rows); no sparsity, no scaling, no warm starts.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .errors import InputError, InternalInvariant
from .rationals import format_rational, parse_rational, rat

_ZERO = Fraction(0)
_ONE = Fraction(1)

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class LinearProgram:
    """maximize objective . x  s.t.  rows[k] . x <= rhs[k],  x >= 0."""

    objective: tuple[Fraction, ...]
    rows: tuple[tuple[Fraction, ...], ...]
    rhs: tuple[Fraction, ...]
    row_labels: tuple[str, ...] = ()
    var_labels: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        n = len(self.objective)
        if len(self.rows) != len(self.rhs):
            raise InputError("row / rhs length mismatch")
        for row in self.rows:
            if len(row) != n:
                raise InputError("row width does not match objective")
        if self.row_labels and len(self.row_labels) != len(self.rows):
            raise InputError("row label count mismatch")
        if self.var_labels and len(self.var_labels) != n:
            raise InputError("var label count mismatch")

    @staticmethod
    def build(objective, rows, rhs, row_labels=(), var_labels=()) -> "LinearProgram":
        return LinearProgram(
            tuple(rat(v) for v in objective),
            tuple(tuple(rat(v) for v in row) for row in rows),
            tuple(rat(v) for v in rhs),
            tuple(row_labels),
            tuple(var_labels),
        )


@dataclass(frozen=True)
class Solution:
    status: str
    values: tuple[Fraction, ...] = ()
    objective_value: Optional[Fraction] = None


def _reduced_costs(
    tableau: list[list[Fraction]], basis: list[int], costs: list[Fraction]
) -> tuple[list[Fraction], Fraction]:
    ncols = len(tableau[0]) - 1 if tableau else len(costs)
    z = list(costs)
    value = _ZERO
    for r, col in enumerate(basis):
        cb = costs[col]
        if cb == 0:
            continue
        row = tableau[r]
        value += cb * row[-1]
        for j in range(ncols):
            z[j] -= cb * row[j]
    return z, value


def _pivot(tableau: list[list[Fraction]], basis: list[int], r: int, c: int):
    row = tableau[r]
    piv = row[c]
    inv = _ONE / piv
    tableau[r] = row = [v * inv for v in row]
    for rr, other in enumerate(tableau):
        if rr == r or other[c] == 0:
            continue
        factor = other[c]
        tableau[rr] = [a - factor * b for a, b in zip(other, row)]
    basis[r] = c
    return row


def _simplex_loop(
    tableau: list[list[Fraction]], basis: list[int], costs: list[Fraction]
) -> tuple[str, Fraction]:
    """Bland-rule pivoting until optimal or unbounded.  Returns status and
    the objective value of the final basis."""
    ncols = len(costs)
    z, value = _reduced_costs(tableau, basis, costs)
    while True:
        enter = next((j for j in range(ncols) if z[j] > 0), None)
        if enter is None:
            return OPTIMAL, value
        best_r = -1
        best_ratio: Optional[Fraction] = None
        for r, row in enumerate(tableau):
            a = row[enter]
            if a <= 0:
                continue
            ratio = row[-1] / a
            if (
                best_ratio is None
                or ratio < best_ratio
                or (ratio == best_ratio and basis[r] < basis[best_r])
            ):
                best_ratio, best_r = ratio, r
        if best_ratio is None:
            return UNBOUNDED, value
        gain = z[enter] * best_ratio
        row = _pivot(tableau, basis, best_r, enter)
        ze = z[enter]
        for j in range(ncols):
            z[j] -= ze * row[j]
        value += gain


def solve(lp: LinearProgram) -> Solution:
    """Two-phase exact simplex.  Deterministic for identical inputs."""
    n = len(lp.objective)
    m = len(lp.rows)
    ncols = n + m  # structural + slack
    tableau: list[list[Fraction]] = []
    basis: list[int] = []
    negative_rows = [k for k in range(m) if lp.rhs[k] < 0]
    art_of_row = {k: ncols + idx for idx, k in enumerate(negative_rows)}
    total_cols = ncols + len(negative_rows)
    for k in range(m):
        row = [_ZERO] * (total_cols + 1)
        sign = -1 if k in art_of_row else 1
        for j, a in enumerate(lp.rows[k]):
            row[j] = sign * a
        row[n + k] = Fraction(sign)
        row[-1] = sign * lp.rhs[k]
        if k in art_of_row:
            row[art_of_row[k]] = _ONE
            basis.append(art_of_row[k])
        else:
            basis.append(n + k)
        tableau.append(row)

    if negative_rows:
        phase1_costs = [_ZERO] * total_cols
        for col in art_of_row.values():
            phase1_costs[col] = Fraction(-1)
        status, value = _simplex_loop(tableau, basis, phase1_costs)
        if status != OPTIMAL:
            raise InternalInvariant("phase 1 cannot be unbounded")
        if value != 0:
            return Solution(status=INFEASIBLE)
        # drive leftover artificials out of the basis, dropping redundant rows
        for r in range(len(tableau) - 1, -1, -1):
            if basis[r] < ncols:
                continue
            pivot_col = next(
                (j for j in range(ncols) if tableau[r][j] != 0), None
            )
            if pivot_col is None:
                del tableau[r]
                del basis[r]
            else:
                _pivot(tableau, basis, r, pivot_col)
        tableau = [row[:ncols] + [row[-1]] for row in tableau]
        total_cols = ncols

    phase2_costs = [lp.objective[j] for j in range(n)] + [_ZERO] * (total_cols - n)
    status, value = _simplex_loop(tableau, basis, phase2_costs)
    if status == UNBOUNDED:
        return Solution(status=UNBOUNDED)
    x = [_ZERO] * n
    for r, col in enumerate(basis):
        if col < n:
            x[col] = tableau[r][-1]
    _certify(lp, x, value)
    return Solution(status=OPTIMAL, values=tuple(x), objective_value=value)


def _certify(lp: LinearProgram, x: list[Fraction], value: Fraction) -> None:
    if any(v < 0 for v in x):
        raise InternalInvariant("negative variable in reported optimum")
    for k, row in enumerate(lp.rows):
        lhs = sum((a * v for a, v in zip(row, x)), _ZERO)
        if lhs > lp.rhs[k]:
            raise InternalInvariant(f"row {k} violated by reported optimum")
    obj = sum((c * v for c, v in zip(lp.objective, x)), _ZERO)
    if obj != value:
        raise InternalInvariant("objective value mismatch in reported optimum")


# -- plain-text round trip -------------------------------------------------


def dump_lp(lp: LinearProgram) -> str:
    """One header line "n m", the objective, then one line per row with the
    rhs last; every number is p/q."""
    lines = [f"{len(lp.objective)} {len(lp.rows)}"]
    lines.append(" ".join(format_rational(c) for c in lp.objective))
    for row, b in zip(lp.rows, lp.rhs):
        lines.append(" ".join(format_rational(a) for a in row) + " " + format_rational(b))
    return "\n".join(lines) + "\n"


def parse_lp(text: str) -> LinearProgram:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise InputError("empty LP text")
    try:
        n, m = (int(tok) for tok in lines[0].split())
    except ValueError as exc:
        raise InputError("malformed LP header") from exc
    if len(lines) != 2 + m:
        raise InputError(f"expected {2 + m} lines, got {len(lines)}")
    objective = tuple(parse_rational(tok) for tok in lines[1].split())
    if len(objective) != n:
        raise InputError("objective width mismatch")
    rows = []
    rhs = []
    for ln in lines[2:]:
        nums = [parse_rational(tok) for tok in ln.split()]
        if len(nums) != n + 1:
            raise InputError("row width mismatch")
        rows.append(tuple(nums[:-1]))
        rhs.append(nums[-1])
    return LinearProgram(objective, tuple(rows), tuple(rhs))
