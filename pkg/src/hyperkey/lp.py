"""Exact rational linear programming.

Two-phase tableau simplex in exact rationals (``gmpy2.mpq`` internally,
:class:`fractions.Fraction` at the interface). Pivoting uses the most negative
reduced cost and falls back to Bland's rule during degenerate stretches, so it
cannot cycle. Every optimal answer carries a dual vector for the internal
standard form, which :func:`check_certificate` re-verifies from scratch.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from gmpy2 import mpq

OPTIMAL = "Optimal"
INFEASIBLE = "Infeasible"
UNBOUNDED = "Unbounded"

_RELATIONS = ("<=", ">=", "=")
_ZERO = Fraction(0)
_ONE = Fraction(1)


@dataclass
class Constraint:
    coeffs: list[Fraction]
    rel: str
    rhs: Fraction


@dataclass
class LinearProgram:
    """``sense`` objective over ``n`` variables.

    Variables default to ``x >= 0``; set ``lower[j] = None`` for a free
    variable and ``upper[j]`` for an upper bound.
    """

    n: int
    objective: list[Fraction] = field(default_factory=list)
    sense: str = "min"
    constraints: list[Constraint] = field(default_factory=list)
    lower: list[Fraction | None] = field(default_factory=list)
    upper: list[Fraction | None] = field(default_factory=list)

    def __post_init__(self):
        if not self.objective:
            self.objective = [_ZERO] * self.n
        if not self.lower:
            self.lower = [_ZERO] * self.n
        if not self.upper:
            self.upper = [None] * self.n
        self.objective = [Fraction(c) for c in self.objective]
        if self.sense not in ("min", "max"):
            raise ValueError(f"sense must be 'min' or 'max', not {self.sense!r}")
        if not len(self.objective) == len(self.lower) == len(self.upper) == self.n:
            raise ValueError("objective/bounds length must equal n")

    def add(self, coeffs: Sequence, rel: str, rhs) -> None:
        if rel not in _RELATIONS:
            raise ValueError(f"relation must be one of {_RELATIONS}")
        if len(coeffs) != self.n:
            raise ValueError(f"constraint has {len(coeffs)} coefficients, expected {self.n}")
        self.constraints.append(Constraint([Fraction(a) for a in coeffs], rel, Fraction(rhs)))

    def add_sparse(self, terms: dict[int, object], rel: str, rhs) -> None:
        row = [_ZERO] * self.n
        for j, a in terms.items():
            row[j] += Fraction(a)
        self.add(row, rel, rhs)

    def copy(self) -> "LinearProgram":
        return LinearProgram(
            self.n,
            list(self.objective),
            self.sense,
            [Constraint(list(c.coeffs), c.rel, c.rhs) for c in self.constraints],
            list(self.lower),
            list(self.upper),
        )

    def is_feasible_point(self, x: Sequence[Fraction]) -> bool:
        for j in range(self.n):
            if self.lower[j] is not None and x[j] < self.lower[j]:
                return False
            if self.upper[j] is not None and x[j] > self.upper[j]:
                return False
        for c in self.constraints:
            lhs = sum((a * xj for a, xj in zip(c.coeffs, x) if a), _ZERO)
            if c.rel == "<=" and lhs > c.rhs or c.rel == ">=" and lhs < c.rhs:
                return False
            if c.rel == "=" and lhs != c.rhs:
                return False
        return True

    def value_at(self, x: Sequence[Fraction]) -> Fraction:
        return sum((c * xj for c, xj in zip(self.objective, x)), _ZERO)


@dataclass
class LpSolution:
    status: str
    value: Fraction | None = None
    x: list[Fraction] | None = None
    dual: list[Fraction] | None = None  # multipliers on the standard-form rows
    pivots: int = 0

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL


# ------------------------------------------------------------- standard form

@dataclass
class _StandardForm:
    """min c.x' + c0 s.t. A x' = b, x' >= 0, b >= 0 (slacks included)."""

    A: list[list[Fraction]]
    b: list[Fraction]
    c: list[Fraction]
    c0: Fraction
    n_struct: int  # structural columns before slacks
    # x_j = offset_j + sum(sign * x'_col) over cols_of[j]
    cols_of: list[list[tuple[int, int]]]
    offset: list[Fraction]
    basis_hint: list[int | None]  # slack column usable as initial basis per row


def _standardize(lp: LinearProgram) -> _StandardForm:
    cols_of: list[list[tuple[int, int]]] = []
    offset: list[Fraction] = []
    ncol = 0
    extra_rows: list[tuple[dict[int, Fraction], str, Fraction]] = []
    for j in range(lp.n):
        lo, hi = lp.lower[j], lp.upper[j]
        if lo is not None:
            cols_of.append([(ncol, 1)])
            offset.append(Fraction(lo))
            if hi is not None:
                extra_rows.append(({ncol: _ONE}, "<=", Fraction(hi) - lo))
            ncol += 1
        elif hi is not None:
            cols_of.append([(ncol, -1)])
            offset.append(Fraction(hi))
            ncol += 1
        else:
            cols_of.append([(ncol, 1), (ncol + 1, -1)])
            offset.append(_ZERO)
            ncol += 2
    n_struct = ncol

    sign = 1 if lp.sense == "min" else -1
    c = [_ZERO] * n_struct
    c0 = _ZERO
    for j, cj in enumerate(lp.objective):
        c0 += sign * cj * offset[j]
        for col, s in cols_of[j]:
            c[col] += sign * cj * s

    rows: list[tuple[dict[int, Fraction], str, Fraction]] = []
    for con in lp.constraints:
        terms: dict[int, Fraction] = {}
        rhs = con.rhs
        for j, a in enumerate(con.coeffs):
            if not a:
                continue
            rhs -= a * offset[j]
            for col, s in cols_of[j]:
                terms[col] = terms.get(col, _ZERO) + a * s
        rows.append((terms, con.rel, rhs))
    rows.extend(extra_rows)

    n_slack = sum(1 for _, rel, _ in rows if rel != "=")
    width = n_struct + n_slack
    A: list[list[Fraction]] = []
    b: list[Fraction] = []
    hint: list[int | None] = []
    slack = n_struct
    for terms, rel, rhs in rows:
        row = [_ZERO] * width
        for col, a in terms.items():
            row[col] = a
        scol = None
        if rel != "=":
            row[slack] = _ONE if rel == "<=" else -_ONE
            scol = slack
            slack += 1
        # flipping a zero-rhs ">=" row lets its slack start in the basis
        if rhs < 0 or rhs == 0 and rel == ">=":
            row = [-a for a in row]
            rhs = -rhs
        A.append(row)
        b.append(rhs)
        hint.append(scol if scol is not None and row[scol] == 1 else None)
    c.extend([_ZERO] * n_slack)
    return _StandardForm(A, b, c, c0, n_struct, cols_of, offset, hint)


# ------------------------------------------------------------- simplex core

class _Tableau:
    """Dense tableau held in ``gmpy2.mpq`` (exact, much faster than Fraction)."""

    def __init__(self, sf: _StandardForm):
        self.m = len(sf.A)
        self.width = len(sf.c)
        # one artificial per row lacking a usable slack
        self.art_cols: list[int] = []
        self.rows: list[list] = []
        self.basis: list[int] = []
        self.init_col: list[int] = []
        n_art = sum(1 for h in sf.basis_hint if h is None)
        total = self.width + n_art
        art = self.width
        zero, one = mpq(0), mpq(1)
        for i in range(self.m):
            row = [mpq(a) if a else zero for a in sf.A[i]] + [zero] * n_art + [mpq(sf.b[i])]
            if sf.basis_hint[i] is None:
                row[art] = one
                self.basis.append(art)
                self.art_cols.append(art)
                art += 1
            else:
                self.basis.append(sf.basis_hint[i])
            self.init_col.append(self.basis[-1])
            self.rows.append(row)
        self.total = total
        self.pivots = 0

    def reduced_costs(self, cost: list) -> list:
        r = [mpq(c) for c in cost] + [mpq(0)]
        for i, bcol in enumerate(self.basis):
            cb = cost[bcol]
            if cb:
                cb = mpq(cb)
                row = self.rows[i]
                for k in range(self.total + 1):
                    if row[k]:
                        r[k] -= cb * row[k]
        return r

    def pivot(self, i: int, j: int, obj: list) -> None:
        prow = self.rows[i]
        piv = prow[j]
        if piv != 1:
            prow = [a / piv for a in prow]
            self.rows[i] = prow
        nz = [k for k, a in enumerate(prow) if a]
        for r, row in enumerate(self.rows):
            if r != i:
                f = row[j]
                if f:
                    for k in nz:
                        row[k] -= f * prow[k]
        f = obj[j]
        if f:
            for k in nz:
                obj[k] -= f * prow[k]
        self.basis[i] = j
        self.pivots += 1

    def run(self, obj: list, allowed: list[bool]) -> str:
        """Minimize with reduced-cost row ``obj``.

        Entering column: most negative reduced cost, but Bland's smallest
        index after any degenerate pivot until the objective moves again, so
        cycling cannot occur. Leaving row: minimum ratio, ties to the smallest
        basic index.
        """
        bland = False
        while True:
            if bland:
                j = next((k for k in range(self.total) if allowed[k] and obj[k] < 0), None)
            else:
                j, low = None, 0
                for k in range(self.total):
                    if allowed[k] and obj[k] < low:
                        j, low = k, obj[k]
            if j is None:
                return OPTIMAL
            best = None
            for i, row in enumerate(self.rows):
                a = row[j]
                if a > 0:
                    key = (row[-1] / a, self.basis[i])
                    if best is None or key < best[0]:
                        best = (key, i)
            if best is None:
                return UNBOUNDED
            bland = best[0][0] == 0
            self.pivot(best[1], j, obj)


def _frac(q) -> Fraction:
    return Fraction(int(q.numerator), int(q.denominator))


def solve(lp: LinearProgram) -> LpSolution:
    sf = _standardize(lp)
    tab = _Tableau(sf)
    allowed = [True] * tab.total

    if tab.art_cols:
        phase1 = [_ZERO] * tab.total
        for a in tab.art_cols:
            phase1[a] = _ONE
        obj = tab.reduced_costs(phase1)
        tab.run(obj, allowed)
        if -obj[-1] != 0:
            return LpSolution(INFEASIBLE, pivots=tab.pivots)
        # drive zero-level artificials out where possible
        art = set(tab.art_cols)
        for i in range(tab.m):
            if tab.basis[i] in art:
                row = tab.rows[i]
                j = next((k for k in range(tab.width) if row[k] != 0), None)
                if j is not None:
                    tab.pivot(i, j, obj)
        for a in tab.art_cols:
            allowed[a] = False

    cost = sf.c + [_ZERO] * (tab.total - tab.width)
    obj = tab.reduced_costs(cost)
    status = tab.run(obj, allowed)
    if status == UNBOUNDED:
        return LpSolution(UNBOUNDED, pivots=tab.pivots)

    xs = [_ZERO] * tab.total
    for i, bcol in enumerate(tab.basis):
        xs[bcol] = _frac(tab.rows[i][-1])
    x = []
    for j in range(lp.n):
        v = sf.offset[j]
        for col, s in sf.cols_of[j]:
            v += s * xs[col]
        x.append(v)
    # y_i = c_init - reduced cost of the row's initial identity column
    dual = [cost[col] - _frac(obj[col]) for col in tab.init_col]
    value = lp.value_at(x)
    return LpSolution(OPTIMAL, value, x, dual, tab.pivots)


def check_certificate(lp: LinearProgram, sol: LpSolution) -> bool:
    """Independently confirm optimality of ``sol`` by weak duality.

    Rebuilds the standard form and checks that the stored dual vector is
    dual feasible and that its objective equals the primal value, and that
    the primal point is feasible.
    """
    if not sol.optimal or sol.x is None or sol.dual is None:
        return False
    if not lp.is_feasible_point(sol.x):
        return False
    sf = _standardize(lp)
    y = sol.dual
    if len(y) != len(sf.A):
        return False
    for k in range(len(sf.c)):
        col = sum((sf.A[i][k] * y[i] for i in range(len(y)) if sf.A[i][k]), _ZERO)
        if col > sf.c[k]:
            return False
    dual_value = sum((bi * yi for bi, yi in zip(sf.b, y)), _ZERO) + sf.c0
    primal = lp.value_at(sol.x)
    return dual_value == (primal if lp.sense == "min" else -primal)


def face_ranges(lp: LinearProgram, value: Fraction) -> list[tuple[Fraction | None, Fraction | None]]:
    """Range of each coordinate over the optimal face ``{x feasible : obj(x) = value}``.

    An unbounded direction shows up as ``None`` at that end.
    """
    face = lp.copy()
    face.add(lp.objective, "=", value)
    out = []
    for j in range(lp.n):
        unit = [_ZERO] * lp.n
        unit[j] = _ONE
        lo = solve(LinearProgram(lp.n, unit, "min", face.constraints, face.lower, face.upper))
        hi = solve(LinearProgram(lp.n, unit, "max", face.constraints, face.lower, face.upper))
        out.append((lo.value, hi.value))
    return out


def unique_optimum(lp: LinearProgram, sol: LpSolution) -> bool:
    """True iff ``sol.x`` is the only optimal point."""
    return all(lo is not None and lo == hi for lo, hi in face_ranges(lp, sol.value))
