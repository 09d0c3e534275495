"""Exact rational linear programming kernel.

A small dense two-phase primal simplex over exact rationals.  All system
variables are free (sign-unrestricted); nonnegativity applies only to the
internal slack and artificial columns.  Strict inequalities are resolved at
the operation level: a system with strict rows is strictly feasible exactly
when the auxiliary LP that relaxes each ``a.x < b`` to ``a.x + t <= b`` and
maximizes the shared slack t has positive (or unbounded) optimum.

Pivoting is deterministic: largest reduced cost with lowest-index
tie-breaks, falling back to Bland's rule after a run of degenerate pivots
so cycling is impossible.  Identical systems therefore always produce
identical answers and witnesses.

Integer search (`has_integer_point`) is a depth-first branch over the
marked variables in their declared order, scanning each variable's closure
range from the lower bound upward and pruning subtrees whose relaxation is
not strictly feasible.  No cuts, no presolve; systems here are tiny and
exactness is the point.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .rationals import Rat, RatLike, ZERO, ceil_rat, floor_rat, rat

EQ = "eq"
LE = "le"
LT = "lt"

_FREE = 0
_POS = 1

_STALL_LIMIT = 30


class LPError(Exception):
    """Ill-posed kernel usage (not mere infeasibility)."""


class UnboundedIntegerSearch(LPError):
    """A marked variable has an unbounded closure range; branching cannot
    enumerate it.  Callers are expected to supply bounded systems."""


@dataclass(frozen=True)
class LinearConstraint:
    """One row: sum(coeff * var) rel rhs, with rel one of eq/le/lt."""

    terms: tuple[tuple[int, Rat], ...]
    rel: str
    rhs: Rat


@dataclass(frozen=True)
class OptResult:
    status: str  # "infeasible" | "bounded" | "unbounded"
    value: Rat | None = None
    attained: bool | None = None

    def __post_init__(self):
        if (self.status == "bounded") != (self.value is not None):
            raise ValueError("value must be present exactly when bounded")


class ConstraintSystem:
    """An immutable list of linear constraints over named free variables.

    `integer_vars` marks the variables `has_integer_point` branches on, in
    branching order.
    """

    def __init__(
        self,
        variables: Sequence[str],
        constraints: Iterable[LinearConstraint] = (),
        integer_vars: Sequence[str] = (),
    ):
        self.variables = tuple(variables)
        if len(set(self.variables)) != len(self.variables):
            raise ValueError("duplicate variable names")
        self._index = {v: k for k, v in enumerate(self.variables)}
        self.constraints = tuple(constraints)
        for c in self.constraints:
            if c.rel not in (EQ, LE, LT):
                raise ValueError(f"unknown relation {c.rel!r}")
            for k, _ in c.terms:
                if not 0 <= k < len(self.variables):
                    raise ValueError("constraint term out of range")
        self.integer_vars = tuple(integer_vars)
        for v in self.integer_vars:
            if v not in self._index:
                raise ValueError(f"unknown integer variable {v!r}")

    def index_of(self, var: str) -> int:
        return self._index[var]

    def row(self, coeffs: Mapping[str, RatLike], rel: str, rhs: RatLike) -> LinearConstraint:
        """Bind a sparse {variable: coefficient} row to this system."""
        terms = tuple(
            sorted((self._index[v], rat(c)) for v, c in coeffs.items() if rat(c) != 0)
        )
        return LinearConstraint(terms, rel, rat(rhs))

    def extended(self, extra: Iterable[LinearConstraint]) -> "ConstraintSystem":
        return ConstraintSystem(
            self.variables, self.constraints + tuple(extra), self.integer_vars
        )

    def with_equality(self, var: str, value: RatLike) -> "ConstraintSystem":
        return self.extended([self.row({var: 1}, EQ, value)])

    def has_strict(self) -> bool:
        return any(c.rel == LT for c in self.constraints)

    def __repr__(self) -> str:
        return (
            f"ConstraintSystem({len(self.variables)} vars, "
            f"{len(self.constraints)} constraints)"
        )


def _substitute(terms, point) -> Rat:
    return sum((c * point[k] for k, c in terms), ZERO)


def satisfies(system: ConstraintSystem, point: Sequence[Rat]) -> bool:
    """Exact membership test, strict rows strictly."""
    for c in system.constraints:
        lhs = _substitute(c.terms, point)
        if c.rel == EQ and lhs != c.rhs:
            return False
        if c.rel == LE and not lhs <= c.rhs:
            return False
        if c.rel == LT and not lhs < c.rhs:
            return False
    return True


class _Tableau:
    """Dense simplex state: maximize over rows of eq/le constraints with
    free structural variables and nonnegative slack/artificial columns."""

    __slots__ = (
        "nstruct", "ncols", "rows", "kind", "basis", "in_basis",
        "banned", "obj", "val", "art_start",
    )

    def __init__(self, nstruct: int, dense_rows):
        # dense_rows: list of (coeff list over struct vars, rel, rhs)
        n_le = sum(1 for _, rel, _ in dense_rows if rel == LE)
        self.nstruct = nstruct
        slack_start = nstruct
        art_start = nstruct + n_le
        # artificial needed for eq rows and for le rows whose rhs < 0
        n_art = sum(
            1 for coeffs, rel, rhs in dense_rows
            if rel == EQ or rhs < 0
        )
        self.ncols = art_start + n_art
        self.art_start = art_start
        self.kind = bytearray([_FREE] * nstruct) + bytearray(
            [_POS] * (self.ncols - nstruct)
        )
        self.rows = []
        self.basis = []
        self.banned = bytearray(self.ncols)
        next_slack = slack_start
        next_art = art_start
        for coeffs, rel, rhs in dense_rows:
            row = list(coeffs) + [ZERO] * (self.ncols - nstruct) + [rat(rhs)]
            if rel == LE:
                row[next_slack] = rat(1)
                slack = next_slack
                next_slack += 1
            else:
                slack = None
            if row[-1] < 0:
                row = [-x for x in row]
            if slack is not None and row[slack] > 0:
                self.basis.append(slack)
            else:
                row[next_art] = rat(1)
                self.basis.append(next_art)
                next_art += 1
            self.rows.append(row)
        self.in_basis = bytearray(self.ncols)
        for b in self.basis:
            self.in_basis[b] = 1
        self.obj = [ZERO] * self.ncols
        self.val = ZERO

    def _set_objective(self, c: Sequence[Rat]):
        obj = list(c) + [ZERO] * (self.ncols - len(c))
        val = ZERO
        for i, row in enumerate(self.rows):
            cb = obj[self.basis[i]] if self.basis[i] < len(obj) else ZERO
            if cb:
                obj = [o - cb * a for o, a in zip(obj, row)]
                val += cb * row[-1]
        # the loop above also touched the rhs slot via zip on shorter obj;
        # rebuild defensively: obj must align to ncols exactly
        self.obj = obj[: self.ncols]
        self.val = val

    def _choose_entering(self, bland: bool) -> int | None:
        obj = self.obj
        kind = self.kind
        banned = self.banned
        in_basis = self.in_basis
        best = None
        best_mag = ZERO
        for j in range(self.ncols):
            if banned[j] or in_basis[j]:
                continue
            r = obj[j]
            if r > 0 or (r < 0 and kind[j] == _FREE):
                if bland:
                    return j
                mag = r if r > 0 else -r
                if mag > best_mag:
                    best_mag = mag
                    best = j
        return best

    def _ratio_row(self, j: int, direction: int) -> int | None:
        rows = self.rows
        kind = self.kind
        basis = self.basis
        best = None
        best_ratio = None
        best_var = None
        for i in range(len(rows)):
            a = rows[i][j]
            if direction < 0:
                a = -a
            if a > 0 and kind[basis[i]] == _POS:
                ratio = rows[i][-1] / a
                if (
                    best_ratio is None
                    or ratio < best_ratio
                    or (ratio == best_ratio and basis[i] < best_var)
                ):
                    best = i
                    best_ratio = ratio
                    best_var = basis[i]
        return best

    def _pivot(self, r: int, j: int):
        rows = self.rows
        prow = rows[r]
        p = prow[j]
        if p != 1:
            inv = 1 / p
            rows[r] = prow = [x * inv for x in prow]
        for i in range(len(rows)):
            if i == r:
                continue
            f = rows[i][j]
            if f:
                rows[i] = [a - f * b for a, b in zip(rows[i], prow)]
        f = self.obj[j]
        if f:
            self.obj = [a - f * b for a, b in zip(self.obj, prow)]
            self.val += f * prow[-1]
        leaving = self.basis[r]
        self.in_basis[leaving] = 0
        self.basis[r] = j
        self.in_basis[j] = 1

    def _iterate(self, stop: Rat | None = None, strict_stop: bool = False) -> str:
        """Pivot to optimality, or until the objective passes `stop`.

        Feasibility-preserving deciders (phase 1, strictness checks) only
        need the objective to reach a threshold, not the true optimum;
        they pass `stop` and accept the 'stopped' status early.
        """
        stall = 0
        bland = False
        while True:
            if stop is not None and (self.val > stop if strict_stop else self.val >= stop):
                return "stopped"
            j = self._choose_entering(bland)
            if j is None:
                return "optimal"
            direction = 1 if self.obj[j] > 0 else -1
            r = self._ratio_row(j, direction)
            if r is None:
                return "unbounded"
            before = self.val
            self._pivot(r, j)
            if self.val == before:
                stall += 1
                if stall >= _STALL_LIMIT:
                    bland = True
            else:
                stall = 0
                bland = False

    def solve(
        self,
        objective: Sequence[Rat],
        stop: Rat | None = None,
        strict_stop: bool = False,
    ) -> str:
        """Two phases; 'infeasible', 'optimal', 'unbounded' or 'stopped'."""
        if self.ncols > self.art_start:
            c1 = [ZERO] * self.ncols
            for j in range(self.art_start, self.ncols):
                c1[j] = rat(-1)
            self._set_objective(c1)
            # the phase 1 objective is bounded above by zero, so pivoting
            # can halt as soon as zero is reached
            status = self._iterate(stop=ZERO)
            assert status in ("optimal", "stopped"), "phase 1 is bounded by zero"
            if self.val < 0:
                return "infeasible"
            self._drive_out_artificials()
        for j in range(self.art_start, self.ncols):
            self.banned[j] = 1
        self._set_objective(objective)
        return self._iterate(stop=stop, strict_stop=strict_stop)

    def _drive_out_artificials(self):
        for i in range(len(self.rows)):
            if self.basis[i] >= self.art_start:
                row = self.rows[i]
                target = None
                for j in range(self.art_start):
                    if row[j] and not self.in_basis[j]:
                        target = j
                        break
                if target is not None:
                    self._pivot(i, target)
                # else: redundant all-zero row; its artificial stays basic
                # at value zero and never interacts with later pivots

    def point(self) -> list[Rat]:
        x = [ZERO] * self.nstruct
        for i, b in enumerate(self.basis):
            if b < self.nstruct:
                x[b] = self.rows[i][-1]
        return x


def _dense_rows(system: ConstraintSystem, slack_col: int | None):
    """Densify constraints; when slack_col is given, strict rows gain +t
    there and become non-strict (the closure when slack_col is None)."""
    n = len(system.variables) + (1 if slack_col is not None else 0)
    out = []
    for c in system.constraints:
        row = [ZERO] * n
        for k, coeff in c.terms:
            row[k] = coeff
        rel = c.rel
        if rel == LT:
            if slack_col is not None:
                row[slack_col] = rat(1)
            rel = LE
        out.append((row, rel, c.rhs))
    return out


def _solve_slack_max(
    system: ConstraintSystem, decide_only: bool = False
) -> tuple[str, Rat | None, list[Rat] | None]:
    """Maximize the shared strictness slack t over the relaxed system.

    With `decide_only` the solve stops at the first basis with t > 0,
    which settles strict feasibility without reaching the optimum.
    """
    n = len(system.variables)
    t_col = n
    rows = _dense_rows(system, t_col)
    tab = _Tableau(n + 1, rows)
    obj = [ZERO] * (n + 1)
    obj[t_col] = rat(1)
    if decide_only:
        status = tab.solve(obj, stop=ZERO, strict_stop=True)
        if status == "stopped":
            return "positive", tab.val, None
    else:
        status = tab.solve(obj)
    if status == "infeasible":
        return "infeasible", None, None
    if status == "unbounded":
        return "unbounded", None, None
    return "optimal", tab.val, tab.point()


def is_strictly_feasible(system: ConstraintSystem) -> bool:
    """True when some point satisfies every constraint, strict rows
    strictly.  A system with no constraints is feasible."""
    status, value, _ = _solve_slack_max(system, decide_only=True)
    if status in ("positive", "unbounded"):
        return True
    if status == "infeasible":
        return False
    return value > 0


def find_point(system: ConstraintSystem, integral: bool = False):
    """Deterministic interior witness, or None.

    The witness is the optimum of the slack-maximization LP; when that LP
    is unbounded the slack is capped at one and the capped optimum is
    returned instead, so the result is always a concrete point.  With
    `integral=True` the integer search runs first and the witness comes
    from its first fully-integral leaf.
    """
    if integral and system.integer_vars:
        leaf = _integer_leaf(system, list(system.integer_vars))
        if leaf is None:
            return None
        return find_point(leaf)
    status, value, point = _solve_slack_max(system)
    if status == "infeasible":
        return None
    if status == "optimal":
        if value <= 0:
            return None
        return tuple(point[: len(system.variables)])
    # unbounded slack: cap t at one and re-solve for a concrete optimum
    n = len(system.variables)
    t_col = n
    rows = _dense_rows(system, t_col)
    cap = [ZERO] * (n + 1)
    cap[t_col] = rat(1)
    rows.append((cap, LE, rat(1)))
    tab = _Tableau(n + 1, rows)
    obj = [ZERO] * (n + 1)
    obj[t_col] = rat(1)
    status = tab.solve(obj)
    assert status == "optimal", "capped slack LP must be bounded"
    assert tab.val > 0
    return tuple(tab.point()[: len(system.variables)])


def _closure_optimum(system: ConstraintSystem, var: str, direction: str):
    """(status, value) of min/max of a variable over the relaxed system."""
    n = len(system.variables)
    rows = _dense_rows(system, None)
    tab = _Tableau(n, rows)
    obj = [ZERO] * n
    sign = rat(1) if direction == "max" else rat(-1)
    obj[system.index_of(var)] = sign
    status = tab.solve(obj)
    if status == "infeasible":
        return "infeasible", None
    if status == "unbounded":
        return "unbounded", None
    return "bounded", tab.val * sign


def extremize(
    system: ConstraintSystem, var: str, direction: str, attainment: bool = True
) -> OptResult:
    """Infimum/supremum of a variable over the closure (strict rows
    relaxed).  `attained` reports whether the strict system itself reaches
    the bound; pass attainment=False to skip that extra solve when only
    the bound matters (attained is then None)."""
    if direction not in ("min", "max"):
        raise ValueError("direction must be 'min' or 'max'")
    status, value = _closure_optimum(system, var, direction)
    if status != "bounded":
        return OptResult(status)
    if not system.has_strict():
        return OptResult("bounded", value, True)
    if not attainment:
        return OptResult("bounded", value, None)
    attained = is_strictly_feasible(system.with_equality(var, value))
    return OptResult("bounded", value, attained)


def _integer_leaf(system: ConstraintSystem, todo: list[str]):
    """First strictly feasible all-integral leaf in branching order."""
    if not is_strictly_feasible(system):
        return None
    return _integer_leaf_rec(system, todo)


def _integer_leaf_rec(system: ConstraintSystem, todo: list[str]):
    if not todo:
        return system
    var, rest = todo[0], todo[1:]
    lo_status, lo = _closure_optimum(system, var, "min")
    hi_status, hi = _closure_optimum(system, var, "max")
    if lo_status == "unbounded" or hi_status == "unbounded":
        raise UnboundedIntegerSearch(
            f"variable {var!r} is unbounded; cannot branch"
        )
    assert lo_status == "bounded" and hi_status == "bounded"
    for k in range(ceil_rat(lo), floor_rat(hi) + 1):
        sub = system.with_equality(var, k)
        if is_strictly_feasible(sub):
            leaf = _integer_leaf_rec(sub, rest)
            if leaf is not None:
                return leaf
    return None


def has_integer_point(system: ConstraintSystem) -> bool:
    """True when a strictly feasible point exists whose marked variables
    are all integers."""
    return _integer_leaf(system, list(system.integer_vars)) is not None
