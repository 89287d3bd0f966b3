"""Small dense linear programs: a deterministic revised simplex and RHS ranging.

The solver converts a problem to ``min c'x, Ax = b, x >= 0`` (free variables
split, slack/surplus columns added, negative right-hand sides flipped), runs a
two-phase revised simplex with Dantzig pricing, and switches to Bland's rule
after a run of degenerate pivots. The basis matrix is refactorised at every
iteration, which is cheap at the sizes used here and keeps round-off from
accumulating.

Dual values are reported as shadow prices of the *original* objective:
``duals[k] = d(objective) / d(b[k])`` in the problem's own sense.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np
from numpy.typing import NDArray

from .config import tolerances

__all__ = [
    "LpError",
    "LpNumericalError",
    "LpProblem",
    "LpSolution",
    "RangingResult",
    "solve",
    "range_rhs",
]

RELATIONS = ("=", "<=", ">=")
SENSES = ("min", "max")

_TOL_OPT = 1e-10  # reduced-cost tolerance, scaled by the cost magnitude
_TOL_PIV = 1e-9  # smallest acceptable pivot, scaled by the column magnitude
_DEGENERATE_RUN = 25  # consecutive degenerate pivots before Bland's rule
_MAX_COND = 1e13
_PHASE1_TOL = 1e-10


class LpError(Exception):
    """Base class for solver failures."""


class LpNumericalError(LpError):
    """The simplex broke down numerically (singular or ill-conditioned basis)."""


def _frozen(a: NDArray) -> NDArray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class LpProblem:
    """``sense c'x`` subject to ``A[k] x (relation[k]) b[k]``.

    Variables are nonnegative unless flagged in ``free``. Names are optional and
    only used for lookups and error messages.
    """

    sense: str
    c: NDArray[np.float64]
    A: NDArray[np.float64]
    relations: tuple[str, ...]
    b: NDArray[np.float64]
    free: tuple[bool, ...]
    var_names: tuple[str, ...] = ()
    row_names: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        c, A, b = _frozen(self.c), _frozen(self.A), _frozen(self.b)
        if A.ndim != 2:
            A = _frozen(A.reshape(len(b), len(c)))
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "relations", tuple(self.relations))
        object.__setattr__(self, "free", tuple(bool(f) for f in self.free))
        object.__setattr__(self, "var_names", tuple(self.var_names))
        object.__setattr__(self, "row_names", tuple(self.row_names))
        if self.sense not in SENSES:
            raise ValueError(f"sense must be one of {SENSES}, got {self.sense!r}")
        rows, cols = A.shape
        if len(b) != rows or len(self.relations) != rows:
            raise ValueError(
                f"A has {rows} rows but b has {len(b)} entries and "
                f"{len(self.relations)} relations were given"
            )
        if len(c) != cols or len(self.free) != cols:
            raise ValueError(
                f"A has {cols} columns but c has {len(c)} entries and "
                f"{len(self.free)} bound flags were given"
            )
        bad = [r for r in self.relations if r not in RELATIONS]
        if bad:
            raise ValueError(f"unknown relation(s) {bad}; expected one of {RELATIONS}")
        if self.var_names and len(self.var_names) != cols:
            raise ValueError("var_names length does not match the number of variables")
        if self.row_names and len(self.row_names) != rows:
            raise ValueError("row_names length does not match the number of rows")
        for name, arr in (("c", c), ("A", A), ("b", b)):
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} contains non-finite values")

    @property
    def n_vars(self) -> int:
        return self.A.shape[1]

    @property
    def n_rows(self) -> int:
        return self.A.shape[0]

    def with_rhs(self, row: int, value: float) -> "LpProblem":
        """Copy of the problem with ``b[row]`` replaced."""
        b = np.array(self.b)
        b[row] = value
        return replace(self, b=b)

    def var_index(self, name: str) -> int:
        return self.var_names.index(name)

    def row_index(self, name: str) -> int:
        return self.row_names.index(name)


@dataclass(frozen=True)
class LpSolution:
    """Outcome of :func:`solve`.

    ``x`` and ``duals`` are NaN-filled unless ``status == "optimal"``.
    ``primal_residual`` is the largest constraint violation relative to
    ``1 + |b_k|``.
    """

    status: str
    objective: float
    x: NDArray[np.float64]
    duals: NDArray[np.float64]
    iterations: int
    primal_residual: float = math.nan
    # sense that bounded each tie-break stage, or None when every sense was unbounded
    tie_break_senses: tuple[str | None, ...] = ()

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"

    def duality_gap(self, problem: LpProblem) -> float:
        return abs(float(problem.c @ self.x) - float(problem.b @ self.duals))


@dataclass(frozen=True)
class RangingResult:
    """Interval of ``b[row]`` on which the optimal value stays on one linear piece."""

    row: int
    rhs: float
    lower: float
    upper: float
    dual: float
    lower_unbounded: bool = False
    upper_unbounded: bool = False

    @property
    def allowable_decrease(self) -> float:
        return self.rhs - self.lower

    @property
    def allowable_increase(self) -> float:
        return self.upper - self.rhs

    def contains(self, value: float) -> bool:
        return self.lower <= value <= self.upper


@dataclass
class _StandardForm:
    A: NDArray
    b: NDArray
    cost: NDArray
    col_var: NDArray  # original variable per column, -1 for slack/artificial
    col_sign: NDArray
    row_sign: NDArray
    n_structural: int  # columns before the artificials
    basis: list[int] = field(default_factory=list)
    iterations: int = 0


def _standard_form(p: LpProblem) -> _StandardForm:
    rows = p.n_rows
    col_var: list[int] = []
    col_sign: list[float] = []
    cols: list[NDArray] = []
    for j in range(p.n_vars):
        cols.append(p.A[:, j])
        col_var.append(j)
        col_sign.append(1.0)
        if p.free[j]:
            cols.append(-p.A[:, j])
            col_var.append(j)
            col_sign.append(-1.0)
    for k, rel in enumerate(p.relations):
        if rel == "=":
            continue
        e = np.zeros(rows)
        e[k] = 1.0 if rel == "<=" else -1.0
        cols.append(e)
        col_var.append(-1)
        col_sign.append(0.0)
    A = np.column_stack(cols) if cols else np.zeros((rows, 0))
    b = np.array(p.b, dtype=float)
    row_sign = np.where(b < 0, -1.0, 1.0)
    A = A * row_sign[:, None]
    b = b * row_sign
    n_structural = A.shape[1]
    A = np.hstack([A, np.eye(rows)])
    sense = -1.0 if p.sense == "max" else 1.0
    cost = np.zeros(A.shape[1])
    col_var_arr = np.array(col_var + [-1] * rows)
    col_sign_arr = np.array(col_sign + [0.0] * rows)
    structural = col_var_arr >= 0
    cost[structural] = sense * p.c[col_var_arr[structural]] * col_sign_arr[structural]
    return _StandardForm(
        A=A,
        b=b,
        cost=cost,
        col_var=col_var_arr,
        col_sign=col_sign_arr,
        row_sign=row_sign,
        n_structural=n_structural,
        basis=list(range(n_structural, n_structural + rows)),
    )


def _basis_solve(B: NDArray, rhs: NDArray) -> NDArray:
    try:
        return np.linalg.solve(B, rhs)
    except np.linalg.LinAlgError as exc:
        raise LpNumericalError(f"singular basis matrix: {exc}") from None


def _basis_inverse(B: NDArray) -> NDArray:
    try:
        return np.linalg.inv(B)
    except np.linalg.LinAlgError as exc:
        raise LpNumericalError(f"singular basis matrix: {exc}") from None


def _iterate(sf: _StandardForm, cost: NDArray, eligible: NDArray, max_iter: int) -> str:
    """Run simplex pivots on ``cost`` over ``eligible`` columns; mutates the basis."""
    A, b = sf.A, sf.b
    tol_opt = _TOL_OPT * max(1.0, float(np.max(np.abs(cost))) if cost.size else 1.0)
    degenerate = 0
    bland = False
    while True:
        if sf.iterations >= max_iter:
            raise LpNumericalError(f"simplex did not converge in {max_iter} iterations")
        basis = np.array(sf.basis)
        Binv = _basis_inverse(A[:, basis])
        xB = Binv @ b
        y = cost[basis] @ Binv
        d = cost - y @ A
        mask = eligible.copy()
        mask[basis] = False
        candidates = np.flatnonzero(mask & (d < -tol_opt))
        if candidates.size == 0:
            return "optimal"
        if bland:
            e = int(candidates[0])
        else:
            e = int(candidates[np.argmin(d[candidates])])
        u = Binv @ A[:, e]
        piv_tol = _TOL_PIV * max(1.0, float(np.max(np.abs(u))))
        pos = np.flatnonzero(u > piv_tol)
        if pos.size == 0:
            return "unbounded"
        xB = np.maximum(xB, 0.0)
        ratios = xB[pos] / u[pos]
        rmin = float(ratios.min())
        ties = pos[ratios <= rmin + 1e-12 * max(1.0, rmin)]
        if bland:
            leave = int(ties[np.argmin(basis[ties])])
        else:
            best = np.max(u[ties])
            strong = ties[u[ties] >= best * (1 - 1e-9)]
            leave = int(strong[np.argmin(basis[strong])])
        if rmin <= 1e-12:
            degenerate += 1
            if degenerate >= _DEGENERATE_RUN:
                bland = True
        else:
            degenerate = 0
        sf.basis[leave] = e
        sf.iterations += 1


def _drive_out_artificials(sf: _StandardForm) -> None:
    """Pivot zero-level artificials out of the basis where a structural column allows."""
    for pos, col in enumerate(list(sf.basis)):
        if col < sf.n_structural:
            continue
        B = sf.A[:, sf.basis]
        row = _basis_solve(B.T, np.eye(len(sf.basis))[pos]) @ sf.A[:, : sf.n_structural]
        row[[c for c in sf.basis if c < sf.n_structural]] = 0.0
        k = int(np.argmax(np.abs(row)))
        if abs(row[k]) > 1e-7 * max(1.0, float(np.max(np.abs(sf.A[:, k])))):
            sf.basis[pos] = k
        # otherwise the row is redundant and the artificial stays basic at zero


def _std_vector(sf: _StandardForm, p: LpProblem, vec: NDArray, sense: str) -> NDArray:
    sign = -1.0 if sense == "max" else 1.0
    out = np.zeros(sf.A.shape[1])
    structural = sf.col_var >= 0
    out[structural] = sign * np.asarray(vec, float)[sf.col_var[structural]] * sf.col_sign[structural]
    return out


def solve(
    problem: LpProblem,
    tie_breaks: Sequence[tuple[str | Sequence[str], Iterable[float]]] = (),
) -> LpSolution:
    """Solve ``problem`` by the two-phase simplex method.

    ``tie_breaks`` is an optional sequence of ``(sense, coefficients)``
    secondary objectives, each optimised over the optimal face left by the
    previous ones. ``sense`` may list alternatives such as ``("max", "min")``:
    the next one is tried when a sense is unbounded on the face, and a stage
    with no bounded sense is skipped. When every stage is bounded the final
    point is the unique lexicographic optimum, whatever the pivot path. Dual
    values always refer to the primary objective.
    """
    p = problem
    rows = p.n_rows
    nan_x = np.full(p.n_vars, np.nan)
    nan_y = np.full(rows, np.nan)
    if rows == 0:
        raise ValueError("problem has no constraints")
    sf = _standard_form(p)
    ncols = sf.A.shape[1]
    max_iter = 50 * (rows + ncols) + 1000

    # Phase 1: minimise the sum of artificials.
    phase1 = np.zeros(ncols)
    phase1[sf.n_structural :] = 1.0
    all_cols = np.ones(ncols, dtype=bool)
    _iterate(sf, phase1, all_cols, max_iter)
    B = sf.A[:, sf.basis]
    xB = _basis_solve(B, sf.b)
    art = [i for i, col in enumerate(sf.basis) if col >= sf.n_structural]
    rows_of = [sf.basis[i] - sf.n_structural for i in art]
    # artificial mass this small is round-off; more means the rows cannot be met
    limit = _PHASE1_TOL * (1.0 + np.abs(sf.b[rows_of]))
    if np.any(xB[art] > limit):
        return LpSolution("infeasible", math.nan, nan_x, nan_y, sf.iterations)
    _drive_out_artificials(sf)

    # Phase 2 on structural columns only.
    eligible = np.zeros(ncols, dtype=bool)
    eligible[: sf.n_structural] = True
    if _iterate(sf, sf.cost, eligible, max_iter) == "unbounded":
        return LpSolution("unbounded", math.nan, nan_x, nan_y, sf.iterations)

    face = eligible
    prev = sf.cost
    used: list[str | None] = []
    for senses, vec in tie_breaks:
        senses = (senses,) if isinstance(senses, str) else tuple(senses)
        if not senses or any(sense not in SENSES for sense in senses):
            raise ValueError(f"tie-break senses must be drawn from {SENSES}")
        basis = np.array(sf.basis)
        B = sf.A[:, basis]
        y = _basis_solve(B.T, prev[basis])
        d = prev - sf.A.T @ y
        tol = _TOL_OPT * max(1.0, float(np.max(np.abs(prev))))
        face = face & (d <= tol)
        face[basis] = True
        coeffs = np.asarray(list(vec), float)
        chosen = None
        for sense in senses:
            secondary = _std_vector(sf, p, coeffs, sense)
            if _iterate(sf, secondary, face, max_iter) == "optimal":
                chosen = sense
                prev = secondary
                break
        used.append(chosen)

    basis = np.array(sf.basis)
    B = sf.A[:, basis]
    if np.linalg.cond(B) > _MAX_COND:
        raise LpNumericalError("optimal basis is ill-conditioned")
    xB = np.maximum(_basis_solve(B, sf.b), 0.0)
    x_std = np.zeros(ncols)
    x_std[basis] = xB
    x = np.zeros(p.n_vars)
    structural = np.flatnonzero(sf.col_var >= 0)
    np.add.at(x, sf.col_var[structural], sf.col_sign[structural] * x_std[structural])
    y = _basis_solve(B.T, sf.cost[basis])
    duals = y * sf.row_sign * (-1.0 if p.sense == "max" else 1.0)

    lhs = p.A @ x
    viol = np.zeros(rows)
    for k, rel in enumerate(p.relations):
        diff = lhs[k] - p.b[k]
        if rel == "=":
            viol[k] = abs(diff)
        elif rel == "<=":
            viol[k] = max(diff, 0.0)
        else:
            viol[k] = max(-diff, 0.0)
    residual = float(np.max(viol / (1.0 + np.abs(p.b))))
    if residual > 1e-6:
        raise LpNumericalError(f"primal residual {residual:.3g} after convergence")
    return LpSolution(
        "optimal",
        float(p.c @ x),
        x,
        duals,
        sf.iterations,
        residual,
        tuple(used),
    )


def range_rhs(
    problem: LpProblem,
    row: int,
    *,
    dual: float | None = None,
    tol_dual: float | None = None,
    max_span: float = 1e6,
) -> RangingResult:
    """Ranging of ``b[row]`` by re-solving, independent of the basis.

    The returned interval is the largest one around the current ``b[row]`` on
    which every re-solve stays optimal with the row's dual equal to ``dual``
    (default: the dual reported at the current right-hand side). At a
    breakpoint the optimal value has two slopes; passing ``dual`` selects the
    piece. Each side is located by step doubling and then bisection.
    """
    if not 0 <= row < problem.n_rows:
        raise IndexError(f"row {row} out of range for {problem.n_rows} rows")
    tol = tolerances().dual if tol_dual is None else tol_dual
    base = solve(problem)
    if not base.optimal:
        raise LpError(f"cannot range row {row}: problem is {base.status} at the current rhs")
    ref = float(base.duals[row]) if dual is None else float(dual)
    b0 = float(problem.b[row])
    scale = max(1.0, abs(b0))

    def on_piece(t: float) -> bool:
        sol = solve(problem.with_rhs(row, b0 + t))
        return sol.optimal and abs(float(sol.duals[row]) - ref) <= tol

    ends: list[tuple[float, bool]] = []
    for direction in (-1.0, 1.0):
        good, bad = 0.0, None
        step = 1e-3 * scale
        while step <= max_span * scale:
            if on_piece(direction * step):
                good = step
                step *= 2.0
            else:
                bad = step
                break
        if bad is None:
            ends.append((direction * math.inf, True))
            continue
        while bad - good > 1e-11 * scale:
            mid = 0.5 * (good + bad)
            if on_piece(direction * mid):
                good = mid
            else:
                bad = mid
        ends.append((b0 + direction * good, False))
    (lower, lo_unb), (upper, up_unb) = ends
    if lo_unb:
        lower = -math.inf
    if up_unb:
        upper = math.inf
    return RangingResult(row, b0, lower, upper, ref, lo_unb, up_unb)
