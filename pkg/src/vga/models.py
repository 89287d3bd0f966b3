"""The four VGA model pairs and the two-step unified-goal-price procedure.

Each model is a pair of linear programs over the same data: the TAP
(intensities ``pi`` and adjustment ratios ``q``, ``p``) and its dual, the TVG
(unit prices ``v``, ``u`` and, under a sum-of-intensities condition, the scalar
price ``w``). Step I solves both at a goal price of 1; Step II rescales the
price side so that the evaluated DMU's virtual input (Scenario I) or virtual
output (Scenario II) equals 1.

Scenario I families (``PT``, ``bTSc``) evaluate a DMU against all DMUs.
Scenario II families (``sPT``, ``sTSc``) exclude the evaluated DMU and measure
super-efficiency.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from numpy.typing import NDArray

from .config import tolerances
from .dataset import DecisionMatrix
from .lp import LpProblem, LpSolution, solve

__all__ = [
    "FAMILIES",
    "VgaError",
    "VgaVariant",
    "GoalPriceResult",
    "StepValues",
    "VgaSolution",
    "build_tap",
    "build_tvg",
    "determine_goal_price",
    "solve_two_step",
    "compute_benchmarks",
    "one_sided_prices",
]

FAMILIES = ("PT", "bTSc", "sPT", "sTSc")
_GAMMA_EPS = 1e-12
TAP_SUM_Q_SENSES = ("max",)


class VgaError(RuntimeError):
    """A model could not be solved (infeasible, unbounded or non-normalisable)."""


@dataclass(frozen=True)
class VgaVariant:
    """Model family plus the sum-of-intensities scalar where the family has one."""

    family: str
    kappa: float | None = None

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise ValueError(f"family must be one of {FAMILIES}, got {self.family!r}")
        if self.has_sic:
            if self.kappa is None or not (self.kappa > 0 and math.isfinite(self.kappa)):
                raise ValueError(f"{self.family} needs a positive finite kappa, got {self.kappa!r}")
            object.__setattr__(self, "kappa", float(self.kappa))
        elif self.kappa is not None:
            raise ValueError(f"{self.family} takes no kappa")

    @property
    def has_sic(self) -> bool:
        return self.family in ("bTSc", "sTSc")

    @property
    def scenario(self) -> str:
        return "I" if self.family in ("PT", "bTSc") else "II"

    @property
    def excludes_self(self) -> bool:
        return self.scenario == "II"

    def __str__(self) -> str:
        return f"{self.family}(kappa={self.kappa:.6g})" if self.has_sic else self.family


@dataclass(frozen=True)
class GoalPriceResult:
    """Dimensionless scale ``t_bar`` and the unified goal price ``tau = t_bar * $1``."""

    t_bar: float
    tau: float
    normalizer: float  # the Step-I virtual scale that t_bar inverts


@dataclass(frozen=True)
class StepValues:
    """Primal and dual values of one step. ``pi`` has one entry per DMU."""

    tau: float
    delta: float
    tap_objective: float
    q: NDArray[np.float64]
    p: NDArray[np.float64]
    pi: NDArray[np.float64]
    v: NDArray[np.float64]
    u: NDArray[np.float64]
    w: float
    omega: float

    @property
    def gap(self) -> float:
        return abs(self.tap_objective - self.delta)


@dataclass(frozen=True, eq=False)
class VgaSolution:
    """Complete two-step result for one DMU under one model variant."""

    variant: VgaVariant
    dmu: str
    dm: DecisionMatrix
    step1: StepValues
    goal: GoalPriceResult
    step2: StepValues
    gamma: float
    peers: Mapping[str, float]
    x_hat: NDArray[np.float64]
    y_hat: NDArray[np.float64]
    alpha_o: float
    beta_o: float
    virtual_scales: Mapping[str, tuple[float, float]]
    efficiency: float
    kappa1: float
    peer_residual: float
    step2_residual: float = math.nan
    warnings: tuple[str, ...] = field(default_factory=tuple)

    @property
    def o(self) -> int:
        return self.dm.index(self.dmu)

    @property
    def tau(self) -> float:
        return self.goal.tau

    @property
    def delta(self) -> float:
        return self.step2.delta

    @property
    def kappa(self) -> float | None:
        return self.variant.kappa

    def price_vector(self) -> NDArray[np.float64]:
        """Step-I TVG point ``(v, u[, w])``, usable as ``price_hint`` at another kappa."""
        s1 = self.step1
        tail = [s1.w] if self.variant.has_sic else []
        return np.concatenate([s1.v, s1.u, tail])


def _reference(dm: DecisionMatrix, o: int, variant: VgaVariant) -> list[int]:
    return [j for j in range(dm.n) if not (variant.excludes_self and j == o)]


def _check_inputs(dm: DecisionMatrix, o: str) -> int:
    idx = dm.index(o)
    if dm.n < 2:
        raise VgaError(f"n ≥ 2 required to evaluate a DMU, got n={dm.n}")
    return idx


def build_tap(dm: DecisionMatrix, o: str, variant: VgaVariant, tau: float = 1.0) -> LpProblem:
    """Intensity/ratio program. Variables: ``pi`` (reference DMUs), ``q``, ``p``."""
    io = _check_inputs(dm, o)
    ref = _reference(dm, io, variant)
    m, s, k = dm.m, dm.s, len(ref)
    xo, yo = dm.X[:, io], dm.Y[:, io]
    Xr, Yr = dm.X[:, ref], dm.Y[:, ref]
    rows = m + s + (1 if variant.has_sic else 0)
    A = np.zeros((rows, k + m + s))
    if variant.scenario == "I":
        A[:m, :k] = Xr
        A[m : m + s, :k] = -Yr
        b = np.concatenate([xo, -yo])
        rel = ["="] * (m + s)
        sense = "max"
    else:
        A[:m, :k] = -Xr
        A[m : m + s, :k] = Yr
        b = np.concatenate([-xo, yo])
        rel = [">="] * m + ["="] * s
        sense = "min"
    A[:m, k : k + m] = np.diag(xo)
    A[m : m + s, k + m :] = np.diag(yo)
    row_names = [f"in:{n}" for n in dm.input_names] + [f"out:{n}" for n in dm.output_names]
    if variant.has_sic:
        A[-1, :k] = 1.0
        b = np.append(b, variant.kappa)
        rel.append("=")
        row_names.append("sic")
    c = np.concatenate([np.zeros(k), np.full(m + s, float(tau))])
    var_names = (
        [f"pi:{dm.dmu_names[j]}" for j in ref]
        + [f"q:{n}" for n in dm.input_names]
        + [f"p:{n}" for n in dm.output_names]
    )
    return LpProblem(sense, c, A, tuple(rel), b, (False,) * (k + m + s), tuple(var_names), tuple(row_names))


def build_tvg(dm: DecisionMatrix, o: str, variant: VgaVariant, tau: float = 1.0) -> LpProblem:
    """Price program. Variables: ``v``, ``u`` and ``w`` under a SIC.

    Scenario II caps the virtual prices (``x_io v_i <= tau``) because those rows
    are the dual constraints of the minimised ``q`` and ``p`` columns.
    """
    io = _check_inputs(dm, o)
    ref = _reference(dm, io, variant)
    m, s = dm.m, dm.s
    xo, yo = dm.X[:, io], dm.Y[:, io]
    nw = 1 if variant.has_sic else 0
    nv = m + s + nw
    gap_rows = np.zeros((len(ref), nv))
    floor_rows = np.zeros((m + s, nv))
    floor_rows[:m, :m] = np.diag(xo)
    floor_rows[m:, m : m + s] = np.diag(yo)
    if variant.scenario == "I":
        gap_rows[:, :m] = dm.X[:, ref].T
        gap_rows[:, m : m + s] = -dm.Y[:, ref].T
        c = np.concatenate([xo, -yo])
        sense, gap_rel, floor_rel = "min", ">=", ">="
        free = [True] * (m + s)
    else:
        gap_rows[:, :m] = -dm.X[:, ref].T
        gap_rows[:, m : m + s] = dm.Y[:, ref].T
        c = np.concatenate([-xo, yo])
        sense, gap_rel, floor_rel = "max", "<=", "<="
        free = [False] * m + [True] * s
    if nw:
        gap_rows[:, -1] = 1.0
        c = np.append(c, variant.kappa)
        free.append(True)
    A = np.vstack([gap_rows, floor_rows])
    b = np.concatenate([np.zeros(len(ref)), np.full(m + s, float(tau))])
    rel = (gap_rel,) * len(ref) + (floor_rel,) * (m + s)
    var_names = [f"v:{n}" for n in dm.input_names] + [f"u:{n}" for n in dm.output_names] + (["w"] if nw else [])
    row_names = (
        [f"dmu:{dm.dmu_names[j]}" for j in ref]
        + [f"price:{n}" for n in dm.input_names]
        + [f"price:{n}" for n in dm.output_names]
    )
    return LpProblem(sense, c, A, rel, b, tuple(free), tuple(var_names), tuple(row_names))


def _evaluated_scales(variant: VgaVariant, v, u, omega, gamma, xo, yo) -> tuple[float, float]:
    alpha, beta = float(v @ xo), float(u @ yo)
    if variant.family == "bTSc":
        alpha += (1 - gamma) * omega
        beta -= gamma * omega
    elif variant.family == "sTSc":
        alpha -= (1 - gamma) * omega
        beta += gamma * omega
    return alpha, beta


def determine_goal_price(variant: VgaVariant, alpha: float, beta: float) -> GoalPriceResult:
    """Invert the Step-I virtual input (Scenario I) or virtual output (Scenario II)."""
    denom = alpha if variant.scenario == "I" else beta
    if not denom > 0:
        which = "input" if variant.scenario == "I" else "output"
        raise VgaError(f"Step-I virtual {which} scale is {denom!r}; cannot normalise")
    t_bar = 1.0 / denom
    return GoalPriceResult(t_bar=t_bar, tau=t_bar, normalizer=denom)


def _gamma(q: NDArray, p: NDArray) -> float:
    total = float(q.sum() + p.sum())
    return float(q.sum()) / total if total > _GAMMA_EPS else 0.5


def _require(sol: LpSolution, what: str) -> LpSolution:
    if not sol.optimal:
        raise VgaError(f"{what} is {sol.status}")
    return sol


def _price_stages(variant: VgaVariant, xo: NDArray, yo: NDArray, gamma: float, w_senses: tuple[str, str]) -> list:
    """Tie-break stages that single out one optimal price vector.

    The scalar price ``w`` comes first, then the virtual scale that Step II
    normalises. Each stage prefers its first sense and falls back to the other
    when the face is unbounded in that direction.
    """
    m, s = len(xo), len(yo)
    kappa = variant.kappa or 0.0
    nw = 1 if variant.has_sic else 0
    stages = []
    if nw:
        e = np.zeros(m + s + 1)
        e[-1] = 1.0
        stages.append((w_senses, e))
    norm = np.zeros(m + s + nw)
    if variant.scenario == "I":
        norm[:m] = xo
        if nw:
            norm[-1] = (1 - gamma) * kappa
    else:
        norm[m : m + s] = yo
        if nw:
            norm[-1] = gamma * kappa
    stages.append((("max", "min"), norm))
    return stages


def _solve_prices(
    tvg: LpProblem, variant: VgaVariant, xo: NDArray, yo: NDArray, gamma: float, hint: NDArray | None
) -> tuple[NDArray, float]:
    tol = tolerances()
    if hint is not None:
        hint = np.asarray(hint, float)
    sol = _require(solve(tvg, _price_stages(variant, xo, yo, gamma, ("max",))), "price program (TVG)")
    if hint is not None and hint.shape == sol.x.shape and _feasible(tvg, hint, tol.feas):
        value = float(tvg.c @ hint)
        if abs(value - sol.objective) <= tol.gap * max(1.0, abs(sol.objective)) and (
            not variant.has_sic or _positive_scales(variant, hint, xo, yo, gamma)
        ):
            return hint, value
    if variant.has_sic and (sol.tie_break_senses[0] is None or not _positive_scales(variant, sol.x, xo, yo, gamma)):
        # The largest scalar price may not exist or may push a virtual scale
        # through zero. Fall back to w = 0, which is optimal at the first SIC
        # scalar, and then to the smallest scalar price.
        fixed = _with_zero_w(tvg)
        alt = solve(fixed, _price_stages(variant, xo, yo, gamma, ("max",)))
        if (
            alt.optimal
            and abs(alt.objective - sol.objective) <= tol.gap * max(1.0, abs(sol.objective))
            and _positive_scales(variant, alt.x, xo, yo, gamma)
        ):
            return alt.x, sol.objective
        alt = solve(tvg, _price_stages(variant, xo, yo, gamma, ("min",)))
        if alt.optimal and alt.tie_break_senses[0] == "min" and _positive_scales(variant, alt.x, xo, yo, gamma):
            return alt.x, alt.objective
    return sol.x, sol.objective


def one_sided_prices(sol: VgaSolution) -> list[NDArray[np.float64]]:
    """Step-I price vectors with the largest and the smallest optimal ``w``.

    Their ``w`` values are the one-sided slopes of the optimal value in kappa.
    A direction in which ``w`` is unbounded (the adjustment program turns
    infeasible on that side) is left out.
    """
    if not sol.variant.has_sic:
        raise ValueError("one-sided prices need a model with a SIC")
    dm, io = sol.dm, sol.o
    xo, yo = dm.X[:, io], dm.Y[:, io]
    tvg = build_tvg(dm, sol.dmu, sol.variant)
    out = []
    for sense in ("max", "min"):
        res = solve(tvg, _price_stages(sol.variant, xo, yo, sol.gamma, (sense,)))
        if res.optimal and res.tie_break_senses[0] == sense:
            out.append(res.x)
    return out


def _with_zero_w(tvg: LpProblem) -> LpProblem:
    row = np.zeros((1, tvg.n_vars))
    row[0, -1] = 1.0
    return LpProblem(
        tvg.sense,
        tvg.c,
        np.vstack([tvg.A, row]),
        tvg.relations + ("=",),
        np.append(tvg.b, 0.0),
        tvg.free,
        tvg.var_names,
        tvg.row_names + ("w=0",) if tvg.row_names else (),
    )


def _positive_scales(variant: VgaVariant, x: NDArray, xo: NDArray, yo: NDArray, gamma: float) -> bool:
    m, s = len(xo), len(yo)
    w = float(x[-1]) if variant.has_sic else 0.0
    a, b = _evaluated_scales(variant, x[:m], x[m : m + s], (variant.kappa or 0.0) * w, gamma, xo, yo)
    return a > 0 and b > 0


def _feasible(p: LpProblem, x: NDArray, tol: float) -> bool:
    lhs = p.A @ x
    slack = (lhs - p.b) / (1.0 + np.abs(p.b))
    for k, rel in enumerate(p.relations):
        if rel == "=" and abs(slack[k]) > tol:
            return False
        if rel == "<=" and slack[k] > tol:
            return False
        if rel == ">=" and slack[k] < -tol:
            return False
    return bool(np.all(x[~np.array(p.free)] >= -tol))


def solve_two_step(
    dm: DecisionMatrix,
    o: str,
    variant: VgaVariant,
    price_hint: Sequence[float] | None = None,
    verify: bool = True,
) -> VgaSolution:
    """Run Step I at goal price 1, normalise, and assemble the Step-II solution.

    ``price_hint`` is a Step-I price vector ``(v, u[, w])`` from another solve
    on the same data. The TVG feasible set does not depend on kappa, so the hint
    is adopted whenever it is optimal at this kappa too; this keeps a kink
    point on the price piece it was approached from.
    """
    tol = tolerances()
    io = _check_inputs(dm, o)
    ref = _reference(dm, io, variant)
    m, s = dm.m, dm.s
    xo, yo = dm.X[:, io], dm.Y[:, io]
    kappa = variant.kappa or 0.0
    warnings: list[str] = []

    k = len(ref)
    sum_q = np.zeros(k + m + s)
    sum_q[k : k + m] = 1.0
    tap = _require(solve(build_tap(dm, o, variant), [(TAP_SUM_Q_SENSES, sum_q)]), "adjustment program (TAP)")
    pi = np.zeros(dm.n)
    pi[ref] = tap.x[:k]
    q, p = tap.x[k : k + m], tap.x[k + m :]
    gamma = _gamma(q, p)
    prices, delta1 = _solve_prices(build_tvg(dm, o, variant), variant, xo, yo, gamma, price_hint)
    v1, u1 = prices[:m], prices[m : m + s]
    w1 = float(prices[-1]) if variant.has_sic else 0.0
    omega1 = kappa * w1
    step1 = StepValues(1.0, delta1, tap.objective, q, p, pi, v1, u1, w1, omega1)
    if step1.gap > tol.gap * max(1.0, abs(delta1)):
        raise VgaError(f"Step-I duality gap {step1.gap:.3g} exceeds tolerance")

    a1, b1 = _evaluated_scales(variant, v1, u1, omega1, gamma, xo, yo)
    goal = determine_goal_price(variant, a1, b1)
    t = goal.t_bar
    step2 = StepValues(t, t * delta1, t * tap.objective, q, p, pi, t * v1, t * u1, t * w1, t * omega1)
    alpha_o, beta_o = _evaluated_scales(variant, step2.v, step2.u, step2.omega, gamma, xo, yo)

    scales: dict[str, tuple[float, float]] = {}
    for j in ref:
        a, b = _evaluated_scales(variant, step2.v, step2.u, step2.w, gamma, dm.X[:, j], dm.Y[:, j])
        scales[dm.dmu_names[j]] = (a, b)

    peers = {dm.dmu_names[j]: float(pi[j]) for j in range(dm.n) if pi[j] > tol.peer}
    # a zero input scale means unbounded efficiency; a negative one means the
    # optimal prices admit no usable normalisation
    if alpha_o < -tol.feas:
        raise VgaError(f"virtual input scale {alpha_o!r} is not positive at kappa={kappa!r}")
    x_hat, y_hat = _benchmarks(variant, q, p, xo, yo)
    peer_x, peer_y = dm.X @ pi, dm.Y @ pi
    # input rows are inequalities in Scenario II; only priced rows must be tight
    x_weight = np.ones(m) if variant.scenario == "I" else (step2.v > tol.feas).astype(float)
    peer_residual = float(
        max(
            np.max(x_weight * np.abs(peer_x - x_hat) / (1 + np.abs(x_hat)), initial=0.0),
            np.max(np.abs(peer_y - y_hat) / (1 + np.abs(y_hat)), initial=0.0),
        )
    )

    step2_residual = math.nan
    if verify:
        tvg2 = _require(solve(build_tvg(dm, o, variant, t)), "Step-II price program")
        tap2 = _require(solve(build_tap(dm, o, variant, t)), "Step-II adjustment program")
        step2_residual = max(abs(tvg2.objective - step2.delta), abs(tap2.objective - step2.delta))
        if step2_residual > tol.gap * max(1.0, abs(step2.delta)):
            warnings.append(f"Step-II re-solve differs from the scaled objective by {step2_residual:.3g}")

    return VgaSolution(
        variant=variant,
        dmu=o,
        dm=dm,
        step1=step1,
        goal=goal,
        step2=step2,
        gamma=gamma,
        peers=peers,
        x_hat=x_hat,
        y_hat=y_hat,
        alpha_o=alpha_o,
        beta_o=beta_o,
        virtual_scales=scales,
        efficiency=beta_o / alpha_o if alpha_o > 0 else math.inf,
        kappa1=float(pi.sum()),
        peer_residual=peer_residual,
        step2_residual=step2_residual,
        warnings=tuple(warnings),
    )


def _benchmarks(variant: VgaVariant, q, p, xo, yo) -> tuple[NDArray, NDArray]:
    if variant.scenario == "I":
        return xo * (1 - q), yo * (1 + p)
    return xo * (1 + q), yo * (1 - p)


def compute_benchmarks(dm: DecisionMatrix, sol: VgaSolution) -> tuple[NDArray, NDArray]:
    """Projection ``(x_hat, y_hat)`` of the evaluated DMU from its ratios."""
    io = dm.index(sol.dmu)
    return _benchmarks(sol.variant, sol.step2.q, sol.step2.p, dm.X[:, io], dm.Y[:, io])
