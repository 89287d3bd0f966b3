"""Post-analysis of a solved model: duality certificates, virtual scales and 2D geometry."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np
from numpy.typing import NDArray

from .config import tolerances
from .models import VgaSolution

__all__ = [
    "DualityReport",
    "VirtualTechnologySet",
    "RtvsReport",
    "InterlinkageReport",
    "VectorGeometry",
    "verify_duality",
    "technology_set",
    "rtvs",
    "interlinkage",
    "geometry",
]


@dataclass(frozen=True)
class DualityReport:
    """Objectives of both programs plus every slackness/feasibility residual (Step II units)."""

    tap_objective: float
    tvg_objective: float
    gap: float
    residuals: Mapping[str, float]
    tolerance: float

    @property
    def checks(self) -> dict[str, bool]:
        return {name: r <= self.tolerance for name, r in self.residuals.items()}

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    @property
    def worst(self) -> tuple[str, float]:
        name = max(self.residuals, key=self.residuals.__getitem__)
        return name, self.residuals[name]


def _gap_rows(sol: VgaSolution) -> dict[str, float]:
    """Per reference DMU: the TVG row value, oriented so that feasibility means >= 0."""
    dm, s2 = sol.dm, sol.step2
    out = {}
    for name in sol.virtual_scales:
        j = dm.index(name)
        value = float(s2.v @ dm.X[:, j] - s2.u @ dm.Y[:, j])
        value += s2.w if sol.variant.family == "bTSc" else 0.0
        value -= s2.w if sol.variant.family == "sTSc" else 0.0
        out[name] = value
    return out


def verify_duality(sol: VgaSolution) -> DualityReport:
    """Evaluate the duality and complementary-slackness identities of ``sol``."""
    tol = tolerances().gap
    dm, s1, s2 = sol.dm, sol.step1, sol.step2
    io = sol.o
    xo, yo = dm.X[:, io], dm.Y[:, io]
    tau = s2.tau
    res: dict[str, float] = {
        "gap:step1": s1.gap,
        "gap:step2": s2.gap,
    }
    for name, row in _gap_rows(sol).items():
        pi = float(s2.pi[dm.index(name)])
        res[f"slack:pi:{name}"] = abs(row * pi)
        res[f"feas:dmu:{name}"] = max(0.0, -row)
        if pi > tolerances().peer:
            res[f"equator:{name}"] = abs(row)
    cap = sol.variant.scenario == "II"
    for i, name in enumerate(dm.input_names):
        price = float(s2.v[i] * xo[i])
        res[f"slack:q:{name}"] = abs((price - tau) * s2.q[i])
        res[f"feas:price:{name}"] = max(0.0, price - tau) if cap else max(0.0, tau - price)
    for r, name in enumerate(dm.output_names):
        price = float(s2.u[r] * yo[r])
        res[f"slack:p:{name}"] = abs((price - tau) * s2.p[r])
        res[f"feas:price:{name}"] = max(0.0, price - tau) if cap else max(0.0, tau - price)
    if cap:
        # Scenario-II input rows are inequalities: their prices must vanish where loose
        loose = xo * (1 + s2.q) - dm.X @ s2.pi
        for i, name in enumerate(dm.input_names):
            res[f"slack:v:{name}"] = abs(float(s2.v[i] * loose[i]))
            res[f"feas:v:{name}"] = max(0.0, -float(s2.v[i]))
    if sol.variant.has_sic:
        res["slack:sic"] = abs((float(s2.pi.sum()) - float(sol.variant.kappa)) * s2.w)
    return DualityReport(s2.tap_objective, s2.delta, s2.gap, res, tol)


@dataclass(frozen=True)
class VirtualTechnologySet:
    """Virtual scale ``(alpha_j, beta_j)`` of every reference DMU."""

    variant: str
    dmu: str
    points: Mapping[str, tuple[float, float]]

    def on_equator(self, tol: float = 1e-7) -> list[str]:
        return [name for name, (a, b) in self.points.items() if abs(a - b) <= tol]

    def max_excess(self) -> float:
        """Largest ``beta_j - alpha_j``; non-positive when every point lies on or below the equator."""
        return max((b - a for a, b in self.points.values()), default=-math.inf)


def technology_set(sol: VgaSolution) -> VirtualTechnologySet:
    """Points use the scalar price ``w`` split by the evaluation's own gamma."""
    return VirtualTechnologySet(str(sol.variant), sol.dmu, dict(sol.virtual_scales))


@dataclass(frozen=True)
class RtvsReport:
    alpha_hat: float
    beta_hat: float
    alpha: float
    beta: float
    xi: float


def _omega_split(sol: VgaSolution) -> tuple[float, float]:
    """Additive ``omega`` terms on the (input, output) virtual scales of DMU o."""
    om, g = sol.step2.omega, sol.gamma
    if sol.variant.family == "bTSc":
        return (1 - g) * om, -g * om
    if sol.variant.family == "sTSc":
        return -(1 - g) * om, g * om
    return 0.0, 0.0


def rtvs(sol: VgaSolution) -> RtvsReport:
    """Benchmark virtual scales and the return-to-virtual-scale ``xi``."""
    da, db = _omega_split(sol)
    a_hat = float(sol.step2.v @ sol.x_hat) + da
    b_hat = float(sol.step2.u @ sol.y_hat) + db
    denom = a_hat * sol.beta_o
    xi = (b_hat * sol.alpha_o) / denom if denom != 0 else math.nan
    return RtvsReport(a_hat, b_hat, sol.alpha_o, sol.beta_o, xi)


@dataclass(frozen=True)
class InterlinkageReport:
    gamma_q: NDArray[np.float64]
    gamma_p: NDArray[np.float64]
    input_prices: NDArray[np.float64]  # v_i x_io adjusted by the omega share
    output_prices: NDArray[np.float64]
    delta: float
    reconstructed_delta: float
    # the reconstruction is an identity only when both ratio sums are positive or omega is zero
    reconstruction_applies: bool

    @property
    def reconstruction_residual(self) -> float:
        return abs(self.reconstructed_delta - self.delta)


def interlinkage(sol: VgaSolution) -> InterlinkageReport:
    """Split of the virtual scalar over individual inputs and outputs."""
    if not sol.variant.has_sic:
        raise ValueError(f"interlinkage needs a model with a SIC, got {sol.variant.family}")
    s2, g = sol.step2, sol.gamma
    xo, yo = sol.dm.X[:, sol.o], sol.dm.Y[:, sol.o]
    sq, sp = float(s2.q.sum()), float(s2.p.sum())
    # sums at solver-noise level are treated as zero
    eps = 1e-9
    gq = (1 - g) * s2.q / sq if sq > eps else np.zeros_like(s2.q)
    gp = g * s2.p / sp if sp > eps else np.zeros_like(s2.p)
    sign = 1.0 if sol.variant.family == "bTSc" else -1.0
    in_prices = s2.v * xo + sign * gq * s2.omega
    out_prices = s2.u * yo - sign * gp * s2.omega
    recon = sign * float(in_prices.sum() - out_prices.sum())
    applies = (sq > eps and sp > eps) or abs(s2.omega) <= 1e-12
    return InterlinkageReport(gq, gp, in_prices, out_prices, s2.delta, recon, applies)


@dataclass(frozen=True)
class VectorGeometry:
    anchor: tuple[float, float]
    point: tuple[float, float]  # evaluated DMU (alpha_o, beta_o)
    projection: tuple[float, float]
    slope_origin_point: float
    slope_origin_anchor: float
    slope_anchor_point: float
    anchor_quadrant: int  # 0 on an axis

    @property
    def anchor_to_point(self) -> tuple[float, float]:
        return (self.point[0] - self.anchor[0], self.point[1] - self.anchor[1])


def _slope(dx: float, dy: float) -> float:
    return dy / dx if dx != 0 else math.nan


def _quadrant(x: float, y: float, eps: float = 1e-12) -> int:
    if abs(x) <= eps or abs(y) <= eps:
        return 0
    if x > 0:
        return 1 if y > 0 else 4
    return 2 if y > 0 else 3


def geometry(sol: VgaSolution) -> VectorGeometry:
    """Anchor point, evaluated point and projection in the virtual-scale plane."""
    anchor = _omega_split(sol)
    point = (sol.alpha_o, sol.beta_o)
    r = rtvs(sol)
    return VectorGeometry(
        anchor=anchor,
        point=point,
        projection=(r.alpha_hat, r.beta_hat),
        slope_origin_point=_slope(*point),
        slope_origin_anchor=_slope(*anchor),
        slope_anchor_point=_slope(point[0] - anchor[0], point[1] - anchor[1]),
        anchor_quadrant=_quadrant(*anchor),
    )
