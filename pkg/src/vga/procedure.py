"""Four-phase assessment of one DMU.

Phase 1 screens the DMU (PT for Scenario I, sPT for efficient DMUs in
Scenario II) and reads the first SIC scalar ``kappa1`` off the peer
intensities. Phase 2 solves the SIC model at ``kappa1``. Phase 3 ranges the
SIC right-hand side to find ``kappa2``. Phase 4 evaluates the final scalar(s)
between the two.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence, Union

import numpy as np
from numpy.typing import NDArray
from scipy.optimize import brentq

from .config import tolerances
from .dataset import DecisionMatrix
from .diagnostics import DualityReport, verify_duality
from .lp import RangingResult, range_rhs
from .models import VgaError, VgaSolution, VgaVariant, build_tap, one_sided_prices, solve_two_step

__all__ = [
    "KappaPolicy",
    "Phase3Result",
    "RelationCheck",
    "AssessmentDossier",
    "classify",
    "phase3_direction",
    "find_kappa3",
    "run_assessment",
    "verify_phase_relations",
]

log = logging.getLogger(__name__)

KappaPolicy = Union[str, float, Sequence[float]]


def classify(dm: DecisionMatrix, o: str, pt: VgaSolution | None = None) -> str:
    """``"efficient"`` when the PT virtual gap is zero within tolerance."""
    pt = pt or solve_two_step(dm, o, VgaVariant("PT"))
    return "efficient" if pt.delta <= tolerances().efficient else "inefficient"


@dataclass(frozen=True)
class Phase3Result:
    """Chosen ranging endpoint ``kappa2`` with the evidence behind it.

    ``kappa2`` is None when no endpoint qualified; ``reason`` says why.
    ``ranging`` is the piece ``kappa2`` came from (the first piece otherwise).
    """

    kappa2: float | None
    ranging: RangingResult
    probes: Mapping[float, float]  # endpoint -> probed efficiency
    solution: VgaSolution | None
    w_sign_direction: str  # direction suggested by the sign of the scalar price
    reason: str = ""
    pieces: tuple[RangingResult, ...] = ()

    @property
    def direction(self) -> str | None:
        if self.kappa2 is None:
            return None
        return "decrease" if self.kappa2 < self.ranging.rhs else "increase"


def _w_sign_direction(phase2: VgaSolution) -> str:
    return "increase" if phase2.step2.w > 0 else "decrease"


def phase3_direction(
    phase2: VgaSolution,
    ranging: RangingResult | Sequence[RangingResult],
    hints: Sequence[NDArray] | None = None,
) -> Phase3Result:
    """Pick ``kappa2`` among the ranging endpoints.

    Only bounded endpoints with a non-zero allowable change qualify; at a kink
    ``kappa1`` one side is degenerate. Every qualifying endpoint is probed with
    the price vector of its piece (``hints``, default: the phase-2 prices) and
    the larger efficiency wins, ties going to the decrease endpoint.
    """
    pieces = (ranging,) if isinstance(ranging, RangingResult) else tuple(ranging)
    if hints is None:
        hints = [phase2.price_vector()] * len(pieces)
    probes: dict[float, float] = {}
    found: list[tuple[float, VgaSolution, RangingResult]] = []
    for piece, hint in zip(pieces, hints):
        # changes below this are feasibility-tolerance noise at a boundary
        min_change = tolerances().dual * max(1.0, abs(piece.rhs))
        endpoints = []
        if not piece.lower_unbounded and piece.allowable_decrease > min_change and piece.lower > 0:
            endpoints.append(piece.lower)
        if not piece.upper_unbounded and piece.allowable_increase > min_change:
            endpoints.append(piece.upper)
        for end in endpoints:
            # ranging accepts points within the feasibility tolerance of a
            # boundary, where the exact price program may already be unbounded
            inward = math.copysign(1e-8 * max(1.0, abs(end)), piece.rhs - end)
            for kappa in (end, end + inward):
                try:
                    sol = solve_two_step(
                        phase2.dm, phase2.dmu, VgaVariant(phase2.variant.family, kappa), price_hint=hint
                    )
                except VgaError as exc:
                    log.info("probe at kappa=%.12g failed: %s", kappa, exc)
                    continue
                if not np.allclose(sol.price_vector(), hint, rtol=1e-7, atol=1e-9):
                    # a different vertex: the piece itself cannot be normalised there
                    log.info("probe at kappa=%.12g left the price piece", kappa)
                    continue
                probes[kappa] = sol.efficiency
                found.append((kappa, sol, piece))
                break
    w_dir = _w_sign_direction(phase2)
    if not found:
        reason = "ranging unbounded or degenerate on both sides"
        return Phase3Result(None, pieces[0], probes, None, w_dir, reason, pieces)
    found.sort(key=lambda item: item[0])
    best = found[0]
    for item in found[1:]:
        if item[1].efficiency > best[1].efficiency + 1e-9:
            best = item
    return Phase3Result(best[0], best[2], probes, best[1], w_dir, "", pieces)


@dataclass(frozen=True)
class RelationCheck:
    name: str
    left: float
    right: float
    residual: float
    passed: bool
    required: bool = True


@dataclass(frozen=True, eq=False)
class AssessmentDossier:
    dmu: str
    scenario: str
    classification: str
    screening: VgaSolution  # PT on the full data
    phase1: VgaSolution
    phase2: VgaSolution
    phase3: Phase3Result
    phase4: tuple[tuple[float, VgaSolution], ...]
    kappa_z: float | None
    kappa3: float | None = None
    diagnostics: Mapping[str, DualityReport] = field(default_factory=dict)
    relations: tuple[RelationCheck, ...] = ()
    warnings: tuple[str, ...] = ()

    @property
    def kappa1(self) -> float:
        return self.phase2.variant.kappa  # type: ignore[return-value]

    @property
    def kappa2(self) -> float | None:
        return self.phase3.kappa2

    @property
    def final(self) -> VgaSolution | None:
        for kappa, sol in self.phase4:
            if kappa == self.kappa_z:
                return sol
        return None

    def solutions(self) -> dict[str, VgaSolution]:
        """Every solved model keyed by its table label (PT, TS1, TS2, TSz, ...)."""
        pre = "" if self.scenario == "I" else "s"
        out = {("PT" if self.scenario == "I" else "sPT"): self.phase1, f"{pre}TS1": self.phase2}
        if self.scenario == "II":
            out = {"PT": self.screening, **out}
        if self.phase3.solution is not None:
            out[f"{pre}TS2"] = self.phase3.solution
        for i, (kappa, sol) in enumerate(self.phase4):
            label = f"{pre}TSz" if kappa == self.kappa_z else f"{pre}TSz{i + 1}"
            out[label] = sol
        return out


def find_kappa3(
    phase1: VgaSolution, phase2: VgaSolution, kappa2: float, hint: NDArray | None = None
) -> float | None:
    """Scalar between ``kappa1`` and ``kappa2`` whose SIC efficiency equals the phase-1 efficiency.

    ``hint`` is the price vector of the piece towards ``kappa2`` (default: phase 2).
    """
    if hint is None:
        hint = phase2.price_vector()
    family = phase2.variant.family
    target = phase1.efficiency

    def f(kappa: float) -> float:
        sol = solve_two_step(phase2.dm, phase2.dmu, VgaVariant(family, kappa), price_hint=hint, verify=False)
        return sol.efficiency - target

    a, b = sorted((phase2.variant.kappa, kappa2))
    fa, fb = f(a), f(b)
    if fa == 0:
        return a
    if fb == 0:
        return b
    if fa * fb > 0:
        return None
    return float(brentq(f, a, b, xtol=1e-12, rtol=1e-12))


def _phase4_candidates(policy: KappaPolicy, k1: float, k2: float | None) -> tuple[list[float], list[str]]:
    notes: list[str] = []
    if isinstance(policy, str):
        if policy != "mid":
            raise ValueError(f"unknown kappa-z policy {policy!r}")
        if k2 is None:
            notes.append("kappa2 unavailable; phase 4 needs an explicit kappa")
            return [], notes
        return [0.5 * (k1 + k2)], notes
    values = [float(policy)] if isinstance(policy, (int, float)) else [float(k) for k in policy]
    if not values:
        raise ValueError("empty kappa sweep")
    if k2 is not None:
        lo, hi = min(k1, k2), max(k1, k2)
        for k in values:
            if not lo - 1e-12 <= k <= hi + 1e-12:
                raise ValueError(f"kappa {k:g} lies outside [{lo:.6g}, {hi:.6g}]")
    for k in values:
        if not k > 0:
            raise ValueError(f"kappa must be positive, got {k:g}")
    return values, notes


def run_assessment(
    dm: DecisionMatrix,
    o: str,
    kappa_z: KappaPolicy = "mid",
    scenario: str | None = None,
    search_kappa3: bool = True,
) -> AssessmentDossier:
    """Run all four phases for DMU ``o``.

    The scenario follows the screening (efficient DMUs go to Scenario II)
    unless forced. A sweep policy evaluates every listed scalar and keeps the
    most efficient one as ``kappa_z``.
    """
    warnings: list[str] = []
    screening = solve_two_step(dm, o, VgaVariant("PT"))
    label = classify(dm, o, screening)
    if scenario is None:
        scenario = "II" if label == "efficient" else "I"
    if scenario not in ("I", "II"):
        raise ValueError(f"scenario must be 'I' or 'II', got {scenario!r}")
    if scenario == "II" and label != "efficient":
        msg = f"{o} is PT-inefficient; its Scenario II results are not super-efficiencies"
        log.warning(msg)
        warnings.append(msg)

    if scenario == "I":
        phase1, family = screening, "bTSc"
    else:
        phase1, family = solve_two_step(dm, o, VgaVariant("sPT")), "sTSc"
    k1 = phase1.kappa1
    if not k1 > tolerances().peer:
        raise VgaError(f"{o} has no reference peers; the first SIC scalar is zero")
    phase2 = solve_two_step(dm, o, VgaVariant(family, k1))
    hint = phase2.price_vector()

    tap = build_tap(dm, o, phase2.variant)
    row = tap.row_index("sic")
    phase3 = phase3_direction(phase2, range_rhs(tap, row, dual=phase2.step1.w))
    if phase3.kappa2 is None:
        # the reported scalar price may sit strictly inside the subgradient
        # interval (w = 0 fallback); range the two one-sided pieces instead
        prices = one_sided_prices(phase2)
        pieces = [range_rhs(tap, row, dual=float(x[-1])) for x in prices]
        if pieces:
            phase3 = phase3_direction(phase2, pieces, prices)
            if phase3.kappa2 is not None:
                hint = next(x for x, r in zip(prices, pieces) if r is phase3.ranging)
    if phase3.kappa2 is None:
        warnings.append(f"phase 3: {phase3.reason}")

    candidates, notes = _phase4_candidates(kappa_z, k1, phase3.kappa2)
    warnings.extend(notes)
    solved = []
    for k in candidates:
        try:
            solved.append((k, solve_two_step(dm, o, VgaVariant(family, k), price_hint=hint)))
        except VgaError as exc:
            warnings.append(f"phase 4: kappa={k!r} skipped: {exc}")
    phase4 = tuple(solved)
    chosen = None
    if phase4:
        chosen = phase4[0][0]
        best = phase4[0][1].efficiency
        for k, sol in phase4[1:]:
            if sol.efficiency > best + 1e-12:
                chosen, best = k, sol.efficiency

    kappa3 = None
    if search_kappa3 and scenario == "I" and phase3.kappa2 is not None:
        try:
            kappa3 = find_kappa3(phase1, phase2, phase3.kappa2, hint)
        except VgaError as exc:
            warnings.append(f"kappa3 search failed: {exc}")

    dossier = AssessmentDossier(
        dmu=o,
        scenario=scenario,
        classification=label,
        screening=screening,
        phase1=phase1,
        phase2=phase2,
        phase3=phase3,
        phase4=phase4,
        kappa_z=chosen,
        kappa3=kappa3,
        warnings=tuple(warnings),
    )
    diags = {name: verify_duality(sol) for name, sol in dossier.solutions().items()}
    for name, rep in diags.items():
        if not rep.passed:
            worst, value = rep.worst
            warnings.append(f"{name}: duality check {worst} = {value:.3g}")
    return AssessmentDossier(
        **{**dossier.__dict__, "diagnostics": diags, "relations": tuple(verify_phase_relations(dossier)),
           "warnings": tuple(warnings)}
    )


def _check(name: str, left: float, right: float, tol: float, required: bool = True) -> RelationCheck:
    residual = abs(left - right)
    return RelationCheck(name, left, right, residual, residual <= tol, required)


def verify_phase_relations(dossier: AssessmentDossier) -> list[RelationCheck]:
    """Identities linking the phase-1, phase-2 and phase-3 solutions."""
    tol = tolerances().gap
    p1, p2 = dossier.phase1, dossier.phase2
    checks = [
        _check("step1 objective phase1 = phase2", p1.step1.delta, p2.step1.delta, tol * max(1, abs(p1.step1.delta))),
        _check("step1 sum q phase1 = phase2", float(p1.step1.q.sum()), float(p2.step1.q.sum()), tol),
        _check("step1 sum p phase1 = phase2", float(p1.step1.p.sum()), float(p2.step1.p.sum()), tol),
        _check(
            "step1 q,p elementwise phase1 = phase2",
            0.0,
            float(max(abs(p1.step1.q - p2.step1.q).max(), abs(p1.step1.p - p2.step1.p).max())),
            tol,
            required=False,
        ),
        _check("phase2 omega = kappa1 * w (step1)", p2.step1.omega, p2.variant.kappa * p2.step1.w, tol),
    ]
    # goal prices and gaps differ between phases 1 and 2 unless the scalar price vanishes
    checks.append(RelationCheck("tau phase1 != phase2", p1.tau, p2.tau, abs(p1.tau - p2.tau),
                                abs(p1.tau - p2.tau) > tol, required=False))
    checks.append(RelationCheck("delta phase1 != phase2", p1.delta, p2.delta, abs(p1.delta - p2.delta),
                                abs(p1.delta - p2.delta) > tol, required=False))
    p3 = dossier.phase3.solution
    if p3 is not None:
        for name, a, b in (("tau", p2.tau, p3.tau), ("delta", p2.delta, p3.delta), ("E", p2.efficiency, p3.efficiency)):
            checks.append(RelationCheck(f"{name} phase2 vs phase3", a, b, abs(a - b), True, required=False))
        same = dossier.phase3.direction == dossier.phase3.w_sign_direction
        checks.append(RelationCheck("kappa2 direction agrees with sign of w", float(dossier.phase3.direction == "increase"),
                                    float(dossier.phase3.w_sign_direction == "increase"), 0.0 if same else 1.0,
                                    same, required=False))
    return checks
