"""Numerical tolerances shared by the solver, the models and the reports."""

from __future__ import annotations

import os
from dataclasses import dataclass, asdict


@dataclass(frozen=True)
class Tolerances:
    """Absolute tolerances used across the package.

    Attributes:
        feas: primal feasibility residual accepted from the simplex (relative).
        gap: duality gap / complementary slackness residual.
        dual: equality of dual values when ranging a right-hand side.
        peer: intensity above which a DMU counts as a reference peer.
        efficient: virtual gap at or below which a DMU is PT-efficient.
    """

    feas: float = 1e-9
    gap: float = 1e-7
    dual: float = 1e-6
    peer: float = 1e-8
    efficient: float = 1e-6

    def as_dict(self) -> dict[str, float]:
        return asdict(self)


def tolerances() -> Tolerances:
    """Default tolerances, with ``VGA_TOL_GAP`` overriding the gap tolerance."""
    raw = os.environ.get("VGA_TOL_GAP")
    if raw is None:
        return Tolerances()
    try:
        gap = float(raw)
    except ValueError:
        raise ValueError(f"VGA_TOL_GAP must be a float, got {raw!r}") from None
    if not gap > 0:
        raise ValueError("VGA_TOL_GAP must be positive")
    return Tolerances(gap=gap)
