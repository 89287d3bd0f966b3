"""Shortlisting of alternatives: screen, group by reference peers, keep one champion per group."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .dataset import DecisionMatrix
from .models import VgaError, VgaSolution, VgaVariant, solve_two_step
from .procedure import classify

__all__ = ["GroupMember", "PeerGroup", "Shortlist", "build_shortlist"]


@dataclass(frozen=True)
class GroupMember:
    dmu: str
    efficiency: float  # sPT super-efficiency
    delta: float  # sPT virtual gap


@dataclass(frozen=True)
class PeerGroup:
    signature: tuple[str, ...]
    members: tuple[GroupMember, ...]
    champion: str


@dataclass(frozen=True, eq=False)
class Shortlist:
    """Champions ranked by super-efficiency; an advisory order, not a verdict."""

    candidates: tuple[str, ...]
    groups: tuple[PeerGroup, ...]
    efficient: tuple[str, ...]
    discarded: Mapping[str, str]
    solutions: Mapping[str, VgaSolution]  # sPT solution per efficient DMU
    screening: Mapping[str, VgaSolution]  # PT solution per DMU


def _canonical_labels(dm: DecisionMatrix) -> dict[str, str]:
    """Map each DMU to the first DMU with an identical observation."""
    data = np.vstack([dm.X, dm.Y])
    out: dict[str, str] = {}
    for j, name in enumerate(dm.dmu_names):
        for k in range(j + 1):
            if np.array_equal(data[:, k], data[:, j]):
                out[name] = dm.dmu_names[k]
                break
    return out


def _rank_key(m: GroupMember) -> tuple[float, float, str]:
    return (-m.efficiency, -m.delta, m.dmu)


def build_shortlist(dm: DecisionMatrix) -> Shortlist:
    """Stage 1 screens every DMU with PT; stage 2 groups the efficient ones by sPT peers."""
    if dm.n < 2:
        raise VgaError(f"n ≥ 2 required, got n={dm.n}")
    screening = {o: solve_two_step(dm, o, VgaVariant("PT")) for o in dm.dmu_names}
    discarded: dict[str, str] = {}
    efficient = []
    for o, sol in screening.items():
        if classify(dm, o, sol) == "efficient":
            efficient.append(o)
        else:
            discarded[o] = f"PT-inefficient (gap {sol.delta:.6g})"
    if not efficient:
        raise VgaError("no PT-efficient DMU found")

    canon = _canonical_labels(dm)
    solutions = {o: solve_two_step(dm, o, VgaVariant("sPT")) for o in efficient}
    by_signature: dict[tuple[str, ...], list[GroupMember]] = {}
    for o in efficient:
        sol = solutions[o]
        signature = tuple(sorted({canon[j] for j in sol.peers}))
        by_signature.setdefault(signature, []).append(GroupMember(o, sol.efficiency, sol.delta))

    groups = []
    for signature, members in by_signature.items():
        members.sort(key=_rank_key)
        champion = members[0].dmu
        for m in members[1:]:
            discarded[m.dmu] = f"outranked by {champion} in peer group {{{', '.join(signature)}}}"
        groups.append(PeerGroup(signature, tuple(members), champion))
    groups.sort(key=lambda g: _rank_key(g.members[0]))
    return Shortlist(
        candidates=tuple(g.champion for g in groups),
        groups=tuple(groups),
        efficient=tuple(efficient),
        discarded=discarded,
        solutions=solutions,
        screening=screening,
    )
