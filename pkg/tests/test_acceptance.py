"""Acceptance criteria 1-15, one test each.

Every test records a PASS/FAIL line that is printed immediately and repeated
in the terminal summary under "acceptance criteria". Golden values come from
the published result tables for the bundled dataset and use an absolute
tolerance of 0.005, widened to half a unit in the last digit for cells printed
with a single decimal (those are passed as strings).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
import pytest

from vga.dataset import remove_dmu, table1
from vga.diagnostics import rtvs, verify_duality
from vga.lp import range_rhs
from vga.mcdm import build_shortlist
from vga.models import VgaError, VgaSolution, VgaVariant, build_tap, solve_two_step
from vga.procedure import classify, run_assessment

from _support import grid_piece, micro, random_matrices
from conftest import ACCEPTANCE

GOLDEN_TOL = 5e-3
RANDOM_SEED = 0
RANDOM_COUNT = 200


def _record(n: int, ok: bool, detail: str) -> bool:
    line = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE[n] = line
    print(line)
    return ok


def _tolerance(want: float | str) -> float:
    """0.005, or half a unit in the last printed digit when the table prints fewer decimals."""
    if isinstance(want, str):
        return max(GOLDEN_TOL, 0.5 * 10.0 ** -len(want.partition(".")[2]))
    return GOLDEN_TOL


def _golden(n: int, pairs: dict[str, tuple[float, float | str]], extra: dict[str, bool] | None = None) -> None:
    diffs = {k: abs(float(got) - float(want)) for k, (got, want) in pairs.items()}
    worst = max(diffs, key=diffs.__getitem__)
    bad = [
        f"{k}={pairs[k][0]:.6g} (want {pairs[k][1]})"
        for k, d in diffs.items()
        if not d <= _tolerance(pairs[k][1])
    ]
    bad += [k for k, ok in (extra or {}).items() if not ok]
    detail = f"{len(pairs)} values, worst {worst} off by {diffs[worst]:.1e}"
    if extra:
        detail += f", {len(extra)} exact checks"
    if bad:
        detail += "; failing: " + "; ".join(bad)
    assert _record(n, not bad, detail), detail


def _worst(label: str, values: list[tuple[float, str]], limit: float, excluded: str = "") -> None:
    worst, where = max(values, default=(0.0, "-"))
    ok = worst <= limit
    detail = f"{len(values)} checks, worst {worst:.1e} at {where} (limit {limit:g}){excluded}"
    assert _record(int(label), ok, detail), detail


@pytest.fixture(scope="module")
def dossiers():
    dm = table1()
    return {o: run_assessment(dm, o) for o in dm.dmu_names}


# ---------------------------------------------------------------- goldens


def test_criterion_01_pt_for_k(dossiers):
    d = dossiers["K"]
    pt = d.phase1
    dm = pt.dm
    _golden(
        1,
        {
            "tau": (pt.tau, 0.179),
            "delta": (pt.delta, 0.4113),
            "E": (pt.efficiency, 0.589),
            "kappa1": (pt.kappa1, 1.5153),
            "pi_B": (pt.step2.pi[dm.index("B")], 1.421),
            "pi_D": (pt.step2.pi[dm.index("D")], 0.094),
            "q1": (pt.step2.q[0], 0.0),
            "q2": (pt.step2.q[1], 0.5334),
            "p1": (pt.step2.p[0], 0.0),
            "p2": (pt.step2.p[1], 1.7677),
            "x_hat1": (pt.x_hat[0], 1.6),
            "x_hat2": (pt.x_hat[1], 67.66),
            "y_hat1": (pt.y_hat[0], 1036.0),
            "y_hat2": (pt.y_hat[1], "135.6"),
        },
        {"peers are B and D": set(pt.peers) == {"B", "D"}},
    )


def test_criterion_02_ts1_for_k(dossiers):
    d = dossiers["K"]
    ts1, pt = d.phase2, d.phase1
    _golden(
        2,
        {
            "delta#": (ts1.step1.delta, 2.3010),
            "w#": (ts1.step1.w, 1.6362),
            "tau": (ts1.tau, 0.256),
            "w*": (ts1.step2.w, 0.4190),
            "omega*": (ts1.step2.omega, 0.635),
            "gamma": (ts1.gamma, 0.232),
            "E": (ts1.efficiency, 0.411),
            "xi": (rtvs(ts1).xi, 2.435),
        },
        {"delta# equals the PT delta#": abs(ts1.step1.delta - pt.step1.delta) <= 1e-7},
    )


def test_criterion_03_ranging_and_ts2_for_k(dossiers):
    d = dossiers["K"]
    ts2 = d.phase3.solution
    assert ts2 is not None, "no kappa2 for K"
    dm = ts2.dm
    _golden(
        3,
        {
            "kappa2": (d.kappa2, 0.515),
            "E": (ts2.efficiency, 0.668),
            "q1": (ts2.step2.q[0], 0.4554),
            "q2": (ts2.step2.q[1], 0.2089),
            "p1": (ts2.step2.p[0], 0.0),
            "p2": (ts2.step2.p[1], 0.0),
            "gamma": (ts2.gamma, 1.0),
            "pi_B": (ts2.step2.pi[dm.index("B")], 0.119),
            "pi_D": (ts2.step2.pi[dm.index("D")], 0.396),
            "x_hat1": (ts2.x_hat[0], 0.8713),
            "x_hat2": (ts2.x_hat[1], 114.72),
            "y_hat1": (ts2.y_hat[0], 1036.0),
            "y_hat2": (ts2.y_hat[1], "49.0"),
        },
        {"peers are B and D": set(ts2.peers) == {"B", "D"}, "kappa2 below kappa1": d.phase3.direction == "decrease"},
    )


def test_criterion_04_kappa3_for_k(dossiers):
    d = dossiers["K"]
    assert d.kappa3 is not None, "kappa3 search found no bracket"
    ts3 = solve_two_step(d.phase2.dm, "K", VgaVariant("bTSc", d.kappa3), price_hint=d.phase2.price_vector())
    dm = ts3.dm
    gap = abs(ts3.efficiency - d.phase1.efficiency)
    _golden(
        4,
        {
            "kappa3": (d.kappa3, 0.718),
            "pi_B": (ts3.step2.pi[dm.index("B")], 0.383),
            "pi_D": (ts3.step2.pi[dm.index("D")], 0.335),
            "q1": (ts3.step2.q[0], 0.363),
            "q2": (ts3.step2.q[1], 0.275),
            "p1": (ts3.step2.p[0], 0.0),
            "p2": (ts3.step2.p[1], 0.359),
        },
        {f"|E_TS3 - E_PT| = {gap:.1e} <= 1e-3": gap <= 1e-3},
    )


def test_criterion_05_super_efficiency_of_b(dossiers):
    d = dossiers["B"]
    spt = d.phase1
    final = d.final
    assert final is not None and d.kappa2 is not None
    _golden(
        5,
        {
            "E_sPT": (spt.efficiency, 2.4126),
            "kappa1": (spt.kappa1, 0.2417),
            "tau": (spt.tau, 0.5),
            "delta": (spt.delta, 0.5855),
            "p1": (spt.step2.p[0], 0.4344),
            "p2": (spt.step2.p[1], 0.7366),
            "x_hat1": (spt.x_hat[0], 1.0),
            "x_hat2": (spt.x_hat[1], 29.0),
            "y_hat1": (spt.y_hat[0], "320.7"),
            "y_hat2": (spt.y_hat[1], 23.442),
            "kappa2": (d.kappa2, 0.4273),
            "kappa_z": (d.kappa_z, 0.3345),
            "E_sTSz": (final.efficiency, 2.4779),
        },
        {
            "classified efficient": d.classification == "efficient" and d.screening.delta <= 1e-6,
            "peers are {A}": set(spt.peers) == {"A"},
        },
    )


def test_criterion_06_super_efficiency_of_d(dossiers):
    d = dossiers["D"]
    spt = d.phase1
    final = d.final
    assert final is not None and d.kappa2 is not None
    dm = spt.dm
    _golden(
        6,
        {
            "E_sPT": (spt.efficiency, 1.3533),
            "kappa1": (spt.kappa1, 1.3411),
            "pi_B": (spt.step2.pi[dm.index("B")], 0.6424),
            "pi_G": (spt.step2.pi[dm.index("G")], 0.6986),
            "kappa2": (d.kappa2, 1.4774),
            "kappa_z": (d.kappa_z, 1.4092),
            "E_sTSz": (final.efficiency, 1.3676),
            "q1_sTSz": (final.step2.q[0], 0.1156),
            "x_hat1_sTSz": (final.x_hat[0], 2.119),
        },
        {
            "classified efficient": d.classification == "efficient" and d.screening.delta <= 1e-6,
            "peers are {B, G}": set(spt.peers) == {"B", "G"},
        },
    )


def test_criterion_07_shortlist():
    sl = build_shortlist(table1())
    e_b, e_d = sl.solutions["B"].efficiency, sl.solutions["D"].efficiency
    _golden(
        7,
        {"E_sPT(B)": (e_b, 2.4126), "E_sPT(D)": (e_d, 1.3533)},
        {
            "shortlist is [B, D]": sl.candidates == ("B", "D"),
            "groups {A} and {B,G}": {g.signature for g in sl.groups} == {("A",), ("B", "G")},
            "B ranked above D": e_b > e_d,
        },
    )


# ---------------------------------------------------------------- property suite


@dataclass(frozen=True)
class Case:
    tag: str
    sol: VgaSolution
    hint: np.ndarray | None = None  # price vector the solve was steered with, if any


def _variants(dm, o: str) -> list[Case]:
    pt = solve_two_step(dm, o, VgaVariant("PT"))
    cases = [Case(f"{o}/PT", pt)]
    if pt.kappa1 > 0:
        cases.append(Case(f"{o}/bTSc", solve_two_step(dm, o, VgaVariant("bTSc", pt.kappa1))))
    if classify(dm, o, pt) == "efficient":
        spt = solve_two_step(dm, o, VgaVariant("sPT"))
        cases.append(Case(f"{o}/sPT", spt))
        if spt.kappa1 > 0:
            cases.append(Case(f"{o}/sTSc", solve_two_step(dm, o, VgaVariant("sTSc", spt.kappa1))))
    return cases


@pytest.fixture(scope="module")
def suite(dossiers) -> list[Case]:
    cases: list[Case] = []
    for o, d in dossiers.items():
        for label, sol in d.solutions().items():
            hinted = label.lstrip("s") not in ("PT", "TS1")
            cases.append(Case(f"table1/{o}/{label}", sol, d.phase2.price_vector() if hinted else None))
    k = dossiers["K"]
    ts3 = solve_two_step(k.phase2.dm, "K", VgaVariant("bTSc", k.kappa3), price_hint=k.phase2.price_vector())
    cases.append(Case("table1/K/TS3", ts3, k.phase2.price_vector()))
    mdm = micro()
    for o in mdm.dmu_names:
        cases += [Case(f"micro/{c.tag}", c.sol) for c in _variants(mdm, o)]
    cases.append(Case("micro/Q/bTSc(1)", solve_two_step(mdm, "Q", VgaVariant("bTSc", 1.0))))
    for t, dm in enumerate(random_matrices(RANDOM_SEED, RANDOM_COUNT)):
        for o in dm.dmu_names:
            cases += [Case(f"random{t}/{c.tag}", c.sol) for c in _variants(dm, o)]
    return cases


def test_criterion_08_duality_gap(suite):
    values = []
    for c in suite:
        s = c.sol
        values.append((max(s.step1.gap, s.step2.gap, s.step2_residual), c.tag))
    _worst("8", values, 1e-7)


def test_criterion_09_complementary_slackness(suite):
    values = []
    for c in suite:
        rep = verify_duality(c.sol)
        for name, r in rep.residuals.items():
            if not name.startswith("gap:"):
                values.append((r, f"{c.tag} {name}"))
    _worst("9", values, 1e-7)


def test_criterion_10_normalisation_anchors(suite):
    values = []
    for c in suite:
        s = c.sol
        anchor = s.alpha_o if s.variant.scenario == "I" else s.beta_o
        out_of_range = max(0.0, -s.delta, s.delta - 1.0)
        values.append((max(abs(anchor - 1.0), out_of_range), c.tag))
    _worst("10", values, 1e-9)


def test_criterion_11_rtvs_identity(suite):
    values, excluded = [], []
    for c in suite:
        s = c.sol
        if math.isinf(s.efficiency):
            # zero virtual input at the optimum: unbounded efficiency, xi undefined
            assert abs(s.alpha_o) <= 1e-9
            excluded.append(c.tag)
            continue
        values.append((abs(rtvs(s).xi * s.efficiency - 1.0), c.tag))
    note = f"; {len(excluded)} unbounded-efficiency cases excluded; the printed B/sTS2 xi cell is not tested"
    _worst("11", values, 1e-9, note)


def test_criterion_12_benchmark_fixpoint(suite):
    values, excluded = [], []
    for c in suite:
        s = c.sol
        if math.isinf(s.efficiency):
            excluded.append(c.tag)
            continue
        moved = s.dm.with_column(s.dmu, s.x_hat, s.y_hat)
        try:
            fx = solve_two_step(moved, s.dmu, s.variant)
        except VgaError as exc:
            values.append((math.inf, f"{c.tag}: {exc}"))
            continue
        values.append((max(fx.delta, abs(fx.efficiency - 1.0)), c.tag))
    _worst("12", values, 1e-6, f"; {len(excluded)} unbounded-efficiency cases excluded")


def test_criterion_13_removal_invariance(suite):
    values = []
    for c in suite:
        s = c.sol
        dm = s.dm
        if dm.n <= 3:
            continue
        for name, (a, b) in s.virtual_scales.items():
            j = dm.index(name)
            if name == s.dmu or s.step2.pi[j] != 0.0 or abs(a - b) <= 1e-7:
                continue
            r = solve_two_step(remove_dmu(dm, name), s.dmu, s.variant, price_hint=c.hint)
            diffs = [abs(r.delta - s.delta), abs(r.tau - s.tau)]
            if math.isfinite(s.efficiency) or math.isfinite(r.efficiency):
                diffs.append(abs(r.efficiency - s.efficiency))
            values.append((max(diffs), f"{c.tag} without {name}"))
    _worst("13", values, 1e-9)


def _ranging_problems():
    dm = table1()
    for o in dm.dmu_names:
        d = run_assessment(dm, o, search_kappa3=False)
        tap = build_tap(dm, o, d.phase2.variant)
        yield f"table1/{o}/{d.phase2.variant}", tap, None, False
        yield f"table1/{o}/{d.phase2.variant}/w", tap, d.phase2.step1.w, False
    mdm = micro()
    for kappa in (1.0, 2.0):
        yield f"micro/Q/bTSc({kappa:g})", build_tap(mdm, "Q", VgaVariant("bTSc", kappa)), None, True
    for t, rdm in enumerate(random_matrices(RANDOM_SEED, RANDOM_COUNT)):
        o = rdm.dmu_names[t % rdm.n]
        pt = solve_two_step(rdm, o, VgaVariant("PT"))
        yield f"random{t}/{o}/bTSc", build_tap(rdm, o, VgaVariant("bTSc", pt.kappa1)), None, False
        if classify(rdm, o, pt) == "efficient":
            spt = solve_two_step(rdm, o, VgaVariant("sPT"))
            yield f"random{t}/{o}/sTSc", build_tap(rdm, o, VgaVariant("sTSc", spt.kappa1)), None, False


def test_criterion_14_ranging_against_grid_scan():
    reach, limit = 5.0, 2e-3
    values = []
    for tag, tap, dual, exhaustive in _ranging_problems():
        row = tap.row_index("sic")
        r = range_rhs(tap, row, dual=dual)
        lo, hi = grid_piece(tap, row, r.dual, reach=reach, exhaustive=exhaustive)
        for side, got, unbounded, want, far in (
            ("lower", r.lower, r.lower_unbounded, lo, r.rhs - reach),
            ("upper", r.upper, r.upper_unbounded, hi, r.rhs + reach),
        ):
            if math.isinf(want):
                # the oracle only looks `reach` far: the piece must extend at least that far
                err = 0.0 if unbounded or abs(got - r.rhs) >= reach - limit else abs(got - far)
            else:
                err = math.inf if unbounded else abs(got - want)
            values.append((err, f"{tag} {side}"))
    _worst("14", values, limit)


def _vertex_min(A: np.ndarray, b: np.ndarray, c: np.ndarray) -> tuple[float, np.ndarray]:
    """min c'x over {A x >= b} with free x, by enumerating every basic solution."""
    n = A.shape[1]
    best, arg = math.inf, None
    for rows in itertools.combinations(range(A.shape[0]), n):
        M = A[list(rows)]
        if abs(np.linalg.det(M)) < 1e-12:
            continue
        x = np.linalg.solve(M, b[list(rows)])
        if np.all(A @ x >= b - 1e-12) and c @ x < best - 1e-12:
            best, arg = float(c @ x), x
    return best, arg


def test_criterion_15_micro_instance_oracle():
    dm = micro()
    # PT price program for Q, variables (v, u): min 2v - u
    A = np.array([[1.0, -1.0], [2.0, -1.0], [2.0, 0.0], [0.0, 1.0]])
    pt_value, _ = _vertex_min(A, np.array([0.0, 0.0, 1.0, 1.0]), np.array([2.0, -1.0]))
    # bTSc at kappa = 1, variables (v, u, w): min 2v - u + w
    A = np.array([[1.0, -1.0, 1.0], [2.0, -1.0, 1.0], [2.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    ts_value, _ = _vertex_min(A, np.array([0.0, 0.0, 1.0, 1.0]), np.array([2.0, -1.0, 1.0]))
    # every optimal face point has v = 1/2 and w = u - 1/2 >= 1/2, so the smallest w is 1/2

    pt = solve_two_step(dm, "Q", VgaVariant("PT"))
    ts = solve_two_step(dm, "Q", VgaVariant("bTSc", 1.0))
    checks = {
        "PT delta#": (pt.step1.delta, pt_value),
        "PT delta*": (pt.delta, 0.5),
        "PT E": (pt.efficiency, 0.5),
        "PT kappa1": (pt.kappa1, 2.0),
        "PT pi_P": (pt.step2.pi[0], 2.0),
        "PT tau": (pt.tau, 0.5),
        "bTSc delta#": (ts.step1.delta, ts_value),
        "bTSc delta*": (ts.delta, 0.5),
        "bTSc w*": (ts.step2.w, 0.5),
        "bTSc tau": (ts.tau, 1.0),
        "bTSc gamma": (ts.gamma, 1.0),
        "bTSc E": (ts.efficiency, 0.5),
    }
    diffs = {k: abs(got - want) for k, (got, want) in checks.items()}
    worst = max(diffs, key=diffs.__getitem__)
    ok = diffs[worst] <= 1e-12 and ts.step2.w > 0 and pt_value == 1.0 and ts_value == 0.5
    detail = f"{len(checks)} values against vertex enumeration, worst {worst} off by {diffs[worst]:.1e} (limit 1e-12)"
    assert _record(15, ok, detail), detail
