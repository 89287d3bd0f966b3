"""Serialisation of assessment dossiers and shortlists to JSON and CSV."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from importlib.metadata import PackageNotFoundError, version
from typing import Any, Callable

import numpy as np

from .config import tolerances
from .dataset import DecisionMatrix, dump_csv
from .diagnostics import geometry, interlinkage, rtvs, verify_duality
from .mcdm import Shortlist
from .models import VgaSolution
from .procedure import AssessmentDossier

__all__ = ["fmt_number", "solution_block", "dossier_document", "shortlist_document", "to_json", "document_rows", "to_csv"]

Formatter = Callable[[float], Any]


def fmt_number(x: float, rounded: bool = False) -> float | None:
    """12 significant digits, or 4 decimals for table-style output; NaN becomes null."""
    x = float(x)
    if not math.isfinite(x):
        return None
    if rounded:
        return round(x, 4) + 0.0
    return float(f"{x:.12g}") + 0.0


def _tool_version() -> str:
    try:
        return version("artifact")
    except PackageNotFoundError:
        return "0+unknown"


def metadata(dm: DecisionMatrix) -> dict[str, Any]:
    return {
        "tool": "vga",
        "version": _tool_version(),
        "dataset_sha256": hashlib.sha256(dump_csv(dm).encode("utf-8")).hexdigest(),
        "tolerances": tolerances().as_dict(),
    }


def _named(names, values, f: Formatter) -> dict[str, Any]:
    return {n: f(v) for n, v in zip(names, values)}


def solution_block(sol: VgaSolution, rounded: bool = False) -> dict[str, Any]:
    """Everything a table column shows for one model, plus its duality certificate."""
    f: Formatter = lambda x: fmt_number(x, rounded)  # noqa: E731
    dm, io = sol.dm, sol.o
    xo, yo = dm.X[:, io], dm.Y[:, io]

    def step(st) -> dict[str, Any]:
        return {
            "tau": f(st.tau),
            "delta": f(st.delta),
            "tap_objective": f(st.tap_objective),
            "v": _named(dm.input_names, st.v, f),
            "u": _named(dm.output_names, st.u, f),
            "w": f(st.w),
            "omega": f(st.omega),
            "q": _named(dm.input_names, st.q, f),
            "p": _named(dm.output_names, st.p, f),
            "pi": _named(dm.dmu_names, st.pi, f),
        }

    r = rtvs(sol)
    g = geometry(sol)
    d = verify_duality(sol)
    block: dict[str, Any] = {
        "family": sol.variant.family,
        "kappa": f(sol.variant.kappa) if sol.variant.has_sic else None,
        "t_bar": f(sol.goal.t_bar),
        "step1": step(sol.step1),
        "step2": step(sol.step2),
        "gamma": f(sol.gamma),
        "efficiency": f(sol.efficiency),
        "xi": f(r.xi),
        "kappa1": f(sol.kappa1),
        "peers": {k: f(v) for k, v in sol.peers.items()},
        "x_hat": _named(dm.input_names, sol.x_hat, f),
        "y_hat": _named(dm.output_names, sol.y_hat, f),
        "virtual_prices": {
            "input": _named(dm.input_names, sol.step2.v * xo, f),
            "output": _named(dm.output_names, sol.step2.u * yo, f),
        },
        "alpha_o": f(sol.alpha_o),
        "beta_o": f(sol.beta_o),
        "alpha_hat": f(r.alpha_hat),
        "beta_hat": f(r.beta_hat),
        "virtual_scales": {k: [f(a), f(b)] for k, (a, b) in sol.virtual_scales.items()},
        "anchor": [f(g.anchor[0]), f(g.anchor[1])],
        "anchor_quadrant": g.anchor_quadrant,
        "slopes": {
            "origin_point": f(g.slope_origin_point),
            "origin_anchor": f(g.slope_origin_anchor),
            "anchor_point": f(g.slope_anchor_point),
        },
        "duality": {"passed": d.passed, "gap": f(d.gap), "worst": [d.worst[0], f(d.worst[1])]},
        "warnings": list(sol.warnings),
    }
    if sol.variant.has_sic:
        il = interlinkage(sol)
        block["interlinkage"] = {
            "gamma_q": _named(dm.input_names, il.gamma_q, f),
            "gamma_p": _named(dm.output_names, il.gamma_p, f),
            "affected_input_prices": _named(dm.input_names, il.input_prices, f),
            "affected_output_prices": _named(dm.output_names, il.output_prices, f),
        }
    return block


def dossier_document(dossier: AssessmentDossier, rounded: bool = False) -> dict[str, Any]:
    f: Formatter = lambda x: None if x is None else fmt_number(x, rounded)  # noqa: E731
    ph3 = dossier.phase3
    return {
        "metadata": metadata(dossier.phase1.dm),
        "dmu": dossier.dmu,
        "scenario": dossier.scenario,
        "classification": dossier.classification,
        "kappa1": f(dossier.kappa1),
        "kappa2": f(dossier.kappa2),
        "kappa_z": f(dossier.kappa_z),
        "kappa3": f(dossier.kappa3),
        "ranging": {
            "lower": f(ph3.ranging.lower),
            "upper": f(ph3.ranging.upper),
            "dual": f(ph3.ranging.dual),
            "probes": {repr(k): f(v) for k, v in ph3.probes.items()},
            "direction": ph3.direction,
            "w_sign_direction": ph3.w_sign_direction,
        },
        "models": {name: solution_block(sol, rounded) for name, sol in dossier.solutions().items()},
        "relations": [
            {"name": c.name, "left": f(c.left), "right": f(c.right), "residual": f(c.residual),
             "passed": c.passed, "required": c.required}
            for c in dossier.relations
        ],
        "warnings": list(dossier.warnings),
    }


def shortlist_document(sl: Shortlist, dm: DecisionMatrix, rounded: bool = False) -> dict[str, Any]:
    f: Formatter = lambda x: fmt_number(x, rounded)  # noqa: E731
    return {
        "metadata": metadata(dm),
        "shortlist": [
            {"rank": i + 1, "dmu": o, "efficiency": f(sl.solutions[o].efficiency), "delta": f(sl.solutions[o].delta),
             "peers": {k: f(v) for k, v in sl.solutions[o].peers.items()}}
            for i, o in enumerate(sl.candidates)
        ],
        "efficient": list(sl.efficient),
        "groups": [
            {"signature": list(g.signature), "champion": g.champion,
             "members": [{"dmu": m.dmu, "efficiency": f(m.efficiency), "delta": f(m.delta)} for m in g.members]}
            for g in sl.groups
        ],
        "discarded": dict(sl.discarded),
    }


def to_json(doc: dict[str, Any]) -> str:
    return json.dumps(doc, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def document_rows(doc: Any, prefix: str = "") -> list[tuple[str, str]]:
    """Flatten a document to ``(dotted path, value)`` pairs."""
    rows: list[tuple[str, str]] = []
    if isinstance(doc, dict):
        for k, v in doc.items():
            rows.extend(document_rows(v, f"{prefix}.{k}" if prefix else str(k)))
    elif isinstance(doc, list):
        for i, v in enumerate(doc):
            rows.extend(document_rows(v, f"{prefix}[{i}]"))
    else:
        if doc is None:
            text = ""
        elif isinstance(doc, bool):
            text = "true" if doc else "false"
        elif isinstance(doc, float):
            text = repr(doc)
        else:
            text = str(doc)
        rows.append((prefix, text))
    return rows


def to_csv(doc: dict[str, Any]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["field", "value"])
    writer.writerows(document_rows(doc))
    return buf.getvalue()


def as_array(mapping: dict[str, float | None]) -> np.ndarray:
    """Values of a named block as a float array (nulls become NaN)."""
    return np.array([math.nan if v is None else v for v in mapping.values()], dtype=float)
