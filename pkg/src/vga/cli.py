"""Command-line interface.

Exit codes: 0 success, 2 invalid input (data file, flags, unknown DMU),
3 solver failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Sequence

from .dataset import DatasetError, load_csv
from .figure import figure_spec, render_figure
from .lp import LpError
from .mcdm import build_shortlist
from .models import VgaError
from .procedure import KappaPolicy, run_assessment
from .report import dossier_document, shortlist_document, to_csv, to_json

EXIT_OK, EXIT_INPUT, EXIT_SOLVER = 0, 2, 3


class InputError(Exception):
    pass


def _kappa_policy(tokens: Sequence[str]) -> KappaPolicy:
    if tokens == ["mid"]:
        return "mid"
    if tokens and tokens[0] == "sweep":
        raw = ",".join(tokens[1:])
        try:
            values = [float(t) for t in raw.split(",") if t.strip()]
        except ValueError:
            raise InputError(f"--kappa-z sweep: cannot parse {raw!r}") from None
        if not values:
            raise InputError("--kappa-z sweep needs a comma-separated list of values")
        return values
    if len(tokens) == 1:
        try:
            return float(tokens[0])
        except ValueError:
            pass
    raise InputError(f"--kappa-z expects 'mid', a number or 'sweep a,b,c'; got {' '.join(tokens)!r}")


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def cmd_assess(args: argparse.Namespace) -> int:
    dm = load_csv(args.data)
    if dm.n < 2:
        raise InputError("n ≥ 2 required")
    policy = _kappa_policy(args.kappa_z)
    names = list(dm.dmu_names) if args.dmu == "all" else [args.dmu]
    for name in names:
        if name not in dm.dmu_names:
            raise InputError(f"--dmu: unknown DMU {name!r}")
    out = Path(args.out)
    for name in names:
        try:
            dossier = run_assessment(dm, name, policy)
        except ValueError as exc:
            raise InputError(f"--kappa-z for {name}: {exc}") from None
        doc = dossier_document(dossier, rounded=args.rounded)
        if args.format in ("json", "both"):
            _write(out / f"{name}.report.json", to_json(doc))
        if args.format in ("csv", "both"):
            _write(out / f"{name}.report.csv", to_csv(doc))
        if args.svg:
            _write(out / f"{name}.figure.svg", render_figure(figure_spec(dossier)))
        sols = dossier.solutions()
        summary = ", ".join(f"{k} E={s.efficiency:.4f}" for k, s in sols.items())
        k2 = "n/a" if dossier.kappa2 is None else f"{dossier.kappa2:.4f}"
        print(f"{name}: {dossier.classification} (scenario {dossier.scenario}); "
              f"kappa1={dossier.kappa1:.4f} kappa2={k2}; {summary}")
        for w in dossier.warnings:
            print(f"  warning: {w}", file=sys.stderr)
    return EXIT_OK


def cmd_mcdm(args: argparse.Namespace) -> int:
    dm = load_csv(args.data)
    sl = build_shortlist(dm)
    doc = shortlist_document(sl, dm, rounded=args.rounded)
    out = Path(args.out)
    _write(out / "shortlist.json", to_json(doc))
    _write(out / "shortlist.csv", to_csv(doc))
    for entry in doc["shortlist"]:
        print(f"{entry['rank']}. {entry['dmu']} E={entry['efficiency']} peers={sorted(entry['peers'])}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vga", description="Virtual gap analysis of decision-making units.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log solver decisions")
    sub = parser.add_subparsers(dest="command", required=True)

    a = sub.add_parser("assess", help="four-phase assessment of one or all DMUs")
    a.add_argument("--data", required=True, help="CSV decision matrix")
    a.add_argument("--dmu", required=True, help="DMU label or 'all'")
    a.add_argument("--kappa-z", nargs="+", default=["mid"], metavar="POLICY",
                   help="final scalar: 'mid' (default), a number, or 'sweep a,b,c'")
    a.add_argument("--out", default=".", help="output directory (default: current directory)")
    a.add_argument("--format", choices=("json", "csv", "both"), default="json")
    a.add_argument("--svg", action="store_true", help="also write <dmu>.figure.svg")
    a.add_argument("--rounded", action="store_true", help="round report numbers to 4 decimals")
    a.set_defaults(func=cmd_assess)

    m = sub.add_parser("mcdm", help="screen and shortlist efficient DMUs")
    m.add_argument("--data", required=True, help="CSV decision matrix")
    m.add_argument("--out", default=".", help="output directory (default: current directory)")
    m.add_argument("--rounded", action="store_true", help="round report numbers to 4 decimals")
    m.set_defaults(func=cmd_mcdm)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except (DatasetError, InputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (VgaError, LpError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
