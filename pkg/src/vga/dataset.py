"""The observed decision matrix and its CSV representation.

CSV layout: one row per DMU, a ``dmu`` label column and criterion columns
prefixed ``in:`` or ``out:`` with an optional ``[unit]`` suffix, for example
``in:X2[hr]``. Lines starting with ``#`` are ignored.
"""

from __future__ import annotations

import csv
import io
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np
from numpy.typing import NDArray

__all__ = ["DatasetError", "DecisionMatrix", "load_csv", "loads_csv", "dump_csv", "remove_dmu", "table1"]

_HEADER = re.compile(r"^(in|out):([^\[\]]+?)\s*(?:\[([^\]]*)\])?$")


class DatasetError(ValueError):
    """Invalid decision-matrix input; the message names the offending cell."""


def _readonly(a: NDArray) -> NDArray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class DecisionMatrix:
    """Inputs ``X`` (m x n) and outputs ``Y`` (s x n) of n named DMUs.

    All entries must be strictly positive. A single-DMU matrix is allowed so
    that :func:`remove_dmu` can compose freely; evaluation entry points reject it.
    """

    dmu_names: tuple[str, ...]
    input_names: tuple[str, ...]
    output_names: tuple[str, ...]
    X: NDArray[np.float64]
    Y: NDArray[np.float64]
    input_units: tuple[str, ...] = ()
    output_units: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        for attr in ("dmu_names", "input_names", "output_names", "input_units", "output_units"):
            object.__setattr__(self, attr, tuple(str(v) for v in getattr(self, attr)))
        if not self.input_units:
            object.__setattr__(self, "input_units", ("",) * len(self.input_names))
        if not self.output_units:
            object.__setattr__(self, "output_units", ("",) * len(self.output_names))
        X, Y = _readonly(self.X), _readonly(self.Y)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "Y", Y)
        n, m, s = len(self.dmu_names), len(self.input_names), len(self.output_names)
        if n < 1 or m < 1 or s < 1:
            raise DatasetError(f"need at least one DMU, input and output (got n={n}, m={m}, s={s})")
        if X.shape != (m, n) or Y.shape != (s, n):
            raise DatasetError(f"X must be {m}x{n} and Y {s}x{n}; got {X.shape} and {Y.shape}")
        if len(self.input_units) != m or len(self.output_units) != s:
            raise DatasetError("unit lists must match the criterion lists")
        for kind, names in (("DMU", self.dmu_names), ("criterion", self.input_names + self.output_names)):
            seen: set[str] = set()
            for name in names:
                if name in seen:
                    raise DatasetError(f"duplicate {kind} name {name!r}")
                seen.add(name)
        for names, M in ((self.input_names, X), (self.output_names, Y)):
            bad = np.argwhere(~(M > 0) | ~np.isfinite(M))
            if bad.size:
                i, j = bad[0]
                raise DatasetError(f"non-positive value at ({names[i]},{self.dmu_names[j]})")

    @property
    def n(self) -> int:
        return len(self.dmu_names)

    @property
    def m(self) -> int:
        return len(self.input_names)

    @property
    def s(self) -> int:
        return len(self.output_names)

    def index(self, name: str) -> int:
        try:
            return self.dmu_names.index(name)
        except ValueError:
            raise KeyError(f"unknown DMU {name!r}") from None

    def x(self, name: str) -> NDArray[np.float64]:
        return self.X[:, self.index(name)]

    def y(self, name: str) -> NDArray[np.float64]:
        return self.Y[:, self.index(name)]

    def with_column(self, name: str, x: NDArray, y: NDArray) -> "DecisionMatrix":
        """Copy with DMU ``name``'s observation replaced by ``(x, y)``."""
        j = self.index(name)
        X, Y = np.array(self.X), np.array(self.Y)
        X[:, j], Y[:, j] = x, y
        return DecisionMatrix(self.dmu_names, self.input_names, self.output_names, X, Y,
                              self.input_units, self.output_units)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DecisionMatrix):
            return NotImplemented
        return (
            self.dmu_names == other.dmu_names
            and self.input_names == other.input_names
            and self.output_names == other.output_names
            and self.input_units == other.input_units
            and self.output_units == other.output_units
            and np.array_equal(self.X, other.X)
            and np.array_equal(self.Y, other.Y)
        )

    __hash__ = None  # type: ignore[assignment]


def loads_csv(text: str, source: str = "<string>") -> DecisionMatrix:
    """Parse CSV text into a :class:`DecisionMatrix` (at least two DMUs)."""
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    rows = list(csv.reader(lines))
    if not rows:
        raise DatasetError(f"{source}: no header row")
    header = [h.strip() for h in rows[0]]
    if header.count("dmu") != 1:
        raise DatasetError(f"{source}: header needs exactly one 'dmu' column")
    dmu_col = header.index("dmu")
    inputs: list[tuple[int, str, str]] = []
    outputs: list[tuple[int, str, str]] = []
    seen: set[str] = set()
    for col, h in enumerate(header):
        if col == dmu_col:
            continue
        match = _HEADER.match(h)
        if not match:
            raise DatasetError(f"{source}: column {col + 1} header {h!r} lacks an 'in:' or 'out:' prefix")
        kind, name, unit = match.group(1), match.group(2).strip(), (match.group(3) or "").strip()
        if name in seen:
            raise DatasetError(f"{source}: duplicate header {name!r}")
        seen.add(name)
        (inputs if kind == "in" else outputs).append((col, name, unit))
    if not inputs or not outputs:
        raise DatasetError(f"{source}: need at least one 'in:' and one 'out:' column")

    names: list[str] = []
    values: list[list[float]] = []
    crit = inputs + outputs
    for line_no, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise DatasetError(f"{source}: row {line_no} has {len(row)} cells, expected {len(header)}")
        label = row[dmu_col].strip()
        if not label:
            raise DatasetError(f"{source}: row {line_no} has an empty dmu label")
        if label in names:
            raise DatasetError(f"{source}: duplicate DMU {label!r} at row {line_no}")
        record = []
        for col, cname, _ in crit:
            cell = row[col].strip()
            try:
                value = float(cell)
            except ValueError:
                raise DatasetError(f"non-numeric value {cell!r} at ({cname},{label})") from None
            if not (value > 0 and np.isfinite(value)):
                raise DatasetError(f"non-positive value at ({cname},{label})")
            record.append(value)
        names.append(label)
        values.append(record)
    if len(names) < 2:
        raise DatasetError(f"{source}: n ≥ 2 required, found {len(names)} DMU(s)")
    data = np.array(values, dtype=float).T
    m = len(inputs)
    return DecisionMatrix(
        dmu_names=tuple(names),
        input_names=tuple(c[1] for c in inputs),
        output_names=tuple(c[1] for c in outputs),
        X=data[:m],
        Y=data[m:],
        input_units=tuple(c[2] for c in inputs),
        output_units=tuple(c[2] for c in outputs),
    )


def load_csv(path: str | Path) -> DecisionMatrix:
    """Read a decision matrix from a UTF-8 CSV file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DatasetError(f"cannot read {path}: {exc.strerror or exc}") from None
    return loads_csv(text, source=str(path))


def dump_csv(dm: DecisionMatrix) -> str:
    """CSV text that :func:`loads_csv` parses back to an equal matrix."""

    def head(kind: str, name: str, unit: str) -> str:
        return f"{kind}:{name}[{unit}]" if unit else f"{kind}:{name}"

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(
        ["dmu"]
        + [head("in", n, u) for n, u in zip(dm.input_names, dm.input_units)]
        + [head("out", n, u) for n, u in zip(dm.output_names, dm.output_units)]
    )
    for j, name in enumerate(dm.dmu_names):
        writer.writerow([name] + [repr(float(v)) for v in np.concatenate([dm.X[:, j], dm.Y[:, j]])])
    return buf.getvalue()


def remove_dmu(dm: DecisionMatrix, name: str) -> DecisionMatrix:
    """Copy of ``dm`` without DMU ``name``; other columns are copied bit for bit."""
    j = dm.index(name)
    keep = [k for k in range(dm.n) if k != j]
    return DecisionMatrix(
        tuple(dm.dmu_names[k] for k in keep),
        dm.input_names,
        dm.output_names,
        dm.X[:, keep],
        dm.Y[:, keep],
        dm.input_units,
        dm.output_units,
    )


def table1() -> DecisionMatrix:
    """The bundled six-DMU example (K, A, B, D, G, H)."""
    text = resources.files("vga.data").joinpath("table1.csv").read_text(encoding="utf-8")
    return loads_csv(text, source="table1.csv")
