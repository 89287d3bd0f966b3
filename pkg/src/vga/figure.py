"""Static SVG rendering of the virtual-scale plane."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from xml.sax.saxutils import escape, quoteattr

from .diagnostics import geometry
from .procedure import AssessmentDossier

__all__ = ["FigurePoint", "FigureVector", "FigureSpec", "figure_spec", "render_figure"]

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf")


@dataclass(frozen=True)
class FigurePoint:
    label: str
    model: str
    alpha: float
    beta: float
    kind: str = "dmu"  # dmu | evaluated | anchor | projection


@dataclass(frozen=True)
class FigureVector:
    model: str
    start: tuple[float, float]
    end: tuple[float, float]
    name: str


@dataclass(frozen=True)
class FigureSpec:
    title: str
    points: tuple[FigurePoint, ...] = ()
    vectors: tuple[FigureVector, ...] = ()
    models: tuple[str, ...] = ()
    axis_range: tuple[float, float] | None = None

    def bounds(self) -> tuple[float, float]:
        if self.axis_range is not None:
            return self.axis_range
        values = [0.0, 1.0]
        for pt in self.points:
            values += [pt.alpha, pt.beta]
        lo, hi = min(values), max(values)
        pad = 0.08 * (hi - lo)
        return lo - pad, hi + pad


def figure_spec(dossier: AssessmentDossier) -> FigureSpec:
    """Points, anchors, projections and vectors of every model in the dossier."""
    points: list[FigurePoint] = []
    vectors: list[FigureVector] = []
    models = []
    for name, sol in dossier.solutions().items():
        if name == "PT" and dossier.scenario == "II":
            continue
        models.append(name)
        g = geometry(sol)
        for label, (a, b) in sol.virtual_scales.items():
            if label != sol.dmu:
                points.append(FigurePoint(label, name, a, b))
        points.append(FigurePoint(sol.dmu, name, *g.point, kind="evaluated"))
        points.append(FigurePoint(f"AP ({name})", name, *g.anchor, kind="anchor"))
        points.append(FigurePoint(f"T ({name})", name, *g.projection, kind="projection"))
        vectors.append(FigureVector(name, (0.0, 0.0), g.point, "O-K"))
        vectors.append(FigureVector(name, (0.0, 0.0), g.anchor, "O-AP"))
        vectors.append(FigureVector(name, g.anchor, g.point, "AP-K"))
    return FigureSpec(f"Virtual scales of {dossier.dmu}", tuple(points), tuple(vectors), tuple(models))


def render_figure(spec: FigureSpec, size: int = 560) -> str:
    """Deterministic SVG; exact coordinates are kept in ``data-alpha``/``data-beta``."""
    margin = 60
    lo, hi = spec.bounds()
    span = hi - lo if hi > lo else 1.0
    plot = size - 2 * margin

    def sx(a: float) -> float:
        return margin + (a - lo) / span * plot

    def sy(b: float) -> float:
        return size - margin - (b - lo) / span * plot

    colour = {m: _PALETTE[i % len(_PALETTE)] for i, m in enumerate(spec.models)}
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">',
        f"<title>{escape(spec.title)}</title>",
        f'<rect x="{margin}" y="{margin}" width="{plot}" height="{plot}" fill="white" stroke="#888"/>',
    ]
    if lo <= 0 <= hi:
        out.append(f'<line class="axis" x1="{sx(lo):.3f}" y1="{sy(0):.3f}" x2="{sx(hi):.3f}" y2="{sy(0):.3f}" stroke="#bbb"/>')
        out.append(f'<line class="axis" x1="{sx(0):.3f}" y1="{sy(lo):.3f}" x2="{sx(0):.3f}" y2="{sy(hi):.3f}" stroke="#bbb"/>')
    out.append(
        f'<line class="equator" x1="{sx(lo):.3f}" y1="{sy(lo):.3f}" x2="{sx(hi):.3f}" y2="{sy(hi):.3f}" '
        'stroke="black" stroke-width="1.2"/>'
    )
    out.append(f'<text x="{size / 2}" y="{size - 15}" text-anchor="middle" font-size="13">alpha (virtual input, $)</text>')
    out.append(
        f'<text x="15" y="{size / 2}" text-anchor="middle" font-size="13" '
        f'transform="rotate(-90 15 {size / 2})">beta (virtual output, $)</text>'
    )
    out.append(f'<text x="{size / 2}" y="30" text-anchor="middle" font-size="15">{escape(spec.title)}</text>')
    for vec in spec.vectors:
        (a0, b0), (a1, b1) = vec.start, vec.end
        if not all(map(math.isfinite, (a0, b0, a1, b1))):
            continue
        out.append(
            f'<line class="vector" data-model={quoteattr(vec.model)} data-name={quoteattr(vec.name)} '
            f'x1="{sx(a0):.3f}" y1="{sy(b0):.3f}" x2="{sx(a1):.3f}" y2="{sy(b1):.3f}" '
            f'stroke="{colour.get(vec.model, "#444")}" stroke-dasharray="5,4" stroke-width="1"/>'
        )
    shapes = {"dmu": "circle", "evaluated": "circle", "anchor": "rect", "projection": "rect"}
    for pt in spec.points:
        c = colour.get(pt.model, "#444")
        x, y = sx(pt.alpha), sy(pt.beta)
        attrs = (
            f'class="point {pt.kind}" data-label={quoteattr(pt.label)} data-model={quoteattr(pt.model)} '
            f'data-alpha="{pt.alpha!r}" data-beta="{pt.beta!r}"'
        )
        if shapes[pt.kind] == "circle":
            r = 5 if pt.kind == "evaluated" else 3.5
            fill = c if pt.kind == "evaluated" else "white"
            out.append(f'<circle {attrs} cx="{x:.3f}" cy="{y:.3f}" r="{r}" fill="{fill}" stroke="{c}"/>')
        else:
            fill = c if pt.kind == "anchor" else "none"
            out.append(f'<rect {attrs} x="{x - 3.5:.3f}" y="{y - 3.5:.3f}" width="7" height="7" fill="{fill}" stroke="{c}"/>')
        out.append(f'<text x="{x + 6:.3f}" y="{y - 6:.3f}" font-size="10" fill="{c}">{escape(pt.label)}</text>')
    for i, m in enumerate(spec.models):
        y = margin + 15 + 16 * i
        out.append(f'<line class="legend" x1="{margin + 10}" y1="{y}" x2="{margin + 30}" y2="{y}" stroke="{colour[m]}" stroke-width="3"/>')
        out.append(f'<text x="{margin + 36}" y="{y + 4}" font-size="11">{escape(m)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
