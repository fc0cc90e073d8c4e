"""SVG persistence diagrams with deterministic output."""

from __future__ import annotations

from fractions import Fraction

from .modules import Barcode

SIZE = 400
MARGIN = 40
BAND = 20  # height of the band that holds infinite deaths


def _fmt(x: float) -> str:
    return f"{x:.3f}"


def diagram_svg(b: Barcode, degree: int | None = None) -> str:
    entries = [(d, i, m) for d, i, m in b.entries if degree is None or d == degree]
    finite = [e.fraction() for _, i, _ in entries for e in (i.lo, i.hi) if e.is_finite]
    lo = min(finite, default=Fraction(0))
    hi = max(finite, default=Fraction(1))
    if hi == lo:
        hi = lo + 1
    span = hi - lo
    lo, hi = lo - span / 10, hi + span / 10
    plot = SIZE - 2 * MARGIN

    def px(v: Fraction) -> float:
        return MARGIN + float((v - lo) / (hi - lo)) * plot

    def py(v: Fraction) -> float:
        return SIZE - MARGIN - float((v - lo) / (hi - lo)) * plot

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">',
        f'<rect x="0" y="0" width="{SIZE}" height="{SIZE}" fill="white"/>',
        f'<line x1="{_fmt(px(lo))}" y1="{_fmt(py(lo))}" x2="{_fmt(px(hi))}" y2="{_fmt(py(hi))}" '
        'stroke="gray" stroke-width="1" class="diagonal"/>',
        f'<rect x="{MARGIN}" y="{MARGIN - BAND}" width="{plot}" height="{BAND}" fill="#eeeeee" class="inf-band"/>',
        f'<text x="{MARGIN - 4}" y="{MARGIN - BAND / 2 + 4}" font-size="10" text-anchor="end">inf</text>',
    ]
    for d, i, m in entries:
        x = px(i.lo.fraction()) if i.lo.is_finite else MARGIN - BAND / 2
        y = py(i.hi.fraction()) if i.hi.is_finite else MARGIN - BAND / 2
        title = f"H{d} {i}"
        out.append(f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="4" fill="steelblue" class="point">'
                   f'<title>{title}</title></circle>')
        if m > 1:
            out.append(f'<text x="{_fmt(x + 6)}" y="{_fmt(y - 6)}" font-size="10">×{m}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
