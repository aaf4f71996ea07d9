"""Dependency-free log-log SVG of a convergence report."""

import math
from xml.sax.saxutils import escape

import numpy as np

from .analysis import loglog_fit_line

WIDTH, HEIGHT = 640, 480
LEFT, RIGHT, TOP, BOTTOM = 80, 160, 40, 60
COLORS = {"err_y": "#1f77b4", "err_z": "#d62728", "ref": "#7f7f7f"}


def _decades(lo, hi):
    return range(math.floor(math.log10(lo)), math.ceil(math.log10(hi)) + 1)


def report_svg(report):
    hs = np.array([r.h for r in report.rows])
    series = {}
    for key in ("err_y", "err_z"):
        vals = np.array([getattr(r, key) for r in report.rows])
        ok = vals > 0
        series[key] = (hs[ok], vals[ok])

    all_e = np.concatenate([v for _, v in series.values()])
    if all_e.size == 0:
        all_e = np.array([1.0])
    xlo, xhi = 10 ** math.floor(math.log10(hs.min())), 10 ** math.ceil(math.log10(hs.max()))
    ylo, yhi = 10 ** math.floor(math.log10(all_e.min())), 10 ** math.ceil(math.log10(all_e.max()))
    if yhi == ylo:
        yhi *= 10

    pw, ph = WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM

    def px(h):
        return LEFT + pw * (math.log10(h) - math.log10(xlo)) / (math.log10(xhi) - math.log10(xlo))

    def py(e):
        return TOP + ph * (1 - (math.log10(e) - math.log10(ylo)) / (math.log10(yhi) - math.log10(ylo)))

    def clipped_line(slope, intercept, color, dash=""):
        h0, h1 = hs.min(), hs.max()
        e0, e1 = math.exp(intercept) * h0 ** slope, math.exp(intercept) * h1 ** slope
        e0, e1 = min(max(e0, ylo), yhi), min(max(e1, ylo), yhi)
        extra = f' stroke-dasharray="{dash}"' if dash else ""
        return (f'<path d="M{px(h0):.2f},{py(e0):.2f} L{px(h1):.2f},{py(e1):.2f}" '
                f'stroke="{color}" stroke-width="1.5" fill="none"{extra}/>')

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{LEFT + pw / 2}" y="20" text-anchor="middle">'
        f'{escape(report.problem)}, alpha = {report.alpha:g}</text>',
        f'<path d="M{LEFT},{TOP} V{TOP + ph} H{LEFT + pw}" stroke="black" fill="none"/>',
    ]
    for k in _decades(xlo, xhi):
        x = px(10.0 ** k)
        out.append(f'<path d="M{x:.2f},{TOP + ph} v5" stroke="black"/>')
        out.append(f'<text x="{x:.2f}" y="{TOP + ph + 20}" text-anchor="middle">1e{k}</text>')
    for k in _decades(ylo, yhi):
        y = py(10.0 ** k)
        out.append(f'<path d="M{LEFT - 5},{y:.2f} h5" stroke="black"/>')
        out.append(f'<text x="{LEFT - 8}" y="{y + 4:.2f}" text-anchor="end">1e{k}</text>')
    out.append(f'<text x="{LEFT + pw / 2}" y="{HEIGHT - 15}" text-anchor="middle">h</text>')
    out.append(f'<text x="20" y="{TOP + ph / 2}" text-anchor="middle" '
               f'transform="rotate(-90 20 {TOP + ph / 2})">error</text>')

    legend = []
    for key, (h, e) in series.items():
        color = COLORS[key]
        for hv, ev in zip(h, e):
            out.append(f'<circle cx="{px(hv):.2f}" cy="{py(ev):.2f}" r="4" fill="{color}"/>')
        cr = report.cr_y if key == "err_y" else report.cr_z
        if cr is not None and len(h) >= 2:
            slope, icpt = loglog_fit_line(h, e, cr)
            out.append(clipped_line(slope, icpt, color))
            legend.append((color, f"{key} fit, slope {cr:.4f}", ""))
        else:
            legend.append((color, f"{key}", ""))

    h_ref, e_ref = series["err_y"]
    if len(h_ref):
        _, icpt = loglog_fit_line(h_ref, e_ref, 2.0)
        out.append(clipped_line(2.0, icpt, COLORS["ref"], "6,4"))
        legend.append((COLORS["ref"], "slope 2 reference", "6,4"))

    for n, (color, label, dash) in enumerate(legend):
        y = TOP + 20 + 20 * n
        x = LEFT + pw + 10
        extra = f' stroke-dasharray="{dash}"' if dash else ""
        out.append(f'<path d="M{x},{y} h20" stroke="{color}" stroke-width="2"{extra}/>')
        out.append(f'<text x="{x + 25}" y="{y + 4}">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
