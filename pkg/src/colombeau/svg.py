"""Minimal log-log SVG plots written as plain path/line elements."""

import math

WIDTH, HEIGHT, PAD = 480, 360, 50


def _ticks(lo, hi):
    a, b = math.floor(lo), math.ceil(hi)
    step = max(1, (b - a) // 6)
    return list(range(a, b + 1, step))


def loglog_svg(eps, g, title="", slope=None):
    """log2 g against log2 eps; nonpositive g values are skipped."""
    pts = [(math.log2(e), math.log2(v)) for e, v in zip(eps, g) if e > 0 and v > 0]
    lines = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
             f'viewBox="0 0 {WIDTH} {HEIGHT}">',
             '<rect width="100%" height="100%" fill="white"/>']
    label = title + (f" (slope {slope:.3f})" if slope is not None and math.isfinite(slope) else "")
    lines.append(f'<text x="{WIDTH / 2}" y="20" text-anchor="middle" font-size="13">{_escape(label)}</text>')
    if not pts:
        lines.append(f'<text x="{WIDTH / 2}" y="{HEIGHT / 2}" text-anchor="middle">all values vanish</text>')
        return "\n".join(lines + ["</svg>"]) + "\n"
    xs, ys = [p[0] for p in pts], [p[1] for p in pts]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    x1, y1 = (x1 + 1, y1 + 1) if x1 == x0 else (x1, y1 if y1 > y0 else y0 + 1)

    def sx(v):
        return PAD + (v - x0) / (x1 - x0) * (WIDTH - 2 * PAD)

    def sy(v):
        return HEIGHT - PAD - (v - y0) / (y1 - y0) * (HEIGHT - 2 * PAD)

    lines.append(f'<line x1="{PAD}" y1="{HEIGHT - PAD}" x2="{WIDTH - PAD}" y2="{HEIGHT - PAD}" stroke="black"/>')
    lines.append(f'<line x1="{PAD}" y1="{PAD}" x2="{PAD}" y2="{HEIGHT - PAD}" stroke="black"/>')
    for t in _ticks(x0, x1):
        if x0 <= t <= x1:
            lines.append(f'<text x="{sx(t):.1f}" y="{HEIGHT - PAD + 16}" text-anchor="middle" '
                         f'font-size="10">2^{t}</text>')
    for t in _ticks(y0, y1):
        if y0 <= t <= y1:
            lines.append(f'<text x="{PAD - 6}" y="{sy(t):.1f}" text-anchor="end" font-size="10">2^{t}</text>')
    path = " ".join(f"{'M' if i == 0 else 'L'}{sx(a):.2f},{sy(b):.2f}" for i, (a, b) in enumerate(pts))
    lines.append(f'<path d="{path}" fill="none" stroke="steelblue" stroke-width="2"/>')
    lines.append(f'<text x="{WIDTH / 2}" y="{HEIGHT - 10}" text-anchor="middle" font-size="11">eps</text>')
    return "\n".join(lines + ["</svg>"]) + "\n"


def _escape(s):
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
