"""Minimal deterministic SVG output for per-step set overlays."""

import numpy as np

from .setalg import ConstrainedZonotope, constrained_polygon, zonotope_polygon


def _fmt(v):
    return f"{v:.6g}"


def _poly_points(vertices, sx, sy):
    return " ".join(f"{_fmt(sx(p[0]))},{_fmt(sy(p[1]))}" for p in vertices)


def set_polygon(s):
    """2-D boundary vertices of a zonotope or constrained zonotope."""
    if isinstance(s, ConstrainedZonotope) and s.n_constraints > 0:
        return constrained_polygon(s)
    if isinstance(s, ConstrainedZonotope):
        return zonotope_polygon(s.enclosing_zonotope())
    return zonotope_polygon(s)


def write_step_svg(path, layers, reference_point=None, size=480):
    """Overlay polygons (outermost first). layers: [(vertices, color, label)].

    Colors follow the usual overlay styling: the unconstrained set drawn
    outermost, constrained sets in reds on top.
    """
    polys = [(v, c, l) for v, c, l in layers if v is not None and len(v) > 0]
    pts = np.vstack([v for v, _, _ in polys]) if polys else np.zeros((1, 2))
    if reference_point is not None:
        pts = np.vstack([pts, np.asarray(reference_point).reshape(1, 2)])
    lo = pts.min(axis=0)
    hi = pts.max(axis=0)
    span = np.maximum(hi - lo, 1e-6)
    margin = 0.08 * span
    lo, hi = lo - margin, hi + margin
    span = hi - lo
    scale = size / span.max()

    def sx(x):
        return (x - lo[0]) * scale

    def sy(y):
        return (hi[1] - y) * scale  # flip so +y is up

    w, h = span[0] * scale, span[1] * scale
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_fmt(w)}" '
        f'height="{_fmt(h)}" viewBox="0 0 {_fmt(w)} {_fmt(h)}">',
        f'<rect width="{_fmt(w)}" height="{_fmt(h)}" fill="white"/>',
    ]
    for vertices, color, label in polys:
        if len(vertices) == 1:
            p = vertices[0]
            out.append(
                f'<circle cx="{_fmt(sx(p[0]))}" cy="{_fmt(sy(p[1]))}" r="2" '
                f'fill="{color}"><title>{label}</title></circle>'
            )
            continue
        out.append(
            f'<polygon points="{_poly_points(vertices, sx, sy)}" fill="{color}" '
            f'fill-opacity="0.25" stroke="{color}" stroke-width="1.5">'
            f"<title>{label}</title></polygon>"
        )
    if reference_point is not None:
        p = np.asarray(reference_point).reshape(-1)
        out.append(
            f'<circle cx="{_fmt(sx(p[0]))}" cy="{_fmt(sy(p[1]))}" r="3" '
            f'fill="black"><title>reference</title></circle>'
        )
    out.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(out) + "\n")
