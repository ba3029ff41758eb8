"""Static SVG rendering of a planning run."""

from __future__ import annotations

import numpy as np

from .probability import risk_ellipse

__all__ = ["render_svg"]


def _pts(points) -> str:
    return " ".join(f"{x:.6g},{y:.6g}" for x, y in np.asarray(points))


def render_svg(scenario, result=None, width: int = 600) -> str:
    """Tree, risk ellipses and best path over the workspace.

    Element classes: ``risk-ellipse`` (one per obstacle, drawn at step 0),
    ``node`` (one per tree node), ``edge`` (one per tree edge) and ``path``
    (the best path, if any).  The y axis points up.
    """
    ws = scenario.workspace
    (x0, y0), (x1, y1) = ws.lower, ws.upper
    w, h = x1 - x0, y1 - y0
    scale = max(w, h) / 200.0
    height = int(round(width * h / w))
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="{x0:.6g} {-y1:.6g} {w:.6g} {h:.6g}">',
        '<g transform="scale(1,-1)">',
        f'<rect class="workspace" x="{x0:.6g}" y="{y0:.6g}" width="{w:.6g}" height="{h:.6g}" '
        f'fill="white" stroke="black" stroke-width="{scale:.4g}"/>',
    ]
    alpha = scenario.field.risk.alpha
    for g in scenario.field.gaussians_at(0):
        ell = risk_ellipse(g, alpha)
        out.append(f'<polygon class="risk-ellipse" points="{_pts(ell.boundary(64))}" '
                   f'fill="#f4b6b6" stroke="#b22222" stroke-width="{scale:.4g}"/>')
    gc, gr = scenario.goal.center, scenario.goal.radius
    out.append(f'<circle class="goal-region" cx="{gc[0]:.6g}" cy="{gc[1]:.6g}" r="{gr:.6g}" '
               f'fill="none" stroke="green" stroke-width="{scale:.4g}"/>')
    if result is not None:
        pos = result.positions
        for i, p in enumerate(result.parents):
            if p >= 0:
                a, b = pos[p], pos[i]
                out.append(f'<line class="edge" x1="{a[0]:.6g}" y1="{a[1]:.6g}" x2="{b[0]:.6g}" '
                           f'y2="{b[1]:.6g}" stroke="#7a9cc6" stroke-width="{0.5 * scale:.4g}"/>')
        for x, y in pos:
            out.append(f'<circle class="node" cx="{x:.6g}" cy="{y:.6g}" r="{scale:.4g}" fill="#2c5aa0"/>')
        if result.best_path is not None:
            out.append(f'<polyline class="path" points="{_pts(result.best_path)}" fill="none" '
                       f'stroke="#e07b00" stroke-width="{2.5 * scale:.4g}"/>')
    sx, sy = scenario.start
    out.append(f'<circle class="start" cx="{sx:.6g}" cy="{sy:.6g}" r="{3 * scale:.4g}" fill="black"/>')
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
