"""SVG figures: domain outline, vertical support lines, tangent cones and
level curves of a hull function."""

from __future__ import annotations

import xml.etree.ElementTree as ET

import numpy as np

from .geom2d import Domain, Side, classify_vertical_support


def level_segments(u, level: float) -> list[tuple]:
    """Pieces of the curve u = level, one segment per crossed facet."""
    if u.is_zero:
        return []
    segs = []
    for tri, z in zip(u.surface.triangles, u.surface.heights):
        pts = []
        for i in range(3):
            a, b = i, (i + 1) % 3
            za, zb = z[a] - level, z[b] - level
            if (za < 0) != (zb < 0):
                t = za / (za - zb)
                pts.append(tuple(tri[a] + t * (tri[b] - tri[a])))
        if len(pts) == 2:
            segs.append((pts[0], pts[1]))
    return segs


class Figure:
    def __init__(self, domain: Domain, size: int = 480, pad: float = 0.08):
        P = domain.polygon
        lo, hi = P.min(axis=0), P.max(axis=0)
        span = float(max(hi - lo))
        self.lo = lo - pad * span
        self.k = size / (span * (1 + 2 * pad))
        w, h = ((hi - lo + 2 * pad * span) * self.k).round(1)
        self.h = float(h)
        self.root = ET.Element("svg", xmlns="http://www.w3.org/2000/svg", version="1.1",
                               width=f"{w:g}", height=f"{h:g}", viewBox=f"0 0 {w:g} {h:g}")
        self.domain = domain

    def xy(self, p) -> str:
        x = (p[0] - self.lo[0]) * self.k
        y = self.h - (p[1] - self.lo[1]) * self.k
        return f"{x:.2f} {y:.2f}"

    def path(self, pts, closed=False, **style):
        d = "M" + " L".join(self.xy(p) for p in pts) + (" Z" if closed else "")
        ET.SubElement(self.root, "path", d=d, fill="none", **style)

    def outline(self):
        self.path(self.domain.polygon, closed=True, stroke="black", **{"stroke-width": "1.5"})

    def support_lines(self):
        P = self.domain.polygon
        ylo, yhi = P[:, 1].min(), P[:, 1].max()
        pad = 0.1 * (yhi - ylo)
        for side in (Side.LEFT, Side.RIGHT):
            v = classify_vertical_support(self.domain, side)
            x = v.contact[0][0]
            self.path([(x, ylo - pad), (x, yhi + pad)], stroke="gray",
                      **{"stroke-dasharray": "4 3"})
            if v.edges is not None:
                p = np.asarray(v.point)
                for e in v.edges:
                    self.path([p, p + 0.3 * (yhi - ylo) * np.asarray(e)], stroke="crimson")

    def levels(self, u, n: int = 8):
        top = u.max_height
        for c in top * (np.arange(1, n + 1) / (n + 1)):
            for a, b in level_segments(u, c):
                self.path([a, b], stroke="steelblue", **{"stroke-width": "0.8"})
        for x, y, _ in u.apexes:
            ET.SubElement(self.root, "circle", cx=self.xy((x, y)).split()[0],
                          cy=self.xy((x, y)).split()[1], r="2.5", fill="steelblue")

    def tostring(self) -> str:
        return ET.tostring(self.root, encoding="unicode")

    def write(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.tostring())


def domain_figure(domain: Domain, u=None) -> Figure:
    fig = Figure(domain)
    fig.outline()
    fig.support_lines()
    if u is not None:
        fig.levels(u)
    return fig
