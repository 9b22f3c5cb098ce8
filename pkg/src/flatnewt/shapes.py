"""Built-in domain generators and the JSON domain-spec reader."""

from __future__ import annotations

import json
import math
import re
import warnings

from .errors import DomainError
from .geom2d import Arc, Domain, Segment, build_domain, polygon_area

DEFAULT_N_POLY = 512


def polygon(vertices, n_poly: int = DEFAULT_N_POLY) -> Domain:
    """Convex polygon; clockwise input is reoriented."""
    pts = [(float(x), float(y)) for x, y in vertices]
    if polygon_area(pts) < 0:
        pts.reverse()
    segs = [Segment(pts[i], pts[(i + 1) % len(pts)]) for i in range(len(pts))]
    return build_domain(segs, n_poly)


def disk(radius: float = 1.0, n_poly: int = DEFAULT_N_POLY) -> Domain:
    return build_domain([Arc((0.0, 0.0), radius, 0.0, 2.0 * math.pi)], n_poly)


def half_disk(radius: float = 1.0, n_poly: int = DEFAULT_N_POLY) -> Domain:
    """Upper half-disk; its diameter lies on the x-axis."""
    return build_domain([Segment((-radius, 0.0), (radius, 0.0)),
                         Arc((0.0, 0.0), radius, 0.0, math.pi)], n_poly)


def diamond(n_poly: int = DEFAULT_N_POLY) -> Domain:
    return polygon([(1, 0), (0, 1), (-1, 0), (0, -1)], n_poly)


def square(n_poly: int = DEFAULT_N_POLY) -> Domain:
    return rectangle(2.0, 2.0, n_poly)


def rectangle(w: float, h: float, n_poly: int = DEFAULT_N_POLY) -> Domain:
    a, b = 0.5 * w, 0.5 * h
    return polygon([(-a, -b), (a, -b), (a, b), (-a, b)], n_poly)


def regular_ngon(n: int, rotation: float = 0.0, n_poly: int = DEFAULT_N_POLY) -> Domain:
    n = int(n)
    if n < 3:
        raise DomainError("regular_ngon needs n >= 3")
    pts = []
    for k in range(n):
        t = rotation + 2.0 * math.pi * k / n
        pts.append((_clean(math.cos(t)), _clean(math.sin(t))))
    return polygon(pts, n_poly)


def triangle(p1, p2, p3, n_poly: int = DEFAULT_N_POLY) -> Domain:
    return polygon([p1, p2, p3], n_poly)


def _clean(v: float) -> float:
    # cos/sin of multiples of pi/2 should be exact so that edges come out axis-parallel
    r = round(v)
    return float(r) if abs(v - r) < 1e-15 else v


def _biarc(p0, t0, p1, t1):
    """Two tangent-continuous counterclockwise arcs from (p0, t0) to (p1, t1)."""
    vx, vy = p1[0] - p0[0], p1[1] - p0[1]
    tx, ty = t0[0] + t1[0], t0[1] + t1[1]
    vt = vx * tx + vy * ty
    vv = vx * vx + vy * vy
    dot = t0[0] * t1[0] + t0[1] * t1[1]
    if abs(1.0 - dot) < 1e-14:
        d = vv / (4.0 * vt)
    else:
        d = (-vt + math.sqrt(vt * vt + 2.0 * (1.0 - dot) * vv)) / (2.0 * (1.0 - dot))
    q0 = (p0[0] + d * t0[0], p0[1] + d * t0[1])
    q1 = (p1[0] - d * t1[0], p1[1] - d * t1[1])
    j = (0.5 * (q0[0] + q1[0]), 0.5 * (q0[1] + q1[1]))
    return [_arc_from_tangent(p0, t0, j), _arc_from_tangent(j, _unit_between(q0, q1), p1)]


def _unit_between(a, b):
    dx, dy = b[0] - a[0], b[1] - a[1]
    n = math.hypot(dx, dy)
    return (dx / n, dy / n)


def _arc_from_tangent(p, t, q) -> Arc:
    nx, ny = -t[1], t[0]
    wx, wy = q[0] - p[0], q[1] - p[1]
    r = (wx * wx + wy * wy) / (2.0 * (nx * wx + ny * wy))
    if r <= 0:
        raise DomainError("biarc segment turns clockwise")
    c = (p[0] + r * nx, p[1] + r * ny)
    a0 = math.atan2(p[1] - c[1], p[0] - c[0])
    a1 = math.atan2(q[1] - c[1], q[0] - c[0])
    while a1 <= a0:
        a1 += 2.0 * math.pi
    return Arc(c, r, a0, a1)


def ellipse(a: float, b: float, n_arcs: int = 16, n_poly: int = DEFAULT_N_POLY) -> Domain:
    """Arc-spline approximation of the ellipse x^2/a^2 + y^2/b^2 <= 1.

    Biarcs through ``n_arcs // 2`` equally spaced parameter points keep the
    tangent continuous, so every junction is a regular point.  The angular
    classification therefore reflects the approximant, not the ellipse.
    """
    m = int(n_arcs) // 2
    if m < 2:
        raise DomainError("ellipse needs n_arcs >= 4")
    warnings.warn("ellipse represented by an arc spline", stacklevel=2)
    pts, tans = [], []
    for k in range(m):
        s = 2.0 * math.pi * k / m
        pts.append((_clean(math.cos(s)) * a, _clean(math.sin(s)) * b))
        tans.append(_unit_between((0, 0), (-a * math.sin(s), b * math.cos(s))))
    pieces = []
    for k in range(m):
        pieces.extend(_biarc(pts[k], tans[k], pts[(k + 1) % m], tans[(k + 1) % m]))
    return build_domain(pieces, n_poly)


GENERATORS = {
    "disk": disk,
    "half_disk": half_disk,
    "diamond": diamond,
    "square": square,
    "rectangle": rectangle,
    "regular_ngon": regular_ngon,
    "triangle": None,  # handled in from_generator (takes points)
    "ellipse": ellipse,
}


def from_generator(spec: str, n_poly: int = DEFAULT_N_POLY) -> Domain:
    """Parse ``name``, ``name:a,b`` or ``name(a,b)`` into a domain."""
    m = re.fullmatch(r"\s*([a-z_]+)\s*(?:[:(]\s*([^)]*?)\s*\)?)?\s*", spec)
    if not m or m.group(1) not in GENERATORS:
        raise DomainError(f"unknown generator {spec!r}; choose from {sorted(GENERATORS)}")
    name = m.group(1)
    args = [float(a) for a in re.split(r"[,\s]+", m.group(2))] if m.group(2) else []
    if name == "triangle":
        if len(args) != 6:
            raise DomainError("triangle needs six numbers x1,y1,x2,y2,x3,y3")
        return triangle(args[0:2], args[2:4], args[4:6], n_poly=n_poly)
    if name == "regular_ngon" and args:
        args[0] = int(args[0])
    if name == "ellipse" and len(args) > 2:
        args[2] = int(args[2])
    try:
        return GENERATORS[name](*args, n_poly=n_poly)
    except TypeError as exc:
        raise DomainError(f"bad arguments for {name}: {exc}") from None


def piece_from_json(obj: dict):
    kind = obj.get("type")
    if kind == "segment":
        return Segment(tuple(obj["from"]), tuple(obj["to"]))
    if kind == "arc":
        return Arc(tuple(obj["center"]), obj["radius"], obj["start_angle"], obj["end_angle"])
    raise DomainError(f"unknown piece type {kind!r}")


def domain_from_json(obj: dict) -> Domain:
    try:
        pieces = [piece_from_json(p) for p in obj["pieces"]]
    except (KeyError, TypeError, IndexError) as exc:
        raise DomainError(f"malformed piece: {exc}") from None
    return build_domain(pieces, int(obj.get("n_poly", DEFAULT_N_POLY)))


def load_domain(path) -> Domain:
    with open(path) as fh:
        return domain_from_json(json.load(fh))
