"""Convex planar domains bounded by segments and circular arcs.

The boundary is kept as exact pieces so that smooth contact (a support line
touching an arc) can be told apart from corner contact.  A polygonization is
derived once at construction and is what the hull and integration code see.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Sequence, Union

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import (
    DegenerateDomain,
    DomainError,
    NonConvexBoundary,
    NonPointContact,
    NotAngular,
    OpenBoundary,
)

TWO_PI = 2.0 * math.pi
GEOM_TOL = 1e-12  # relative to domain scale
ANGLE_TOL = 1e-9  # radians

Point = tuple[float, float]


def _pt(p) -> Point:
    x, y = float(p[0]), float(p[1])
    if not (math.isfinite(x) and math.isfinite(y)):
        raise DomainError(f"non-finite coordinate {p!r}")
    return (x, y)


def _unit(vx: float, vy: float) -> Point:
    n = math.hypot(vx, vy)
    return (vx / n, vy / n)


def _cross(a: Point, b: Point) -> float:
    return a[0] * b[1] - a[1] * b[0]


def _dot(a: Point, b: Point) -> float:
    return a[0] * b[0] + a[1] * b[1]


def line_angle(v: Point, d: Point) -> float:
    """Angle in [0, pi/2] between vector ``v`` and the line spanned by ``d``."""
    return math.atan2(abs(_cross(v, d)), abs(_dot(v, d)))


@dataclass(frozen=True)
class Segment:
    start: Point
    end: Point

    kind = "segment"

    def __post_init__(self):
        object.__setattr__(self, "start", _pt(self.start))
        object.__setattr__(self, "end", _pt(self.end))
        if self.start == self.end:
            raise DomainError("segment endpoints coincide")

    @property
    def length(self) -> float:
        return math.dist(self.start, self.end)

    @property
    def direction(self) -> Point:
        return _unit(self.end[0] - self.start[0], self.end[1] - self.start[1])

    def tangent_start(self) -> Point:
        return self.direction

    def tangent_end(self) -> Point:
        return self.direction

    def candidates(self, angle: float) -> list[Point]:
        return [self.start, self.end]

    def sample(self, k: int) -> list[Point]:
        return [self.start]

    def turning(self) -> float:
        return 0.0

    def to_json(self) -> dict:
        return {"type": "segment", "from": list(self.start), "to": list(self.end)}


@dataclass(frozen=True)
class Arc:
    """Counterclockwise arc ``center + radius*(cos t, sin t)``, t in [start_angle, end_angle]."""

    center: Point
    radius: float
    start_angle: float
    end_angle: float

    kind = "arc"

    def __post_init__(self):
        object.__setattr__(self, "center", _pt(self.center))
        for name in ("radius", "start_angle", "end_angle"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise DomainError(f"non-finite arc {name}")
            object.__setattr__(self, name, v)
        if self.radius <= 0:
            raise DomainError("arc radius must be positive")
        sweep = self.end_angle - self.start_angle
        if not (0.0 < sweep <= TWO_PI + 1e-12):
            raise DomainError(f"arc sweep {sweep} outside (0, 2*pi]")

    @property
    def sweep(self) -> float:
        return self.end_angle - self.start_angle

    @property
    def length(self) -> float:
        return self.radius * self.sweep

    def point(self, t: float) -> Point:
        return (self.center[0] + self.radius * math.cos(t),
                self.center[1] + self.radius * math.sin(t))

    @property
    def start(self) -> Point:
        return self.point(self.start_angle)

    @property
    def end(self) -> Point:
        return self.point(self.end_angle)

    @staticmethod
    def tangent(t: float) -> Point:
        return (-math.sin(t), math.cos(t))

    def tangent_start(self) -> Point:
        return self.tangent(self.start_angle)

    def tangent_end(self) -> Point:
        return self.tangent(self.end_angle)

    def contains_angle(self, a: float, tol: float = 0.0) -> bool:
        off = (a - self.start_angle) % TWO_PI
        return off <= self.sweep + tol or off >= TWO_PI - tol

    def candidates(self, angle: float) -> list[Point]:
        pts = [self.start, self.end]
        if self.contains_angle(angle):
            pts.append(self.point(angle))
        return pts

    def sample(self, k: int) -> list[Point]:
        return [self.point(self.start_angle + self.sweep * j / k) for j in range(k)]

    def turning(self) -> float:
        return self.sweep

    def to_json(self) -> dict:
        return {"type": "arc", "center": list(self.center), "radius": self.radius,
                "start_angle": self.start_angle, "end_angle": self.end_angle}


BoundaryPiece = Union[Segment, Arc]


@dataclass(frozen=True, eq=False)
class Domain:
    """Validated convex domain.  Build with :func:`build_domain`."""

    pieces: tuple
    n_poly: int
    polygon: np.ndarray = field(repr=False)
    area: float
    scale: float

    @cached_property
    def polygon_area(self) -> float:
        return polygon_area(self.polygon)

    @cached_property
    def edge_normals(self) -> np.ndarray:
        e = np.roll(self.polygon, -1, axis=0) - self.polygon
        n = np.column_stack([e[:, 1], -e[:, 0]])
        return n / np.hypot(n[:, 0], n[:, 1])[:, None]

    @cached_property
    def edge_offsets(self) -> np.ndarray:
        return np.einsum("ij,ij->i", self.edge_normals, self.polygon)

    @cached_property
    def centroid(self) -> Point:
        P = self.polygon
        Q = np.roll(P, -1, axis=0)
        w = P[:, 0] * Q[:, 1] - Q[:, 0] * P[:, 1]
        a = w.sum() / 2.0
        return (float(((P[:, 0] + Q[:, 0]) * w).sum() / (6 * a)),
                float(((P[:, 1] + Q[:, 1]) * w).sum() / (6 * a)))

    @property
    def has_arcs(self) -> bool:
        return any(p.kind == "arc" for p in self.pieces)

    def inside_margin(self, pts) -> np.ndarray:
        """Signed distance to the polygonized boundary, positive inside."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        return (self.edge_offsets[None, :] - pts @ self.edge_normals.T).min(axis=1)

    def to_json(self) -> dict:
        return {"pieces": [p.to_json() for p in self.pieces], "n_poly": self.n_poly}


def polygon_area(P) -> float:
    P = np.asarray(P, dtype=float)
    x, y = P[:, 0], P[:, 1]
    return float(0.5 * (np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y)))


def _polygonize(pieces, n_poly: int) -> np.ndarray:
    arc_len = sum(p.length for p in pieces if p.kind == "arc")
    pts: list[Point] = []
    for p in pieces:
        if p.kind == "arc":
            k = max(1, math.ceil(n_poly * p.length / arc_len))
            pts.extend(p.sample(k))
        else:
            pts.extend(p.sample(1))
    return np.array(pts, dtype=float)


def build_domain(pieces: Sequence[BoundaryPiece], n_poly: int = 512) -> Domain:
    """Validate a closed counterclockwise convex boundary and polygonize it.

    Arcs receive at least ``n_poly`` vertices in total, spread by arc length;
    segments contribute only their exact endpoints.
    """
    pieces = tuple(pieces)
    if not pieces:
        raise DegenerateDomain("no boundary pieces")
    n_poly = int(n_poly)
    if n_poly < 1:
        raise DomainError("n_poly must be positive")
    poly = _polygonize(pieces, n_poly)
    lo, hi = poly.min(axis=0), poly.max(axis=0)
    for p in pieces:
        if p.kind == "arc":
            c, r = np.array(p.center), p.radius
            lo, hi = np.minimum(lo, c - r), np.maximum(hi, c + r)
    scale = float(np.hypot(*(hi - lo)))
    if scale == 0.0:
        raise DegenerateDomain("domain has zero extent")

    for i, p in enumerate(pieces):
        if p.length <= GEOM_TOL * scale:
            raise DegenerateDomain(f"piece {i} is shorter than the tolerance")
    m = len(pieces)
    turning = 0.0
    for i, p in enumerate(pieces):
        q = pieces[(i + 1) % m]
        if math.dist(p.end, q.start) > GEOM_TOL * scale:
            raise OpenBoundary(f"piece {i} ends at {p.end}, piece {(i + 1) % m} starts at {q.start}")
        t_in, t_out = p.tangent_end(), q.tangent_start()
        turn = math.atan2(_cross(t_in, t_out), _dot(t_in, t_out))
        if turn < -ANGLE_TOL:
            raise NonConvexBoundary(f"right turn at junction after piece {i}")
        turning += turn + p.turning()
    if len(poly) < 3 and not (m == 1 and pieces[0].kind == "arc"):
        raise DegenerateDomain("boundary has fewer than three vertices")

    area_poly = polygon_area(poly)
    if area_poly < 0:
        raise NonConvexBoundary("boundary is oriented clockwise")
    if area_poly <= GEOM_TOL * scale * scale:
        raise DegenerateDomain("domain has zero area")
    if abs(turning - TWO_PI) > 1e-6:
        raise NonConvexBoundary(f"total turning {turning:.6g} differs from 2*pi")

    E = np.roll(poly, -1, axis=0) - poly
    cr = E[:, 0] * np.roll(E[:, 1], -1) - E[:, 1] * np.roll(E[:, 0], -1)
    if cr.min() < -GEOM_TOL * scale * scale:
        raise NonConvexBoundary("polygonization has a right turn")

    ends = [p.start for p in pieces]
    area = polygon_area(ends) if len(ends) >= 3 else 0.0
    for p in pieces:
        if p.kind == "arc":
            area += 0.5 * p.radius ** 2 * (p.sweep - math.sin(p.sweep))
    return Domain(pieces=pieces, n_poly=n_poly, polygon=poly, area=area, scale=scale)


# -- support lines ---------------------------------------------------------


@dataclass(frozen=True)
class SupportInfo:
    angle: float
    line_offset: float
    contact: tuple  # (point,) or (p, q) for a segment

    @property
    def normal(self) -> Point:
        return (math.cos(self.angle), math.sin(self.angle))

    @property
    def is_segment(self) -> bool:
        return len(self.contact) == 2


def support_value(domain: Domain, angle: float) -> float:
    n = (math.cos(angle), math.sin(angle))
    return max(_dot(n, c) for p in domain.pieces for c in p.candidates(angle))


def support_line(domain: Domain, angle: float) -> SupportInfo:
    """Support line with outward normal ``(cos angle, sin angle)`` and its contact set."""
    n = (math.cos(angle), math.sin(angle))
    cands = [c for p in domain.pieces for c in p.candidates(angle)]
    vals = [_dot(n, c) for c in cands]
    h = max(vals)
    tol = GEOM_TOL * domain.scale
    touching = [c for c, v in zip(cands, vals) if v >= h - tol]
    d = (-n[1], n[0])
    s = [_dot(d, c) for c in touching]
    lo, hi = touching[int(np.argmin(s))], touching[int(np.argmax(s))]
    if max(s) - min(s) > tol:
        return SupportInfo(angle, h, (lo, hi))
    return SupportInfo(angle, h, (cands[int(np.argmax(vals))],))


def width(domain: Domain, angle: float) -> float:
    return support_value(domain, angle) + support_value(domain, angle + math.pi)


def _antipodal_pairs(P: np.ndarray):
    """Rotating calipers over a counterclockwise convex polygon."""
    n = len(P)

    def area2(i, j, k):
        return abs(_cross(tuple(P[j] - P[i]), tuple(P[k] - P[i])))

    j = 1
    while area2(n - 1, 0, (j + 1) % n) > area2(n - 1, 0, j):
        j += 1
    pairs = []
    for i in range(n):
        i1 = (i + 1) % n
        while area2(i, i1, (j + 1) % n) > area2(i, i1, j):
            j = (j + 1) % n
        pairs.append((i, j))
        pairs.append((i1, j))
    return pairs


def diameter(domain: Domain) -> float:
    """Maximum width of the domain (its diameter).

    Exact for polygons; for arcs the caliper estimate is refined with the
    exact support function.
    """
    P = domain.polygon
    if len(P) < 3:
        return 2.0 * domain.pieces[0].radius
    best, pair = -1.0, (0, 0)
    for i, j in _antipodal_pairs(P):
        d = float(np.hypot(*(P[i] - P[j])))
        if d > best:
            best, pair = d, (i, j)
    if not domain.has_arcs:
        return best
    v = P[pair[0]] - P[pair[1]]
    a0 = math.atan2(v[1], v[0])
    da = 4.0 * TWO_PI / max(len(P), 8)
    res = minimize_scalar(lambda a: -width(domain, a), bounds=(a0 - da, a0 + da),
                          method="bounded", options={"xatol": 1e-12})
    return max(best, -float(res.fun), width(domain, a0))


# -- tangent cones and the angular classification -----------------------------


class Side(str, Enum):
    LEFT = "left"
    RIGHT = "right"

    @property
    def angle(self) -> float:
        return math.pi if self is Side.LEFT else 0.0


class ContactKind(str, Enum):
    ANGULAR = "Angular"
    TANGENT = "Tangent"
    HALF_TANGENT = "HalfTangent"
    EDGE_CONTACT = "EdgeContact"


@dataclass(frozen=True)
class AngularVerdict:
    kind: ContactKind
    side: Side
    contact: tuple  # (point,) or segment endpoints
    edges: tuple | None = None  # tangent cone edge directions at a corner
    margin: float = 0.0  # smallest angle between a cone edge and the support line
    junction: int | None = None  # index i of the junction between piece i and i+1

    @property
    def is_angular(self) -> bool:
        return self.kind is ContactKind.ANGULAR

    @property
    def point(self) -> Point:
        return self.contact[0]

    def to_json(self) -> dict:
        out = {"kind": self.kind.value, "contact": [list(c) for c in self.contact],
               "margin": self.margin}
        if self.edges is not None:
            out["cone_edges"] = [list(e) for e in self.edges]
        return out


def find_junction(domain: Domain, p: Point) -> int | None:
    tol = GEOM_TOL * domain.scale
    for i, piece in enumerate(domain.pieces):
        if math.dist(piece.end, p) <= tol:
            return i
    return None


def junction_tangents(domain: Domain, i: int) -> tuple[Point, Point]:
    m = len(domain.pieces)
    return domain.pieces[i].tangent_end(), domain.pieces[(i + 1) % m].tangent_start()


def junction_turn(domain: Domain, i: int) -> float:
    t_in, t_out = junction_tangents(domain, i)
    return math.atan2(_cross(t_in, t_out), _dot(t_in, t_out))


def classify_support(domain: Domain, angle: float, side: Side | None = None) -> AngularVerdict:
    info = support_line(domain, angle)
    if info.is_segment:
        return AngularVerdict(ContactKind.EDGE_CONTACT, side, info.contact)
    p = info.contact[0]
    j = find_junction(domain, p)
    if j is None or abs(junction_turn(domain, j)) <= ANGLE_TOL:
        # arc interior, or a junction where both one-sided tangents agree
        return AngularVerdict(ContactKind.TANGENT, side, info.contact, junction=j)
    t_in, t_out = junction_tangents(domain, j)
    edges = ((-t_in[0], -t_in[1]), t_out)
    d = (-math.sin(angle), math.cos(angle))
    margin = min(line_angle(e, d) for e in edges)
    kind = ContactKind.ANGULAR if margin > ANGLE_TOL else ContactKind.HALF_TANGENT
    return AngularVerdict(kind, side, info.contact, edges=edges, margin=margin, junction=j)


def classify_vertical_support(domain: Domain, side: Side | str) -> AngularVerdict:
    side = Side(side)
    return classify_support(domain, side.angle, side)


def singular_points(domain: Domain) -> list[Point]:
    """Piece junctions whose one-sided tangents differ."""
    return [p.end for i, p in enumerate(domain.pieces)
            if abs(junction_turn(domain, i)) > ANGLE_TOL]


# -- transforms -------------------------------------------------------------


def _map_pieces(pieces, f, similarity: tuple[float, float] | None, n_poly: int):
    """Apply the affine map ``f`` to boundary pieces.

    ``similarity`` is (scale, rotation) when ``f`` is an orientation-preserving
    similarity, in which case arcs stay arcs; otherwise arcs are replaced by
    their polyline approximation.
    """
    out = []
    arc_len = sum(p.length for p in pieces if p.kind == "arc")
    approximated = False
    for p in pieces:
        if p.kind == "segment":
            out.append(Segment(f(p.start), f(p.end)))
        elif similarity is not None:
            s, rot = similarity
            out.append(Arc(f(p.center), p.radius * s, p.start_angle + rot, p.end_angle + rot))
        else:
            approximated = True
            k = max(2, math.ceil(n_poly * p.length / arc_len))
            pts = p.sample(k) + [p.end]
            out.extend(Segment(f(a), f(b)) for a, b in zip(pts[:-1], pts[1:]))
    if approximated:
        warnings.warn("non-similarity transform: arcs replaced by polylines", stacklevel=3)
    return out


def transform(domain: Domain, rotation: float = 0.0, scale: float = 1.0,
              shift: Point = (0.0, 0.0)) -> Domain:
    """Rotate about the origin, scale uniformly, then translate."""
    c, s = math.cos(rotation), math.sin(rotation)
    if rotation == 0.0:
        c, s = 1.0, 0.0

    def f(p):
        return (scale * (c * p[0] - s * p[1]) + shift[0],
                scale * (s * p[0] + c * p[1]) + shift[1])

    return build_domain(_map_pieces(domain.pieces, f, (scale, rotation), domain.n_poly),
                        domain.n_poly)


def swap_xy(domain: Domain) -> Domain:
    """Reflect across the diagonal y = x (orientation is restored)."""
    out = []
    for p in reversed(domain.pieces):
        if p.kind == "segment":
            out.append(Segment(p.end[::-1], p.start[::-1]))
        else:
            a0, a1 = math.pi / 2 - p.end_angle, math.pi / 2 - p.start_angle
            out.append(Arc(p.center[::-1], p.radius, a0, a1))
    return build_domain(out, domain.n_poly)


def shear(domain: Domain, k: float) -> Domain:
    """Map (x, y) -> (x, y + k*x)."""
    if k == 0.0:
        return domain
    f = lambda p: (p[0], p[1] + k * p[0])  # noqa: E731
    return build_domain(_map_pieces(domain.pieces, f, None, domain.n_poly), domain.n_poly)


# -- normalization and the bound constants ------------------------------------


@dataclass(frozen=True)
class NormalizedDomain:
    domain: Domain
    translation: Point
    scale: float
    shear_c: float
    left_corner: Point = (0.0, 0.0)
    right_corner: Point = (2.0, 0.0)

    def forward(self, pts) -> np.ndarray:
        """Map points of the original domain into the normalized frame."""
        P = (np.atleast_2d(np.asarray(pts, dtype=float)) + self.translation) * self.scale
        P[:, 1] -= 0.5 * self.shear_c * P[:, 0]
        return P


def _snap(p: Point, targets, tol: float) -> Point:
    for t in targets:
        if math.dist(p, t) <= tol:
            return t
    return p


def normalize(domain: Domain) -> NormalizedDomain:
    """Translate the leftmost point to the origin, scale to x-width 2, shear
    so the rightmost point lands on (2, 0).  The shear has unit Jacobian."""
    left = support_line(domain, math.pi)
    right = support_line(domain, 0.0)
    if left.is_segment or right.is_segment:
        raise NonPointContact("a vertical support line touches an edge")
    pl, pr = left.contact[0], right.contact[0]
    s = 2.0 / (pr[0] - pl[0])
    c = (pr[1] - pl[1]) * s
    if abs(c) <= GEOM_TOL:
        c = 0.0
    half_c = 0.5 * c
    corners = ((0.0, 0.0), (2.0, 0.0))
    tol = GEOM_TOL * 2.0 * domain.scale * s

    def f(p):
        x, y = s * (p[0] - pl[0]), s * (p[1] - pl[1])
        return _snap((x, y - half_c * x), corners, tol)

    if c == 0.0:
        pieces = []
        for p in domain.pieces:
            if p.kind == "segment":
                pieces.append(Segment(f(p.start), f(p.end)))
            else:
                center = (s * (p.center[0] - pl[0]), s * (p.center[1] - pl[1]))
                pieces.append(Arc(center, p.radius * s, p.start_angle, p.end_angle))
    else:
        pieces = _map_pieces(domain.pieces, f, None, domain.n_poly)
    nd = build_domain(pieces, domain.n_poly)
    return NormalizedDomain(nd, (-pl[0], -pl[1]), s, c)


@dataclass(frozen=True)
class GeometricConstants:
    alpha: float
    beta: float
    h: float
    area: float
    m_left: float
    m_right: float
    shear_c: float

    def to_json(self) -> dict:
        return dict(self.__dict__)


def _piece_beta(p) -> float:
    """Smallest angle between a tangent line of the piece and the vertical."""
    if p.kind == "segment":
        return line_angle(p.direction, (0.0, 1.0))
    k = math.ceil(p.start_angle / math.pi)
    if k * math.pi <= p.end_angle:
        return 0.0
    dist = lambda t: abs(t - math.pi * round(t / math.pi))  # noqa: E731
    return min(dist(p.start_angle), dist(p.end_angle), math.pi / 2)


def corner_verdicts(domain: Domain) -> tuple[AngularVerdict, AngularVerdict]:
    left = classify_vertical_support(domain, Side.LEFT)
    right = classify_vertical_support(domain, Side.RIGHT)
    if not (left.is_angular and right.is_angular):
        raise NotAngular(f"vertical support lines: left={left.kind.value}, right={right.kind.value}")
    return left, right


def corner_slopes(domain: Domain) -> tuple[float, float, float]:
    """(m_left, m_right, c) of the normalized domain, from the corner cones."""
    left, right = corner_verdicts(domain)
    pl, pr = left.point, right.point
    k = (pr[1] - pl[1]) / (pr[0] - pl[0])
    c = 2.0 * k

    def m(v):
        return max(abs(e[1] / e[0] - k) for e in v.edges)

    return m(left), m(right), c


def geometric_constants(domain: Domain) -> GeometricConstants:
    left, right = corner_verdicts(domain)
    cone = [line_angle(e, (0.0, 1.0)) for v in (left, right) for e in v.edges]
    alpha = min(min(cone), math.pi / 4)
    beta = min(_piece_beta(p) for p in domain.pieces)
    if beta <= 0.0:
        raise NotAngular("boundary has a vertical tangent line")
    m_left, m_right, c = corner_slopes(domain)
    return GeometricConstants(alpha=alpha, beta=beta, h=diameter(domain), area=domain.area,
                              m_left=m_left, m_right=m_right, shear_c=c)
