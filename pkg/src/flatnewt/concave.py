"""Concave trial functions: hull functions over apex sets, tents, chord
witnesses near a support line, and a non-concave oscillating comparison field.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import ApexOutsideDomain, ChordTooShort, PhiOutOfRange, PointOutsideDomain, NonDifferentiable
from .geom2d import GEOM_TOL, ContactKind, Domain, Side, classify_vertical_support, support_value
from .hull3d import UpperSurface, lifted_surface

CREASE_TOL = 1e-10
BOUNDARY_ULPS = 16


@dataclass(frozen=True, eq=False)
class HullFunction:
    """Upper boundary of conv(polygon x {0} and the lifted apexes).

    ``surface`` is None for the zero function (no apexes).
    """

    domain: Domain
    apexes: tuple  # ((x, y, h), ...)
    surface: UpperSurface | None = field(repr=False, default=None)

    @property
    def is_zero(self) -> bool:
        return self.surface is None

    @property
    def max_height(self) -> float:
        return max((a[2] for a in self.apexes), default=0.0)

    def _check_inside(self, P: np.ndarray) -> np.ndarray:
        margin = self.domain.inside_margin(P)
        if (margin < -GEOM_TOL * self.domain.scale).any():
            raise PointOutsideDomain(f"point outside the domain: {P[np.argmin(margin)].tolist()}")
        return margin

    def values(self, pts) -> np.ndarray:
        """Vectorized evaluation: the minimum over facet planes."""
        P = np.atleast_2d(np.asarray(pts, dtype=float))
        margin = self._check_inside(P)
        if self.is_zero:
            return np.zeros(len(P))
        s = self.surface
        v = np.maximum((s.offsets[None, :] + P @ s.gradients.T).min(axis=1), 0.0)
        # boundary points are hull inputs at height zero; drop rounding residue there
        v[margin <= BOUNDARY_ULPS * np.finfo(float).eps * self.domain.scale] = 0.0
        return v

    def eval(self, p) -> float:
        return float(self.values(p)[0])

    def __call__(self, x, y):
        P = np.column_stack([np.ravel(x), np.ravel(y)])
        return self.values(P).reshape(np.shape(x))

    def gradient(self, p) -> tuple[float, float]:
        """Gradient at a point at least ``CREASE_TOL`` away from every crease."""
        P = np.atleast_2d(np.asarray(p, dtype=float))
        self._check_inside(P)
        if self.is_zero:
            return (0.0, 0.0)
        s = self.surface
        vals = s.offsets + s.gradients @ P[0]
        i = int(np.argmin(vals))
        dg = np.hypot(*(s.gradients - s.gradients[i]).T)
        crease = dg > 1e-12
        if crease.any() and ((vals[crease] - vals[i]) / dg[crease]).min() <= CREASE_TOL:
            raise NonDifferentiable(f"{P[0].tolist()} lies on a crease")
        return float(s.gradients[i, 0]), float(s.gradients[i, 1])

    def gradients(self, pts) -> tuple[np.ndarray, np.ndarray]:
        """Gradients at many points plus a mask of points on a crease."""
        P = np.atleast_2d(np.asarray(pts, dtype=float))
        if self.is_zero:
            return np.zeros((len(P), 2)), np.zeros(len(P), dtype=bool)
        s = self.surface
        vals = s.offsets[None, :] + P @ s.gradients.T
        i = np.argmin(vals, axis=1)
        g = s.gradients[i]
        dg = np.hypot(s.gradients[None, :, 0] - g[:, None, 0], s.gradients[None, :, 1] - g[:, None, 1])
        gap = vals - vals[np.arange(len(P)), i][:, None]
        with np.errstate(divide="ignore", invalid="ignore"):
            dist = np.where(dg > 1e-12, gap / dg, np.inf)
        return g, dist.min(axis=1) <= CREASE_TOL

    def scaled(self, t: float) -> "HullFunction":
        if t <= 0:
            raise ValueError("scale factor must be positive")
        return hull_function(self.domain, [(x, y, h * t) for x, y, h in self.apexes])

    def to_json(self) -> dict:
        return {"domain": self.domain.to_json(), "apexes": [list(a) for a in self.apexes]}


def hull_function(domain: Domain, apexes: Iterable) -> HullFunction:
    """Hull function with apexes ``(x, y, h)`` or ``((x, y), h)``."""
    pts = []
    for a in apexes:
        if len(a) == 2:
            (x, y), h = a
        else:
            x, y, h = a
        pts.append((float(x), float(y), float(h)))
    if not pts:
        return HullFunction(domain, (), None)
    A = np.array(pts)
    if not np.isfinite(A).all() or (A[:, 2] <= 0).any():
        raise ValueError("apex heights must be positive and finite")
    margin = domain.inside_margin(A[:, :2])
    bad = margin <= GEOM_TOL * domain.scale
    if bad.any():
        raise ApexOutsideDomain(f"apex {A[np.argmax(bad), :2].tolist()} is not strictly inside")
    return HullFunction(domain, tuple(pts), lifted_surface(domain.polygon, pts))


def zero_function(domain: Domain) -> HullFunction:
    return HullFunction(domain, (), None)


def tent(domain: Domain, apex=None, height: float = 1.0) -> HullFunction:
    """Smallest concave function vanishing on the boundary with the given peak;
    the apex defaults to the centroid."""
    if apex is None:
        apex = domain.centroid
    return hull_function(domain, [(apex[0], apex[1], height)])


def c1_norm(u: HullFunction) -> float:
    if u.is_zero:
        return 0.0
    g = u.surface.gradients
    return u.max_height + float(np.abs(g[:, 0]).max()) + float(np.abs(g[:, 1]).max())


def from_json(obj: dict, domain: Domain | None = None) -> HullFunction:
    if domain is None:
        from .shapes import domain_from_json

        domain = domain_from_json(obj["domain"])
    return hull_function(domain, [tuple(a) for a in obj["apexes"]])


# -- chord witnesses near a non-angular support line ---------------------------


@dataclass(frozen=True)
class WitnessParams:
    phi: float
    eps: float
    shrink: float = 0.8
    clip: bool = True  # keep AB inside the r/2 ball around the contact point

    def __post_init__(self):
        if not 0.0 < self.phi < math.pi / 2:
            raise PhiOutOfRange(f"phi={self.phi} must lie in (0, pi/2)")
        if not self.eps > 0:
            raise ValueError("eps must be positive")
        if not 0.0 < self.shrink < 1.0:
            raise ValueError("shrink must lie in (0, 1)")


@dataclass(frozen=True, eq=False)
class Witness:
    function: HullFunction
    params: WitnessParams
    side: Side
    kind: ContactKind
    xi: tuple  # regular boundary point whose support line the chord follows
    theta: float  # outward normal angle of that support line
    r: float  # distance from xi to the boundary of the cone-cut region
    chord: tuple  # endpoints of the chord at distance eps
    ab: tuple  # endpoints of the lifted segment

    @property
    def ab_length(self) -> float:
        return math.dist(*self.ab)

    def to_json(self) -> dict:
        return {"phi": self.params.phi, "eps": self.params.eps, "shrink": self.params.shrink,
                "side": self.side.value, "contact": self.kind.value, "xi": list(self.xi),
                "theta": self.theta, "r": self.r, "ab": [list(p) for p in self.ab],
                "apexes": [list(a) for a in self.function.apexes]}


def _wrap(a: float) -> float:
    return math.atan2(math.sin(a), math.cos(a))


def cone_cut_distance(domain: Domain, xi, theta0: float, phi: float) -> float:
    """dist(xi, boundary of the intersection of supporting half-planes whose
    normal angle is at least phi away from theta0)."""

    def gap(a):
        return support_value(domain, a) - (math.cos(a) * xi[0] + math.sin(a) * xi[1])

    lo, hi = theta0 + phi, theta0 + 2.0 * math.pi - phi
    grid = np.linspace(lo, hi, 721)
    vals = [gap(a) for a in grid]
    k = int(np.argmin(vals))
    a0, a1 = grid[max(k - 1, 0)], grid[min(k + 1, len(grid) - 1)]
    res = minimize_scalar(gap, bounds=(a0, a1), method="bounded", options={"xatol": 1e-12})
    return max(0.0, min(vals[k], float(res.fun)))


def _regular_point(domain: Domain, verdict, theta0: float, phi: float):
    """(xi, theta) for the witness, chosen by the contact kind."""
    kind = verdict.kind
    if kind is ContactKind.EDGE_CONTACT:
        p, q = verdict.contact
        return ((p[0] + q[0]) / 2.0, (p[1] + q[1]) / 2.0), theta0
    if kind is ContactKind.HALF_TANGENT:
        j = verdict.junction
        m = len(domain.pieces)
        for piece in (domain.pieces[j], domain.pieces[(j + 1) % m]):
            if piece.kind != "arc":
                continue
            delta = min(phi / 2.0, piece.sweep / 2.0)
            for t in (theta0 + delta, theta0 - delta):
                if piece.contains_angle(t, tol=0.0):
                    return piece.point(t), _wrap(t)
        raise ChordTooShort("no arc with a vertical tangent next to the corner")
    return verdict.point, theta0


def _snap_to_vertex(domain: Domain, p):
    """Nearest polygonization vertex and the bisector of its normal cone.

    All integrals live on the polygonization, so the chord must follow one of
    its support lines; away from a vertex the polygon sits strictly inside
    any curved piece.
    """
    P = domain.polygon
    k = int(np.argmin(np.hypot(*(P - np.asarray(p)).T)))
    n = domain.edge_normals[k - 1] + domain.edge_normals[k]
    return (float(P[k, 0]), float(P[k, 1])), math.atan2(n[1], n[0])


def _polygon_chord(P: np.ndarray, n, offset: float):
    """Intersection of the convex polygon with the line n . x = offset."""
    s = P @ n - offset
    Q = np.roll(P, -1, axis=0)
    sq = np.roll(s, -1)
    cross = (s > 0) != (sq > 0)
    if cross.sum() < 2:
        return None
    t = s[cross] / (s[cross] - sq[cross])
    pts = P[cross] + t[:, None] * (Q[cross] - P[cross])
    d = np.array([-n[1], n[0]])
    proj = pts @ d
    return pts[int(np.argmin(proj))], pts[int(np.argmax(proj))]


def witness(domain: Domain, params: WitnessParams, side: Side | str | None = None) -> Witness:
    """Hull function with a unit-height segment AB on the chord at distance
    ``eps`` inside a support line next to the chosen vertical support line.

    Without ``side``, the first non-angular vertical support line is used
    (right before left); on a domain angular at both sides the right corner
    gives a bounded-ratio construction.
    """
    if side is None:
        verdicts = [classify_vertical_support(domain, s) for s in (Side.RIGHT, Side.LEFT)]
        verdict = next((v for v in verdicts if not v.is_angular), verdicts[0])
    else:
        verdict = classify_vertical_support(domain, side)
    theta0 = verdict.side.angle
    xi, theta = _regular_point(domain, verdict, theta0, params.phi)
    if verdict.kind in (ContactKind.TANGENT, ContactKind.HALF_TANGENT):
        xi, theta = _snap_to_vertex(domain, xi)
    r = cone_cut_distance(domain, xi, theta0, params.phi)

    n = np.array([math.cos(theta), math.sin(theta)])
    h_poly = float((domain.polygon @ n).max())
    chord = _polygon_chord(domain.polygon, n, h_poly - params.eps)
    if chord is None:
        raise ChordTooShort(f"eps={params.eps} exceeds the width")
    p, q = chord
    mid = 0.5 * (p + q)
    d = (q - p) / max(np.linalg.norm(q - p), 1e-300)
    half = 0.5 * params.shrink * float(np.linalg.norm(q - p))
    lo, hi = -half, half
    clip = params.clip and verdict.kind in (ContactKind.TANGENT, ContactKind.HALF_TANGENT)
    if clip:
        # points mid + s d within r/2 of xi
        w = mid - np.asarray(xi)
        b = float(w @ d)
        disc = b * b - (float(w @ w) - (0.5 * r) ** 2)
        if disc <= 0:
            raise ChordTooShort("chord misses the r/2 ball around the contact point")
        lo, hi = max(lo, -b - math.sqrt(disc)), min(hi, -b + math.sqrt(disc))
    tol = GEOM_TOL * domain.scale
    if hi - lo <= tol:
        raise ChordTooShort(f"segment AB degenerates at eps={params.eps}")
    A, B = mid + lo * d, mid + hi * d
    if domain.inside_margin(np.array([A, B])).min() <= tol:
        raise ChordTooShort(f"AB touches the boundary at eps={params.eps}")
    u = hull_function(domain, [(A[0], A[1], 1.0), (B[0], B[1], 1.0)])
    return Witness(u, params, verdict.side, verdict.kind, tuple(map(float, xi)), float(theta),
                   float(r), (tuple(p.tolist()), tuple(q.tolist())),
                   (tuple(A.tolist()), tuple(B.tolist())))


def witness_sequence(domain: Domain, schedule: Iterable[WitnessParams],
                     side: Side | str | None = None) -> Iterator[Witness]:
    """Witnesses along a parameter schedule; steps with a degenerate chord are skipped."""
    for params in schedule:
        try:
            yield witness(domain, params, side)
        except ChordTooShort:
            continue


# -- a non-concave comparison field --------------------------------------------


@dataclass(frozen=True, eq=False)
class OscillatingField:
    """(x, y) -> d(x, y)^2 * sin(N x), d the distance to the polygon boundary."""

    domain: Domain
    N: int

    def _dist(self, x, y):
        P = np.column_stack([np.ravel(x), np.ravel(y)])
        D = self.domain.edge_offsets[None, :] - P @ self.domain.edge_normals.T
        k = np.argmin(D, axis=1)
        return np.maximum(D[np.arange(len(P)), k], 0.0), k

    def __call__(self, x, y):
        x = np.asarray(x, dtype=float)
        d, _ = self._dist(x, y)
        return (d * d * np.sin(self.N * np.ravel(x))).reshape(np.shape(x))

    def gradient(self, x, y) -> tuple[np.ndarray, np.ndarray]:
        x = np.asarray(x, dtype=float)
        xs = np.ravel(x)
        d, k = self._dist(x, y)
        n = self.domain.edge_normals[k]
        s, c = np.sin(self.N * xs), np.cos(self.N * xs)
        gx = -2.0 * d * n[:, 0] * s + d * d * self.N * c
        gy = -2.0 * d * n[:, 1] * s
        return gx.reshape(np.shape(x)), gy.reshape(np.shape(x))


def oscillating_function(domain: Domain, N: int) -> OscillatingField:
    if N < 0:
        raise ValueError("N must be non-negative")
    return OscillatingField(domain, int(N))


def midpoint_violation(field, domain: Domain, n_pairs: int = 10_000, seed: int = 0,
                       tol: float = 1e-9):
    """First sampled pair (p, q) with f((p+q)/2) < (f(p)+f(q))/2 - tol, or None."""
    rng = np.random.default_rng(seed)
    P = domain.polygon
    lo, hi = P.min(axis=0), P.max(axis=0)
    pts = []
    while sum(len(p) for p in pts) < 2 * n_pairs:
        cand = rng.uniform(lo, hi, size=(4 * n_pairs, 2))
        pts.append(cand[domain.inside_margin(cand) > 0])
    pts = np.concatenate(pts)[: 2 * n_pairs]
    p, q = pts[:n_pairs], pts[n_pairs:]
    m = 0.5 * (p + q)
    fp, fq, fm = (np.asarray(field(a[:, 0], a[:, 1])) for a in (p, q, m))
    bad = np.flatnonzero(fm < 0.5 * (fp + fq) - tol)
    if len(bad) == 0:
        return None
    i = bad[0]
    return tuple(p[i]), tuple(q[i])
