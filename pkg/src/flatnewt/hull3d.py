"""Incremental 3D convex hull and the upper surface of lifted point sets.

Points are inserted in lexicographic order.  A point lying within the
tolerance of a facet plane counts as not visible from it, which amounts to a
consistent perturbation of later points toward the hull interior: ties never
create slivers and the result does not depend on the input order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInput, EmptyUpperSurface

UPPER_NZ_TOL = 1e-10
_BASE = -1  # facet id of the planar base polygon in lifted hulls


class _IncrementalHull:
    def __init__(self, points, tol):
        self.P = points
        self.tol = tol
        self.faces = {}  # fid -> (i, j, k, nx, ny, nz, inv_norm, d)
        self.edge = {}  # directed edge -> fid
        self._next = 0

    def add(self, i, j, k):
        P = self.P
        ax, ay, az = P[i]
        bx, by, bz = P[j][0] - ax, P[j][1] - ay, P[j][2] - az
        cx, cy, cz = P[k][0] - ax, P[k][1] - ay, P[k][2] - az
        nx = by * cz - bz * cy
        ny = bz * cx - bx * cz
        nz = bx * cy - by * cx
        norm = (nx * nx + ny * ny + nz * nz) ** 0.5
        inv = 1.0 / norm if norm > 0 else 0.0
        fid = self._next
        self._next += 1
        self.faces[fid] = (i, j, k, nx, ny, nz, inv, nx * ax + ny * ay + nz * az)
        self.edge[(i, j)] = fid
        self.edge[(j, k)] = fid
        self.edge[(k, i)] = fid

    def _height(self, fid, x, y, z):
        f = self.faces[fid]
        return (f[3] * x + f[4] * y + f[5] * z - f[7]) * f[6]

    def insert(self, q) -> bool:
        x, y, z = self.P[q]
        tol = self.tol
        best, best_h = None, tol
        for fid, f in self.faces.items():
            h = (f[3] * x + f[4] * y + f[5] * z - f[7]) * f[6]
            if h > best_h:
                best, best_h = fid, h
        if best is None:
            return False
        visible = {best}
        stack = [best]
        horizon = []
        while stack:
            f = self.faces[stack.pop()]
            for a, b in ((f[0], f[1]), (f[1], f[2]), (f[2], f[0])):
                g = self.edge.get((b, a), _BASE)
                if g in visible:
                    continue
                if g != _BASE and self._height(g, x, y, z) > tol:
                    visible.add(g)
                    stack.append(g)
                else:
                    horizon.append((a, b))
        for fid in visible:
            i, j, k = self.faces.pop(fid)[:3]
            for e in ((i, j), (j, k), (k, i)):
                if self.edge.get(e) == fid:
                    del self.edge[e]
        for a, b in horizon:
            self.add(a, b, q)
        return True


@dataclass(frozen=True, eq=False)
class Polytope3:
    """Simplicial convex polytope.  ``facets`` index into ``vertices``; input
    points that are not hull vertices are kept so indices match the input."""

    vertices: np.ndarray
    facets: np.ndarray  # (F, 3) int, counterclockwise seen from outside
    normals: np.ndarray  # (F, 3) outward unit normals

    @property
    def hull_vertices(self) -> np.ndarray:
        return np.unique(self.facets)

    def euler_characteristic(self) -> int:
        edges = {tuple(sorted((f[a], f[b]))) for f in self.facets.tolist()
                 for a, b in ((0, 1), (1, 2), (2, 0))}
        return len(self.hull_vertices) - len(edges) + len(self.facets)

    def max_violation(self) -> float:
        """Largest signed distance of a vertex above any facet plane."""
        V = self.vertices
        d = np.einsum("fk,fk->f", self.normals, V[self.facets[:, 0]])
        return float((V @ self.normals.T - d[None, :]).max())

    def support_sets(self, tol: float) -> set:
        """Distinct facet planes, each given by all input points lying on it."""
        V = self.vertices
        d = np.einsum("fk,fk->f", self.normals, V[self.facets[:, 0]])
        on = np.abs(V @ self.normals.T - d[None, :]) <= tol
        return {frozenset(np.flatnonzero(on[:, f]).tolist()) for f in range(len(self.facets))}

    def dump(self) -> str:
        lines = [f"vertices {len(self.vertices)} facets {len(self.facets)}"]
        for f, n in zip(self.facets.tolist(), self.normals.tolist()):
            lines.append("facet %d %d %d normal %.12g %.12g %.12g" % (*f, *n))
        return "\n".join(lines)


def _tolerance(pts: np.ndarray) -> float:
    span = pts.max(axis=0) - pts.min(axis=0)
    return 1e-11 * max(float(np.hypot.reduce(span)), 1e-300)


def _to_polytope(points: np.ndarray, faces, extra=()) -> Polytope3:
    tris = [f[:3] for f in faces] + [t for t, _ in extra]
    normals = [(f[3] * f[6], f[4] * f[6], f[5] * f[6]) for f in faces] + [n for _, n in extra]
    return Polytope3(points, np.array(tris, dtype=int).reshape(-1, 3),
                     np.array(normals, dtype=float).reshape(-1, 3))


def convex_hull_3d(points) -> Polytope3:
    """Convex hull of at least four affinely independent points."""
    P = np.asarray(points, dtype=float)
    if P.ndim != 2 or P.shape[1] != 3 or len(P) < 4:
        raise DegenerateInput("need at least four 3D points")
    if not np.isfinite(P).all():
        raise DegenerateInput("non-finite coordinates")
    tol = _tolerance(P)
    order = sorted(range(len(P)), key=lambda i: tuple(P[i]))
    pts = [tuple(p) for p in P.tolist()]

    p0 = order[0]
    a = P[p0]
    p1 = next((i for i in order if np.linalg.norm(P[i] - a) > tol), None)
    if p1 is None:
        raise DegenerateInput("all points coincide")
    u = P[p1] - a
    un = np.linalg.norm(u)
    p2 = next((i for i in order
               if np.linalg.norm(np.cross(u, P[i] - a)) / un > tol), None)
    if p2 is None:
        raise DegenerateInput("all points collinear")
    n = np.cross(u, P[p2] - a)
    nn = np.linalg.norm(n)
    p3 = next((i for i in order if abs(np.dot(n, P[i] - a)) / nn > tol), None)
    if p3 is None:
        raise DegenerateInput("all points coplanar")

    hull = _IncrementalHull(pts, tol)
    simplex = (p0, p1, p2, p3)
    centre = P[list(simplex)].mean(axis=0)
    for i, j, k in ((p0, p1, p2), (p0, p1, p3), (p1, p2, p3), (p0, p2, p3)):
        nrm = np.cross(P[j] - P[i], P[k] - P[i])
        if np.dot(nrm, centre - P[i]) > 0:
            j, k = k, j
        hull.add(i, j, k)
    for q in order:
        if q not in simplex:
            hull.insert(q)
    return _to_polytope(P, list(hull.faces.values()))


class LiftedBase:
    """A ccw base polygon prepared once for many lifted hulls."""

    def __init__(self, polygon):
        P = np.asarray(polygon, dtype=float)
        self.polygon = P
        self.points = [(float(x), float(y), 0.0) for x, y in P]
        span = P.max(axis=0) - P.min(axis=0)
        self.diag = float(np.hypot(span[0], span[1]))


def _lifted_faces(base, apexes):
    """Faces of conv(base x {0} + apexes) above the base, base polygon ccw.

    Returns (points, faces); faces carry unnormalized normals.  The base
    polygon itself is kept implicit.
    """
    if not isinstance(base, LiftedBase):
        base = LiftedBase(base)
    nb = len(base.points)
    apexes = sorted((float(a[0]), float(a[1]), float(a[2])) for a in apexes)
    pts = base.points + apexes
    top = max(a[2] for a in apexes)
    tol = 1e-11 * max(math.hypot(base.diag, top), 1e-300)
    hull = _IncrementalHull(pts, tol)
    for i in range(nb):
        hull.add(i, (i + 1) % nb, nb)
    for q in range(nb + 1, len(pts)):
        hull.insert(q)
    return pts, list(hull.faces.values())


def _ear_triangulation(poly: np.ndarray) -> list[tuple[int, int, int]]:
    """Triangulate a convex polygon that may contain collinear vertices."""
    idx = list(range(len(poly)))
    tris = []

    def turn(a, b, c):
        (ax, ay), (bx, by), (cx, cy) = poly[a], poly[b], poly[c]
        return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)

    scale = float(np.abs(poly).max()) or 1.0
    eps = 1e-14 * scale * scale
    while len(idx) > 3:
        for t in range(len(idx)):
            a, b, c = idx[t - 1], idx[t], idx[(t + 1) % len(idx)]
            if turn(a, b, c) <= eps:
                continue
            rest = idx[:t] + idx[t + 1:]
            if len(rest) == 3 and turn(*rest) <= eps:
                continue
            tris.append((a, b, c))
            idx = rest
            break
        else:
            break
    if len(idx) == 3:
        tris.append(tuple(idx))
    return tris


def lifted_hull(base, apexes) -> Polytope3:
    """Hull of a ccw convex base polygon at z = 0 and apexes above it."""
    base = np.asarray(base, dtype=float)
    if len(apexes) == 0:
        raise DegenerateInput("no apexes: the hull is flat")
    pts, faces = _lifted_faces(base, apexes)
    down = [((c, b, a), (0.0, 0.0, -1.0)) for a, b, c in _ear_triangulation(base)]
    return _to_polytope(np.array(pts), faces, down)


@dataclass(frozen=True, eq=False)
class UpperSurface:
    """Graph of a piecewise linear concave function: z = offset + g . (x, y)."""

    triangles: np.ndarray  # (F, 3, 2) projected facets, counterclockwise
    heights: np.ndarray  # (F, 3) vertex heights
    gradients: np.ndarray  # (F, 2)
    offsets: np.ndarray  # (F,)
    areas: np.ndarray  # (F,)

    @property
    def total_area(self) -> float:
        return float(self.areas.sum())

    def __len__(self) -> int:
        return len(self.areas)

    def dump(self) -> str:
        lines = []
        for tri, g, c, a in zip(self.triangles.tolist(), self.gradients.tolist(),
                                self.offsets.tolist(), self.areas.tolist()):
            xy = " ".join("%.12g,%.12g" % tuple(p) for p in tri)
            lines.append("facet [%s] grad %.12g %.12g offset %.12g area %.12g" % (xy, *g, c, a))
        return "\n".join(lines)


def _surface_from_vertices(V: np.ndarray) -> UpperSurface:
    """``V`` is (F, 3, 3): facet vertices, counterclockwise seen from above."""
    e1 = V[:, 1] - V[:, 0]
    e2 = V[:, 2] - V[:, 0]
    n = np.cross(e1, e2)
    g = -n[:, :2] / n[:, 2:3] + 0.0  # no negative zeros in dumps
    off = V[:, 0, 2] - np.einsum("fk,fk->f", g, V[:, 0, :2])
    return UpperSurface(V[:, :, :2].copy(), V[:, :, 2].copy(), g, off, 0.5 * n[:, 2])


def upper_surface(polytope: Polytope3, domain=None) -> UpperSurface:
    """Facets whose outward normal points up, with gradient and projected area."""
    V = polytope.vertices
    if len(V) == 0 or V[:, 2].max() <= 0.0:
        raise EmptyUpperSurface("no point above the base plane")
    keep = polytope.normals[:, 2] > UPPER_NZ_TOL
    if not keep.any():
        raise EmptyUpperSurface("no upward facet")
    surf = _surface_from_vertices(V[polytope.facets[keep]])
    if domain is not None:
        err = abs(surf.total_area - domain.polygon_area)
        if err > 1e-9 * domain.polygon_area:
            raise ValueError(f"upper surface covers {surf.total_area}, domain {domain.polygon_area}")
    return surf


def lifted_surface(base, apexes) -> UpperSurface:
    """Upper surface straight from the lifted construction (no base facets)."""
    pts, faces = _lifted_faces(base, apexes)
    keep = [f[:3] for f in faces if f[5] * f[6] > UPPER_NZ_TOL]
    if not keep:
        raise EmptyUpperSurface("no upward facet")
    P = np.array(pts)
    return _surface_from_vertices(P[np.array(keep)])


def lifted_dirichlet(base, apexes) -> tuple[float, float]:
    """(sum g_x^2 * area, sum g_y^2 * area) without building arrays.

    With the raw facet normal n the facet contributes n_x^2 / (2 n_z) and
    n_y^2 / (2 n_z).  Used in the search inner loop.
    """
    _, faces = _lifted_faces(base, apexes)
    ix = iy = 0.0
    for f in faces:
        nz = f[5]
        if nz * f[6] > UPPER_NZ_TOL:
            ix += f[3] * f[3] / nz
            iy += f[4] * f[4] / nz
    return 0.5 * ix, 0.5 * iy
