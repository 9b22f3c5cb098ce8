"""Facet-exact integrals of hull functions and quadrature for other fields."""

from __future__ import annotations

import ast
import math
import operator
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import NonFiniteSamples, ZeroDenominator
from .geom2d import Domain


@dataclass(frozen=True)
class DirichletSplit:
    I_x: float
    I_y: float

    @property
    def ratio(self) -> float:
        if self.I_y == 0.0:
            raise ZeroDenominator("integral of u_y^2 vanishes")
        return self.I_x / self.I_y

    def to_json(self) -> dict:
        out = {"I_x": self.I_x, "I_y": self.I_y}
        out["ratio"] = self.I_x / self.I_y if self.I_y > 0 else "unbounded"
        return out


def clip_convex(subject, clip) -> np.ndarray:
    """Sutherland-Hodgman: part of polygon ``subject`` inside convex ccw ``clip``."""
    out = [tuple(p) for p in np.asarray(subject, dtype=float)]
    C = np.asarray(clip, dtype=float)
    for i in range(len(C)):
        if not out:
            break
        (ax, ay), (bx, by) = C[i], C[(i + 1) % len(C)]
        ex, ey = bx - ax, by - ay
        side = [ex * (y - ay) - ey * (x - ax) for x, y in out]
        res = []
        for k in range(len(out)):
            j = k - 1
            p, q, sp, sq = out[j], out[k], side[j], side[k]
            if sq >= 0:
                if sp < 0:
                    t = sp / (sp - sq)
                    res.append((p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])))
                res.append(q)
            elif sp >= 0:
                t = sp / (sp - sq)
                res.append((p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])))
        out = res
    return np.array(out, dtype=float).reshape(-1, 2)


def _area(P: np.ndarray) -> float:
    if len(P) < 3:
        return 0.0
    x, y = P[:, 0], P[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def facet_areas(u, region=None) -> np.ndarray:
    """Projected facet areas, optionally restricted to a convex region."""
    s = u.surface
    if region is None:
        return s.areas
    return np.array([_area(clip_convex(tri, region)) for tri in s.triangles])


def dirichlet_split(u, region=None) -> DirichletSplit:
    """(integral of u_x^2, integral of u_y^2), summed facet by facet."""
    if u.is_zero:
        return DirichletSplit(0.0, 0.0)
    a = facet_areas(u, region)
    g = u.surface.gradients
    return DirichletSplit(float(np.dot(g[:, 0] ** 2, a)), float(np.dot(g[:, 1] ** 2, a)))


def rayleigh_ratio(u) -> float:
    return dirichlet_split(u).ratio


# -- integrands -------------------------------------------------------------


_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}
_FUNCS = {name: getattr(np, name) for name in
          ("sin", "cos", "tan", "exp", "log", "sqrt", "tanh", "sinh", "cosh", "arctan", "abs")}
_CONSTS = {"pi": math.pi, "e": math.e}


def parse_expression(text: str) -> Callable:
    """Compile an arithmetic expression in ``z1``, ``z2`` without ``eval``."""
    tree = ast.parse(text, mode="eval").body

    def build(node):
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            v = float(node.value)
            return lambda z1, z2: v
        if isinstance(node, ast.Name):
            if node.id == "z1":
                return lambda z1, z2: z1
            if node.id == "z2":
                return lambda z1, z2: z2
            if node.id in _CONSTS:
                v = _CONSTS[node.id]
                return lambda z1, z2: v
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            op, a, b = _BINOPS[type(node.op)], build(node.left), build(node.right)
            return lambda z1, z2: op(a(z1, z2), b(z1, z2))
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            a = build(node.operand)
            sign = -1.0 if isinstance(node.op, ast.USub) else 1.0
            return lambda z1, z2: sign * a(z1, z2)
        if (isinstance(node, ast.Call) and isinstance(node.func, ast.Name)
                and node.func.id in _FUNCS and len(node.args) == 1 and not node.keywords):
            fn, a = _FUNCS[node.func.id], build(node.args[0])
            return lambda z1, z2: fn(a(z1, z2))
        raise ValueError(f"unsupported expression element: {ast.dump(node)[:60]}")

    return build(tree)


@dataclass(frozen=True, eq=False)
class Integrand:
    """Density f(z1, z2) of a functional of the gradient."""

    kind: str  # "quadratic" | "newtonian" | "custom"
    lam: tuple = ()
    fn: Callable | None = None
    hessian: tuple | None = None
    text: str = ""

    @classmethod
    def quadratic(cls, l1: float, l2: float) -> "Integrand":
        return cls("quadratic", (float(l1), float(l2)), text=f"quadratic:{l1:g},{l2:g}")

    @classmethod
    def newtonian(cls) -> "Integrand":
        return cls("newtonian", text="newtonian")

    @classmethod
    def custom(cls, fn: Callable, hessian=None, text: str = "custom") -> "Integrand":
        H = None if hessian is None else tuple(map(tuple, np.asarray(hessian, dtype=float)))
        return cls("custom", fn=fn, hessian=H, text=text)

    @classmethod
    def parse(cls, spec: str) -> "Integrand":
        """``newtonian``, ``quadratic:l1,l2`` or ``custom:<expression in z1, z2>``."""
        spec = spec.strip()
        if spec == "newtonian":
            return cls.newtonian()
        if spec.startswith("quadratic:"):
            parts = spec.split(":", 1)[1].split(",")
            if len(parts) != 2:
                raise ValueError("quadratic needs two coefficients: quadratic:l1,l2")
            return cls.quadratic(float(parts[0]), float(parts[1]))
        if spec.startswith("custom:"):
            expr = spec.split(":", 1)[1]
            return cls.custom(parse_expression(expr), text=spec)
        raise ValueError(f"unknown integrand {spec!r}")

    def __call__(self, z1, z2):
        if self.kind == "quadratic":
            return self.lam[0] * np.square(z1) + self.lam[1] * np.square(z2)
        if self.kind == "newtonian":
            return 1.0 / (1.0 + np.square(z1) + np.square(z2))
        return self.fn(z1, z2)

    def to_json(self) -> dict:
        return {"kind": self.kind, "spec": self.text}


def resistance(u, f: Integrand) -> float:
    """Integral of f(grad u); exact because the gradient is constant per facet."""
    if u.is_zero:
        val = float(np.asarray(f(0.0, 0.0)))
        if not math.isfinite(val):
            raise NonFiniteSamples("f(0, 0) is not finite")
        return val * u.domain.polygon_area
    g = u.surface.gradients
    vals = np.asarray(f(g[:, 0], g[:, 1]), dtype=float) * np.ones(len(g))
    if not np.isfinite(vals).all():
        raise NonFiniteSamples("integrand is not finite at a facet gradient")
    return float(np.dot(vals, u.surface.areas))


def perturbed_functional(u, a: float, b: float, eps: float) -> float:
    s = dirichlet_split(u)
    return (-a + eps) * s.I_x + (b + eps) * s.I_y


# -- quadrature ---------------------------------------------------------------


def grid_quadrature(field: Callable, domain: Domain, n: int) -> float:
    """Midpoint rule on an n x n grid over the bounding box.

    Cells crossing the boundary are clipped to the polygon; they are weighted
    by the clipped area and sampled at the centroid of the clipped piece.
    """
    P = domain.polygon
    lo, hi = P.min(axis=0), P.max(axis=0)
    hx, hy = (hi - lo) / n
    xs = lo[0] + hx * (np.arange(n) + 0.5)
    ys = lo[1] + hy * (np.arange(n) + 0.5)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    C = np.column_stack([X.ravel(), Y.ravel()])
    N, H = domain.edge_normals, domain.edge_offsets
    D = H[None, :] - C @ N.T  # signed distance of each cell centre to each edge line
    half = 0.5 * math.hypot(hx, hy)
    inner = D.min(axis=1) >= half
    boundary = np.flatnonzero(~inner & (D.min(axis=1) > -half))

    total = float(np.sum(np.asarray(field(C[inner, 0], C[inner, 1]), dtype=float))) * hx * hy
    pts, weights = [], []
    for k in boundary:
        cx, cy = C[k]
        cell = np.array([[cx - hx / 2, cy - hy / 2], [cx + hx / 2, cy - hy / 2],
                         [cx + hx / 2, cy + hy / 2], [cx - hx / 2, cy + hy / 2]])
        near = np.flatnonzero(np.abs(D[k]) < half)
        piece = cell
        for e in near:
            piece = _clip_halfplane(piece, N[e], H[e])
            if len(piece) < 3:
                break
        a = _area(piece)
        if a > 0:
            pts.append(_centroid(piece, a))
            weights.append(a)
    if pts:
        Q = np.array(pts)
        total += float(np.dot(np.asarray(field(Q[:, 0], Q[:, 1]), dtype=float), weights))
    return total


def _clip_halfplane(poly: np.ndarray, n, h) -> np.ndarray:
    s = h - poly @ n
    out = []
    m = len(poly)
    for k in range(m):
        p, q, sp, sq = poly[k - 1], poly[k], s[k - 1], s[k]
        if sq >= 0:
            if sp < 0:
                out.append(p + sp / (sp - sq) * (q - p))
            out.append(q)
        elif sp >= 0:
            out.append(p + sp / (sp - sq) * (q - p))
    return np.array(out).reshape(-1, 2)


def _centroid(P: np.ndarray, area: float):
    Q = np.roll(P, -1, axis=0)
    w = P[:, 0] * Q[:, 1] - Q[:, 0] * P[:, 1]
    return ((P[:, 0] + Q[:, 0]) @ w / (6 * area), (P[:, 1] + Q[:, 1]) @ w / (6 * area))


def gradient_split_quadrature(grad: Callable, domain: Domain, n: int) -> DirichletSplit:
    """Quadrature of the two squared partials of a field with a known gradient."""
    ix = grid_quadrature(lambda x, y: grad(x, y)[0] ** 2, domain, n)
    iy = grid_quadrature(lambda x, y: grad(x, y)[1] ** 2, domain, n)
    return DirichletSplit(ix, iy)


def wirtinger_check(v: Callable, n: int = 10_000) -> tuple[float, float]:
    """(integral of v^2, pi^-2 * integral of v'^2) on [0, 1].

    Both integrals use the n midpoints; the derivative there is the central
    difference of the neighbouring nodes.
    """
    nodes = np.asarray(v(np.linspace(0.0, 1.0, n + 1)), dtype=float)
    mids = np.asarray(v((np.arange(n) + 0.5) / n), dtype=float)
    if not (np.isfinite(nodes).all() and np.isfinite(mids).all()):
        raise NonFiniteSamples("v is not finite on [0, 1]")
    lhs = float(np.sum(mids ** 2)) / n
    rhs = float(np.sum(np.diff(nodes) ** 2)) * n / math.pi ** 2
    return lhs, rhs


# -- the two-region split of a chord witness -----------------------------------


def witness_region_split(w) -> dict:
    """Split the Dirichlet energy of a chord witness into the part fed by
    boundary points with a support normal at least phi away from the vertical
    direction (region 1) and the rest (region 2)."""
    u = w.function
    s = u.surface
    theta0 = w.side.angle
    phi = w.params.phi
    dom = u.domain
    normal_angle = np.arctan2(dom.edge_normals[:, 1], dom.edge_normals[:, 0])
    far_edge = np.abs(np.angle(np.exp(1j * (normal_angle - theta0)))) >= phi - 1e-15
    # a polygon vertex lies on the cone-cut boundary when either adjacent edge does
    far_vertex = far_edge | np.roll(far_edge, 1)
    index = {tuple(p): i for i, p in enumerate(dom.polygon.tolist())}

    region1 = np.zeros(len(s), dtype=bool)
    for f, (tri, z) in enumerate(zip(s.triangles.tolist(), s.heights.tolist())):
        base = [index[tuple(p)] for p, h in zip(tri, z) if h == 0.0 and tuple(p) in index]
        if len(base) == 2:
            i, j = base
            e = i if (i + 1) % len(dom.polygon) == j else j
            region1[f] = far_edge[e]
        elif len(base) == 1:
            region1[f] = far_vertex[base[0]]
    g2 = (s.gradients ** 2).sum(axis=1) * s.areas
    gx = s.gradients[:, 0] ** 2 * s.areas
    gy = s.gradients[:, 1] ** 2 * s.areas
    return {"I1": float(g2[region1].sum()), "I2": float(g2[~region1].sum()),
            "I1x": float(gx[region1].sum()), "I1y": float(gy[region1].sum()),
            "I2x": float(gx[~region1].sum()), "I2y": float(gy[~region1].sum())}
