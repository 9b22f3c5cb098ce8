"""Is the flat profile u = 0 a local minimizer of the integral of f(grad u)?

The answer depends on the second derivative of f at the origin and, when it
is indefinite, on the domain seen in the eigenframe.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import AsymmetricInput, NonFiniteSamples
from .functional import Integrand
from .geom2d import AngularVerdict, Domain, Side, classify_vertical_support, singular_points, transform
from .kbound import Budget, KEstimate, estimate_K

STRICT_MARGIN = 1e-9


class HessianKind:
    POSITIVE_DEFINITE = "PositiveDefinite"
    NEGATIVE_DEFINITE = "NegativeDefinite"
    INDEFINITE = "Indefinite"
    SEMIDEFINITE = "Semidefinite"


class VerdictKind:
    LOCAL_MIN = "LocalMin"
    NOT_LOCAL_MIN = "NotLocalMin"
    INCONCLUSIVE = "Inconclusive"


EXIT_CODES = {VerdictKind.LOCAL_MIN: 0, VerdictKind.NOT_LOCAL_MIN: 1, VerdictKind.INCONCLUSIVE: 2}


def _second_differences(f, h: float) -> np.ndarray:
    def F(a, b):
        v = float(np.asarray(f(a, b)))
        if not math.isfinite(v):
            raise NonFiniteSamples(f"f({a}, {b}) is not finite")
        return v

    f0 = F(0.0, 0.0)
    fxx = (F(h, 0.0) - 2.0 * f0 + F(-h, 0.0)) / h ** 2
    fyy = (F(0.0, h) - 2.0 * f0 + F(0.0, -h)) / h ** 2
    fxy = (F(h, h) - F(h, -h) - F(-h, h) + F(-h, -h)) / (4.0 * h ** 2)
    return np.array([[fxx, fxy], [fxy, fyy]])


def hessian_at_zero(f: Integrand, step: float = 1e-4, check: bool = True) -> np.ndarray:
    """Second derivative of f at the origin.

    Closed forms for the quadratic and Newtonian densities; central second
    differences otherwise, with a half-step Richardson comparison.
    """
    if f.kind == "quadratic":
        return np.diag([2.0 * f.lam[0], 2.0 * f.lam[1]])
    if f.kind == "newtonian":
        return np.array([[-2.0, 0.0], [0.0, -2.0]])
    if f.hessian is not None:
        return np.array(f.hessian, dtype=float)
    H1 = _second_differences(f, step)
    if not check:
        return H1
    H2 = _second_differences(f, step / 2.0)
    H = (4.0 * H2 - H1) / 3.0
    scale = max(float(np.abs(H).max()), 1e-12)
    if float(np.abs(H2 - H1).max()) > 1e-5 * scale + 1e-8:
        warnings.warn("finite-difference Hessian did not settle under step halving", stacklevel=2)
    return H


@dataclass(frozen=True)
class HessianClass:
    kind: str
    eigenvalues: tuple  # ascending
    eigenvectors: tuple  # matching unit vectors
    a: float | None = None  # -smallest eigenvalue when indefinite
    b: float | None = None  # largest eigenvalue when indefinite

    @property
    def positive_dir(self):
        return self.eigenvectors[1]

    @property
    def negative_dir(self):
        return self.eigenvectors[0]

    def to_json(self) -> dict:
        out = {"kind": self.kind, "eigenvalues": list(self.eigenvalues),
               "eigenvectors": [list(v) for v in self.eigenvectors]}
        if self.kind == HessianKind.INDEFINITE:
            out.update(a=self.a, b=self.b)
        return out


def symmetric_eigen(H) -> tuple[tuple[float, float], tuple]:
    """Closed-form eigen-decomposition of a symmetric 2x2 matrix, ascending."""
    p, q, r = float(H[0][0]), float(H[0][1]), float(H[1][1])
    mean = 0.5 * (p + r)
    rad = math.hypot(0.5 * (p - r), q)
    lo, hi = mean - rad, mean + rad
    if q == 0.0:
        return (lo, hi), (((1.0, 0.0), (0.0, 1.0)) if p <= r else ((0.0, 1.0), (1.0, 0.0)))
    # the top eigenvector makes angle t with the x-axis, tan 2t = 2q / (p - r)
    t = 0.5 * math.atan2(2.0 * q, p - r)
    v_hi = (math.cos(t), math.sin(t))
    if v_hi[1] < 0 or (v_hi[1] == 0 and v_hi[0] < 0):
        v_hi = (-v_hi[0], -v_hi[1])
    v_lo = (v_hi[1], -v_hi[0])
    if v_lo[1] < 0 or (v_lo[1] == 0 and v_lo[0] < 0):
        v_lo = (-v_lo[0], -v_lo[1])
    return (lo, hi), (v_lo, v_hi)


def classify_hessian(H, tol: float = 1e-9) -> HessianClass:
    H = np.asarray(H, dtype=float)
    if H.shape != (2, 2):
        raise ValueError("need a 2x2 matrix")
    norm = float(np.abs(H).max())
    if abs(H[0, 1] - H[1, 0]) > tol * max(norm, 1.0):
        raise AsymmetricInput(f"off-diagonal entries differ: {H[0, 1]} vs {H[1, 0]}")
    Hs = 0.5 * (H + H.T)
    (lo, hi), vecs = symmetric_eigen(Hs)
    zero = tol * max(float(np.linalg.norm(Hs, 2)), 1e-300)
    if abs(lo) < zero or abs(hi) < zero:
        return HessianClass(HessianKind.SEMIDEFINITE, (lo, hi), vecs)
    if lo > 0:
        return HessianClass(HessianKind.POSITIVE_DEFINITE, (lo, hi), vecs)
    if hi < 0:
        return HessianClass(HessianKind.NEGATIVE_DEFINITE, (lo, hi), vecs)
    return HessianClass(HessianKind.INDEFINITE, (lo, hi), vecs, a=-lo, b=hi)


def indefinite(a: float, b: float, positive_dir=(0.0, 1.0)) -> HessianClass:
    """Hessian class with eigenvalues -a < 0 < b and the given positive direction."""
    px, py = positive_dir
    n = math.hypot(px, py)
    px, py = px / n, py / n
    H = -a * np.outer((py, -px), (py, -px)) + b * np.outer((px, py), (px, py))
    return classify_hessian(H)


@dataclass(frozen=True, eq=False)
class Verdict:
    kind: str
    hessian: HessianClass
    reason: str = ""
    angular_left: AngularVerdict | None = None
    angular_right: AngularVerdict | None = None
    k_estimate: KEstimate | None = None
    comparison: dict | None = None
    rotation: float | None = None
    extras: dict = field(default_factory=dict)

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.kind]

    def to_json(self) -> dict:
        out = {"kind": self.kind, "reason": self.reason, "hessian": self.hessian.to_json()}
        if self.rotation is not None:
            out["rotation"] = self.rotation
        if self.angular_left is not None:
            out["angular_left"] = self.angular_left.to_json()
            out["angular_right"] = self.angular_right.to_json()
        if self.k_estimate is not None:
            out["k_estimate"] = self.k_estimate.to_json()
        if self.comparison is not None:
            out["comparison"] = dict(self.comparison)
        return out


def eigenframe(domain: Domain, H: HessianClass) -> tuple[Domain, float]:
    """Rotate the domain so the positive eigendirection points along +y."""
    px, py = H.positive_dir
    angle = math.pi / 2.0 - math.atan2(py, px)
    angle = math.atan2(math.sin(angle), math.cos(angle))
    if abs(angle) < 1e-15:
        return domain, 0.0
    return transform(domain, rotation=angle), angle


def compare_ratio(b_over_a: float, lower: float, upper: float) -> str:
    """Verdict kind from b/a against a certified interval for K."""
    if b_over_a < lower * (1.0 - STRICT_MARGIN):
        return VerdictKind.NOT_LOCAL_MIN
    if math.isfinite(upper) and b_over_a > upper * (1.0 + STRICT_MARGIN):
        return VerdictKind.LOCAL_MIN
    return VerdictKind.INCONCLUSIVE


def decide_flat(domain: Domain, H: HessianClass, k_budget: Budget | None = None,
                seed: int = 0, k_estimate: KEstimate | None = None) -> Verdict:
    if H.kind == HessianKind.POSITIVE_DEFINITE:
        return Verdict(VerdictKind.LOCAL_MIN, H, "positive definite second derivative")
    if H.kind == HessianKind.NEGATIVE_DEFINITE:
        return Verdict(VerdictKind.NOT_LOCAL_MIN, H, "negative definite second derivative")
    if H.kind == HessianKind.SEMIDEFINITE:
        return Verdict(VerdictKind.INCONCLUSIVE, H, "semidefinite second derivative: open case")

    rotated, angle = eigenframe(domain, H)
    left = classify_vertical_support(rotated, Side.LEFT)
    right = classify_vertical_support(rotated, Side.RIGHT)
    if not (left.is_angular and right.is_angular):
        return Verdict(VerdictKind.NOT_LOCAL_MIN, H,
                       "a support line parallel to the positive eigendirection is not angular",
                       left, right, rotation=angle)
    K = k_estimate if k_estimate is not None else estimate_K(rotated, k_budget, seed)
    ratio = H.b / H.a
    kind = compare_ratio(ratio, K.lower, K.upper)
    reason = {VerdictKind.NOT_LOCAL_MIN: "b/a below the search lower bound for K",
              VerdictKind.LOCAL_MIN: "b/a above the analytic upper bound for K",
              VerdictKind.INCONCLUSIVE: "b/a inside [K_lower, K_upper]"}[kind]
    comparison = {"b_over_a": ratio, "k_lower": K.lower, "k_upper": K.upper}
    return Verdict(kind, H, reason, left, right, K, comparison, rotation=angle)


def corollary_singular_count(domain: Domain) -> int:
    """Number of boundary junctions with distinct one-sided tangents.

    At most one such point forces a non-angular vertical support line in
    every direction, so an indefinite second derivative can never give a
    local minimum there.
    """
    return len(singular_points(domain))
