"""Two-sided estimates of K = sup (int u_x^2) / (int u_y^2).

The lower end comes from a multi-start compass search over hull functions;
the upper end from two explicit geometric constants.  Domains where a vertical
support line is not angular get a divergence certificate instead.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .concave import HullFunction, WitnessParams, hull_function, tent, witness_sequence
from .errors import BudgetExhausted, HypothesisFailed, NotAngular, PhiOutOfRange
from .functional import rayleigh_ratio
from .geom2d import Domain, Side, classify_vertical_support, corner_slopes, geometric_constants
from .hull3d import LiftedBase, lifted_dirichlet

UNBOUNDED = math.inf
WIRTINGER_FACTOR = 1.0 + 4.0 / math.pi ** 2


def second_proof_bound(domain: Domain) -> float:
    """2 M + c^2 / 2, M = 2 m^2 (1 + 4/pi^2) with m the steeper corner slope."""
    m_left, m_right, c = corner_slopes(domain)
    m_tilde = 2.0 * max(m_left, m_right) ** 2 * WIRTINGER_FACTOR
    return 2.0 * m_tilde + 0.5 * c * c


def _first_bound_at(g, phi: float) -> float:
    a = g.alpha
    c1 = 4.0 * math.sin(a + phi) / math.sin(a - phi) / math.tan(a)
    c2 = math.sin(g.beta) ** 2 / g.h ** 2 * g.area
    return c1 / c2 + 1.0 / math.tan(phi) ** 2


def first_proof_bound(domain: Domain, phi: float | None = None) -> float:
    """c1/c2 + cot^2(phi); with ``phi`` omitted the bound is minimized over phi."""
    return first_proof_bound_details(domain, phi)[0]


def first_proof_bound_details(domain: Domain, phi: float | None = None) -> tuple[float, float]:
    g = geometric_constants(domain)
    if phi is not None:
        if not 0.0 < phi < g.alpha:
            raise PhiOutOfRange(f"phi={phi} must lie in (0, alpha={g.alpha})")
        return _first_bound_at(g, phi), phi
    grid = g.alpha * np.linspace(0.005, 0.995, 199)
    vals = [_first_bound_at(g, p) for p in grid]
    k = int(np.argmin(vals))
    lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, len(grid) - 1)]
    res = minimize_scalar(lambda p: _first_bound_at(g, p), bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-12})
    if res.fun < vals[k]:
        return float(res.fun), float(res.x)
    return float(vals[k]), float(grid[k])


def both_angular(domain: Domain) -> bool:
    return all(classify_vertical_support(domain, s).is_angular for s in (Side.LEFT, Side.RIGHT))


# -- lower bound by search ----------------------------------------------------


@dataclass(frozen=True)
class Budget:
    restarts: int = 50
    iters: int = 200
    apex_counts: tuple = (1, 2, 3, 4)

    def to_json(self) -> dict:
        return {"restarts": self.restarts, "iters": self.iters,
                "apex_counts": list(self.apex_counts)}


@dataclass(frozen=True, eq=False)
class KEstimate:
    lower: float
    upper: float
    witness: HullFunction
    first_proof_bound: float | None = None
    first_proof_phi: float | None = None
    second_proof_bound: float | None = None
    search_trace: list = field(default_factory=list)

    @property
    def bounded(self) -> bool:
        return math.isfinite(self.upper)

    def to_json(self) -> dict:
        return {"lower": self.lower,
                "upper": self.upper if self.bounded else "unbounded",
                "first_proof_bound": self.first_proof_bound,
                "first_proof_phi": self.first_proof_phi,
                "second_proof_bound": self.second_proof_bound,
                "search_trace": [list(t) for t in self.search_trace],
                "witness_apexes": [list(a) for a in self.witness.apexes]}


class _Search:
    """Apex k sits at c + s_k R(t_k) (cos 2 pi t_k, sin 2 pi t_k), where R is the
    distance from the centroid c to the boundary along that ray; its height is
    exp(l_k) with l_0 = 0 (the ratio is invariant under height scaling)."""

    S_MAX = 0.995

    def __init__(self, polygon: np.ndarray, centroid):
        self.base = LiftedBase(polygon)
        self._reach = {}
        self.c = np.asarray(centroid, dtype=float)
        Q = np.roll(polygon, -1, axis=0)
        e = Q - polygon
        n = np.column_stack([e[:, 1], -e[:, 0]])
        self.N = n / np.hypot(n[:, 0], n[:, 1])[:, None]
        self.gap = np.einsum("ij,ij->i", self.N, polygon) - self.N @ self.c

    def reach(self, t: float) -> tuple[float, float, float]:
        """Unit direction at angle 2 pi t and the distance to the boundary along it."""
        out = self._reach.get(t)
        if out is None:
            d = np.array([math.cos(2.0 * math.pi * t), math.sin(2.0 * math.pi * t)])
            nd = self.N @ d
            pos = nd > 1e-300
            out = (float(d[0]), float(d[1]), float((self.gap[pos] / nd[pos]).min()))
            if len(self._reach) > 4096:
                self._reach.clear()
            self._reach[t] = out
        return out

    def apexes(self, x: np.ndarray, k: int):
        cx, cy = float(self.c[0]), float(self.c[1])
        out = []
        for i in range(k):
            dx, dy, R = self.reach(float(x[k + i]))
            s = float(x[i]) * R
            h = 1.0 if i == 0 else math.exp(float(x[2 * k + i - 1]))
            out.append((cx + s * dx, cy + s * dy, h))
        return out

    def ratio(self, x: np.ndarray, k: int) -> float:
        ix, iy = lifted_dirichlet(self.base, self.apexes(x, k))
        return ix / iy if iy > 0 else -math.inf

    def run(self, k: int, rng: np.random.Generator, iters: int):
        x = np.concatenate([rng.uniform(0.0, 0.9, k), rng.uniform(0.0, 1.0, k),
                            rng.uniform(-1.0, 1.0, k - 1)])
        lo = np.concatenate([np.zeros(k), np.full(k, -np.inf), np.full(k - 1, -8.0)])
        hi = np.concatenate([np.full(k, self.S_MAX), np.full(k, np.inf), np.full(k - 1, 8.0)])
        step = np.concatenate([np.full(k, 0.2), np.full(k, 0.1), np.full(k - 1, 0.5)])
        best = self.ratio(x, k)
        trace = [(0, best)]
        it = 0
        for it in range(1, iters + 1):
            improved = False
            for j in range(len(x)):
                for sgn in (1.0, -1.0):
                    y = x.copy()
                    y[j] = min(max(y[j] + sgn * step[j], lo[j]), hi[j])
                    if y[j] == x[j]:
                        continue
                    val = self.ratio(y, k)
                    if val > best:
                        x, best, improved = y, val, True
                        break
            if improved:
                trace.append((it, best))
            else:
                step *= 0.5
                if step.max() < 1e-5:
                    break
        return best, x, trace, it


def _run_restart(args):
    polygon, centroid, k, seed, restart, iters = args
    rng = np.random.default_rng(np.random.SeedSequence([seed, k, restart]))
    search = _Search(polygon, centroid)
    best, x, trace, used = search.run(k, rng, iters)
    return best, search.apexes(x, k), trace, used


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("FLATNEWT_THREADS", "1")))
    except ValueError:
        return 1


def estimate_K(domain: Domain, budget: Budget | None = None, seed: int = 0) -> KEstimate:
    """Certified interval for K: search result below, analytic bound above."""
    budget = budget or Budget()
    base = tent(domain)
    best_u, best = base, rayleigh_ratio(base)
    trace = [(0, best)]
    tasks = [(domain.polygon, domain.centroid, k, seed, r, budget.iters)
             for k in budget.apex_counts for r in range(budget.restarts)]
    workers = min(_threads(), len(tasks)) if tasks else 1
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_restart, tasks, chunksize=4))
    else:
        results = [_run_restart(t) for t in tasks]
    total = 0
    best_apexes = None
    for val, apexes, run_trace, used in results:  # merged in (apex count, restart) order
        for it, v in run_trace:
            if v > best:
                best, best_apexes = v, apexes
                trace.append((total + it, v))
        total += used
    trace.append((total, best))
    if best_apexes is not None:
        best_u = hull_function(domain, best_apexes)
        best = rayleigh_ratio(best_u)  # facet-exact recomputation of the search value

    first = first_phi = second = None
    upper = UNBOUNDED
    if both_angular(domain):
        second = second_proof_bound(domain)
        first, first_phi = first_proof_bound_details(domain)
        upper = min(first, second)
    return KEstimate(lower=best, upper=upper, witness=best_u, first_proof_bound=first,
                     first_proof_phi=first_phi, second_proof_bound=second, search_trace=trace)


# -- divergence certificates --------------------------------------------------


@dataclass(frozen=True, eq=False)
class DivergenceCertificate:
    threshold: float
    witness: HullFunction
    achieved_ratio: float
    eps_used: float
    phi_used: float
    trace: list = field(default_factory=list)  # (phi, eps, ratio) probes

    def to_json(self) -> dict:
        return {"threshold": self.threshold, "achieved_ratio": self.achieved_ratio,
                "eps_used": self.eps_used, "phi_used": self.phi_used,
                "witness_apexes": [list(a) for a in self.witness.apexes],
                "trace": [list(t) for t in self.trace]}


def certificate_schedule(domain: Domain, threshold: float):
    """phi halves from arccot(sqrt(2 T)); within each phi, eps = 2^-j."""
    phi0 = math.atan(1.0 / math.sqrt(2.0 * max(threshold, 1.0)))
    eps_min = 1e-9 * domain.scale
    for phi in (phi0, phi0 / 2.0, phi0 / 4.0):
        j = 1
        while 2.0 ** -j >= eps_min:
            yield WitnessParams(phi, 2.0 ** -j)
            j += 1


def divergence_certificate(domain: Domain, threshold: float) -> DivergenceCertificate:
    """Drive the chord witnesses until the exact ratio reaches ``threshold``."""
    trace = []
    best = -math.inf
    angular = both_angular(domain)
    for w in witness_sequence(domain, certificate_schedule(domain, threshold)):
        ratio = rayleigh_ratio(w.function)
        trace.append((w.params.phi, w.params.eps, ratio))
        best = max(best, ratio)
        if ratio >= threshold and not angular:
            return DivergenceCertificate(threshold, w.function, ratio, w.params.eps,
                                         w.params.phi, trace)
    if angular:
        raise HypothesisFailed("both vertical support lines are angular: the ratio is bounded",
                               best_ratio=best, trace=trace)
    raise BudgetExhausted(f"best ratio {best:.6g} below threshold {threshold:g}",
                          best_ratio=best, trace=trace)


def raise_if_not_angular(domain: Domain) -> None:
    if not both_angular(domain):
        raise NotAngular("a vertical support line is not angular")
