import math

import numpy as np
import pytest

from flatnewt import shapes
from flatnewt.concave import hull_function, tent, zero_function
from flatnewt.errors import ZeroDenominator
from flatnewt.functional import (DirichletSplit, Integrand, clip_convex, dirichlet_split,
                                 grid_quadrature, parse_expression, perturbed_functional,
                                 rayleigh_ratio, resistance, wirtinger_check)
from flatnewt.geom2d import normalize, shear, swap_xy, transform

from conftest import random_interior_points


def random_apexes(domain, rng, k=None):
    k = k or int(rng.integers(1, 5))
    pts = random_interior_points(domain, k, rng, margin=0.02)
    return [(x, y, h) for (x, y), h in zip(pts, rng.uniform(0.2, 1.0, k))]


def test_square_tent_split(square):
    s = dirichlet_split(tent(square, (0, 0)))
    assert (s.I_x, s.I_y) == (2.0, 2.0)


def test_diamond_tent_split(diamond):
    s = dirichlet_split(tent(diamond, (0, 0)))
    assert s.I_x == pytest.approx(2.0, abs=1e-14)
    assert s.I_y == pytest.approx(2.0, abs=1e-14)
    assert rayleigh_ratio(tent(diamond, (0, 0))) == pytest.approx(1.0, abs=1e-14)


def test_zero_function_split(diamond):
    s = dirichlet_split(zero_function(diamond))
    assert (s.I_x, s.I_y) == (0.0, 0.0)
    with pytest.raises(ZeroDenominator):
        rayleigh_ratio(zero_function(diamond))
    with pytest.raises(ZeroDenominator):
        DirichletSplit(1.0, 0.0).ratio


def test_disk_cone_ratio(disk):
    assert rayleigh_ratio(tent(disk, (0, 0))) == pytest.approx(1.0, abs=1e-6)


def test_resistance_examples(square, diamond):
    assert resistance(tent(square, (0, 0)), Integrand.newtonian()) == 2.0
    assert resistance(zero_function(square), Integrand.newtonian()) == 4.0
    assert resistance(zero_function(diamond), Integrand.newtonian()) == diamond.polygon_area
    assert resistance(tent(diamond, (0, 0)), Integrand.quadratic(-1, 3)) == pytest.approx(4.0)


def test_resistance_matches_quadratic_split(half_disk):
    rng = np.random.default_rng(3)
    for _ in range(10):
        u = hull_function(half_disk, random_apexes(half_disk, rng))
        l1, l2 = rng.normal(size=2)
        s = dirichlet_split(u)
        assert resistance(u, Integrand.quadratic(l1, l2)) == pytest.approx(
            l1 * s.I_x + l2 * s.I_y, rel=1e-12, abs=1e-14)


def test_perturbed_functional(diamond):
    u = tent(diamond, (0, 0))
    assert perturbed_functional(u, 1, 1, 0) == pytest.approx(0.0, abs=1e-14)
    v = hull_function(diamond, [(0.2, 0.1, 1.0), (-0.3, 0.0, 0.6)])
    s = dirichlet_split(v)
    assert perturbed_functional(v, 1, 1, 0) == pytest.approx(-s.I_x + s.I_y)
    t = 1.7
    assert perturbed_functional(v.scaled(t), 2, 3, 0.1) == pytest.approx(
        t * t * perturbed_functional(v, 2, 3, 0.1), rel=1e-12)


def test_region_split_adds_up(diamond):
    u = hull_function(diamond, [(0.2, 0.1, 1.0), (-0.3, 0.0, 0.6)])
    full = dirichlet_split(u)
    halves = [np.array([(-1, -1), (0.1, -1), (0.1, 1), (-1, 1)], float),
              np.array([(0.1, -1), (1, -1), (1, 1), (0.1, 1)], float)]
    parts = [dirichlet_split(u, h) for h in halves]
    assert sum(p.I_x for p in parts) == pytest.approx(full.I_x, rel=1e-12)
    assert sum(p.I_y for p in parts) == pytest.approx(full.I_y, rel=1e-12)


def test_clip_convex_area():
    a = np.array([(0, 0), (2, 0), (2, 2), (0, 2)], float)
    b = np.array([(1, 1), (3, 1), (3, 3), (1, 3)], float)
    c = clip_convex(a, b)
    x, y = c[:, 0], c[:, 1]
    assert 0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))) == pytest.approx(1.0)


def test_swap_equivariance(half_disk):
    rng = np.random.default_rng(12)
    sw = swap_xy(half_disk)
    for _ in range(5):
        apexes = random_apexes(half_disk, rng)
        a = dirichlet_split(hull_function(half_disk, apexes))
        b = dirichlet_split(hull_function(sw, [(y, x, h) for x, y, h in apexes]))
        assert b.I_x == pytest.approx(a.I_y, rel=1e-12)
        assert b.I_y == pytest.approx(a.I_x, rel=1e-12)


def test_shear_invariance_of_I_y():
    d = shapes.triangle((0, 0), (4, 2), (2, 3))
    k = -normalize(d).shear_c
    sd = shear(d, k)
    rng = np.random.default_rng(6)
    for _ in range(5):
        apexes = random_apexes(d, rng)
        a = dirichlet_split(hull_function(d, apexes))
        b = dirichlet_split(hull_function(sd, [(x, y + k * x, h) for x, y, h in apexes]))
        assert b.I_y == pytest.approx(a.I_y, rel=1e-9)


def test_uniform_scale_invariance(diamond):
    rng = np.random.default_rng(7)
    apexes = random_apexes(diamond, rng, k=3)
    lam = 2.5
    big = transform(diamond, scale=lam)
    r1 = rayleigh_ratio(hull_function(diamond, apexes))
    r2 = rayleigh_ratio(hull_function(big, [(lam * x, lam * y, lam * h) for x, y, h in apexes]))
    assert r2 == pytest.approx(r1, rel=1e-12)


# -- quadrature -----------------------------------------------------------------


def test_quadrature_constant(diamond):
    assert grid_quadrature(lambda x, y: np.ones_like(x), diamond, 512) == pytest.approx(2.0, abs=1e-3)


def test_quadrature_unit_square():
    sq = shapes.polygon([(0, 0), (1, 0), (1, 1), (0, 1)])
    val = grid_quadrature(lambda x, y: np.sin(np.pi * x) ** 2, sq, 512)
    assert val == pytest.approx(0.5, abs=1e-4)


def test_quadrature_of_tent_difference_quotient(diamond):
    u = tent(diamond, (0, 0))
    h = 1e-7

    def ux2(x, y):
        P = np.column_stack([x, y])
        inside = diamond.inside_margin(P) > 2 * h
        out = np.zeros(len(P))
        Q = P[inside]
        out[inside] = ((u.values(Q + (h, 0)) - u.values(Q - (h, 0))) / (2 * h)) ** 2
        return out

    assert grid_quadrature(ux2, diamond, 512) == pytest.approx(2.0, abs=1e-2)


def test_quadrature_matches_exact_split(diamond):
    rng = np.random.default_rng(21)
    for _ in range(10):
        u = hull_function(diamond, random_apexes(diamond, rng))
        exact = dirichlet_split(u)
        gx2 = grid_quadrature(lambda x, y: u.gradients(np.column_stack([x, y]))[0][:, 0] ** 2,
                              diamond, 512)
        gy2 = grid_quadrature(lambda x, y: u.gradients(np.column_stack([x, y]))[0][:, 1] ** 2,
                              diamond, 512)
        assert gx2 == pytest.approx(exact.I_x, rel=1e-2)
        assert gy2 == pytest.approx(exact.I_y, rel=1e-2)


# -- Wirtinger ------------------------------------------------------------------


def test_wirtinger_equality_case():
    lhs, rhs = wirtinger_check(lambda t: np.sin(np.pi * t), 10_000)
    assert lhs == pytest.approx(0.5, abs=1e-6)
    assert rhs == pytest.approx(0.5, abs=1e-6)


def test_wirtinger_parabola():
    lhs, rhs = wirtinger_check(lambda t: t * (1 - t), 10_000)
    assert lhs == pytest.approx(1 / 30, abs=1e-8)
    assert rhs == pytest.approx(1 / (3 * math.pi ** 2), abs=1e-8)
    assert lhs <= rhs


def test_wirtinger_zero():
    assert wirtinger_check(lambda t: np.zeros_like(t), 100) == (0.0, 0.0)


def random_cubic_spline(rng, k):
    """Piecewise cubic with zero ends: Hermite pieces on k random knots."""
    knots = np.concatenate([[0.0], np.sort(rng.uniform(0, 1, k)), [1.0]])
    vals = np.concatenate([[0.0], rng.normal(size=k), [0.0]])
    slopes = rng.normal(size=k + 2) * 3

    def v(t):
        t = np.asarray(t, dtype=float)
        i = np.clip(np.searchsorted(knots, t, side="right") - 1, 0, k)
        h = knots[i + 1] - knots[i]
        s = (t - knots[i]) / h
        h00, h10 = 2 * s ** 3 - 3 * s ** 2 + 1, s ** 3 - 2 * s ** 2 + s
        h01, h11 = -2 * s ** 3 + 3 * s ** 2, s ** 3 - s ** 2
        return h00 * vals[i] + h10 * h * slopes[i] + h01 * vals[i + 1] + h11 * h * slopes[i + 1]

    return v


def test_wirtinger_random_piecewise_cubics():
    rng = np.random.default_rng(2024)
    for _ in range(100):
        lhs, rhs = wirtinger_check(random_cubic_spline(rng, int(rng.integers(1, 6))), 10_000)
        assert lhs <= rhs + 1e-9


# -- integrand parsing ------------------------------------------------------------


def test_parse_integrands():
    assert Integrand.parse("quadratic:-1,3").lam == (-1.0, 3.0)
    assert Integrand.parse("newtonian")(1.0, 0.0) == 0.5
    f = Integrand.parse("custom:z1*z2 + exp(-z1**2)")
    assert f(1.0, 2.0) == pytest.approx(2 + math.exp(-1))
    with pytest.raises(ValueError):
        Integrand.parse("quadratic:1")
    with pytest.raises(ValueError):
        Integrand.parse("cubic")


def test_expression_rejects_unsafe_names():
    with pytest.raises((ValueError, SyntaxError)):
        parse_expression("__import__('os').system('true')")
    with pytest.raises((ValueError, SyntaxError)):
        parse_expression("z1.real")
