import math

import numpy as np
import pytest

from flatnewt import shapes
from flatnewt.concave import WitnessParams, hull_function, witness
from flatnewt.errors import BudgetExhausted, HypothesisFailed, NotAngular, PhiOutOfRange
from flatnewt.functional import rayleigh_ratio, witness_region_split
from flatnewt.geom2d import transform
from flatnewt.kbound import (Budget, certificate_schedule, divergence_certificate,
                             first_proof_bound, first_proof_bound_details, second_proof_bound,
                             estimate_K)

SMALL = Budget(restarts=3, iters=60, apex_counts=(1, 2))
STRETCHED = [(1, 0), (0, 2), (-1, 0), (0, -2)]


def test_second_bound_diamond(diamond):
    assert second_proof_bound(diamond) == pytest.approx(4 * (1 + 4 / math.pi ** 2), abs=1e-12)
    assert second_proof_bound(diamond) == pytest.approx(5.62114, abs=1e-5)


def test_second_bound_stretched_diamond():
    d = shapes.polygon(STRETCHED)
    assert second_proof_bound(d) == pytest.approx(16 * (1 + 4 / math.pi ** 2), rel=1e-12)
    assert second_proof_bound(d) == pytest.approx(22.48, abs=0.01)


def test_bounds_need_angular_sides(disk, square):
    for d in (disk, square):
        with pytest.raises(NotAngular):
            second_proof_bound(d)
        with pytest.raises(NotAngular):
            first_proof_bound(d)


def test_first_bound_at_fixed_phi(diamond):
    c1 = 4 * math.sin(3 * math.pi / 8) / math.sin(math.pi / 8)
    assert c1 == pytest.approx(9.657, abs=1e-3)
    expected = c1 / 0.25 + 1 / math.tan(math.pi / 8) ** 2
    assert first_proof_bound(diamond, math.pi / 8) == pytest.approx(expected, rel=1e-12)
    assert first_proof_bound(diamond, math.pi / 8) == pytest.approx(44.46, abs=0.01)


def test_first_bound_blows_up_near_alpha(diamond):
    a = math.pi / 4
    assert first_proof_bound(diamond, a - 1e-8) > 1e8
    with pytest.raises(PhiOutOfRange):
        first_proof_bound(diamond, a)
    with pytest.raises(PhiOutOfRange):
        first_proof_bound(diamond, 0.0)


def test_first_bound_minimized_over_phi(diamond):
    value, phi = first_proof_bound_details(diamond)
    assert 0 < phi < math.pi / 4
    for p in np.linspace(0.01, math.pi / 4 - 0.01, 50):
        assert value <= first_proof_bound(diamond, p) + 1e-9


def test_estimate_diamond_small_budget(diamond):
    K = estimate_K(diamond, SMALL, seed=7)
    assert K.lower >= 1 - 1e-9
    assert K.lower <= K.upper + 1e-9
    assert K.upper == pytest.approx(5.621138938277404, abs=1e-9)
    assert K.upper == min(K.first_proof_bound, K.second_proof_bound)
    values = [v for _, v in K.search_trace]
    assert values == sorted(values)
    assert rayleigh_ratio(K.witness) == K.lower


def test_estimate_is_deterministic(diamond):
    a = estimate_K(diamond, SMALL, seed=3).to_json()
    b = estimate_K(diamond, SMALL, seed=3).to_json()
    assert a == b


@pytest.mark.parametrize("vertices", [
    STRETCHED,
    [(0, 0), (3, -0.5), (4, 0.6), (1.5, 2)],
    [(-1, 0.1), (0.2, -1.3), (1.2, 0.0), (0.4, 0.9), (-0.5, 1.0)],
])
def test_lower_below_upper(vertices):
    d = shapes.polygon(vertices)
    K = estimate_K(d, SMALL, seed=1)
    assert K.bounded
    assert K.lower <= K.upper + 1e-9


def test_symmetric_domains_have_lower_at_least_one():
    for d in (shapes.diamond(), shapes.disk(), shapes.regular_ngon(4, rotation=math.pi / 4)):
        assert estimate_K(d, Budget(restarts=1, iters=20, apex_counts=(1,)), seed=0).lower >= 1 - 1e-9


def test_rotated_witness_gives_reciprocal_ratio():
    d = shapes.polygon(STRETCHED)
    K = estimate_K(d, SMALL, seed=2)
    r = transform(d, rotation=math.pi / 2)
    u = hull_function(r, [(-y, x, h) for x, y, h in K.witness.apexes])
    assert rayleigh_ratio(u) == pytest.approx(1 / K.lower, rel=1e-9)


def test_disk_estimate_is_unbounded(disk):
    K = estimate_K(disk, Budget(restarts=4, iters=100, apex_counts=(2,)), seed=0)
    assert not K.bounded
    assert K.to_json()["upper"] == "unbounded"
    assert K.lower > 10


# -- divergence certificates --------------------------------------------------------


def test_schedule_starts_at_cot_squared_threshold(disk):
    first = next(certificate_schedule(disk, 100))
    assert 1 / math.tan(first.phi) ** 2 == pytest.approx(200)
    assert first.eps == 0.5


def test_disk_certificate(disk):
    cert = divergence_certificate(disk, 100)
    assert cert.achieved_ratio >= 100
    assert cert.eps_used <= 1e-4
    assert rayleigh_ratio(cert.witness) == cert.achieved_ratio


def test_disk_ratios_non_decreasing_along_schedule(disk):
    cert = divergence_certificate(disk, 1000)
    phi = cert.trace[0][0]
    ratios = [r for p, e, r in cert.trace if p == phi and e <= 1e-2]
    assert len(ratios) >= 3
    assert all(b >= a for a, b in zip(ratios, ratios[1:]))


def test_half_disk_certificate(half_disk):
    cert = divergence_certificate(half_disk, 100)
    assert cert.achieved_ratio >= 100
    xs = [a[0] for a in cert.witness.apexes]
    ys = [a[1] for a in cert.witness.apexes]
    assert min(xs) > 0.9 and min(ys) > 0


def test_square_certificate(square):
    cert = divergence_certificate(square, 1000)
    assert cert.achieved_ratio >= 1000


def test_diamond_has_no_certificate(diamond):
    with pytest.raises(HypothesisFailed) as info:
        divergence_certificate(diamond, 100)
    assert info.value.best_ratio <= 5.622
    assert len(info.value.trace) > 10


def test_unreachable_threshold_exhausts_budget(disk):
    with pytest.raises(BudgetExhausted) as info:
        divergence_certificate(disk, 1e6)
    assert info.value.best_ratio > 100


def test_region_one_energy_bound(disk):
    for j in (10, 13, 16):
        w = witness(disk, WitnessParams(0.1, 2.0 ** -j))
        split = witness_region_split(w)
        assert split["I1"] <= disk.polygon_area * (2 / w.r) ** 2
        assert split["I1"] + split["I2"] == pytest.approx(
            sum(v for k, v in split.items() if k in ("I1x", "I1y", "I2x", "I2y")), rel=1e-12)
