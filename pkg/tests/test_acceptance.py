"""Acceptance suite: twelve end-to-end criteria, one pass/fail line each.

Run with pytest (the lines are printed in the terminal summary) or directly:
``python tests/test_acceptance.py``.
"""

import json
import math
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from conftest import random_interior_points  # noqa: E402
from test_hull3d import brute_force_faces  # noqa: E402

from flatnewt import shapes  # noqa: E402
from flatnewt.cli import main  # noqa: E402
from flatnewt.concave import hull_function, tent, zero_function  # noqa: E402
from flatnewt.functional import Integrand, dirichlet_split, resistance, wirtinger_check  # noqa: E402
from flatnewt.geom2d import geometric_constants, normalize  # noqa: E402
from flatnewt.hull3d import convex_hull_3d  # noqa: E402

RESULTS: dict[int, tuple[str, str]] = {}
K_UPPER = 4 * (1 + 4 / math.pi ** 2)


def cli(*argv):
    """Run one CLI command in-process; returns (exit code, report, seconds)."""
    import contextlib
    import io

    buf = io.StringIO()
    t0 = time.perf_counter()
    with contextlib.redirect_stdout(buf), contextlib.redirect_stderr(io.StringIO()):
        code = main(list(argv))
    return code, json.loads(buf.getvalue()), time.perf_counter() - t0


def criterion_1():
    """Diamond interval at the default budget."""
    code, rep, secs = cli("k-estimate", "--gen", "diamond")
    k = rep["k_estimate"]
    assert code == 0
    assert abs(K_UPPER - 5.62114) < 1e-5
    assert k["lower"] >= 1 - 1e-9, k["lower"]
    assert abs(k["upper"] - K_UPPER) < 1e-9, k["upper"]
    assert k["lower"] <= k["upper"]
    assert secs < 30, f"{secs:.1f} s"
    return f"lower={k['lower']:.6g} upper={k['upper']:.9g} time={secs:.1f}s"


def criterion_2():
    """Disk divergence certificate."""
    code, rep, secs = cli("witness", "--gen", "disk", "--threshold", "100")
    assert code == 0
    cert = rep["certificates"][0]
    assert cert["achieved_ratio"] >= 100 and cert["eps_used"] <= 1e-3
    from flatnewt.concave import from_json
    from flatnewt.functional import rayleigh_ratio

    u = from_json({"domain": shapes.disk().to_json(), "apexes": cert["witness_apexes"]})
    exact = rayleigh_ratio(u)
    assert exact >= 100, exact
    phi = cert["trace"][0][0]
    ratios = [r for p, e, r in cert["trace"] if p == phi and e <= 1e-2]
    assert len(ratios) >= 3
    assert all(b >= a for a, b in zip(ratios, ratios[1:])), ratios
    assert secs < 10, f"{secs:.1f} s"
    return f"ratio={exact:.6g} eps={cert['eps_used']:.3g} time={secs:.2f}s"


def criterion_3():
    """Half-disk divergence near a corner on the arc side."""
    code, rep, secs = cli("witness", "--gen", "half_disk", "--threshold", "100")
    assert code == 0
    cert = rep["certificates"][0]
    assert cert["achieved_ratio"] >= 100
    pts = np.array(cert["witness_apexes"])[:, :2]
    corner = np.array([1.0, 0.0])
    assert (pts[:, 1] > 0).all() and np.hypot(*(pts - corner).T).max() < 0.1
    assert rep["domain"]["angular_right"]["kind"] == "HalfTangent"
    assert secs < 10, f"{secs:.1f} s"
    return f"ratio={cert['achieved_ratio']:.6g} eps={cert['eps_used']:.3g} time={secs:.2f}s"


def criterion_4():
    """No certificate on the diamond."""
    code, rep, _ = cli("witness", "--gen", "diamond", "--threshold", "100")
    assert code == 1 and rep["failure"]["type"] == "HypothesisFailed"
    best = rep["failure"]["best_ratio"]
    assert best <= 5.622, best
    return f"best ratio over schedule={best:.6g}"


def criterion_5():
    """Exact integration fixtures on the square."""
    sq = shapes.square()
    u = tent(sq, (0, 0))
    s = dirichlet_split(u)
    assert (s.I_x, s.I_y) == (2.0, 2.0), (s.I_x, s.I_y)
    F = resistance(u, Integrand.newtonian())
    assert F == 2.0, F
    F0 = resistance(zero_function(sq), Integrand.newtonian())
    assert F0 == sq.area == 4.0, F0
    return "I_x=I_y=2, F(tent)=2, F(0)=4"


def criterion_6():
    """3D hull against the brute-force oracle."""
    rng = np.random.default_rng(20240601)
    for _ in range(50):
        pts = rng.normal(size=(int(rng.integers(4, 13)), 3))
        assert convex_hull_3d(pts).support_sets(1e-9) == brute_force_faces(pts)
    return "50/50 point sets match"


def criterion_7():
    """Wirtinger inequality: equality case and random piecewise cubics."""
    from test_functional import random_cubic_spline

    lhs, rhs = wirtinger_check(lambda t: np.sin(np.pi * t), 10_000)
    assert abs(lhs - 0.5) <= 1e-6 and abs(rhs - 0.5) <= 1e-6, (lhs, rhs)
    rng = np.random.default_rng(2024)
    worst = -math.inf
    for _ in range(100):
        a, b = wirtinger_check(random_cubic_spline(rng, int(rng.integers(1, 6))), 10_000)
        worst = max(worst, a - b)
    assert worst <= 1e-9, worst
    return f"sin: lhs={lhs:.9f} rhs={rhs:.9f}; max(lhs-rhs) over 100 cubics={worst:.3g}"


def criterion_8():
    """Pointwise gradient inequality on the normalized diamond."""
    dom = normalize(shapes.diamond()).domain
    rng = np.random.default_rng(1234)
    violations = checked = 0
    for _ in range(20):
        k = int(rng.integers(1, 6))
        apex_pts = random_interior_points(dom, k, rng, margin=0.02)
        u = hull_function(dom, [(x, y, h) for (x, y), h in zip(apex_pts, rng.uniform(0.2, 1, k))])
        P = random_interior_points(dom, 30_000, rng, margin=1e-9)
        P = P[(P[:, 0] > 0) & (P[:, 0] <= 1)]
        g, crease = u.gradients(P)
        P, g = P[~crease][:10_000], g[~crease][:10_000]
        rhs = (u.values(P) - P[:, 1] * g[:, 1]) / P[:, 0]
        violations += int((np.abs(g[:, 0]) > rhs + 1e-9).sum())
        checked += len(P)
    assert checked == 200_000 and violations == 0, (checked, violations)
    return f"{checked} points, 0 violations"


def criterion_9():
    """Tent minimality and the tent lower bound on the diamond."""
    d = shapes.diamond()
    rng = np.random.default_rng(99)
    for _ in range(20):
        xi = random_interior_points(d, 1, rng, margin=0.05)[0]
        others = random_interior_points(d, int(rng.integers(1, 5)), rng, margin=0.02)
        u = hull_function(d, [(xi[0], xi[1], 1.0)] + [
            (x, y, h) for (x, y), h in zip(others, rng.uniform(0.05, 0.95, len(others)))])
        assert dirichlet_split(tent(d, xi)).I_y <= dirichlet_split(u).I_y + 1e-9
    g = geometric_constants(d)
    bound = math.sin(g.beta) ** 2 / g.h ** 2 * g.area
    assert abs(bound - 0.25) < 1e-12
    low = min(dirichlet_split(tent(d, xi)).I_y
              for xi in random_interior_points(d, 50, np.random.default_rng(5), margin=1e-3))
    assert low >= bound - 1e-9, low
    return f"20 dominating functions ok; min tent I_y={low:.6g} >= {bound:g}"


def criterion_10():
    """Decision matrix with exit codes."""
    cases = [("disk", "quadratic:-1,1", "NotLocalMin", 1),
             ("diamond", "quadratic:-1,0.5", "NotLocalMin", 1),
             ("diamond", "quadratic:-1,6", "LocalMin", 0),
             ("diamond", "newtonian", "NotLocalMin", 1),
             ("disk", "newtonian", "NotLocalMin", 1),
             ("half_disk", "newtonian", "NotLocalMin", 1),
             ("square", "newtonian", "NotLocalMin", 1),
             ("diamond", "quadratic:0,1", "Inconclusive", 2)]
    for gen, f, kind, code in cases:
        got, rep, _ = cli("decide", "--gen", gen, "--integrand", f)
        v = rep["verdicts"][0]
        assert (v["kind"], got) == (kind, code), (gen, f, v["kind"], got)
    assert "semidefinite" in v["reason"]
    return "8/8 verdicts and exit codes"


def criterion_11():
    """Oscillating comparison fields on the disk."""
    code, rep, _ = cli("oscillation", "--gen", "disk", "--N", "1,2,4,8")
    r = [row["ratio"] for row in rep["oscillation"]]
    assert code == 0
    assert all(b > a for a, b in zip(r, r[1:])), r
    assert r[3] > 4 * r[0], r
    return "ratios " + ", ".join(f"{v:.4g}" for v in r)


def criterion_12():
    """Byte-identical reports from two consecutive processes."""
    runs = [["k-estimate", "--gen", "diamond", "--seed", "5", "--restarts", "4"],
            ["witness", "--gen", "disk", "--seed", "5"],
            ["decide", "--gen", "regular_ngon:5", "--integrand", "quadratic:-1,3",
             "--seed", "5", "--restarts", "4"]]
    for argv in runs:
        outs = [subprocess.run([sys.executable, "-m", "flatnewt.cli", *argv],
                               capture_output=True, check=False).stdout for _ in range(2)]
        assert outs[0] and outs[0] == outs[1], argv[0]
    return f"{len(runs)} commands identical"


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6,
            criterion_7, criterion_8, criterion_9, criterion_10, criterion_11, criterion_12]


def run_criterion(i: int) -> None:
    fn = CRITERIA[i - 1]
    try:
        detail = fn()
    except AssertionError as exc:
        RESULTS[i] = ("FAIL", f"{fn.__doc__.strip()} {exc}")
        print(f"criterion {i:2d}: FAIL  {RESULTS[i][1]}")
        raise
    RESULTS[i] = ("PASS", f"{fn.__doc__.strip()} {detail}")
    print(f"criterion {i:2d}: PASS  {RESULTS[i][1]}")


@pytest.mark.parametrize("i", range(1, len(CRITERIA) + 1), ids=lambda i: f"criterion_{i}")
def test_criterion(i):
    run_criterion(i)


if __name__ == "__main__":
    failed = 0
    for i in range(1, len(CRITERIA) + 1):
        try:
            run_criterion(i)
        except AssertionError:
            failed += 1
    sys.exit(1 if failed else 0)
