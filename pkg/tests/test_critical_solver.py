from fractions import Fraction as F

import mpmath
import pytest

from kstab_mirror import catalog
from kstab_mirror.critical_solver import (all_critical_points, critical_points, newton,
                                          refine_at_k, scan_walls, tropical_critical_points,
                                          validate_chamber)
from kstab_mirror.errors import IncompleteCriticalSet, NoConvergence, WallDetected
from kstab_mirror.lg_mirror import deg4_mirror

PI = mpmath.pi


def test_blp_points_solve_quartic():
    # at q = 1/2 the critical locus is x = y, x^4 + x^3 = e^{-pi k}
    _, _, chart = catalog.make("blp_p2", q=F(1, 2))
    k = 3
    pts = critical_points(chart, k)
    assert len(pts) == 4
    for p in pts:
        x, y = p.coords
        scale = max(abs(x) ** 4, abs(x) ** 3, mpmath.exp(-PI * k))
        assert abs(x - y) < 1e-28 * abs(x)
        assert abs(x ** 4 + x ** 3 - mpmath.exp(-PI * k)) < 1e-28 * scale
        assert p.nondegenerate


def test_blp_families_q_half():
    _, _, chart = catalog.make("blp_p2", q=F(1, 2))
    fams = tropical_critical_points(chart)
    betas = sorted(a.beta for a in fams)
    assert betas == [(F(-1, 6), F(-1, 6))] * 3 + [(0, 0)]
    # the three small roots are x ~ xi e^{-pi k/3}, xi^3 = 1
    for a in fams:
        if a.beta != (0, 0):
            assert abs(a.alpha[0] ** 3 - 1) < 1e-40
            assert a.multiplicity == 3


def test_blp_families_q_quarter():
    _, _, chart = catalog.make("blp_p2", q=F(1, 4))
    fams = tropical_critical_points(chart)
    assert len(fams) == 4
    assert {a.beta for a in fams} == {(F(-3, 16), F(-3, 16))}
    for a in fams:
        assert abs(a.alpha[0] ** 4 - 1) < 1e-40


def test_wall_detected():
    _, _, chart = catalog.make("blp_p2", q=F(3, 7))
    with pytest.raises(WallDetected) as e:
        tropical_critical_points(chart)
    assert e.value.exit_code == 4
    assert validate_chamber(chart).wall
    # merged system still yields all four points
    assert len(tropical_critical_points(chart, allow_walls=True)) == 4


def test_chamber_margins_positive_off_wall():
    for q in (F(1, 4), F(1, 2), F(3, 4)):
        _, _, chart = catalog.make("blp_p2", q=q)
        rep = validate_chamber(chart)
        assert not rep.wall
        assert min(rep.margins()) > 0


def test_scan_finds_blp_wall():
    build = lambda q: catalog.make("blp_p2", q=q)[2]
    assert scan_walls(build, F(1, 10), F(9, 10), F(1, 20)) == [F(3, 7)]


def test_dp4_points_match_closed_forms():
    chart = deg4_mirror(0)
    k = 3
    E = lambda t: mpmath.exp(PI * k * t)
    want = [(1, -E(1)), (-E(1), -E(F(1, 2))), (-E(1), E(F(1, 2))), (E(1), -1),
            (E(1), -E(F(1, 2))), (E(1), E(F(1, 2))), (E(1), -E(1)), (E(2), -1)]
    # delta = 0 is the nef limit: the leading system sits on a wall
    got = [p.coords for p in critical_points(chart, k, allow_walls=True)]
    assert len(got) == 8
    for x, y in want:
        x, y = mpmath.mpf(x), mpmath.mpf(y)
        assert any(abs(u - x) < 1e-30 * abs(x) and abs(v - y) < 1e-30 * abs(y) for u, v in got)


@pytest.mark.parametrize("name, params", [
    ("p2", {}), ("blp_p2", {"q": F(1, 2)}), ("blp_p2", {"q": F(1, 4)}),
    ("blpq_p2", {}), ("iterated_blowup", {"r": F(9, 10)}),
])
def test_oracle_agreement(name, params):
    _, _, chart = catalog.make(name, **params)
    k = 2
    fast = critical_points(chart, k, allow_walls=True)
    slow = all_critical_points(chart, k)
    assert len(fast) == len(slow) == chart.expected_count()
    for p in fast:
        x, y = p.coords
        assert any(abs(q.coords[0] - x) < 1e-30 * abs(x) and abs(q.coords[1] - y) < 1e-30 * abs(y)
                   for q in slow)


def test_newton_is_seed_stable():
    _, _, chart = catalog.make("iterated_blowup", r=F(9, 10))
    k = 3
    for a in tropical_critical_points(chart):
        x0, y0 = a.seed(k)
        base, _ = newton(chart, k, (x0, y0))
        moved, _ = newton(chart, k, (x0 * mpmath.mpf("1.01"), y0 * mpmath.mpc("0.995", "0.005")))
        assert abs(base[0] - moved[0]) < 1e-28 * abs(base[0])
        assert abs(base[1] - moved[1]) < 1e-28 * abs(base[1])


def test_log_coordinates_approach_beta():
    # log|x| / (2 pi k) - beta_x decays like 1/k
    _, _, chart = catalog.make("blp_p2", q=F(1, 4))
    a = tropical_critical_points(chart)[0]
    errs = []
    for k in (2, 4, 8):
        p = refine_at_k(chart, a, k)
        errs.append(abs(mpmath.log(abs(p.coords[0])) / (2 * PI * k) - a.beta[0]))
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < errs[0] / 3


def test_duplicate_families_rejected():
    _, _, chart = catalog.make("p2")
    fams = tropical_critical_points(chart)
    with pytest.raises(IncompleteCriticalSet):
        critical_points(chart, 2, families=fams + fams[:1])
    with pytest.raises(IncompleteCriticalSet):
        critical_points(chart, 2, families=fams[:2])


def test_newton_reports_failure():
    _, _, chart = catalog.make("p2")
    with pytest.raises(NoConvergence):
        newton(chart, 2, (mpmath.mpc(2), mpmath.mpc(1)), max_iter=0)
