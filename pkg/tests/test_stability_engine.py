from fractions import Fraction as F

import mpmath
import pytest

from kstab_mirror import catalog
from kstab_mirror.critical_solver import tropical_critical_points
from kstab_mirror.errors import BasisMismatch, DivergentRatio, LeadingCancellation, ZeroDenominator, ZeroWeight
from kstab_mirror.stability_engine import (FutakiFixedDivisor, Lead, StabilityReport, TestConfigQuadratic,
                                           asymptotic_contribution, destabilizes, df_intersection,
                                           extrapolate, futaki_divisor_contribution, futaki_mirror_ratio,
                                           futaki_mirror_sum, per_family_slopes, quotient_slope_intersection,
                                           quotient_slope_mirror, slope_integrands)

PI = mpmath.pi


def mp(x):
    x = F(x)
    return mpmath.mpf(x.numerator) / x.denominator


def test_lead_arithmetic():
    a = Lead(mpmath.mpc(2), F(-1, 3))
    b = Lead(mpmath.mpc(3), F(-1, 2))
    assert (a + b) == a
    assert (a * b) == Lead(mpmath.mpc(6), F(-5, 6))
    assert (a / b) == Lead(mpmath.mpc(2) / 3, F(1, 6))
    assert (a + Lead(mpmath.mpc(1), F(-1, 3))).amp == 3
    assert a.limit() == 0
    with pytest.raises(DivergentRatio):
        (a / b).limit()
    with pytest.raises(LeadingCancellation):
        a + Lead(mpmath.mpc(-2), F(-1, 3))
    with pytest.raises(LeadingCancellation):
        a / Lead(mpmath.mpc(0), None)


def test_slope_intersection_p2_line():
    # w = H, Z = H: w.Z = Z^2 = 1, K.Z = -3
    S = catalog.p2_surface()
    for c in (F(1, 2), F(1, 3), F(2)):
        want = 3 * (2 + 2 * c) / (2 * c * (3 - c))
        assert quotient_slope_intersection(S, "H", "H", c) == want
    with pytest.raises(ZeroDenominator):
        quotient_slope_intersection(S, "H", "H", 3)


def test_destabilizing_exceptional_curve():
    S = catalog.blp_surface()
    bad, margin = destabilizes(S, "H-E/2", "E", F(1, 2))
    assert bad and margin == F(1, 3)
    assert quotient_slope_intersection(S, "H-E/2", "E", F(1, 2)) == 3


def test_report_json_round_trip():
    _, _, chart = catalog.make("blp_p2", q=F(1, 2))
    rep = quotient_slope_mirror(chart, "E", F(1, 2), [3, 5])
    back = StabilityReport.loads(rep.dumps())
    assert back.dumps() == rep.dumps()
    assert back.intersection == rep.intersection == 3
    assert back.verdict == rep.verdict


def test_futaki_intersection_equals_mirror_sum():
    for name, params, cls in (("blp_p2", {"q": F(1, 2)}, "H"), ("blpq_p2", {}, "D1")):
        S, omega, chart = catalog.make(name, **params)
        D = FutakiFixedDivisor(S.cls(cls), F(1, 10), 1, cls)
        for k in (2, 3):
            a = futaki_divisor_contribution(S, omega, D, k)
            b = futaki_mirror_sum(chart, D, k)
            assert abs(a - b) < mpmath.mpf(10) ** -25 * abs(a)


def test_futaki_blpq_closed_form_with_sign():
    # th_D1 contributions at the y = -1 family carry +pi mu_hat (the 1/c factor with c = -1)
    S, _, chart = catalog.make("blpq_p2", a=F(1, 3), b=F(1, 3))
    fams = tropical_critical_points(chart, allow_walls=True)
    ref = next(a for a in fams if a.beta == (0, 0))
    for m1, m3 in ((F(1, 10), F(1, 5)), (F(1, 4), F(1, 20))):
        D1 = FutakiFixedDivisor(S.cls("D1"), m1, 1, "D1")
        D3 = FutakiFixedDivisor(S.cls("D3"), m3, 1, "D3")
        got = futaki_mirror_ratio(chart, D1, D3, fams, ref)
        want = ((mpmath.mpf(4) / 3 - 5 * PI * mp(m1)) + PI * mp(m1)) / (2 * (-mpmath.mpf(1) / 3 + 2 * PI * mp(m3)))
        assert abs(got - want) < mpmath.mpf(10) ** -30 * abs(want)


def test_futaki_blp_single_point_ratio():
    S, _, chart = catalog.make("blp_p2", q=F(1, 2))
    fams = tropical_critical_points(chart)
    ref = next(a for a in fams if a.beta == (0, 0))
    xi = next(a for a in fams if a.beta != (0, 0) and abs(a.alpha[0] - 1) < 1e-20)
    DH = FutakiFixedDivisor(S.cls("H"), F(1, 10), 1, "H")
    DE = FutakiFixedDivisor(S.cls("E"), F(1, 3), 1, "E")
    got = futaki_mirror_ratio(chart, DH, DE, [xi], ref)
    assert abs(got - mpmath.mpf(2) / 3 * (1 - 4 * PI / 10)) < mpmath.mpf(10) ** -30


def test_iterated_p1_limit_unsimplified_form():
    for r in (F(9, 10), F(19, 20)):
        s = r - F(1, 2)
        _, _, chart = catalog.make("iterated_blowup", r=r)
        vals = {(a.beta, round(float(a.alpha[0].real))): v for a, v in per_family_slopes(chart, "E1", s)}
        p1 = vals[((0, (4 * r - 3) / 2), 1)]
        want = 3 * (1 - 2 * r) / (s * (-6 * r + 2 * s + 3))
        assert abs(p1 - mp(want)) < mpmath.mpf(10) ** -30


def test_dp4_concentrates_on_intersection_value():
    S, omega, chart = catalog.make("dp4", delta=0)
    fams = tropical_critical_points(chart, allow_walls=True)
    for s in (F(2, 5), F(1)):
        f_d, f_r = slope_integrands(chart, "D1", s)
        ratios = []
        for a in fams:
            d, r = asymptotic_contribution(f_d, chart, a), asymptotic_contribution(f_r, chart, a)
            assert d.rate <= 0 and r.rate <= 0
            if d.rate == 0 and r.rate == 0:
                ratios.append(d.amp / r.amp)
        assert len(ratios) == 1
        exact = quotient_slope_intersection(S, omega, "D1", s)
        assert exact == 3 / s
        assert abs(ratios[0] - mp(exact)) < mpmath.mpf(10) ** -30


def test_extrapolate_recovers_geometric_tail():
    L, A, delta = mpmath.mpf(2), mpmath.mpf(5), mpmath.mpf("0.1")
    ks = [3, 5, 8]
    vals = [L + A * mpmath.exp(-2 * PI * k * delta) for k in ks]
    ex = extrapolate(ks, vals)
    assert ex.fitted
    assert abs(ex.limit - L) < mpmath.mpf(10) ** -30
    assert abs(ex.rate - delta) < mpmath.mpf(10) ** -30
    flat = extrapolate(ks, [L, L, L])
    assert not flat.fitted and flat.limit == L


def test_df_intersection_and_basis_checks():
    S, omega, _ = catalog.make("p1xp1_blowup", r=F(1, 2))
    tc = TestConfigQuadratic.from_products(S, [(1, omega, omega), (1, "Krel", omega)])
    assert df_intersection(S, tc) == F(1, 4)
    assert df_intersection(S, TestConfigQuadratic.zero(S)) == 0
    n = len(S.basis)
    a = [[F(0)] * n for _ in range(n)]
    a[0][1] = F(1)
    with pytest.raises(BasisMismatch):
        TestConfigQuadratic(tuple(S.basis), tuple(tuple(r) for r in a))
    other = catalog.p2_surface()
    with pytest.raises(BasisMismatch):
        df_intersection(S, TestConfigQuadratic.zero(other))


def test_zero_weight_rejected():
    S = catalog.blp_surface()
    with pytest.raises(ZeroWeight):
        FutakiFixedDivisor(S.cls("H"), F(1, 10), 0, "H")
