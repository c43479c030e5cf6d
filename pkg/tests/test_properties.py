from fractions import Fraction as F

import mpmath
from hypothesis import given, settings
from hypothesis import strategies as st

from kstab_mirror import catalog
from kstab_mirror.critical_solver import critical_points, tropical_critical_points
from kstab_mirror.exp_laurent import CriticalAsymptotics, ExpLaurentPoly, restrict_along
from kstab_mirror.stability_engine import destabilizes
from kstab_mirror.surface_geometry import slope_mu

SETTINGS = settings(deadline=None, max_examples=25)

rates = st.fractions(min_value=-3, max_value=3, max_denominator=6)
exps = st.tuples(st.integers(-2, 2), st.integers(-2, 2))
amps = st.integers(-5, 5).filter(bool)
polys = st.lists(st.tuples(exps, rates, amps), min_size=1, max_size=5).map(ExpLaurentPoly.from_terms)
asym = st.builds(lambda b, a: CriticalAsymptotics(b, a, ()),
                 st.tuples(rates, rates),
                 st.tuples(st.sampled_from([mpmath.mpc(1), mpmath.mpc(-1), mpmath.mpc(0, 1), mpmath.mpc(2, -1)]),
                           st.sampled_from([mpmath.mpc(1), mpmath.mpc(-2), mpmath.mpc(1, 1)])))


@SETTINGS
@given(polys, polys, asym)
def test_restriction_is_ring_homomorphism(P, Q, a):
    rp, rq = restrict_along(P, a), restrict_along(Q, a)
    assert restrict_along(P * Q, a).equals(rp * rq, tol=1e-50)
    assert restrict_along(P + Q, a).equals(rp + rq, tol=1e-50)


@SETTINGS
@given(st.fractions(min_value=F(1, 20), max_value=F(19, 20), max_denominator=40),
       st.fractions(min_value=F(1, 10), max_value=F(9, 10), max_denominator=20),
       st.fractions(min_value=F(1, 4), max_value=4, max_denominator=8))
def test_slope_verdict_scale_invariant(q, c, t):
    S, omega, _ = catalog.make("blp_p2", q=q)
    bad, margin = destabilizes(S, omega, "E", c)
    bad_t, margin_t = destabilizes(S, omega * t, "E", c * t)
    assert bad == bad_t and margin_t == margin / t
    assert slope_mu(S, omega * t) == slope_mu(S, omega) / t


@settings(deadline=None, max_examples=12)
@given(st.fractions(min_value=F(1, 20), max_value=F(19, 20), max_denominator=30).filter(lambda q: q != F(3, 7)))
def test_blp_critical_count_is_number_of_rays(q):
    _, _, chart = catalog.make("blp_p2", q=q)
    fams = tropical_critical_points(chart)
    assert len(fams) == 4
    pts = critical_points(chart, 3, families=fams)
    assert all(p.nondegenerate for p in pts)


@SETTINGS
@given(st.tuples(st.floats(-1.5, 1.5), st.floats(-3, 3)), st.tuples(st.floats(-1.5, 1.5), st.floats(-3, 3)))
def test_log_gradient_matches_numeric_derivative(lx, ly):
    _, _, chart = catalog.make("iterated_blowup", r=F(9, 10))
    k = mpmath.mpf(1)
    W = chart.potential
    g1, g2 = chart.gradient()

    def at(u, v):
        return W.evaluate(k, (mpmath.exp(u), mpmath.exp(v)))

    u = mpmath.mpc(lx[0], lx[1])
    v = mpmath.mpc(ly[0], ly[1])
    p = (mpmath.exp(u), mpmath.exp(v))
    du = mpmath.diff(lambda t: at(t, v), u)
    dv = mpmath.diff(lambda t: at(u, t), v)
    scale = max(abs(du), abs(dv), 1)
    assert abs(g1.evaluate(k, p) - du) < mpmath.mpf(10) ** -30 * scale
    assert abs(g2.evaluate(k, p) - dv) < mpmath.mpf(10) ** -30 * scale
