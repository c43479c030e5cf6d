from fractions import Fraction as F

import mpmath
import pytest

from kstab_mirror.errors import EmptyScalar, PrecisionOverflow
from kstab_mirror.exp_laurent import CriticalAsymptotics, ExpLaurentPoly, ExpScalar, restrict_along

PI = mpmath.pi


def test_scalar_merges_equal_rates():
    s = ExpScalar.from_terms([(F(1, 2), 2), (F(1, 2), 3), (F(-1), 1)])
    assert s.terms == {F(1, 2): 5, F(-1): 1}
    assert s.leading() == (5, F(1, 2))


def test_scalar_cancellation_is_pruned():
    s = ExpScalar.const(1, F(1, 3)) - ExpScalar.const(1, F(1, 3))
    assert s.is_zero()
    with pytest.raises(EmptyScalar):
        s.leading()


def test_scalar_evaluate():
    s = ExpScalar({F(1, 2): 2, F(-1, 4): -1})
    k = 3
    want = 2 * mpmath.exp(PI * k) - mpmath.exp(-PI * k / 2)
    assert abs(s.evaluate(k) - want) < mpmath.mpf(10) ** -60 * abs(want)


def test_scalar_product_adds_rates():
    a = ExpScalar({F(1, 2): 2, F(0): 1})
    b = ExpScalar({F(-1, 2): 3})
    assert (a * b).terms == {F(0): 6, F(-1, 2): 3}


def test_poly_log_derivative():
    P = ExpLaurentPoly.from_terms([((2, -1), F(-1), 3), ((0, 1), F(0), 1)])
    assert P.log_derivative(1) == ExpLaurentPoly.from_terms([((2, -1), F(-1), 6)])
    assert P.log_derivative(2) == ExpLaurentPoly.from_terms([((2, -1), F(-1), -3), ((0, 1), F(0), 1)])


def test_poly_evaluate_matches_direct_formula():
    P = ExpLaurentPoly.from_terms([((1, 0), F(-1, 3), 1), ((-1, -1), F(-2, 3), 2)])
    k, x, y = 2, mpmath.mpc("0.3", "0.1"), mpmath.mpc("-1.2")
    want = mpmath.exp(-2 * PI * k / 3) * x + 2 * mpmath.exp(-4 * PI * k / 3) / (x * y)
    assert abs(P.evaluate(k, (x, y)) - want) < mpmath.mpf(10) ** -60


def test_precision_budget():
    P = ExpLaurentPoly.monomial((1, 0), F(2))
    P.evaluate(12, (1, 1))
    with pytest.raises(PrecisionOverflow):
        P.evaluate(16, (1, 1))


def test_json_round_trip():
    P = ExpLaurentPoly.from_terms([((1, 2), F(-3, 7), mpmath.mpc(1, 2) / 3), ((0, -1), F(5, 2), -1)])
    assert ExpLaurentPoly.from_json(P.to_json()).equals(P, tol=mpmath.mpf(10) ** -70)


def test_scaled_multiplies_rates():
    P = ExpLaurentPoly.monomial((1, 1), F(-1, 3))
    assert P.scaled(3) == ExpLaurentPoly.monomial((1, 1), F(-1))


def test_restrict_along_substitutes_leading_data():
    W = ExpLaurentPoly.from_terms([((1, 0), F(0), 1), ((-1, -1), F(-1), 1)])
    a = CriticalAsymptotics((F(-1, 3), F(-1, 3)), (mpmath.mpc(1), mpmath.mpc(1)), ())
    r = restrict_along(W, a)
    # x -> e^{-2pi k/3}, 1/(xy) e^{-2pi k} -> e^{-2pi k/3}
    assert r.equals(ExpScalar({F(-1, 3): 2}), tol=mpmath.mpf(10) ** -70)


def test_seed_is_leading_point():
    a = CriticalAsymptotics((F(1, 2), F(-1, 4)), (mpmath.mpc(-1), mpmath.mpc(0, 1)), ())
    x, y = a.seed(2)
    assert abs(x + mpmath.exp(2 * PI)) < 1e-60 * abs(x)
    assert abs(y - 1j * mpmath.exp(-PI)) < 1e-60
