"""Exact elimination for bivariate Laurent systems.

Coefficients are sympy expressions in the symbol ``T`` (or plain rationals).
Resultants are taken exactly; only the final univariate root extraction is
numeric, done with companion-matrix eigenvalues at a precision widened by the
dynamic range of the coefficients, followed by Newton polishing.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations
from typing import Callable, Mapping, Sequence

import mpmath
import sympy

from .errors import IllConditioned

X, Y, T = sympy.symbols("x y T")

Exponent = tuple[int, int]
Screen = Callable[[mpmath.mpc, mpmath.mpc], bool]


def rationalize(a) -> sympy.Expr:
    """Exact sympy number for a numeric amplitude.

    Small-denominator rationals are recognised; anything else is taken as the
    exact binary value of the float.
    """
    a = mpmath.mpc(a)
    parts = []
    for v in (a.real, a.imag):
        if v == 0:
            parts.append(sympy.Integer(0))
            continue
        f = Fraction(*_exact_ratio(v))
        g = f.limit_denominator(10 ** 6)
        if abs(mpmath.mpf(g.numerator) / g.denominator - v) <= abs(v) * mpmath.mpf(2) ** (10 - mpmath.mp.prec):
            f = g
        parts.append(sympy.Rational(f.numerator, f.denominator))
    return parts[0] + sympy.I * parts[1]


def _exact_ratio(v: mpmath.mpf) -> tuple[int, int]:
    sign, man, exp, _ = mpmath.mpf(v)._mpf_
    man = -int(man) if sign else int(man)
    if exp >= 0:
        return man << exp, 1
    return man, 1 << (-exp)


def to_polynomial(terms: Mapping[Exponent, sympy.Expr]) -> sympy.Expr:
    """Multiply a Laurent polynomial by the monomial that makes it polynomial."""
    if not terms:
        return sympy.Integer(0)
    a = min(m[0] for m in terms)
    b = min(m[1] for m in terms)
    return sympy.expand(sum(c * X ** (m[0] - a) * Y ** (m[1] - b) for m, c in terms.items()))


def _coeff_value(expr: sympy.Expr, subs: Mapping[sympy.Symbol, mpmath.mpf]) -> mpmath.mpc:
    if not expr.free_symbols:
        return _num(expr)
    P = sympy.Poly(expr, T)
    t = subs[T]
    vals = []
    for (j,), c in P.terms():
        vals.append(_num(c) * t ** j)
    vals.sort(key=abs)
    return mpmath.fsum(vals)


def _num(c: sympy.Expr) -> mpmath.mpc:
    re, im = c.as_real_imag()
    return mpmath.mpc(_rat(re), _rat(im))


def _rat(v: sympy.Expr) -> mpmath.mpf:
    v = sympy.Rational(v)
    return mpmath.mpf(int(v.p)) / int(v.q)


def univariate_coefficients(R: sympy.Expr, var: sympy.Symbol,
                            subs: Mapping[sympy.Symbol, mpmath.mpf]) -> list[mpmath.mpc]:
    """Numeric coefficients (highest degree first) of R/var^v, v the lowest degree."""
    P = sympy.Poly(R, var)
    by_deg: dict[int, mpmath.mpc] = {}
    for (d,), c in P.terms():
        by_deg[d] = _coeff_value(c, subs)
    nz = [d for d, c in by_deg.items() if c != 0]
    if not nz:
        return []
    lo, hi = min(nz), max(nz)
    return [by_deg.get(d, mpmath.mpc(0)) for d in range(hi, lo - 1, -1)]


def companion_roots(coeffs: Sequence[mpmath.mpc]) -> list[mpmath.mpc]:
    """All roots of sum c_i z^(n-i) via the eigenvalues of the companion matrix."""
    coeffs = [mpmath.mpc(c) for c in coeffs]
    n = len(coeffs) - 1
    if n < 1:
        return []
    big = max(abs(c) for c in coeffs)
    if abs(coeffs[0]) <= big * mpmath.mpf(2) ** (20 - mpmath.mp.prec):
        raise IllConditioned("leading coefficient of the eliminant vanishes numerically")
    if n == 1:
        roots = [-coeffs[1] / coeffs[0]]
    else:
        monic = [c / coeffs[0] for c in coeffs[1:]]
        M = mpmath.zeros(n)
        for i in range(1, n):
            M[i, i - 1] = 1
        for i in range(n):
            M[i, n - 1] = -monic[n - 1 - i]
        roots = list(mpmath.eig(M, left=False, right=False))
    return [_polish_root(coeffs, z) for z in roots]


def _polish_root(coeffs, z, rounds: int = 3):
    """Newton steps on the univariate polynomial (kept only if they help)."""
    for _ in range(rounds):
        p, dp = mpmath.mpc(0), mpmath.mpc(0)
        for c in coeffs:
            dp = dp * z + p
            p = p * z + c
        if dp == 0:
            break
        step = p / dp
        z_new = z - step
        if abs(step) > abs(z) * mpmath.mpf("1e-3"):
            break
        z = z_new
    return z


def _dynamic_bits(coeffs: Sequence[mpmath.mpc]) -> int:
    mags = [abs(c) for c in coeffs if c != 0]
    if not mags:
        return 0
    return int(mpmath.log(max(mags) / min(mags), 2)) + 1


def nonzero_roots(R: sympy.Expr, var: sympy.Symbol, subs: Mapping[sympy.Symbol, mpmath.mpf]) -> list[mpmath.mpc]:
    """Nonzero roots of R in ``var`` with T substituted, at widened precision."""
    coeffs = univariate_coefficients(R, var, subs)
    if len(coeffs) < 2:
        return []
    extra = _dynamic_bits(coeffs) + 64
    with mpmath.workprec(mpmath.mp.prec + extra):
        coeffs = univariate_coefficients(R, var, subs)
        roots = companion_roots(coeffs)
    return [+z for z in roots]


def eliminate(P: sympy.Expr, Q: sympy.Expr) -> tuple[sympy.Expr, sympy.Expr]:
    """Resultants of P, Q eliminating y (a polynomial in x) and eliminating x."""
    return sympy.resultant(P, Q, Y), sympy.resultant(P, Q, X)


def solve_system(polys: Sequence[sympy.Expr], subs: Mapping[sympy.Symbol, mpmath.mpf],
                 screen: Screen) -> list[tuple[mpmath.mpc, mpmath.mpc]]:
    """Candidate torus solutions of a polynomial system in x, y.

    Tries pairs of equations until both resultants are nonzero, forms every
    pairing of an x-root with a y-root and keeps the ones accepted by ``screen``
    (which should check all equations).  Raises IllConditioned if every pair
    shares a common factor.
    """
    polys = [p for p in polys if p != 0]
    if len(polys) < 2:
        raise IllConditioned("need two independent equations")
    for P, Q in combinations(polys, 2):
        Rx, Ry = eliminate(P, Q)
        if Rx == 0 or Ry == 0:
            continue
        # Substituting T may still leave a vanishing eliminant.
        if not univariate_coefficients(Rx, X, subs) or not univariate_coefficients(Ry, Y, subs):
            continue
        xs = nonzero_roots(Rx, X, subs)
        ys = nonzero_roots(Ry, Y, subs)
        return [(x, y) for x in xs for y in ys if screen(x, y)]
    raise IllConditioned("every pair of equations has a common factor")


def dedupe(points: Sequence[tuple[mpmath.mpc, mpmath.mpc]], rel=mpmath.mpf("1e-10")):
    """Merge points equal within ``rel`` relative distance; returns (point, count) pairs."""
    out: list[list] = []
    for p in points:
        for q in out:
            if all(abs(p[j] - q[0][j]) <= rel * max(abs(p[j]), abs(q[0][j])) for j in range(2)):
                q[1] += 1
                break
        else:
            out.append([p, 1])
    return [(p, n) for p, n in out]
