"""Scalars sum_t alpha_t e^{2 pi k beta_t} and Laurent polynomials over them.

Rates ``beta`` are exact rationals, amplitudes ``alpha`` are mpmath complex
numbers.  The large parameter ``k`` never appears inside an object: it is
supplied when a polynomial is evaluated, so leading-order questions as
``k -> infinity`` are answered by comparing rates.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence, Union

import mpmath

from . import precision  # noqa: F401  (sets the default mpmath precision)
from .errors import EmptyScalar, PrecisionOverflow

PRUNE = mpmath.mpf(2) ** -64

Number = Union[int, float, complex, Fraction, "mpmath.mpf", "mpmath.mpc"]
Exponent = tuple[int, int]


def to_mpc(x) -> mpmath.mpc:
    """Convert ints, Fractions, floats, complex and mpmath numbers to mpc."""
    if isinstance(x, Fraction):
        return mpmath.mpc(mpmath.mpf(x.numerator) / x.denominator)
    if isinstance(x, str):
        return mpmath.mpc(mpmath.mpf(Fraction(x).numerator) / Fraction(x).denominator)
    return mpmath.mpc(x)


def _frac(b) -> Fraction:
    return b if isinstance(b, Fraction) else Fraction(b)


class ExpScalar:
    """Finite sum of amplitude * e^{2 pi k rate}, at most one term per rate."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[Fraction, mpmath.mpc] | None = None):
        self.terms: dict[Fraction, mpmath.mpc] = {}
        if terms:
            for r, a in terms.items():
                a = to_mpc(a)
                if a != 0:
                    self.terms[_frac(r)] = a

    @classmethod
    def from_terms(cls, pairs: Iterable[tuple[Fraction, Number]]) -> "ExpScalar":
        """Merge (rate, amplitude) pairs, pruning cancellations below 2^-64."""
        acc: dict[Fraction, list] = {}
        for r, a in pairs:
            a = to_mpc(a)
            if a == 0:
                continue
            r = _frac(r)
            slot = acc.get(r)
            if slot is None:
                acc[r] = [a, abs(a)]
            else:
                slot[0] += a
                slot[1] = max(slot[1], abs(a))
        out = cls()
        for r, (a, mag) in acc.items():
            if a != 0 and abs(a) > PRUNE * mag:
                out.terms[r] = a
        return out

    @classmethod
    def const(cls, a: Number, rate: Fraction = Fraction(0)) -> "ExpScalar":
        return cls({_frac(rate): a})

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __add__(self, other) -> "ExpScalar":
        other = _as_scalar(other)
        return ExpScalar.from_terms(list(self.terms.items()) + list(other.terms.items()))

    __radd__ = __add__

    def __neg__(self) -> "ExpScalar":
        return ExpScalar({r: -a for r, a in self.terms.items()})

    def __sub__(self, other) -> "ExpScalar":
        return self + (-_as_scalar(other))

    def __rsub__(self, other) -> "ExpScalar":
        return _as_scalar(other) - self

    def __mul__(self, other) -> "ExpScalar":
        other = _as_scalar(other)
        return ExpScalar.from_terms(
            (r1 + r2, a1 * a2) for r1, a1 in self.terms.items() for r2, a2 in other.terms.items())

    __rmul__ = __mul__

    def leading(self) -> tuple[mpmath.mpc, Fraction]:
        if not self.terms:
            raise EmptyScalar("leading term of an empty scalar")
        r = max(self.terms)
        return self.terms[r], r

    def evaluate(self, k) -> mpmath.mpc:
        k = mpmath.mpf(k) if not isinstance(k, Fraction) else mpmath.mpf(k.numerator) / k.denominator
        two_pi_k = 2 * mpmath.pi * k
        return mpmath.fsum(a * mpmath.exp(two_pi_k * _mpf(r)) for r, a in self.terms.items())

    def scaled(self, t: Fraction) -> "ExpScalar":
        t = _frac(t)
        return ExpScalar({r * t: a for r, a in self.terms.items()})

    def equals(self, other: "ExpScalar", tol=0) -> bool:
        other = _as_scalar(other)
        if set(self.terms) != set(other.terms):
            return False
        return all(abs(self.terms[r] - other.terms[r]) <= tol * max(1, abs(self.terms[r]))
                   for r in self.terms)

    def __eq__(self, other):
        if not isinstance(other, ExpScalar):
            try:
                other = _as_scalar(other)
            except TypeError:
                return NotImplemented
        return self.equals(other)

    def __hash__(self):
        return hash(tuple(sorted(self.terms)))

    def __repr__(self):
        if not self.terms:
            return "ExpScalar(0)"
        parts = [f"{mpmath.nstr(a, 8)}*e^(2pi k*{r})" for r, a in sorted(self.terms.items(), reverse=True)]
        return "ExpScalar(" + " + ".join(parts) + ")"


def _mpf(r: Fraction) -> mpmath.mpf:
    return mpmath.mpf(r.numerator) / r.denominator


def _as_scalar(x) -> ExpScalar:
    if isinstance(x, ExpScalar):
        return x
    if isinstance(x, (int, float, complex, Fraction, mpmath.mpf, mpmath.mpc)):
        return ExpScalar({Fraction(0): x})
    raise TypeError(f"cannot use {type(x).__name__} as an ExpScalar")


class ExpLaurentPoly:
    """Laurent polynomial in (x, y) with ExpScalar coefficients."""

    __slots__ = ("monomials",)

    def __init__(self, monomials: Mapping[Exponent, ExpScalar] | None = None):
        self.monomials: dict[Exponent, ExpScalar] = {}
        for m, s in (monomials or {}).items():
            s = _as_scalar(s)
            if s:
                self.monomials[(int(m[0]), int(m[1]))] = s

    # -- construction ------------------------------------------------------

    @classmethod
    def monomial(cls, exponent: Sequence[int], rate=Fraction(0), amplitude: Number = 1) -> "ExpLaurentPoly":
        return cls({tuple(exponent): ExpScalar({_frac(rate): amplitude})})

    @classmethod
    def from_terms(cls, terms: Iterable[tuple[Sequence[int], Fraction, Number]]) -> "ExpLaurentPoly":
        """Build from (exponent, rate, amplitude) triples."""
        acc: dict[Exponent, list] = {}
        for m, r, a in terms:
            acc.setdefault((int(m[0]), int(m[1])), []).append((r, a))
        return cls({m: ExpScalar.from_terms(ts) for m, ts in acc.items()})

    @classmethod
    def zero(cls) -> "ExpLaurentPoly":
        return cls()

    def terms(self) -> list[tuple[Exponent, Fraction, mpmath.mpc]]:
        return [(m, r, a) for m, s in self.monomials.items() for r, a in s.terms.items()]

    def is_zero(self) -> bool:
        return not self.monomials

    # -- ring operations ---------------------------------------------------

    def __add__(self, other) -> "ExpLaurentPoly":
        other = _as_poly(other)
        return ExpLaurentPoly.from_terms(self.terms() + other.terms())

    __radd__ = __add__

    def __neg__(self) -> "ExpLaurentPoly":
        return ExpLaurentPoly({m: -s for m, s in self.monomials.items()})

    def __sub__(self, other) -> "ExpLaurentPoly":
        return self + (-_as_poly(other))

    def __rsub__(self, other) -> "ExpLaurentPoly":
        return _as_poly(other) - self

    def __mul__(self, other) -> "ExpLaurentPoly":
        if isinstance(other, (int, float, complex, Fraction, mpmath.mpf, mpmath.mpc, ExpScalar)):
            return self.scalar_mul(other)
        other = _as_poly(other)
        out = []
        for (m1, r1, a1) in self.terms():
            for (m2, r2, a2) in other.terms():
                out.append(((m1[0] + m2[0], m1[1] + m2[1]), r1 + r2, a1 * a2))
        return ExpLaurentPoly.from_terms(out)

    __rmul__ = __mul__

    def scalar_mul(self, c) -> "ExpLaurentPoly":
        c = _as_scalar(c)
        return ExpLaurentPoly.from_terms(
            (m, r + rc, a * ac) for (m, r, a) in self.terms() for rc, ac in c.terms.items())

    def __pow__(self, n: int) -> "ExpLaurentPoly":
        out = _as_poly(1)
        for _ in range(n):
            out = out * self
        return out

    def log_derivative(self, axis: int) -> "ExpLaurentPoly":
        """x_j d/dx_j: multiply each monomial by its exponent on ``axis`` (1 or 2)."""
        j = axis - 1
        return ExpLaurentPoly({m: s * m[j] for m, s in self.monomials.items() if m[j] != 0})

    def scaled(self, t) -> "ExpLaurentPoly":
        """Multiply every rate by t (the polarisation scaling omega -> t omega)."""
        return ExpLaurentPoly({m: s.scaled(t) for m, s in self.monomials.items()})

    def rate_range(self) -> tuple[Fraction, Fraction]:
        rates = [r for s in self.monomials.values() for r in s.terms]
        return (min(rates), max(rates)) if rates else (Fraction(0), Fraction(0))

    # -- evaluation --------------------------------------------------------

    def term_values(self, k, point) -> list[mpmath.mpc]:
        k = _as_k(k)
        _check_budget(self, k)
        x, y = to_mpc(point[0]), to_mpc(point[1])
        if x == 0 or y == 0:
            raise ZeroDivisionError("evaluation point must lie in the torus")
        two_pi_k = 2 * mpmath.pi * k
        cache: dict[Fraction, mpmath.mpf] = {}
        xp: dict[int, mpmath.mpc] = {}
        yp: dict[int, mpmath.mpc] = {}
        out = []
        for m, s in self.monomials.items():
            if m[0] not in xp:
                xp[m[0]] = x ** m[0]
            if m[1] not in yp:
                yp[m[1]] = y ** m[1]
            mono = xp[m[0]] * yp[m[1]]
            for r, a in s.terms.items():
                e = cache.get(r)
                if e is None:
                    e = cache[r] = mpmath.exp(two_pi_k * _mpf(r))
                out.append(a * e * mono)
        return out

    def evaluate(self, k, point) -> mpmath.mpc:
        vals = self.term_values(k, point)
        vals.sort(key=abs)
        return mpmath.fsum(vals)

    def evaluate_with_scale(self, k, point) -> tuple[mpmath.mpc, mpmath.mpf]:
        """Value together with the sum of term magnitudes (the natural scale)."""
        vals = self.term_values(k, point)
        vals.sort(key=abs)
        return mpmath.fsum(vals), mpmath.fsum(abs(v) for v in vals)

    # -- comparison and serialization --------------------------------------

    def equals(self, other: "ExpLaurentPoly", tol=0) -> bool:
        other = _as_poly(other)
        if set(self.monomials) != set(other.monomials):
            return False
        return all(self.monomials[m].equals(other.monomials[m], tol) for m in self.monomials)

    def __eq__(self, other):
        try:
            return self.equals(_as_poly(other))
        except TypeError:
            return NotImplemented

    def __hash__(self):
        return hash(tuple(sorted(self.monomials)))

    def to_json(self) -> list[dict]:
        out = []
        for m in sorted(self.monomials):
            s = self.monomials[m]
            out.append({
                "exponent": [m[0], m[1]],
                "terms": [{"rate": str(r), "re": _num_str(a.real), "im": _num_str(a.imag)}
                          for r, a in sorted(s.terms.items(), reverse=True)],
            })
        return out

    @classmethod
    def from_json(cls, data: Sequence[Mapping]) -> "ExpLaurentPoly":
        terms = []
        for mono in data:
            m = tuple(mono["exponent"])
            for t in mono["terms"]:
                a = mpmath.mpc(mpmath.mpf(t["re"]), mpmath.mpf(t.get("im", "0")))
                terms.append((m, Fraction(t["rate"]), a))
        return cls.from_terms(terms)

    def __repr__(self):
        if not self.monomials:
            return "ExpLaurentPoly(0)"
        parts = []
        for m in sorted(self.monomials):
            parts.append(f"{self.monomials[m]!r}*x^{m[0]}y^{m[1]}")
        return "ExpLaurentPoly(" + " + ".join(parts) + ")"


def _num_str(x: mpmath.mpf) -> str:
    """Full-precision decimal string that round-trips at the working precision."""
    return mpmath.nstr(x, mpmath.mp.dps + 3, strip_zeros=True)


def _as_poly(x) -> ExpLaurentPoly:
    if isinstance(x, ExpLaurentPoly):
        return x
    s = _as_scalar(x)
    return ExpLaurentPoly({(0, 0): s})


def _as_k(k) -> mpmath.mpf:
    if isinstance(k, Fraction):
        return mpmath.mpf(k.numerator) / k.denominator
    k = mpmath.mpf(k)
    if k <= 0:
        raise ValueError("k must be positive")
    return k


def _check_budget(P: ExpLaurentPoly, k: mpmath.mpf):
    lo, hi = P.rate_range()
    worst = max(abs(lo), abs(hi))
    if worst and 2 * mpmath.pi * k * _mpf(worst) > mpmath.log(2) * mpmath.mp.prec:
        raise PrecisionOverflow(
            f"rate {worst} at k={mpmath.nstr(k, 6)} exceeds the {mpmath.mp.prec}-bit budget")


# -- asymptotic data ---------------------------------------------------------------

@dataclass(frozen=True)
class CriticalAsymptotics:
    """Leading data x_j ~ alpha_j e^{2 pi k beta_j} of one critical point.

    ``family`` indexes the rate vector ``beta``; all records sharing a beta form
    one tropical family and ``multiplicity`` is the number of distinct alpha
    solutions of that family's leading system.
    """

    beta: tuple[Fraction, Fraction]
    alpha: tuple[mpmath.mpc, mpmath.mpc]
    leading_system: tuple[frozenset, ...]
    multiplicity: int = 1
    family: int = 0
    on_wall: bool = False
    degenerate: bool = False

    def seed(self, k) -> tuple[mpmath.mpc, mpmath.mpc]:
        k = _as_k(k)
        return tuple(self.alpha[j] * mpmath.exp(2 * mpmath.pi * k * _mpf(self.beta[j])) for j in range(2))

    def label(self) -> str:
        a = ", ".join(_short_complex(z) for z in self.alpha)
        return f"beta=({self.beta[0]}, {self.beta[1]}) alpha=({a})"


def _short_complex(z, digits=6) -> str:
    z = to_mpc(z)
    if abs(z.imag) <= mpmath.mpf(10) ** (-digits - 4) * max(1, abs(z)):
        return mpmath.nstr(z.real, digits)
    return mpmath.nstr(z, digits)


def restrict_along(P: ExpLaurentPoly, a: CriticalAsymptotics) -> ExpScalar:
    """Substitute x_j = alpha_j e^{2 pi k beta_j} and collect by rate."""
    b1, b2 = a.beta
    a1, a2 = to_mpc(a.alpha[0]), to_mpc(a.alpha[1])
    pairs = []
    for m, s in P.monomials.items():
        shift = m[0] * b1 + m[1] * b2
        mono = a1 ** m[0] * a2 ** m[1]
        for r, amp in s.terms.items():
            pairs.append((r + shift, amp * mono))
    return ExpScalar.from_terms(pairs)


def leading(s: ExpScalar) -> tuple[mpmath.mpc, Fraction]:
    return s.leading()
