"""Exact intersection theory on smooth toric surfaces and small del Pezzo lattices.

Everything here is rational arithmetic with :class:`fractions.Fraction`; the
module is the oracle that the mirror computations are checked against.

A toric surface is given by the counterclockwise list of primitive rays of a
smooth complete fan.  Divisor classes are coefficient vectors over the boundary
divisors ``D_i``.  Non-toric surfaces (the degree 5 and degree 4 del Pezzos)
use the basis ``H, E_1, ..., E_n`` with the diagonal form ``diag(1, -1, ...)``
and carry their boundary cycle as a list of classes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Iterable, Mapping, Sequence, Union

from .errors import (
    BasisMismatch,
    DegenerateClass,
    DegenerateFan,
    InvalidFan,
    NonPrimitiveRay,
    NonSmoothFan,
)

Rational = Union[int, Fraction, str]


def frac(x: Rational) -> Fraction:
    """Parse an int, Fraction or ``"p/q"`` string into a Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, float):
        # decimal literals from configs: take the shortest exact decimal
        return Fraction(repr(x))
    raise TypeError(f"cannot read {x!r} as a rational")


@dataclass(frozen=True)
class DivisorClass:
    """Rational coefficient vector over a named basis."""

    coeffs: tuple[Fraction, ...]
    basis: tuple[str, ...]

    def __post_init__(self):
        if len(self.coeffs) != len(self.basis):
            raise BasisMismatch(
                f"{len(self.coeffs)} coefficients for basis of size {len(self.basis)}")

    def _check(self, other: "DivisorClass"):
        if self.basis != other.basis:
            raise BasisMismatch(f"basis {other.basis} does not match {self.basis}")

    def __add__(self, other: "DivisorClass") -> "DivisorClass":
        self._check(other)
        return DivisorClass(tuple(a + b for a, b in zip(self.coeffs, other.coeffs)), self.basis)

    def __sub__(self, other: "DivisorClass") -> "DivisorClass":
        self._check(other)
        return DivisorClass(tuple(a - b for a, b in zip(self.coeffs, other.coeffs)), self.basis)

    def __neg__(self) -> "DivisorClass":
        return DivisorClass(tuple(-a for a in self.coeffs), self.basis)

    def __mul__(self, t: Rational) -> "DivisorClass":
        t = frac(t)
        return DivisorClass(tuple(t * a for a in self.coeffs), self.basis)

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return all(a == 0 for a in self.coeffs)

    def as_dict(self) -> dict[str, Fraction]:
        return {n: c for n, c in zip(self.basis, self.coeffs) if c != 0}

    def __str__(self) -> str:
        parts = []
        for n, c in zip(self.basis, self.coeffs):
            if c == 0:
                continue
            if c == 1:
                parts.append(f"+{n}")
            elif c == -1:
                parts.append(f"-{n}")
            else:
                parts.append(f"{'+' if c > 0 else '-'}{abs(c)}{n}")
        s = "".join(parts).lstrip("+")
        return s or "0"


@dataclass(frozen=True)
class KahlerClass:
    """A polarisation class.  The scale ``k`` is kept symbolic by every caller."""

    cls: DivisorClass


@dataclass(frozen=True)
class Fan2D:
    rays: tuple[tuple[int, int], ...]
    names: tuple[str, ...]


def _det(u: Sequence[int], v: Sequence[int]) -> int:
    return u[0] * v[1] - u[1] * v[0]


def _half(v: Sequence[int]) -> int:
    return 0 if (v[1] > 0 or (v[1] == 0 and v[0] > 0)) else 1


def _angle_less(a: Sequence[int], b: Sequence[int]) -> bool:
    ha, hb = _half(a), _half(b)
    if ha != hb:
        return ha < hb
    return _det(a, b) > 0


class _SurfaceBase:
    """Shared behaviour: a basis, a symmetric form and named classes."""

    name: str
    basis: tuple[str, ...]
    form: tuple[tuple[Fraction, ...], ...]
    named: dict[str, DivisorClass]

    def zero(self) -> DivisorClass:
        return DivisorClass(tuple(Fraction(0) for _ in self.basis), self.basis)

    def unit(self, name: str) -> DivisorClass:
        i = self.basis.index(name)
        return DivisorClass(tuple(Fraction(int(j == i)) for j in range(len(self.basis))), self.basis)

    def cls(self, spec: Union[str, Mapping[str, Rational], DivisorClass]) -> DivisorClass:
        """Build a class from named pieces, e.g. ``{"H": 1, "E": "-1/2"}`` or ``"H-E/2"``."""
        if isinstance(spec, DivisorClass):
            if spec.basis != self.basis:
                raise BasisMismatch(f"class over {spec.basis}, surface uses {self.basis}")
            return spec
        if isinstance(spec, str):
            spec = parse_class_expression(spec)
        out = self.zero()
        for key, c in spec.items():
            if key in self.named:
                piece = self.named[key]
            elif key in self.basis:
                piece = self.unit(key)
            else:
                raise BasisMismatch(f"unknown class name {key!r} on {self.name}")
            out = out + piece * frac(c)
        return out

    def boundary(self) -> list[tuple[str, DivisorClass]]:
        raise NotImplementedError

    def kahler_test_curves(self) -> list[tuple[str, DivisorClass]]:
        return self.boundary()


def parse_class_expression(text: str) -> dict[str, Fraction]:
    """Parse ``"H - E/2 + 2L1"`` into ``{"H": 1, "E": -1/2, "L1": 2}``.

    A coefficient may precede the name (``3/2H`` is read as 3/2 times H) and a
    divisor may follow it (``E/2``).
    """
    import re

    s = text.replace(" ", "").replace("−", "-")
    if not s:
        return {}
    if s[0] not in "+-":
        s = "+" + s
    out: dict[str, Fraction] = {}
    token = re.compile(r"([+-])(\d+(?:/\d+)?)?\*?([A-Za-z][A-Za-z0-9_]*)(?:/(\d+))?")
    pos = 0
    while pos < len(s):
        m = token.match(s, pos)
        if not m:
            raise ValueError(f"cannot parse class expression {text!r} near {s[pos:]!r}")
        sign = -1 if m.group(1) == "-" else 1
        c = Fraction(m.group(2)) if m.group(2) else Fraction(1)
        if m.group(4):
            c /= int(m.group(4))
        name = m.group(3)
        out[name] = out.get(name, Fraction(0)) + sign * c
        pos = m.end()
    return out


class ToricSurface(_SurfaceBase):
    """Smooth complete toric surface with boundary divisors as basis."""

    def __init__(self, fan: Fan2D, intersection, selfint, name: str = "toric",
                 named: Mapping[str, DivisorClass] | None = None):
        self.fan = fan
        self.name = name
        self.basis = fan.names
        self.form = intersection
        self.selfint = selfint
        self.named = dict(named or {})

    @property
    def rays(self) -> tuple[tuple[int, int], ...]:
        return self.fan.rays

    def boundary(self) -> list[tuple[str, DivisorClass]]:
        return [(n, self.unit(n)) for n in self.basis]

    def ray_of(self, name: str) -> tuple[int, int]:
        return self.fan.rays[self.basis.index(name)]

    def __repr__(self):
        return f"ToricSurface({self.name!r}, rays={list(self.fan.rays)})"


class LatticeSurface(_SurfaceBase):
    """Blowup of P^2 in points, basis (H, E_1, ..., E_n), with a boundary cycle."""

    def __init__(self, n_points: int, boundary: Sequence[tuple[str, Mapping[str, Rational]]],
                 curves: Sequence[tuple[str, Mapping[str, Rational]]] = (),
                 name: str = "lattice"):
        self.name = name
        self.basis = ("H",) + tuple(f"E{i}" for i in range(1, n_points + 1))
        size = len(self.basis)
        self.form = tuple(
            tuple(Fraction(0 if i != j else (1 if i == 0 else -1)) for j in range(size))
            for i in range(size))
        self.named = {}
        self._boundary = [(n, self.cls(c)) for n, c in boundary]
        for n, c in self._boundary:
            self.named[n] = c
        self._curves = [(n, self.cls(c)) for n, c in curves]

    def boundary(self) -> list[tuple[str, DivisorClass]]:
        return list(self._boundary)

    def kahler_test_curves(self) -> list[tuple[str, DivisorClass]]:
        seen = {n for n, _ in self._boundary}
        return self.boundary() + [(n, c) for n, c in self._curves if n not in seen]

    def __repr__(self):
        return f"LatticeSurface({self.name!r}, basis={self.basis})"


Surface = Union[ToricSurface, LatticeSurface]


def build_toric_surface(rays: Iterable[Sequence[int]], names: Sequence[str] | None = None,
                        name: str = "toric",
                        named: Mapping[str, Mapping[str, Rational]] | None = None) -> ToricSurface:
    """Validate a fan and compute its intersection form.

    ``named`` maps extra class names (``"H"``, ``"F"``...) to combinations of
    boundary divisors.
    """
    rays = tuple((int(v[0]), int(v[1])) for v in rays)
    n = len(rays)
    if n < 3:
        raise DegenerateFan(f"a complete fan needs at least 3 rays, got {n}")
    if names is None:
        names = tuple(f"D{i + 1}" for i in range(n))
    names = tuple(names)
    if len(names) != n or len(set(names)) != n:
        raise InvalidFan("one distinct name per ray is required")
    if len(set(rays)) != n:
        raise InvalidFan("repeated ray")
    for v in rays:
        if gcd(abs(v[0]), abs(v[1])) != 1:
            raise NonPrimitiveRay(f"ray {v} is not primitive")
    for i in range(n):
        d = _det(rays[i], rays[(i + 1) % n])
        if abs(d) != 1:
            raise NonSmoothFan(f"det({rays[i]}, {rays[(i + 1) % n]}) = {d}, expected +-1")
        if d != 1:
            raise InvalidFan(f"rays {rays[i]}, {rays[(i + 1) % n]} are not in counterclockwise order")
    wraps = sum(1 for i in range(n) if not _angle_less(rays[i], rays[(i + 1) % n]))
    if wraps != 1:
        raise InvalidFan(f"rays wind {wraps} times around the origin")

    selfint = []
    for i in range(n):
        prev, nxt, v = rays[i - 1], rays[(i + 1) % n], rays[i]
        s = (prev[0] + nxt[0], prev[1] + nxt[1])
        if _det(s, v) != 0:
            raise NonSmoothFan(f"fan relation fails at ray {v}")
        num = s[0] * v[0] + s[1] * v[1]
        den = v[0] * v[0] + v[1] * v[1]
        if num % den:
            raise NonSmoothFan(f"fan relation at ray {v} is not integral")
        selfint.append(-(num // den))

    mat = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        mat[i][i] = Fraction(selfint[i])
        j = (i + 1) % n
        mat[i][j] = mat[j][i] = Fraction(1)
    form = tuple(tuple(row) for row in mat)
    S = ToricSurface(Fan2D(rays, names), form, tuple(selfint), name=name)
    for key, spec in (named or {}).items():
        S.named[key] = S.cls(spec)
    return S


def _vec(S: Surface, A) -> tuple[Fraction, ...]:
    if isinstance(A, KahlerClass):
        A = A.cls
    if not isinstance(A, DivisorClass):
        A = S.cls(A)
    if A.basis != S.basis:
        raise BasisMismatch(f"class over {A.basis}, surface {S.name} uses {S.basis}")
    return A.coeffs


def intersection_number(S: Surface, A, B) -> Fraction:
    a, b = _vec(S, A), _vec(S, B)
    total = Fraction(0)
    for i, ai in enumerate(a):
        if ai == 0:
            continue
        row = S.form[i]
        for j, bj in enumerate(b):
            if bj:
                total += ai * row[j] * bj
    return total


def anticanonical_class(S: Surface) -> DivisorClass:
    if isinstance(S, ToricSurface):
        return DivisorClass(tuple(Fraction(1) for _ in S.basis), S.basis)
    coeffs = [Fraction(3)] + [Fraction(-1)] * (len(S.basis) - 1)
    return DivisorClass(tuple(coeffs), S.basis)


def canonical_class(S: Surface) -> DivisorClass:
    """K_X; for a toric surface this is minus the sum of the boundary divisors."""
    return -anticanonical_class(S)


def degree(S: Surface, omega, C) -> Fraction:
    """Degree of the polarisation on C at unit scale."""
    return intersection_number(S, omega, C)


def is_kahler(S: Surface, omega) -> bool:
    return all(degree(S, omega, C) > 0 for _, C in S.kahler_test_curves())


def is_nef(S: Surface, omega) -> bool:
    return all(degree(S, omega, C) >= 0 for _, C in S.kahler_test_curves())


def slope_mu(S: Surface, omega) -> Fraction:
    """mu(X) = -K.omega / omega^2."""
    w2 = intersection_number(S, omega, omega)
    if w2 == 0:
        raise DegenerateClass("omega^2 = 0")
    return intersection_number(S, anticanonical_class(S), omega) / w2


def intersection_matrix(S: Surface, classes: Sequence[DivisorClass]) -> list[list[Fraction]]:
    return [[intersection_number(S, a, b) for b in classes] for a in classes]
