"""Residue pairings, Donaldson-Futaki invariants and slopes, on both sides of the mirror.

Every quantity has an intersection-theoretic value (exact rationals) and a
mirror value: a sum over critical points of ``f(p) / H(p)`` with
``H = (xy)^2 det(Hessian W)``.  Asymptotically each critical family carries a
contribution ``c e^{2 pi k gamma}``; families with ``gamma = 0`` are the ones
the k -> infinity limit concentrates on.

Theta functions of Kahler classes are taken without the overall factor of k,
so a slope comparison reads ``k mu_{sk} = sum f_d/H / sum f_r/H``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import mpmath

from .critical_solver import CriticalPoint, critical_points, tropical_critical_points
from .errors import (
    BasisMismatch,
    DegeneratePoint,
    DivergentRatio,
    EmptyScalar,
    LeadingCancellation,
    PositiveRate,
    ZeroDenominator,
    ZeroDenominatorLimit,
    ZeroWeight,
)
from .exp_laurent import CriticalAsymptotics, ExpLaurentPoly, ExpScalar, restrict_along, to_mpc
from .lg_mirror import MirrorChart, class_theta
from .surface_geometry import (
    DivisorClass,
    Surface,
    anticanonical_class,
    canonical_class,
    frac,
    intersection_number,
    slope_mu,
)

REAL_CUTOFF = mpmath.mpf("1e-8")
EQUAL_WEIGHT = mpmath.mpf("1e-8")


def as_real(z):
    """Drop an imaginary part below 1e-8 of the magnitude."""
    z = to_mpc(z)
    if abs(z.imag) <= REAL_CUTOFF * abs(z):
        return z.real
    return z


# -- leading-order arithmetic -------------------------------------------------

@dataclass(frozen=True)
class Lead:
    """Leading term ``amp * e^{2 pi k rate}``; rate None means identically zero."""

    amp: mpmath.mpc
    rate: Fraction | None

    @classmethod
    def of(cls, s: ExpScalar) -> "Lead":
        try:
            a, r = s.leading()
        except EmptyScalar:
            return cls(mpmath.mpc(0), None)
        return cls(a, r)

    @property
    def is_zero(self) -> bool:
        return self.rate is None

    def __mul__(self, other: "Lead") -> "Lead":
        if self.is_zero or other.is_zero:
            return Lead(mpmath.mpc(0), None)
        return Lead(self.amp * other.amp, self.rate + other.rate)

    def __truediv__(self, other: "Lead") -> "Lead":
        if other.is_zero:
            raise LeadingCancellation("division by a leading term that vanishes")
        if self.is_zero:
            return self
        return Lead(self.amp / other.amp, self.rate - other.rate)

    def __add__(self, other: "Lead") -> "Lead":
        if self.is_zero:
            return other
        if other.is_zero or self.rate > other.rate:
            return self
        if other.rate > self.rate:
            return other
        amp = self.amp + other.amp
        if abs(amp) <= mpmath.mpf(2) ** -64 * max(abs(self.amp), abs(other.amp)):
            raise LeadingCancellation(f"leading amplitudes cancel at rate {self.rate}")
        return Lead(amp, self.rate)

    def limit(self):
        """Value of the term as k -> infinity."""
        if self.is_zero or self.rate < 0:
            return mpmath.mpc(0)
        if self.rate > 0:
            raise DivergentRatio(f"term grows like e^(2 pi k {self.rate})")
        return self.amp


def lead_along(P: ExpLaurentPoly, a: CriticalAsymptotics) -> Lead:
    return Lead.of(restrict_along(P, a))


def hessian_factor(chart: MirrorChart, a: CriticalAsymptotics) -> Lead:
    """Leading term of 1/((xy)^2 det Hessian) along a family."""
    h = lead_along(chart.hessian_poly(), a)
    if h.is_zero:
        raise LeadingCancellation(f"Hessian leading term cancels along {a.label()}")
    return Lead(mpmath.mpc(1), Fraction(0)) / h


def asymptotic_contribution(f: ExpLaurentPoly, chart: MirrorChart, a: CriticalAsymptotics) -> Lead:
    """Leading (amplitude, rate) of f/H along the family a."""
    return lead_along(f, a) * hessian_factor(chart, a)


def theta_ratio_limit(f: ExpLaurentPoly, g: ExpLaurentPoly, a: CriticalAsymptotics):
    """lim f/g along a: amplitude ratio at equal rates, 0 if f decays faster."""
    lf, lg = lead_along(f, a), lead_along(g, a)
    if lg.is_zero:
        raise DivergentRatio(f"denominator vanishes identically along {a.label()}")
    if lf.is_zero or lf.rate < lg.rate:
        return mpmath.mpc(0)
    if lf.rate > lg.rate:
        raise DivergentRatio(f"ratio grows like e^(2 pi k {lf.rate - lg.rate}) along {a.label()}")
    return lf.amp / lg.amp


# -- finite k ----------------------------------------------------------------

def omega_theta(chart: MirrorChart, omega=None) -> ExpLaurentPoly:
    """Theta function of a class (default: the chart's Kahler class), no factor k.

    ``omega`` may also be a mapping of boundary names to weights, to pick a
    specific theta combination.
    """
    return class_theta(chart, chart.omega if omega is None else omega)


def residue_contribution(f: ExpLaurentPoly, chart: MirrorChart, p: CriticalPoint) -> mpmath.mpc:
    """f(p) / ((p1 p2)^2 det Hessian W(p))."""
    if not p.nondegenerate:
        raise DegeneratePoint(f"critical point {p.coords} is degenerate")
    if f.is_zero():
        return mpmath.mpc(0)
    return f.evaluate(p.k, p.coords) / p.hessian_poly


def _points(chart, k, points):
    if points is not None:
        return points
    return critical_points(chart, k, allow_walls=True)


def _sum(vals) -> mpmath.mpc:
    vals = sorted(vals, key=abs)
    return mpmath.fsum(vals)


def residue_pairing(f: ExpLaurentPoly, g: ExpLaurentPoly, chart: MirrorChart, k,
                    points: Sequence[CriticalPoint] | None = None) -> mpmath.mpc:
    """Sum over all critical points of f g / H at level k."""
    if f.is_zero() or g.is_zero():
        return mpmath.mpc(0)
    fg = f * g
    return _sum(residue_contribution(fg, chart, p) for p in _points(chart, k, points))


def pairing_matrix(chart: MirrorChart, k, names: Sequence[str] | None = None):
    """Residue pairings of boundary thetas and the matching intersection numbers."""
    names = list(names or chart.thetas)
    pts = critical_points(chart, k, allow_walls=True)
    S = chart.surface
    mirror = [[residue_pairing(chart.theta(a), chart.theta(b), chart, k, pts) for b in names] for a in names]
    bnd = dict(S.boundary())
    exact = [[intersection_number(S, bnd[a], bnd[b]) for b in names] for a in names]
    return names, mirror, exact


def volume_at(chart: MirrorChart, theta_omega: ExpLaurentPoly, p: CriticalPoint) -> mpmath.mpc:
    """Local volume theta_omega^2 / H at p."""
    return residue_contribution(theta_omega * theta_omega, chart, p)


# -- extrapolation ------------------------------------------------------------

@dataclass(frozen=True)
class Extrapolation:
    limit: mpmath.mpf
    rate: mpmath.mpf | None      # delta in L + A e^{-2 pi k delta}
    fitted: bool


def extrapolate(ks: Sequence, values: Sequence) -> Extrapolation:
    """Fit L + A r^k (r = e^{-2 pi delta}) through the last three samples.

    Falls back to the last value when the differences are negligible or the
    samples are not monotone-geometric.
    """
    vals = [as_real(v) for v in values]
    if len(vals) < 3:
        return Extrapolation(vals[-1], None, False)
    if any(isinstance(v, mpmath.mpc) for v in vals[-3:]):
        vals = [to_mpc(v).real for v in vals]
    k1, k2, k3 = [mpmath.mpf(k) for k in ks[-3:]]
    v1, v2, v3 = vals[-3:]
    d1, d2 = v2 - v1, v3 - v2
    scale = max(1, abs(v3))
    if abs(d1) <= mpmath.mpf("1e-25") * scale or abs(d2) <= mpmath.mpf("1e-25") * scale:
        return Extrapolation(v3, None, False)
    rho = d2 / d1

    def g(r):
        return (r ** k3 - r ** k2) / (r ** k2 - r ** k1)

    hi_val = (k3 - k2) / (k2 - k1)
    if not (0 < rho < hi_val):
        return Extrapolation(v3, None, False)
    lo, hi = mpmath.mpf(0), mpmath.mpf(1)
    for _ in range(200):
        mid = (lo + hi) / 2
        if g(mid) < rho:
            lo = mid
        else:
            hi = mid
    r = (lo + hi) / 2
    if r <= 0 or r >= 1:
        return Extrapolation(v3, None, False)
    A = d1 / (r ** k2 - r ** k1)
    L = v3 - A * r ** k3
    return Extrapolation(L, -mpmath.log(r) / (2 * mpmath.pi), True)


# -- reports -----------------------------------------------------------------

def _num(x) -> str:
    return mpmath.nstr(x, 40, strip_zeros=True)


def _cnum(z) -> list[str]:
    z = to_mpc(z)
    return [_num(z.real), _num(z.imag)]


@dataclass(frozen=True)
class StabilityReport:
    intersection: Fraction | None
    mirror: tuple[tuple[str, mpmath.mpc], ...]          # (k, value)
    limit: mpmath.mpc
    concentrated: bool
    families: tuple[dict, ...]                         # beta, alpha, c, gamma
    concentrated_limit: mpmath.mpc | None = None
    verdict: str | None = None
    margin: Fraction | None = None
    notes: tuple[str, ...] = ()

    def concentration(self) -> list[dict]:
        return [f for f in self.families if f["gamma"] == 0]

    def to_json(self) -> dict:
        return {
            "intersection": None if self.intersection is None else str(self.intersection),
            "mirror": [{"k": k, "value": _cnum(v)} for k, v in self.mirror],
            "limit": _cnum(self.limit),
            "concentrated": self.concentrated,
            "concentrated_limit": None if self.concentrated_limit is None else _cnum(self.concentrated_limit),
            "families": [{
                "family": f["family"],
                "beta": [str(b) for b in f["beta"]],
                "alpha": [_cnum(a) for a in f["alpha"]],
                "c": _cnum(f["c"]),
                "gamma": None if f["gamma"] is None else str(f["gamma"]),
            } for f in self.families],
            "verdict": self.verdict,
            "margin": None if self.margin is None else str(self.margin),
            "notes": list(self.notes),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    @classmethod
    def from_json(cls, d: Mapping) -> "StabilityReport":
        def c(v):
            return mpmath.mpc(mpmath.mpf(v[0]), mpmath.mpf(v[1]))
        fams = tuple({
            "family": f["family"],
            "beta": tuple(Fraction(b) for b in f["beta"]),
            "alpha": tuple(c(a) for a in f["alpha"]),
            "c": c(f["c"]),
            "gamma": None if f["gamma"] is None else Fraction(f["gamma"]),
        } for f in d["families"])
        return cls(
            intersection=None if d["intersection"] is None else Fraction(d["intersection"]),
            mirror=tuple((m["k"], c(m["value"])) for m in d["mirror"]),
            limit=c(d["limit"]),
            concentrated=d["concentrated"],
            families=fams,
            concentrated_limit=None if d["concentrated_limit"] is None else c(d["concentrated_limit"]),
            verdict=d["verdict"],
            margin=None if d["margin"] is None else Fraction(d["margin"]),
            notes=tuple(d["notes"]),
        )

    @classmethod
    def loads(cls, text: str) -> "StabilityReport":
        return cls.from_json(json.loads(text))


def _k_label(k) -> str:
    k = frac(k) if not isinstance(k, mpmath.mpf) else k
    return str(k) if isinstance(k, Fraction) else mpmath.nstr(k, 15)


def _family_rows(f: ExpLaurentPoly, chart: MirrorChart, fams) -> list[dict]:
    rows = []
    for a in fams:
        ld = asymptotic_contribution(f, chart, a)
        rows.append({"family": a.family, "beta": a.beta, "alpha": a.alpha,
                     "c": ld.amp, "gamma": ld.rate, "_a": a})
    return rows


def _concentration(rows) -> tuple[bool, list[dict]]:
    pos = [r for r in rows if r["gamma"] is not None and r["gamma"] > 0]
    if pos:
        r = pos[0]
        raise PositiveRate(f"contribution grows like e^(2 pi k {r['gamma']}) at "
                           f"beta=({r['beta'][0]}, {r['beta'][1]})")
    zero = [r for r in rows if r["gamma"] == 0]
    if len(zero) == 1:
        return True, zero
    if zero:
        c0 = zero[0]["c"]
        same = all(abs(r["c"] - c0) <= EQUAL_WEIGHT * max(abs(c0), abs(r["c"])) for r in zero)
        return same, zero
    return False, zero


def _public(rows):
    return tuple({k: v for k, v in r.items() if not k.startswith("_")} for r in rows)


# -- Donaldson-Futaki ---------------------------------------------------------

@dataclass(frozen=True)
class TestConfigQuadratic:
    """F = sum_ij a_ij D_i . D_j over the surface's divisor basis."""

    __test__ = False  # not a pytest class despite the name

    basis: tuple[str, ...]
    a: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        n = len(self.basis)
        if len(self.a) != n or any(len(row) != n for row in self.a):
            raise BasisMismatch("quadratic form does not match its basis")
        for i in range(n):
            for j in range(n):
                if self.a[i][j] != self.a[j][i]:
                    raise BasisMismatch("test configuration quadratic must be symmetric")

    @classmethod
    def zero(cls, S: Surface) -> "TestConfigQuadratic":
        n = len(S.basis)
        return cls(tuple(S.basis), tuple((Fraction(0),) * n for _ in range(n)))

    @classmethod
    def from_products(cls, S: Surface, terms) -> "TestConfigQuadratic":
        """Symmetrised sum of coef * (A x B) for (coef, A, B) triples."""
        n = len(S.basis)
        M = [[Fraction(0)] * n for _ in range(n)]
        for coef, A, B in terms:
            u, v = S.cls(A).coeffs, S.cls(B).coeffs
            coef = frac(coef)
            for i in range(n):
                for j in range(n):
                    M[i][j] += coef * (u[i] * v[j] + u[j] * v[i]) / 2
        return cls(tuple(S.basis), tuple(tuple(r) for r in M))

    def is_zero(self) -> bool:
        return all(v == 0 for row in self.a for v in row)

    def theta(self, chart: MirrorChart) -> ExpLaurentPoly:
        """sum_ij a_ij theta_i theta_j, one theta per basis class."""
        S = chart.surface
        th = [class_theta(chart, S.unit(n)) for n in self.basis]
        out = ExpLaurentPoly()
        n = len(self.basis)
        for i in range(n):
            for j in range(n):
                if self.a[i][j]:
                    out = out + (th[i] * th[j]) * self.a[i][j]
        return out


def df_intersection(S: Surface, tc: TestConfigQuadratic) -> Fraction:
    if tuple(tc.basis) != tuple(S.basis):
        raise BasisMismatch(f"test configuration basis {tc.basis} != surface basis {tuple(S.basis)}")
    total = Fraction(0)
    for i, a in enumerate(tc.basis):
        for j, b in enumerate(tc.basis):
            if tc.a[i][j]:
                total += tc.a[i][j] * intersection_number(S, S.unit(a), S.unit(b))
    return total


def _mirror_sum(f: ExpLaurentPoly, chart: MirrorChart, k_list, fams):
    out = []
    for k in k_list:
        pts = critical_points(chart, k, allow_walls=True, families=fams)
        out.append((_k_label(k), _sum(residue_contribution(f, chart, p) for p in pts)))
    return out


def df_mirror(chart: MirrorChart, tc: TestConfigQuadratic, k_list: Sequence) -> StabilityReport:
    """Mirror-side DF: sum over critical points of f/H, f = sum a_ij theta_i theta_j."""
    S = chart.surface
    exact = df_intersection(S, tc)
    if tc.is_zero():
        return StabilityReport(exact, tuple((_k_label(k), mpmath.mpc(0)) for k in k_list),
                               mpmath.mpc(0), True, (), mpmath.mpc(0))
    f = tc.theta(chart)
    fams = tropical_critical_points(chart, allow_walls=True)
    rows = _family_rows(f, chart, fams)
    conc, zero = _concentration(rows)
    mirror = _mirror_sum(f, chart, k_list, fams)
    ext = extrapolate([mpmath.mpf(frac(k).numerator) / frac(k).denominator for k in k_list],
                      [v for _, v in mirror])
    climit = _sum(r["c"] for r in zero) if zero else mpmath.mpc(0)
    return StabilityReport(exact, tuple(mirror), to_mpc(ext.limit), conc, _public(rows),
                           as_real(climit))


# -- slopes --------------------------------------------------------------------

def quotient_slope_intersection(S: Surface, omega, Z, c) -> Fraction:
    """3(2 w.Z - c(K.Z + Z^2)) / (2c(3 w.Z - c Z^2))."""
    omega, Z, c = S.cls(omega), S.cls(Z), frac(c)
    K = canonical_class(S)
    wZ, ZZ, KZ = (intersection_number(S, omega, Z), intersection_number(S, Z, Z),
                  intersection_number(S, K, Z))
    den = 2 * c * (3 * wZ - c * ZZ)
    if den == 0:
        raise ZeroDenominator(f"quotient slope denominator vanishes at c={c}")
    return 3 * (2 * wZ - c * (KZ + ZZ)) / den


def destabilizes(S: Surface, omega, Z, c) -> tuple[bool, Fraction]:
    """(mu_c(O_Z) < mu(X), mu(X) - mu_c(O_Z))."""
    mu_c = quotient_slope_intersection(S, omega, Z, c)
    mu = slope_mu(S, S.cls(omega))
    return mu_c < mu, mu - mu_c


def slope_integrands(chart: MirrorChart, Z, s, omega=None, z_theta: ExpLaurentPoly | None = None):
    """Numerator and denominator integrands of the mirror quotient slope.

    f_d = th_Z 3(2 th_w + s(W - th_Z)),  f_r = th_Z 2s(3 th_w - s th_Z).
    """
    s = frac(s)
    tw = omega_theta(chart, omega)
    tz = z_theta if z_theta is not None else class_theta(chart, Z)
    W = chart.potential
    f_d = tz * ((tw * 2 + (W - tz) * s) * 3)
    f_r = tz * ((tw * 3 - tz * s) * (2 * s))
    return f_d, f_r


def quotient_slope_mirror(chart: MirrorChart, Z, s, k_list: Sequence, omega=None,
                          z_theta: ExpLaurentPoly | None = None) -> StabilityReport:
    """k mu_{sk}(O_Z) from the mirror, with per-family leading data.

    ``limit`` extrapolates the full critical-point sums; ``concentrated_limit``
    uses only the families with gamma = 0 (sum of c_d over sum of c_r).
    """
    S = chart.surface
    s = frac(s)
    f_d, f_r = slope_integrands(chart, Z, s, omega, z_theta)
    fams = tropical_critical_points(chart, allow_walls=True)
    rows_d = _family_rows(f_d, chart, fams)
    rows_r = _family_rows(f_r, chart, fams)
    notes = []
    conc_d, zero_d = _concentration(rows_d)
    conc_r, zero_r = _concentration(rows_r)
    cl = None
    if zero_r:
        den = _sum(r["c"] for r in zero_r)
        if abs(den) == 0:
            raise ZeroDenominatorLimit("concentrated denominator amplitudes sum to zero")
        cl = as_real(_sum(r["c"] for r in zero_d) / den)
    vals = []
    for k in k_list:
        pts = critical_points(chart, k, allow_walls=True, families=fams)
        d = _sum(residue_contribution(f_d, chart, p) for p in pts)
        r = _sum(residue_contribution(f_r, chart, p) for p in pts)
        if r == 0:
            raise ZeroDenominatorLimit(f"denominator sum vanishes at k={k}")
        vals.append((_k_label(k), d / r))
    ext = extrapolate([mpmath.mpf(frac(k).numerator) / frac(k).denominator for k in k_list],
                      [v for _, v in vals])
    exact = verdict = margin = None
    omega_cls = None if (omega is not None and isinstance(omega, Mapping)
                         and all(n in chart.thetas for n in omega)) else chart.omega
    if omega_cls is not None and z_theta is None:
        try:
            exact = quotient_slope_intersection(S, omega_cls, Z, s)
            bad, margin = destabilizes(S, omega_cls, Z, s)
            verdict = f"DESTABILIZES (margin {margin})" if bad else "stable against Z"
        except ZeroDenominator:
            notes.append("intersection-side denominator vanishes")
    else:
        notes.append("custom theta combination: no intersection-side value")
    if not chart.toric:
        notes.append("critical points outside the chart taken to contribute 0")
    fams_out = []
    for rd, rr in zip(rows_d, rows_r):
        row = {k: v for k, v in rd.items() if not k.startswith("_")}
        row["c_r"], row["gamma_r"] = rr["c"], rr["gamma"]
        fams_out.append(row)
    rows_pub = tuple({k: v for k, v in r.items() if k in ("family", "beta", "alpha", "c", "gamma")}
                     for r in fams_out)
    return StabilityReport(exact, tuple(vals), to_mpc(ext.limit), conc_d and conc_r, rows_pub,
                           cl, verdict, margin, tuple(notes))


def per_family_slopes(chart: MirrorChart, Z, s, omega=None,
                      z_theta: ExpLaurentPoly | None = None) -> list[tuple[CriticalAsymptotics, object]]:
    """lim f_d/f_r along each family (the Hessian cancels); None where both vanish."""
    f_d, f_r = slope_integrands(chart, Z, s, omega, z_theta)
    out = []
    for a in tropical_critical_points(chart, allow_walls=True):
        try:
            out.append((a, as_real(theta_ratio_limit(f_d, f_r, a))))
        except DivergentRatio:
            out.append((a, None))
    return out


# -- localized Futaki ------------------------------------------------------------

@dataclass(frozen=True)
class FutakiFixedDivisor:
    cls: DivisorClass
    moment: Fraction | float       # mu_a(D) for the unscaled class
    weight: Fraction | float       # <w^D, a>
    name: str = ""

    def __post_init__(self):
        if self.weight == 0:
            raise ZeroWeight(f"fixed divisor {self.name or self.cls} has zero weight")

    @property
    def mu_hat(self):
        return mpmath.mpf(frac(self.moment).numerator) / frac(self.moment).denominator / _mp(self.weight)


def _mp(x) -> mpmath.mpf:
    x = frac(x)
    return mpmath.mpf(x.numerator) / x.denominator


def futaki_divisor_contribution(S: Surface, omega, D: FutakiFixedDivisor, k=1):
    """4 pi (k w).D mu_k - 4 pi^2 (mu_k^2 / weight)(c1.D + D.D), mu_k = k mu."""
    omega = S.cls(omega)
    k = _mp(k)
    mu_k = k * _mp(D.moment)
    w = _mp(D.weight)
    wD = _mp(intersection_number(S, omega, D.cls))
    c1D = _mp(intersection_number(S, anticanonical_class(S), D.cls))
    DD = _mp(intersection_number(S, D.cls, D.cls))
    return 4 * mpmath.pi * k * wD * mu_k - 4 * mpmath.pi ** 2 * mu_k ** 2 / w * (c1D + DD)


def futaki_integrand(chart: MirrorChart, D: FutakiFixedDivisor, omega=None,
                     d_theta: ExpLaurentPoly | None = None) -> ExpLaurentPoly:
    """th_D (th_w - pi mu_hat (W + th_D)), the k-free mirror integrand of a fixed divisor."""
    tw = omega_theta(chart, omega)
    td = d_theta if d_theta is not None else class_theta(chart, D.cls)
    mh = D.mu_hat
    return td * (tw - (chart.potential + td).scalar_mul(mpmath.pi * mh))


def futaki_mirror_sum(chart: MirrorChart, D: FutakiFixedDivisor, k, omega=None):
    """Finite-k mirror value of futaki_divisor_contribution (sum over all critical points)."""
    f = futaki_integrand(chart, D, omega)
    pts = critical_points(chart, k, allow_walls=True)
    kk = _mp(k) if not isinstance(k, mpmath.mpf) else k
    mu_k = kk * _mp(D.moment)
    return as_real(4 * mpmath.pi * mu_k * kk * _sum(residue_contribution(f, chart, p) for p in pts))


def futaki_mirror_ratio(chart: MirrorChart, D1: FutakiFixedDivisor, D2: FutakiFixedDivisor,
                        points: Sequence[CriticalAsymptotics], reference: CriticalAsymptotics,
                        omega=None):
    """Sum over p in ``points`` of kappa(p, p') times the theta ratio, p' = ``reference``.

    Since kappa(p, p') = th_w(p) H(p') / (th_w(p') H(p)), each term is the ratio
    of the leading contributions of the D1 integrand at p and the D2 integrand
    at p', which is how it is evaluated.
    """
    f1 = futaki_integrand(chart, D1, omega)
    f2 = futaki_integrand(chart, D2, omega)
    den = asymptotic_contribution(f2, chart, reference)
    if den.is_zero:
        raise DegeneratePoint("reference contribution vanishes at leading order")
    total = Lead(mpmath.mpc(0), None)
    for p in points:
        total = total + asymptotic_contribution(f1, chart, p)
    r = total / den
    if r.is_zero:
        return mpmath.mpf(0)
    if r.rate != 0:
        if r.rate < 0:
            return mpmath.mpf(0)
        raise DivergentRatio(f"Futaki ratio grows like e^(2 pi k {r.rate})")
    return as_real(r.amp)
