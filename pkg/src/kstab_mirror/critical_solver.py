"""Critical points of mirror potentials: tropical leading data and finite-k points.

A critical point of W is tracked as ``x_j ~ alpha_j e^{2 pi k beta_j}``.  The
rate vector beta is found by rate matching: along every direction u in the
character lattice, the monomials of W with nonzero u-derivative whose rate
``rate_i + <m_i, beta>`` is maximal must number at least two, so that their
leading terms can cancel.  The amplitudes alpha then solve the leading system
``sum_{i in S_u} <u, m_i> a_i alpha^{m_i} = 0``.

A beta where more rates tie than the leading system needs is a wall: several
families collide there and the chamber structure changes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Callable, Iterable, Sequence

import mpmath
import sympy

from . import elimination as el
from .errors import (
    IllConditioned,
    IncompleteCriticalSet,
    NoConvergence,
    NoSolutions,
    WallDetected,
)
from .exp_laurent import CriticalAsymptotics, ExpLaurentPoly, _as_k, to_mpc
from .lg_mirror import MirrorChart

Exponent = tuple[int, int]
Vec = tuple[Fraction, Fraction]

GRAD_TOL = mpmath.mpf("1e-30")
DEGENERACY = mpmath.mpf("1e-20")
MAX_NEWTON = 200


# -- tropical data ------------------------------------------------------------

@dataclass(frozen=True)
class _Mono:
    m: Exponent
    rate: Fraction
    amp: mpmath.mpc


def _monomials(W: ExpLaurentPoly) -> list[_Mono]:
    out = []
    for m, s in sorted(W.monomials.items()):
        if m == (0, 0) or s.is_zero():
            continue
        amp, rate = s.leading()
        out.append(_Mono(m, rate, amp))
    return out


def _primitive(u: tuple[int, int]) -> tuple[int, int]:
    g = math.gcd(abs(u[0]), abs(u[1])) or 1
    u = (u[0] // g, u[1] // g)
    if u[0] < 0 or (u[0] == 0 and u[1] < 0):
        u = (-u[0], -u[1])
    return u


def _directions(monos: Sequence[_Mono]) -> list[tuple[int, int]]:
    dirs = [(1, 0), (0, 1)]
    for mo in monos:
        u = _primitive((-mo.m[1], mo.m[0]))
        if u not in dirs:
            dirs.append(u)
    return dirs


def _dot(u, v) -> Fraction:
    return u[0] * v[0] + u[1] * v[1]


def _value(mo: _Mono, beta: Vec) -> Fraction:
    return mo.rate + _dot(mo.m, beta)


def _argmax(monos: Sequence[_Mono], u, beta: Vec) -> tuple[list[int], Fraction | None]:
    """Indices attaining the top rate among monomials with <u, m> != 0, and the gap to the rest."""
    idx = [i for i, mo in enumerate(monos) if _dot(u, mo.m) != 0]
    if not idx:
        return [], None
    vals = {i: _value(monos[i], beta) for i in idx}
    top = max(vals.values())
    arg = [i for i in idx if vals[i] == top]
    rest = [v for i, v in vals.items() if v != top]
    return arg, (top - max(rest)) if rest else None


def _solve2(r1, c1, r2, c2) -> Vec | None:
    det = r1[0] * r2[1] - r1[1] * r2[0]
    if det == 0:
        return None
    return (Fraction(c1 * r2[1] - c2 * r1[1]) / det, Fraction(r1[0] * c2 - r2[0] * c1) / det)


def _candidate_betas(monos: Sequence[_Mono]) -> list[Vec]:
    ties = []
    for a, b in combinations(range(len(monos)), 2):
        ma, mb = monos[a], monos[b]
        row = (ma.m[0] - mb.m[0], ma.m[1] - mb.m[1])
        ties.append((row, mb.rate - ma.rate))
    seen = set()
    for (r1, c1), (r2, c2) in combinations(ties, 2):
        beta = _solve2(r1, c1, r2, c2)
        if beta is not None:
            seen.add(beta)
    return sorted(seen, key=lambda b: (-b[0], -b[1]))


def _rank(vectors: Iterable[tuple[int, int]]) -> int:
    vs = [v for v in vectors if v != (0, 0)]
    if not vs:
        return 0
    for v in vs[1:]:
        if vs[0][0] * v[1] - vs[0][1] * v[0] != 0:
            return 2
    return 1


def _tie_structure(monos, sets: Sequence[Sequence[int]]) -> tuple[int, int]:
    """(number of independent tie equations, rank of their difference vectors)."""
    parent = list(range(len(monos)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    diffs = []
    for S in sets:
        for a, b in zip(S, S[1:]):
            diffs.append((monos[a].m[0] - monos[b].m[0], monos[a].m[1] - monos[b].m[1]))
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[ra] = rb
    members = {i for S in sets for i in S}
    comps = {find(i) for i in members}
    return len(members) - len(comps), _rank(diffs)


@dataclass(frozen=True)
class TropicalFamily:
    """One rate vector with its argmax sets; alpha solutions are filled in later."""

    beta: Vec
    sets: tuple[tuple[tuple[int, int], tuple[int, ...]], ...]   # (direction, argmax indices)
    margins: tuple[Fraction, ...]
    extra_ties: int

    @property
    def on_wall(self) -> bool:
        return self.extra_ties > 0


def tropical_families(chart: MirrorChart | ExpLaurentPoly) -> tuple[list[_Mono], list[TropicalFamily]]:
    """Every isolated beta satisfying the rate-matching conditions, walls included."""
    W = chart.potential if isinstance(chart, MirrorChart) else chart
    monos = _monomials(W)
    dirs = _directions(monos)
    fams = []
    for beta in _candidate_betas(monos):
        arg = {u: _argmax(monos, u, beta) for u in dirs}
        if any(len(a) < 2 for a, _ in arg.values()):
            continue
        used = [(1, 0), (0, 1)]
        eqs, rank = _tie_structure(monos, [arg[u][0] for u in used])
        if rank < 2:
            used = dirs
            eqs, rank = _tie_structure(monos, [arg[u][0] for u in used])
        if rank < 2:
            continue   # beta moves in a line: not isolated at leading order
        margins = tuple(arg[u][1] for u in used if arg[u][1] is not None)
        fams.append(TropicalFamily(beta, tuple((u, tuple(arg[u][0])) for u in used),
                                   margins, eqs - rank))
    return monos, fams


def _leading_equations(monos, fam: TropicalFamily) -> list[dict[Exponent, mpmath.mpc]]:
    out = []
    for u, S in fam.sets:
        out.append({monos[i].m: _dot(u, monos[i].m) * monos[i].amp for i in S})
    return out


def _laurent_residual(eqs, point) -> mpmath.mpf:
    worst = mpmath.mpf(0)
    for eq in eqs:
        vals = [c * point[0] ** m[0] * point[1] ** m[1] for m, c in eq.items()]
        scale = mpmath.fsum(abs(v) for v in vals)
        if scale:
            worst = max(worst, abs(mpmath.fsum(vals)) / scale)
    return worst


def _polish_leading(eqs, point, steps: int = 8):
    """Least-squares Newton on the (possibly overdetermined) leading system in log coordinates."""
    a = [to_mpc(point[0]), to_mpc(point[1])]
    for _ in range(steps):
        rows, rhs = [], []
        for eq in eqs:
            vals = {m: c * a[0] ** m[0] * a[1] ** m[1] for m, c in eq.items()}
            scale = mpmath.fsum(abs(v) for v in vals.values()) or 1
            rhs.append(-mpmath.fsum(vals.values()) / scale)
            rows.append([mpmath.fsum(m[j] * v for m, v in vals.items()) / scale for j in range(2)])
        J = mpmath.matrix(rows)
        F = mpmath.matrix(rhs)
        try:
            JH = J.H
            dz = mpmath.lu_solve(JH * J, JH * F)
        except ZeroDivisionError:
            break
        a = [a[j] * mpmath.exp(dz[j]) for j in range(2)]
        if max(abs(dz[0]), abs(dz[1])) < mpmath.mpf(2) ** (-mpmath.mp.prec + 8):
            break
    return tuple(a)


def solve_leading_system(eqs: Sequence[dict[Exponent, mpmath.mpc]]) -> list[tuple[tuple[mpmath.mpc, mpmath.mpc], int]]:
    """Torus solutions of the leading system with cluster sizes."""
    polys = [el.to_polynomial({m: el.rationalize(c) for m, c in eq.items()}) for eq in eqs]
    tol = mpmath.mpf("1e-12")
    raw = el.solve_system(polys, {}, lambda x, y: _laurent_residual(eqs, (x, y)) < tol)
    polished = [_polish_leading(eqs, p) for p in raw]
    good = [p for p in polished if _laurent_residual(eqs, p) < mpmath.mpf(2) ** (-mpmath.mp.prec // 2)]
    # Repeated roots of the eliminants are expected; only a singular Jacobian
    # (or two solutions closer than the merge radius) marks a degenerate one.
    merged = el.dedupe(good, rel=mpmath.mpf("1e-40"))
    clusters = el.dedupe([p for p, _ in merged])
    out = []
    for p, n in clusters:
        out.append((p, n if n > 1 else (2 if _singular(eqs, p) else 1)))
    return out


def _singular(eqs, a) -> bool:
    rows = []
    for eq in eqs:
        vals = {m: c * a[0] ** m[0] * a[1] ** m[1] for m, c in eq.items()}
        scale = mpmath.fsum(abs(v) for v in vals.values()) or 1
        rows.append([mpmath.fsum(m[j] * v for m, v in vals.items()) / scale for j in range(2)])
    J = mpmath.matrix(rows)
    return abs(mpmath.det(J.H * J)) < mpmath.mpf("1e-20")


def _alpha_key(a):
    return tuple((float(mpmath.nint(z.real * 10 ** 9)), float(mpmath.nint(z.imag * 10 ** 9))) for z in a)


def tropical_critical_points(chart: MirrorChart | ExpLaurentPoly,
                             allow_walls: bool = False) -> list[CriticalAsymptotics]:
    """Leading asymptotics of every critical point, one record per alpha solution.

    Records sharing ``family`` have the same beta; ``multiplicity`` is the
    number of distinct alphas in that family.  On a wall the merged leading
    system is solved if ``allow_walls`` is set, otherwise WallDetected.
    """
    monos, fams = tropical_families(chart)
    out = []
    fam_id = 0
    for fam in fams:
        if fam.on_wall and not allow_walls:
            names = ", ".join(f"u={u}: {[monos[i].m for i in S]}" for u, S in fam.sets)
            raise WallDetected(f"beta=({fam.beta[0]}, {fam.beta[1]}) has {fam.extra_ties} "
                               f"extra rate tie(s): {names}")
        eqs = _leading_equations(monos, fam)
        try:
            sols = solve_leading_system(eqs)
        except IllConditioned:
            continue
        if not sols:
            continue
        system = tuple(frozenset(monos[i].m for i in S) for _, S in fam.sets)
        sols.sort(key=lambda t: _alpha_key(t[0]))
        for alpha, count in sols:
            out.append(CriticalAsymptotics(fam.beta, alpha, system, multiplicity=len(sols),
                                           family=fam_id, on_wall=fam.on_wall,
                                           degenerate=count > 1))
        fam_id += 1
    if not out:
        raise NoSolutions("no beta satisfies the rate-matching conditions")
    return out


# -- chambers and walls -------------------------------------------------------

@dataclass(frozen=True)
class ChamberReport:
    parameter: str
    value: Fraction | None
    families: tuple[dict, ...]
    wall: bool

    def margins(self) -> list[Fraction]:
        return [m for f in self.families for m in f["margins"]]


def validate_chamber(chart: MirrorChart | ExpLaurentPoly, families=None,
                     parameter: str = "", value=None) -> ChamberReport:
    """Argmax sets and strictness margins of every tropical family.

    A margin is the gap between the top rate and the best rate outside the
    argmax set.  Each surplus tie on a wall contributes a margin of 0.
    """
    monos, fams = tropical_families(chart)
    if families is not None:
        wanted = {a.beta for a in families}
        fams = [f for f in fams if f.beta in wanted]
    rows = []
    for f in fams:
        rows.append({
            "beta": f.beta,
            "argmax": {u: tuple(monos[i].m for i in S) for u, S in f.sets},
            "margins": tuple(f.margins) + (Fraction(0),) * f.extra_ties,
            "wall": f.on_wall,
        })
    return ChamberReport(parameter, None if value is None else Fraction(value), tuple(rows),
                         any(r["wall"] for r in rows))


def _signature(chart) -> tuple:
    monos, fams = tropical_families(chart)
    return tuple(sorted((f.on_wall, tuple((u, tuple(monos[i].m for i in S)) for u, S in f.sets))
                        for f in fams))


def scan_walls(builder: Callable[[Fraction], MirrorChart], lo, hi, step) -> list[Fraction]:
    """Parameter values in (lo, hi) where the tropical structure changes.

    Samples every ``step`` and bisects each change down to width ``step/64``.
    Exact rates make a wall that lands on a grid point show up as its own
    signature; such a point is reported directly.
    """
    lo, hi, step = Fraction(lo), Fraction(hi), Fraction(step)
    grid = []
    t = lo
    while t <= hi:
        grid.append(t)
        t += step
    sig = {t: _signature(builder(t)) for t in grid}
    walls = []
    for a, b in zip(grid, grid[1:]):
        sa, sb = sig[a], sig[b]
        if _is_wall(sa):
            if not walls or walls[-1] != a:
                walls.append(a)
            continue
        if sa == sb or _is_wall(sb):
            continue
        x, y = a, b
        while y - x > step / 64:
            mid = (x + y) / 2
            sm = _signature(builder(mid))
            if _is_wall(sm):
                x = y = mid
                break
            if sm == sa:
                x = mid
            else:
                y = mid
        walls.append((x + y) / 2)
    if grid and _is_wall(sig[grid[-1]]) and (not walls or walls[-1] != grid[-1]):
        walls.append(grid[-1])
    return [_snap(w, step) for w in walls]


def _is_wall(sig) -> bool:
    return any(w for w, _ in sig)


def _snap(w: Fraction, step: Fraction) -> Fraction:
    """Simplest rational within step/64 of w (walls are rational hyperplanes)."""
    tol = step / 64
    for d in range(1, 1000):
        n = round(w * d)
        if abs(Fraction(n, d) - w) <= tol:
            return Fraction(n, d)
    return w


# -- finite k -----------------------------------------------------------------

@dataclass(frozen=True)
class CriticalPoint:
    k: mpmath.mpf
    coords: tuple[mpmath.mpc, mpmath.mpc]
    grad_residual: mpmath.mpf
    hessian_det: mpmath.mpc          # det of the ordinary Hessian of W
    hessian_poly: mpmath.mpc         # (xy)^2 det, the residue denominator
    nondegenerate: bool
    family: int | None = None
    asymptotics: CriticalAsymptotics | None = field(default=None, compare=False)

    def to_record(self) -> dict:
        rec = {
            "k": mpmath.nstr(self.k, 15),
            "x": [mpmath.nstr(self.coords[0].real, 30), mpmath.nstr(self.coords[0].imag, 30)],
            "y": [mpmath.nstr(self.coords[1].real, 30), mpmath.nstr(self.coords[1].imag, 30)],
            "grad_residual": mpmath.nstr(self.grad_residual, 5),
            "hessian": [mpmath.nstr(self.hessian_det.real, 20), mpmath.nstr(self.hessian_det.imag, 20)],
            "family": self.family,
        }
        if self.asymptotics is not None:
            a = self.asymptotics
            rec["beta"] = [str(a.beta[0]), str(a.beta[1])]
            rec["alpha"] = [[mpmath.nstr(z.real, 15), mpmath.nstr(z.imag, 15)] for z in a.alpha]
        return rec


def _grad_eval(chart: MirrorChart, k, p):
    g1, g2 = chart.gradient()
    (v1, s1), (v2, s2) = g1.evaluate_with_scale(k, p), g2.evaluate_with_scale(k, p)
    return (v1, v2), (s1 or 1, s2 or 1)


def _residual(vals, scales) -> mpmath.mpf:
    return max(abs(vals[0]) / scales[0], abs(vals[1]) / scales[1])


def newton(chart: MirrorChart, k, seed, tol=GRAD_TOL, max_iter: int = MAX_NEWTON):
    """Damped Newton on (x W_x, y W_y) = 0 in log coordinates.

    Each equation is normalised by its sum of term magnitudes; the step is
    halved while the residual fails to decrease.
    """
    k = _as_k(k)
    (d11, d12), (_, d22) = chart.log_hessian()
    p = (to_mpc(seed[0]), to_mpc(seed[1]))
    vals, scales = _grad_eval(chart, k, p)
    res = _residual(vals, scales)
    for _ in range(max_iter):
        if res < tol:
            return p, res
        J = mpmath.matrix([[d11.evaluate(k, p) / scales[0], d12.evaluate(k, p) / scales[0]],
                           [d12.evaluate(k, p) / scales[1], d22.evaluate(k, p) / scales[1]]])
        F = mpmath.matrix([-vals[0] / scales[0], -vals[1] / scales[1]])
        try:
            dz = mpmath.lu_solve(J, F)
        except ZeroDivisionError:
            raise NoConvergence("singular Jacobian (degenerate point or wall)") from None
        t = mpmath.mpf(1)
        for _ in range(60):
            q = (p[0] * mpmath.exp(t * dz[0]), p[1] * mpmath.exp(t * dz[1]))
            v2, s2 = _grad_eval(chart, k, q)
            r2 = _residual(v2, s2)
            if r2 < res:
                break
            t /= 2
        else:
            break
        p, vals, scales, res = q, v2, s2, r2
    if res < tol:
        return p, res
    raise NoConvergence(f"Newton stalled at residual {mpmath.nstr(res, 5)}")


def _point(chart: MirrorChart, k, p, res, family=None, asym=None) -> CriticalPoint:
    k = _as_k(k)
    h, scale = chart.hessian_poly().evaluate_with_scale(k, p)
    nondeg = abs(h) > DEGENERACY * scale
    det = h / (p[0] * p[1]) ** 2
    return CriticalPoint(k, p, res, det, h, bool(nondeg), family, asym)


def refine_at_k(chart: MirrorChart, a: CriticalAsymptotics, k) -> CriticalPoint:
    """Finite-k critical point continuing the leading data ``a``."""
    p, res = newton(chart, k, a.seed(k))
    return _point(chart, k, p, res, a.family, a)


def critical_points(chart: MirrorChart, k, allow_walls: bool = False,
                    families: Sequence[CriticalAsymptotics] | None = None) -> list[CriticalPoint]:
    """All critical points at level k, refined from the tropical families.

    The count is checked against the chart's expected number (the number of
    rays for toric charts); a shortfall or two families landing on the same
    point raises IncompleteCriticalSet.
    """
    if families is None:
        families = tropical_critical_points(chart, allow_walls=allow_walls)
    pts = [refine_at_k(chart, a, k) for a in families]
    uniq = el.dedupe([p.coords for p in pts], rel=mpmath.mpf("1e-15"))
    if len(uniq) != len(pts):
        raise IncompleteCriticalSet(f"{len(pts)} families converged to only {len(uniq)} points")
    want = chart.expected_count()
    if want is not None and len(pts) != want:
        raise IncompleteCriticalSet(f"found {len(pts)} critical points, expected {want}")
    return pts


def _lcm_denominator(polys: Iterable[ExpLaurentPoly]) -> int:
    L = 1
    for P in polys:
        for _, r, _ in P.terms():
            L = L * r.denominator // math.gcd(L, r.denominator)
    return L


def _sympy_system(polys: Sequence[ExpLaurentPoly], L: int) -> list[sympy.Expr]:
    out = []
    for P in polys:
        lo = min((r for _, r, _ in P.terms()), default=Fraction(0))
        terms: dict[Exponent, sympy.Expr] = {}
        for m, r, a in P.terms():
            e = int((r - lo) * L)
            terms[m] = terms.get(m, 0) + el.rationalize(a) * el.T ** e
        out.append(el.to_polynomial(terms))
    return out


def all_critical_points(chart: MirrorChart, k) -> list[CriticalPoint]:
    """Brute-force oracle: every torus solution of the critical equations at level k.

    Rates are made integral with T = e^{2 pi k / L}, the two equations are
    eliminated exactly, and each pairing of an x-root with a y-root that nearly
    solves the system is polished by Newton and deduplicated.
    """
    k = _as_k(k)
    g1, g2 = chart.gradient()
    L = _lcm_denominator([g1, g2])
    polys = _sympy_system([g1, g2], L)
    subs = {el.T: mpmath.exp(2 * mpmath.pi * k / L)}
    loose = mpmath.mpf("1e-8")

    def screen(x, y):
        vals, scales = _grad_eval(chart, k, (x, y))
        return _residual(vals, scales) < loose

    cands = el.solve_system(polys, subs, screen)
    found = []
    for c in cands:
        try:
            p, res = newton(chart, k, c)
        except NoConvergence:
            continue
        found.append((p, res))
    uniq = el.dedupe([p for p, _ in found], rel=mpmath.mpf("1e-15"))
    out = []
    for p, _ in uniq:
        res = next(r for q, r in found if q is p)
        out.append(_point(chart, k, p, res))
    out.sort(key=lambda c: (float(abs(c.coords[0])), float(mpmath.arg(c.coords[0])),
                            float(abs(c.coords[1])), float(mpmath.arg(c.coords[1]))))
    return out
