"""Theta functions and Landau-Ginzburg potentials on a torus chart.

Toric surfaces get one monomial per boundary ray,
``theta_{D_i} = e^{-2 pi k (omega . D_i)} x^{v_i}``.  The degree 5 and degree 4
del Pezzo charts are transcribed term by term; each coefficient ``z^[C]`` is
the scalar ``e^{-2 pi k (omega . C)}`` with the class ``C`` written in the
``(H, E_i)`` basis.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .errors import BasisMismatch, NotKahler
from .exp_laurent import ExpLaurentPoly
from .surface_geometry import (
    DivisorClass,
    KahlerClass,
    LatticeSurface,
    Surface,
    ToricSurface,
    degree,
    frac,
    is_kahler,
    is_nef,
)


@dataclass
class MirrorChart:
    """Thetas of the boundary components plus their sum, in torus coordinates."""

    surface: Surface
    omega: DivisorClass
    thetas: dict[str, ExpLaurentPoly]
    potential: ExpLaurentPoly
    note: str = "(C*)^2, the whole torus"
    toric: bool = True
    expected_points: int | None = None
    label: str = ""
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def theta(self, name: str) -> ExpLaurentPoly:
        try:
            return self.thetas[name]
        except KeyError:
            raise BasisMismatch(f"no theta function named {name!r} on {self.label}") from None

    def gradient(self) -> tuple[ExpLaurentPoly, ExpLaurentPoly]:
        """(x dW/dx, y dW/dy)."""
        if "grad" not in self._cache:
            W = self.potential
            self._cache["grad"] = (W.log_derivative(1), W.log_derivative(2))
        return self._cache["grad"]

    def log_hessian(self) -> tuple[tuple[ExpLaurentPoly, ExpLaurentPoly], tuple[ExpLaurentPoly, ExpLaurentPoly]]:
        """Matrix of x_j d/dx_j x_l d/dx_l W, the Jacobian of the gradient in log coordinates."""
        if "loghess" not in self._cache:
            g1, g2 = self.gradient()
            d11, d12, d22 = g1.log_derivative(1), g1.log_derivative(2), g2.log_derivative(2)
            self._cache["loghess"] = ((d11, d12), (d12, d22))
        return self._cache["loghess"]

    def hessian_poly(self) -> ExpLaurentPoly:
        """(xy)^2 det of the ordinary Hessian, as a Laurent polynomial.

        Equal to (x^2 W_xx)(y^2 W_yy) - (xy W_xy)^2 identically, where
        x^2 W_xx = (x d/dx)^2 W - x d/dx W.
        """
        if "hess" not in self._cache:
            g1, g2 = self.gradient()
            (d11, d12), (_, d22) = self.log_hessian()
            a = d11 - g1
            b = d22 - g2
            self._cache["hess"] = a * b - d12 * d12
        return self._cache["hess"]

    def expected_count(self) -> int | None:
        if self.expected_points is not None:
            return self.expected_points
        if self.toric:
            return len(self.thetas)
        return None


def _require_kahler(S: Surface, omega: DivisorClass, allow_limit: bool):
    ok = is_nef(S, omega) if allow_limit else is_kahler(S, omega)
    if not ok:
        bad = [n for n, C in S.kahler_test_curves() if degree(S, omega, C) <= 0]
        raise NotKahler(f"{omega} is not {'nef' if allow_limit else 'Kahler'} on {S.name}: "
                        f"degree <= 0 on {', '.join(bad)}")


def _omega(S: Surface, omega) -> DivisorClass:
    if isinstance(omega, KahlerClass):
        omega = omega.cls
    return S.cls(omega)


def toric_theta(S: ToricSurface, omega, i) -> ExpLaurentPoly:
    """Single monomial x^{v_i} with rate -(omega . D_i)."""
    omega = _omega(S, omega)
    _require_kahler(S, omega, allow_limit=False)
    name = S.basis[i] if isinstance(i, int) else i
    v = S.ray_of(name)
    return ExpLaurentPoly.monomial(v, -degree(S, omega, S.unit(name)))


def potential(S: ToricSurface, omega, allow_limit: bool = False) -> MirrorChart:
    """Toric mirror chart: all boundary thetas and their sum."""
    omega = _omega(S, omega)
    _require_kahler(S, omega, allow_limit)
    thetas = {}
    for name, v in zip(S.basis, S.rays):
        thetas[name] = ExpLaurentPoly.monomial(v, -degree(S, omega, S.unit(name)))
    W = ExpLaurentPoly()
    for t in thetas.values():
        W = W + t
    return MirrorChart(S, omega, thetas, W, toric=True, label=f"{S.name} [{omega}]")


def boundary_weights(S: Surface, A: DivisorClass) -> dict[str, Fraction]:
    """Coefficients w_i with A = sum_i w_i D_i.

    Immediate for toric surfaces.  For lattice surfaces the boundary classes are
    solved for exactly; a class outside their span raises BasisMismatch.
    """
    A = S.cls(A)
    if isinstance(S, ToricSurface):
        return {n: c for n, c in zip(S.basis, A.coeffs)}
    names = [n for n, _ in S.boundary()]
    cols = [c.coeffs for _, c in S.boundary()]
    sol = _solve_exact(cols, A.coeffs)
    if sol is None:
        raise BasisMismatch(f"{A} is not a combination of the boundary of {S.name}")
    return dict(zip(names, sol))


def _solve_exact(cols: Sequence[Sequence[Fraction]], rhs: Sequence[Fraction]) -> list[Fraction] | None:
    """Solve sum_j x_j cols[j] = rhs exactly; free variables are set to 0."""
    n_rows, n_cols = len(rhs), len(cols)
    M = [[Fraction(cols[j][i]) for j in range(n_cols)] + [Fraction(rhs[i])] for i in range(n_rows)]
    pivots = []
    r = 0
    for c in range(n_cols):
        p = next((i for i in range(r, n_rows) if M[i][c] != 0), None)
        if p is None:
            continue
        M[r], M[p] = M[p], M[r]
        piv = M[r][c]
        M[r] = [v / piv for v in M[r]]
        for i in range(n_rows):
            if i != r and M[i][c] != 0:
                f = M[i][c]
                M[i] = [a - f * b for a, b in zip(M[i], M[r])]
        pivots.append(c)
        r += 1
    if any(all(v == 0 for v in M[i][:n_cols]) and M[i][n_cols] != 0 for i in range(n_rows)):
        return None
    x = [Fraction(0)] * n_cols
    for i, c in enumerate(pivots):
        x[c] = M[i][n_cols]
    return x


def class_theta(chart: MirrorChart, A) -> ExpLaurentPoly:
    """sum_i w_i theta_{D_i} for A = sum_i w_i D_i."""
    if isinstance(A, Mapping) and all(k in chart.thetas for k in A):
        weights = {k: frac(v) for k, v in A.items()}
    else:
        weights = boundary_weights(chart.surface, chart.surface.cls(A))
    out = ExpLaurentPoly()
    for name, w in weights.items():
        if w != 0:
            out = out + chart.theta(name) * w
    return out


def _z(S: LatticeSurface, omega: DivisorClass, cls_text: str) -> Fraction:
    """Rate of z^[C]: minus the degree of omega on C."""
    if cls_text in ("0", ""):
        return Fraction(0)
    return -degree(S, omega, S.cls(cls_text))


def _chart_from_table(S: LatticeSurface, omega: DivisorClass,
                      table: Mapping[str, Sequence[tuple[tuple[int, int], str]]],
                      note: str, expected: int | None, label: str) -> MirrorChart:
    thetas = {}
    for name, terms in table.items():
        thetas[name] = ExpLaurentPoly.from_terms((m, _z(S, omega, c), 1) for m, c in terms)
    W = ExpLaurentPoly()
    for t in thetas.values():
        W = W + t
    return MirrorChart(S, omega, thetas, W, note=note, toric=False,
                       expected_points=expected, label=label)


def dp5_surface() -> LatticeSurface:
    curves = [(f"E{i}", f"E{i}") for i in range(1, 5)]
    curves += [(f"L{i}{j}", f"H-E{i}-E{j}") for i in range(1, 5) for j in range(i + 1, 5)]
    boundary = [("D1", "H-E1-E2"), ("D2", "E2"), ("D3", "H-E2-E3"), ("D4", "E3"), ("D5", "H-E3-E4")]
    from .surface_geometry import parse_class_expression as p
    return LatticeSurface(4, [(n, p(c)) for n, c in boundary], [(n, p(c)) for n, c in curves],
                          name="dp5")


def dp4_surface() -> LatticeSurface:
    from .surface_geometry import parse_class_expression as p
    curves = [(f"E{i}", f"E{i}") for i in range(1, 6)]
    curves += [(f"L{i}{j}", f"H-E{i}-E{j}") for i in range(1, 6) for j in range(i + 1, 6)]
    curves += [("C", "2H-E1-E2-E3-E4-E5")]
    boundary = [("D1", "E1"), ("D2", "H-E1-E2"), ("D3", "H-E3-E4"), ("D4", "H-E1-E5")]
    return LatticeSurface(5, [(n, p(c)) for n, c in boundary], [(n, p(c)) for n, c in curves],
                          name="dp4")


# Degree 5: x = theta_1, y = theta_2 on the open set U.
_DP5_TABLE = {
    "D1": [((1, 0), "0")],
    "D2": [((0, 1), "0")],
    "D3": [((-1, 0), "H-E4"), ((-1, 1), "E2")],
    "D4": [((-1, 0), "H-E3"), ((0, -1), "2H-E1-E2-E3-E4"), ((-1, -1), "2H-E2-E3-E4")],
    "D5": [((0, -1), "H-E2"), ((1, -1), "H-E1-E2")],
}

# Degree 4: the four boundary thetas on the open torus U.
_DP4_TABLE = {
    "D1": [((-1, -2), "E1-E5"), ((0, -1), "H-E4-E5"), ((-1, -1), "0")],
    "D2": [((0, 1), "H-E1-E3"), ((-1, -1), "E1-E5"), ((-1, 0), "0")],
    "D3": [((1, 2), "2H-2E1-E2-E3"), ((0, 1), "H-E1-E2"), ((1, 1), "H-E1")],
    "D4": [((1, 1), "2H-E1-E2-E3-E4"), ((0, -1), "E1"), ((1, 0), "H-E4")],
}


def deg5_mirror(a: Sequence, allow_limit: bool = False) -> MirrorChart:
    """Degree 5 del Pezzo chart for omega = H - sum a_i E_i.

    ``allow_limit`` accepts nef boundary classes such as a = (1/2, 0, 0, 0),
    which give the limiting potential of the small-delta family.
    """
    a = [frac(t) for t in a]
    if len(a) != 4:
        raise ValueError("deg5_mirror needs four parameters a_1..a_4")
    S = dp5_surface()
    omega = S.cls({"H": 1, **{f"E{i + 1}": -a[i] for i in range(4)}})
    _require_kahler(S, omega, allow_limit)
    return _chart_from_table(S, omega, _DP5_TABLE,
                             note="U: the open set where theta_1, theta_2 are coordinates",
                             expected=None, label=f"dp5 [{omega}]")


def deg4_mirror(delta=0) -> MirrorChart:
    """Degree 4 del Pezzo chart for (1+d)H - E2/2 - E5/2 - d(E1+E3+E4).

    At ``delta = 0`` the class is nef but not Kahler; that limiting chart is
    the one with closed-form critical points and is accepted.
    """
    d = frac(delta)
    if d < 0:
        raise NotKahler("delta must be non-negative")
    S = dp4_surface()
    omega = S.cls({"H": 1 + d, "E1": -d, "E2": Fraction(-1, 2), "E3": -d, "E4": -d,
                   "E5": Fraction(-1, 2)})
    _require_kahler(S, omega, allow_limit=(d == 0))
    return _chart_from_table(S, omega, _DP4_TABLE,
                             note="U: dense open torus; all critical points lie in U",
                             expected=8, label=f"dp4 [{omega}]")
