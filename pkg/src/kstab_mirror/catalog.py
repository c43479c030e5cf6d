"""Built-in example surfaces with their polarisations and mirror charts."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Mapping

from .errors import ConfigError
from .lg_mirror import MirrorChart, deg4_mirror, deg5_mirror, potential
from .surface_geometry import DivisorClass, Surface, build_toric_surface, frac


@dataclass(frozen=True)
class Example:
    name: str
    defaults: Mapping[str, Fraction]
    build: Callable[..., tuple[Surface, DivisorClass, MirrorChart]]
    summary: str

    def make(self, **params) -> tuple[Surface, DivisorClass, MirrorChart]:
        unknown = set(params) - set(self.defaults)
        if unknown:
            raise ConfigError(f"{self.name} has no parameter(s) {sorted(unknown)}; "
                              f"known: {sorted(self.defaults)}")
        values = {k: frac(params.get(k, v)) for k, v in self.defaults.items()}
        return self.build(**values)


def p2_surface():
    return build_toric_surface([(1, 0), (0, 1), (-1, -1)], ["D1", "D2", "D3"], name="p2",
                               named={"H": {"D1": 1}})


def blp_surface():
    return build_toric_surface([(1, 0), (1, 1), (0, 1), (-1, -1)], ["L1", "E", "L2", "H"],
                               name="blp_p2")


def blpq_surface():
    # D1 ~ H-F, D2 ~ H-E, D3 ~ E, D4 ~ H-E-F, D5 ~ F
    return build_toric_surface([(1, 0), (1, 1), (0, 1), (-1, 0), (-1, -1)],
                               ["D2", "D3", "D4", "D5", "D1"], name="blpq_p2",
                               named={"H": {"D1": 1, "D5": 1}, "E": {"D3": 1}, "F": {"D5": 1}})


def p1xp1_blowup_surface():
    return build_toric_surface([(1, 0), (1, 1), (0, 1), (-1, 0), (0, -1)],
                               ["L1", "E", "L2", "H2", "H1"], name="p1xp1_blowup",
                               named={"X0": {"L1": 1, "E": 1}, "Xinf": {"H2": 1},
                                      "Krel": {"H1": -1, "L2": -1}})


def iterated_surface():
    # D1 ~ H, D2 ~ H-E1-2E2, D3 ~ E2, D4 ~ E1 (a -2 curve), D5 ~ H-E1-E2
    return build_toric_surface([(1, 0), (1, 1), (1, 2), (0, 1), (-1, -1)],
                               ["D5", "D4", "D3", "D2", "D1"], name="iterated_blowup",
                               named={"H": {"D1": 1}, "E1": {"D4": 1}, "E2": {"D3": 1}})


def _p2(t):
    S = p2_surface()
    omega = S.cls({"H": t})
    return S, omega, potential(S, omega)


def _blp(q):
    S = blp_surface()
    omega = S.cls({"H": 1, "E": -q})
    return S, omega, potential(S, omega)


def _blpq(a, b):
    S = blpq_surface()
    omega = S.cls({"H": 1, "E": -a, "F": -b})
    return S, omega, potential(S, omega)


def _p1xp1(r):
    S = p1xp1_blowup_surface()
    omega = S.cls({"H1": 1, "H2": 1, "E": -r})
    return S, omega, potential(S, omega)


def _iterated(r):
    S = iterated_surface()
    omega = S.cls({"H": 1, "E1": Fraction(-1, 2), "E2": -r})
    return S, omega, potential(S, omega)


def _dp5(a1, a2, a3, a4):
    chart = deg5_mirror((a1, a2, a3, a4), allow_limit=True)
    return chart.surface, chart.omega, chart


def _dp4(delta):
    chart = deg4_mirror(delta)
    return chart.surface, chart.omega, chart


F = Fraction
EXAMPLES: dict[str, Example] = {
    "p2": Example("p2", {"t": F(1)}, _p2, "P^2 with omega = tH"),
    "blp_p2": Example("blp_p2", {"q": F(1, 2)}, _blp, "Bl_p P^2 with omega = H - qE"),
    "blpq_p2": Example("blpq_p2", {"a": F(1, 3), "b": F(1, 3)}, _blpq,
                       "Bl_{p,q} P^2 with omega = H - aE - bF"),
    "p1xp1_blowup": Example("p1xp1_blowup", {"r": F(1, 2)}, _p1xp1,
                            "P^1 x P^1 blown up at a point of the zero fibre, omega = H1 + H2 - rE"),
    "iterated_blowup": Example("iterated_blowup", {"r": F(9, 10)}, _iterated,
                               "P^2 blown up twice infinitely near, omega = H - E1/2 - rE2"),
    "dp5": Example("dp5", {"a1": F(1, 2), "a2": F(0), "a3": F(0), "a4": F(0)}, _dp5,
                   "degree 5 del Pezzo chart, omega = H - sum a_i E_i"),
    "dp4": Example("dp4", {"delta": F(0)}, _dp4,
                   "degree 4 del Pezzo chart, omega = (1+d)H - E2/2 - E5/2 - d(E1+E3+E4)"),
}


def get_example(name: str) -> Example:
    try:
        return EXAMPLES[name]
    except KeyError:
        raise ConfigError(f"unknown surface {name!r}; built-ins: {', '.join(EXAMPLES)}") from None


def make(name: str, **params) -> tuple[Surface, DivisorClass, MirrorChart]:
    return get_example(name).make(**params)
