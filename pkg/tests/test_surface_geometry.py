from fractions import Fraction as F

import pytest

from kstab_mirror import catalog
from kstab_mirror.errors import BasisMismatch, DegenerateFan, InvalidFan, NonPrimitiveRay, NonSmoothFan
from kstab_mirror.lg_mirror import dp4_surface, dp5_surface
from kstab_mirror.surface_geometry import (anticanonical_class, build_toric_surface, canonical_class,
                                           intersection_matrix, intersection_number, is_kahler, is_nef,
                                           parse_class_expression, slope_mu)


def same_class(S, A, B):
    return all(intersection_number(S, A, C) == intersection_number(S, B, C) for _, C in S.boundary())


def test_p2_intersections():
    S = catalog.p2_surface()
    H = S.cls("H")
    assert intersection_number(S, H, H) == 1
    K = canonical_class(S)
    assert intersection_number(S, K, K) == 9
    assert slope_mu(S, H) == 3
    assert slope_mu(S, H * 2) == F(3, 2)


def test_blp_intersections_and_slope():
    S = catalog.blp_surface()
    E, H = S.cls("E"), S.cls("H")
    assert intersection_number(S, E, E) == -1
    assert intersection_number(S, H, H) == 1
    assert intersection_number(S, H, E) == 0
    K = canonical_class(S)
    assert intersection_number(S, K, K) == 8
    assert slope_mu(S, S.cls("H-E/2")) == F(10, 3)


def test_iterated_blowup_curves():
    S = catalog.iterated_surface()
    E1, E2 = S.cls("E1"), S.cls("E2")
    assert intersection_number(S, E1, E1) == -2
    assert intersection_number(S, E2, E2) == -1
    assert intersection_number(S, E1, E2) == 1
    # -K = 3H - E1 - 2E2 on this surface (compared numerically: the boundary
    # basis is not a basis of the Picard group)
    assert same_class(S, anticanonical_class(S), S.cls("3H - E1 - 2E2"))


def test_toric_boundary_cycle():
    S = catalog.blpq_surface()
    M = intersection_matrix(S, [c for _, c in S.boundary()])
    n = len(M)
    for i in range(n):
        assert M[i][(i + 1) % n] == 1
        for j in range(n):
            if j not in (i, (i + 1) % n, (i - 1) % n):
                assert M[i][j] == 0
    # D1 ~ H-F, D2 ~ H-E are 0-curves, the rest are -1-curves
    assert sorted(M[i][i] for i in range(n)) == [-1, -1, -1, 0, 0]


@pytest.mark.parametrize("surface", [dp5_surface, dp4_surface])
def test_lattice_boundary_is_cycle_of_minus_one_curves(surface):
    S = surface()
    D = [c for _, c in S.boundary()]
    n = len(D)
    for i in range(n):
        assert intersection_number(S, D[i], D[i]) == -1
        assert intersection_number(S, D[i], D[(i + 1) % n]) == 1
    total = D[0]
    for c in D[1:]:
        total = total + c
    assert total == anticanonical_class(S)


def test_kahler_checks():
    S = catalog.blp_surface()
    assert is_kahler(S, S.cls("H-E/2"))
    assert not is_kahler(S, S.cls("H-E"))
    assert is_nef(S, S.cls("H"))
    assert not is_kahler(S, S.cls("H"))


def test_parse_class_expression():
    assert parse_class_expression("H - E/2") == {"H": 1, "E": F(-1, 2)}
    assert parse_class_expression("3/2H+2 E1 - E1") == {"H": F(3, 2), "E1": 1}
    with pytest.raises(ValueError):
        parse_class_expression("H + ?")


def test_unknown_class_name():
    S = catalog.p2_surface()
    with pytest.raises(BasisMismatch):
        S.cls("E")


@pytest.mark.parametrize("rays, exc", [
    ([(1, 0), (0, 1)], DegenerateFan),
    ([(2, 0), (0, 1), (-1, -1)], NonPrimitiveRay),
    ([(1, 0), (1, 2), (-1, -1)], NonSmoothFan),
    ([(1, 0), (-1, -1), (0, 1)], InvalidFan),
    ([(1, 0), (0, 1), (0, 1)], InvalidFan),
])
def test_invalid_fans(rays, exc):
    with pytest.raises(exc):
        build_toric_surface(rays)


def test_invalid_fan_exit_code():
    with pytest.raises(InvalidFan) as e:
        build_toric_surface([(1, 0), (1, 2), (-1, -1)])
    assert e.value.exit_code == 3


def test_hirzebruch_self_intersections():
    # F_2: rays (1,0), (0,1), (-1,2), (0,-1)
    S = build_toric_surface([(1, 0), (0, 1), (-1, 2), (0, -1)])
    assert S.selfint == (0, -2, 0, 2)
