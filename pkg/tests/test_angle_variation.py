from fractions import Fraction

import mpmath
import pytest
from hypothesis import assume, given, strategies as st

from artifact.angle_variation import (
    ClosedCurve, CurveHitsFocus, NotClosed, angle_variation, develop_curve, monodromy_turn_sign,
)
from artifact.atlas import Atlas, Chart
from artifact.examples import V, focus_box_atlas, focus_cylinder
from artifact.exact_affine import LinZ, NotParabolic, Vec2, cross, shear

H = Fraction(1, 2)
PLANE = Atlas([Chart(0, [V(-10, -10), V(10, -10), V(10, 10), V(-10, 10)])], [])


def close_to(x, y):
    with mpmath.workprec(128):
        return abs(x - y()) < mpmath.mpf(2) ** -100


def two_pi():
    return 2 * mpmath.pi


def loop(chart, pts):
    return ClosedCurve([(chart, [V(*p) for p in pts] + [V(*pts[0])])])


def test_convex_polygon_gives_full_turn():
    c = loop(0, [(0, 0), (3, 0), (4, 2), (1, 3)])
    r = angle_variation(PLANE, c, V(3, 0))
    assert r.pi_multiple == 2
    assert close_to(r.value, two_pi)


def test_clockwise_polygon():
    c = loop(0, [(0, 0), (1, 3), (4, 2), (3, 0)])
    assert angle_variation(PLANE, c, V(1, 3)).pi_multiple == -2


def test_winding_twice():
    star = [(4, 0), (-3, 3), (1, -4), (1, 4), (-3, -3)]
    r = angle_variation(PLANE, loop(0, star), V(1, 0))
    assert r.pi_multiple == 4
    sq = [(0, 0), (1, 0), (1, 1), (0, 1)]
    assert angle_variation(PLANE, loop(0, sq + sq), V(1, 0)).pi_multiple == 4


@pytest.mark.parametrize("F", [-H, H, Fraction(1, 4)])
def test_straight_closed_line_on_cylinder(F):
    a = focus_cylinder(1, 1, 2)
    if F < 0:
        c = ClosedCurve([(0, [V(-2, F), V(2, F)])])
    else:
        c = ClosedCurve([(1, [V(-2, F), V(2 - F, F)])])
    r = angle_variation(a, c, V(1, 0))
    assert r.pi_multiple == 0 and r.value == 0


def around_focus():
    return ClosedCurve([(0, [V(-1, 0), V(-1, -1), V(1, -1), V(1, 0)]), (1, [V(1, 0), V(0, 1), V(-1, 1), V(-1, 0)])])


def test_loop_around_focus():
    a = focus_box_atlas(1, 1, 2)
    pts, hol = develop_curve(a, around_focus())
    assert hol.linear == LinZ(1, 1, 0, 1) or hol.linear == LinZ(1, -1, 0, 1)
    assert hol(V(0, 0)) == V(0, 0)
    r = angle_variation(a, around_focus(), V(1, 0))
    assert r.pi_multiple == 2
    # a reference vector off the eigenline gives no multiple of pi
    assert angle_variation(a, around_focus(), V(1, 1)).pi_multiple is None


def test_errors():
    a = focus_box_atlas(1, 1, 2)
    with pytest.raises(CurveHitsFocus):
        angle_variation(a, loop(0, [(-1, -1), (1, -1), (1, 0), (-1, 0)]), V(1, 0))
    with pytest.raises(NotClosed):
        angle_variation(PLANE, ClosedCurve([(0, [V(0, 0), V(1, 0), V(1, 1)])]), V(1, 0))
    with pytest.raises(ValueError):
        angle_variation(PLANE, loop(0, [(0, 0), (1, 0), (0, 1)]), V(0, 0))


def test_precision_from_environment(monkeypatch):
    monkeypatch.setenv("ARTIFACT_AV_PREC", "256")
    r = angle_variation(PLANE, loop(0, [(0, 0), (1, 0), (0, 1)]), V(1, 0))
    with mpmath.workprec(256):
        assert abs(r.value - 2 * mpmath.pi) < mpmath.mpf(2) ** -240
    assert r.tolerance == Fraction(1, 2 ** 248)


pt = st.tuples(st.integers(-9, 9), st.integers(-9, 9))


def hull(points):
    pts = sorted(set(points))
    if len(pts) < 3:
        return []

    def half(ps):
        out = []
        for p in ps:
            while len(out) >= 2 and cross(V(*out[-1]) - V(*out[-2]), V(*p) - V(*out[-1])) <= 0:
                out.pop()
            out.append(p)
        return out
    lo, hi = half(pts), half(pts[::-1])
    return lo[:-1] + hi[:-1]


@given(st.lists(pt, min_size=3, max_size=12), pt)
def test_flat_convex_loops_turn_once(points, v):
    h = hull(points)
    assume(len(h) >= 3 and v != (0, 0))
    r = angle_variation(PLANE, loop(0, h), V(*v))
    assert r.pi_multiple == 2
    assert close_to(r.value, two_pi)


@given(st.fractions(min_value=-1, max_value=1, max_denominator=8).filter(bool), st.integers(1, 3))
def test_straight_lines_on_cylinders(F, k):
    a = focus_cylinder(k, 1, 3)
    if F < 0:
        c = ClosedCurve([(0, [V(-3, F), V(3, F)])])
    else:
        c = ClosedCurve([(1, [V(-3, F), V(3 - k * F, F)])])
    assert angle_variation(a, c, V(1, 0)).pi_multiple == 0


def test_turn_sign_table():
    assert monodromy_turn_sign(shear(3), V(1, 0)) == 0
    assert monodromy_turn_sign(LinZ(1, 1, 0, 1), V(0, 1)) == -1
    with pytest.raises(NotParabolic):
        monodromy_turn_sign(LinZ(1, -1, 0, 1), V(0, 1))
    with pytest.raises(NotParabolic):
        monodromy_turn_sign(LinZ(2, 1, 1, 1), V(0, 1))


gens = st.lists(st.sampled_from([shear(1), shear(-1), LinZ(0, -1, 1, 0)]), max_size=6)


@given(gens, st.integers(1, 4), st.tuples(st.integers(-20, 20), st.integers(-20, 20)).filter(lambda t: t != (0, 0)))
def test_monodromy_never_turns_right(word, k, v):
    c = LinZ(1, 0, 0, 1)
    for g in word:
        c = c @ g
    m = c @ shear(k) @ c.inverse()
    v = Vec2.of(*v)
    s = monodromy_turn_sign(m, v)
    assert s in (-1, 0)
    assert (s == 0) == (m(v) == v)
