from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from artifact.atlas import Corner
from artifact.examples import RECT, TRAP, V, black_hole_sphere, convex_sphere, flower_points, focus_box_atlas
from artifact.exact_affine import IDENTITY, cross
from artifact.tracer import (
    Eigendirection, Hit, InvalidStart, Ray, SurfacePoint, Trace, TraceEvent, all_branches, develop,
    extend_through_focus, trace,
)

BOX = focus_box_atlas(1, 1, 2)


def ray(chart, p, d):
    return Ray(SurfacePoint(chart, V(*p)), V(*d))


def kinds(t):
    return [e.kind for e in t.events]


def test_single_chart_ray():
    t = trace(BOX, ray(RECT, (-1, Fraction(-1, 2)), (-1, 0)))
    assert kinds(t) == ["BoundaryHit"]
    assert len(t.steps) == 1
    assert t.steps[0].dev.is_identity()


def test_one_crossing_develops_by_inverse_gluing():
    t = trace(BOX, ray(RECT, (1, Fraction(-1, 2)), (0, 1)))
    assert kinds(t) == ["EdgeCross", "BoundaryHit"]
    s0, s1 = t.steps
    link = BOX.links[(RECT, 2)]
    assert s1.dev == link.map.inverse()
    poly, corridor = develop(t)
    assert len(poly) == 2 and len(corridor) == 2


def test_eigen_line_passes_the_focus():
    t = trace(BOX, ray(RECT, (-1, 0), (1, 0)))
    assert "FocusHit" not in kinds(t)
    assert "FlatVertexPass" in kinds(t)
    assert t.end == "BoundaryHit"
    assert len(develop(t)[0]) == 2


def test_focus_hit_and_two_branches():
    t = trace(BOX, ray(RECT, (-1, -1), (1, 1)))
    assert t.end == "FocusHit"
    l, r = extend_through_focus(BOX, t, "L"), extend_through_focus(BOX, t, "R")
    n = len(t.steps)
    assert l.steps[:n] == r.steps[:n] == t.steps
    assert l.steps[n] != r.steps[n]
    assert l.branch_choices == ["L"] and r.branch_choices == ["R"]


def test_eigendirection_error():
    t = Trace(BOX, 10, events=[TraceEvent("FocusHit")], hit=Hit(Corner(RECT, 3), V(1, 0), IDENTITY))
    with pytest.raises(Eigendirection):
        extend_through_focus(BOX, t, "L")


def test_extend_requires_focus_hit():
    t = trace(BOX, ray(RECT, (-1, Fraction(-1, 2)), (-1, 0)))
    with pytest.raises(ValueError):
        extend_through_focus(BOX, t, "L")


@pytest.mark.parametrize("p,d", [((5, 5), (1, 0)), ((0, -1), (0, 0))])
def test_invalid_start(p, d):
    with pytest.raises(InvalidStart):
        trace(BOX, ray(RECT, p, d))


def test_budget_gives_step_limit():
    b = black_hole_sphere()
    t = trace(b, Ray(SurfacePoint(*b.center), V(1001, 2)), 50)
    assert t.end == "StepLimit"
    assert t.crossings == 50


def g_left_at(branch, n, f):
    s = branch.steps[n]
    assert s.chart == TRAP
    e, x = s.entry, s.exit
    return e.x + (x.x - e.x) * (f - e.y) / (x.y - e.y), min(x.y, 1)


@given(st.fractions(min_value="1/8", max_value=2, max_denominator=8),
       st.fractions(min_value="1/8", max_value=1, max_denominator=8),
       st.integers(1, 3))
def test_branch_offset_is_k_times_F(gx, gy, k):
    a = focus_box_atlas(k, 1, 4)
    p = V(-gx, -gy)
    t = trace(a, Ray(SurfacePoint(RECT, p), V(gx, gy)))
    assert t.end == "FocusHit"
    n = len(t.steps)
    l, r = extend_through_focus(a, t, "L"), extend_through_focus(a, t, "R")
    top = min(l.steps[n].exit.y, r.steps[n].exit.y)
    for j in range(1, 5):
        f = top * Fraction(j, 4)
        gl, _ = g_left_at(l, n, f)
        gr, _ = g_left_at(r, n, f)
        assert gl - gr == k * f


def test_ray_into_flower_seam_point_stays_trapped():
    b = black_hole_sphere()
    O = flower_points()[0]
    t = trace(b, Ray(SurfacePoint(*b.center), O[0]), 300)
    assert t.end == "FocusHit"
    for side in "LR":
        u = extend_through_focus(b, t, side)
        assert u.end == "StepLimit"
        assert all(s.chart < 8 for s in u.steps)


vdir = st.tuples(st.integers(-40, 40), st.integers(-40, 40)).filter(lambda d: d != (0, 0))


@given(vdir)
def test_unbranched_development_is_straight(d):
    a = convex_sphere()
    t = trace(a, Ray(SurfacePoint(0, V(Fraction(1, 3), Fraction(1, 5))), V(*d)), 40)
    poly, corridor = develop(t)
    assert len(poly) == 2
    # consecutive steps meet in the development
    for s0, s1 in zip(t.steps, t.steps[1:]):
        assert s0.dev(s0.exit) == s1.dev(s1.entry)
    for s in t.steps:
        assert a.charts[s.chart].contains(s.entry) and a.charts[s.chart].contains(s.exit)
        assert cross(poly[1] - poly[0], s.dev(s.exit) - poly[0]) == 0


@given(vdir)
def test_branches_agree_before_first_choice(d):
    a = focus_box_atlas(2, 1, 3)
    brs = all_branches(a, Ray(SurfacePoint(RECT, V(Fraction(-1, 3), Fraction(-1, 2))), V(*d)), 20)
    assert 1 <= len(brs) <= 2
    if len(brs) == 2:
        n = min(len(b.steps) for b in brs)
        first = next(i for i in range(n + 1) if i == n or brs[0].steps[i] != brs[1].steps[i])
        assert brs[0].steps[:first] == brs[1].steps[:first]
