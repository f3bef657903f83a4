from dataclasses import replace
from fractions import Fraction

from hypothesis import assume, given, strategies as st

from artifact import box_model as bm
from artifact.atlas import Atlas, Chart, Corner
from artifact.convexity import (
    Search, audit_convexity, boundary_local_convexity, petal_invariant, recheck, representations,
    segment_between, trap_directions, trapped_test,
)
from artifact.examples import (
    V, black_hole_sphere, box_point_to_surface, convex_sphere, flower_points, focus_box_atlas, focus_cylinder,
    octagon_interior_points, shuriken_flower,
)
from artifact.tracer import Ray, SurfacePoint, all_branches

BOX = focus_box_atlas(1, 1, 2)


def square():
    return Atlas([Chart(0, [V(0, 0), V(2, 0), V(2, 2), V(0, 2)])], [], name="square")


def test_chord_in_one_chart():
    res = segment_between(square(), (0, V(0, 0)), (0, V(1, 2)))
    assert len(res) == 1
    w = res.witnesses[0]
    assert w.pieces == [(0, V(0, 0), V(1, 2))]
    assert recheck(square(), w)


def test_focus_box_two_lines():
    p = box_point_to_surface(BOX, -1, 0)
    q = box_point_to_surface(BOX, 1, Fraction(-1, 2))
    res = segment_between(BOX, p, q)
    assert len(res) == 2
    assert all(recheck(BOX, w) for w in res)


def test_tampered_witness_fails_recheck():
    p = box_point_to_surface(BOX, -1, 0)
    q = box_point_to_surface(BOX, 1, Fraction(-1, 2))
    w = segment_between(BOX, p, q).witnesses[0]
    cid, s, e = w.pieces[-1]
    bad = replace(w, pieces=w.pieces[:-1] + [(cid, s, e + V(0, Fraction(1, 8)))])
    assert not recheck(BOX, bad)


def test_representations_of_focus_point():
    reps = representations(BOX, 0, V(0, 0))
    assert sorted(c for c, _ in reps) == [0, 1]


fc = st.fractions(min_value=-1, max_value=1, max_denominator=4)
gc = st.fractions(min_value=-2, max_value=2, max_denominator=4)


@given(st.tuples(fc, gc), st.tuples(fc, gc))
def test_atlas_search_matches_wall_model(a, b):
    m = bm.focus_box_model(1, 1, 2)
    assume(a != b)
    try:
        n, _ = bm.segment_exists(m, a, b)
    except bm.OutOfBounds:
        assume(False)
    res = segment_between(BOX, box_point_to_surface(BOX, *a), box_point_to_surface(BOX, *b))
    assert len(res) == n
    assert all(recheck(BOX, w) for w in res)


def test_no_segment_from_center_to_octagon():
    b = black_hole_sphere()
    res = segment_between(b, b.center, b.octagon_center, budget=120)
    assert len(res) == 0
    assert res.exhausted


def test_audits():
    b = black_hole_sphere()
    pts = octagon_interior_points(2)
    rep = audit_convexity(b, [(b.center, q) for q in pts], budget=60)
    assert rep["failures"] == 2
    s = convex_sphere()
    pairs = [((0, V(Fraction(1, 2), Fraction(1, 3))), (c, V(1, Fraction(1, 2)))) for c in range(8)]
    assert audit_convexity(s, pairs, budget=6)["failures"] == 0


def test_search_reuse_matches_fresh_search():
    s = convex_sphere()
    p = (3, V(Fraction(1, 3), Fraction(2, 3)))
    srch = Search(s, p, 5)
    for c in range(8):
        q = (c, V(Fraction(3, 2), Fraction(1, 4)))
        assert len(srch.to(q)) == len(segment_between(s, p, q, 5))


def test_boundary_corners():
    assert all(c["angle"] != "concave" for c in boundary_local_convexity(BOX)["corners"])
    f = shuriken_flower()
    P = flower_points()[1]
    flags = {c["class"]: c["angle"] for c in boundary_local_convexity(f)["corners"]}
    for i in range(8):
        assert flags[f.class_of[Corner(i, 4)]] == "concave"
        assert f.vertex(Corner(i, 4)) == P[i]
    loops = boundary_local_convexity(focus_cylinder())["loops"]
    assert len(loops) == 2 and all(l["straight"] for l in loops)


def test_flat_square_escapes_at_once():
    rep = trapped_test(square(), (0, V(1, 1)), [V(1, 0), V(1, 3), V(-2, -1)], budget=10)
    assert rep["escaped"] == 3
    assert all(r["crossings"] == 0 for r in rep["directions"])


def test_short_trap_run():
    b = black_hole_sphere()
    rep = trapped_test(b, b.center, trap_directions(8), budget=150, region=set(b.petals),
                       invariant=petal_invariant(b))
    assert rep["escaped"] == 0 and rep["boundary_hits"] == 0 and rep["invariant_ok"]


def test_entering_from_octagon_stays_in_flower():
    b = black_hole_sphere()
    for d in trap_directions(6):
        for t in all_branches(b, Ray(SurfacePoint(*b.octagon_center), d), 150):
            charts = [s.chart for s in t.steps]
            first = next(i for i, c in enumerate(charts) if c in b.petals)
            assert all(c in b.petals for c in charts[first:])
            assert t.end == "StepLimit"
