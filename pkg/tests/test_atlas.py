import json

import pytest
from hypothesis import given, strategies as st

from artifact.atlas import (
    Atlas, Chart, Corner, EdgeRef, Gluing, StructuralError, atlas_from_dict, atlas_to_dict,
    boundary_invariants, boundary_loops, total_focus_index, validate, vertex_holonomy,
)
from artifact.examples import (
    V, black_hole_sphere, complement_octagon, convex_sphere, flower_points, focus_box_atlas, shuriken_flower,
)
from artifact.exact_affine import ID2, IDENTITY, AffineT, LinZ, focus_index, integral_length


def kinds(rep):
    return [(v["kind"], v.get("index")) for v in rep["vertices"]]


def square_cylinder():
    a = Chart(0, [V(0, 0), V(1, 0), V(1, 1), V(0, 1)])
    b = Chart(1, [V(1, 0), V(2, 0), V(2, 1), V(1, 1)])
    gl = [Gluing(EdgeRef(0, 1), EdgeRef(1, 3), IDENTITY),
          Gluing(EdgeRef(1, 1), EdgeRef(0, 3), AffineT(ID2, V(-2, 0)))]
    return Atlas([a, b], gl)


def test_focus_box_validates_with_one_focus():
    rep = validate(focus_box_atlas(1, 1, 2))
    assert rep["pass"]
    assert kinds(rep) == [("FOCUS", 1)]


def test_endpoint_mismatch_reported():
    a = Chart(0, [V(0, 0), V(2, 0), V(0, 2)])
    b = Chart(1, [V(0, 0), V(3, 0), V(0, 3)])
    rep = validate(Atlas([a, b], [Gluing(EdgeRef(0, 0), EdgeRef(1, 0), IDENTITY)]))
    assert not rep["pass"]
    assert "EndpointMismatch" in rep["gluings"][0]["error"]


def test_determinant_two_rejected():
    a = focus_box_atlas()
    g = a.gluings[0]
    with pytest.raises(StructuralError):
        Atlas(list(a.charts.values()), [Gluing(g.src, g.dst, AffineT(LinZ(2, 0, 0, 1), V(0, 0)))] + a.gluings[1:],
              a.focus)


def test_orientation_reversing_gluing_fails_validation():
    a = Chart(0, [V(0, 0), V(1, 0), V(1, 1), V(0, 1)])
    b = Chart(1, [V(1, 0), V(2, 0), V(2, 1), V(1, 1)])
    rep = validate(Atlas([a, b], [Gluing(EdgeRef(0, 1), EdgeRef(1, 3), AffineT(LinZ(-1, 0, 0, 1), V(2, 0)))]))
    assert not rep["pass"]


def test_reflex_chart_rejected():
    c = Chart(0, [V(0, 0), V(2, 0), V(1, 1), V(2, 2), V(0, 2)])
    assert c.shape_problem() is not None
    assert not validate(Atlas([c], []))["pass"]


def test_edge_glued_twice_is_structural():
    a = Chart(0, [V(0, 0), V(1, 0), V(1, 1), V(0, 1)])
    b = Chart(1, [V(1, 0), V(2, 0), V(2, 1), V(1, 1)])
    with pytest.raises(StructuralError):
        Atlas([a, b], [Gluing(EdgeRef(0, 1), EdgeRef(1, 3), IDENTITY),
                       Gluing(EdgeRef(0, 1), EdgeRef(1, 1), IDENTITY)])


def test_flat_interior_vertex_has_identity_holonomy():
    a = Chart(0, [V(0, 0), V(1, 0), V(1, 1), V(0, 1)])
    b = Chart(1, [V(-1, 0), V(0, 0), V(0, 1), V(-1, 1)])
    c = Chart(2, [V(-1, -1), V(0, -1), V(0, 0), V(-1, 0)])
    d = Chart(3, [V(0, -1), V(1, -1), V(1, 0), V(0, 0)])
    gl = [Gluing(EdgeRef(0, 3), EdgeRef(1, 1), IDENTITY), Gluing(EdgeRef(1, 0), EdgeRef(2, 2), IDENTITY),
          Gluing(EdgeRef(2, 1), EdgeRef(3, 3), IDENTITY), Gluing(EdgeRef(3, 2), EdgeRef(0, 0), IDENTITY)]
    at = Atlas([a, b, c, d], gl)
    rep = validate(at)
    assert rep["pass"]
    assert kinds(rep) == [("FLAT", None)]
    assert vertex_holonomy(at, at.class_of[Corner(0, 0)]).is_identity()


def test_square_cylinder_is_flat_annulus():
    rep = validate(square_cylinder())
    assert rep["pass"]
    assert len(boundary_loops(square_cylinder())) == 2


def test_focus_box_holonomy_index():
    a = focus_box_atlas(1, 1, 2)
    hol = vertex_holonomy(a, a.class_of[Corner(0, 3)])
    assert focus_index(hol.linear) == 1
    assert hol(V(0, 0)) == V(0, 0)


def test_shuriken_seam_vertex_index_two():
    a = shuriken_flower()
    # O_1 is the first vertex of chart 0's clockwise neighbour
    cls = a.class_of[Corner(0, 5)]
    assert focus_index(vertex_holonomy(a, cls).linear) == 2


@pytest.mark.parametrize("build,total,n_focus", [
    (black_hole_sphere, 24, 16), (convex_sphere, 24, 12), (shuriken_flower, 12, 8), (complement_octagon, 12, 8),
])
def test_census(build, total, n_focus):
    a = build()
    rep = validate(a)
    assert rep["pass"]
    assert total_focus_index(a) == total
    assert sum(k == "FOCUS" for k, _ in kinds(rep)) == n_focus


@pytest.mark.parametrize("k", [1, 2, 3])
def test_focus_box_total_is_k(k):
    assert total_focus_index(focus_box_atlas(k, 1, 2)) == k


def test_black_hole_is_closed():
    a = black_hole_sphere()
    assert a.boundary_edges() == []
    assert validate(a)["corners"] == []


def test_flower_boundary_lengths_are_two():
    a = shuriken_flower()
    _, P, _, _ = flower_points()
    for i in range(8):
        assert integral_length(P[i], P[(i + 1) % 8]) == 2
    (loop,) = boundary_loops(a)
    assert all(row["length"] == 2 for row in boundary_invariants(a, loop, reverse=True))


def _class_of_point(a, p):
    for cid, ch in sorted(a.charts.items()):
        for i, v in enumerate(ch.vertices):
            if v == p:
                return a.class_of[Corner(cid, i)]


def test_flower_characteristic_numbers():
    a = shuriken_flower()
    _, P, _, _ = flower_points()
    (loop,) = boundary_loops(a)
    inv = {(r["from"], r["to"]): r["char"] for r in boundary_invariants(a, loop, reverse=True)}
    c = [_class_of_point(a, p) for p in P]
    assert inv[(c[0], c[1])] == 4
    assert inv[(c[1], c[2])] == 2


def _cyclic_equal(xs, ys):
    return len(xs) == len(ys) and any(xs == ys[i:] + ys[:i] for i in range(len(ys)))


def test_flower_and_octagon_invariants_match():
    f, o = shuriken_flower(), complement_octagon()
    (lf,), (lo,) = boundary_loops(f), boundary_loops(o)
    a = [(r["length"], r["simple"], r["char"]) for r in boundary_invariants(f, lf, reverse=True)]
    b = [(r["length"], r["simple"], r["char"]) for r in boundary_invariants(o, lo)]
    assert _cyclic_equal(a, b)


@pytest.mark.parametrize("build", [focus_box_atlas, shuriken_flower, complement_octagon, black_hole_sphere,
                                   convex_sphere])
def test_dict_round_trip(build):
    a = build()
    d = atlas_to_dict(a)
    text = json.dumps(d)
    b = atlas_from_dict(json.loads(text))
    assert json.dumps(atlas_to_dict(b)) == text


@given(st.integers(1, 4), st.fractions(min_value="1/2", max_value=3, max_denominator=4),
       st.fractions(min_value="1/2", max_value=3, max_denominator=4))
def test_focus_boxes_validate(k, d, e):
    rep = validate(focus_box_atlas(k, d, e))
    assert rep["pass"]
    assert kinds(rep) == [("FOCUS", k)]
