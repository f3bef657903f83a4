"""Deterministic builders for the shipped surfaces and wall models."""

from dataclasses import dataclass, field
from fractions import Fraction

from .atlas import Atlas, Chart, Corner, EdgeRef, FocusSpec, Gluing, validate
from .exact_affine import (
    AffineT, ID2, IDENTITY, LinZ, Q, Vec2, compose, primitive_int, shear,
)


class InvalidParams(ValueError):
    pass


class GluingMismatch(ValueError):
    pass


def V(x, y):
    return Vec2(Q(x), Q(y))


@dataclass
class ExampleDescriptor:
    name: str
    params: dict = field(default_factory=dict)
    notes: str = ""


# -- focus box ------------------------------------------------------------

RECT, TRAP = 0, 1


def focus_box_atlas(k=1, delta=1, delta2=2):
    """Box |F| <= delta, |G_l|, |G_r| <= delta2 around one focus point of index k.

    Chart coordinates are (G, F).  Chart 0 is the rectangle F <= 0, chart 1 the
    part F >= 0 written in the G_l branch (a trapezoid, or a triangle when
    2*delta2 <= k*delta).
    """
    if isinstance(k, bool) or not isinstance(k, int) or k < 1:
        raise InvalidParams("k must be a positive integer")
    d, e = Q(delta), Q(delta2)
    if d <= 0 or e <= 0:
        raise InvalidParams("box half-widths must be positive")
    rect = Chart(RECT, [V(-e, -d), V(e, -d), V(e, 0), V(0, 0), V(-e, 0)])
    top = e - k * d
    if top > -e:
        trap = Chart(TRAP, [V(-e, 0), V(0, 0), V(e, 0), V(top, d), V(-e, d)])
    else:
        trap = Chart(TRAP, [V(-e, 0), V(0, 0), V(e, 0), V(-e, 2 * e / k)])
    gl = [
        # left half: G_l agrees with G across F = 0 for G < 0
        Gluing(EdgeRef(RECT, 3), EdgeRef(TRAP, 0), IDENTITY),
        # right half: the rectangle's G continues as G_r = G_l + kF
        Gluing(EdgeRef(RECT, 2), EdgeRef(TRAP, 1), AffineT(shear(-k), V(0, 0))),
    ]
    a = Atlas([rect, trap], gl, [FocusSpec(Corner(RECT, 3), k)], name="focus-box")
    a.box = {"k": k, "delta": d, "delta2": e}
    return a


def box_point_to_surface(a, F, G_l):
    """(chart, pos) of the box point with coordinates F and G_l."""
    F, G_l = Q(F), Q(G_l)
    return (RECT, V(G_l, F)) if F <= 0 else (TRAP, V(G_l, F))


# -- shuriken flower --------------------------------------------------------

ROT = LinZ(0, 1, -1, 0)   # (x, y) -> (y, -x): petal i -> petal i+2


def _rot(j, p):
    for _ in range(j % 4):
        p = ROT(p)
    return p


def _conj_rot(j, m):
    r = ID2
    for _ in range(j % 4):
        r = ROT @ r
    return r @ m @ r.inverse()


# printed anchor data: O1Q8 -> O1P1 and O2Q1 -> O2P2
_O = [V(0, 3), V(2, 2)]
_P = [V(0, 6), V(4, 4)]
_QQ = [V(0, 8), V(6, 6)]
_SEAM = [LinZ(1, 2, 0, 1), LinZ(2, 1, -1, 0)]
FLOWER_INDEX = [2, 1, 2, 1, 2, 1, 2, 1]


def flower_points():
    """O_i, P_i, Q_i, M_i (i = 1..8 stored at 0..7) in shuriken coordinates."""
    O, P, Qp, M = [], [], [], []
    for i in range(8):
        j, s = divmod(i, 2)
        O.append(_rot(j, _O[s]))
        P.append(_rot(j, _P[s]))
        Qp.append(_rot(j, _QQ[s]))
        M.append((P[-1] + Qp[-1]) * Fraction(1, 2))
    return O, P, Qp, M


def seam_matrix(i):
    """Linear part of the gluing at O_{i+1} (0-based i)."""
    j, s = divmod(i, 2)
    return _conj_rot(j, _SEAM[s])


def _flower_parts(base=0):
    O, P, Qp, M = flower_points()
    A = V(0, 0)
    charts, gl = [], []
    for i in range(8):
        n = (i + 1) % 8
        charts.append(Chart(base + i, [A, O[n], Qp[i], M[i], P[i], O[i]]))
    for i in range(8):
        n = (i + 1) % 8
        gl.append(Gluing(EdgeRef(base + i, 0), EdgeRef(base + n, 5), IDENTITY))
        gl.append(Gluing(EdgeRef(base + i, 1), EdgeRef(base + n, 4),
                         AffineT.about(seam_matrix(n), O[n])))
    focus = [FocusSpec(Corner(base + i, 5), FLOWER_INDEX[i]) for i in range(8)]
    return charts, gl, focus


def shuriken_flower():
    """8 petals around the center A = (0,0); chart i is the petal A O_{i+1} Q_i."""
    charts, gl, focus = _flower_parts()
    a = Atlas(charts, gl, focus, name="flower")
    a.center = (0, V(0, 0))
    a.petals = list(range(8))
    return a


# -- complementary octagon ----------------------------------------------------

# flat Delzant octagon: directions with u_{j-1} + u_{j+1} = c_j u_j, c = 2,1,2,...
_OCT_DIRS = [V(1, 0), V(2, 1), V(1, 1), V(0, 1), V(-1, 0), V(-2, -1), V(-1, -1), V(0, -1)]
OCT_INDEX = [2, 1, 2, 1, 2, 1, 2, 1]
OCT_BASE = 100


def octagon_points():
    """Corners V_j, wedge feet W_j, W'_j and apexes X_j of the octagon."""
    Vs = [V(0, 0)]
    for j in range(7):
        Vs.append(Vs[-1] + _OCT_DIRS[j] * (2 + OCT_INDEX[j]))
    assert Vs[-1] + _OCT_DIRS[7] * (2 + OCT_INDEX[7]) == Vs[0]
    W, W2, X = [], [], []
    for j in range(8):
        u, k = _OCT_DIRS[j], OCT_INDEX[j]
        W.append(Vs[j] + u)
        W2.append(Vs[j] + u * (1 + k))
        X.append((W[-1] + W2[-1]) * Fraction(1, 2) - _OCT_DIRS[j - 1])
    center = (Vs[0] + Vs[4]) * Fraction(1, 2)
    return Vs, W, W2, X, center


def _wedge_map(u, k, apex):
    # v -> v + k*cross(u, v)*u, fixing the apex; sends the far wedge side to the near one
    ux, uy = int(u.x), int(u.y)
    lin = LinZ(1 - k * ux * uy, k * ux * ux, -k * uy * uy, 1 + k * ux * uy)
    return AffineT.about(lin, apex)


def _octagon_parts(base=OCT_BASE):
    Vs, W, W2, X, B = octagon_points()
    charts, gl, focus = [], [], []
    for j in range(8):
        d1, d2, d3, d4 = (base + 4 * j + s for s in range(4))
        nj = (j + 1) % 8
        charts += [Chart(d1, [Vs[j], W[j], X[j]]), Chart(d2, [X[j], W2[j], Vs[nj]]),
                   Chart(d3, [B, Vs[j], X[j]]), Chart(d4, [B, X[j], Vs[nj]])]
        gl += [
            Gluing(EdgeRef(d2, 0), EdgeRef(d1, 1), _wedge_map(_OCT_DIRS[j], OCT_INDEX[j], X[j])),
            Gluing(EdgeRef(d1, 2), EdgeRef(d3, 1), IDENTITY),
            Gluing(EdgeRef(d2, 2), EdgeRef(d4, 1), IDENTITY),
            Gluing(EdgeRef(d3, 2), EdgeRef(d4, 0), IDENTITY),
            Gluing(EdgeRef(d4, 2), EdgeRef(base + 4 * nj + 2, 0), IDENTITY),
        ]
        focus.append(FocusSpec(Corner(d1, 2), OCT_INDEX[j]))
    return charts, gl, focus


def complement_octagon():
    """Flat octagon with 8 wedges cut out at its edges and reglued."""
    charts, gl, focus = _octagon_parts()
    a = Atlas(charts, gl, focus, name="octagon")
    a.center = (OCT_BASE + 2, octagon_points()[4])
    return a


def octagon_interior_points(n):
    """n deterministic points strictly inside the octagon's central triangles."""
    Vs, _, _, X, B = octagon_points()
    out = []
    for i in range(n):
        j, s = i % 8, (i // 8) % 2
        tri = [B, Vs[j], X[j]] if s == 0 else [B, X[j], Vs[(j + 1) % 8]]
        w = [3 + i % 3, 1 + i % 2, 1 + (i // 3) % 2]
        p = (tri[0] * w[0] + tri[1] * w[1] + tri[2] * w[2]) * Fraction(1, sum(w))
        out.append((OCT_BASE + 4 * j + 2 + s, p))
    return out


# -- black hole sphere --------------------------------------------------------

def _frame_map(u, w, a, b):
    """Integral linear map with u -> a and w -> b (must be unimodular)."""
    det = u.x * w.y - u.y * w.x
    # [a b] @ inverse([u w])
    ia, ib, ic, id_ = w.y / det, -w.x / det, -u.y / det, u.x / det
    m = [a.x * ia + b.x * ic, a.x * ib + b.x * id_, a.y * ia + b.y * ic, a.y * ib + b.y * id_]
    if any(x.denominator != 1 for x in m):
        raise GluingMismatch("corner frames are not lattice equivalent")
    lin = LinZ(*(int(x) for x in m))
    if lin.det() != 1:
        raise GluingMismatch("corner frames have different orientation or area")
    return lin


def _seam_map(i):
    # chart i-1 coordinates -> chart i coordinates across the seam at O_i
    O = flower_points()[0]
    return AffineT.about(seam_matrix(i), O[i])


def black_hole_sphere():
    """The flower glued to the complementary octagon along their boundaries."""
    fc, fg, ff = _flower_parts()
    oc, og, of = _octagon_parts()
    O, P, Qp, M = flower_points()
    Vs = octagon_points()[0]
    psi = []
    for j in range(8):
        S = _seam_map(j)
        lin = _frame_map(_OCT_DIRS[j], -_OCT_DIRS[j - 1], M[j] - P[j], S(M[j - 1]) - P[j])
        psi.append(AffineT(lin, P[j] - lin(Vs[j])))
    glue = []
    for j in range(8):
        n = (j + 1) % 8
        d1, d2 = OCT_BASE + 4 * j, OCT_BASE + 4 * j + 1
        glue.append(Gluing(EdgeRef(d1, 0), EdgeRef(j, 3), psi[j]))
        glue.append(Gluing(EdgeRef(d2, 1), EdgeRef(j, 2), compose(_seam_map(n).inverse(), psi[n])))
    a = Atlas(fc + oc, fg + og + glue, ff + of, name="black-hole")
    rep = validate(a)
    if not rep["pass"]:
        raise GluingMismatch("flower and octagon data do not glue")
    a.center = (0, V(0, 0))
    a.petals = list(range(8))
    a.octagon_center = (OCT_BASE + 2, octagon_points()[4])
    return a


# -- convex sphere ------------------------------------------------------------

SPHERE_C = 4
# standard triangle with its edge midpoints as straight vertices
_TRI = [V(0, 0), V(2, 0), V(4, 0), V(2, 2), V(0, 4), V(0, 2)]
_TRI_CORNERS = (0, 2, 4)
_QUARTER = LinZ(0, -1, 1, 0)


def _faces():
    """Octahedron faces as (chart id, [axis vertex at corner 0, 2, 4]).

    A vertex is (axis, sign); corners run counterclockwise seen from outside.
    """
    out = []
    for f in range(8):
        s = [1 - 2 * ((f >> (2 - i)) & 1) for i in range(3)]
        vs = [(i, s[i]) for i in range(3)]
        if s[0] * s[1] * s[2] < 0:
            vs = [vs[0], vs[2], vs[1]]
        out.append((f, vs))
    return out


def _corner_frame(corner):
    # maps the corner to the origin with its edges along (1,0) and (0,1)
    n = len(_TRI)
    p = _TRI[corner]
    (ux, uy), _ = primitive_int(_TRI[(corner + 1) % n] - p)
    (wx, wy), _ = primitive_int(_TRI[(corner - 1) % n] - p)
    lin = LinZ(ux, wx, uy, wy).inverse()
    return AffineT(lin, -lin(p))


def _sphere_parts():
    faces = _faces()
    at = {}   # octahedron vertex -> {face: corner}
    for f, vs in faces:
        for c, v in zip(_TRI_CORNERS, vs):
            at.setdefault(v, {})[f] = c
    phi, nxt = {}, {}
    for v, fc in at.items():
        # the face across a corner's counterclockwise edge is the next one around v
        for f, c in fc.items():
            vs = faces[f][1]
            prev = vs[(_TRI_CORNERS.index(c) - 1) % 3]
            other = vs[(_TRI_CORNERS.index(c) + 1) % 3]
            flipped = (other[0], -other[1])
            nxt[(v, f)] = next(g for g in fc if g != f and set(faces[g][1]) == {v, prev, flipped})
        f = min(fc)
        rot = ID2
        for _ in range(4):
            phi[(v, f)] = compose(AffineT(rot, V(0, 0)), _corner_frame(fc[f]))
            rot = _QUARTER @ rot
            f = nxt[(v, f)]
    gl = []
    for v, fc in sorted(at.items()):
        for f, c in sorted(fc.items()):
            g = nxt[(v, f)]
            m = compose(phi[(v, g)].inverse(), phi[(v, f)])
            gl.append(Gluing(EdgeRef(f, (c - 1) % 6), EdgeRef(g, fc[g]), m))
    charts = [Chart(f, _TRI) for f in range(8)]
    return charts, gl


def _midpoint_focus(charts, gluings):
    a = Atlas(charts, gluings)
    seen, focus = set(), []
    for f in sorted(a.charts):
        for vi, p in enumerate(a.charts[f].vertices):
            cls = a.class_of[Corner(f, vi)]
            if p in _TRI[1::2] and cls not in seen and not a.classes[cls].boundary:
                seen.add(cls)
                focus.append(FocusSpec(Corner(f, vi), 2))
    return focus


def strip_atlas(axis, charts=None, gluings=None):
    """Annulus of points at lattice distance <= 2 from the great circle avoiding +-axis."""
    if charts is None:
        charts, gluings = _sphere_parts()
    faces = _faces()
    sub = {}
    for f, vs in faces:
        ex = _TRI_CORNERS[[v[0] for v in vs].index(axis)]
        # drop the corner on the excluded axis and its two half edges
        keep = [p for i, p in enumerate(_TRI) if i != ex]
        sub[f] = Chart(f, keep)

    def edge_in(f, seg):
        c = sub[f]
        for i in range(c.n):
            if c.edge(i) == seg:
                return i
        return None

    gl = []
    for g in gluings:
        se = charts[g.src.chart].edge(g.src.edge)
        de = charts[g.dst.chart].edge(g.dst.edge)
        i, j = edge_in(g.src.chart, se), edge_in(g.dst.chart, de)
        if i is not None and j is not None:
            gl.append(Gluing(EdgeRef(g.src.chart, i), EdgeRef(g.dst.chart, j), g.map))
    chs = [sub[f] for f in range(8)]
    a = Atlas(chs, gl, _midpoint_focus(chs, gl), name=f"strip-{'XYZ'[axis]}")
    return a


def convex_sphere():
    """Octahedron of 8 standard triangles with 12 focus points of index 2 at edge midpoints."""
    charts, gl = _sphere_parts()
    a = Atlas(charts, gl, _midpoint_focus(charts, gl), name="convex-sphere")
    a.strips = {"XYZ"[i]: strip_atlas(i, charts, gl) for i in range(3)}
    return a


def focus_cylinder(k=1, delta=1, delta2=2):
    """Focus box with its two G-sides glued: an annulus around one focus point.

    The lines F = c are closed straight curves.
    """
    a = focus_box_atlas(k, delta, delta2)
    e = a.box["delta2"]
    if e - k * a.box["delta"] <= -e:
        raise InvalidParams("top of the box must have positive length")
    rect, trap = a.charts[RECT], a.charts[TRAP]
    gl = list(a.gluings) + [
        Gluing(EdgeRef(RECT, 4), EdgeRef(RECT, 1), AffineT(ID2, V(2 * e, 0))),
        Gluing(EdgeRef(TRAP, 4), EdgeRef(TRAP, 2), AffineT(shear(-k), V(2 * e, 0))),
    ]
    c = Atlas([rect, trap], gl, a.focus, name="focus-cylinder")
    c.box = dict(a.box)
    return c


# -- wall models ------------------------------------------------------------

def negative_k_box_model():
    from .box_model import negative_k_model
    return negative_k_model()


def focus2_box_model():
    from .box_model import nonconvex_focus2_model
    return nonconvex_focus2_model()


def dim3_model():
    from .box_model import dim3_two_curve_model
    return dim3_two_curve_model()


def registry():
    """Name -> builder of every shipped atlas."""
    return {
        "focus-box": focus_box_atlas,
        "focus-cylinder": focus_cylinder,
        "flower": shuriken_flower,
        "octagon": complement_octagon,
        "black-hole": black_hole_sphere,
        "convex-sphere": convex_sphere,
        "strip-X": lambda: strip_atlas(0),
        "strip-Y": lambda: strip_atlas(1),
        "strip-Z": lambda: strip_atlas(2),
    }
