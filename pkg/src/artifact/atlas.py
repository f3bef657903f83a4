"""Surfaces glued from convex rational polygons, with focus vertex classes."""

from dataclasses import dataclass, field
from typing import NamedTuple

from .exact_affine import (
    AffineT, IDENTITY, LinZ, NotParabolic, Q, Vec2, ccw_half_turns, compose,
    characteristic_number, cross, dot, focus_index, fmt, integral_length, primitive_int,
)


class StructuralError(ValueError):
    pass


class BoundaryVertex(ValueError):
    pass


class EndpointMismatch(ValueError):
    pass


class EdgeRef(NamedTuple):
    chart: int
    edge: int


class Corner(NamedTuple):
    chart: int
    vertex: int


class Chart:
    def __init__(self, id, vertices):
        self.id = id
        self.vertices = tuple(v if isinstance(v, Vec2) else Vec2.of(v) for v in vertices)
        self.n = len(self.vertices)
        self.edge_vecs = tuple(self.vertices[(i + 1) % self.n] - self.vertices[i]
                               for i in range(self.n))

    def edge(self, i):
        return self.vertices[i], self.vertices[(i + 1) % self.n]

    def shape_problem(self):
        """None if the polygon is weakly convex and counterclockwise."""
        if self.n < 3:
            return "fewer than 3 vertices"
        if len(set(self.vertices)) != self.n:
            return "repeated vertex"
        strict = 0
        for i in range(self.n):
            e, f = self.edge_vecs[i], self.edge_vecs[(i + 1) % self.n]
            c = cross(e, f)
            if c < 0:
                return f"reflex or clockwise turn at vertex {(i + 1) % self.n}"
            if c == 0 and dot(e, f) < 0:
                return f"polygon folds back at vertex {(i + 1) % self.n}"
            strict += c > 0
        if strict < 3:
            return "degenerate polygon"
        h, _ = ccw_half_turns(list(self.edge_vecs) + [self.edge_vecs[0]])
        if h != 2:
            return "polygon winds more than once"
        return None

    def contains(self, p):
        for v, e in zip(self.vertices, self.edge_vecs):
            if cross(e, p - v) < 0:
                return False
        return True

    def locate(self, p):
        """('inside'|'edge'|'vertex'|'outside', index)."""
        on = []
        for i, (v, e) in enumerate(zip(self.vertices, self.edge_vecs)):
            c = cross(e, p - v)
            if c < 0:
                return "outside", None
            if c == 0:
                on.append(i)
        for i, v in enumerate(self.vertices):
            if v == p:
                return "vertex", i
        if on:
            return "edge", on[0]
        return "inside", None


@dataclass(frozen=True)
class Gluing:
    src: EdgeRef
    dst: EdgeRef
    map: AffineT


@dataclass(frozen=True)
class FocusSpec:
    vertex: Corner
    index: int


class Link(NamedTuple):
    """The other side of a glued edge, with the map into its coordinates."""
    chart: int
    edge: int
    map: AffineT
    gluing: int


@dataclass
class VertexClass:
    id: int
    members: list
    boundary: bool
    # counterclockwise chain of corners; for boundary classes it starts at the
    # corner whose clockwise edge is unglued
    cycle: list = field(default_factory=list)


class Atlas:
    def __init__(self, charts, gluings, focus=(), name=None):
        self.name = name
        self.charts = {}
        for c in charts:
            if c.id in self.charts:
                raise StructuralError(f"duplicate chart id {c.id}")
            self.charts[c.id] = c
        self.gluings = list(gluings)
        self.focus = list(focus)
        self.links = {}
        for gi, g in enumerate(self.gluings):
            for ref in (g.src, g.dst):
                if ref.chart not in self.charts:
                    raise StructuralError(f"gluing {gi} names unknown chart {ref.chart}")
                if not 0 <= ref.edge < self.charts[ref.chart].n:
                    raise StructuralError(f"gluing {gi} names bad edge {tuple(ref)}")
                if ref in self.links:
                    raise StructuralError(f"edge {tuple(ref)} glued twice")
            if g.src == g.dst:
                raise StructuralError(f"gluing {gi} glues an edge to itself")
            if g.map.linear.det() not in (1, -1):
                raise StructuralError(f"gluing {gi} has non-unimodular linear part")
            self.links[g.src] = Link(g.dst.chart, g.dst.edge, g.map, gi)
            self.links[g.dst] = Link(g.src.chart, g.src.edge, g.map.inverse(), gi)
        for f in self.focus:
            if f.vertex.chart not in self.charts or not 0 <= f.vertex.vertex < self.charts[f.vertex.chart].n:
                raise StructuralError(f"focus declaration names bad corner {tuple(f.vertex)}")
        self._build_classes()

    # -- combinatorics -------------------------------------------------

    def _build_classes(self):
        parent = {}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for cid, c in self.charts.items():
            for v in range(c.n):
                parent[Corner(cid, v)] = Corner(cid, v)
        for ref, link in self.links.items():
            n, m = self.charts[ref.chart].n, self.charts[link.chart].n
            # edge i runs v_i -> v_i+1 and is glued reversed
            for a, b in ((Corner(ref.chart, ref.edge), Corner(link.chart, (link.edge + 1) % m)),
                         (Corner(ref.chart, (ref.edge + 1) % n), Corner(link.chart, link.edge))):
                ra, rb = find(a), find(b)
                if ra != rb:
                    parent[max(ra, rb)] = min(ra, rb)
        groups = {}
        for corner in parent:
            groups.setdefault(find(corner), []).append(corner)
        self.classes = []
        self.class_of = {}
        for i, root in enumerate(sorted(groups, key=lambda r: min(groups[r]))):
            members = sorted(groups[root])
            vc = VertexClass(i, members, False)
            for m in members:
                self.class_of[m] = i
            self.classes.append(vc)
        for vc in self.classes:
            self._walk(vc)

    def ccw_next(self, corner):
        """Cross the counterclockwise edge of a corner; None at the boundary."""
        c = self.charts[corner.chart]
        ref = EdgeRef(corner.chart, (corner.vertex - 1) % c.n)
        link = self.links.get(ref)
        if link is None:
            return None, None
        return Corner(link.chart, link.edge), link

    def cw_next(self, corner):
        ref = EdgeRef(corner.chart, corner.vertex)
        link = self.links.get(ref)
        if link is None:
            return None, None
        m = self.charts[link.chart].n
        return Corner(link.chart, (link.edge + 1) % m), link

    def _walk(self, vc):
        start = vc.members[0]
        # rewind clockwise to a boundary corner, if any
        cur, seen = start, {start}
        while True:
            prev, _ = self.cw_next(cur)
            if prev is None:
                vc.boundary = True
                break
            if prev == start:
                break
            if prev in seen:
                raise StructuralError(f"vertex class {vc.id} is not a disk or cone")
            seen.add(prev)
            cur = prev
        first = cur if vc.boundary else start
        chain, cur = [first], first
        while True:
            nxt, _ = self.ccw_next(cur)
            if nxt is None or nxt == first:
                break
            chain.append(nxt)
            cur = nxt
        if len(chain) != len(vc.members):
            raise StructuralError(f"vertex class {vc.id} is not a single cycle")
        vc.cycle = chain

    def boundary_edges(self):
        return [EdgeRef(cid, i) for cid, c in sorted(self.charts.items())
                for i in range(c.n) if EdgeRef(cid, i) not in self.links]

    def vertex(self, corner):
        return self.charts[corner.chart].vertices[corner.vertex]

    def class_id(self, chart, vertex):
        return self.class_of[Corner(chart, vertex)]

    def declared_index(self, cls_id):
        for f in self.focus:
            if self.class_of[f.vertex] == cls_id:
                return f.index
        return None

    # -- geometry around a vertex --------------------------------------

    def corner_walk(self, cls_id):
        """Counterclockwise corners with developing maps into the first corner's chart.

        Returns a list of (corner, dev) and the map accumulated after the last
        crossing (the holonomy for interior classes).
        """
        vc = self.classes[cls_id]
        dev = IDENTITY
        out = []
        for i, corner in enumerate(vc.cycle):
            out.append((corner, dev))
            nxt, link = self.ccw_next(corner)
            if nxt is None:
                return out, None
            dev = compose(dev, link.map.inverse())
        return out, dev

    def corner_dirs(self, corner):
        c = self.charts[corner.chart]
        v = c.vertices[corner.vertex]
        cw = c.vertices[(corner.vertex + 1) % c.n] - v
        ccw = c.vertices[(corner.vertex - 1) % c.n] - v
        return cw, ccw

    def developed_turns(self, cls_id):
        walk, final = self.corner_walk(cls_id)
        dirs = []
        for corner, dev in walk:
            cw, ccw = self.corner_dirs(corner)
            dcw, dccw = dev.linear(cw), dev.linear(ccw)
            if dirs and not (cross(dirs[-1], dcw) == 0 and dot(dirs[-1], dcw) > 0):
                raise EndpointMismatch(f"corners of class {cls_id} do not develop edge to edge")
            if not dirs:
                dirs.append(dcw)
            dirs.append(dccw)
        return ccw_half_turns(dirs), dirs

    def vertex_holonomy(self, cls_id):
        vc = self.classes[cls_id]
        if vc.boundary:
            raise BoundaryVertex(f"vertex class {cls_id} touches the boundary")
        _, hol = self.corner_walk(cls_id)
        return hol

    def total_focus_index(self):
        rep = validate(self)
        if not rep["pass"]:
            raise StructuralError("atlas does not validate")
        return sum(v["index"] for v in rep["vertices"] if v["kind"] == "FOCUS")

    def focus_classes(self):
        return [f for f in range(len(self.classes)) if self.declared_index(f) is not None]

    # -- points ---------------------------------------------------------

    def canonical(self, chart, pos):
        """Owning (chart, pos) for a point given in some chart."""
        c = self.charts.get(chart)
        if c is None:
            raise StructuralError(f"unknown chart {chart}")
        kind, idx = c.locate(pos)
        if kind == "outside":
            return None
        if kind == "vertex":
            best = min(self.classes[self.class_of[Corner(chart, idx)]].members)
            return best.chart, self.vertex(best)
        if kind == "edge":
            link = self.links.get(EdgeRef(chart, idx))
            if link is not None and link.chart < chart:
                return link.chart, link.map(pos)
        return chart, pos


def validate(a):
    """Structured report; never raises on bad geometry."""
    report = {"charts": [], "gluings": [], "vertices": [], "corners": [], "pass": True}
    ok = True
    for cid, c in sorted(a.charts.items()):
        prob = c.shape_problem()
        report["charts"].append({"id": cid, "ok": prob is None, "error": prob})
        ok &= prob is None
    for gi, g in enumerate(a.gluings):
        err = None
        if g.map.linear.det() != 1:
            err = "linear part must have determinant +1"
        else:
            p0, p1 = a.charts[g.src.chart].edge(g.src.edge)
            q0, q1 = a.charts[g.dst.chart].edge(g.dst.edge)
            if g.map(p0) != q1 or g.map(p1) != q0:
                err = "EndpointMismatch: map does not send the edge onto the glued edge reversed"
        report["gluings"].append({"index": gi, "src": list(g.src), "dst": list(g.dst), "ok": err is None,
                                  "error": err})
        ok &= err is None
    declared = {}
    for f in a.focus:
        if f.index < 1:
            report["vertices"].append({"class": a.class_of[f.vertex], "kind": "INVALID",
                                       "reason": "declared index must be >= 1"})
            ok = False
        declared.setdefault(a.class_of[f.vertex], []).append(f.index)
    if not ok:
        report["pass"] = False
        return report
    # connectedness
    seen, stack = set(), [min(a.charts)]
    while stack:
        cid = stack.pop()
        if cid in seen:
            continue
        seen.add(cid)
        stack.extend(l.chart for r, l in a.links.items() if r.chart == cid)
    if len(seen) != len(a.charts):
        report["connected"] = False
        ok = False
    else:
        report["connected"] = True
    for vc in a.classes:
        entry = {"class": vc.id, "members": [list(m) for m in vc.members]}
        decl = declared.get(vc.id)
        try:
            if vc.boundary:
                (h, on_line), _ = a.developed_turns(vc.id)
                flag = "convex" if h == 0 else ("straight" if h == 1 and on_line else "concave")
                report["corners"].append({"class": vc.id, "members": entry["members"],
                                          "angle": flag, "half_turns": h, "exact": on_line})
                if decl:
                    entry.update(kind="INVALID", reason="focus declared on a boundary vertex")
                    ok = False
                else:
                    continue
            else:
                hol = a.vertex_holonomy(vc.id)
                entry["holonomy"] = transform_to_json(hol)
                p = a.vertex(vc.cycle[0])
                if hol(p) != p:
                    entry.update(kind="INVALID", reason="holonomy moves the vertex")
                elif hol.linear == LinZ(1, 0, 0, 1):
                    (h, on_line), _ = a.developed_turns(vc.id)
                    if h == 2 and on_line and not decl:
                        entry["kind"] = "FLAT"
                    else:
                        entry.update(kind="INVALID",
                                     reason="identity holonomy with angle != 2pi" if not decl
                                     else "focus declared on a flat vertex")
                else:
                    try:
                        k = focus_index(hol.linear)
                    except NotParabolic:
                        k = None
                    if k is None:
                        entry.update(kind="INVALID", reason="holonomy is not parabolic")
                    elif k <= 0:
                        entry.update(kind="INVALID", reason=f"negative focus index {k}")
                    elif decl != [k]:
                        entry.update(kind="INVALID", index=k,
                                     reason=f"computed index {k}, declared {decl}")
                    else:
                        entry.update(kind="FOCUS", index=k)
        except (EndpointMismatch, StructuralError) as exc:
            entry.update(kind="INVALID", reason=str(exc))
        ok &= entry["kind"] != "INVALID"
        report["vertices"].append(entry)
    report["pass"] = bool(ok)
    return report


def vertex_holonomy(a, cls_id):
    return a.vertex_holonomy(cls_id)


def total_focus_index(a):
    return a.total_focus_index()


def transform_to_json(t):
    return {"linear": t.linear.rows(), "translation": t.translation.to_json()}


def atlas_to_dict(a):
    return {
        "charts": [{"id": cid, "vertices": [v.to_json() for v in c.vertices]}
                   for cid, c in sorted(a.charts.items())],
        "gluings": [{"src": list(g.src), "dst": list(g.dst), "linear": g.map.linear.rows(),
                     "translation": g.map.translation.to_json()} for g in a.gluings],
        "focus": [{"vertex": list(f.vertex), "index": f.index} for f in a.focus],
        "name": a.name,
        "meta": _meta_to_dict(a),
    }


def _meta_to_dict(a):
    m = {}
    if getattr(a, "box", None):
        m["box"] = {k: fmt(v) for k, v in a.box.items()}
    if getattr(a, "petals", None) is not None:
        m["petals"] = list(a.petals)
    for key in ("center", "octagon_center"):
        p = getattr(a, key, None)
        if p is not None:
            m[key] = [p[0], p[1].to_json()]
    return m


def _meta_from_dict(a, m):
    if "box" in m:
        a.box = {k: Q(v) for k, v in m["box"].items()}
        if a.box.get("k", Q(0)).denominator == 1:
            a.box["k"] = int(a.box["k"])
    if "petals" in m:
        a.petals = [int(c) for c in m["petals"]]
    for key in ("center", "octagon_center"):
        if key in m:
            setattr(a, key, (int(m[key][0]), Vec2.of(*m[key][1])))


def atlas_from_dict(d):
    charts = [Chart(int(c["id"]), [Vec2.of(*v) for v in c["vertices"]]) for c in d["charts"]]
    gluings = []
    for g in d.get("gluings", []):
        lin = LinZ.of(g["linear"])
        gluings.append(Gluing(EdgeRef(*map(int, g["src"])), EdgeRef(*map(int, g["dst"])),
                              AffineT(lin, Vec2.of(*g.get("translation", ["0", "0"])))))
    focus = [FocusSpec(Corner(*map(int, f["vertex"])), int(f["index"])) for f in d.get("focus", [])]
    a = Atlas(charts, gluings, focus, name=d.get("name"))
    _meta_from_dict(a, d.get("meta", {}))
    return a


def boundary_loops(a):
    """Boundary components, each a list of (edge, developing map), counterclockwise.

    Consecutive entries are developed continuously (interior on the left).
    """
    todo = set(a.boundary_edges())
    first_corner = {}
    for vc in a.classes:
        if vc.boundary:
            first_corner[vc.id] = vc
    loops = []
    while todo:
        start = min(todo)
        dev = IDENTITY
        loop, e = [], start
        while True:
            loop.append((e, dev))
            todo.discard(e)
            c = a.charts[e.chart]
            end = Corner(e.chart, (e.edge + 1) % c.n)
            vc = a.classes[a.class_of[end]]
            walk, _ = a.corner_walk(vc.id)
            last_corner, dev_last = walk[-1]
            assert last_corner == end
            dev = compose(dev, dev_last.inverse())
            first = vc.cycle[0]
            e = EdgeRef(first.chart, first.vertex)
            if e == start:
                break
        loops.append(loop)
    return loops


def developed_boundary(a, loop, extra=3):
    """Developed corner points of a boundary loop, wrapping `extra` points."""
    pts = []
    n = len(loop)
    # continue the development past the end for windows that wrap around
    dev_shift = IDENTITY
    for rnd in range(2):
        for idx, (e, dev) in enumerate(loop):
            if rnd and idx >= extra:
                break
            p = a.charts[e.chart].vertices[e.edge]
            pts.append((e, compose(dev_shift, dev)(p)))
        # holonomy of the whole loop: development of the start edge after one turn
        if rnd == 0:
            e_last, dev_last = loop[-1]
            c = a.charts[e_last.chart]
            end = Corner(e_last.chart, (e_last.edge + 1) % c.n)
            walk, _ = a.corner_walk(a.class_of[end])
            dev_shift = compose(dev_last, walk[-1][1].inverse())
    return pts[: n + extra]


def boundary_invariants(a, loop, reverse=False):
    """Per maximal straight boundary edge: integral length, simplicity of its
    start vertex and characteristic number, read off the developed boundary.

    With reverse=True the loop is read clockwise, so the exterior side is the
    one on the left of the traversal.
    """
    n = len(loop)
    pts = developed_boundary(a, loop, extra=n)
    if reverse:
        pts = pts[::-1]
    # keep only genuine corners (drop points where the boundary runs straight)
    corners = []
    m = len(pts)
    for i in range(1, m - 1):
        (_, p0), (_, p1), (_, p2) = pts[i - 1], pts[i], pts[i + 1]
        if cross(p1 - p0, p2 - p1) != 0 or dot(p1 - p0, p2 - p1) < 0:
            corners.append(pts[i])
    # one full turn of corners is enough; windows need 4 consecutive points
    out = []
    seen = set()
    for i in range(len(corners) - 3):
        (e0, a0), (e1, a1), (e2, a2), (e3, a3) = corners[i:i + 4]
        key = (a.class_of[Corner(e1.chart, e1.edge)], a.class_of[Corner(e2.chart, e2.edge)])
        if key in seen:
            break
        seen.add(key)
        (ux, uy), _ = primitive_int(a2 - a1)
        (wx, wy), _ = primitive_int(a1 - a0)
        out.append({
            "from": key[0], "to": key[1],
            "length": integral_length(a1, a2),
            "simple": abs(ux * wy - uy * wx) == 1,
            "char": characteristic_number(a0, a1, a2, a3),
        })
    return out
