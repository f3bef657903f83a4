"""Exact straight lines on glued polygon surfaces."""

from dataclasses import dataclass, field
from typing import NamedTuple, Optional

from .atlas import Corner, EdgeRef
from .exact_affine import (
    IDENTITY, Vec2, _in_ccw_arc, ccw_half_turns, compose, cross, fmt, primitive_int, same_dir,
)


class InvalidStart(ValueError):
    pass


class Eigendirection(ValueError):
    pass


class SurfacePoint(NamedTuple):
    chart: int
    pos: Vec2


class Ray(NamedTuple):
    start: SurfacePoint
    dir: Vec2


class Step(NamedTuple):
    chart: int
    entry: Vec2
    exit: Vec2
    dev: object   # AffineT: chart coordinates -> developed plane


@dataclass(frozen=True)
class TraceEvent:
    kind: str   # EdgeCross | FocusHit | FlatVertexPass | BoundaryHit | StepLimit
    gluing: Optional[int] = None
    vclass: Optional[int] = None
    edge: Optional[tuple] = None
    crossing: int = 0

    def to_dict(self):
        d = {"kind": self.kind, "crossing": self.crossing}
        for k in ("gluing", "vclass", "edge"):
            v = getattr(self, k)
            if v is not None:
                d[k] = list(v) if isinstance(v, tuple) else v
        return d


class Hit(NamedTuple):
    corner: Corner
    dir: Vec2
    dev: object


@dataclass
class Trace:
    atlas: object
    budget: int
    steps: list = field(default_factory=list)
    events: list = field(default_factory=list)
    branch_choices: list = field(default_factory=list)
    crossings: int = 0
    max_bits: int = 0
    hit: Optional[Hit] = None

    @property
    def end(self):
        return self.events[-1].kind if self.events else None

    def copy(self):
        return Trace(self.atlas, self.budget, list(self.steps), list(self.events),
                     list(self.branch_choices), self.crossings, self.max_bits, self.hit)

    def to_dict(self):
        poly, _ = develop(self)
        return {
            "steps": [{"chart": s.chart, "entry": s.entry.to_json(), "exit": s.exit.to_json()}
                      for s in self.steps],
            "events": [e.to_dict() for e in self.events],
            "branch_choices": list(self.branch_choices),
            "crossings": self.crossings,
            "max_bits": self.max_bits,
            "developed": [p.to_json() for p in poly],
        }


def _bits(v):
    return max(abs(v.x.numerator).bit_length(), v.x.denominator.bit_length(),
               abs(v.y.numerator).bit_length(), v.y.denominator.bit_length())


def _norm(d):
    (x, y), _ = primitive_int(d)
    return Vec2.of(x, y)


def in_sector(d, cw, ccw):
    """Is d in the closed counterclockwise sector from cw to ccw (angle <= pi)."""
    return same_dir(d, cw) or _in_ccw_arc(d, cw, ccw)


def _mirror(v):
    return Vec2(v.x, -v.y)


def vertex_sweep(a, corner, d, side):
    """Continue a line that arrives at the vertex of `corner` with direction d.

    Turns around the vertex counterclockwise for side "R" and clockwise for "L"
    until the developed angle from -d reaches pi.  Returns (corner, dir, map)
    with map taking the new chart into the old one, or None at the boundary.
    """
    ccw = side == "R"
    f = (lambda v: v) if ccw else _mirror
    chain = [f(-d)]
    cur, dev = corner, IDENTITY
    limit = 2 * len(a.classes[a.class_of[corner]].members) + 2
    for _ in range(limit):
        cw_dir, ccw_dir = a.corner_dirs(cur)
        far = f(dev.linear(ccw_dir if ccw else cw_dir))
        h, _ = ccw_half_turns(chain + [far])
        if h >= 1:
            return cur, _norm(dev.linear.inverse()(d)), dev
        chain.append(far)
        nxt, link = a.ccw_next(cur) if ccw else a.cw_next(cur)
        if nxt is None:
            return None
        dev = compose(dev, link.map.inverse())
        cur = nxt
    raise RuntimeError("vertex sweep did not close")


def is_eigen(a, corner, d):
    """Is d (in the corner's chart) fixed by the holonomy of an interior vertex."""
    cls = a.class_of[corner]
    walk, hol = a.corner_walk(cls)
    if hol is None:
        return False
    dev = next(dv for c, dv in walk if c == corner)
    D = dev.linear(d)
    return hol.linear(D) == D


def exit_point(chart, p, d):
    """(t, point, 'vertex'|'edge', index) where the ray p + t*d leaves the chart."""
    best, hits = None, []
    for i, (v, e) in enumerate(zip(chart.vertices, chart.edge_vecs)):
        c = cross(e, d)
        if c < 0:
            t = cross(e, p - v) / -c
            if best is None or t < best:
                best, hits = t, [i]
            elif t == best:
                hits.append(i)
    if best is None:
        raise ValueError("direction does not leave the chart")
    # a ray running along the boundary meets straight vertices on the way
    first = None
    for i, v in enumerate(chart.vertices):
        w = v - p
        if not w.is_zero() and cross(d, w) == 0:
            t = (w.x / d.x) if d.x else (w.y / d.y)
            if 0 < t < best and (first is None or t < first[0]):
                first = (t, i)
    if first is not None:
        return first[0], chart.vertices[first[1]], "vertex", first[1]
    x = p + d * best
    for i, v in enumerate(chart.vertices):
        if v == x:
            return best, x, "vertex", i
    return best, x, "edge", hits[0]


def _start(a, ray):
    (chart, pos), d = ray
    pos = pos if isinstance(pos, Vec2) else Vec2.of(pos)
    d = d if isinstance(d, Vec2) else Vec2.of(d)
    if d.is_zero():
        raise InvalidStart("zero direction")
    c = a.charts.get(chart)
    if c is None:
        raise InvalidStart(f"unknown chart {chart}")
    kind, idx = c.locate(pos)
    if kind == "outside":
        raise InvalidStart("start point is outside its chart")
    d = _norm(d)
    if kind == "vertex":
        for turn in (a.ccw_next, a.cw_next):
            cur, dev = Corner(chart, idx), IDENTITY
            for _ in range(len(a.classes[a.class_of[cur]].members)):
                cw_dir, ccw_dir = a.corner_dirs(cur)
                dd = dev.linear.inverse()(d)
                if in_sector(dd, cw_dir, ccw_dir):
                    return cur.chart, a.vertex(cur), _norm(dd), dev
                nxt, link = turn(cur)
                if nxt is None:
                    break
                dev = compose(dev, link.map.inverse())
                cur = nxt
        raise InvalidStart("direction leaves the surface at the start vertex")
    if kind == "edge" and cross(c.edge_vecs[idx], d) < 0:
        link = a.links.get(EdgeRef(chart, idx))
        if link is None:
            return chart, pos, d, None
        return link.chart, link.map(pos), _norm(link.map.linear(d)), link.map.inverse()
    return chart, pos, d, IDENTITY


def trace(a, ray, budget=1000):
    """Follow a straight ray until the boundary, a focus point or the crossing budget."""
    chart, pos, d, dev = _start(a, ray)
    t = Trace(a, budget)
    if dev is None:
        t.events.append(TraceEvent("BoundaryHit", edge=(chart, a.charts[chart].locate(pos)[1])))
        return t
    return _run(a, t, chart, pos, d, dev)


def _run(a, t, chart, pos, d, dev):
    while True:
        c = a.charts[chart]
        s, x, kind, idx = exit_point(c, pos, d)
        if s > 0:
            t.steps.append(Step(chart, pos, x, dev))
            t.max_bits = max(t.max_bits, _bits(x))
        if kind == "vertex":
            corner = Corner(chart, idx)
            cls = a.class_of[corner]
            if a.classes[cls].boundary:
                t.events.append(TraceEvent("BoundaryHit", vclass=cls, crossing=t.crossings))
                return t
            if a.declared_index(cls) is not None and not is_eigen(a, corner, d):
                t.events.append(TraceEvent("FocusHit", vclass=cls, crossing=t.crossings))
                t.hit = Hit(corner, d, dev)
                return t
            if t.crossings >= t.budget:
                t.events.append(TraceEvent("StepLimit", crossing=t.crossings))
                return t
            cur, d, m = vertex_sweep(a, corner, d, "R")
            chart, pos, dev = cur.chart, a.vertex(cur), compose(dev, m)
            t.crossings += 1
            t.events.append(TraceEvent("FlatVertexPass", vclass=cls, crossing=t.crossings))
        else:
            link = a.links.get(EdgeRef(chart, idx))
            if link is None:
                t.events.append(TraceEvent("BoundaryHit", edge=(chart, idx), crossing=t.crossings))
                return t
            if t.crossings >= t.budget:
                t.events.append(TraceEvent("StepLimit", crossing=t.crossings))
                return t
            pos, d = link.map(x), _norm(link.map.linear(d))
            dev = compose(dev, link.map.inverse())
            chart = link.chart
            t.crossings += 1
            t.events.append(TraceEvent("EdgeCross", gluing=link.gluing, crossing=t.crossings))


def extend_through_focus(a, t, side):
    """Continue a trace that ended at a focus point, as the limit of nearby lines
    passing on the given side ("L" or "R") of it."""
    if t.end != "FocusHit" or t.hit is None:
        raise ValueError("trace does not end at a focus point")
    if side not in ("L", "R"):
        raise ValueError("side must be 'L' or 'R'")
    corner, d, dev = t.hit
    if is_eigen(a, corner, d):
        raise Eigendirection("incoming direction is fixed by the focus holonomy")
    u = t.copy()
    u.hit = None
    u.branch_choices.append(side)
    if u.crossings >= u.budget:
        u.events.append(TraceEvent("StepLimit", crossing=u.crossings))
        return u
    cur, d2, m = vertex_sweep(a, corner, d, side)
    u.crossings += 1
    return _run(a, u, cur.chart, a.vertex(cur), d2, compose(dev, m))


def all_branches(a, ray, budget=1000, limit=4096):
    """Every trace obtained by branching both ways at each focus hit."""
    out, todo = [], [trace(a, ray, budget)]
    while todo:
        t = todo.pop()
        if t.end == "FocusHit" and len(out) + len(todo) < limit:
            todo.extend(extend_through_focus(a, t, s) for s in ("R", "L"))
        else:
            out.append(t)
    return out


def develop(t):
    """Developed polyline (collinear runs merged) and developed chart polygons."""
    pts, corridor = [], []
    for s in t.steps:
        e, x = s.dev(s.entry), s.dev(s.exit)
        if not pts:
            pts.append(e)
        elif pts[-1] != e:
            pts.append(e)
        if len(pts) >= 2 and cross(pts[-1] - pts[-2], x - pts[-1]) == 0:
            pts[-1] = x
        else:
            pts.append(x)
        corridor.append([s.dev(v) for v in t.atlas.charts[s.chart].vertices])
    return pts, corridor


def point_json(p):
    return [fmt(p.x), fmt(p.y)]
