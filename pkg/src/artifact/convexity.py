"""Segment search by corridor unfolding, convexity audits and trap experiments."""

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .atlas import Corner, EdgeRef, validate, boundary_loops
from .exact_affine import IDENTITY, Vec2, compose, cross, dot, same_dir
from .tracer import Ray, SurfacePoint, all_branches


class InvalidPoint(ValueError):
    pass


@dataclass
class SegmentWitness:
    pieces: list            # (chart, start, end) in chart coordinates, positive length
    corridor: list          # every chart met, including ones touched in a single point
    exits: list             # edge left at each step of the corridor
    slots: list             # corridor position of each piece
    start: Vec2             # developed endpoints
    end: Vec2
    certificates: list = field(default_factory=list)

    def to_dict(self):
        return {
            "pieces": [{"chart": c, "from": s.to_json(), "to": e.to_json()} for c, s, e in self.pieces],
            "corridor": list(self.corridor),
            "slots": list(self.slots),
            "exits": [list(r) for r in self.exits],
            "developed": [self.start.to_json(), self.end.to_json()],
            "certificates": self.certificates,
        }


@dataclass
class SearchResult:
    witnesses: list
    exhausted: bool
    nodes: int

    def __len__(self):
        return len(self.witnesses)

    def __iter__(self):
        return iter(self.witnesses)


def representations(a, chart, pos):
    """Every (chart, pos) naming the same surface point."""
    c = a.charts.get(chart)
    if c is None:
        raise InvalidPoint(f"unknown chart {chart}")
    pos = pos if isinstance(pos, Vec2) else Vec2.of(pos)
    kind, idx = c.locate(pos)
    if kind == "outside":
        raise InvalidPoint("point lies outside its chart")
    if kind == "vertex":
        cls = a.classes[a.class_of[Corner(chart, idx)]]
        return [(m.chart, a.vertex(m)) for m in cls.members]
    if kind == "edge":
        link = a.links.get(EdgeRef(chart, idx))
        if link is not None:
            return [(chart, pos), (link.chart, link.map(pos))]
    return [(chart, pos)]


def _in_arc(x, arc):
    lo, hi = arc
    if cross(lo, x) < 0 or cross(x, hi) < 0:
        return False
    if cross(lo, hi) == 0:
        return same_dir(x, lo)
    return True


def _meet(arc, win):
    # both arcs are narrower than a half turn
    if arc is None:
        return win
    lo = arc[0] if _in_arc(arc[0], win) else (win[0] if _in_arc(win[0], arc) else None)
    hi = arc[1] if _in_arc(arc[1], win) else (win[1] if _in_arc(win[1], arc) else None)
    if lo is None or hi is None or cross(lo, hi) < 0:
        return None
    return lo, hi


def _clip(poly, P, D):
    """Parameter interval of P + t*D (0 <= t <= 1) inside a convex polygon."""
    lo, hi = Fraction(0), Fraction(1)
    n = len(poly)
    for i in range(n):
        v, w = poly[i], poly[(i + 1) % n]
        e = w - v
        # cross(e, P + tD - v) >= 0
        c0, c1 = cross(e, P - v), cross(e, D)
        if c1 == 0:
            if c0 < 0:
                return None
        elif c1 > 0:
            lo = max(lo, -c0 / c1)
        else:
            hi = min(hi, -c0 / c1)
        if lo > hi:
            return None
    return lo, hi


def _verify(a, path, P, Q, polys=None):
    D = Q - P
    pieces, slots, certs, prev = [], [], [], Fraction(0)
    for k, (cid, dev) in enumerate(path):
        poly = polys[k] if polys else [dev(v) for v in a.charts[cid].vertices]
        iv = _clip(poly, P, D)
        if iv is None or iv[0] != prev:
            return None
        lo, hi = iv
        certs.append({"chart": cid, "t": [str(lo), str(hi)]})
        if hi > lo:
            inv = dev.inverse()
            s, e = inv(P + D * lo), inv(P + D * hi)
            pieces.append((cid, s, e))
            slots.append(k)
        prev = hi
    if prev != 1:
        return None
    return pieces, slots, certs


def _key(a, pieces):
    out = []
    for cid, s, e in pieces:
        m = (s + e) * Fraction(1, 2)
        out.append(a.canonical(cid, m))
    return tuple(out)


class Search:
    """Corridor tree of straight lines leaving one point, reusable for many targets."""

    def __init__(self, a, p, budget):
        self.a, self.budget = a, budget
        self.starts = representations(a, *p)
        self.nodes = []      # (chart, dev, arc, parent, depth, P, edge entered through)
        self.exhausted = False
        self._polys = {}
        self._grow()

    def _grow(self):
        a = self.a
        stack = []
        for cid, pos in self.starts:
            stack.append((cid, IDENTITY, None, -1, 0, pos, None, None))
        while stack:
            cid, dev, arc, parent, depth, P, entry, via = stack.pop()
            me = len(self.nodes)
            self.nodes.append((cid, dev, arc, parent, depth, P, via))
            if depth >= self.budget:
                self.exhausted = True
                continue
            c = a.charts[cid]
            for i in range(c.n):
                if i == entry:
                    continue
                link = a.links.get(EdgeRef(cid, i))
                if link is None:
                    continue
                v, w = c.edge(i)
                E0, E1 = dev(v), dev(w)
                if cross(E1 - E0, P - E0) <= 0:
                    continue
                sub = _meet(arc, (E0 - P, E1 - P))
                if sub is None:
                    continue
                stack.append((link.chart, compose(dev, link.map.inverse()), sub, me, depth + 1, P,
                              link.edge, EdgeRef(cid, i)))

    def _path(self, i):
        out, exits, idx = [], [], []
        while i >= 0:
            cid, dev, _, parent, _, _, via = self.nodes[i]
            out.append((cid, dev))
            idx.append(i)
            if via is not None:
                exits.append(via)
            i = parent
        return out[::-1], exits[::-1], idx[::-1]

    def _poly(self, i):
        if i not in self._polys:
            cid, dev = self.nodes[i][:2]
            self._polys[i] = [dev(v) for v in self.a.charts[cid].vertices]
        return self._polys[i]

    def to(self, q):
        a = self.a
        reps = representations(a, *q)
        by_chart = {}
        for cid, pos in reps:
            by_chart.setdefault(cid, []).append(pos)
        found, seen = [], set()
        for i, (cid, dev, arc, _, _, P, _) in enumerate(self.nodes):
            for pos in by_chart.get(cid, ()):
                Q = dev(pos)
                D = Q - P
                if D.is_zero() or (arc is not None and not _in_arc(D, arc)):
                    continue
                path, exits, idx = self._path(i)
                res = _verify(a, path, P, Q, [self._poly(j) for j in idx])
                if res is None:
                    continue
                pieces, slots, certs = res
                k = _key(a, pieces)
                if k in seen:
                    continue
                seen.add(k)
                found.append(SegmentWitness(pieces, [c for c, _ in path], exits, slots, P, Q, certs))
        return SearchResult(found, self.exhausted, len(self.nodes))


def segment_between(a, p, q, budget=50):
    """All straight segments from p to q that cross at most `budget` edges."""
    return Search(a, p, budget).to(q)


def witness_development(a, w):
    """Developing maps of the corridor charts, rebuilt from the exit edges; None if inconsistent."""
    devs, dev = [IDENTITY], IDENTITY
    for k, ref in enumerate(w.exits):
        link = a.links.get(ref)
        if link is None or ref.chart != w.corridor[k] or link.chart != w.corridor[k + 1]:
            return None
        dev = compose(dev, link.map.inverse())
        devs.append(dev)
    return devs


def recheck(a, w):
    """Re-validate a witness from scratch: rebuild the development from the exit
    edges, then check containment, continuity and collinearity exactly."""
    if not w.pieces:
        return False
    devs = witness_development(a, w)
    if devs is None:
        return False
    D = w.end - w.start
    at = w.start
    for (cid, s, e), k in zip(w.pieces, w.slots):
        if s == e or w.corridor[k] != cid:
            return False
        if not (a.charts[cid].contains(s) and a.charts[cid].contains(e)):
            return False
        S, E = devs[k](s), devs[k](e)
        if S != at or cross(D, E - S) != 0 or dot(D, E - S) <= 0:
            return False
        at = E
    return at == w.end


def audit_convexity(a, pairs, budget=50):
    """Run segment_between per pair and flag pairs with no segment."""
    rows, fails = [], 0
    cache = {}
    for p, q in pairs:
        key = (p[0], p[1])
        if key not in cache:
            cache = {key: Search(a, p, budget)}
        res = cache[key].to(q)
        n = len(res.witnesses)
        fails += n == 0
        rows.append({"p": [p[0], p[1].to_json()], "q": [q[0], q[1].to_json()], "count": n,
                     "status": "ok" if n else "NotFoundWithinBudget"})
    counts = [r["count"] for r in rows]
    return {"pairs": rows, "failures": fails, "total": len(rows),
            "min": min(counts) if counts else None, "max": max(counts) if counts else None}


def boundary_local_convexity(a):
    """Corner flags of every boundary vertex and straightness of every boundary loop."""
    rep = validate(a)
    corners = [{"class": c["class"], "angle": c["angle"]} for c in rep["corners"]]
    flag = {c["class"]: c["angle"] for c in corners}
    loops = []
    for loop in boundary_loops(a) if a.boundary_edges() else []:
        cls = [a.class_of[Corner(e.chart, e.edge)] for e, _ in loop]
        loops.append({"edges": [list(e) for e, _ in loop],
                      "straight": all(flag[c] == "straight" for c in cls),
                      "convex": all(flag[c] != "concave" for c in cls)})
    return {"corners": corners, "loops": loops}


def petal_invariant(a):
    """Per-trace check that the line moves from petal i to petal i+1 at every crossing."""
    petals = getattr(a, "petals", None)
    if petals is None:
        return None
    index = {c: i for i, c in enumerate(petals)}
    n = len(petals)

    def check(t):
        seq = [s.chart for s in t.steps]
        seq = [c for i, c in enumerate(seq) if i == 0 or seq[i - 1] != c]
        if any(c not in index for c in seq):
            return False
        return all((index[y] - index[x]) % n == 1 for x, y in zip(seq, seq[1:]))
    return check


def trap_directions(n):
    """n integer directions spread around the circle, nudged off the lattice axes and diagonals."""
    out = []
    for k in range(n):
        t = 2 * math.pi * k / n
        out.append(Vec2.of(round(1000 * math.cos(t)) + 1, round(1000 * math.sin(t)) + 2))
    return out


def trapped_test(a, start, directions, budget=1000, region=None, invariant=None):
    """Trace every direction from start, branching both ways at focus hits.

    A branch escapes if it hits the boundary or runs through a chart outside
    `region` (when given).
    """
    rows = []
    for d in directions:
        branches = all_branches(a, Ray(SurfacePoint(*start), d), budget)
        esc, inv_ok = False, True
        for t in branches:
            if t.end == "BoundaryHit":
                esc = True
            if region is not None and any(s.chart not in region for s in t.steps):
                esc = True
            if invariant is not None and not invariant(t):
                inv_ok = False
        rows.append({
            "dir": d.to_json(), "branches": len(branches), "escaped": esc,
            "boundary_hits": sum(t.end == "BoundaryHit" for t in branches),
            "crossings": max(t.crossings for t in branches),
            "max_bits": max(t.max_bits for t in branches),
            "invariant": inv_ok,
        })
    return {"directions": rows, "escaped": sum(r["escaped"] for r in rows),
            "boundary_hits": sum(r["boundary_hits"] for r in rows),
            "invariant_ok": all(r["invariant"] for r in rows)}
