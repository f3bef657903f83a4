"""Multi-valued coordinate boxes with monodromy walls and exact segment tests."""

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Optional

from .exact_affine import Q, fmt


class OutOfBounds(ValueError):
    pass


class DegeneratePair(ValueError):
    pass


class SearchFailed(RuntimeError):
    pass


@dataclass(frozen=True)
class Profile:
    """Piecewise-linear function of one coordinate, extended linearly past its ends.

    With arg None (or one breakpoint) it is constant.
    """
    arg: Optional[int]
    points: tuple

    @classmethod
    def const(cls, c):
        return cls(None, ((Fraction(0), Q(c)),))

    @classmethod
    def affine(cls, arg, slope, at0):
        slope, at0 = Q(slope), Q(at0)
        return cls(arg, ((Fraction(-1), at0 - slope), (Fraction(1), at0 + slope)))

    def __call__(self, coords):
        pts = self.points
        if self.arg is None or len(pts) == 1:
            return pts[0][1]
        x = coords[self.arg]
        i = 0
        while i < len(pts) - 2 and x > pts[i + 1][0]:
            i += 1
        (x0, y0), (x1, y1) = pts[i], pts[i + 1]
        return y0 + (y1 - y0) * (x - x0) / (x1 - x0)

    def to_dict(self):
        return {"arg": self.arg, "points": [[fmt(x), fmt(y)] for x, y in self.points]}

    @classmethod
    def from_dict(cls, d):
        pts = tuple((Q(x), Q(y)) for x, y in d["points"])
        if any(b[0] <= a[0] for a, b in zip(pts, pts[1:])):
            raise ValueError("profile breakpoints must increase")
        return cls(d.get("arg"), pts)


@dataclass(frozen=True)
class Wall:
    coeffs: tuple       # F_w(x) = sum(coeffs[i] * x[i]) + const
    const: Fraction
    k: Fraction
    paired: int         # index of the multi-valued coordinate G_w
    crit: Profile

    def F(self, x):
        return sum((c * v for c, v in zip(self.coeffs, x)), Fraction(0)) + self.const

    def to_dict(self):
        return {"functional": {"coeffs": [fmt(c) for c in self.coeffs], "const": fmt(self.const)},
                "k": fmt(self.k), "paired_G": self.paired, "crit": self.crit.to_dict()}

    @classmethod
    def from_dict(cls, d):
        f = d["functional"]
        return cls(tuple(Q(c) for c in f["coeffs"]), Q(f.get("const", "0")), Q(d["k"]),
                   int(d["paired_G"]), Profile.from_dict(d["crit"]))


@dataclass(frozen=True)
class WallModel:
    names: tuple
    bounds: tuple       # (lo, hi) per coordinate
    walls: tuple

    @property
    def dimension(self):
        return len(self.names)

    def to_dict(self):
        return {"dimension": self.dimension, "names": list(self.names),
                "bounds": [[fmt(lo), fmt(hi)] for lo, hi in self.bounds],
                "walls": [w.to_dict() for w in self.walls]}

    @classmethod
    def from_dict(cls, d):
        names = tuple(d["names"])
        bounds = tuple((Q(lo), Q(hi)) for lo, hi in d["bounds"])
        if len(bounds) != len(names) or d.get("dimension", len(names)) != len(names):
            raise ValueError("dimension, names and bounds disagree")
        walls = tuple(Wall.from_dict(w) for w in d["walls"])
        for w in walls:
            if len(w.coeffs) != len(names) or not 0 <= w.paired < len(names):
                raise ValueError("wall does not fit the coordinates")
        return cls(names, bounds, walls)


@dataclass(frozen=True)
class Candidate:
    branches: tuple     # (wall index, 'l' | 'r') for every crossed wall
    ends: tuple         # representation vectors of the two endpoints in these branches
    checks: tuple       # (wall, t, G value, crit value, 'Valid' | 'Broken', margin)

    @property
    def valid(self):
        return all(c[4] == "Valid" for c in self.checks)

    def point(self, t):
        a, b = self.ends
        return tuple((1 - t) * x + t * y for x, y in zip(a, b))

    def to_dict(self):
        return {"branches": {str(w): s for w, s in self.branches},
                "from": [fmt(v) for v in self.ends[0]], "to": [fmt(v) for v in self.ends[1]],
                "checks": [{"wall": w, "t": fmt(t), "G": fmt(g), "crit": fmt(c), "verdict": v,
                            "margin": fmt(m)} for w, t, g, c, v, m in self.checks],
                "valid": self.valid}


def box_point(*coords):
    return tuple(Q(c) for c in coords)


def check_point(m, x):
    if len(x) != m.dimension:
        raise OutOfBounds("wrong number of coordinates")
    for v, (lo, hi), name in zip(x, m.bounds, m.names):
        if not lo <= v <= hi:
            raise OutOfBounds(f"{name} = {v} outside [{lo}, {hi}]")
    for w in m.walls:
        f = w.F(x)
        if f > 0:
            lo, hi = m.bounds[w.paired]
            g = x[w.paired] + w.k * f
            if not lo <= g <= hi:
                raise OutOfBounds(f"right branch of {m.names[w.paired]} = {g} outside [{lo}, {hi}]")


def _rep(m, x, side):
    # coordinates of x with the chosen branch of each G_w ('r' adds k*F where F > 0)
    y = list(x)
    for w, s in side.items():
        f = m.walls[w].F(x)
        if s == "r" and f > 0:
            y[m.walls[w].paired] += m.walls[w].k * f
    return tuple(y)


def candidate_segments(m, a, b):
    """Every branch choice of a straight segment from a to b with its wall checks."""
    a, b = tuple(Q(v) for v in a), tuple(Q(v) for v in b)
    check_point(m, a)
    check_point(m, b)
    if a == b:
        raise DegeneratePair("endpoints coincide")
    crossed = [i for i, w in enumerate(m.walls) if w.F(a) * w.F(b) < 0]
    out = []
    for choice in product("lr", repeat=len(crossed)):
        side = dict(zip(crossed, choice))
        A, B = _rep(m, a, side), _rep(m, b, side)
        checks = []
        for i in crossed:
            w = m.walls[i]
            fa, fb = w.F(a), w.F(b)
            t = -fa / (fb - fa)
            X = tuple((1 - t) * x + t * y for x, y in zip(A, B))
            g, c = X[w.paired], w.crit(X)
            if side[i] == "l":
                margin = c - g
            else:
                margin = g - c
            checks.append((i, t, g, c, "Valid" if margin >= 0 else "Broken", margin))
        out.append(Candidate(tuple(sorted(side.items())), (A, B), tuple(checks)))
    return out


def segment_exists(m, a, b):
    """(number of straight segments from a to b, the valid candidates)."""
    good = [c for c in candidate_segments(m, a, b) if c.valid]
    return len(good), good


def recheck(m, c):
    """Re-derive the wall verdicts of a candidate from its endpoint vectors."""
    A, B = c.ends
    for i, t, g, crit, verdict, _ in c.checks:
        w = m.walls[i]
        X = c.point(t)
        # the wall functional vanishes at the crossing in every branch
        if w.F(X) != 0 or X[w.paired] != g or w.crit(X) != crit:
            return False
        side = dict(c.branches)[i]
        ok = g <= crit if side == "l" else g >= crit
        if ok != (verdict == "Valid"):
            return False
    return True


# -- builders ---------------------------------------------------------------

def focus_box_model(k=1, delta=1, delta2=2, crit=0):
    """Two-dimensional box: coordinates (F, G), one wall F = 0 of index k."""
    d, e = Q(delta), Q(delta2)
    wall = Wall((Fraction(1), Fraction(0)), Fraction(0), Q(k), 1, Profile.const(crit))
    return WallModel(("F", "G"), ((-d, d), (-e, e)), (wall,))


def negative_k_model():
    """Index -1 box with a pair joined by no straight segment."""
    m = focus_box_model(k=-1, delta=1, delta2=2)
    return m, box_point(-1, 0), box_point(1, Fraction(1, 2))


def focus2_model(crit1=None, crit2=None):
    """Coordinates (F1, F2, G1, G2) with walls F1 = 0 and F2 = 0, k = 1."""
    one = Fraction(1)
    c1 = crit1 if crit1 is not None else Profile.affine(3, 2, Fraction(-1, 4))
    c2 = crit2 if crit2 is not None else Profile.affine(2, -2, Fraction(3, 4))
    w1 = Wall((one, 0 * one, 0 * one, 0 * one), 0 * one, one, 2, c1)
    w2 = Wall((0 * one, one, 0 * one, 0 * one), 0 * one, one, 3, c2)
    return WallModel(("F1", "F2", "G1", "G2"), ((-one, one),) * 4, (w1, w2))


def nonconvex_focus2_model():
    m = focus2_model()
    return m, box_point(-1, -1, 0, 0), box_point(1, 1, 0, 0)


def _dim3(s1, c1, s2, c2):
    one = Fraction(1)
    # wall 1 sits at F = 0 with its right branch on the side F < 0
    w1 = Wall((-one, 0 * one, 0 * one), 0 * one, one, 1, Profile.affine(2, s1, c1))
    w2 = Wall((one, 0 * one, 0 * one), Fraction(-1, 2), one, 2, Profile.affine(1, s2, c2))
    return WallModel(("F", "G1", "G2"), ((-one, one),) * 3, (w1, w2))


DIM3_SLOPES = (4, -4, 3, -3, 2, -2, 1, -1)
DIM3_OFFSETS = (Fraction(0), Fraction(1, 2), Fraction(-1, 2))
DIM3_VALUES = (Fraction(0), Fraction(1, 2), Fraction(-1, 2))


def dim3_two_curve_model():
    """Three-dimensional box with walls F = 0 and F = 1/2 and a pair with no segment.

    The affine critical profiles and the endpoint G values are the first hit of a
    deterministic search over DIM3_SLOPES, DIM3_OFFSETS and DIM3_VALUES.
    """
    for s1, s2 in product(DIM3_SLOPES, repeat=2):
        for c1, c2 in product(DIM3_OFFSETS, repeat=2):
            m = _dim3(s1, c1, s2, c2)
            for g in product(DIM3_VALUES, repeat=4):
                a, b = box_point(-1, g[0], g[1]), box_point(1, g[2], g[3])
                try:
                    n, _ = segment_exists(m, a, b)
                except OutOfBounds:
                    continue
                if n == 0:
                    return m, a, b
    raise SearchFailed("no pair without segments in the search grid")


# -- scans ------------------------------------------------------------------

def grid(m, resolution):
    """Rational grid points of the box (resolution points per coordinate) that
    lie in bounds in every branch."""
    axes = []
    for lo, hi in m.bounds:
        n = resolution - 1
        axes.append([lo + (hi - lo) * Fraction(i, n) for i in range(resolution)])
    pts = []
    for x in product(*axes):
        try:
            check_point(m, x)
        except OutOfBounds:
            continue
        pts.append(x)
    return pts


def _case(m, a, b):
    # proof case of a pair crossing exactly one wall: i (only r), ii (only l), iii (both)
    cands = candidate_segments(m, a, b)
    if len(cands) != 2:
        return None
    ok = {c.branches[0][1]: c.valid for c in cands}
    return {(False, True): "i", (True, False): "ii", (True, True): "iii"}.get((ok["l"], ok["r"]))


def convexity_scan(m, resolution, against=None, witness_cap=20):
    """Segment counts for every ordered pair of distinct grid points.

    With `against` the second point runs over that coarser grid instead.
    """
    pts = grid(m, resolution)
    other = grid(m, against) if against else pts
    counts, zeros, cases = {}, [], {"i": 0, "ii": 0, "iii": 0}
    total = 0
    for a in pts:
        for b in other:
            if a == b:
                continue
            n, _ = segment_exists(m, a, b)
            total += 1
            counts[n] = counts.get(n, 0) + 1
            if n == 0 and len(zeros) < witness_cap:
                zeros.append([[fmt(v) for v in a], [fmt(v) for v in b]])
            if sum(w.F(a) * w.F(b) < 0 for w in m.walls) == 1:
                c = _case(m, a, b)
                if c:
                    cases[c] += 1
    return {"points": len(pts), "pairs": total,
            "min": min(counts) if counts else None, "max": max(counts) if counts else None,
            "histogram": {str(k): v for k, v in sorted(counts.items())},
            "zero_pairs": counts.get(0, 0), "witnesses": zeros, "cases": cases}
