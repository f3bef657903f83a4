"""Angle variation of closed curves through the developing map."""

import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import mpmath

from .atlas import EdgeRef
from .exact_affine import (
    IDENTITY, NotParabolic, Vec2, compose, cross, dot, focus_index, same_dir, signed_half_turns,
)

PREC_ENV = "ARTIFACT_AV_PREC"


class CurveHitsFocus(ValueError):
    pass


class NotClosed(ValueError):
    pass


@dataclass
class ClosedCurve:
    legs: list      # [(chart, [points...])], each leg a polyline inside one chart

    @classmethod
    def from_dict(cls, d):
        return cls([(int(l["chart"]), [Vec2.of(*p) for p in l["points"]]) for l in d["legs"]])

    def to_dict(self):
        return {"legs": [{"chart": c, "points": [p.to_json() for p in pts]} for c, pts in self.legs]}


@dataclass
class AngleResult:
    value: object               # mpmath float, radians
    pi_multiple: Optional[int]
    tolerance: Fraction
    turns: int                  # floor of the developed turning over pi

    def to_dict(self):
        return {"value": mpmath.nstr(self.value, 30), "pi_multiple": self.pi_multiple,
                "tolerance": str(self.tolerance), "turns": self.turns}


def precision():
    try:
        return max(53, int(os.environ.get(PREC_ENV, "128")))
    except ValueError:
        return 128


def _transition(a, c0, x, c1, y):
    # map from chart c0 to chart c1 carrying x to y
    if c0 == c1 and x == y:
        return IDENTITY
    chart = a.charts[c0]
    for i, (v, e) in enumerate(zip(chart.vertices, chart.edge_vecs)):
        if cross(e, x - v) == 0 and dot(e, x - v) >= 0 and dot(e, x - v) <= dot(e, e):
            link = a.links.get(EdgeRef(c0, i))
            if link is not None and link.chart == c1 and link.map(x) == y:
                return link.map
    raise NotClosed(f"no gluing carries chart {c0} at {tuple(x)} to chart {c1}")


def _check_focus(a, chart, p, q):
    c = a.charts[chart]
    for vi, v in enumerate(c.vertices):
        if cross(q - p, v - p) == 0 and dot(v - p, v - q) <= 0:
            cls = a.class_of[(chart, vi)]
            if a.declared_index(cls) is not None:
                raise CurveHitsFocus(f"curve meets the focus point of class {cls}")


def develop_curve(a, curve):
    """Developed polyline and the holonomy of the closing transition."""
    legs = curve.legs
    if not legs:
        raise NotClosed("empty curve")
    dev, pts = IDENTITY, []
    for i, (cid, ps) in enumerate(legs):
        if cid not in a.charts:
            raise NotClosed(f"unknown chart {cid}")
        for p in ps:
            if not a.charts[cid].contains(p):
                raise NotClosed(f"point {tuple(p)} is outside chart {cid}")
        for p, q in zip(ps, ps[1:]):
            _check_focus(a, cid, p, q)
        for p in ps:
            if not pts or pts[-1] != dev(p):
                pts.append(dev(p))
        ncid, nps = legs[(i + 1) % len(legs)]
        m = _transition(a, cid, ps[-1], ncid, nps[0])
        dev = compose(dev, m.inverse())
    # dev is now the holonomy of the loop in the frame of the first chart
    if pts[-1] != dev(legs[0][1][0]):
        raise NotClosed("curve does not return to its start")
    return pts, dev


def _rot90(v):
    return Vec2(-v.y, v.x)


def _ccw_chain(v, w):
    # directions from v to w turning counterclockwise, each step below a half turn
    out, cur = [v], v
    while not same_dir(cur, w):
        if cross(cur, w) > 0:
            out.append(w)
            break
        cur = _rot90(cur)
        out.append(cur)
    return out


def _angle(v):
    return mpmath.atan2(mpmath.mpf(v.y.numerator) / v.y.denominator,
                        mpmath.mpf(v.x.numerator) / v.x.denominator)


def _ccw_angle(v, w):
    # counterclockwise angle from v to w in [0, 2pi)
    t = _angle(w) - _angle(v)
    while t < 0:
        t += 2 * mpmath.pi
    while t >= 2 * mpmath.pi:
        t -= 2 * mpmath.pi
    if same_dir(v, w):
        t = mpmath.mpf(0)
    return t


def angle_variation(a, curve, v):
    """Total turning of the tangent of a closed curve relative to the transported v."""
    v = v if isinstance(v, Vec2) else Vec2.of(v)
    if v.is_zero():
        raise ValueError("reference vector is zero")
    pts, hol = develop_curve(a, curve)
    dirs = [q - p for p, q in zip(pts, pts[1:])]
    if not dirs:
        raise NotClosed("curve has no edges")
    w0 = dirs[0]
    end = hol.linear(w0)
    try:
        n_dev, _ = signed_half_turns(_ccw_chain(v, w0) + dirs[1:] + [end])
    except ValueError as exc:
        raise NotClosed(f"curve reverses direction: {exc}")
    h0 = 0 if cross(v, w0) > 0 or same_dir(v, w0) else 1
    back = hol.linear.inverse()(v)
    exact = cross(back, v) == 0
    with mpmath.workprec(precision()):
        a0 = _ccw_angle(v, w0)
        alpha = _ccw_angle(back, w0)
        if alpha >= mpmath.pi:
            alpha -= mpmath.pi
        if exact:
            alpha = a0 - h0 * mpmath.pi
        value = n_dev * mpmath.pi + alpha - a0
        tol = Fraction(1, 2 ** (precision() - 8))
    return AngleResult(value, (n_dev - h0) if exact else None, tol, n_dev)


def monodromy_turn_sign(m, v):
    """Sign of det(v, m v) for a focus monodromy m; never positive."""
    if focus_index(m) <= 0:
        raise NotParabolic("monodromy has non-positive index")
    v = v if isinstance(v, Vec2) else Vec2.of(v)
    if v.is_zero():
        raise ValueError("zero vector")
    d = cross(v, m(v))
    return (d > 0) - (d < 0)
