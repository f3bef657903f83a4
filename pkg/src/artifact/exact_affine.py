"""Exact 2-D integral affine algebra over the rationals."""

from fractions import Fraction
from math import gcd
from typing import NamedTuple

Scalar = Fraction


class NotParabolic(ValueError):
    pass


class DegenerateSegment(ValueError):
    pass


class DegenerateCorner(ValueError):
    pass


def Q(v):
    """Coerce ints, Fractions and "p/q" strings to a Fraction."""
    if isinstance(v, Fraction):
        return v
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, str):
        s = v.strip()
        if not s:
            raise ValueError("empty rational")
        # Fraction() also accepts decimals and exponents; insist on p or p/q
        body = s[1:] if s[0] in "+-" else s
        parts = body.split("/")
        if len(parts) > 2 or not all(p.isdigit() for p in parts):
            raise ValueError(f"malformed rational {v!r}")
        return Fraction(s)
    raise TypeError(f"cannot make a rational from {type(v).__name__}")


def fmt(q):
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


class Vec2(NamedTuple):
    x: Fraction
    y: Fraction

    @classmethod
    def of(cls, x, y=None):
        if y is None:
            x, y = x
        return cls(Q(x), Q(y))

    def __add__(self, o):
        return Vec2(self.x + o.x, self.y + o.y)

    def __sub__(self, o):
        return Vec2(self.x - o.x, self.y - o.y)

    def __neg__(self):
        return Vec2(-self.x, -self.y)

    def __mul__(self, s):
        return Vec2(self.x * s, self.y * s)

    __rmul__ = __mul__

    def is_zero(self):
        return self.x == 0 and self.y == 0

    def to_json(self):
        return [fmt(self.x), fmt(self.y)]


ZERO = Vec2(Fraction(0), Fraction(0))


def cross(u, v):
    return u.x * v.y - u.y * v.x


def dot(u, v):
    return u.x * v.x + u.y * v.y


class LinZ(NamedTuple):
    a: int
    b: int
    c: int
    d: int

    @classmethod
    def of(cls, rows):
        (a, b), (c, d) = rows
        for e in (a, b, c, d):
            if isinstance(e, bool) or not isinstance(e, int):
                raise TypeError("matrix entries must be integers")
        return cls(a, b, c, d)

    def det(self):
        return self.a * self.d - self.b * self.c

    def trace(self):
        return self.a + self.d

    def __call__(self, v):
        return Vec2(self.a * v.x + self.b * v.y, self.c * v.x + self.d * v.y)

    def __matmul__(self, o):
        return LinZ(self.a * o.a + self.b * o.c, self.a * o.b + self.b * o.d,
                    self.c * o.a + self.d * o.c, self.c * o.b + self.d * o.d)

    def inverse(self):
        det = self.det()
        if det not in (1, -1):
            raise ValueError(f"matrix is not unimodular (det {det})")
        return LinZ(self.d * det, -self.b * det, -self.c * det, self.a * det)

    def rows(self):
        return [[self.a, self.b], [self.c, self.d]]


ID2 = LinZ(1, 0, 0, 1)


def shear(k):
    return LinZ(1, k, 0, 1)


class AffineT(NamedTuple):
    linear: LinZ
    translation: Vec2

    def __call__(self, p):
        return self.linear(p) + self.translation

    def inverse(self):
        inv = self.linear.inverse()
        return AffineT(inv, -inv(self.translation))

    def is_identity(self):
        return self.linear == ID2 and self.translation.is_zero()

    @classmethod
    def about(cls, lin, fixed):
        """The affine map with linear part lin fixing the point `fixed`."""
        return cls(lin, fixed - lin(fixed))


IDENTITY = AffineT(ID2, ZERO)


def compose(t1, t2):
    """compose(t1, t2)(p) == t1(t2(p))."""
    return AffineT(t1.linear @ t2.linear, t1.linear(t2.translation) + t1.translation)


def apply(t, p):
    return t(p)


def inverse(t):
    return t.inverse()


def _ext_gcd(a, b):
    if b == 0:
        return (a, 1, 0) if a >= 0 else (-a, -1, 0)
    g, x, y = _ext_gcd(b, a % b)
    return g, y, x - (a // b) * y


def primitive_int(v):
    """Return (primitive integer vector, lambda) with v == lambda * primitive."""
    if v.is_zero():
        raise DegenerateSegment("zero vector has no direction")
    den = v.x.denominator * v.y.denominator // gcd(v.x.denominator, v.y.denominator)
    nx, ny = int(v.x * den), int(v.y * den)
    g = gcd(nx, ny)
    return (nx // g, ny // g), Fraction(g, den)


def focus_index(m):
    """Index k with m conjugate in SL(2,Z) to [[1,k],[0,1]]."""
    if m.det() != 1 or m.trace() != 2 or m == ID2:
        raise NotParabolic(f"{m.rows()} is not a nontrivial parabolic")
    p, q = (m.a - 1, m.b) if (m.a - 1, m.b) != (0, 0) else (m.c, m.d - 1)
    g = gcd(p, q)
    e1, e2 = q // g, -p // g
    # v with e1*v2 - e2*v1 == 1
    _, s, t = _ext_gcd(e1, -e2)
    v1, v2 = t, s
    assert e1 * v2 - e2 * v1 == 1
    wx = m.a * v1 + m.b * v2 - v1
    wy = m.c * v1 + m.d * v2 - v2
    return wx // e1 if e1 else wy // e2


def integral_length(p, q):
    if p == q:
        raise DegenerateSegment("integral length of a point")
    return primitive_int(q - p)[1]


def characteristic_number(p_prev, p0, p1, p2):
    """c such that, after normalizing p0 -> 0, p1 -> (l, 0), p_prev -> y-axis,
    the point p2 lies on x = c*y + l."""
    if p1 == p0 or p_prev == p0:
        raise DegenerateCorner("repeated corner point")
    (ux, uy), ell = primitive_int(p1 - p0)
    (wx, wy), _ = primitive_int(p_prev - p0)
    h = ux * wy - uy * wx
    if h <= 0:
        raise DegenerateCorner("previous point is not strictly to the left of the edge")
    # rational map with u -> (1,0), w -> (0,h); it has determinant 1
    r = p2 - p0
    # solve r = alpha*u + beta*w
    alpha = (r.x * wy - r.y * wx) / h
    beta = (ux * r.y - uy * r.x) / h
    X, Y = alpha, beta * h
    if Y == 0:
        raise DegenerateCorner("next edge is collinear with the normalized edge")
    return (X - ell) / Y


def same_dir(u, v):
    return cross(u, v) == 0 and dot(u, v) > 0


def _in_ccw_arc(x, c, c2):
    # is direction x in the half-open counterclockwise arc (c, c2] of angle <= pi
    k = cross(c, c2)
    if k > 0:
        return cross(c, x) > 0 and cross(x, c2) >= 0
    if k == 0 and dot(c, c2) < 0:
        return cross(c, x) > 0 or same_dir(x, c2)
    return False


def ccw_half_turns(dirs):
    """Exact total angle of a chain of counterclockwise steps, each in [0, pi].

    Returns (h, on_line): the angle equals h*pi when on_line, otherwise it lies
    strictly between h*pi and (h+1)*pi.
    """
    r = dirs[0]
    h = 0
    for c, c2 in zip(dirs, dirs[1:]):
        if cross(c, c2) < 0:
            raise ValueError("step turns clockwise")
        h += _in_ccw_arc(r, c, c2) + _in_ccw_arc(-r, c, c2)
    return h, cross(r, dirs[-1]) == 0


def signed_half_turns(dirs):
    """Exact floor(angle/pi) for a chain of steps of either sense, |step| < pi.

    Returns (h, on_line) as ccw_half_turns does.
    """
    r, nr = dirs[0], -dirs[0]
    h = 0
    for c, c2 in zip(dirs, dirs[1:]):
        k = cross(c, c2)
        if k == 0 and dot(c, c2) < 0:
            raise ValueError("step reverses direction")
        if k > 0:
            h += _in_ccw_arc(r, c, c2) + _in_ccw_arc(nr, c, c2)
        elif k < 0:
            h -= _in_ccw_arc(r, c2, c) + _in_ccw_arc(nr, c2, c)
    return h, cross(r, dirs[-1]) == 0
