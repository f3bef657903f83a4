"""File formats, command line and SVG output."""

import argparse
import json
import random
import sys
from dataclasses import dataclass, field
from fractions import Fraction

from . import atlas as atl
from . import box_model as bm
from . import examples as ex
from .angle_variation import ClosedCurve, CurveHitsFocus, NotClosed, angle_variation
from .convexity import (
    InvalidPoint, audit_convexity, petal_invariant, segment_between,
    trap_directions, trapped_test, witness_development,
)
from .exact_affine import Q, Vec2, fmt
from .tracer import (
    Eigendirection, InvalidStart, Ray, SurfacePoint, all_branches, develop, extend_through_focus, trace,
)

SCHEMA_VERSION = 1
EXIT_OK, EXIT_ASSERT, EXIT_USAGE, EXIT_PARSE, EXIT_INVALID = 0, 1, 2, 3, 4


class ParseError(ValueError):
    pass


class ValidationFailed(ValueError):
    def __init__(self, msg, report=None):
        super().__init__(msg)
        self.report = report


class UsageError(ValueError):
    pass


# -- serialization ------------------------------------------------------------

def dumps(obj):
    return json.dumps(obj, indent=2) + "\n"


def _field(where, fn):
    try:
        return fn()
    except (KeyError, ValueError, TypeError, IndexError, ZeroDivisionError) as e:
        raise ParseError(f"{where}: {type(e).__name__}: {e}")


def parse_atlas(d):
    """Atlas from its dictionary form, with field context on malformed input."""
    if not isinstance(d, dict):
        raise ParseError("top level: expected an object")
    for key in ("charts", "gluings", "focus"):
        if key != "charts" and key not in d:
            continue
        if not isinstance(d.get(key), list):
            raise ParseError(f"{key}: expected a list")
    for i, c in enumerate(d["charts"]):
        _field(f"charts[{i}]", lambda: atl.Chart(int(c["id"]), [Vec2.of(*v) for v in c["vertices"]]))
    for i, g in enumerate(d.get("gluings", [])):
        _field(f"gluings[{i}].src", lambda: atl.EdgeRef(*map(int, g["src"])))
        _field(f"gluings[{i}].dst", lambda: atl.EdgeRef(*map(int, g["dst"])))
        _field(f"gluings[{i}].linear", lambda: atl.LinZ.of(g["linear"]))
        _field(f"gluings[{i}].translation", lambda: Vec2.of(*g.get("translation", ["0", "0"])))
    for i, f in enumerate(d.get("focus", [])):
        _field(f"focus[{i}]", lambda: (atl.Corner(*map(int, f["vertex"])), int(f["index"])))
    _field("meta", lambda: atl._meta_from_dict(argparse.Namespace(), d.get("meta", {})))
    try:
        return atl.atlas_from_dict(d)
    except (atl.StructuralError, ValueError) as e:
        raise ValidationFailed(str(e))


def read_atlas_text(text, where="<input>"):
    try:
        d = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"{where}: line {e.lineno} column {e.colno}: {e.msg}")
    return parse_atlas(d)


def load_atlas(path):
    """Parse and validate an atlas file."""
    with open(path) as fh:
        a = read_atlas_text(fh.read(), path)
    try:
        rep = atl.validate(a)
    except (atl.StructuralError, ValueError) as e:
        raise ValidationFailed(str(e))
    if not rep["pass"]:
        raise ValidationFailed("atlas does not validate", rep)
    return a


def emit_atlas(a):
    return dumps(atl.atlas_to_dict(a))


def model_names():
    return ["focus-box", "negative-k", "focus2", "focus2-flat", "dim3"]


def build_model(name):
    """(model, witness pair or None)."""
    if name == "focus-box":
        return bm.focus_box_model(), None
    if name == "negative-k":
        m, a, b = bm.negative_k_model()
        return m, (a, b)
    if name == "focus2":
        m, a, b = bm.nonconvex_focus2_model()
        return m, (a, b)
    if name == "focus2-flat":
        return bm.focus2_model(bm.Profile.const(0), bm.Profile.const(0)), None
    if name == "dim3":
        m, a, b = bm.dim3_two_curve_model()
        return m, (a, b)
    raise UsageError(f"unknown model {name!r}; known: {', '.join(model_names())}")


def model_dict(m, pair):
    d = {"model": m.to_dict()}
    if pair is not None:
        d["witness"] = {"from": [fmt(v) for v in pair[0]], "to": [fmt(v) for v in pair[1]]}
    return d


def example_names():
    return sorted(ex.registry()) + model_names()


def example_text(name):
    reg = ex.registry()
    if name in reg:
        return emit_atlas(reg[name]())
    if name in model_names():
        return dumps(model_dict(*build_model(name)))
    raise UsageError(f"unknown example {name!r}")


# -- SVG ----------------------------------------------------------------------

@dataclass
class SvgScene:
    polygons: list = field(default_factory=list)    # lists of exact points
    polylines: list = field(default_factory=list)
    markers: list = field(default_factory=list)     # (point, kind)
    dashed: list = field(default_factory=list)      # singular lines drawn dashed


def _f(q):
    return format(float(q), ".6g")


def svg_text(scene):
    pts = [p for poly in scene.polygons + scene.polylines + scene.dashed for p in poly]
    pts += [p for p, _ in scene.markers]
    if pts:
        xs = [float(p.x) for p in pts]
        ys = [-float(p.y) for p in pts]
        x0, x1, y0, y1 = min(xs), max(xs), min(ys), max(ys)
    else:
        x0 = x1 = y0 = y1 = 0.0
    pad = max(x1 - x0, y1 - y0, 1.0) * 0.05
    w, h = x1 - x0 + 2 * pad, y1 - y0 + 2 * pad
    sw = max(w, h) / 400
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="{x0 - pad:.6g} {y0 - pad:.6g} {w:.6g} {h:.6g}">']

    def path(poly):
        return " ".join(f"{_f(p.x)},{_f(-p.y)}" for p in poly)
    for poly in scene.polygons:
        out.append(f'<polygon points="{path(poly)}" fill="#eef" stroke="#88a" stroke-width="{sw:.3g}"/>')
    for poly in scene.dashed:
        out.append(f'<polyline points="{path(poly)}" fill="none" stroke="#a44" '
                   f'stroke-dasharray="{4 * sw:.3g}" stroke-width="{sw:.3g}"/>')
    for poly in scene.polylines:
        out.append(f'<polyline points="{path(poly)}" fill="none" stroke="#c20" stroke-width="{2 * sw:.3g}"/>')
    for p, kind in scene.markers:
        color = "#000" if kind == "focus" else "#07a"
        out.append(f'<circle cx="{_f(p.x)}" cy="{_f(-p.y)}" r="{3 * sw:.3g}" fill="{color}"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_svg(scene, path):
    text = svg_text(scene)
    with open(path, "w") as fh:
        fh.write(text)
    return text


def trace_scene(traces):
    sc = SvgScene()
    seen = set()
    for t in traces:
        poly, corridor = develop(t)
        for c in corridor:
            key = tuple(c)
            if key not in seen:
                seen.add(key)
                sc.polygons.append(c)
        if len(poly) >= 2:
            sc.polylines.append(poly)
        if t.hit is not None:
            sc.markers.append((t.hit.dev(t.atlas.vertex(t.hit.corner)), "focus"))
    return sc


def segment_scene(a, witnesses):
    sc = SvgScene()
    seen = set()
    for w in witnesses:
        devs = witness_development(a, w) or []
        for cid, dev in zip(w.corridor, devs):
            poly = [dev(v) for v in a.charts[cid].vertices]
            if tuple(poly) not in seen:
                seen.add(tuple(poly))
                sc.polygons.append(poly)
        sc.polylines.append([w.start, w.end])
    return sc


# -- argument helpers ---------------------------------------------------------

def parse_vec(s):
    try:
        x, y = s.split(",")
        return Vec2(Q(x.strip()), Q(y.strip()))
    except ValueError:
        raise UsageError(f"expected X,Y with rational entries, got {s!r}")


def parse_point(s, a):
    if s in ("center", "octagon"):
        p = getattr(a, "center" if s == "center" else "octagon_center", None)
        if p is None:
            raise UsageError(f"atlas has no named point {s!r}")
        return p
    try:
        c, rest = s.split(":", 1)
        return int(c), parse_vec(rest)
    except ValueError:
        raise UsageError(f"expected CHART:X,Y, got {s!r}")


def parse_tuple(s):
    try:
        return tuple(Q(v.strip()) for v in s.split(","))
    except ValueError:
        raise UsageError(f"expected comma separated rationals, got {s!r}")


def get_atlas(source, validate_it=True):
    reg = ex.registry()
    if source in reg:
        return reg[source]()
    if source == "-":
        a = read_atlas_text(sys.stdin.read(), "<stdin>")
    else:
        try:
            with open(source) as fh:
                text = fh.read()
        except OSError as e:
            raise UsageError(f"cannot read atlas {source!r}: {e.strerror}")
        a = read_atlas_text(text, source)
    if validate_it:
        rep = atl.validate(a)
        if not rep["pass"]:
            raise ValidationFailed("atlas does not validate", rep)
    return a


def random_point(a, rng):
    """Random rational point of a random chart (convex combination of its vertices)."""
    cid = rng.choice(sorted(a.charts))
    vs = a.charts[cid].vertices
    w = [rng.randint(1, 8) for _ in vs]
    s = sum(w)
    p = Vec2(Fraction(0), Fraction(0))
    for wi, v in zip(w, vs):
        p = p + v * Fraction(wi, s)
    return cid, p


def random_pairs(a, n, seed):
    rng = random.Random(seed)
    return [(random_point(a, rng), random_point(a, rng)) for _ in range(n)]


def grid_points(a, resolution):
    """Chart points on a rational lattice, one representative per surface point."""
    pts, seen = [], set()
    for cid in sorted(a.charts):
        c = a.charts[cid]
        xs = [v.x for v in c.vertices]
        ys = [v.y for v in c.vertices]
        for i in range(resolution):
            for j in range(resolution):
                p = Vec2(min(xs) + (max(xs) - min(xs)) * Fraction(i, resolution - 1),
                         min(ys) + (max(ys) - min(ys)) * Fraction(j, resolution - 1))
                if not c.contains(p):
                    continue
                key = a.canonical(cid, p)
                if key not in seen:
                    seen.add(key)
                    pts.append((cid, p))
    return pts


# -- expectations ---------------------------------------------------------------

KEYWORDS = {
    "validate": {"pass": lambda r: r["pass"], "fail": lambda r: not r["pass"]},
    "escape": {"trapped": lambda r: r["escaped"] == 0 and r["invariant_ok"] is not False,
               "escaped": lambda r: r["escaped"] > 0},
    "audit": {"convex": lambda r: r["failures"] == 0, "nonconvex": lambda r: r["failures"] > 0},
    "segment": {"found": lambda r: r["count"] > 0, "none": lambda r: r["count"] == 0},
    "scan": {"convex": lambda r: (r.get("min") or 0) > 0,
             "nonconvex": lambda r: r.get("zero_pairs", 0) > 0 or r.get("count") == 0},
}


def _lookup(obj, path):
    for part in path.split("."):
        if isinstance(obj, list):
            obj = obj[int(part)]
        else:
            obj = obj[part]
    return obj


def check_expect(cmd, report, expects):
    failed = []
    for e in expects or []:
        if "=" in e:
            key, want = e.split("=", 1)
            try:
                got = _lookup(report, key)
            except (KeyError, IndexError, ValueError, TypeError):
                failed.append(f"{key} missing")
                continue
            got_s = got if isinstance(got, str) else json.dumps(got)
            if got_s != want:
                failed.append(f"{key} = {got_s}, expected {want}")
        else:
            pred = KEYWORDS.get(cmd, {}).get(e)
            if pred is None:
                raise UsageError(f"unknown expectation {e!r} for {cmd}")
            if not pred(report):
                failed.append(e)
    return failed


# -- commands -------------------------------------------------------------------

def cmd_validate(args):
    a = get_atlas(args.atlas, validate_it=False)
    rep = atl.validate(a)
    rep["name"] = a.name
    rep["total_focus_index"] = a.total_focus_index() if rep["pass"] else None
    rep["focus_classes"] = sum(v["kind"] == "FOCUS" for v in rep["vertices"])
    return rep


def cmd_example(args):
    return example_text(args.name)


def cmd_trace(args):
    a = get_atlas(args.atlas)
    chart, pos = parse_point(args.start, a)
    ray = Ray(SurfacePoint(chart, pos), parse_vec(args.dir))
    if args.all_branches:
        traces = all_branches(a, ray, args.budget)
    else:
        t = trace(a, ray, args.budget)
        for side in args.branch or "":
            if t.end != "FocusHit":
                break
            t = extend_through_focus(a, t, side)
        traces = [t]
    if args.svg:
        emit_svg(trace_scene(traces), args.svg)
    rows = [t.to_dict() for t in traces]
    rep = {"traces": rows, "count": len(rows), "end": rows[0]["events"][-1]["kind"] if rows[0]["events"] else None}
    return rep


def cmd_segment(args):
    a = get_atlas(args.atlas)
    p, q = parse_point(args.src, a), parse_point(args.dst, a)
    res = segment_between(a, p, q, args.budget)
    if args.svg:
        emit_svg(segment_scene(a, res.witnesses), args.svg)
    return {"count": len(res.witnesses), "exhausted": res.exhausted, "nodes": res.nodes,
            "witnesses": [w.to_dict() for w in res.witnesses]}


def cmd_audit(args):
    a = get_atlas(args.atlas)
    if args.grid:
        pts = grid_points(a, args.grid)
        pairs = [(p, q) for p in pts for q in pts if p != q]
    else:
        pairs = random_pairs(a, args.pairs, args.seed)
    rep = audit_convexity(a, pairs, args.budget)
    strips = getattr(a, "strips", None)
    if args.strips and strips:
        covered = 0
        for row, (p, q) in zip(rep["pairs"], pairs):
            names = []
            for name, s in sorted(strips.items()):
                if p[0] in s.charts and q[0] in s.charts and s.charts[p[0]].contains(p[1]) \
                        and s.charts[q[0]].contains(q[1]) and len(segment_between(s, p, q, args.budget)):
                    names.append(name)
            row["strips"] = names
            covered += bool(names)
        rep["strip_covered"] = covered
    return rep


def cmd_escape(args):
    a = get_atlas(args.atlas)
    start = parse_point(args.src, a)
    petals = getattr(a, "petals", None)
    region = set(petals) if petals is not None else None
    rep = trapped_test(a, start, trap_directions(args.dirs), args.budget, region, petal_invariant(a))
    rep["budget"] = args.budget
    return rep


def cmd_av(args):
    a = get_atlas(args.atlas)
    try:
        with open(args.curve) as fh:
            d = json.load(fh)
    except OSError as e:
        raise UsageError(f"cannot read curve {args.curve!r}: {e.strerror}")
    except json.JSONDecodeError as e:
        raise ParseError(f"{args.curve}: line {e.lineno} column {e.colno}: {e.msg}")
    curve = _field("curve", lambda: ClosedCurve.from_dict(d))
    return angle_variation(a, curve, parse_vec(args.v)).to_dict()


def cmd_scan(args):
    m, pair = build_model(args.model)
    if args.src or args.dst:
        if not (args.src and args.dst):
            raise UsageError("--from and --to go together")
        a, b = parse_tuple(args.src), parse_tuple(args.dst)
    elif args.resolution is None and pair is not None:
        a, b = pair
    else:
        a = b = None
    if a is not None:
        n, _ = bm.segment_exists(m, a, b)
        return {"model": args.model, "from": [fmt(v) for v in a], "to": [fmt(v) for v in b], "count": n,
                "candidates": [c.to_dict() for c in bm.candidate_segments(m, a, b)]}
    rep = bm.convexity_scan(m, args.resolution or 9, args.against)
    rep["model"] = args.model
    return rep


COMMANDS = {
    "validate": cmd_validate, "example": cmd_example, "trace": cmd_trace, "segment": cmd_segment,
    "audit": cmd_audit, "escape": cmd_escape, "av": cmd_av, "scan": cmd_scan,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser():
    p = _Parser(prog="artifact", description="Straight lines and convexity on glued integral affine surfaces.")
    sub = p.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    def common(sp, atlas=True):
        if atlas:
            sp.add_argument("--atlas", default="-", help="example name, atlas file, or - for stdin")
        sp.add_argument("--out", help="write the report here instead of standard output")
        sp.add_argument("--expect", action="append", help="assertion: a keyword or KEY=VALUE")

    common(sub.add_parser("validate", help="validate an atlas"))
    sp = sub.add_parser("example", help="emit a shipped dataset")
    sp.add_argument("name", choices=example_names())
    sp.add_argument("--out")
    sp.set_defaults(expect=None)

    sp = sub.add_parser("trace", help="trace a straight ray")
    common(sp)
    sp.add_argument("--start", required=True, help="CHART:X,Y or a named point")
    sp.add_argument("--dir", required=True, help="X,Y")
    sp.add_argument("--budget", type=int, default=1000)
    sp.add_argument("--branch", help="sides (L/R) taken at successive focus hits")
    sp.add_argument("--all-branches", action="store_true")
    sp.add_argument("--svg")

    sp = sub.add_parser("segment", help="find straight segments between two points")
    common(sp)
    sp.add_argument("--from", dest="src", required=True)
    sp.add_argument("--to", dest="dst", required=True)
    sp.add_argument("--budget", type=int, default=50)
    sp.add_argument("--svg")

    sp = sub.add_parser("audit", help="convexity audit over many pairs")
    common(sp)
    g = sp.add_mutually_exclusive_group(required=True)
    g.add_argument("--pairs", type=int)
    g.add_argument("--grid", type=int)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--budget", type=int, default=8)
    sp.add_argument("--strips", action="store_true", help="also check the strip sub-atlases")

    sp = sub.add_parser("escape", help="trap experiment from one point")
    common(sp)
    sp.add_argument("--from", dest="src", default="center")
    sp.add_argument("--dirs", type=int, default=64)
    sp.add_argument("--budget", type=int, default=1000)

    sp = sub.add_parser("av", help="angle variation of a closed curve")
    common(sp)
    sp.add_argument("--curve", required=True)
    sp.add_argument("--v", required=True, help="reference vector X,Y")

    sp = sub.add_parser("scan", help="wall-model grids and pair checks")
    common(sp, atlas=False)
    sp.add_argument("--model", required=True, choices=model_names())
    sp.add_argument("--resolution", type=int)
    sp.add_argument("--against", type=int)
    sp.add_argument("--from", dest="src")
    sp.add_argument("--to", dest="dst")
    return p


def _error(code, kind, msg, extra=None):
    obj = {"schema_version": SCHEMA_VERSION, "error": kind, "message": msg}
    if extra:
        obj.update(extra)
    sys.stderr.write(json.dumps(obj) + "\n")
    return code


def run(argv=None):
    try:
        args = build_parser().parse_args(argv)
        out = COMMANDS[args.cmd](args)
        if isinstance(out, str):
            text, report = out, None
        else:
            report = {"schema_version": SCHEMA_VERSION, "command": args.cmd, **out}
            text = dumps(report)
        if args.out:
            with open(args.out, "w") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
        if report is not None and args.expect:
            failed = check_expect(args.cmd, report, args.expect)
            if failed:
                return _error(EXIT_ASSERT, "AssertionFailed", "; ".join(failed))
            return EXIT_OK
        if args.cmd == "validate" and not report["pass"]:
            return EXIT_INVALID
        return EXIT_OK
    except UsageError as e:
        return _error(EXIT_USAGE, "UsageError", str(e))
    except ParseError as e:
        return _error(EXIT_PARSE, "ParseError", str(e))
    except ValidationFailed as e:
        return _error(EXIT_INVALID, "ValidationFailed", str(e), {"report": e.report} if e.report else None)
    except (atl.StructuralError, bm.OutOfBounds, bm.DegeneratePair) as e:
        return _error(EXIT_INVALID, type(e).__name__, str(e))
    except (InvalidStart, InvalidPoint, Eigendirection, NotClosed, CurveHitsFocus) as e:
        return _error(EXIT_USAGE, type(e).__name__, str(e))


def main():
    sys.exit(run())
