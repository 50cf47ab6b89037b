"""Convex polygon kernels (d = 2), generic over Fraction and float coordinates.

Polygons are lists of ``(x, y)`` tuples in counterclockwise order. With
Fraction coordinates every operation here is exact.
"""
from __future__ import annotations

from fractions import Fraction

Point = tuple
Polygon = list


def signed_area(poly: Polygon):
    n = len(poly)
    if n < 3:
        return 0
    s = 0
    for i in range(n):
        x0, y0 = poly[i]
        x1, y1 = poly[(i + 1) % n]
        s += x0 * y1 - x1 * y0
    return Fraction(s, 2) if isinstance(s, int) else s / 2


def area(poly: Polygon):
    return abs(signed_area(poly))


def ccw(poly: Polygon) -> Polygon:
    return list(reversed(poly)) if signed_area(poly) < 0 else list(poly)


def bbox(poly: Polygon):
    xs = [p[0] for p in poly]
    ys = [p[1] for p in poly]
    return (min(xs), min(ys)), (max(xs), max(ys))


def _side(a: Point, b: Point, p: Point):
    return (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])


def _dedupe(pts: list) -> list:
    out = []
    for p in pts:
        if not out or p != out[-1]:
            out.append(p)
    if len(out) > 1 and out[0] == out[-1]:
        out.pop()
    return out


def clip_halfplane(poly: Polygon, a: Point, b: Point, keep_left: bool = True) -> Polygon:
    """Clip ``poly`` to the closed half-plane left of (or right of) the directed line a->b."""
    if not poly:
        return []
    sign = 1 if keep_left else -1
    vals = [sign * _side(a, b, p) for p in poly]
    out = []
    n = len(poly)
    for i in range(n):
        s, e = poly[i], poly[(i + 1) % n]
        fs, fe = vals[i], vals[(i + 1) % n]
        if fs >= 0:
            out.append(s)
        if (fs > 0 and fe < 0) or (fs < 0 and fe > 0):
            t = fs / (fs - fe)
            out.append((s[0] + t * (e[0] - s[0]), s[1] + t * (e[1] - s[1])))
    out = _dedupe(out)
    return out if len(out) >= 3 else []


def clip_convex(subject: Polygon, clip: Polygon) -> Polygon:
    """Intersection of two convex CCW polygons (Sutherland-Hodgman)."""
    out = subject
    n = len(clip)
    for i in range(n):
        out = clip_halfplane(out, clip[i], clip[(i + 1) % n])
        if not out:
            return []
    return out


def clip_convex_closed(subject: Polygon, clip: Polygon) -> list:
    """Closed intersection that keeps degenerate results (segments, single points)."""
    out = list(subject)
    n = len(clip)
    for i in range(n):
        a, b = clip[i], clip[(i + 1) % n]
        vals = [_side(a, b, p) for p in out]
        nxt = []
        m = len(out)
        for t in range(m):
            s, e = out[t], out[(t + 1) % m]
            fs, fe = vals[t], vals[(t + 1) % m]
            if fs >= 0:
                nxt.append(s)
            if (fs > 0 and fe < 0) or (fs < 0 and fe > 0):
                u = fs / (fs - fe)
                nxt.append((s[0] + u * (e[0] - s[0]), s[1] + u * (e[1] - s[1])))
        out = list(dict.fromkeys(nxt))
        if not out:
            return []
    return out


def intersection_area(p1: Polygon, p2: Polygon):
    inter = clip_convex(p1, p2)
    return area(inter) if inter else 0


def split_convex(subject: Polygon, clip: Polygon, area_tol=0):
    """Split a convex polygon by a convex polygon.

    Returns ``(inside, outside)`` where ``inside`` is ``subject & clip`` (or
    None when it has area <= area_tol) and ``outside`` is a list of disjoint
    convex pieces covering ``subject - clip``.
    """
    inside = subject
    outside = []
    n = len(clip)
    for i in range(n):
        a, b = clip[i], clip[(i + 1) % n]
        out = clip_halfplane(inside, a, b, keep_left=False)
        if out and area(out) > area_tol:
            outside.append(out)
        inside = clip_halfplane(inside, a, b, keep_left=True)
        if not inside or area(inside) <= area_tol:
            # no overlap worth keeping: the subject stays whole
            return None, [subject]
    return inside, outside


def _axes(poly: Polygon):
    n = len(poly)
    for i in range(n):
        x0, y0 = poly[i]
        x1, y1 = poly[(i + 1) % n]
        yield (y0 - y1, x1 - x0)


def _project(poly: Polygon, axis):
    vals = [axis[0] * p[0] + axis[1] * p[1] for p in poly]
    return min(vals), max(vals)


def convex_polygons_meet(p1: Polygon, p2: Polygon, closed: bool = True, tol=0) -> bool:
    """Separating-axis test.

    ``closed=True`` treats both polygons as closed sets (touching counts);
    ``closed=False`` asks whether the interiors overlap.
    """
    for axis in list(_axes(p1)) + list(_axes(p2)):
        if axis == (0, 0):
            continue
        lo1, hi1 = _project(p1, axis)
        lo2, hi2 = _project(p2, axis)
        if closed:
            if hi1 < lo2 - tol or hi2 < lo1 - tol:
                return False
        else:
            if hi1 <= lo2 + tol or hi2 <= lo1 + tol:
                return False
    return True


def point_in_convex(poly: Polygon, pt: Point) -> bool:
    n = len(poly)
    return all(_side(poly[i], poly[(i + 1) % n], pt) >= 0 for i in range(n))


def dist2_point_polygon(pt: Point, poly: Polygon):
    """Squared Euclidean distance from a point to a closed convex polygon (0 inside)."""
    if point_in_convex(poly, pt):
        return 0
    best = None
    n = len(poly)
    for i in range(n):
        a, b = poly[i], poly[(i + 1) % n]
        dx, dy = b[0] - a[0], b[1] - a[1]
        L = dx * dx + dy * dy
        t = ((pt[0] - a[0]) * dx + (pt[1] - a[1]) * dy) / L if L else 0
        t = min(max(t, 0), 1)
        ex, ey = a[0] + t * dx - pt[0], a[1] + t * dy - pt[1]
        d2 = ex * ex + ey * ey
        if best is None or d2 < best:
            best = d2
    return best
