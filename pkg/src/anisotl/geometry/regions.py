"""Bounded regions: boxes, balls, convex polygons, parallelotopes and finite unions."""
from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from anisotl.errors import InvalidInput
from anisotl.geometry import polygons
from anisotl.matrices import RATIONAL, Matrix


def _num(v):
    if isinstance(v, (int, Fraction)) and not isinstance(v, bool):
        return Fraction(v)
    return float(v)


class Region:
    dim: int

    def bbox(self):
        """Closed axis-aligned bounding box ``(lo, hi)`` as tuples."""
        raise NotImplementedError

    def contains(self, X: np.ndarray) -> np.ndarray:
        """Vectorized float membership test for an ``(n, d)`` array."""
        raise NotImplementedError

    def volume(self) -> float:
        raise NotImplementedError

    def polygon(self):
        """Exact CCW vertex list (d = 2) or ``(lo, hi)`` interval (d = 1), if polygonal."""
        return None

    def bbox_volume(self) -> float:
        lo, hi = self.bbox()
        return float(np.prod([float(h) - float(l) for l, h in zip(lo, hi)]))


class Box(Region):
    def __init__(self, lo, hi):
        if len(lo) != len(hi) or not lo:
            raise InvalidInput("box corners must have the same positive dimension")
        self.lo = tuple(_num(v) for v in lo)
        self.hi = tuple(_num(v) for v in hi)
        if any(h < l for l, h in zip(self.lo, self.hi)):
            raise InvalidInput("box has hi < lo")
        self.dim = len(self.lo)

    def __repr__(self):
        return f"Box({[str(v) for v in self.lo]}, {[str(v) for v in self.hi]})"

    def bbox(self):
        return self.lo, self.hi

    def contains(self, X):
        lo = np.array([float(v) for v in self.lo])
        hi = np.array([float(v) for v in self.hi])
        return np.all((X >= lo) & (X <= hi), axis=1)

    def volume(self):
        return float(np.prod([float(h - l) for l, h in zip(self.lo, self.hi)]))

    def polygon(self):
        if self.dim == 1:
            return (self.lo[0], self.hi[0])
        if self.dim == 2:
            (x0, y0), (x1, y1) = self.lo, self.hi
            return [(x0, y0), (x1, y0), (x1, y1), (x0, y1)]
        return None


class Ball(Region):
    """Euclidean ball; open by default, matching the neighbourhoods used in the proofs."""

    def __init__(self, center, radius, closed: bool = False):
        self.center = tuple(_num(v) for v in center)
        self.radius = _num(radius)
        if self.radius <= 0:
            raise InvalidInput("ball radius must be positive")
        self.closed = closed
        self.dim = len(self.center)

    def __repr__(self):
        return f"Ball({[float(v) for v in self.center]}, {float(self.radius)}, closed={self.closed})"

    def bbox(self):
        return (tuple(c - self.radius for c in self.center), tuple(c + self.radius for c in self.center))

    def contains(self, X):
        c = np.array([float(v) for v in self.center])
        d2 = np.sum((X - c) ** 2, axis=1)
        r2 = float(self.radius) ** 2
        return d2 <= r2 if self.closed else d2 < r2

    def volume(self):
        d = self.dim
        return math.pi ** (d / 2) / math.gamma(d / 2 + 1) * float(self.radius) ** d


class ConvexPolygon(Region):
    def __init__(self, vertices):
        verts = [tuple(_num(v) for v in p) for p in vertices]
        if len(verts) < 3 or any(len(p) != 2 for p in verts):
            raise InvalidInput("a convex polygon needs >= 3 planar vertices")
        self.vertices = polygons.ccw(verts)
        self.dim = 2

    def bbox(self):
        return polygons.bbox(self.vertices)

    def contains(self, X):
        V = np.array([[float(a), float(b)] for a, b in self.vertices])
        inside = np.ones(len(X), dtype=bool)
        for i in range(len(V)):
            a, b = V[i], V[(i + 1) % len(V)]
            inside &= (b[0] - a[0]) * (X[:, 1] - a[1]) - (b[1] - a[1]) * (X[:, 0] - a[0]) >= 0
        return inside

    def volume(self):
        return float(polygons.area(self.vertices))

    def polygon(self):
        return list(self.vertices)


class Parallelotope(Region):
    """``{offset + M y : y in [0,1]^d}`` for an invertible matrix ``M``."""

    def __init__(self, M: Matrix, offset):
        self.M = M
        self.offset = tuple(_num(v) for v in offset)
        self.dim = M.dim
        if len(self.offset) != self.dim:
            raise InvalidInput("offset dimension mismatch")

    def __repr__(self):
        return f"Parallelotope({self.M!r}, {self.offset})"

    def vertex(self, corner):
        y = self.M.apply(corner)
        return tuple(o + v for o, v in zip(self.offset, y))

    def bbox(self):
        cols = list(zip(*self.M.rows))
        lo, hi = list(self.offset), list(self.offset)
        for col in cols:
            for i, v in enumerate(col):
                if v < 0:
                    lo[i] += v
                else:
                    hi[i] += v
        return tuple(lo), tuple(hi)

    def contains(self, X):
        inv = np.linalg.inv(self.M.array)
        Y = (X - np.array([float(v) for v in self.offset])) @ inv.T
        return np.all((Y >= 0) & (Y <= 1), axis=1)

    def volume(self):
        return float(self.M.abs_det)

    def polygon(self):
        if self.dim == 1:
            a = self.offset[0]
            b = a + self.M.rows[0][0]
            return (min(a, b), max(a, b))
        if self.dim == 2:
            corners = [(0, 0), (1, 0), (1, 1), (0, 1)]
            if self.M.mode == RATIONAL and all(isinstance(v, Fraction) for v in self.offset):
                pts = [self.vertex(c) for c in corners]
            else:
                arr = self.M.array
                off = np.array([float(v) for v in self.offset])
                pts = [tuple(float(t) for t in off + arr @ np.array(c, dtype=float)) for c in corners]
            return polygons.ccw(pts)
        return None


class UnionRegion(Region):
    def __init__(self, parts):
        self.parts = list(parts)
        if not self.parts:
            raise InvalidInput("empty union")
        self.dim = self.parts[0].dim
        if any(p.dim != self.dim for p in self.parts):
            raise InvalidInput("union parts must share a dimension")

    def bbox(self):
        boxes = [p.bbox() for p in self.parts]
        lo = tuple(min(b[0][i] for b in boxes) for i in range(self.dim))
        hi = tuple(max(b[1][i] for b in boxes) for i in range(self.dim))
        return lo, hi

    def contains(self, X):
        out = np.zeros(len(X), dtype=bool)
        for p in self.parts:
            out |= p.contains(X)
        return out

    def volume(self):
        raise InvalidInput("union volume is not computed directly; use the overlay or Monte Carlo")


def parse_region(text: str) -> Region:
    """Parse the CLI literals ``box:x0,y0,x1,y1`` and ``ball:cx,cy,r`` (any dimension)."""
    try:
        kind, rest = text.split(":", 1)
        vals = [Fraction(v.strip()) for v in rest.split(",")]
    except ValueError as exc:
        raise InvalidInput(f"bad region literal {text!r}") from exc
    kind = kind.strip().lower()
    if kind == "box":
        if len(vals) % 2 or not vals:
            raise InvalidInput("box literal needs an even number of coordinates")
        h = len(vals) // 2
        return Box(vals[:h], vals[h:])
    if kind == "ball":
        if len(vals) < 2:
            raise InvalidInput("ball literal needs a center and a radius")
        return Ball(vals[:-1], vals[-1])
    raise InvalidInput(f"unknown region kind {kind!r}")
