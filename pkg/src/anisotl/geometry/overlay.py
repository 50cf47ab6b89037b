"""Exact overlay of convex pieces: the atoms of a union labeled by which inputs cover them."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from anisotl.errors import CapacityError, InvalidInput
from anisotl.geometry import polygons

DEFAULT_BUDGET = 4096
PIECES_PER_POLYGON = 64
GRID_CELL_LIMIT = 20_000_000


@dataclass
class Cell:
    """One atom: every point in ``pieces`` is covered by exactly the inputs in ``mask``."""

    mask: frozenset
    pieces: list = field(default_factory=list)
    area: object = 0


def _bbox_overlap(b1, b2) -> bool:
    (x0, y0), (x1, y1) = b1
    (u0, v0), (u1, v1) = b2
    return x0 < u1 and u0 < x1 and y0 < v1 and v0 < y1


def _area_tol(polys) -> object:
    if all(isinstance(v, (int, Fraction)) for p in polys for pt in p for v in pt):
        return 0
    scale = max(float(polygons.area(p)) for p in polys)
    return 1e-14 * scale


def overlay_cells_2d(polys: list, budget: int = DEFAULT_BUDGET) -> list[Cell]:
    """Partition the union of convex CCW polygons into labeled atomic cells.

    Each new polygon splits every existing piece it overlaps into an inside
    part and convex outside parts; the part of the new polygon not covered by
    earlier pieces becomes fresh pieces with a singleton label.
    """
    if len(polys) > budget:
        raise CapacityError(f"{len(polys)} polygons exceed the overlay budget of {budget}")
    if not polys:
        return []
    polys = [polygons.ccw(list(p)) for p in polys]
    if any(len(p) < 3 for p in polys):
        raise InvalidInput("overlay inputs must be polygons with >= 3 vertices")
    rects = [_as_rect(p) for p in polys]
    if all(r is not None for r in rects):
        return overlay_rectangles(rects)
    tol = _area_tol(polys)
    piece_cap = PIECES_PER_POLYGON * max(budget, 1)
    pieces: list = []  # (polygon, bbox, mask)
    for idx, P in enumerate(polys):
        pb = polygons.bbox(P)
        nxt = []
        remainder = [P]
        for poly, bb, mask in pieces:
            if not _bbox_overlap(bb, pb):
                nxt.append((poly, bb, mask))
                continue
            inside, outside = polygons.split_convex(poly, P, tol)
            if inside is None:
                nxt.append((poly, bb, mask))
                continue
            nxt.append((inside, polygons.bbox(inside), mask | {idx}))
            nxt.extend((o, polygons.bbox(o), mask) for o in outside)
            # carve this piece out of what is left of P
            rest = []
            for r in remainder:
                if not _bbox_overlap(polygons.bbox(r), bb):
                    rest.append(r)
                    continue
                _, outs = polygons.split_convex(r, poly, tol)
                rest.extend(outs)
            remainder = rest
        nxt.extend((r, polygons.bbox(r), frozenset({idx})) for r in remainder)
        pieces = nxt
        if len(pieces) > piece_cap:
            raise CapacityError(f"overlay grew to {len(pieces)} pieces (cap {piece_cap})")
    cells: dict = {}
    for poly, _, mask in pieces:
        cell = cells.setdefault(mask, Cell(mask))
        cell.pieces.append(poly)
        cell.area = cell.area + polygons.area(poly)
    return sorted(cells.values(), key=lambda c: sorted(c.mask))


def _as_rect(poly):
    if len(poly) != 4:
        return None
    for i in range(4):
        a, b = poly[i], poly[(i + 1) % 4]
        if a[0] != b[0] and a[1] != b[1]:
            return None
    (x0, y0), (x1, y1) = polygons.bbox(poly)
    return (x0, y0, x1, y1)


def overlay_rectangles(rects: list) -> list[Cell]:
    """Axis-aligned fast path: coordinate compression into a grid of elementary boxes."""
    xs = sorted({v for r in rects for v in (r[0], r[2])})
    ys = sorted({v for r in rects for v in (r[1], r[3])})
    gx, gy = len(xs) - 1, len(ys) - 1
    if len(rects) * gx * gy > GRID_CELL_LIMIT:
        raise CapacityError(f"rectangle overlay grid of {gx}x{gy} for {len(rects)} inputs is too large")
    xi = {v: i for i, v in enumerate(xs)}
    yi = {v: i for i, v in enumerate(ys)}
    cover = np.zeros((gx, gy, len(rects)), dtype=bool)
    for n, (x0, y0, x1, y1) in enumerate(rects):
        cover[xi[x0]:xi[x1], yi[y0]:yi[y1], n] = True
    flat = cover.reshape(gx * gy, len(rects))
    used = np.flatnonzero(flat.any(axis=1))
    if used.size == 0:
        return []
    packed = np.packbits(flat[used], axis=1)
    _, group = np.unique(packed, axis=0, return_inverse=True)
    group = np.asarray(group).ravel()
    cells: dict = {}
    for g, cid in zip(group.tolist(), used.tolist()):
        cell = cells.get(g)
        if cell is None:
            cell = cells[g] = Cell(frozenset(np.flatnonzero(flat[cid]).tolist()))
        a, b = divmod(cid, gy)
        x0, x1, y0, y1 = xs[a], xs[a + 1], ys[b], ys[b + 1]
        cell.pieces.append([(x0, y0), (x1, y0), (x1, y1), (x0, y1)])
        cell.area = cell.area + (x1 - x0) * (y1 - y0)
    return sorted(cells.values(), key=lambda c: sorted(c.mask))


def overlay_cells_1d(intervals: list, budget: int = DEFAULT_BUDGET) -> list[Cell]:
    """The same partition for intervals ``(lo, hi)``; each cell holds its sub-intervals."""
    if len(intervals) > budget:
        raise CapacityError(f"{len(intervals)} intervals exceed the overlay budget of {budget}")
    points = sorted({v for iv in intervals for v in iv})
    cells: dict = {}
    for a, b in zip(points, points[1:]):
        mask = frozenset(i for i, (lo, hi) in enumerate(intervals) if lo <= a and b <= hi)
        if not mask:
            continue
        cell = cells.setdefault(mask, Cell(mask))
        cell.pieces.append((a, b))
        cell.area = cell.area + (b - a)
    return sorted(cells.values(), key=lambda c: sorted(c.mask))


def union_area(cells: list[Cell]):
    return sum((c.area for c in cells), 0)
