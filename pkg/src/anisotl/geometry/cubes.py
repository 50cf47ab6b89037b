"""Dilated cubes Q^A_{j,k} = A^j([0,1]^d + k): point location and region enumeration."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from anisotl.errors import CapacityError, InvalidInput
from anisotl.geometry import polygons
from anisotl.geometry.regions import Ball, Box, ConvexPolygon, Parallelotope, Region, UnionRegion
from anisotl.matrices import RATIONAL, ExpansiveMatrix

EXACT_CANDIDATE_LIMIT = 20_000
MAX_CANDIDATES = 20_000_000
HALF_OPEN_SHRINK = 1e-9


@dataclass(frozen=True)
class DyadicCube:
    matrix: ExpansiveMatrix
    j: int
    k: tuple

    @property
    def scale(self) -> int:
        return self.j

    @property
    def region(self) -> Parallelotope:
        M = self.matrix.power(self.j)
        return Parallelotope(M, M.apply(tuple(int(v) for v in self.k)))

    def polygon(self):
        """Exact vertex list (d = 2, CCW) or interval (d = 1)."""
        return self.region.polygon()

    def volume(self):
        """Volume from the explicit geometry (shoelace / interval length / |det|)."""
        if self.matrix.dim == 1:
            lo, hi = self.polygon()
            return hi - lo
        if self.matrix.dim == 2:
            return polygons.area(self.polygon())
        return self.matrix.power(self.j).abs_det


def cube_of_point(A: ExpansiveMatrix, j: int, x) -> tuple:
    """Index k with x in A^j([0,1)^d + k). Exact when A and x are rational."""
    if len(x) != A.dim:
        raise InvalidInput("point dimension mismatch")
    Minv = A.power(-j)
    if Minv.mode == RATIONAL and all(isinstance(v, (int, Fraction)) for v in x):
        return tuple(math.floor(v) for v in Minv.apply(tuple(x)))
    y = Minv.array @ np.asarray(x, dtype=float)
    return tuple(int(v) for v in np.floor(y))


def cube_indices(A: ExpansiveMatrix, j: int, X: np.ndarray) -> np.ndarray:
    """Vectorized float point location: floor(A^{-j} x) for each row of X."""
    Minv = A.power(-j).array
    return np.floor(X @ Minv.T).astype(np.int64)


def _candidate_box(A: ExpansiveMatrix, j: int, region: Region):
    Minv = A.power(-j)
    lo, hi = region.bbox()
    corners = list(itertools.product(*zip(lo, hi)))
    exact = Minv.mode == RATIONAL and all(isinstance(v, Fraction) for c in corners for v in c)
    if exact:
        ys = [Minv.apply(c) for c in corners]
        kmin = [math.ceil(min(y[i] for y in ys) - 1) for i in range(A.dim)]
        kmax = [math.floor(max(y[i] for y in ys)) for i in range(A.dim)]
    else:
        Y = np.array([[float(v) for v in c] for c in corners]) @ Minv.array.T
        span = np.max(np.abs(Y)) + 1.0
        kmin = list(np.floor(Y.min(axis=0) - 1 - 1e-9 * span).astype(np.int64))
        kmax = list(np.floor(Y.max(axis=0) + 1e-9 * span).astype(np.int64))
    return [int(v) for v in kmin], [int(v) for v in kmax], exact


def _grid(kmin, kmax) -> np.ndarray:
    axes = [np.arange(a, b + 1, dtype=np.int64) for a, b in zip(kmin, kmax)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def _region_is_exact(region: Region) -> bool:
    if isinstance(region, UnionRegion):
        return all(_region_is_exact(p) for p in region.parts)
    if isinstance(region, Box):
        return all(isinstance(v, Fraction) for v in region.lo + region.hi)
    if isinstance(region, Ball):
        return all(isinstance(v, Fraction) for v in region.center + (region.radius,))
    if isinstance(region, ConvexPolygon):
        return all(isinstance(v, Fraction) for p in region.vertices for v in p)
    if isinstance(region, Parallelotope):
        return region.M.mode == RATIONAL and all(isinstance(v, Fraction) for v in region.offset)
    return False


# -- index-space helpers -------------------------------------------------------------
#
# Polygonal regions are pulled back by A^{-j}; cube k then becomes the unit box
# [k, k+1]^d (closed) or [k, k+1)^d (half-open), which makes both conventions easy.


def _pullback(A: ExpansiveMatrix, j: int, region: Region, exact: bool):
    Minv = A.power(-j)
    poly = region.polygon()
    if A.dim == 1:
        if exact:
            ys = [Minv.rows[0][0] * v for v in poly]
        else:
            ys = [float(Minv.array[0, 0]) * float(v) for v in poly]
        return (min(ys), max(ys))
    if exact:
        return polygons.ccw([Minv.apply(v) for v in poly])
    arr = Minv.array
    return polygons.ccw([tuple(float(t) for t in arr @ np.array([float(a), float(b)])) for a, b in poly])


def _unit_box(k):
    k0, k1 = k
    return [(k0, k1), (k0 + 1, k1), (k0 + 1, k1 + 1), (k0, k1 + 1)]


def _exact_meets(A: ExpansiveMatrix, j: int, k, region: Region, closed: bool) -> bool:
    if isinstance(region, UnionRegion):
        return any(_exact_meets(A, j, k, p, closed) for p in region.parts)
    if isinstance(region, Ball):
        # an open ball meeting the closed cube also meets its half-open version
        cube = DyadicCube(A, j, tuple(k))
        if A.dim == 1:
            a, b = cube.polygon()
            c, r = region.center[0], region.radius
            return (a <= c + r and b >= c - r) if region.closed else (a < c + r and b > c - r)
        d2 = polygons.dist2_point_polygon(region.center, cube.polygon())
        r2 = region.radius * region.radius
        return d2 <= r2 if region.closed else d2 < r2
    Y = _pullback(A, j, region, exact=True)
    if A.dim == 1:
        lo, hi = Y
        (k0,) = k
        return (lo <= k0 + 1 and hi >= k0) if closed else (lo < k0 + 1 and hi >= k0)
    C = polygons.clip_convex_closed(Y, _unit_box(k))
    if not C:
        return False
    if closed:
        return True
    # C is convex, so it misses [k, k+1)^2 only if it lies on one far face
    return all(min(v[i] for v in C) < k[i] + 1 for i in range(2))


def cube_meets_region(A: ExpansiveMatrix, j: int, k, region: Region, closed: bool = True) -> bool:
    """Single-cube test; exact for rational inputs in d <= 2."""
    k = tuple(int(v) for v in k)
    if A.dim <= 2 and A.mode == RATIONAL and _region_is_exact(region):
        return _exact_meets(A, j, k, region, closed)
    return bool(_vec_meets(A, j, np.array([k], dtype=np.int64), region, closed)[0])


# -- vectorized float tests ----------------------------------------------------------


def _vec_meets(A: ExpansiveMatrix, j: int, K: np.ndarray, region: Region, closed: bool) -> np.ndarray:
    if isinstance(region, UnionRegion):
        out = np.zeros(len(K), dtype=bool)
        for part in region.parts:
            out |= _vec_meets(A, j, K, part, closed)
        return out
    d = A.dim
    if d > 2:
        return _meets_general(A, j, K, region, closed)
    if isinstance(region, Ball):
        return _vec_ball(A, j, K, region)
    Kf = K.astype(float)
    # half-open cubes: a closed box whose far faces are pulled in by HALF_OPEN_SHRINK
    side = 1.0 if closed else 1.0 - HALF_OPEN_SHRINK
    if d == 1:
        lo, hi = _pullback(A, j, region, exact=False)
        tol = 1e-12 * max(1.0, abs(lo), abs(hi))
        return (lo <= Kf[:, 0] + side + tol) & (hi >= Kf[:, 0] - tol)
    Y = np.array(_pullback(A, j, region, exact=False))
    tol = 1e-12 * max(1.0, float(np.max(np.abs(Y))))
    separated = np.zeros(len(K), dtype=bool)
    for i in range(2):
        separated |= Y[:, i].min() > Kf[:, i] + side + tol
        separated |= Y[:, i].max() < Kf[:, i] - tol
    for i in range(len(Y)):
        e = Y[(i + 1) % len(Y)] - Y[i]
        n = np.array([-e[1], e[0]])
        nn = float(np.linalg.norm(n))
        if nn == 0:
            continue
        n = n / nn
        base = Kf @ n
        blo = base + side * (min(0.0, n[0]) + min(0.0, n[1]))
        bhi = base + side * (max(0.0, n[0]) + max(0.0, n[1]))
        proj = Y @ n
        separated |= (bhi < proj.min() - tol) | (blo > proj.max() + tol)
    return ~separated


def _vec_ball(A: ExpansiveMatrix, j: int, K: np.ndarray, ball: Ball) -> np.ndarray:
    M = A.power(j).array
    O = K.astype(float) @ M.T
    c = np.array([float(v) for v in ball.center])
    r2 = float(ball.radius) ** 2
    if A.dim == 1:
        a = np.minimum(O[:, 0], O[:, 0] + M[0, 0])
        b = np.maximum(O[:, 0], O[:, 0] + M[0, 0])
        best = np.where(c[0] < a, a - c[0], np.where(c[0] > b, c[0] - b, 0.0)) ** 2
        return best <= r2 if ball.closed else best < r2
    U = (c - O) @ np.linalg.inv(M).T
    inside = np.all((U >= 0) & (U <= 1), axis=1)
    m1, m2 = M[:, 0], M[:, 1]
    verts = [O, O + m1, O + m1 + m2, O + m2]
    best = np.full(len(K), np.inf)
    for i in range(4):
        P0, P1 = verts[i], verts[(i + 1) % 4]
        E = P1 - P0
        L = np.sum(E * E, axis=1)
        t = np.clip(np.sum((c - P0) * E, axis=1) / L, 0.0, 1.0)
        D = P0 + t[:, None] * E - c
        best = np.minimum(best, np.sum(D * D, axis=1))
    best[inside] = 0.0
    return best <= r2 if ball.closed else best < r2


def _meets_general(A: ExpansiveMatrix, j: int, K: np.ndarray, region: Region, closed: bool) -> np.ndarray:
    """LP / bounded-least-squares tests for d >= 3 (closed semantics)."""
    from scipy.optimize import linprog, lsq_linear

    M = A.power(j).array
    d = A.dim
    out = np.zeros(len(K), dtype=bool)
    if isinstance(region, UnionRegion):
        for part in region.parts:
            out |= _meets_general(A, j, K, part, closed)
        return out
    for idx, k in enumerate(K):
        o = M @ k.astype(float)
        if isinstance(region, Ball):
            c = np.array([float(v) for v in region.center])
            res = lsq_linear(M, c - o, bounds=(0.0, 1.0))
            d2 = float(np.sum((M @ res.x + o - c) ** 2))
            r2 = float(region.radius) ** 2
            out[idx] = d2 <= r2 * (1 + 1e-12) if region.closed else d2 < r2
        elif isinstance(region, Box):
            lo = np.array([float(v) for v in region.lo])
            hi = np.array([float(v) for v in region.hi])
            res = linprog(np.zeros(d), A_ub=np.vstack([M, -M]), b_ub=np.concatenate([hi - o, o - lo]),
                          bounds=[(0, 1)] * d, method="highs")
            out[idx] = res.status == 0
        elif isinstance(region, Parallelotope):
            N = region.M.array
            off = np.array([float(v) for v in region.offset])
            res = linprog(np.zeros(2 * d), A_eq=np.hstack([M, -N]), b_eq=off - o,
                          bounds=[(0, 1)] * (2 * d), method="highs")
            out[idx] = res.status == 0
        else:
            raise InvalidInput(f"unsupported region {type(region).__name__} in dimension {d}")
    return out


def cubes_meeting_region(A: ExpansiveMatrix, j: int, region: Region, closed: bool = True,
                         exact: bool | None = None, max_candidates: int = MAX_CANDIDATES) -> list:
    """All k whose cube A^j([0,1]^d + k) meets ``region``.

    ``closed=True`` uses closed cubes (touching counts); ``closed=False`` uses
    half-open cubes A^j([0,1)^d + k). Regions are closed, except balls which
    carry their own flag. In d >= 3 both conventions use the closed test. The candidate set is the integer
    bounding box of A^{-j}(bbox(region)); each candidate is then tested
    exactly (rational inputs, d <= 2, moderate counts) or in vectorized
    floating point.
    """
    if region.dim != A.dim:
        raise InvalidInput("region dimension mismatch")
    lo, hi = region.bbox()
    if any(not math.isfinite(float(v)) for v in lo + hi):
        raise InvalidInput("region must be bounded")
    kmin, kmax, box_exact = _candidate_box(A, j, region)
    count = int(np.prod([b - a + 1 for a, b in zip(kmin, kmax)]))
    if count > max_candidates:
        raise CapacityError(f"{count} candidate cubes exceed the budget of {max_candidates}")
    K = _grid(kmin, kmax)
    if exact is None:
        exact = (box_exact and A.mode == RATIONAL and _region_is_exact(region)
                 and A.dim <= 2 and count <= EXACT_CANDIDATE_LIMIT)
    if exact and A.dim <= 2:
        hits = [tuple(int(v) for v in k) for k in K if _exact_meets(A, j, tuple(int(v) for v in k), region, closed)]
    else:
        mask = _vec_meets(A, j, K, region, closed)
        hits = [tuple(int(v) for v in k) for k in K[mask]]
    return sorted(hits)
