"""Quasi-norms of coefficient sequences in the four exponent regimes.

Notation: for a space (A, alpha, p, q) the weighted atom at (j, k) is
a_{j,k} = |det A|^{-j(alpha+1/2)} |c_{j,k}|, and the stack at x is
(sum_{j,k} (a_{j,k} 1_{Q_{j,k}}(x))^q)^{1/q} (a max when q = inf).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from anisotl.errors import CapacityError, InvalidCombination, InvalidInput
from anisotl.geometry import polygons
from anisotl.geometry.cubes import DyadicCube, cube_indices, cube_of_point, cubes_meeting_region
from anisotl.geometry.montecarlo import DEFAULT_SAMPLES, DEFAULT_SEED, chunk_rng, integrate_box
from anisotl.geometry.overlay import DEFAULT_BUDGET, overlay_cells_1d, overlay_cells_2d
from anisotl.geometry.regions import Parallelotope
from anisotl.matrices import RATIONAL, Matrix
from anisotl.sequences import ExplicitSequence, ImplicitSequence, index_box_region
from anisotl.spaces import INF, SpaceParams

EXACT_1D = "exact-1d"
EXACT_2D = "exact-2d-overlay"
MONTE_CARLO = "monte-carlo"
CLOSED_FORM = "closed-form"
SUP_FORMULA = "sup-formula"
EXACT_METHODS = (EXACT_1D, EXACT_2D, CLOSED_FORM, SUP_FORMULA)

MAX_P_CANDIDATES = 200_000
SAMPLES_PER_CANDIDATE = 4096


@dataclass
class NormResult:
    value: float
    method: str
    error: float = 0.0
    diagnostics: dict = field(default_factory=dict)

    @property
    def exact(self) -> bool:
        return self.method in EXACT_METHODS

    def to_dict(self) -> dict:
        return {"value": self.value, "method": self.method, "error": self.error,
                "diagnostics": _jsonable(self.diagnostics)}


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    return obj


def _qf(s: SpaceParams) -> float:
    return math.inf if s.q == INF else float(s.q)


def _check(c, s: SpaceParams):
    if c.dim != s.dim:
        raise InvalidInput(f"sequence dimension {c.dim} does not match space dimension {s.dim}")


# -- pointwise stack ----------------------------------------------------------------


def stack_value(c, s: SpaceParams, x, j_cap=INF) -> float:
    """Stack value at one point, restricted to scales j <= j_cap (half-open cube location)."""
    _check(c, s)
    q = _qf(s)
    acc = 0.0
    terms = []
    for j in c.scales:
        if j > j_cap:
            break
        k = cube_of_point(s.matrix, j, x)
        m = float(c.coef(j, np.array([k]))[0])
        if m == 0:
            continue
        v = s.weight(j) * m
        if q == math.inf:
            acc = max(acc, v)
        else:
            terms.append(v ** q)
    if q == math.inf:
        return acc
    return math.fsum(terms) ** (1.0 / q) if terms else 0.0


def stack_values(c, s: SpaceParams, X: np.ndarray, j_cap=INF, power: float | None = None) -> np.ndarray:
    """Vectorized stack values at the rows of X; with ``power`` returns stack**power."""
    q = _qf(s)
    acc = np.zeros(len(X))
    for j in c.scales:
        if j > j_cap:
            break
        m = c.coef(j, cube_indices(s.matrix, j, X))
        if not m.any():
            continue
        v = s.weight(j) * m
        if q == math.inf:
            np.maximum(acc, v, out=acc)
        else:
            acc += v ** q
    if q == math.inf:
        return acc if power is None else acc ** power
    if power is None:
        return acc ** (1.0 / q)
    return acc ** (power / q)


# -- layered geometry -----------------------------------------------------------------


@dataclass
class _Piece:
    j: int
    region: object
    a: float  # weighted modulus w_j |c|
    volume: object
    poly: object = None  # polygon (d=2) or interval (d=1)
    rect: tuple | None = None
    bbox: tuple = None


def _layer_pieces(c, s: SpaceParams, allow_materialize: bool = True) -> list[_Piece]:
    layers = c.layers(s.matrix)
    if layers is None:
        if not allow_materialize:
            raise InvalidCombination("this implicit sequence has no exact geometry; use method='mc'")
        layers = c.materialize().layers(s.matrix)
    pieces = []
    for j in sorted(layers):
        w = s.weight(j)
        for region, m in layers[j]:
            if m == 0:
                continue
            poly = region.polygon() if s.dim <= 2 else None
            if s.dim == 2:
                vol = polygons.area(poly)
                rect = _rect_of(poly)
            elif s.dim == 1:
                vol = poly[1] - poly[0]
                rect = None
            else:
                vol = region.volume()
                rect = None
            lo, hi = region.bbox()
            pieces.append(_Piece(j, region, w * float(m), vol, poly, rect,
                                 (np.array([float(v) for v in lo]), np.array([float(v) for v in hi]))))
    return pieces


def _rect_of(poly):
    if len(poly) != 4:
        return None
    for i in range(4):
        a, b = poly[i], poly[(i + 1) % 4]
        if a[0] != b[0] and a[1] != b[1]:
            return None
    (x0, y0), (x1, y1) = polygons.bbox(poly)
    return (x0, y0, x1, y1)


def _cells(pieces: list[_Piece], dim: int, budget: int):
    if dim == 1:
        return overlay_cells_1d([p.poly for p in pieces], budget), EXACT_1D
    if dim == 2:
        return overlay_cells_2d([p.poly for p in pieces], budget), EXACT_2D
    raise InvalidCombination("exact evaluation is available for d <= 2 only")


def _cell_stack(cell, pieces, q: float) -> float:
    vals = [pieces[i].a for i in cell.mask]
    if q == math.inf:
        return max(vals)
    return math.fsum(v ** q for v in vals) ** (1.0 / q)


# -- p < inf --------------------------------------------------------------------------


def _lp_exact(c, s: SpaceParams, budget: int) -> NormResult:
    pieces = _layer_pieces(c, s)
    if not pieces:
        return NormResult(0.0, EXACT_2D if s.dim == 2 else EXACT_1D, 0.0, {"pieces": 0})
    cells, tag = _cells(pieces, s.dim, budget)
    p, q = float(s.p), _qf(s)
    total = math.fsum(_cell_stack(cell, pieces, q) ** p * float(cell.area) for cell in cells)
    return NormResult(total ** (1.0 / p), tag, 0.0, {"pieces": len(pieces), "cells": len(cells)})


def support_bbox(c, M) -> tuple:
    """Bounding box of the union of all support cubes (from the per-scale index boxes)."""
    los, his = [], []
    for j in c.scales:
        box = c.index_box(j)
        if box is None:
            continue
        lo, hi = index_box_region(M, j, box).bbox()
        los.append([float(v) for v in lo])
        his.append([float(v) for v in hi])
    if not los:
        return None
    return np.min(np.array(los), axis=0), np.max(np.array(his), axis=0)


def _lp_mc(c, s: SpaceParams, samples: int, seed: int, workers: int) -> NormResult:
    box = support_bbox(c, s.matrix)
    p = float(s.p)
    if box is None:
        return NormResult(0.0, MONTE_CARLO, 0.0, {"samples": samples, "seed": seed})
    res = integrate_box(lambda X: stack_values(c, s, X, power=p), box[0], box[1], samples, seed, workers)
    integral, se = res.estimate, res.stderr
    value = integral ** (1.0 / p) if integral > 0 else 0.0
    err = (1.0 / p) * integral ** (1.0 / p - 1.0) * se if integral > 0 else 0.0
    return NormResult(value, MONTE_CARLO, err, {
        "samples": samples, "seed": seed, "integral": integral, "integral_stderr": se,
        "box_volume": res.box_volume,
    })


def norm_lp(c, s: SpaceParams, method: str = "exact", samples: int = DEFAULT_SAMPLES,
            seed: int = DEFAULT_SEED, workers: int = 1, budget: int = DEFAULT_BUDGET) -> NormResult:
    """L^p norm of the stack (p < inf) by exact overlay (d <= 2) or Monte Carlo.

    An exact request that exceeds the overlay budget falls back to Monte
    Carlo and records the reason under ``diagnostics['fallback']``.
    """
    _check(c, s)
    if s.p == INF:
        raise InvalidCombination("norm_lp needs p < inf")
    if method == "mc":
        return _lp_mc(c, s, samples, seed, workers)
    if method != "exact":
        raise InvalidInput(f"unknown method {method!r}")
    if isinstance(c, ImplicitSequence) and c.layers(s.matrix) is None:
        raise InvalidCombination("implicit sequence without exact geometry cannot use method='exact'")
    if s.dim > 2:
        raise InvalidCombination("exact evaluation is available for d <= 2 only")
    try:
        return _lp_exact(c, s, budget)
    except CapacityError as exc:
        out = _lp_mc(c, s, samples, seed, workers)
        out.diagnostics["fallback"] = f"exact overlay abandoned: {exc}"
        return out


def norm_closed_form_pq(c: ExplicitSequence, s: SpaceParams) -> NormResult:
    """(sum_{j,k} D^{-jp} |c_{j,k}|^p)^{1/p} with D = |det A|^{alpha+1/2-1/p}; needs p = q < inf."""
    _check(c, s)
    if s.p != s.q or s.p == INF:
        raise InvalidCombination("closed form needs p = q < inf")
    if not isinstance(c, ExplicitSequence):
        raise InvalidCombination("closed form needs an explicit sequence")
    p = float(s.p)
    x = float(s.det_exponent())
    det = float(s.matrix.abs_det)
    terms = [float(m) ** p * det ** (-j * p * x) for (j, _), m in c.items()]
    return NormResult(math.fsum(terms) ** (1.0 / p) if terms else 0.0, CLOSED_FORM, 0.0, {"atoms": len(terms)})


# -- p = inf ---------------------------------------------------------------------------


def norm_sup_sup(c, s: SpaceParams) -> NormResult:
    """sup_{j,k} |det A|^{-j(alpha+1/2)} |c_{j,k}| (p = q = inf)."""
    _check(c, s)
    if isinstance(c, ExplicitSequence):
        vals = [s.weight(j) * float(m) for (j, _), m in c.items()]
    else:
        vals = [s.weight(j) * c.max_modulus(j) for j in c.scales]
    return NormResult(max(vals, default=0.0), SUP_FORMULA, 0.0, {"atoms": len(vals)})


def _overlap_measure(P, piece: _Piece, dim: int):
    """|P cap piece| for a cube P (region + polygon) and a layer piece."""
    if dim == 1:
        a, b = P["poly"]
        lo, hi = piece.poly
        return max(0, min(b, hi) - max(a, lo))
    if P["rect"] is not None and piece.rect is not None:
        x0, y0, x1, y1 = P["rect"]
        u0, v0, u1, v1 = piece.rect
        w = min(x1, u1) - max(x0, u0)
        h = min(y1, v1) - max(y0, v0)
        return w * h if w > 0 and h > 0 else 0
    return polygons.intersection_area(P["poly"], piece.poly)


def _candidate_cubes(s: SpaceParams, jP: int, pieces: list[_Piece], limit: int) -> list:
    found: set = set()
    for piece in pieces:
        found.update(cubes_meeting_region(s.matrix, jP, piece.region, closed=True))
        if len(found) > limit:
            raise CapacityError(f"more than {limit} candidate cubes at scale {jP}")
    return sorted(found)


def _mc_average(c, s: SpaceParams, jP: int, k, q: float, samples: int, seed: int):
    """Mean of the capped stack^q over the cube P = A^{jP}([0,1)^d + k), with its standard error."""
    rng = chunk_rng(seed, hash((jP,) + tuple(k)) & 0x7FFFFFFF)
    Y = rng.random((samples, s.dim)) + np.asarray(k, dtype=float)
    X = Y @ s.matrix.power(jP).array.T
    v = stack_values(c, s, X, j_cap=jP, power=q)
    return float(np.mean(v)), float(np.std(v, ddof=1) / math.sqrt(samples))


def norm_infty_q(c, s: SpaceParams, method: str = "exact", samples: int = DEFAULT_SAMPLES,
                 seed: int = DEFAULT_SEED, max_candidates: int = MAX_P_CANDIDATES) -> NormResult:
    """sup over cubes P of (avg_P sum_{j <= scale(P)} sum_k (a_{j,k} 1_{Q_{j,k}})^q)^{1/q}.

    Every term is linear in the indicator, so the average over P is
    sum a^q |P cap Q| / |P| (exact for d <= 2). Scales are visited from the
    coarsest support scale down to the finest, then upward; a scale is
    skipped when either rigorous bound, sum_{j <= scale} max_k a_{j,k}^q or
    I_total / |P|, cannot beat the best value found, and the upward sweep
    stops once I_total / |P| cannot. Scales below the finest support scale
    have an identically zero capped stack.
    """
    _check(c, s)
    if s.p != INF or s.q == INF:
        raise InvalidCombination("norm_infty_q needs p = inf and q < inf")
    if method not in ("exact", "mc"):
        raise InvalidInput(f"unknown method {method!r}")
    q = float(s.q)
    use_mc = method == "mc" or s.dim > 2
    pieces = _layer_pieces(c, s)
    if not pieces:
        return NormResult(0.0, MONTE_CARLO if use_mc else (EXACT_2D if s.dim == 2 else EXACT_1D), 0.0, {})
    det = s.matrix.abs_det
    i_total = math.fsum(p.a ** q * float(p.volume) for p in pieces)
    scales = sorted({p.j for p in pieces})
    by_scale = {j: [p for p in pieces if p.j == j] for j in scales}
    cap: dict = {}
    run = 0.0
    for j in scales:
        run += max(p.a ** q for p in by_scale[j])
        cap[j] = run

    def cap_at(jP):
        below = [j for j in scales if j <= jP]
        return cap[below[-1]] if below else 0.0

    best, best_err, best_P = 0.0, 0.0, None
    visited, skipped, evaluated = [], [], 0
    per_cand = min(samples, SAMPLES_PER_CANDIDATE)

    def sweep(jP):
        nonlocal best, best_err, best_P, evaluated
        active = [p for p in pieces if p.j <= jP]
        ks = _candidate_cubes(s, jP, active, max_candidates)
        vol_P = det ** jP if isinstance(det, Fraction) else float(det) ** jP
        lo_arr = np.array([p.bbox[0] for p in active])
        hi_arr = np.array([p.bbox[1] for p in active])
        for k in ks:
            evaluated += 1
            if use_mc:
                val, err = _mc_average(c, s, jP, k, q, per_cand, seed)
            else:
                cube = DyadicCube(s.matrix, jP, k)
                poly = cube.polygon()
                P = {"poly": poly, "rect": _rect_of(poly) if s.dim == 2 else None}
                plo, phi = (np.array([float(v) for v in b]) for b in cube.region.bbox())
                near = np.flatnonzero(np.all((lo_arr <= phi + 1e-9) & (hi_arr >= plo - 1e-9), axis=1))
                val = math.fsum(active[i].a ** q * float(_overlap_measure(P, active[i], s.dim)) for i in near)
                val /= float(vol_P)
                err = 0.0
            if val > best:
                best, best_err, best_P = val, err, (jP, tuple(k))
        visited.append(jP)

    for jP in range(scales[-1], scales[0] - 1, -1):
        if min(cap_at(jP), i_total / float(det) ** jP) <= best:
            skipped.append(jP)
        else:
            sweep(jP)
    jP = scales[-1] + 1
    while i_total / float(det) ** jP > best:
        sweep(jP)
        jP += 1
    value = best ** (1.0 / q)
    err = (1.0 / q) * best ** (1.0 / q - 1.0) * best_err if best > 0 else 0.0
    tag = MONTE_CARLO if use_mc else (EXACT_2D if s.dim == 2 else EXACT_1D)
    return NormResult(value, tag, err, {
        "best_cube": {"j": best_P[0], "k": list(best_P[1])} if best_P else None,
        "scales_swept": visited, "scales_pruned": skipped, "candidates": evaluated,
        "pruning_bound_I_total": i_total,
    })


# -- stacked sup-norm over shrunken cubes ----------------------------------------------------


@dataclass(frozen=True)
class SubBoxFamily:
    """Axis-aligned sub-boxes S_{j,k} of [0,1]^d with volume fraction > eps.

    ``fraction`` sets the box volume (side fraction**(1/d) per axis);
    ``placement`` is "center", "corner" or "random" (seeded per (j, k)).
    """

    fraction: float = 1.0
    eps: float = 0.5
    placement: str = "center"
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.eps < 1:
            raise InvalidInput("eps must lie in (0, 1)")
        if not self.fraction <= 1 or self.fraction <= self.eps:
            raise InvalidInput(f"sub-box fraction {self.fraction} must lie in (eps={self.eps}, 1]")
        if self.placement not in ("center", "corner", "random"):
            raise InvalidInput(f"unknown placement {self.placement!r}")

    @property
    def full(self) -> bool:
        return self.fraction == 1

    def box(self, j: int, k, d: int):
        side = self.fraction ** (1.0 / d)
        if self.placement == "center":
            lo = [(1 - side) / 2] * d
        elif self.placement == "corner":
            lo = [0.0] * d
        else:
            rng = chunk_rng(self.seed, hash((j,) + tuple(k)) & 0x7FFFFFFF)
            lo = list(rng.random(d) * (1 - side))
        return lo, [v + side for v in lo]


def stacked_sup_norm(c, s: SpaceParams, shrink: SubBoxFamily | None = None,
                     budget: int = DEFAULT_BUDGET) -> float:
    """Essential sup of (sum (a_{j,k} 1_{E_{j,k}})^q)^{1/q}, E_{j,k} = A^j(S_{j,k} + k)."""
    _check(c, s)
    if s.dim > 2:
        raise InvalidCombination("stacked sup-norm is exact for d <= 2 only")
    if shrink is None or shrink.full:
        pieces = _layer_pieces(c, s)
    else:
        seq = c.materialize()
        pieces = []
        for (j, k), m in seq.items():
            lo, hi = shrink.box(j, k, s.dim)
            Mj = s.matrix.power(j)
            arr = Mj.array
            cols = arr * np.array([h - l for l, h in zip(lo, hi)])[None, :]
            off = arr @ (np.asarray(k, dtype=float) + np.array(lo))
            region = Parallelotope(Matrix(cols.tolist()), tuple(off.tolist()))
            poly = region.polygon()
            pieces.append(_Piece(j, region, s.weight(j) * float(m), region.volume(), poly,
                                 _rect_of(poly) if s.dim == 2 else None))
    if not pieces:
        return 0.0
    cells, _ = _cells(pieces, s.dim, budget)
    return max(_cell_stack(cell, pieces, _qf(s)) for cell in cells)


# -- generic entry points ---------------------------------------------------------------


def norm(c, s: SpaceParams, method: str = "auto", samples: int = DEFAULT_SAMPLES,
         seed: int = DEFAULT_SEED, workers: int = 1) -> NormResult:
    """Dispatch on the exponent regime.

    ``auto`` picks the closed form for explicit p = q < inf, the exact
    geometric path when d <= 2 and geometry is available, and Monte Carlo
    otherwise.
    """
    if s.p == INF and s.q == INF:
        return norm_sup_sup(c, s)
    exact_ok = s.dim <= 2 and (isinstance(c, ExplicitSequence) or c.layers(s.matrix) is not None)
    if s.p == INF:
        if method == "auto":
            method = "exact" if exact_ok else "mc"
        return norm_infty_q(c, s, method, samples, seed)
    if method == "closed-form":
        return norm_closed_form_pq(c, s)
    if method == "auto":
        if isinstance(c, ExplicitSequence) and s.p == s.q:
            return norm_closed_form_pq(c, s)
        method = "exact" if exact_ok else "mc"
    return norm_lp(c, s, method, samples, seed, workers)


def r_triangle_defect(a: ExplicitSequence, b: ExplicitSequence, s: SpaceParams,
                      method: str = "auto") -> float:
    """||a+b||^r - ||a||^r - ||b||^r with r = min(1, p, q); nonpositive in theory."""
    if not isinstance(a, ExplicitSequence) or not isinstance(b, ExplicitSequence):
        raise InvalidCombination("r-triangle defect needs explicit sequences")
    r = s.r
    na = norm(a, s, method).value
    nb = norm(b, s, method).value
    nab = norm(a + b, s, method).value
    return nab ** r - na ** r - nb ** r
