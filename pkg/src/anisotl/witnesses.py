"""Witness sequences whose two space norms follow different growth laws, and law fitting."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from anisotl.errors import InvalidInput, InvalidState, NotFound
from anisotl.io import matrix_to_json
from anisotl.geometry import polygons
from anisotl.geometry.cubes import (
    DyadicCube, _candidate_box, _vec_meets, cube_of_point, cubes_meeting_region,
)
from anisotl.geometry.montecarlo import DEFAULT_SAMPLES, DEFAULT_SEED
from anisotl.geometry.regions import Ball, Box, Parallelotope
from anisotl.matrices import RATIONAL, ExpansiveMatrix, Matrix
from anisotl.norms import NormResult, norm
from anisotl.orbit import orbit_is_finite
from anisotl.sequences import ExplicitSequence, ImplicitSequence, index_box_region
from anisotl.spaces import INF, SpaceParams, format_exponent, parse_alpha, parse_exponent

DEFAULT_WINDOW = 64
DEFAULT_FLOOR = 1e-6
DEFAULT_DELTA = Fraction(1, 10)
RANDOM_DIRECTIONS = 32


# -- separation (pairwise disjoint transported balls) -----------------------------------


@dataclass(frozen=True)
class SeparationData:
    """Indices j_t and a base point x0 whose images D_t x0 (D_t = B^{j_t} A^{-j_t}) are separated.

    ``r_prime`` bounds every ||D_t||; ``eps`` < delta / (r_prime sqrt(d)) makes
    the sets D_t(ball(R x0, R eps)) pairwise disjoint for every R > 0.
    """

    js: tuple
    x0: tuple
    eps: float
    r_prime: float
    delta: float
    min_distance: float
    images: tuple = ()
    window: tuple = (-DEFAULT_WINDOW, DEFAULT_WINDOW)

    @property
    def N(self) -> int:
        return len(self.js)

    def transport(self, A: ExpansiveMatrix, B: ExpansiveMatrix, t: int) -> np.ndarray:
        j = self.js[t]
        return B.power(j).array @ A.power(-j).array

    def check(self, A: ExpansiveMatrix, B: ExpansiveMatrix) -> dict:
        """Recompute every stated invariant from scratch."""
        d = A.dim
        x0 = np.array(self.x0)
        pts = [self.transport(A, B, t) @ x0 for t in range(self.N)]
        dists = [float(np.linalg.norm(pts[s] - pts[t])) for s in range(self.N) for t in range(s + 1, self.N)]
        norms = [float(np.linalg.norm(self.transport(A, B, t), 2)) for t in range(self.N)]
        out = {
            "distinct": min(dists, default=math.inf) > 0,
            "delta_below_half_distance": self.delta < 0.5 * min(dists, default=math.inf),
            "norm_bound": max(norms, default=0.0) <= self.r_prime,
            "eps_bound": self.eps < self.delta / (self.r_prime * math.sqrt(d)),
        }
        out["ok"] = all(out.values())
        return out

    def disjoint_for(self, A: ExpansiveMatrix, B: ExpansiveMatrix, R: float) -> bool:
        """Pairwise separation of D_t(ball(R x0, R eps)) via enclosing balls of radius ||D_t|| R eps."""
        x0 = np.array(self.x0)
        mats = [self.transport(A, B, t) for t in range(self.N)]
        centers = [R * (M @ x0) for M in mats]
        radii = [float(np.linalg.norm(M, 2)) * R * self.eps for M in mats]
        for s in range(self.N):
            for t in range(s + 1, self.N):
                if np.linalg.norm(centers[s] - centers[t]) <= radii[s] + radii[t]:
                    return False
        return True

    def to_dict(self) -> dict:
        return {"js": list(self.js), "x0": list(self.x0), "eps": self.eps, "r_prime": self.r_prime,
                "delta": self.delta, "min_distance": self.min_distance, "window": list(self.window)}


def _window_order(window: int) -> list:
    return list(range(1, window + 1)) + list(range(0, -window - 1, -1))


def find_separating_points(A: ExpansiveMatrix, B: ExpansiveMatrix, N: int, window: int = DEFAULT_WINDOW,
                           floor: float = DEFAULT_FLOOR, seed: int = 0, override: bool = False,
                           m_max: int = 64, widenings: int = 2) -> SeparationData:
    """Greedy search for N indices with pairwise separated images D_j x0.

    Indices are tried in the order 1..window, 0, -1..-window; base points are
    the standard basis vectors, then seeded random unit vectors. The window
    doubles up to ``widenings`` times before giving up. With N = 1 any delta
    works; 1/2 is used.
    """
    if N < 1:
        raise InvalidInput("N must be positive")
    if A.dim != B.dim:
        raise InvalidInput("dimension mismatch")
    if not override and N > 1:
        verdict = orbit_is_finite(A, B, m_max)
        if verdict.finite:
            raise NotFound(f"orbit is finite (period {verdict.period}); no separating points in window ±{window}")
    for w in (window * 2 ** i for i in range(widenings + 1)):
        found = _search(A, B, N, w, floor, seed)
        if found is not None:
            return found
    raise NotFound(f"no {N} separated images found for j in [-{w}, {w}] "
                   f"(the orbit may be finite or the window too small)")


def _search(A, B, N, window, floor, seed):
    d = A.dim
    Af, Bf = A.to_float(), B.to_float()
    order = _window_order(window)
    D = {}
    for j in order:
        with np.errstate(over="ignore", invalid="ignore"):
            M = Bf.power(j).array @ Af.power(-j).array
        if np.all(np.isfinite(M)):
            D[j] = M
    rng = np.random.default_rng(seed)
    candidates = [np.eye(d)[i] for i in range(d)]
    for _ in range(RANDOM_DIRECTIONS):
        v = rng.standard_normal(d)
        candidates.append(v / np.linalg.norm(v))
    for x0 in candidates:
        chosen, pts = [], []
        for j in order:
            if j not in D:
                continue
            y = D[j] @ x0
            if all(np.linalg.norm(y - p) >= floor for p in pts):
                chosen.append(j)
                pts.append(y)
                if len(chosen) == N:
                    break
        if len(chosen) < N:
            continue
        if N == 1:
            mind, delta = math.inf, 0.5
        else:
            mind = min(float(np.linalg.norm(pts[s] - pts[t])) for s in range(N) for t in range(s + 1, N))
            delta = 0.5 * mind * (1 - 1e-9)
        r_prime = max(1 + 1e-6, max(float(np.linalg.norm(D[j], 2)) for j in chosen))
        eps = 0.99 * delta / (r_prime * math.sqrt(d))
        return SeparationData(tuple(chosen), tuple(float(v) for v in x0), eps, r_prime, delta, mind,
                              tuple(tuple(float(v) for v in p) for p in pts), (-window, window))
    return None


# -- families -----------------------------------------------------------------------------


@dataclass
class WitnessFamily:
    """A generated sequence, the space it is measured in, and its predicted norm law."""

    tag: str
    sequence: object
    space: SpaceParams
    predicted: float
    law: str
    params: dict = field(default_factory=dict)
    audits: dict = field(default_factory=dict)

    def measure(self, method: str = "auto", samples: int = DEFAULT_SAMPLES, seed: int = DEFAULT_SEED,
                workers: int = 1) -> NormResult:
        return norm(self.sequence, self.space, method, samples, seed, workers)

    def to_dict(self) -> dict:
        return {"tag": self.tag, "law": self.law, "predicted": self.predicted,
                "space": self.space.describe(), "params": _plain(self.params), "audits": _plain(self.audits)}


@dataclass
class WitnessPair:
    """The same sequence measured in the A-space and in the B-space."""

    a: WitnessFamily
    b: WitnessFamily
    sep: SeparationData | None = None

    @property
    def tag(self):
        return self.a.tag

    def to_dict(self) -> dict:
        return {"a": self.a.to_dict(), "b": self.b.to_dict(), "separation": self.sep.to_dict() if self.sep else None}


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return obj


def _lq(values, q) -> float:
    vals = [abs(float(v)) for v in values]
    if q == INF:
        return max(vals, default=0.0)
    q = float(q)
    return math.fsum(v ** q for v in vals) ** (1.0 / q)


def delta_witness(j0: int, s: SpaceParams) -> WitnessFamily:
    seq = ExplicitSequence({(j0, (0,) * s.dim): 1}, s.dim)
    det = float(s.matrix.abs_det)
    if s.p == INF:
        pred = det ** (-j0 * float(s.alpha + Fraction(1, 2)))
        law = "|det A|^{-j0(alpha+1/2)}"
    else:
        pred = det ** (-j0 * float(s.det_exponent()))
        law = "|det A|^{-j0(alpha+1/2-1/p)}"
    return WitnessFamily("delta", seq, s, pred, law, {"j0": j0})


def single_scale_witness(a, s: SpaceParams) -> WitnessFamily:
    """c_{0,k} = a_k; ``a`` maps index tuples (or ints for d = 1) to values."""
    entries = {}
    for k, v in dict(a).items():
        k = tuple(k) if isinstance(k, (tuple, list)) else (k,)
        entries[(0, k)] = v
    seq = ExplicitSequence(entries, s.dim)
    pred = _lq(dict(a).values(), s.p)
    return WitnessFamily("single-scale", seq, s, pred, "||a||_{l^p}", {"entries": len(entries)})


def _ball_member(A: ExpansiveMatrix, j: int, K: np.ndarray, ball: Ball) -> np.ndarray:
    return _vec_meets(A, j, K, ball, True)


def case1_witness(A: ExpansiveMatrix, B: ExpansiveMatrix, sep: SeparationData, sigma, p, alpha1,
                  q1=INF, q2=None, alpha2=None) -> WitnessPair:
    """Coefficients |tau_t| |det A|^{j_t(alpha1+1/2-1/p)} on I_{t,R}, with tau_t = |det A|^{j_t/p} sigma_t.

    R = 2 R1 / eps with R1 = max_t sqrt(d) ||A^{j_t}||; P_R is the open ball of
    radius R eps / 2 about R x0 and I_{t,R} lists the closed cubes at scale
    j_t meeting it. Membership is tested geometrically on the fly.
    """
    p = parse_exponent(p)
    if p == INF:
        raise InvalidInput("case 1 needs p < inf")
    alpha1 = parse_alpha(alpha1)
    sigma = [float(v) for v in sigma]
    if len(sigma) != sep.N:
        raise InvalidInput("sigma must have one weight per separating index")
    d = A.dim
    detA = float(A.abs_det)
    r1 = max(math.sqrt(d) * float(np.linalg.norm(A.power(j).array, 2)) for j in sep.js)
    R = 2 * r1 / sep.eps
    center = tuple(R * v for v in sep.x0)
    P = Ball(center, R * sep.eps / 2)
    x = float(alpha1 + Fraction(1, 2) - 1 / p)
    tau = [detA ** (j / float(p)) * sg for j, sg in zip(sep.js, sigma)]
    value = {j: abs(t) * detA ** (j * x) for j, t in zip(sep.js, tau)}
    boxes = {}
    for j in sep.js:
        kmin, kmax, _ = _candidate_box(A, j, P)
        boxes[j] = (tuple(kmin), tuple(kmax))

    def coef(j, K):
        return np.where(_ball_member(A, j, K, P), value[j], 0.0)

    seq = ImplicitSequence(d, sep.js, coef, boxes, max_moduli=value,
                           description=f"case1 N={sep.N} R={R:.6g}")
    if alpha2 is None:
        alpha2 = matched_alpha(A, B, alpha1, p)
    q2 = q1 if q2 is None else q2
    sA = SpaceParams(A, alpha1, p, q1)
    sB = SpaceParams(B, alpha2, p, q2)
    pref = (R * sep.eps) ** (d / float(p))
    params = {"N": sep.N, "R": R, "r1": r1, "eps": sep.eps, "js": list(sep.js), "x0": list(sep.x0),
              "sigma": sigma, "tau": tau, "p": str(p), "alpha1": str(alpha1), "alpha2": str(alpha2)}
    fa = WitnessFamily("case1", seq, sA, pref * _lq(sigma, sA.q), "(R eps)^{d/p} ||sigma||_{l^q1}", params)
    fb = WitnessFamily("case1", seq, sB, pref * _lq(sigma, p), "(R eps)^{d/p} ||sigma||_{l^p}", params)
    return WitnessPair(fa, fb, sep)


def matched_alpha(A: ExpansiveMatrix, B: ExpansiveMatrix, alpha1, p) -> Fraction:
    """alpha2 with |det A|^{alpha1+1/2-1/p} = |det B|^{alpha2+1/2-1/p}."""
    inv_p = Fraction(0) if p == INF else 1 / Fraction(p)
    x = Fraction(alpha1) + Fraction(1, 2) - inv_p
    da, db = A.abs_det, B.abs_det
    if da == db:
        return Fraction(alpha1)
    ratio = math.log(float(da)) / math.log(float(db))
    return Fraction(repr(float(x) * ratio)) - Fraction(1, 2) + inv_p


def case1_audit(pair: WitnessPair, A: ExpansiveMatrix, B: ExpansiveMatrix, samples: int = 20000,
                seed: int = 0) -> dict:
    """Sandwich P_R in Omega_t in ball(R x0, R eps) and pairwise disjointness of Lambda_t."""
    prm = pair.a.params
    R, eps = prm["R"], prm["eps"]
    x0 = np.array(prm["x0"])
    c = R * x0
    seq = pair.a.sequence
    rng = np.random.default_rng(seed)
    d = A.dim
    # uniform points in the open ball P_R
    U = rng.standard_normal((samples, d))
    U /= np.linalg.norm(U, axis=1)[:, None]
    U *= (rng.random(samples) ** (1 / d))[:, None] * (R * eps / 2) * (1 - 1e-12)
    X = c + U
    out = {"P_R_in_Omega": True, "Omega_in_ball": True, "Lambda_disjoint": True}
    enclosing = []
    for t, j in enumerate(pair.sep.js):
        K = np.floor(X @ A.power(-j).array.T).astype(np.int64)
        if not np.all(seq.coef(j, K) > 0):
            out["P_R_in_Omega"] = False
        mat = seq.materialize().by_scale(j) if hasattr(seq, "materialize") else {}
        ks = np.array(list(mat), dtype=float).reshape(-1, d)
        corners = np.array(list(np.ndindex(*(2,) * d)), dtype=float)
        Mj = A.power(j).array
        V = (ks[:, None, :] + corners[None, :, :]) @ Mj.T
        if np.max(np.linalg.norm(V - c, axis=2)) >= R * eps:
            out["Omega_in_ball"] = False
        T = pair.sep.transport(A, B, t)
        VB = V @ T.T
        center = T @ c
        enclosing.append((center, float(np.max(np.linalg.norm(VB - center, axis=2)))))
    for s in range(len(enclosing)):
        for t in range(s + 1, len(enclosing)):
            (cs, rs), (ct, rt) = enclosing[s], enclosing[t]
            if np.linalg.norm(cs - ct) <= rs + rt:
                out["Lambda_disjoint"] = False
    out["ok"] = all(out.values())
    return out


def _ell0(A: ExpansiveMatrix, delta) -> int:
    """Least l >= 1 with A^{-l}[0,1]^d inside [-delta, delta]^d."""
    for ell in range(1, 4096):
        M = A.power(-ell)
        rows = M.rows if M.mode == RATIONAL else M.array.tolist()
        ok = True
        for r in rows:
            pos = sum(v for v in r if v > 0)
            neg = -sum(v for v in r if v < 0)
            if max(pos, neg) > delta:
                ok = False
                break
        if ok:
            return ell
    raise InvalidState("no l0 found below 4096")


def case2_witness(A: ExpansiveMatrix, B: ExpansiveMatrix, sep: SeparationData, tau, alpha1,
                  q1=1, q2=None, alpha2=None, delta=DEFAULT_DELTA) -> WitnessPair:
    """Coefficients |det A|^{j_t(alpha1+1/2)} |tau_t| on I_{t,delta} (cubes at scale j_t meeting P_delta)."""
    delta = Fraction(delta) if not isinstance(delta, float) else Fraction(repr(delta))
    if not 0 < delta < Fraction(1, 6):
        raise InvalidInput("delta must lie in (0, 1/6)")
    alpha1 = parse_alpha(alpha1)
    tau = [float(v) for v in tau]
    if len(tau) != sep.N:
        raise InvalidInput("tau must have one entry per separating index")
    d = A.dim
    ell0 = _ell0(A, delta)
    j0 = ell0 + max(sep.js)
    R = 10 * math.sqrt(d) * float(np.linalg.norm(A.power(j0).array, 2))
    Rx0 = tuple(R * v for v in sep.x0)
    k0 = cube_of_point(A, j0, Rx0)
    Mj0 = A.power(j0)
    lo = tuple(Fraction(1, 2) - delta + k for k in k0) if A.mode == RATIONAL else tuple(0.5 - float(delta) + k for k in k0)
    side = 2 * delta if A.mode == RATIONAL else 2 * float(delta)
    P_delta = Parallelotope(Matrix([[v * side for v in row] for row in Mj0.rows], Mj0.mode), Mj0.apply(lo))
    Q0 = DyadicCube(A, j0, k0)
    detA = A.abs_det
    entries = {}
    inclusion = True
    for j, t in zip(sep.js, tau):
        ks = cubes_meeting_region(A, j, P_delta, closed=True)
        val = float(detA) ** (j * float(alpha1 + Fraction(1, 2))) * abs(t)
        for k in ks:
            entries[(j, k)] = val
            if not _cube_inside(A, j, k, j0, k0):
                inclusion = False
    if not inclusion:
        raise InvalidState("Omega_{t,delta} is not inside Q_{j0,k0}; widen the parameter search")
    seq = ExplicitSequence(entries, d)
    if alpha2 is None:
        alpha2 = matched_alpha(A, B, alpha1, INF)
    q2 = q1 if q2 is None else q2
    sA = SpaceParams(A, alpha1, INF, q1)
    sB = SpaceParams(B, alpha2, INF, q2)
    ratio = float(P_delta.volume()) / float(Q0.volume())
    pred_a = (ratio * math.fsum(abs(t) ** float(sA.q) for t in tau)) ** (1 / float(sA.q)) if sA.q != INF else max(map(abs, tau))
    params = {"N": sep.N, "delta": str(delta), "ell0": ell0, "j0": j0, "R": R, "R0": R / 10, "k0": list(k0),
              "js": list(sep.js), "tau": tau, "P_delta_over_Q": ratio, "atoms": len(entries),
              "alpha1": str(alpha1), "alpha2": str(alpha2)}
    audits = {"Omega_in_Q": inclusion, "Lambda_disjoint": _transported_disjoint(A, B, sep, Q0)}
    fa = WitnessFamily("case2", seq, sA, pred_a, "lower bound (|P_delta|/|Q| sum |tau|^q1)^{1/q1}", params, audits)
    fb = WitnessFamily("case2", seq, sB, max(map(abs, tau)), "upper bound ||tau||_{l^inf}", params, audits)
    return WitnessPair(fa, fb, sep)


def _cube_inside(A: ExpansiveMatrix, j: int, k, j0: int, k0) -> bool:
    """A^j([0,1]^d + k) inside A^{j0}([0,1]^d + k0), tested on pulled-back vertices."""
    inv = A.power(-j0)
    Mj = A.power(j)
    for corner in np.ndindex(*(2,) * A.dim):
        v = Mj.apply(tuple(int(a) + int(b) for a, b in zip(k, corner)))
        y = inv.apply(v)
        if any(not (k0[i] <= y[i] <= k0[i] + 1) for i in range(A.dim)):
            if A.mode == RATIONAL:
                return False
            if any(y[i] < k0[i] - 1e-9 or y[i] > k0[i] + 1 + 1e-9 for i in range(A.dim)):
                return False
    return True


def _transported_disjoint(A, B, sep: SeparationData, Q0: DyadicCube) -> bool:
    """Interiors of D_t(Q_{j0,k0}) are pairwise disjoint (d = 2 SAT; enclosing balls otherwise)."""
    Qf = DyadicCube(A.to_float(), Q0.j, Q0.k)
    M = Qf.matrix.power(Q0.j).array
    corners = [np.array(c, dtype=float) for c in ((0, 0), (1, 0), (1, 1), (0, 1))] if A.dim == 2 else None
    shapes = []
    for t in range(sep.N):
        T = sep.transport(A, B, t)
        if A.dim == 2:
            shapes.append(polygons.ccw([tuple(T @ (M @ (np.array(Q0.k, dtype=float) + c))) for c in corners]))
        else:
            V = (np.array(list(np.ndindex(*(2,) * A.dim)), dtype=float) + np.array(Q0.k)) @ M.T @ T.T
            ctr = V.mean(axis=0)
            shapes.append((ctr, float(np.max(np.linalg.norm(V - ctr, axis=1)))))
    for s in range(sep.N):
        for t in range(s + 1, sep.N):
            if A.dim == 2:
                if polygons.convex_polygons_meet(shapes[s], shapes[t], closed=False):
                    return False
            elif np.linalg.norm(shapes[s][0] - shapes[t][0]) <= shapes[s][1] + shapes[t][1]:
                return False
    return True


def multiscale_coefficients(A: ExpansiveMatrix, L: int) -> tuple[dict, dict, bool]:
    """Per-scale index sets I_j (closed cubes meeting [0,1]^d), j = 0, -1, ..., -(L-1).

    Returns ``(boxes, sets, boxed)``: when every A^j is diagonal the sets are
    integer boxes and ``sets`` is empty; otherwise ``sets`` lists every I_j.
    """
    d = A.dim
    unit = Box((Fraction(0),) * d, (Fraction(1),) * d)
    boxes, sets = {}, {}
    boxed = True
    for t in range(L):
        j = -t
        Mj = A.power(j)
        rows = Mj.rows if Mj.mode == RATIONAL else Mj.array.tolist()
        diagonal = all(rows[r][c] == 0 for r in range(d) for c in range(d) if r != c)
        kmin, kmax, _ = _candidate_box(A, j, unit)
        if diagonal and Mj.mode == RATIONAL:
            boxes[j] = (tuple(kmin), tuple(kmax))
        else:
            boxed = False
            ks = cubes_meeting_region(A, j, unit, closed=True)
            sets[j] = set(ks)
            boxes[j] = (tuple(min(k[i] for k in ks) for i in range(d)),
                        tuple(max(k[i] for k in ks) for i in range(d)))
    if not boxed:
        for j, (lo, hi) in boxes.items():
            if j not in sets:
                sets[j] = set(itertools.product(*(range(a, b + 1) for a, b in zip(lo, hi))))
    return boxes, sets, boxed


def multiscale_witness(tau, s: SpaceParams) -> WitnessFamily:
    """c_{j,k} = |det A|^{j(alpha+1/2)} |tau_{-j}| for j in [-(L-1), 0] and k in I_j."""
    tau = [abs(float(v)) for v in tau]
    A = s.matrix
    d = s.dim
    L = len(tau)
    det = float(A.abs_det)
    a = float(s.alpha + Fraction(1, 2))
    vals = {-t: det ** (-t * a) * tau[t] for t in range(L) if tau[t] != 0}
    boxes, sets, boxed = multiscale_coefficients(A, L)
    boxes = {j: b for j, b in boxes.items() if j in vals}

    def coef(j, K):
        return np.full(len(K), vals.get(j, 0.0))

    if boxed:
        def layer_fn(M):
            return {j: [(index_box_region(M, j, boxes[j]), vals[j])] for j in boxes}

        seq = ImplicitSequence(d, sorted(vals), coef, boxes, layer_fn=layer_fn, max_moduli=vals,
                               description=f"multiscale L={L}")
    else:
        # the index sets were enumerated anyway, so keep them explicit
        seq = ExplicitSequence({(j, k): vals[j] for j in vals for k in sets[j]}, d)
    params = {"L": L, "tau": tau, "boxed": boxed, "index_boxes": {j: [list(b[0]), list(b[1])] for j, b in boxes.items()}}
    return WitnessFamily("multiscale", seq, s, _lq(tau, s.q), "||tau||_{l^q}", params)


# -- law fitting ------------------------------------------------------------------------------


@dataclass(frozen=True)
class MCConfig:
    samples: int = DEFAULT_SAMPLES
    seed: int = DEFAULT_SEED
    method: str = "auto"
    workers: int = 1


@dataclass
class LawReport:
    sizes: list
    axis: str
    measured: list
    errors: list
    predicted: list
    methods: list
    slope: float
    intercept: float
    residuals: list
    slope_vs_predicted: float | None
    ratio_min: float
    ratio_max: float
    inconclusive: bool
    rows: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return _plain({k: getattr(self, k) for k in (
            "sizes", "axis", "measured", "errors", "predicted", "methods", "slope", "intercept", "residuals",
            "slope_vs_predicted", "ratio_min", "ratio_max", "inconclusive", "rows")})


def _measure(fam, cfg: MCConfig):
    """Return (value, error, predicted, method, row) for a family or an A/B pair (ratio B/A)."""
    if isinstance(fam, WitnessPair):
        ra = fam.a.measure(cfg.method, cfg.samples, cfg.seed, cfg.workers)
        rb = fam.b.measure(cfg.method, cfg.samples, cfg.seed, cfg.workers)
        if fam.tag == "case2":
            num, den, pnum, pden = ra, rb, fam.a.predicted, fam.b.predicted
        else:
            num, den, pnum, pden = rb, ra, fam.b.predicted, fam.a.predicted
        value = num.value / den.value
        rel = math.hypot(num.error / num.value if num.value else 0.0, den.error / den.value if den.value else 0.0)
        row = {"norm_a": ra.value, "err_a": ra.error, "method_a": ra.method,
               "norm_b": rb.value, "err_b": rb.error, "method_b": rb.method}
        return value, value * rel, pnum / pden, f"{num.method}/{den.method}", row
    r = fam.measure(cfg.method, cfg.samples, cfg.seed, cfg.workers)
    return r.value, r.error, fam.predicted, r.method, {"norm": r.value, "err": r.error, "method": r.method}


def verify_norm_law(build: Callable, sizes, cfg: MCConfig = MCConfig(), axis: str = "log") -> LawReport:
    """Evaluate ``build(size)`` at each size and fit log(measured) against the size axis.

    ``axis="log"`` regresses on log(size) (N or L families), ``"linear"`` on
    the size itself (e.g. j0 for delta families). The fit is flagged
    inconclusive when the largest relative error exceeds half the fitted
    change of log(measured) over the size range.
    """
    sizes = list(sizes)
    if len(sizes) < 2:
        raise InvalidInput("need at least two sizes")
    measured, errors, predicted, methods, rows = [], [], [], [], []
    for n in sizes:
        v, e, pr, m, row = _measure(build(n), cfg)
        measured.append(v)
        errors.append(e)
        predicted.append(pr)
        methods.append(m)
        rows.append({"size": n, "measured": v, "error": e, "predicted": pr, **row})
    xs = np.log(np.array(sizes, dtype=float)) if axis == "log" else np.array(sizes, dtype=float)
    ys = np.log(np.array(measured))
    slope, intercept = np.polyfit(xs, ys, 1)
    residuals = (ys - (slope * xs + intercept)).tolist()
    lp = np.log(np.array(predicted))
    slope_pred = float(np.polyfit(lp, ys, 1)[0]) if np.ptp(lp) > 0 else None
    ratios = [m / p for m, p in zip(measured, predicted)]
    effect = abs(slope) * float(np.ptp(xs))
    rel = max(e / m if m else 0.0 for e, m in zip(errors, measured))
    return LawReport(sizes, axis, measured, errors, predicted, methods, float(slope), float(intercept),
                     residuals, slope_pred, min(ratios), max(ratios), bool(rel > 0.5 * effect), rows)


# -- manifests ------------------------------------------------------------------------------


def family_builder(kind: str, A: ExpansiveMatrix, B: ExpansiveMatrix | None = None, *, p="1", q="2", alpha="0",
                   q2=None, seed: int = 0, window: int = DEFAULT_WINDOW, delta=DEFAULT_DELTA) -> Callable:
    """size -> family for the named construction; everything is determined by the arguments."""
    if kind == "delta":
        s = SpaceParams(A, alpha, p, q)
        return lambda j0: delta_witness(int(j0), s)
    if kind == "single-scale":
        s = SpaceParams(A, alpha, p, q)
        return lambda L: single_scale_witness({(2 * i,) + (0,) * (A.dim - 1): 1 for i in range(int(L))}, s)
    if kind == "multiscale":
        s = SpaceParams(A, alpha, p, q)
        return lambda L: multiscale_witness([1] * int(L), s)
    if B is None:
        raise InvalidInput(f"family {kind!r} needs a matrix pair")
    if kind == "case1":
        def build1(N):
            sep = find_separating_points(A, B, int(N), window=window, seed=seed)
            return case1_witness(A, B, sep, [1.0] * int(N), p, alpha, q1=q, q2=q2)
        return build1
    if kind == "case2":
        def build2(N):
            sep = find_separating_points(A, B, int(N), window=window, seed=seed)
            return case2_witness(A, B, sep, [1.0] * int(N), alpha, q1=q, q2=q2, delta=delta)
        return build2
    raise InvalidInput(f"unknown family {kind!r}")


def family_axis(kind: str) -> str:
    return "linear" if kind == "delta" else "log"


def manifest(kind: str, A: ExpansiveMatrix, B: ExpansiveMatrix | None, sizes, cfg: MCConfig, **params) -> dict:
    """Everything needed to rebuild and re-measure a family bit-for-bit."""
    return _plain({
        "family": kind,
        "A": matrix_to_json(A),
        "B": matrix_to_json(B) if B is not None else None,
        "sizes": list(sizes),
        "samples": cfg.samples,
        "seed": cfg.seed,
        "method": cfg.method,
        "params": {k: (format_exponent(v) if v == INF else str(v)) for k, v in params.items()},
    })

