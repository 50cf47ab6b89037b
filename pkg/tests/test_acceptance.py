"""Acceptance criteria, one check per criterion, each with its stated tolerance.

Run with pytest (a summary line per criterion is printed at the end) or
directly as ``python tests/test_acceptance.py``.
"""
import itertools
import math
import sys
import time
from fractions import Fraction as F
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from anisotl.geometry import cube_indices
from anisotl.geometry.cubes import DyadicCube
from anisotl.matrices import ExpansiveMatrix, Matrix
from anisotl.norms import (
    SubBoxFamily, norm, norm_closed_form_pq, norm_infty_q, norm_lp, r_triangle_defect, stacked_sup_norm,
)
from anisotl.orbit import brute_force_orbit_count, orbit_decomposition, orbit_is_finite
from anisotl.sequences import ExplicitSequence
from anisotl.spaces import SpaceParams
from anisotl.witnesses import (
    MCConfig, case2_witness, delta_witness, family_builder, find_separating_points, multiscale_witness,
    verify_norm_law,
)
from corpus import MATRICES_2D, corpus, sequence

RESULTS: dict = {}


def diag(*v):
    return ExpansiveMatrix.diag(*v)


def rot1():
    return ExpansiveMatrix.rotation(1.0, 2.0)


# -- 1 ------------------------------------------------------------------------------------------


def criterion_1():
    mats = [diag(2, 2), diag(2, -2), ExpansiveMatrix([[0, 2], [2, 0]])]
    t = time.perf_counter()
    worst, misses, n = 0.0, 0, 0
    for j0, A, a, p in itertools.product(range(-2, 3), mats, ["0", "1/2"], ["1/2", "1", "2"]):
        s = SpaceParams(A, a, p, 2)
        fam = delta_witness(j0, s)
        want = float(A.abs_det) ** (-j0 * float(F(a) + F(1, 2) - 1 / F(p)))
        exact = norm_lp(fam.sequence, s, "exact").value
        mc = norm_lp(fam.sequence, s, "mc", 10**6, 0)
        worst = max(worst, abs(exact - want) / max(1.0, want))
        misses += abs(mc.value - want) > 3 * mc.error + 1e-12 * want
        n += 1
    dt = time.perf_counter() - t
    ok = worst <= 1e-9 and misses == 0 and dt < 10
    return ok, f"{n} cases, worst rel err {worst:.1e}, MC misses {misses}, {dt:.1f}s (< 10s)"


# -- 2 ------------------------------------------------------------------------------------------


def criterion_2():
    rng = np.random.default_rng(11)
    worst = 0.0
    for i in range(50):
        d = 1 + i % 2
        A = ExpansiveMatrix([[int(rng.choice([2, -2, 3]))]]) if d == 1 else MATRICES_2D[sorted(MATRICES_2D)[i % 5]]()
        keys = {tuple(int(v) for v in rng.integers(-4, 5, d)) for _ in range(int(rng.integers(1, 9)))}
        a = {k: float(rng.uniform(-2, 2)) for k in keys}
        seq = ExplicitSequence({(0, k): v for k, v in a.items()}, d)
        vals = np.abs(list(a.values()))
        for p in ("1/2", "1", "2"):
            s = SpaceParams(A, "1/2", p, 2)
            want = float(np.sum(vals ** float(F(p))) ** (1 / float(F(p))))
            worst = max(worst, abs(norm_lp(seq, s, "exact").value - want) / max(1.0, want))
        s = SpaceParams(A, "1/2", "inf", 2)
        worst = max(worst, abs(norm_infty_q(seq, s).value - vals.max()) / max(1.0, vals.max()))
    return worst <= 1e-9, f"50 sequences x 4 exponents, worst rel err {worst:.1e}"


# -- 3 ------------------------------------------------------------------------------------------


def criterion_3():
    rng = np.random.default_rng(12)
    names = sorted(MATRICES_2D)
    worst = 0.0
    for i in range(50):
        if i % 5 == 4:
            A, c = ExpansiveMatrix([[int(rng.choice([2, -2, 3]))]]), sequence(rng, 1)
        else:
            A, c = MATRICES_2D[names[i % 5]](), sequence(rng, 2)
        for p in ("1/2", "1", "2"):
            s = SpaceParams(A, ("0", "1/2", "1")[i % 3], p, p)
            cf, ex = norm_closed_form_pq(c, s).value, norm_lp(c, s, "exact").value
            worst = max(worst, abs(cf - ex) / max(1.0, ex))
    return worst <= 1e-9, f"50 sequences x 3 exponents, worst rel diff {worst:.1e}"


# -- 4 ------------------------------------------------------------------------------------------

CONJUGATORS = [[[1, 0], [0, 1]], [[1, 1], [0, 1]], [[2, 1], [1, 1]], [[1, 0], [3, 1]], [[1, 2], [-1, 1]]]
FINITE_SEEDS = [  # (D, S) with S commuting with D and S^m = I
    ([[2, 0], [0, 3]], [[-1, 0], [0, 1]]),
    ([[2, 0], [0, 2]], [[0, -1], [1, 0]]),
    ([[2, 0], [0, 2]], [[0, 1], [1, 0]]),
    ([[3, 0], [0, 3]], [[0, -1], [1, -1]]),
    ([[2, 0], [0, 2]], [[1, -1], [1, 0]]),
    ([[3, 0], [0, 2]], [[-1, 0], [0, -1]]),
    ([[2, 0], [0, 2]], [[1, 0], [0, 1]]),
    ([[2, 0], [0, 5]], [[1, 0], [0, -1]]),
    ([[3, 0], [0, 3]], [[0, 1], [-1, 0]]),
    ([[2, 0], [0, 2]], [[-1, 1], [-1, 0]]),
]


def finite_pairs():
    out = []
    for i, (D, S) in enumerate(FINITE_SEEDS):
        P = Matrix([[F(v) for v in r] for r in CONJUGATORS[i % len(CONJUGATORS)]])
        Pi = P.inverse()
        D, S = Matrix([[F(v) for v in r] for r in D]), Matrix([[F(v) for v in r] for r in S])
        out.append((ExpansiveMatrix((P @ D @ Pi).rows), ExpansiveMatrix((P @ D @ S @ Pi).rows)))
    return out


def generic_pairs(n=10, seed=4):
    rng = np.random.default_rng(seed)
    out = []

    def draw():
        while True:
            rows = [[F(int(rng.integers(-4, 5)), int(rng.integers(1, 3))) for _ in range(2)] for _ in range(2)]
            try:
                return ExpansiveMatrix(rows)
            except Exception:
                continue

    while len(out) < n:
        out.append((draw(), draw()))
    return out


def criterion_4():
    t = time.perf_counter()
    bad = []
    rows = []
    for label, (A, B) in [("finite", p) for p in finite_pairs()] + [("generic", p) for p in generic_pairs()]:
        v = orbit_is_finite(A, B, m_max=64)
        count = brute_force_orbit_count(A, B, 256)
        if v.finite:
            ok = count == orbit_decomposition(A, B).count <= v.period
        else:
            ok = count == 2 * 256 + 1
        ok = ok and (label == "generic" or v.finite)
        rows.append(f"{label}:{v.describe()}/{count}")
        if not ok:
            bad.append(rows[-1])
    dt = time.perf_counter() - t
    finite = sum(r.startswith("finite") for r in rows)
    return not bad and dt < 30, f"{len(rows)} pairs ({finite} constructed finite), mismatches {bad or 0}, {dt:.1f}s (< 30s)"


# -- 5 ------------------------------------------------------------------------------------------


def criterion_5():
    A, B = diag(2, 2), diag(2, -2)
    rng = np.random.default_rng(5)
    seqs = [sequence(rng, 2, scales=tuple(range(-3, 4)), atoms=(1, 40), spread=4) for _ in range(100)]
    parts, ok = [], True
    for p, q in (("1", "2"), ("2", "1"), ("1/2", "inf")):
        sA, sB = SpaceParams(A, 0, p, q), SpaceParams(B, 0, p, q)
        r = np.array([norm(c, sB).value / norm(c, sA).value for c in seqs])
        spread = r.max() / r.min()
        ok &= r.max() <= 8 and 1 / r.min() <= 8
        parts.append(f"({p},{q}) ratio in [{r.min():.3f},{r.max():.3f}] max/min {spread:.3f}")
    sA, sB = SpaceParams(diag(2, 2), 1, 2, 2), SpaceParams(diag(4, 4), "1/2", 2, 2)
    dev = max(abs(norm_closed_form_pq(c, sB).value / norm_closed_form_pq(c, sA).value - 1) for c in seqs)
    ok &= dev <= 1e-9
    parts.append(f"det-matched pair |ratio - 1| <= {dev:.1e}")
    return bool(ok), "; ".join(parts)


# -- 6 ------------------------------------------------------------------------------------------


def criterion_6():
    t = time.perf_counter()
    law = verify_norm_law(family_builder("case1", diag(2, 2), rot1(), p="1", q="2", alpha="0"),
                          [2, 3, 4, 5], MCConfig(10**6, 0, "mc"))
    dt = time.perf_counter() - t
    ok = 0.35 <= law.slope <= 0.65 and dt < 300
    ratios = ", ".join(f"{v:.3f}" for v in law.measured)
    return ok, f"ratios B/A {ratios}; slope {law.slope:.3f} in [0.35, 0.65]; {dt:.0f}s (< 300s)"


# -- 7 ------------------------------------------------------------------------------------------


def criterion_7():
    A, B = diag(2, 2), rot1()
    tau = [1.0, 1.0, 1.0]
    pair = case2_witness(A, B, find_separating_points(A, B, 3), tau, 0, q1=1)
    ra = norm_infty_q(pair.a.sequence, pair.a.space)
    rb = norm_infty_q(pair.b.sequence, pair.b.space)
    lower = pair.a.params["P_delta_over_Q"] * sum(tau) * (1 - 1e-6)
    ok = ra.value >= lower and rb.value <= max(tau) + 1e-9 and ra.exact and rb.exact
    return ok, (f"A-norm {ra.value:.6f} >= {lower:.6f} ({ra.method}); B-norm {rb.value:.12f} <= 1 + 1e-9 "
                f"({rb.method}); gap l1/linf = {sum(tau) / max(tau):g}")


# -- 8 ------------------------------------------------------------------------------------------

SUBCASES_8 = {"8a": ("1", "1"), "8b": ("1", "2"), "8c": ("inf", "1"), "8d": ("inf", "2")}


def criterion_8(sub):
    p, q = SUBCASES_8[sub]
    s = SpaceParams(diag(2, 2), 0, p, q)
    Ls = [2, 4, 8, 16]
    vals = [multiscale_witness([1.0] * L, s).measure().value for L in Ls]
    slope = float(np.polyfit(np.log2(Ls), np.log2(vals), 1)[0])
    target = 1 / float(F(q))
    ok = abs(slope - target) <= 0.1
    shown = ", ".join(f"{v:.3f}" for v in vals)
    return ok, f"p={p} q={q}: norms {shown}; slope {slope:.3f}, target {target:.3f} +- 0.1"


# -- 9 ------------------------------------------------------------------------------------------

REGIMES = [("1/2", "1/2"), ("1", "2"), ("2", "1"), ("1/2", "inf"), ("inf", "1"), ("inf", "2"), ("inf", "inf"),
           ("2", "2")]


def criterion_9():
    rng = np.random.default_rng(9)
    names = sorted(MATRICES_2D)
    fails = {}

    def note(key, good):
        fails[key] = fails.get(key, 0) + (not good)

    for i in range(40):
        s = SpaceParams(MATRICES_2D[names[i % 5]](), 0, *REGIMES[i % len(REGIMES)])
        c, lam = sequence(rng, 2, atoms=(1, 4)), float(rng.uniform(-3, 3))
        note("homogeneity", math.isclose(norm(c.scaled(lam), s).value, abs(lam) * norm(c, s).value,
                                         rel_tol=1e-9, abs_tol=1e-12))
        keep = {k: v * float(rng.uniform(0, 1)) for k, v in c.values.items() if rng.random() < 0.6}
        note("solidity", norm(ExplicitSequence(keep, 2), s).value <= norm(c, s).value + 1e-12)
    worst = -math.inf
    for i in range(200):
        s = SpaceParams(MATRICES_2D[names[i % 5]](), ("0", "1/2")[i % 2], *REGIMES[i % len(REGIMES)])
        dfx = r_triangle_defect(sequence(rng, 2, atoms=(1, 4)), sequence(rng, 2, atoms=(1, 4)), s)
        worst = max(worst, dfx)
        note("r-triangle", dfx <= 1e-9)
    zmax = 0.0
    for i in range(25):
        p, q = (("1/2", "1"), ("1", "2"), ("2", "1"), ("1", "inf"), ("2", "2"))[i % 5]
        s = SpaceParams(MATRICES_2D[names[i % 5]](), "1/2", p, q)
        c = sequence(rng, 2, atoms=(1, 5))
        ex, mc = norm_lp(c, s, "exact").value, norm_lp(c, s, "mc", 200_000, i)
        z = abs(ex - mc.value) / mc.error if mc.error else (0.0 if abs(ex - mc.value) <= 1e-12 else math.inf)
        zmax = max(zmax, z)
        note("overlay-vs-mc", z <= 4)
    for dg in ((2, 2), (2, -2), (3, 2)):
        A = diag(*dg)
        for j in range(-3, 4):
            X = rng.uniform(-20, 20, (500, 2))
            Y = X @ A.power(-j).array.T - cube_indices(A, j, X)
            note("partition", bool(np.all((Y >= 0) & (Y < 1))))
    for A in [diag(2, 2), diag(2, -2), ExpansiveMatrix([[0, 2], [2, 0]]), rot1(), ExpansiveMatrix([[1, 1], [-1, 1]])]:
        for j in range(-4, 5):
            vol = float(DyadicCube(A, j, (1, -2)).volume())
            note("volume-law", math.isclose(vol, float(A.abs_det) ** j, rel_tol=1e-9))
    bad = {k: v for k, v in fails.items() if v}
    return not bad, f"failures {bad or 0}; max r-defect {worst:.1e}; max overlay/MC z {zmax:.2f} (<= 4)"


# -- 10 -----------------------------------------------------------------------------------------


def criterion_10():
    violations, bounds, lo_ratio = 0, 0, math.inf
    n = 0
    for _, M, c in corpus(30):
        for q in ("1", "2"):
            s = SpaceParams(M, 0, "inf", q)
            lo, hi = norm_infty_q(c, s).value, stacked_sup_norm(c, s)
            shrunk = stacked_sup_norm(c, s, SubBoxFamily(0.6))
            violations += lo > hi * (1 + 1e-12)
            bounds += not (lo / 10 <= shrunk <= hi * (1 + 1e-12))
            if lo:
                lo_ratio = min(lo_ratio, shrunk / lo)
            n += 1
    ok = violations == 0 and bounds == 0
    return ok, (f"{n} corpus checks, dominance violations {violations}, shrunk-bound violations {bounds}, "
                f"min shrunk/norm {lo_ratio:.3f} (>= 0.1)")


# -- pytest wiring --------------------------------------------------------------------------------

CRITERIA = {"1": criterion_1, "2": criterion_2, "3": criterion_3, "4": criterion_4, "5": criterion_5,
            "6": criterion_6, "7": criterion_7, **{k: (lambda k=k: criterion_8(k)) for k in SUBCASES_8},
            "9": criterion_9, "10": criterion_10}


def run(name):
    ok, detail = CRITERIA[name]()
    RESULTS[name] = (bool(ok), detail)
    line = f"criterion {name}: {'PASS' if ok else 'FAIL'} - {detail}"
    print(line)
    return bool(ok), line


@pytest.mark.acceptance
@pytest.mark.parametrize("name", list(CRITERIA))
def test_criterion(name):
    ok, line = run(name)
    assert ok, line


if __name__ == "__main__":
    results = [run(n) for n in CRITERIA]
    sys.exit(0 if all(ok for ok, _ in results) else 1)
