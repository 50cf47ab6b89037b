"""Finiteness of the orbit {B^j A^{-j} : j in Z} and classification of equal spaces.

A repeat B^j A^{-j} = B^{j'} A^{-j'} with j < j' gives B^{j'-j} = A^{j'-j};
conversely A^m = B^m makes j -> B^j A^{-j} periodic with period m. So the
orbit is finite iff A^m = B^m for some m >= 1, and the least such m is the
exact period of the sequence D_j = B^j A^{-j}.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from anisotl.errors import InvalidInput, InvalidState
from anisotl.matrices import DEFAULT_TOL, FLOAT, RATIONAL, ExpansiveMatrix, Matrix
from anisotl.spaces import SpaceParams, format_exponent

DEFAULT_MMAX = 64
DET_LOG_TOL = 1e-9
EXACT_EXPONENT_LIMIT = 4096


@dataclass(frozen=True)
class OrbitVerdict:
    """``Finite(period)`` or ``InfiniteUpTo(m_max, witness_count)``."""

    finite: bool
    period: int | None = None
    m_max: int | None = None
    witness_count: int | None = None
    mode: str = RATIONAL
    tol: float | None = None

    @classmethod
    def Finite(cls, m: int, mode: str = RATIONAL, tol: float | None = None) -> "OrbitVerdict":
        return cls(True, period=m, mode=mode, tol=tol)

    @classmethod
    def InfiniteUpTo(cls, m_max: int, witness_count: int, mode: str = RATIONAL,
                     tol: float | None = None) -> "OrbitVerdict":
        return cls(False, m_max=m_max, witness_count=witness_count, mode=mode, tol=tol)

    @property
    def numerical(self) -> bool:
        return self.mode == FLOAT

    def describe(self) -> str:
        if self.finite:
            return f"Finite({self.period})"
        return f"InfiniteUpTo({self.m_max}, {self.witness_count})"

    def to_dict(self) -> dict:
        out = {"verdict": "Finite" if self.finite else "InfiniteUpTo", "mode": self.mode}
        if self.finite:
            out["period"] = self.period
        else:
            out["m_max"] = self.m_max
            out["witness_count"] = self.witness_count
        if self.tol is not None:
            out["tol"] = self.tol
            out["numerical"] = True
        return out


def _common_mode(A: ExpansiveMatrix, B: ExpansiveMatrix):
    if A.dim != B.dim:
        raise InvalidInput(f"dimension mismatch: {A.dim} vs {B.dim}")
    for M in (A, B):
        if not isinstance(M, ExpansiveMatrix):
            raise InvalidInput("orbit computations need expansive matrices")
    if A.mode == B.mode:
        return A, B, A.mode
    return A.to_float(), B.to_float(), FLOAT


def _close(M1: Matrix, M2: Matrix, tol: float) -> bool:
    """Exact equality (rational) or max deviation <= tol relative to the entry scale."""
    if M1.mode == RATIONAL:
        return M1 == M2
    scale = max(1.0, float(np.max(np.abs(M1.array))), float(np.max(np.abs(M2.array))))
    return float(np.max(np.abs(M1.array - M2.array))) <= tol * scale


def orbit_element(A: ExpansiveMatrix, B: ExpansiveMatrix, j: int) -> Matrix:
    """D_j = B^j A^{-j}."""
    return B.power(j) @ A.power(-j)


def _distinct(mats: list, tol: float) -> list:
    """Indices of the first representative of each equality class, in order."""
    if mats and mats[0].mode == RATIONAL:
        seen: dict = {}
        for i, M in enumerate(mats):
            seen.setdefault(M.key(), i)
        return sorted(seen.values())
    reps: list = []
    for i, M in enumerate(mats):
        if not any(_close(mats[r], M, tol) for r in reps):
            reps.append(i)
    return reps


def orbit_is_finite(A: ExpansiveMatrix, B: ExpansiveMatrix, m_max: int = DEFAULT_MMAX,
                    tol: float = DEFAULT_TOL) -> OrbitVerdict:
    """Least m in [1, m_max] with A^m = B^m, else InfiniteUpTo.

    Mixed rational/float pairs are compared in float mode; float verdicts
    carry the tolerance and count as numerical evidence only.
    """
    if m_max < 1:
        raise InvalidInput("m_max must be positive")
    A, B, mode = _common_mode(A, B)
    ftol = tol if mode == FLOAT else None
    for m in range(1, m_max + 1):
        if _close(A.power(m), B.power(m), tol):
            return OrbitVerdict.Finite(m, mode, ftol)
    seen = _distinct([orbit_element(A, B, j) for j in range(m_max + 1)], tol)
    return OrbitVerdict.InfiniteUpTo(m_max, len(seen), mode, ftol)


def brute_force_orbit_count(A: ExpansiveMatrix, B: ExpansiveMatrix, j_range: int,
                            tol: float = DEFAULT_TOL) -> int:
    """Number of distinct D_j = B^j A^{-j} over |j| <= j_range."""
    if j_range < 0:
        raise InvalidInput("j_range must be nonnegative")
    A, B, _ = _common_mode(A, B)
    mats = [orbit_element(A, B, j) for j in range(-j_range, j_range + 1)]
    return len(_distinct(mats, tol))


@dataclass(frozen=True)
class OrbitDecomposition:
    period: int
    representatives: tuple
    residues: tuple  # residues[t] = sorted residues r (mod period) with D_r = M_t
    mode: str = RATIONAL
    tol: float | None = None

    @property
    def count(self) -> int:
        return len(self.representatives)

    def class_of(self, j: int) -> int:
        r = j % self.period
        for t, res in enumerate(self.residues):
            if r in res:
                return t
        raise InvalidState("residue classes do not cover Z")  # unreachable for a valid decomposition

    def matrix_for(self, j: int) -> Matrix:
        return self.representatives[self.class_of(j)]

    def to_dict(self) -> dict:
        return {
            "period": self.period,
            "count": self.count,
            "classes": [
                {"residues_mod_period": list(res), "matrix": M.entries_as_strings()}
                for M, res in zip(self.representatives, self.residues)
            ],
            "mode": self.mode,
        }


def orbit_decomposition(A: ExpansiveMatrix, B: ExpansiveMatrix, m_max: int = DEFAULT_MMAX,
                        tol: float = DEFAULT_TOL) -> OrbitDecomposition:
    verdict = orbit_is_finite(A, B, m_max, tol)
    if not verdict.finite:
        raise InvalidState(f"orbit is not finite up to m_max={m_max}; no decomposition")
    A, B, mode = _common_mode(A, B)
    m = verdict.period
    mats = [orbit_element(A, B, j) for j in range(m)]
    reps = _distinct(mats, tol)
    residues = tuple(tuple(r for r in range(m) if _close(mats[i], mats[r], tol)) for i in reps)
    return OrbitDecomposition(m, tuple(mats[i] for i in reps), residues, mode, verdict.tol)


# -- classification -------------------------------------------------------------


@dataclass(frozen=True)
class Classification:
    verdict: str  # Equal | NotEqual | Unknown
    reason: str
    numerical: bool = False
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"verdict": self.verdict, "reason": self.reason, "numerical": self.numerical, **self.details}


def determinant_identity(sA: SpaceParams, sB: SpaceParams) -> tuple[bool, bool]:
    """Whether |det A|^{x_A} = |det B|^{x_B} with x = alpha + 1/2 - 1/p.

    Returns ``(holds, exact)``. Rational determinants are compared exactly
    after clearing the exponent denominators; otherwise the identity is
    checked in log form with tolerance 1e-9.
    """
    xa, xb = sA.det_exponent(), sB.det_exponent()
    da, db = sA.matrix.abs_det, sB.matrix.abs_det
    if isinstance(da, Fraction) and isinstance(db, Fraction):
        L = math.lcm(xa.denominator, xb.denominator)
        ea, eb = int(xa * L), int(xb * L)
        if max(abs(ea), abs(eb)) <= EXACT_EXPONENT_LIMIT:
            return da ** ea == db ** eb, True
    lhs = float(xa) * math.log(float(da))
    rhs = float(xb) * math.log(float(db))
    return abs(lhs - rhs) <= DET_LOG_TOL, False


def classify_spaces(sA: SpaceParams, sB: SpaceParams, m_max: int = DEFAULT_MMAX,
                    m_max_insufficient: bool = False, tol: float = DEFAULT_TOL) -> Classification:
    """Decide whether f^{alpha1}_{p1,q1}(A) and f^{alpha2}_{p2,q2}(B) coincide.

    Equal iff p1 = p2 and either (orbit finite, alpha1 = alpha2, q1 = q2) or
    (p1 = q1 = p2 = q2 and the determinant identity holds). With
    ``m_max_insufficient`` an undecided orbit yields Unknown instead of
    NotEqual when it is the deciding clause.
    """
    if sA.dim != sB.dim:
        raise InvalidInput(f"dimension mismatch: {sA.dim} vs {sB.dim}")
    numerical = FLOAT in (sA.matrix.mode, sB.matrix.mode)
    if sA.p != sB.p:
        return Classification("NotEqual", f"p differs ({format_exponent(sA.p)} vs {format_exponent(sB.p)})", numerical)
    same_aq = sA.alpha == sB.alpha and sA.q == sB.q
    all_equal = sA.p == sA.q == sB.q
    verdict = None
    if same_aq:
        verdict = orbit_is_finite(sA.matrix, sB.matrix, m_max, tol)
        if verdict.finite:
            return Classification("Equal", f"orbit finite, period {verdict.period}",
                                  verdict.numerical, {"orbit": verdict.to_dict()})
    if all_equal:
        holds, exact = determinant_identity(sA, sB)
        details = {"determinant_identity": "exact" if exact else "log-tolerance"}
        if verdict is not None:
            details["orbit"] = verdict.to_dict()
        if holds:
            return Classification("Equal", "p = q and determinant identity holds", numerical or not exact, details)
        if verdict is None:
            return Classification("NotEqual", "p = q but determinant identity fails and (alpha, q) differ",
                                  numerical or not exact, details)
    if verdict is None:
        reason = "alpha differs" if sA.alpha != sB.alpha else "q differs"
        if not all_equal:
            reason += " and p = q fails"
        return Classification("NotEqual", reason, numerical)
    details = {"orbit": verdict.to_dict()}
    reason = f"orbit not finite up to m_max={m_max}"
    if all_equal:
        reason += "; determinant identity fails"
    else:
        reason += "; p = q fails"
    if m_max_insufficient:
        return Classification("Unknown", reason + " (m_max flagged insufficient)", True, details)
    return Classification("NotEqual", reason, numerical or verdict.numerical, details)
