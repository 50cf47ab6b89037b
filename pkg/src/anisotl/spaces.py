"""Parameters (A, alpha, p, q) of one discrete Triebel-Lizorkin space."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction

from anisotl.errors import InvalidInput
from anisotl.matrices import ExpansiveMatrix

INF = math.inf


def parse_exponent(value) -> Fraction | float:
    """Parse an integrability exponent: a positive rational or ``inf``."""
    if isinstance(value, str):
        text = value.strip().lower()
        if text in ("inf", "infinity", "+inf", "∞"):
            return INF
        try:
            value = Fraction(text)
        except (ValueError, ZeroDivisionError) as exc:
            raise InvalidInput(f"bad exponent {value!r}") from exc
    elif isinstance(value, float):
        if math.isinf(value) and value > 0:
            return INF
        if not math.isfinite(value):
            raise InvalidInput(f"bad exponent {value!r}")
        value = Fraction(repr(value))
    elif isinstance(value, (int, Fraction)) and not isinstance(value, bool):
        value = Fraction(value)
    else:
        raise InvalidInput(f"bad exponent {value!r}")
    if value <= 0:
        raise InvalidInput(f"exponent must be positive, got {value}")
    return value


def parse_alpha(value) -> Fraction:
    if isinstance(value, bool):
        raise InvalidInput("alpha must be a number")
    if isinstance(value, float):
        if not math.isfinite(value):
            raise InvalidInput("alpha must be finite")
        return Fraction(repr(value))
    try:
        return Fraction(value)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise InvalidInput(f"bad alpha {value!r}") from exc


def format_exponent(v) -> str:
    return "inf" if v == INF else str(v)


@dataclass(frozen=True)
class SpaceParams:
    """One space f^alpha_{p,q}(A). ``p``/``q`` are Fractions or ``math.inf``."""

    matrix: ExpansiveMatrix
    alpha: Fraction
    p: Fraction | float
    q: Fraction | float

    def __post_init__(self):
        if not isinstance(self.matrix, ExpansiveMatrix):
            raise InvalidInput("SpaceParams needs an ExpansiveMatrix")
        object.__setattr__(self, "alpha", parse_alpha(self.alpha))
        object.__setattr__(self, "p", parse_exponent(self.p))
        object.__setattr__(self, "q", parse_exponent(self.q))

    @property
    def dim(self) -> int:
        return self.matrix.dim

    @property
    def r(self) -> float:
        """Exponent of the r-triangle inequality, min(1, p, q)."""
        return float(min(Fraction(1), self.p, self.q))

    def with_q(self, q) -> "SpaceParams":
        return replace(self, q=q)

    def with_exponents(self, p=None, q=None) -> "SpaceParams":
        return replace(self, p=self.p if p is None else p, q=self.q if q is None else q)

    def det_exponent(self) -> Fraction:
        """alpha + 1/2 - 1/p (with 1/inf = 0)."""
        inv_p = Fraction(0) if self.p == INF else 1 / self.p
        return self.alpha + Fraction(1, 2) - inv_p

    def weight(self, j: int) -> float:
        """|det A|^{-j(alpha + 1/2)}."""
        return float(self.matrix.abs_det) ** (-float(j) * float(self.alpha + Fraction(1, 2)))

    def describe(self) -> dict:
        return {
            "alpha": str(self.alpha),
            "p": format_exponent(self.p),
            "q": format_exponent(self.q),
            "dim": self.dim,
            "mode": self.matrix.mode,
        }
