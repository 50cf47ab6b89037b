"""Square matrices over exact rationals or doubles, expansiveness checks, cached powers.

Two scalar modes are supported and never mixed implicitly:

* ``"rational"`` -- entries are :class:`fractions.Fraction` (always in lowest
  terms); products, inverses and powers are exact.
* ``"float"`` -- entries are IEEE doubles held in a read-only numpy array.

Converting between modes is explicit (:meth:`Matrix.to_float`).
"""
from __future__ import annotations

import math
import numbers
import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from anisotl.errors import IndeterminateError, InvalidInput

RATIONAL = "rational"
FLOAT = "float"
MODES = (RATIONAL, FLOAT)

DEFAULT_THETA = 1e-6
DEFAULT_NMAX = 64
DEFAULT_TOL = 1e-9


def to_rational(value) -> Fraction:
    """Parse an exact rational from an int, Fraction or ``"n"``/``"n/d"``/decimal string."""
    if isinstance(value, bool):
        raise InvalidInput("booleans are not scalars")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise InvalidInput(f"not a rational literal: {value!r}") from exc
    raise InvalidInput(f"refusing to coerce {type(value).__name__} {value!r} to an exact rational")


def to_float(value) -> float:
    if isinstance(value, bool):
        raise InvalidInput("booleans are not scalars")
    if isinstance(value, Fraction):
        raise InvalidInput("refusing to mix an exact rational into a float matrix; convert explicitly")
    if isinstance(value, (numbers.Real, np.floating, np.integer)):
        return float(value)
    if isinstance(value, str):
        try:
            return float(value)
        except ValueError as exc:
            raise InvalidInput(f"not a float literal: {value!r}") from exc
    raise InvalidInput(f"not a real scalar: {value!r}")


def _infer_mode(rows: Sequence[Sequence]) -> str:
    kinds = set()
    for row in rows:
        for v in row:
            if isinstance(v, (float, np.floating)):
                kinds.add(FLOAT)
            elif isinstance(v, (int, Fraction, np.integer, str)) and not isinstance(v, bool):
                kinds.add(RATIONAL)
            else:
                raise InvalidInput(f"unsupported matrix entry {v!r}")
    if kinds == {FLOAT, RATIONAL}:
        # ints alongside floats are unambiguous; Fractions alongside floats are not
        if any(isinstance(v, (Fraction, str)) for row in rows for v in row):
            raise InvalidInput("matrix mixes exact rationals and floats; pass mode explicitly")
        return FLOAT
    return kinds.pop() if kinds else RATIONAL


class Matrix:
    """Immutable square matrix in one scalar mode."""

    __slots__ = ("dim", "mode", "_rows", "_array", "_det", "__weakref__")

    def __init__(self, rows: Iterable[Iterable], mode: str | None = None):
        rows = [list(r) for r in rows]
        if not rows or any(len(r) != len(rows) for r in rows):
            raise InvalidInput("matrix must be square and non-empty")
        if mode is None:
            mode = _infer_mode(rows)
        if mode not in MODES:
            raise InvalidInput(f"unknown scalar mode {mode!r}")
        self.dim = len(rows)
        self.mode = mode
        self._det = None
        if mode == RATIONAL:
            self._rows = tuple(tuple(to_rational(v) for v in r) for r in rows)
            self._array = None
        else:
            arr = np.array([[to_float(v) for v in r] for r in rows], dtype=float)
            if not np.all(np.isfinite(arr)):
                raise InvalidInput("matrix entries must be finite")
            arr.flags.writeable = False
            self._array = arr
            self._rows = None

    @classmethod
    def _from_array(cls, arr: np.ndarray) -> "Matrix":
        m = cls.__new__(cls)
        m.dim = arr.shape[0]
        m.mode = FLOAT
        m._det = None
        m._rows = None
        arr = np.array(arr, dtype=float)
        arr.flags.writeable = False
        m._array = arr
        return m

    @classmethod
    def _from_rows(cls, rows) -> "Matrix":
        m = cls.__new__(cls)
        m.dim = len(rows)
        m.mode = RATIONAL
        m._det = None
        m._array = None
        m._rows = tuple(tuple(r) for r in rows)
        return m

    @classmethod
    def identity(cls, d: int, mode: str = RATIONAL) -> "Matrix":
        if mode == RATIONAL:
            return cls._from_rows([[Fraction(int(i == j)) for j in range(d)] for i in range(d)])
        return cls._from_array(np.eye(d))

    @classmethod
    def diag(cls, *values, mode: str | None = None) -> "Matrix":
        d = len(values)
        zero = 0.0 if mode == FLOAT or (mode is None and any(isinstance(v, float) for v in values)) else 0
        return cls([[values[i] if i == j else zero for j in range(d)] for i in range(d)], mode)

    @classmethod
    def rotation(cls, phi: float, scale: float = 1.0) -> "Matrix":
        """``scale * R_phi`` in float mode."""
        c, s = math.cos(phi), math.sin(phi)
        return cls._from_array(scale * np.array([[c, -s], [s, c]]))

    # -- views -------------------------------------------------------------

    @property
    def rows(self) -> tuple:
        if self._rows is not None:
            return self._rows
        return tuple(tuple(float(v) for v in r) for r in self._array)

    @property
    def array(self) -> np.ndarray:
        """Float view (a fresh conversion in rational mode)."""
        if self._array is not None:
            return self._array
        return np.array([[float(v) for v in r] for r in self._rows], dtype=float)

    def key(self) -> tuple:
        return self.rows

    def to_float(self) -> "Matrix":
        if self.mode == FLOAT:
            return self
        return Matrix._from_array(self.array)

    def entries_as_strings(self) -> list[list]:
        if self.mode == RATIONAL:
            return [[str(v) for v in r] for r in self._rows]
        return [[float(v) for v in r] for r in self._array]

    def __repr__(self) -> str:
        return f"Matrix({self.entries_as_strings()!r}, mode={self.mode!r})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, Matrix):
            return NotImplemented
        if self.mode != other.mode or self.dim != other.dim:
            return False
        if self.mode == RATIONAL:
            return self._rows == other._rows
        return bool(np.array_equal(self._array, other._array))

    def __hash__(self) -> int:
        return hash((self.mode, self.key()))

    # -- arithmetic ---------------------------------------------------------

    def _check_compatible(self, other: "Matrix") -> None:
        if self.dim != other.dim:
            raise InvalidInput(f"dimension mismatch: {self.dim} vs {other.dim}")
        if self.mode != other.mode:
            raise InvalidInput(f"scalar mode mismatch: {self.mode} vs {other.mode}")

    def __matmul__(self, other):
        if isinstance(other, Matrix):
            self._check_compatible(other)
            if self.mode == FLOAT:
                return Matrix._from_array(self._array @ other._array)
            a, b = self._rows, other._rows
            d = self.dim
            cols = list(zip(*b))
            return Matrix._from_rows(
                [[sum((a[i][t] * cols[j][t] for t in range(d)), Fraction(0)) for j in range(d)] for i in range(d)]
            )
        return self.apply(other)

    def apply(self, x):
        """Matrix-vector product. Exact if both are rational, float otherwise."""
        if self.mode == RATIONAL and all(isinstance(v, (int, Fraction)) for v in x):
            return tuple(sum((r[t] * x[t] for t in range(self.dim)), Fraction(0)) for r in self._rows)
        return self.array @ np.asarray(x, dtype=float)

    def scaled(self, c) -> "Matrix":
        if self.mode == RATIONAL:
            c = to_rational(c)
            return Matrix._from_rows([[c * v for v in r] for r in self._rows])
        return Matrix._from_array(to_float(c) * self._array)

    def det(self):
        if self._det is None:
            if self.mode == FLOAT:
                self._det = float(np.linalg.det(self._array))
            else:
                self._det = _rational_det(self._rows)
        return self._det

    @property
    def abs_det(self):
        return abs(self.det())

    def trace(self):
        if self.mode == RATIONAL:
            return sum((self._rows[i][i] for i in range(self.dim)), Fraction(0))
        return float(np.trace(self._array))

    def inverse(self) -> "Matrix":
        if self.det() == 0:
            raise InvalidInput("matrix is singular")
        if self.mode == FLOAT:
            return Matrix._from_array(np.linalg.inv(self._array))
        return Matrix._from_rows(_rational_inverse(self._rows))

    def norm(self) -> float:
        """Spectral norm (largest singular value), as a float."""
        return float(np.linalg.norm(self.array, ord=2))

    def max_abs_diff(self, other: "Matrix"):
        self._check_compatible(other)
        if self.mode == RATIONAL:
            return max(abs(a - b) for ra, rb in zip(self._rows, other._rows) for a, b in zip(ra, rb))
        return float(np.max(np.abs(self._array - other._array)))


def _rational_det(rows) -> Fraction:
    m = [list(r) for r in rows]
    n = len(m)
    det = Fraction(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if m[r][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            m[c], m[piv] = m[piv], m[c]
            det = -det
        det *= m[c][c]
        inv = 1 / m[c][c]
        for r in range(c + 1, n):
            f = m[r][c] * inv
            if f:
                for k in range(c, n):
                    m[r][k] -= f * m[c][k]
    return det


def _rational_inverse(rows):
    n = len(rows)
    aug = [list(r) + [Fraction(int(i == j)) for j in range(n)] for i, r in enumerate(rows)]
    for c in range(n):
        piv = next(r for r in range(c, n) if aug[r][c] != 0)
        aug[c], aug[piv] = aug[piv], aug[c]
        inv = 1 / aug[c][c]
        aug[c] = [v * inv for v in aug[c]]
        for r in range(n):
            if r != c and aug[r][c] != 0:
                f = aug[r][c]
                aug[r] = [a - f * b for a, b in zip(aug[r], aug[c])]
    return [row[n:] for row in aug]


# -- expansiveness --------------------------------------------------------------


@dataclass(frozen=True)
class ExpansivenessResult:
    """Outcome of an expansiveness test.

    ``status`` is one of ``"expansive"``, ``"not-expansive"``, ``"indeterminate"``.
    Truth-testing an indeterminate result raises :class:`IndeterminateError`
    so it can never be read as a silent boolean.
    """

    status: str
    method: str
    eigenvalue_moduli: tuple[float, ...] | None = None
    upper_bound: float | None = None
    lower_bound: float | None = None
    n: int | None = None

    @property
    def expansive(self) -> bool | None:
        return None if self.status == "indeterminate" else self.status == "expansive"

    def __bool__(self) -> bool:
        if self.status == "indeterminate":
            raise IndeterminateError(
                f"expansiveness indeterminate after n={self.n} (bounds {self.lower_bound}..{self.upper_bound})"
            )
        return self.status == "expansive"

    def to_dict(self) -> dict:
        out = {"status": self.status, "method": self.method}
        if self.eigenvalue_moduli is not None:
            out["eigenvalue_moduli"] = list(self.eigenvalue_moduli)
        if self.n is not None:
            out.update(n=self.n, spectral_radius_inverse_upper=self.upper_bound,
                       spectral_radius_inverse_lower=self.lower_bound)
        return out


def _charpoly(m: Matrix) -> list:
    """Monic characteristic polynomial coefficients (highest degree first), d <= 3."""
    r = m.rows
    tr = m.trace()
    if m.dim == 1:
        return [1, -r[0][0]]
    if m.dim == 2:
        return [1, -tr, m.det()]
    c2 = (r[0][0] * r[1][1] - r[0][1] * r[1][0]
          + r[0][0] * r[2][2] - r[0][2] * r[2][0]
          + r[1][1] * r[2][2] - r[1][2] * r[2][1])
    return [1, -tr, c2, -m.det()]


def _quadratic_has_root_in_unit_interval(b: Fraction, c: Fraction) -> bool:
    """Exact test: does x^2 + b x + c have a real root in [-1, 1]?"""
    disc = b * b - 4 * c
    if disc < 0:
        return False
    p1, pm1 = 1 + b + c, 1 - b + c
    if p1 * pm1 <= 0:
        return True
    vertex = -b / 2
    return p1 > 0 and pm1 > 0 and -1 <= vertex <= 1


def is_expansive(m: Matrix, theta: float = DEFAULT_THETA, n_max: int = DEFAULT_NMAX) -> ExpansivenessResult:
    """Decide whether every eigenvalue of ``m`` has modulus > 1.

    For d <= 3 the eigenvalues come from the characteristic polynomial (the
    2x2 rational case is decided exactly). Larger matrices use Gelfand's
    formula on ``m^{-1}``: accept once ``||m^{-n}||^{1/n} < 1 - theta``,
    reject once the trace bound ``(|tr m^{-n}|/d)^{1/n} > 1 + theta``
    certifies an eigenvalue of ``m^{-1}`` outside the unit disc; otherwise
    the result is indeterminate.
    """
    if m.det() == 0:
        raise InvalidInput("matrix is singular")
    d = m.dim
    if d <= 3:
        coeffs = _charpoly(m)
        if d == 1:
            moduli = (abs(float(coeffs[1])),)
            ok = abs(coeffs[1]) > 1
        else:
            roots = np.roots([float(c) for c in coeffs])
            moduli = tuple(sorted(float(abs(z)) for z in roots))
            if d == 2 and m.mode == RATIONAL:
                b, c = coeffs[1], coeffs[2]
                if b * b - 4 * c < 0:
                    ok = c > 1
                else:
                    ok = not _quadratic_has_root_in_unit_interval(b, c)
            else:
                ok = min(moduli) > 1
        return ExpansivenessResult("expansive" if ok else "not-expansive", "characteristic-polynomial", moduli)

    x = m.inverse().array
    y = np.eye(d)
    log_scale = 0.0
    upper = lower = math.inf
    for n in range(1, n_max + 1):
        y = y @ x
        s = float(np.max(np.abs(y)))
        y = y / s
        log_scale += math.log(s)
        upper = math.exp((math.log(np.linalg.norm(y, ord=2)) + log_scale) / n)
        tr = abs(float(np.trace(y)))
        lower = math.exp((math.log(tr / d) + log_scale) / n) if tr > 0 else 0.0
        if upper < 1 - theta:
            return ExpansivenessResult("expansive", "gelfand", upper_bound=upper, lower_bound=lower, n=n)
        if lower > 1 + theta:
            return ExpansivenessResult("not-expansive", "gelfand", upper_bound=upper, lower_bound=lower, n=n)
    return ExpansivenessResult("indeterminate", "gelfand", upper_bound=upper, lower_bound=lower, n=n_max)


class ExpansiveMatrix(Matrix):
    """A matrix certified expansive at construction, with memoized integer powers.

    The power cache is guarded by a lock; concurrent callers always observe
    the same values.
    """

    __slots__ = ("certificate", "_powers", "_lock", "_inv")

    def __init__(self, rows, mode: str | None = None, theta: float = DEFAULT_THETA, n_max: int = DEFAULT_NMAX):
        super().__init__(rows, mode)
        self._finish(theta, n_max)

    def _finish(self, theta, n_max):
        if self.det() == 0:
            raise InvalidInput("matrix is singular")
        cert = is_expansive(self, theta, n_max)
        if cert.status == "not-expansive":
            raise InvalidInput(f"matrix is not expansive ({cert.to_dict()})")
        if cert.status == "indeterminate":
            raise IndeterminateError(f"could not certify expansiveness ({cert.to_dict()})")
        self.certificate = cert
        self._powers = {0: Matrix.identity(self.dim, self.mode), 1: Matrix(self.rows, self.mode)}
        self._lock = threading.Lock()
        self._inv = None

    @classmethod
    def _from_array(cls, arr: np.ndarray) -> "ExpansiveMatrix":
        out = super()._from_array(arr)
        out._finish(DEFAULT_THETA, DEFAULT_NMAX)
        return out

    @classmethod
    def _from_rows(cls, rows) -> "ExpansiveMatrix":
        out = super()._from_rows(rows)
        out._finish(DEFAULT_THETA, DEFAULT_NMAX)
        return out

    @classmethod
    def from_matrix(cls, m: Matrix, theta: float = DEFAULT_THETA, n_max: int = DEFAULT_NMAX) -> "ExpansiveMatrix":
        out = cls.__new__(cls)
        out.dim, out.mode, out._det = m.dim, m.mode, None
        out._rows = m._rows
        out._array = m._array
        out._finish(theta, n_max)
        return out

    def to_float(self) -> "ExpansiveMatrix":
        if self.mode == FLOAT:
            return self
        return ExpansiveMatrix.from_matrix(Matrix.to_float(self))

    def power(self, j: int) -> Matrix:
        j = int(j)
        with self._lock:
            hit = self._powers.get(j)
        if hit is not None:
            return hit
        step = 1 if j > 0 else -1
        with self._lock:
            prev = self._powers.get(j - step)
        if prev is not None:
            base = self._powers[1] if j > 0 else self._inverse()
            result = prev @ base
        else:
            result = self._ladder(j)
        with self._lock:
            self._powers.setdefault(j, result)
            return self._powers[j]

    def _inverse(self) -> Matrix:
        if self._inv is None:
            inv = Matrix(self.rows, self.mode).inverse()
            with self._lock:
                self._powers.setdefault(-1, inv)
            self._inv = inv
        return self._inv

    def _ladder(self, j: int) -> Matrix:
        base = self._powers[1] if j > 0 else self._inverse()
        n = abs(j)
        result = Matrix.identity(self.dim, self.mode)
        sq = base
        while n:
            if n & 1:
                result = result @ sq
            n >>= 1
            if n:
                sq = sq @ sq
        return result


def power(m: ExpansiveMatrix, j: int) -> Matrix:
    return m.power(j)


def det_abs_pow(m: Matrix, x) -> float:
    """``|det m| ** x`` as a float."""
    return float(m.abs_det) ** float(x)


def det_abs_pow_exact(m: Matrix, n: int) -> Fraction:
    if m.mode != RATIONAL:
        raise InvalidInput("exact determinant powers need a rational matrix")
    if int(n) != n:
        raise InvalidInput("exact determinant powers need an integer exponent")
    return m.abs_det ** int(n)


def matrix_equal(m1: Matrix, m2: Matrix, tol: float = DEFAULT_TOL) -> bool:
    """Exact equality in rational mode (``tol`` ignored); max-entry deviation <= tol in float mode."""
    if m1.dim != m2.dim:
        raise InvalidInput(f"dimension mismatch: {m1.dim} vs {m2.dim}")
    if m1.mode != m2.mode:
        raise InvalidInput("cannot compare matrices of different scalar modes")
    if m1.mode == RATIONAL:
        return m1.key() == m2.key()
    return m1.max_abs_diff(m2) <= tol
