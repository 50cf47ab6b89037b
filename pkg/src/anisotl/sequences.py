"""Coefficient sequences c_{j,k}: explicit finite maps and implicit predicate-defined families.

Both kinds expose the same evaluation surface used by the norm evaluators:

* ``coef(j, K)``: vectorized moduli |c_{j,k}| for an ``(n, d)`` integer array;
* ``index_box(j)``: an integer box containing every k with c_{j,k} != 0;
* ``layers(M)``: optional exact geometry. For each scale a list of
  ``(piece, modulus)`` with pairwise disjoint pieces, each a union of whole
  cubes M^j([0,1]^d + k) on which |c_{j,k}| equals ``modulus``.
"""
from __future__ import annotations

import json
import math
from fractions import Fraction
from typing import Callable, Mapping

import numpy as np

from anisotl.errors import CapacityError, InvalidInput
from anisotl.geometry.cubes import DyadicCube
from anisotl.geometry.regions import Parallelotope
from anisotl.matrices import Matrix

MATERIALIZE_LIMIT = 2_000_000
DENSE_LIMIT = 1 << 20


def _modulus(v):
    if isinstance(v, bool):
        raise InvalidInput("boolean coefficient")
    if isinstance(v, (int, Fraction)):
        return abs(Fraction(v))
    if isinstance(v, complex):
        return abs(v)
    v = float(v)
    if not math.isfinite(v):
        raise InvalidInput("coefficients must be finite")
    return abs(v)


def index_box_region(M: Matrix, j: int, box) -> Parallelotope:
    """The union of the cubes M^j([0,1]^d + k) over an integer index box."""
    lo, hi = box
    Mj = M.power(j) if hasattr(M, "power") else M
    widths = [h - l + 1 for l, h in zip(lo, hi)]
    cols = [[Mj.rows[r][c] * widths[c] for c in range(len(widths))] for r in range(len(widths))]
    return Parallelotope(Matrix(cols, Mj.mode), Mj.apply(tuple(int(v) for v in lo)))


class ExplicitSequence:
    """Finitely supported c_{j,k}; zero entries are dropped."""

    kind = "explicit"

    def __init__(self, entries: Mapping, dim: int | None = None):
        values = {}
        for key, v in dict(entries).items():
            j, k = key
            k = tuple(int(t) for t in (k if isinstance(k, (tuple, list)) else (k,)))
            if dim is None:
                dim = len(k)
            if len(k) != dim:
                raise InvalidInput("all indices k must share one dimension")
            if _modulus(v) != 0:
                values[(int(j), k)] = v
        if dim is None:
            raise InvalidInput("an empty sequence needs an explicit dimension")
        self.dim = dim
        self.values = values
        self.moduli = {key: _modulus(v) for key, v in values.items()}
        self._by_scale: dict = {}
        for (j, k), m in self.moduli.items():
            self._by_scale.setdefault(j, {})[k] = m
        self._lookup: dict = {}

    def __len__(self):
        return len(self.values)

    def __repr__(self):
        return f"ExplicitSequence(dim={self.dim}, atoms={len(self)}, scales={self.scales})"

    def __eq__(self, other):
        return isinstance(other, ExplicitSequence) and self.dim == other.dim and self.values == other.values

    @property
    def scales(self) -> list:
        return sorted(self._by_scale)

    @property
    def j_min(self):
        return min(self._by_scale) if self._by_scale else None

    @property
    def j_max(self):
        return max(self._by_scale) if self._by_scale else None

    def by_scale(self, j: int) -> dict:
        return dict(self._by_scale.get(j, {}))

    def items(self):
        return sorted(self.moduli.items())

    def index_box(self, j: int):
        ks = list(self._by_scale.get(j, {}))
        if not ks:
            return None
        return (tuple(min(k[i] for k in ks) for i in range(self.dim)),
                tuple(max(k[i] for k in ks) for i in range(self.dim)))

    def max_modulus(self, j: int) -> float:
        return float(max(self._by_scale.get(j, {0: 0}).values()))

    def coef(self, j: int, K: np.ndarray) -> np.ndarray:
        K = np.asarray(K, dtype=np.int64).reshape(-1, self.dim)
        table = self._lookup.get(j)
        if table is None:
            row = self._by_scale.get(j)
            if not row:
                return np.zeros(len(K))
            table = self._lookup[j] = self._table(row)
        kmin, span, strides, codes, vals = table
        if len(vals) == 1 and codes is None:  # single atom: compare columns directly
            hit = K[:, 0] == kmin[0]
            for i in range(1, self.dim):
                hit &= K[:, i] == kmin[i]
            return np.where(hit, vals[0], 0.0)
        rel = K - kmin
        inside = np.all((rel >= 0) & (rel < span), axis=1)
        c = np.where(inside, rel @ strides, 0)
        if codes is None:  # dense table over the index box
            return np.where(inside, vals[c], 0.0)
        pos = np.clip(np.searchsorted(codes, c), 0, len(codes) - 1)
        return np.where(inside & (codes[pos] == c), vals[pos], 0.0)

    def _table(self, row: dict):
        keys = np.array(list(row), dtype=np.int64).reshape(-1, self.dim)
        kmin = keys.min(axis=0)
        span = keys.max(axis=0) - kmin + 1
        strides = np.ones(self.dim, dtype=np.int64)
        for i in range(self.dim - 2, -1, -1):
            strides[i] = strides[i + 1] * span[i + 1]
        codes = (keys - kmin) @ strides
        vals = np.array([float(v) for v in row.values()])
        if int(np.prod(span)) <= DENSE_LIMIT:
            dense = np.zeros(int(np.prod(span)))
            dense[codes] = vals
            return kmin, span, strides, None, dense
        order = np.argsort(codes)
        return kmin, span, strides, codes[order], vals[order]

    def value_at(self, j: int, k) -> object:
        return self.moduli.get((int(j), tuple(int(t) for t in k)), 0)

    def layers(self, M) -> dict:
        out: dict = {}
        for (j, k), m in self.items():
            out.setdefault(j, []).append((DyadicCube(M, j, k).region, m))
        return out

    def materialize(self, limit: int = MATERIALIZE_LIMIT) -> "ExplicitSequence":
        return self

    # -- algebra -----------------------------------------------------------

    def scaled(self, lam) -> "ExplicitSequence":
        return ExplicitSequence({key: lam * v for key, v in self.values.items()}, self.dim)

    def __add__(self, other: "ExplicitSequence") -> "ExplicitSequence":
        if not isinstance(other, ExplicitSequence) or other.dim != self.dim:
            raise InvalidInput("can only add explicit sequences of the same dimension")
        out = dict(self.values)
        for key, v in other.values.items():
            out[key] = out.get(key, 0) + v
        return ExplicitSequence(out, self.dim)

    def masked(self, keep) -> "ExplicitSequence":
        """Keep entries whose key satisfies ``keep(j, k)``."""
        return ExplicitSequence({key: v for key, v in self.values.items() if keep(*key)}, self.dim)

    # -- serialization -------------------------------------------------------

    def to_json(self) -> dict:
        entries = []
        for (j, k), v in sorted(self.values.items()):
            if isinstance(v, complex):
                re, im = v.real, v.imag
            else:
                re, im = v, 0.0
            entries.append({
                "j": j,
                "k": list(k),
                "re": str(re) if isinstance(re, Fraction) else float(re) if not isinstance(re, int) else re,
                "im": float(im),
            })
        return {"dim": self.dim, "entries": entries}

    @classmethod
    def from_json(cls, data: dict) -> "ExplicitSequence":
        if not isinstance(data, dict) or "entries" not in data:
            raise InvalidInput("sequence object needs an 'entries' list")
        entries = {}
        dim = data.get("dim")
        for e in data["entries"]:
            try:
                j = int(e["j"])
                k = e["k"]
                k = tuple(int(t) for t in (k if isinstance(k, list) else [k]))
                re, im = _parse_number(e.get("re", 0)), _parse_number(e.get("im", 0))
            except (KeyError, TypeError, ValueError) as exc:
                raise InvalidInput(f"bad sequence entry {e!r}") from exc
            v = complex(float(re), float(im)) if im != 0 else re
            key = (j, k)
            entries[key] = entries.get(key, 0) + v
        if dim is None and entries:
            dim = len(next(iter(entries))[1])
        return cls(entries, dim)

    @classmethod
    def load(cls, path) -> "ExplicitSequence":
        with open(path) as fh:
            return cls.from_json(json.load(fh))


def _parse_number(v):
    if isinstance(v, str):
        return Fraction(v)
    if isinstance(v, bool):
        raise ValueError("boolean")
    if isinstance(v, int):
        return Fraction(v)
    return float(v)


class ImplicitSequence:
    """A coefficient family given by a vectorized callback.

    ``coef(j, K)`` must vanish outside ``scales`` and outside the declared
    index boxes. ``layer_fn(M)``, when given, returns exact per-scale pieces
    (see the module docstring) and unlocks the exact evaluators.
    """

    kind = "implicit"

    def __init__(self, dim: int, scales, coef: Callable, index_boxes: Mapping,
                 layer_fn: Callable | None = None, max_moduli: Mapping | None = None,
                 description: str = ""):
        self.dim = dim
        self._scales = sorted(int(j) for j in scales)
        self._coef = coef
        self._boxes = {int(j): (tuple(b[0]), tuple(b[1])) for j, b in index_boxes.items()}
        if set(self._boxes) != set(self._scales):
            raise InvalidInput("every declared scale needs an index box")
        self._layer_fn = layer_fn
        self._max = dict(max_moduli) if max_moduli else None
        self.description = description

    def __repr__(self):
        return f"ImplicitSequence(dim={self.dim}, scales={self._scales}, {self.description})"

    @property
    def scales(self) -> list:
        return list(self._scales)

    @property
    def j_min(self):
        return self._scales[0] if self._scales else None

    @property
    def j_max(self):
        return self._scales[-1] if self._scales else None

    def index_box(self, j: int):
        return self._boxes.get(int(j))

    def box_count(self, j: int) -> int:
        lo, hi = self._boxes[j]
        return int(np.prod([h - l + 1 for l, h in zip(lo, hi)]))

    def coef(self, j: int, K: np.ndarray) -> np.ndarray:
        K = np.asarray(K, dtype=np.int64).reshape(-1, self.dim)
        out = np.zeros(len(K))
        box = self._boxes.get(int(j))
        if box is None or not len(K):
            return out
        lo, hi = np.array(box[0]), np.array(box[1])
        inside = np.all((K >= lo) & (K <= hi), axis=1)
        if inside.any():
            out[inside] = np.abs(np.asarray(self._coef(int(j), K[inside]), dtype=float))
        return out

    def max_modulus(self, j: int) -> float:
        if self._max is not None:
            return float(self._max.get(j, 0.0))
        return float(np.max(self._grid_values(j)[1], initial=0.0))

    def layers(self, M):
        if self._layer_fn is None:
            return None
        return self._layer_fn(M)

    def _grid_values(self, j: int):
        lo, hi = self._boxes[j]
        axes = [np.arange(a, b + 1, dtype=np.int64) for a, b in zip(lo, hi)]
        K = np.stack([m.ravel() for m in np.meshgrid(*axes, indexing="ij")], axis=1)
        return K, self.coef(j, K)

    def materialize(self, limit: int = MATERIALIZE_LIMIT) -> ExplicitSequence:
        total = sum(self.box_count(j) for j in self._scales)
        if total > limit:
            raise CapacityError(f"implicit sequence spans {total} candidate indices (limit {limit})")
        entries = {}
        for j in self._scales:
            K, vals = self._grid_values(j)
            for k, v in zip(K[vals != 0].tolist(), vals[vals != 0].tolist()):
                entries[(j, tuple(k))] = v
        return ExplicitSequence(entries, self.dim)

    def spot_check(self, samples: int = 200, seed: int = 0) -> bool:
        """Sample indices outside the declared support and confirm the callback vanishes there."""
        rng = np.random.default_rng(seed)
        for j in self._scales:
            lo, hi = (np.array(b) for b in self._boxes[j])
            K = rng.integers(lo - 20, hi + 21, (samples, self.dim))
            outside = ~np.all((K >= lo) & (K <= hi), axis=1)
            if outside.any() and np.any(np.asarray(self._coef(j, K[outside]), dtype=float) != 0):
                return False
        return True


def as_sequence(obj, dim: int | None = None):
    if isinstance(obj, (ExplicitSequence, ImplicitSequence)):
        return obj
    return ExplicitSequence(obj, dim)
