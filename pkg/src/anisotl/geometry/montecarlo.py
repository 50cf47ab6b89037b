"""Reproducible Monte Carlo integration over bounded regions.

Samples are drawn in fixed-size chunks; chunk ``c`` uses its own Philox
stream keyed by ``(seed, c)``. Chunk partial sums are combined in chunk
order with ``math.fsum``, so serial and threaded runs agree bit-for-bit.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from anisotl.errors import InvalidInput

DEFAULT_SAMPLES = 1_000_000
DEFAULT_SEED = 0
CHUNK = 1 << 16


@dataclass(frozen=True)
class MCResult:
    estimate: float
    stderr: float
    samples: int
    seed: int
    box_volume: float

    def __iter__(self):
        return iter((self.estimate, self.stderr))


def chunk_rng(seed: int, chunk: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(chunk)])))


def sample_chunk(lo: np.ndarray, hi: np.ndarray, n: int, seed: int, chunk: int) -> np.ndarray:
    return lo + (hi - lo) * chunk_rng(seed, chunk).random((n, len(lo)))


def integrate_box(f, lo, hi, samples: int = DEFAULT_SAMPLES, seed: int = DEFAULT_SEED,
                  workers: int = 1, chunk: int = CHUNK) -> MCResult:
    """Integrate ``f`` (vectorized: ``(n, d)`` array -> ``(n,)`` values) over a box."""
    if samples < 2:
        raise InvalidInput("need at least 2 samples")
    lo = np.asarray([float(v) for v in lo])
    hi = np.asarray([float(v) for v in hi])
    vol = float(np.prod(hi - lo))
    if not vol > 0 or not math.isfinite(vol):
        raise InvalidInput("integration box has zero or non-finite volume")
    sizes = [chunk] * (samples // chunk)
    if samples % chunk:
        sizes.append(samples % chunk)

    def run(c):
        v = np.asarray(f(sample_chunk(lo, hi, sizes[c], seed, c)), dtype=float)
        return float(np.sum(v)), float(np.sum(v * v))

    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            parts = list(ex.map(run, range(len(sizes))))
    else:
        parts = [run(c) for c in range(len(sizes))]
    s1 = math.fsum(p[0] for p in parts)
    s2 = math.fsum(p[1] for p in parts)
    mean = s1 / samples
    var = max(s2 / samples - mean * mean, 0.0) * samples / (samples - 1)
    return MCResult(mean * vol, vol * math.sqrt(var / samples), samples, seed, vol)


def integrate_mc(f, region, samples: int = DEFAULT_SAMPLES, seed: int = DEFAULT_SEED,
                 workers: int = 1) -> MCResult:
    """Integrate ``f`` over ``region`` by uniform sampling of its bounding box.

    Points outside the region contribute 0. Returns ``(estimate, stderr)``
    (also available as attributes).
    """
    lo, hi = region.bbox()

    def g(X):
        v = np.asarray(f(X), dtype=float)
        return np.where(region.contains(X), v, 0.0)

    return integrate_box(g, lo, hi, samples, seed, workers)
