"""A fixed, seeded set of explicit sequences shared by several suites."""
import numpy as np

from anisotl.matrices import ExpansiveMatrix
from anisotl.sequences import ExplicitSequence

MATRICES_2D = {
    "diag(2,2)": lambda: ExpansiveMatrix.diag(2, 2),
    "diag(2,-2)": lambda: ExpansiveMatrix.diag(2, -2),
    "swap": lambda: ExpansiveMatrix([[0, 2], [2, 0]]),
    "shear-rot": lambda: ExpansiveMatrix([[1, 1], [-1, 1]]),
    "diag(3,2)": lambda: ExpansiveMatrix.diag(3, 2),
}


def sequence(rng, dim, scales=(-1, 0, 1), atoms=(1, 6), spread=2):
    entries = {}
    for _ in range(int(rng.integers(atoms[0], atoms[1] + 1))):
        j = int(rng.choice(scales))
        k = tuple(int(v) for v in rng.integers(-spread, spread + 1, dim))
        entries[(j, k)] = float(rng.uniform(0.2, 2.0)) * (1 if rng.random() < 0.6 else -1)
    return ExplicitSequence(entries, dim)


def corpus(n=30, seed=2024):
    """``n`` (name, matrix, sequence) triples; roughly one in five is one-dimensional."""
    rng = np.random.default_rng(seed)
    names = sorted(MATRICES_2D)
    out = []
    for i in range(n):
        if i % 5 == 4:
            M = ExpansiveMatrix([[int(rng.choice([2, -2, 3]))]])
            out.append((f"1d-{i}", M, sequence(rng, 1)))
        else:
            name = names[i % len(names)]
            out.append((f"{name}-{i}", MATRICES_2D[name](), sequence(rng, 2)))
    return out
