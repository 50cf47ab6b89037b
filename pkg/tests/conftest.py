import json
import sys
import math
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from anisotl.matrices import ExpansiveMatrix
from anisotl.sequences import ExplicitSequence

FROZEN = json.loads((Path(__file__).parent / "oracle" / "frozen.json").read_text())


def diag(*v):
    return ExpansiveMatrix.diag(*v)


def rot2(phi=1.0):
    return ExpansiveMatrix.rotation(phi, 2.0)


def swap2():
    return ExpansiveMatrix([[0, 2], [2, 0]])


def random_explicit(rng, dim=2, scales=(-1, 0, 1), atoms=6, spread=3, positive=False):
    entries = {}
    for _ in range(atoms):
        j = int(rng.choice(scales))
        k = tuple(int(v) for v in rng.integers(-spread, spread + 1, dim))
        v = float(rng.uniform(0.1, 2.0))
        entries[(j, k)] = v if positive or rng.random() < 0.5 else -v
    return ExplicitSequence(entries, dim)


@pytest.fixture
def frozen():
    return FROZEN


@pytest.fixture
def two_scale_1d():
    return ExplicitSequence({(0, (0,)): 1, (1, (0,)): 1}, 1)


def pytest_terminal_summary(terminalreporter):
    results = getattr(sys.modules.get("test_acceptance"), "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for name, (ok, detail) in results.items():
        terminalreporter.write_line(f"criterion {name}: {'PASS' if ok else 'FAIL'} - {detail}")
