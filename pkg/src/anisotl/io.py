"""JSON readers and writers for matrices, spaces, sequences and matrix pairs."""
from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

from anisotl.errors import InvalidInput
from anisotl.matrices import FLOAT, RATIONAL, ExpansiveMatrix, Matrix
from anisotl.sequences import ExplicitSequence
from anisotl.spaces import SpaceParams, format_exponent


def _read(path) -> object:
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise InvalidInput(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise InvalidInput(f"{path} is not valid JSON: {exc}") from exc


def matrix_from_json(obj, expansive: bool = True) -> Matrix:
    """``{"dim": 2, "mode": "rational"|"float", "entries": [["2","0"],["0","-2"]]}``."""
    if not isinstance(obj, dict) or "entries" not in obj:
        raise InvalidInput("matrix object needs an 'entries' list")
    mode = obj.get("mode", RATIONAL)
    if mode not in (RATIONAL, FLOAT):
        raise InvalidInput(f"unknown matrix mode {mode!r}")
    rows = obj["entries"]
    if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
        raise InvalidInput("'entries' must be a list of rows")
    dim = obj.get("dim", len(rows))
    if dim != len(rows) or any(len(r) != dim for r in rows):
        raise InvalidInput(f"entries do not form a {dim}x{dim} matrix")
    if mode == RATIONAL:
        for r in rows:
            for v in r:
                if isinstance(v, float) or isinstance(v, bool):
                    raise InvalidInput("rational entries must be integers or 'n'/'n/d' strings")
        try:
            rows = [[Fraction(v) for v in r] for r in rows]
        except (ValueError, ZeroDivisionError) as exc:
            raise InvalidInput(f"bad rational entry: {exc}") from exc
    cls = ExpansiveMatrix if expansive else Matrix
    return cls(rows, mode)


def matrix_to_json(M: Matrix) -> dict:
    if M.mode == RATIONAL:
        return {"dim": M.dim, "mode": RATIONAL, "entries": M.entries_as_strings()}
    return {"dim": M.dim, "mode": FLOAT, "entries": M.array.tolist()}


def _matrix_field(obj, base: Path | None):
    if isinstance(obj, str):
        path = Path(obj) if base is None else base / obj
        return matrix_from_json(_read(path))
    return matrix_from_json(obj)


def space_from_json(obj, base: Path | None = None) -> SpaceParams:
    """``{"matrix": <matrix object or path>, "alpha": 0.0, "p": "2", "q": "inf"}``."""
    if not isinstance(obj, dict):
        raise InvalidInput("space file must hold an object")
    missing = {"matrix", "p", "q"} - set(obj)
    if missing:
        raise InvalidInput(f"space object lacks {sorted(missing)}")
    alpha = obj.get("alpha", 0)
    if isinstance(alpha, float):
        alpha = repr(alpha)
    return SpaceParams(_matrix_field(obj["matrix"], base), alpha, obj["p"], obj["q"])


def space_to_json(s: SpaceParams) -> dict:
    return {"matrix": matrix_to_json(s.matrix), "alpha": str(s.alpha),
            "p": format_exponent(s.p), "q": format_exponent(s.q)}


def load_matrix(path) -> ExpansiveMatrix:
    return matrix_from_json(_read(path))


def load_space(path) -> SpaceParams:
    return space_from_json(_read(path), Path(path).parent)


def load_sequence(path) -> ExplicitSequence:
    return ExplicitSequence.from_json(_read(path))


def load_pair(path) -> tuple[ExpansiveMatrix, ExpansiveMatrix]:
    """``{"A": <matrix>, "B": <matrix>}``; lower-case keys are accepted too."""
    obj = _read(path)
    if not isinstance(obj, dict):
        raise InvalidInput("pair file must hold an object")
    a = obj.get("A", obj.get("a"))
    b = obj.get("B", obj.get("b"))
    if a is None or b is None:
        raise InvalidInput("pair file needs matrices under 'A' and 'B'")
    base = Path(path).parent
    return _matrix_field(a, base), _matrix_field(b, base)


def dump(obj, path) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")
