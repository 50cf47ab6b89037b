"""Command-line front end: ``anisotl <command> [flags]``; JSON reports on stdout.

Exit codes: 0 success, 1 invalid input or usage, 2 numerically inconclusive.
"""
from __future__ import annotations

import argparse
import csv
import io as _io
import json
import sys
import time

from anisotl import __version__
from anisotl.errors import (
    CapacityError, IndeterminateError, InvalidCombination, InvalidInput, InvalidState, NotFound,
)
from anisotl.geometry.montecarlo import DEFAULT_SAMPLES, DEFAULT_SEED
from anisotl.io import load_pair, load_sequence, load_space, matrix_from_json, _read
from anisotl.matrices import is_expansive
from anisotl.norms import norm
from anisotl.orbit import (
    DEFAULT_MMAX, brute_force_orbit_count, classify_spaces, orbit_decomposition, orbit_is_finite,
)
from anisotl.spaces import format_exponent
from anisotl.witnesses import (
    MCConfig, family_axis, family_builder, find_separating_points, manifest, verify_norm_law,
)

EXIT_OK, EXIT_INVALID, EXIT_INCONCLUSIVE = 0, 1, 2
FAMILIES = ("delta", "single-scale", "multiscale", "case1", "case2")
PAIR_FAMILIES = ("case1", "case2")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _sizes(text: str) -> list:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"sizes must be comma-separated integers: {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="anisotl", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def common(p):
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--out", help="write a CSV table here")
        p.add_argument("--replay", metavar="MANIFEST", help="rerun with the parameters stored in a report manifest")

    p = sub.add_parser("expansive", help="certify that a matrix is expansive")
    p.add_argument("--matrix", required=False)
    p.add_argument("--theta", type=float, default=1e-6)
    p.add_argument("--nmax", type=int, default=64)
    common(p)

    p = sub.add_parser("orbit", help="finiteness of {B^j A^-j}")
    p.add_argument("--space-a")
    p.add_argument("--space-b")
    p.add_argument("--pair")
    p.add_argument("--mmax", type=int, default=DEFAULT_MMAX)
    p.add_argument("--jrange", type=int, help="also count distinct orbit elements over |j| <= JRANGE")
    common(p)

    p = sub.add_parser("classify", help="decide whether two spaces coincide")
    p.add_argument("--space-a")
    p.add_argument("--space-b")
    p.add_argument("--mmax", type=int, default=DEFAULT_MMAX)
    p.add_argument("--mmax-insufficient", action="store_true",
                   help="report Unknown instead of NotEqual when the orbit test decides")
    common(p)

    p = sub.add_parser("norm", help="evaluate a sequence norm")
    p.add_argument("--space")
    p.add_argument("--seq")
    p.add_argument("--method", choices=("auto", "exact", "mc"), default="auto")
    p.add_argument("--samples", type=int, default=DEFAULT_SAMPLES)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--workers", type=int, default=1)
    common(p)

    for name, helptext in (("witness", "build a witness family and report its parameters"),
                           ("verify", "measure a witness family over sizes and fit its growth law")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--family", choices=FAMILIES)
        p.add_argument("--space", help="space file (delta, single-scale, multiscale)")
        p.add_argument("--pair", help="matrix pair file (case1, case2)")
        p.add_argument("--p")
        p.add_argument("--q1", "--q", dest="q1")
        p.add_argument("--q2")
        p.add_argument("--alpha")
        p.add_argument("--method", choices=("auto", "exact", "mc"), default="auto")
        p.add_argument("--samples", type=int, default=DEFAULT_SAMPLES)
        p.add_argument("--seed", type=int, default=DEFAULT_SEED)
        p.add_argument("--workers", type=int, default=1)
        if name == "witness":
            p.add_argument("--size", type=int, default=3)
            p.add_argument("--measure", action="store_true", help="also evaluate the norms")
        else:
            p.add_argument("--sizes", type=_sizes, default=[2, 3, 4, 5])
        common(p)
    return parser


def _need(args, *names):
    for n in names:
        if getattr(args, n.replace("-", "_"), None) in (None, ""):
            raise UsageError(f"--{n} is required for '{args.command}'")


def _pair_of_spaces(args):
    _need(args, "space-a", "space-b")
    return load_space(args.space_a), load_space(args.space_b)


def cmd_expansive(args) -> tuple[dict, int]:
    _need(args, "matrix")
    M = matrix_from_json(_read(args.matrix), expansive=False)
    res = is_expansive(M, args.theta, args.nmax)
    code = EXIT_INCONCLUSIVE if res.status == "indeterminate" else EXIT_OK
    return {"result": res.to_dict(), "det": str(M.det())}, code


def cmd_orbit(args) -> tuple[dict, int]:
    if args.pair:
        A, B = load_pair(args.pair)
    else:
        sa, sb = _pair_of_spaces(args)
        A, B = sa.matrix, sb.matrix
    verdict = orbit_is_finite(A, B, args.mmax)
    report = {"orbit": verdict.to_dict(), "summary": verdict.describe()}
    if verdict.finite:
        report["decomposition"] = orbit_decomposition(A, B, args.mmax).to_dict()
    if args.jrange is not None:
        report["brute_force_count"] = {"jrange": args.jrange, "count": brute_force_orbit_count(A, B, args.jrange)}
    return report, EXIT_OK


def cmd_classify(args) -> tuple[dict, int]:
    sa, sb = _pair_of_spaces(args)
    res = classify_spaces(sa, sb, args.mmax, args.mmax_insufficient)
    report = {"space_a": sa.describe(), "space_b": sb.describe(), **res.to_dict()}
    return report, EXIT_INCONCLUSIVE if res.verdict == "Unknown" else EXIT_OK


def cmd_norm(args) -> tuple[dict, int]:
    _need(args, "space", "seq")
    s = load_space(args.space)
    c = load_sequence(args.seq)
    res = norm(c, s, args.method, args.samples, args.seed, args.workers)
    return {"space": s.describe(), "atoms": len(c), **res.to_dict()}, EXIT_OK


def _family_inputs(args):
    """(A, B, p, q, alpha, q2) from either a space file or a pair file plus exponent flags."""
    _need(args, "family")
    if args.family in PAIR_FAMILIES:
        _need(args, "pair")
        A, B = load_pair(args.pair)
        p = args.p or ("inf" if args.family == "case2" else "1")
        q = args.q1 or ("1" if args.family == "case2" else "2")
        return A, B, p, q, args.alpha or "0", args.q2
    _need(args, "space")
    s = load_space(args.space)
    p = args.p or format_exponent(s.p)
    q = args.q1 or format_exponent(s.q)
    return s.matrix, None, p, q, args.alpha or str(s.alpha), None


def _builder(args):
    A, B, p, q, alpha, q2 = _family_inputs(args)
    build = family_builder(args.family, A, B, p=p, q=q, alpha=alpha, q2=q2, seed=args.seed)
    params = {"p": p, "q1": q, "alpha": alpha}
    if q2 is not None:
        params["q2"] = q2
    return A, B, build, params


def cmd_witness(args) -> tuple[dict, int]:
    A, B, build, params = _builder(args)
    fam = build(args.size)
    report = {"family": args.family, "size": args.size, **params, "construction": fam.to_dict()}
    if args.family in PAIR_FAMILIES:
        sep = find_separating_points(A, B, args.size, seed=args.seed)
        report["separation_check"] = sep.check(A, B)
    if args.measure:
        cfg = MCConfig(args.samples, args.seed, args.method, args.workers)
        members = [("a", fam.a), ("b", fam.b)] if args.family in PAIR_FAMILIES else [("norm", fam)]
        report["measured"] = {k: f.measure(cfg.method, cfg.samples, cfg.seed, cfg.workers).to_dict() for k, f in members}
    cfg = MCConfig(args.samples, args.seed, args.method, args.workers)
    report["family_manifest"] = manifest(args.family, A, B, [args.size], cfg, **params)
    return report, EXIT_OK


def cmd_verify(args) -> tuple[dict, int]:
    A, B, build, params = _builder(args)
    cfg = MCConfig(args.samples, args.seed, args.method, args.workers)
    law = verify_norm_law(build, args.sizes, cfg, family_axis(args.family))
    report = {"family": args.family, **params, "law": law.to_dict(),
              "family_manifest": manifest(args.family, A, B, args.sizes, cfg, **params)}
    if args.out:
        _write_csv(args.out, law.rows)
    return report, EXIT_INCONCLUSIVE if law.inconclusive else EXIT_OK


COMMANDS = {
    "expansive": cmd_expansive,
    "orbit": cmd_orbit,
    "classify": cmd_classify,
    "norm": cmd_norm,
    "witness": cmd_witness,
    "verify": cmd_verify,
}

_NOT_PARAMS = {"replay", "out", "format", "command"}


def _csv_text(rows: list) -> str:
    buf = _io.StringIO()
    keys = list(dict.fromkeys(k for r in rows for k in r))
    w = csv.DictWriter(buf, fieldnames=keys, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


def _write_csv(path: str, rows: list) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(_csv_text(rows))


def _flatten(obj, prefix="") -> list:
    out = []
    if isinstance(obj, dict):
        for k, v in obj.items():
            out.extend(_flatten(v, f"{prefix}{k}."))
    elif isinstance(obj, list) and obj and isinstance(obj[0], dict):
        for i, v in enumerate(obj):
            out.extend(_flatten(v, f"{prefix}{i}."))
    else:
        out.append({"key": prefix.rstrip("."), "value": json.dumps(obj) if isinstance(obj, list) else obj})
    return out


def _apply_replay(args, parser):
    data = _read(args.replay)
    m = data.get("manifest", data) if isinstance(data, dict) else None
    if not isinstance(m, dict) or m.get("command") != args.command or not isinstance(m.get("params"), dict):
        raise InvalidInput(f"{args.replay} is not a '{args.command}' run manifest")
    for k, v in m["params"].items():
        if not hasattr(args, k):
            raise InvalidInput(f"manifest parameter {k!r} is unknown to '{args.command}'")
        setattr(args, k, v)
    return args


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError(parser.format_help())
        if args.replay:
            args = _apply_replay(args, parser)
        params = {k: v for k, v in sorted(vars(args).items()) if k not in _NOT_PARAMS}
        t0 = time.perf_counter()
        report, code = COMMANDS[args.command](args)
        elapsed = time.perf_counter() - t0
    except UsageError as exc:
        print(str(exc), file=stderr)
        return EXIT_INVALID
    except (InvalidInput, InvalidCombination, InvalidState, NotFound, CapacityError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=stdout)
        return EXIT_INVALID
    except IndeterminateError as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=stdout)
        return EXIT_INCONCLUSIVE
    report["manifest"] = {"command": args.command, "params": params, "version": __version__,
                          "seed": getattr(args, "seed", None)}
    report["timing"] = {"seconds": round(elapsed, 6)}
    if args.format == "csv":
        rows = report["law"]["rows"] if args.command == "verify" else _flatten(
            {k: v for k, v in report.items() if k != "manifest"})
        stdout.write(_csv_text(rows))
    else:
        stdout.write(json.dumps(report, indent=2, sort_keys=True, default=str) + "\n")
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
