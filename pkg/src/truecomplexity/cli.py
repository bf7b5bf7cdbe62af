"""Command-line entry point: ``truecx <command> [options]``.

Every command prints a report ``{"header": {version, config, cost}, "result": ...}``
in JSON, CSV or plain text.  ``verify`` prints JSON lines instead: the header
first, then one check result per line.

Exit codes: 0 ok, 1 usage, 2 budget, 3 contract or precondition, 4 failed checks.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import re
import sys
from dataclasses import asdict, dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from . import field as fd
from .constructions import dependent_counterexample, offdiagonal_example
from .counting import parse_set_spec, set_solution_density, system_average
from .decomposition import load_decomposition, rank_gap_filter, save_decomposition
from .errors import (BudgetError, ConstructionError, ContractError, TrueComplexityError,
                     UnsupportedCharacteristicError)
from .linsys import analyze_system, parse_system
from .multilinear import polynomial_rank
from .poly import PhaseFunction, parse_polynomial, phase_table
from .uniformity import gowers_norm, inverse_search
from .verification import run_check, run_suite

EXIT_OK, EXIT_USAGE, EXIT_BUDGET, EXIT_CONTRACT, EXIT_CHECKS = 0, 1, 2, 3, 4
DEFAULT_P = 5


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


@dataclass
class RunConfig:
    command: str
    p: int | None
    n: int | None
    budget: int
    seed: int
    format: str
    threads: int

    def validate(self):
        if self.p is not None and not fd.is_prime(self.p):
            raise UsageError(f"-p: {self.p} is not prime")
        if self.n is not None and self.n < 1:
            raise UsageError(f"-n: must be positive, got {self.n}")
        if self.budget < 1:
            raise UsageError(f"--budget: must be positive, got {self.budget}")
        if self.threads < 1:
            raise UsageError(f"--threads: must be positive, got {self.threads}")
        return self


# -- input parsing ---------------------------------------------------------------------

def infer_n(text: str) -> int:
    idx = [int(v) for v in re.findall(r"x(\d+)", text)]
    return max(idx, default=1)


def _n_from_size(size: int, p: int, n: int | None, source: str) -> int:
    k = round(math.log(size, p)) if size > 0 else -1
    if k < 1 or p ** k != size:
        raise UsageError(f"{source}: {size} values is not a power of p={p}")
    if n is not None and n != k:
        raise UsageError(f"{source}: {size} values means n={k}, but -n {n} was given")
    return k


def parse_complex(token: str) -> complex:
    parts = token.replace(",", " ").split()
    if len(parts) == 2:
        return complex(float(parts[0]), float(parts[1]))
    return complex(token.replace(" ", "").replace("i", "j"))


def load_table(spec: str, p: int, n: int | None):
    """``poly:<text>``, ``indicator:<set spec>``, a ``.bin`` of complex128, or a text file."""
    if spec.startswith("poly:"):
        text = spec[len("poly:"):]
        return phase_table(parse_polynomial(text, p, n or infer_n(text)))
    if spec.startswith("indicator:"):
        body = spec[len("indicator:"):]
        if n is None:
            raise UsageError("indicator tables need -n")
        return parse_set_spec(body, p, n)
    path = Path(spec)
    if not path.exists():
        raise UsageError(f"table file {spec!r} not found")
    if path.suffix == ".bin":
        vals = np.fromfile(path, dtype="<c16")
    else:
        vals = []
        for lineno, line in enumerate(path.read_text().splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            try:
                vals.append(parse_complex(line))
            except ValueError as exc:
                raise UsageError(f"{spec}:{lineno}: cannot parse {line!r} as a complex number") from exc
        vals = np.array(vals, dtype=complex)
    N = _n_from_size(len(vals), p, n, spec)
    return fd.TableFunction(p, N, vals)


def load_system(path: str, p: int):
    file = Path(path)
    if not file.exists():
        raise UsageError(f"-S: system file {path!r} not found")
    return parse_system(file.read_text(), p)


def _int_list(text: str, flag: str) -> list[int]:
    try:
        return [int(v) for v in text.replace(" ", "").split(",") if v]
    except ValueError as exc:
        raise UsageError(f"{flag}: expected comma-separated integers, got {text!r}") from exc


def _expand(specs: list[str], m: int, flag: str) -> list[str]:
    if len(specs) == 1:
        return specs * m
    if len(specs) != m:
        raise UsageError(f"{flag}: got {len(specs)} specs for {m} forms")
    return specs


# -- output --------------------------------------------------------------------------

def _plain(v):
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, complex):
        return {"re": v.real, "im": v.imag}
    if isinstance(v, np.bool_):
        return bool(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else str(v)
    if isinstance(v, np.ndarray):
        return _plain(v.tolist())
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    return v


def flatten(obj, prefix: str = "") -> dict:
    out = {}
    if isinstance(obj, dict):
        for k, v in obj.items():
            out.update(flatten(v, f"{prefix}{k}."))
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            out.update(flatten(v, f"{prefix}{i}."))
    else:
        out[prefix[:-1]] = obj
    return out


def render(header: dict, records: list, fmt: str, lines: bool = False) -> str:
    header, records = _plain(header), [_plain(r) for r in records]
    if fmt == "json":
        if lines:
            return "\n".join([json.dumps({"header": header}, sort_keys=True)]
                             + [json.dumps(r, sort_keys=True) for r in records]) + "\n"
        return json.dumps({"header": header, "result": records[0]}, indent=2) + "\n"
    rows = [{**flatten(header, "header."), **flatten(r)} for r in records]
    if fmt == "csv":
        cols = []
        for row in rows:
            cols += [c for c in row if c not in cols]
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
        return buf.getvalue()
    chunks = []
    for row in rows:
        chunks.append("\n".join(f"{k}: {v}" for k, v in row.items()))
    return "\n\n".join(chunks) + "\n"


# -- commands --------------------------------------------------------------------------

def cmd_unorm(args, cfg):
    f = load_table(args.f, cfg.p, cfg.n)
    exact = True if args.exact else (False if args.float else None)
    rep = gowers_norm(f, args.k, exact=exact)
    res = {"k": rep.k, "norm": rep.value, "power": rep.power,
           "exact_power": None if rep.exact_power is None else str(rep.exact_power),
           "n": f.N, "p": f.p, "input_kind": "phase" if isinstance(f, PhaseFunction) else "table"}
    return res, rep.cost


def cmd_rank(args, cfg):
    n = cfg.n or infer_n(args.P)
    poly = parse_polynomial(args.P, cfg.p, n)
    rv = polynomial_rank(poly, args.d, allow_small_p=args.allow_small_p, backend=args.backend)
    res = {"polynomial": str(poly), "degree": poly.degree, "d": args.d or poly.degree, "n": n,
           "kernel_count": rv.kernel_count, "domain_size": rv.domain_size, "density": str(rv.density),
           "rank": "inf" if rv.infinite else rv.rank, "exact": rv.is_exact}
    return res, rv.domain_size


def cmd_analyze(args, cfg):
    system = load_system(args.S, cfg.p)
    an = analyze_system(system, args.smax, cs_cap=args.cs_cap)
    for w in an.warnings:
        print(f"warning: {w}", file=sys.stderr)
    return an.to_json(), len(an.verdicts) * system.m


def cmd_count(args, cfg):
    system = load_system(args.S, cfg.p)
    if bool(args.F) == bool(args.A):
        raise UsageError("count: give exactly one of -F (functions) or -A (sets)")
    if args.A:
        if cfg.n is None:
            raise UsageError("count -A: set specs need -n")
        sets = [parse_set_spec(s, cfg.p, cfg.n) for s in _expand(args.A, system.m, "-A")]
        rep = set_solution_density(sets, system, method=args.method)
    else:
        fs = [load_table(s, cfg.p, cfg.n) for s in _expand(args.F, system.m, "-F")]
        subset = _int_list(args.subset, "--subset") if args.subset else None
        if subset is not None:
            subset = [i - 1 for i in subset]
        rep = system_average(fs, system, subset=subset, method=args.method)
    return rep.to_json(), rep.cost


def cmd_offdiag(args, cfg):
    system = load_system(args.S, cfg.p)
    degrees = _int_list(args.degrees, "--degrees")
    w = offdiagonal_example(system, degrees, cfg.n or 2, seed=cfg.seed)
    return w.to_json(), w.average.cost


def cmd_counterexample(args, cfg):
    system = load_system(args.S, cfg.p)
    residues = _int_list(args.residues, "--residues")
    w = dependent_counterexample(system, args.s, cfg.n or 2, residues=residues, seed=cfg.seed)
    return w.to_json(), w.set_report.cost


def cmd_filter(args, cfg):
    dec = load_decomposition(args.decomposition)
    M = args.M if args.M is not None else dec.params.get("M0", dec.combination.M)
    eta = args.eta if args.eta is not None else dec.params.get("eta")
    degree = args.degree if args.degree is not None else dec.params.get("k")
    rep = rank_gap_filter(dec.f, dec.combination, dec.g, dec.h, args.epsilon, M, args.R, eta=eta, degree=degree)
    res = rep.to_json()
    if args.save:
        out = rep.decomposition
        out.params.update(epsilon=5 * args.epsilon, R=args.R)
        save_decomposition(out, args.save)
        res["saved"] = str(args.save)
    m = degree or max(dec.combination.degrees, default=1)
    return res, fd.domain_size(dec.f.p, dec.f.N) ** 2 * max(1, m)


def cmd_search(args, cfg):
    f = load_table(args.f, cfg.p, cfg.n)
    mode = "sampling" if args.samples else "exhaustive"
    res = inverse_search(f, args.d, mode=mode, samples=args.samples or 0, seed=cfg.seed)
    c = res.correlation
    out = {"polynomial": str(res.polynomial), "correlation": {"re": c.real, "im": c.imag}, "abs": abs(c),
           "candidates": res.candidates, "mode": res.mode, "seed": res.seed}
    return out, res.candidates * fd.domain_size(f.p, f.N)


def cmd_verify(args, cfg):
    params = {}
    for kv in args.param or []:
        if "=" not in kv:
            raise UsageError(f"--param: expected key=value, got {kv!r}")
        key, val = kv.split("=", 1)
        try:
            params[key] = json.loads(val)
        except json.JSONDecodeError:
            params[key] = val
    if cfg.p is not None:
        params.setdefault("p", cfg.p)
    if args.check:
        results = [run_check(cid, params, cfg.seed) for cid in args.check]
    else:
        results = run_suite(args.suite or "core", p=cfg.p, seed=cfg.seed)
    return [r.to_json() for r in results], sum(r.cost for r in results)


# -- parser --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    g = common.add_argument_group("run configuration")
    g.add_argument("-p", type=int, default=None, help=f"field characteristic (default {DEFAULT_P})")
    g.add_argument("-n", type=int, default=None, help="dimension of F_p^n (inferred from inputs when possible)")
    g.add_argument("--budget", type=int, default=None, help="enumeration cap in points (env TRUECX_BUDGET)")
    g.add_argument("--threads", type=int, default=None, help="worker threads (env TRUECX_THREADS)")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--format", choices=("json", "csv", "text"), default="json")
    g.add_argument("-o", "--output", help="write the report here instead of stdout")

    parser = _Parser(prog="truecx", description="True complexity toolkit for linear systems over F_p^n.")
    parser.add_argument("--version", action="version", version=f"truecx {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("unorm", parents=[common], help="Gowers U^k norm of a table or phase")
    s.add_argument("-f", required=True, help="table file, .bin, poly:<text> or indicator:<set>")
    s.add_argument("-k", type=int, required=True)
    mode = s.add_mutually_exclusive_group()
    mode.add_argument("--exact", action="store_true", help="force exact residue counting (phases only)")
    mode.add_argument("--float", action="store_true", help="force floating-point evaluation")
    s.set_defaults(func=cmd_unorm)

    s = sub.add_parser("rank", parents=[common], help="analytic rank of a polynomial's derived form")
    s.add_argument("-P", required=True, help="polynomial, e.g. 'x1*x2 + 2*x3^2'")
    s.add_argument("-d", type=int, default=None, help="order of the derived form (default: degree)")
    s.add_argument("--backend", choices=("kernel", "expectation", "both"), default="kernel")
    s.add_argument("--allow-small-p", action="store_true", help="permit d >= p")
    s.set_defaults(func=cmd_rank)

    s = sub.add_parser("analyze", parents=[common], help="independence degrees and complexity of a system")
    s.add_argument("-S", required=True, help="system file: one form per line, comma-separated coefficients")
    s.add_argument("--smax", type=int, default=None)
    s.add_argument("--cs-cap", type=int, default=8)
    s.set_defaults(func=cmd_analyze)

    s = sub.add_parser("count", parents=[common], help="averages or set solution densities over a system")
    s.add_argument("-S", required=True)
    s.add_argument("-F", nargs="+", help="function specs, one per form or one for all")
    s.add_argument("-A", nargs="+", help="set specs (poly:<p>:in:<r,..> or index lists)")
    s.add_argument("--method", choices=("reparametrized", "direct"), default="reparametrized")
    s.add_argument("--subset", help="1-based forms to include, e.g. 1,3")
    s.set_defaults(func=cmd_count)

    ex = sub.add_parser("example", help="explicit witness constructions")
    exsub = ex.add_subparsers(dest="example", required=True, parser_class=_Parser)
    s = exsub.add_parser("offdiag", parents=[common], help="phases with product average exactly 1")
    s.add_argument("-S", required=True)
    s.add_argument("--degrees", required=True, help="s_1,..,s_m")
    s.set_defaults(func=cmd_offdiag)
    s = exsub.add_parser("counterexample", parents=[common], help="dependent-system witnesses")
    s.add_argument("-S", required=True)
    s.add_argument("-s", type=int, required=True)
    s.add_argument("--residues", default="0")
    s.set_defaults(func=cmd_counterexample)

    s = sub.add_parser("filter", parents=[common], help="rank-gap filter on a saved decomposition")
    s.add_argument("--decomposition", required=True)
    s.add_argument("--epsilon", type=float, required=True)
    s.add_argument("--R", type=float, required=True)
    s.add_argument("--M", type=float, default=None)
    s.add_argument("--eta", type=float, default=None)
    s.add_argument("--degree", type=int, default=None)
    s.add_argument("--save", help="write the filtered decomposition to this JSON path")
    s.set_defaults(func=cmd_filter)

    s = sub.add_parser("verify", parents=[common], help="run registered identity and bound checks")
    s.add_argument("--check", action="append", help="check id (repeatable)")
    s.add_argument("--suite", default=None, help="suite name (default core)")
    s.add_argument("--param", action="append", help="fixture override key=value (JSON values)")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("search-inverse", parents=[common], help="best-correlating polynomial phase")
    s.add_argument("-f", required=True)
    s.add_argument("-d", type=int, required=True)
    mode = s.add_mutually_exclusive_group()
    mode.add_argument("--exhaustive", action="store_true", help="enumerate every polynomial (default)")
    mode.add_argument("--samples", type=int, default=None)
    s.set_defaults(func=cmd_search)
    return parser


def _config(args) -> RunConfig:
    name = args.command + (f" {args.example}" if args.command == "example" else "")
    p = args.p if args.p is not None or args.command == "verify" else DEFAULT_P
    return RunConfig(name, p, args.n, args.budget or fd.settings.budget, args.seed, args.format,
                     args.threads or fd.settings.threads).validate()


def _fail(code: int, message: str) -> int:
    print(f"truecx: error: {message}", file=sys.stderr)
    return code


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        cfg = _config(args)
    except UsageError as exc:
        return _fail(EXIT_USAGE, str(exc))
    try:
        with fd.budget_limit(cfg.budget), fd.thread_count(cfg.threads):
            result, cost = args.func(args, cfg)
    except UsageError as exc:
        return _fail(EXIT_USAGE, str(exc))
    except BudgetError as exc:
        return _fail(EXIT_BUDGET, f"{exc} (raise --budget or TRUECX_BUDGET to run it)")
    except ContractError as exc:
        return _fail(EXIT_CONTRACT, "precondition violated: " + "; ".join(exc.violations))
    except (ConstructionError, UnsupportedCharacteristicError) as exc:
        return _fail(EXIT_CONTRACT, str(exc))
    except (TrueComplexityError, ValueError, OSError) as exc:
        return _fail(EXIT_USAGE, str(exc))

    header = {"version": __version__, "config": asdict(cfg), "cost": cost}
    lines = args.command == "verify"
    records = result if lines else [result]
    text = render(header, records, cfg.format, lines=lines and cfg.format == "json")
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    if lines and not all(r["pass"] for r in records):
        return EXIT_CHECKS
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
