"""Command-line front end: one binary, nine subcommands, deterministic
seeded runs, CSV/JSON reports that embed their own run manifest.

Exit codes: 0 success, 1 a verification-style check failed, 2 usage or
resource errors.  Identical flags and seed give byte-identical CSV bodies
and JSON payloads; only the manifest timestamp differs between runs.
"""

from __future__ import annotations

import argparse
import csv
import difflib
import io
import json
import math
import os
import sys
import time
from dataclasses import asdict

import numpy as np

from .bounds import (
    DEFAULT_LEDGER,
    fc_bound,
    lip_entropy_bounds,
    quantization_bit_budget,
    quantized_bound,
    sparse_bound,
    transform_feasibility,
    truncated_bound,
    yang_barron_kappa,
)
from .errors import DomainError, LabError, PreconditionError, ResourceError
from .network import FamilySpec, FiniteSet
from .oracle import cloud_from_configs, dedup_realizations, entropy_sandwich, enumerate_configs
from .pwl import build_packing, dump_packing_csv, exact_min_pairwise_l1, packing_log_lower_bound
from .quantize import verify_covering_property
from .regression import run_rate_experiment

try:
    from importlib.metadata import version as _dist_version

    VERSION = _dist_version("artifact")
except Exception:
    VERSION = "0.0.0"


class _Parser(argparse.ArgumentParser):
    """argparse that turns unknown flags into exit-2 usage errors with a
    nearest-flag suggestion."""

    def error(self, message):
        hint = ""
        if "unrecognized arguments:" in message:
            bad = message.split("unrecognized arguments:")[1].split()
            known = set()
            for action in self._actions:
                known.update(action.option_strings)
            for sub in getattr(self, "_subparsers_map", {}).values():
                for action in sub._actions:
                    known.update(action.option_strings)
            for token in bad:
                if token.startswith("-"):
                    close = difflib.get_close_matches(token, sorted(known), n=1)
                    if close and close[0] == token:
                        hint = " (valid for a different subcommand)"
                        break
                    if close:
                        hint = f" (did you mean {close[0]}?)"
                        break
        self.exit(2, f"{self.prog}: error: {message}{hint}\n")


_STARTED_AT = time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())


def _manifest(args: argparse.Namespace) -> dict:
    flags = {k: v for k, v in sorted(vars(args).items()) if k != "func"}
    return {
        "subcommand": args.subcommand,
        "flags": flags,
        "seed": flags.get("seed"),
        "version": VERSION,
        "started_at": _STARTED_AT,
        "finished_at": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
    }


def _emit_json(payload: dict, manifest: dict, path: str | None):
    doc = {"manifest": manifest}
    doc.update(payload)
    text = json.dumps(doc, sort_keys=True, indent=2, default=_jsonable) + "\n"
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _jsonable(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, tuple):
        return list(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _emit_csv(header: list, rows: list, manifest: dict, path: str | None):
    buf = io.StringIO()
    buf.write("# manifest: " + json.dumps(manifest, sort_keys=True) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_csv_cell(v) for v in row])
    text = buf.getvalue()
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _csv_cell(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _parse_domain(text: str) -> FiniteSet:
    vals = tuple(float(tok) for tok in text.split(",") if tok.strip())
    if not vals:
        raise DomainError(f"empty weight domain {text!r}")
    return FiniteSet(vals)


# -- subcommand bodies ----------------------------------------------------


def _cmd_constants(args) -> int:
    rows = [
        (row["name"], float(row["value"]), row["kind"], row["note"])
        for row in DEFAULT_LEDGER.table()
    ]
    _emit_csv(["name", "value", "kind", "note"], rows, _manifest(args), args.out)
    return 0


def _cmd_bounds(args) -> int:
    if args.family == "fc":
        rep = fc_bound(args.W, args.L, args.B, args.eps, side=args.side)
    elif args.family == "sparse":
        if args.s is None:
            raise PreconditionError("--s is required for the sparse family")
        rep = sparse_bound(args.W, args.L, args.B, args.s, args.eps, side=args.side)
    elif args.family == "quantized":
        if args.a_bits is None or args.b_bits is None:
            raise PreconditionError("--a-bits and --b-bits are required for the quantized family")
        rep = quantized_bound(args.W, args.L, args.a_bits, args.b_bits, args.eps, side=args.side)
    else:
        rep = truncated_bound(args.W, args.L, args.eps, side=args.side)
    _emit_json({"report": rep.to_dict()}, _manifest(args), args.out)
    return 0


def _cmd_quantize_verify(args) -> int:
    spec = FamilySpec(d=args.d, W=args.W, L=args.L, B=args.B)
    report = verify_covering_property(spec, args.eps, trials=args.trials, seed=args.seed)
    _emit_json({"report": report.to_dict()}, _manifest(args), args.out)
    return 0 if report.passed else 1


def _cmd_pack_pwl(args) -> int:
    grid = build_packing(args.N, args.E, args.eps, cap=args.cap)
    payload = {
        "N": grid.N,
        "E": grid.E,
        "eps": grid.eps,
        "levels": grid.M,
        "cardinality": grid.cardinality(),
        "certificate_count": grid.certificate_count(),
        "log2_lower_bound": packing_log_lower_bound(args.N, args.E, args.eps),
        "min_distance_bound": grid.min_distance_bound(),
        "trivial": grid.trivial,
    }
    if args.exact and not grid.trivial:
        payload["exact_min_distance"] = float(exact_min_pairwise_l1(grid))
    if args.csv_out:
        with open(args.csv_out, "w") as fh:
            fh.write("# manifest: " + json.dumps(_manifest(args), sort_keys=True) + "\n")
            fh.write(dump_packing_csv(grid))
    _emit_json(payload, _manifest(args), args.out)
    return 0


def _cmd_cover_oracle(args) -> int:
    domain = _parse_domain(args.domain)
    spec = FamilySpec(d=args.d, W=args.W, L=args.L, B=max(abs(v) for v in domain.values),
                      domain=domain, s=args.s if args.s is not None else math.inf)
    configs, _ = enumerate_configs(spec, cap=args.cap)
    cloud = cloud_from_configs(configs, m=args.grid_m)
    if args.dedup:
        cloud = dedup_realizations(cloud)
    rows = []
    ok = True
    for eps in args.eps:
        lower_n, upper_n = entropy_sandwich(cloud, eps, p=args.p)
        rows.append((eps, lower_n, upper_n))
        ok = ok and lower_n <= upper_n
    _emit_csv(["eps", "lowerN", "upperN"], rows, _manifest(args), args.out)
    return 0 if ok else 1


def _cmd_transform_check(args) -> int:
    overrides = {}
    if args.normalized:
        overrides = {"c_const": 1.0, "C_const": 1.0}
    if args.c_const is not None:
        overrides["c_const"] = args.c_const
    if args.C_const is not None:
        overrides["C_const"] = args.C_const
    verdict = transform_feasibility(
        (args.src_W, args.src_L, args.src_B),
        (args.dst_W, args.dst_L, args.dst_B),
        args.eps,
        **overrides,
    )
    payload = {
        "verdict": verdict.verdict,
        "lhs": verdict.lhs,
        "rhs": verdict.rhs,
        "validity": verdict.validity,
        "details": verdict.details,
    }
    _emit_json(payload, _manifest(args), args.out)
    return 0


def _cmd_bit_budget(args) -> int:
    budget = quantization_bit_budget(args.W, args.L, args.B, args.kappa, c=args.c)
    _emit_json({"budget": asdict(budget)}, _manifest(args), args.out)
    return 0


def _cmd_kappa(args) -> int:
    if args.model != "lip":
        raise DomainError(f"unknown model {args.model!r}; only 'lip' is built in")
    if args.c <= 0 or args.n < 1:
        raise DomainError(f"need c > 0 and n >= 1, got c={args.c}, n={args.n}")
    c = args.c
    kappa = yang_barron_kappa(lambda k: c / k, args.n)
    payload = {"model": args.model, "c": c, "n": args.n, "kappa": kappa,
               "kappa_squared": kappa * kappa}
    _emit_json(payload, _manifest(args), args.out)
    return 0


def _cmd_regress(args) -> int:
    n_list = tuple(int(tok) for tok in args.n_list.split(",") if tok.strip())
    exp = run_rate_experiment(
        target=args.target,
        sigma=args.sigma,
        n_list=n_list,
        width=args.width,
        reps=args.reps,
        restarts=args.restarts,
        steps=args.steps,
        lr=args.lr,
        seed=args.seed,
    )
    rows = [
        (n, depth, med, "" if slope is None else repr(slope))
        for n, depth, med, slope in exp.rows
    ]
    _emit_csv(["n", "depth", "median_err", "slope_so_far"], rows, _manifest(args), args.out)
    eps_n = max(min(n_list) ** (-1.0 / 3.0), 1e-6)
    depth_max = max(r[1] for r in exp.rows)
    lo, hi = lip_entropy_bounds(eps_n)
    summary = {
        "target": exp.target,
        "sigma": exp.sigma,
        "width": exp.width,
        "slope": exp.slope,
        "intercept": exp.intercept,
        "r2": exp.r2,
        "rate_benchmark": -2.0 / 3.0,
        "three_factor": {
            "fc_log_covering_upper": fc_bound(exp.width, depth_max, 1.0, eps_n, side="upper").value,
            "lip_entropy_lower": lo,
            "lip_entropy_upper": hi,
            "kappa_n": yang_barron_kappa(lambda k: hi * eps_n / k, max(n_list)),
        },
    }
    _emit_json(summary, _manifest(args), args.json_out)
    return 0


# -- parser ----------------------------------------------------------------


def build_parser() -> _Parser:
    parser = _Parser(prog="relu-entropy", description=__doc__)
    parser.add_argument("--threads", type=int,
                        default=int(os.environ.get("THREADS", "1")),
                        help="worker cap for inner maps (sequential when 1)")
    subs = parser.add_subparsers(dest="subcommand", required=True)
    parser._subparsers_map = {}

    def sub(name, func, help_text):
        p = subs.add_parser(name, help=help_text)
        p.set_defaults(func=func, subcommand=name)
        p.add_argument("--out", default=None, help="output path (default stdout)")
        parser._subparsers_map[name] = p
        return p

    sub("constants", _cmd_constants, "print the constants ledger with provenance")

    p = sub("bounds", _cmd_bounds, "evaluate a covering-number bound formula")
    p.add_argument("--family", required=True, choices=["fc", "sparse", "quantized", "truncated"])
    p.add_argument("--W", type=int, required=True)
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--B", type=float, default=1.0)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--side", choices=["upper", "lower"], default="upper")
    p.add_argument("--s", type=float, default=None, help="connectivity budget (sparse)")
    p.add_argument("--a-bits", type=int, default=None, help="magnitude bits (quantized)")
    p.add_argument("--b-bits", type=int, default=None, help="fractional bits (quantized)")

    p = sub("quantize-verify", _cmd_quantize_verify, "random-network quantized covering check")
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--W", type=int, required=True)
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--B", type=float, default=1.0)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)

    p = sub("pack-pwl", _cmd_pack_pwl, "build the explicit piecewise-linear packing")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--E", type=float, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--cap", type=int, default=100_000)
    p.add_argument("--exact", action="store_true", help="also compute the exact min distance")
    p.add_argument("--csv-out", default=None, help="write the member table here")

    p = sub("cover-oracle", _cmd_cover_oracle, "greedy packing/covering sandwich on an enumerable family")
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--W", type=int, required=True)
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--domain", required=True, help="comma-separated weight values")
    p.add_argument("--s", type=float, default=None, help="connectivity cap")
    p.add_argument("--eps", type=float, nargs="+", required=True)
    p.add_argument("--p", type=float, default=1.0, help="metric exponent; inf for sup")
    p.add_argument("--grid-m", type=int, default=None)
    p.add_argument("--cap", type=int, default=1_000_000)
    p.add_argument("--dedup", action="store_true")

    p = sub("transform-check", _cmd_transform_check, "entropy necessary condition for family transforms")
    p.add_argument("--src-W", type=int, required=True)
    p.add_argument("--src-L", type=int, required=True)
    p.add_argument("--src-B", type=float, required=True)
    p.add_argument("--dst-W", type=int, required=True)
    p.add_argument("--dst-L", type=int, required=True)
    p.add_argument("--dst-B", type=float, required=True)
    p.add_argument("--eps", type=float, default=0.0)
    p.add_argument("--normalized", action="store_true",
                   help="compare with both entropy constants set to 1")
    p.add_argument("--c-const", type=float, default=None)
    p.add_argument("--C-const", dest="C_const", type=float, default=None)

    p = sub("bit-budget", _cmd_bit_budget, "precision needed to reach a target radius")
    p.add_argument("--W", type=int, required=True)
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--B", type=float, default=1.0)
    p.add_argument("--kappa", type=float, required=True)
    p.add_argument("--c", type=float, default=None, help="override the bits-per-radius constant")

    p = sub("kappa", _cmd_kappa, "solve the critical-radius fixed point")
    p.add_argument("--model", default="lip")
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--n", type=int, required=True)

    p = sub("regress", _cmd_regress, "run the depth-schedule regression rate experiment")
    p.add_argument("--target", default="abs", choices=["abs", "hat", "sine-clamped"])
    p.add_argument("--sigma", type=float, default=0.1)
    p.add_argument("--n-list", default="128,256,512,1024,2048,4096,8192")
    p.add_argument("--width", type=int, default=8)
    p.add_argument("--reps", type=int, default=8)
    p.add_argument("--restarts", type=int, default=8)
    p.add_argument("--steps", type=int, default=700)
    p.add_argument("--lr", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json-out", default=None, help="summary path (default stdout)")

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads < 1:
        parser.exit(2, "relu-entropy: error: --threads must be >= 1\n")
    try:
        return args.func(args)
    except ResourceError as exc:
        count = getattr(exc, "count", None)
        msg = f"relu-entropy: resource limit: {exc}"
        if count is not None:
            msg += f" (exact count {count})"
        sys.stderr.write(msg + "\n")
        return 2
    except (DomainError, PreconditionError) as exc:
        sys.stderr.write(f"relu-entropy: invalid request: {exc}\n")
        return 2
    except LabError as exc:
        sys.stderr.write(f"relu-entropy: failed: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
