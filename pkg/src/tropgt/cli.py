"""Command line interface: design | decode | bounds | oracle | simulate | plot.

All file formats use the instance JSON schema from tropgt.core (INFINITY is
encoded as the integer 0 in level lists).  Outputs are written atomically
(temp file + rename).  Exit codes: 0 success, 2 invalid input, 3 enumeration
budget exceeded; errors are emitted as a JSON object on stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile

from . import bounds as bnd
from .core import (INFINITY, Instance, Profile, compute_mu, encode_levels,
                   instance_from_json, is_satisfying, unexplained_tests)
from .decoders import DECODERS, TIE_BREAKS, decode_scomp
from .designs import DesignSpec, design_from_spec
from .errors import BudgetError, InputError
from .oracle import (DEFAULT_BUDGET, count_diagnostics, enumerate_satisfying,
                     exact_decoder_error, optimal_success_probability)
from .plot import PlotStyle, emit_plot
from .sim import sweep

CSV_COLUMNS = ("axis_name", "axis_value", "algorithm", "design_kind", "trials",
               "successes_U", "successes_K", "rate", "ci_lo", "ci_hi", "seconds")


def _write_text(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tropgt-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _json_text(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


def _load_json(path: str) -> dict:
    try:
        with open(path) as handle:
            return json.load(handle)
    except FileNotFoundError:
        raise InputError(f"no such file: {path}")
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}")


def _load_instance(path: str) -> Instance:
    return instance_from_json(_load_json(path))


def _load_csv(path: str) -> list[dict]:
    try:
        with open(path, newline="") as handle:
            return list(csv.DictReader(handle))
    except FileNotFoundError:
        raise InputError(f"no such file: {path}")


def _csv_text(columns, rows) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(row[c]) for c in columns])
    return buffer.getvalue()


def _cell(value) -> str:
    if isinstance(value, float):
        return f"{value:.10g}"
    return str(value)


def _parse_profile(text: str, n: int) -> Profile:
    try:
        counts = tuple(int(part) for part in text.split(","))
    except ValueError:
        raise InputError(f"--profile must be comma-separated integers, got '{text}'")
    return Profile(n=n, counts=counts)


def _parse_grid(text: str) -> list[int]:
    parts = text.split(":")
    if len(parts) != 3:
        raise InputError("--T-grid must be start:stop:step")
    try:
        start, stop, step = (int(p) for p in parts)
    except ValueError:
        raise InputError("--T-grid must contain integers")
    if step < 1 or stop < start or start < 0:
        raise InputError("--T-grid needs 0 <= start <= stop and step >= 1")
    return list(range(start, stop + 1, step))


# --- subcommands ------------------------------------------------------------


def _cmd_design(args) -> int:
    spec = DesignSpec(kind=args.kind, T=args.T, N=args.N, p=args.p, nu=args.nu,
                      L=args.L)
    if spec.nu is not None and args.K is None:
        raise InputError("--nu needs --K to resolve the design parameter")
    design = design_from_spec(spec, args.K or 0, args.seed)
    doc = {"d": args.d, "N": design.N, "T": design.T,
           "matrix": design.matrix.astype(int).tolist()}
    if args.d is None:
        del doc["d"]
    _write_text(_json_text(doc), args.out)
    return 0


def _cmd_decode(args) -> int:
    instance = _load_instance(getattr(args, "in"))
    if instance.outcomes is None:
        raise InputError("instance file has no 'outcomes' to decode")
    if args.algo == "scomp":
        result = decode_scomp(instance.design, instance.outcomes, tie=args.tie,
                              count_all_level_tests=args.count_all_level_tests)
    else:
        result = DECODERS[args.algo](instance.design, instance.outcomes)
    unexplained = unexplained_tests(instance.design, instance.outcomes, result.estimate)
    report = {
        "algorithm": args.algo,
        "estimate": encode_levels(result.estimate),
        "mu": encode_levels(compute_mu(instance.design, instance.outcomes)),
        "unexplained_tests": [int(t) for t in unexplained],
        "unexplained_count": int(unexplained.size),
        "satisfying": is_satisfying(instance.design, instance.outcomes, result.estimate),
    }
    if args.algo == "scomp":
        report["tie"] = args.tie
    _write_text(_json_text(report), args.out)
    return 0


def _require(args, names) -> None:
    for name in names:
        if getattr(args, name.lstrip("-").replace("-", "_"), None) is None:
            raise InputError(f"bounds --what {args.what} needs {name}")


def _cmd_bounds(args) -> int:
    rows: list[dict] = []
    if args.what == "dd-thresholds":
        _require(args, ("--N", "--profile", "--nu"))
        profile = _parse_profile(args.profile, args.N)
        th = bnd.dd_thresholds(profile, args.nu)
        columns = ("level", "psi", "tests_needed")
        for r, (psi_r, t_r) in enumerate(zip(th.psi, th.t_levels), start=1):
            rows.append({"level": r, "psi": psi_r, "tests_needed": t_r})
        rows.append({"level": "inf", "psi": th.psi[-1], "tests_needed": th.t_infinity})
        rows.append({"level": "max", "psi": "", "tests_needed": th.t_max()})
    else:
        _require(args, ("--T-grid",))
        grid = _parse_grid(args.T_grid)
        if args.what == "counting":
            _require(args, ("--N",))
            if args.profile is None and args.K is None:
                raise InputError("bounds --what counting needs --K and/or --profile")
            profile = _parse_profile(args.profile, args.N) if args.profile else None
            columns = ("T", "classical") + (("tropical",) if profile else ())
            K = args.K if args.K is not None else profile.k
            for T in grid:
                row = {"T": T, "classical": bnd.classical_counting_bound(args.N, K, T)}
                if profile:
                    row["tropical"] = bnd.tropical_counting_bound(profile, T)
                rows.append(row)
        elif args.what == "comp":
            _require(args, ("--N", "--profile", "--p"))
            profile = _parse_profile(args.profile, args.N)
            columns = ("T", "raw", "clamped")
            for T in grid:
                raw = bnd.comp_error_bound(profile, args.p, T)
                rows.append({"T": T, "raw": raw, "clamped": min(1.0, raw)})
        elif args.what == "comp-summands":
            _require(args, ("--N", "--profile", "--p"))
            profile = _parse_profile(args.profile, args.N)
            names = [f"level_{r}" for r in range(1, profile.d + 1)] + ["level_inf"]
            columns = ("T", *names)
            for T in grid:
                summands = bnd.comp_bound_summands(profile, args.p, T)
                rows.append({"T": T, **dict(zip(names, summands.clamped))})
        elif args.what == "dd-converse":
            _require(args, ("--N", "--profile", "--p"))
            profile = _parse_profile(args.profile, args.N)
            columns = ("T", "lower_bound")
            for T in grid:
                rows.append({"T": T,
                             "lower_bound": bnd.dd_converse_lower_bound(profile, args.p, T)})
        elif args.what == "phi":
            _require(args, ("--cells", "--q"))
            columns = ("T", "phi", "upper_bound")
            curve = bnd.phi_curve(args.cells, args.q, max(grid))
            for T in grid:
                rows.append({"T": T, "phi": float(curve[T]),
                             "upper_bound": bnd.phi_upper_bound(args.cells, args.q, T)})
        else:  # pragma: no cover - argparse restricts choices
            raise InputError(f"unknown --what {args.what}")
    if args.format == "json":
        _write_text(_json_text(rows), args.out)
    else:
        _write_text(_csv_text(columns, rows), args.out)
    return 0


def _cmd_oracle(args) -> int:
    instance = _load_instance(getattr(args, "in"))
    profile = None
    if args.profile is not None:
        profile = _parse_profile(args.profile, instance.design.N)
    elif instance.truth is not None:
        profile = instance.profile

    if args.mode == "satisfying":
        if instance.outcomes is None:
            raise InputError("mode 'satisfying' needs outcomes in the instance file")
        sat = enumerate_satisfying(instance.design, instance.outcomes, instance.d,
                                   profile=profile if args.restrict_profile else None,
                                   budget=args.budget)
        report = {"mode": "satisfying", "count": len(sat),
                  "restricted_to_profile": sat.restricted_to_profile,
                  "vectors": [encode_levels(v) for v in sat.vectors]}
    elif args.mode == "optimal":
        if profile is None:
            raise InputError("mode 'optimal' needs a truth vector or --profile")
        value = optimal_success_probability(instance.design, profile, budget=args.budget)
        report = {"mode": "optimal", "numerator": value.numerator,
                  "denominator": value.denominator, "value": float(value)}
    elif args.mode == "exact-error":
        if profile is None:
            raise InputError("mode 'exact-error' needs a truth vector or --profile")
        if args.algo == "scomp":
            def decoder(design, outcomes):
                return decode_scomp(design, outcomes, tie=args.tie)
        else:
            decoder = DECODERS[args.algo]
        value = exact_decoder_error(instance.design, profile, decoder, budget=args.budget)
        report = {"mode": "exact-error", "algorithm": args.algo,
                  "numerator": value.numerator, "denominator": value.denominator,
                  "value": float(value)}
    else:  # diagnostics
        if instance.truth is None:
            raise InputError("mode 'diagnostics' needs a truth vector in the instance file")
        diag = count_diagnostics(instance.design, instance.truth, instance.d)
        levels = range(1, diag.d + 1)
        report = {
            "mode": "diagnostics",
            "m_infinity": diag.m_infinity,
            "m_level": {str(r): diag.m_level[r] for r in levels},
            "m_single": {str(r): list(diag.m_single[r]) for r in levels},
            "m_plus": {str(r): diag.m_plus[r] for r in levels},
            "l_single": {str(r): list(diag.l_single[r]) for r in levels},
            "h": {("inf" if r == INFINITY else str(r)): diag.h[r]
                  for r in [0, *levels, INFINITY]},
            "g": {str(r): diag.g[r] for r in [0, *levels]},
            "items_by_level": {str(r): list(diag.items_by_level[r]) for r in levels},
            "min_l": (None if diag.min_l() is math.inf else int(diag.min_l())),
            "dd_succeeds": diag.dd_succeeds(),
        }
    _write_text(_json_text(report), args.out)
    return 0


def _cmd_simulate(args) -> int:
    config = _load_json(args.config)
    rows = sweep(config, workers=args.threads, seed=args.seed)
    _write_text(_csv_text(CSV_COLUMNS, rows), args.out)
    return 0


def _cmd_plot(args) -> int:
    results = _load_csv(args.results)
    bound_rows = _load_csv(args.bounds) if args.bounds else None
    style = PlotStyle(title=args.title, xlabel=args.xlabel, ylabel=args.ylabel,
                      log_x=args.log_x)
    _write_text(emit_plot(results, bound_rows, style), args.out)
    return 0


# --- parser -------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors surface as JSON like everything else
        raise InputError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="tropgt",
        description="Tropical (min-outcome) group testing toolkit. Level files "
                    "encode INFINITY (non-defective) as the integer 0.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("design", help="sample a random test design")
    p.add_argument("--kind", required=True, choices=("bernoulli", "near-constant-column"))
    p.add_argument("--T", required=True, type=int)
    p.add_argument("--N", required=True, type=int)
    p.add_argument("--p", type=float)
    p.add_argument("--nu", type=float)
    p.add_argument("--K", type=int, help="defective count used to resolve --nu")
    p.add_argument("--L", type=int, help="column weight (near-constant-column)")
    p.add_argument("--d", type=int, help="ambient level count to embed in the file")
    p.add_argument("--seed", required=True, type=int)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_design)

    p = sub.add_parser("decode", help="run a decoder on an instance file")
    p.add_argument("--in", required=True, help="instance JSON with matrix and outcomes")
    p.add_argument("--algo", required=True, choices=sorted(DECODERS))
    p.add_argument("--tie", default="min", choices=TIE_BREAKS)
    p.add_argument("--count-all-level-tests", action="store_true",
                   help="SCOMP ranks candidates over all outcome-r tests")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_decode)

    p = sub.add_parser("bounds", help="evaluate closed-form bounds on a T grid")
    p.add_argument("--what", required=True,
                   choices=("counting", "comp", "comp-summands", "dd-thresholds",
                            "dd-converse", "phi"))
    p.add_argument("--N", type=int)
    p.add_argument("--K", type=int)
    p.add_argument("--profile", help="comma-separated K_1,...,K_d")
    p.add_argument("--p", type=float)
    p.add_argument("--nu", type=float)
    p.add_argument("--q", type=float, help="cell probability for --what phi")
    p.add_argument("--cells", type=int, help="cell count K for --what phi")
    p.add_argument("--T-grid", dest="T_grid", help="start:stop:step")
    p.add_argument("--format", default="csv", choices=("csv", "json"))
    p.add_argument("--out")
    p.set_defaults(func=_cmd_bounds)

    p = sub.add_parser("oracle", help="exact small-instance enumeration")
    p.add_argument("--in", required=True, help="instance JSON")
    p.add_argument("--mode", required=True,
                   choices=("satisfying", "optimal", "exact-error", "diagnostics"))
    p.add_argument("--profile", help="comma-separated K_1,...,K_d (else taken from truth)")
    p.add_argument("--restrict-profile", action="store_true",
                   help="restrict 'satisfying' to vectors with the profile")
    p.add_argument("--algo", default="comp", choices=sorted(DECODERS))
    p.add_argument("--tie", default="min", choices=TIE_BREAKS)
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_oracle)

    p = sub.add_parser("simulate", help="run a Monte Carlo sweep config")
    p.add_argument("--config", required=True, help="sweep JSON document")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--threads", type=int, help="worker processes")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("plot", help="render result/bound CSVs as a deterministic SVG")
    p.add_argument("--results", required=True)
    p.add_argument("--bounds")
    p.add_argument("--title", default="")
    p.add_argument("--xlabel", default="")
    p.add_argument("--ylabel", default="success probability")
    p.add_argument("--log-x", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_plot)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except BudgetError as exc:
        sys.stderr.write(_json_text({"error": {"type": "budget", "message": str(exc)}}))
        return 3
    except InputError as exc:
        sys.stderr.write(_json_text({"error": {"type": "validation", "message": str(exc)}}))
        return 2


if __name__ == "__main__":
    sys.exit(main())
