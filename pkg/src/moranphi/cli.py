"""Command-line front end.

Every subcommand prints one JSON report on stdout::

    {
      "schema_version": "1.0",
      "command": {"name": ..., "args": {...}},
      "model_digest": "sha256:<hex>",
      "results": {...},
      "tolerances": {...}
    }

``--timing`` adds ``"wall_time_s"``; it is off by default so that reports
are byte-for-byte reproducible.  Floats are written with ``repr`` and
round-trip exactly.

Exit codes: 0 success, 2 invalid model document, 3 unmet precondition,
4 internal consistency failure, 64 usage error, 66 unreadable input file.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time

from . import dims, k2, sim, synth
from .errors import ConsistencyError, ModelValidationError, PreconditionError
from .gcore import DEFAULT_CAP
from .model import (
    load_k2,
    load_model,
    model_to_document,
    to_k2,
    validate_model,
)

__all__ = ["run", "main", "EXIT_OK", "EXIT_VALIDATION", "EXIT_PRECONDITION",
           "EXIT_CONSISTENCY", "EXIT_USAGE", "EXIT_NOINPUT"]

SCHEMA_VERSION = "1.0"
EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_PRECONDITION = 3
EXIT_CONSISTENCY = 4
EXIT_USAGE = 64
EXIT_NOINPUT = 66


class UsageError(Exception):
    pass


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}" if self.prog != "moranphi" else message)


def _read_text(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except (OSError, UnicodeDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc


def _load(path):
    """Parsed document, model and (for exponent-form documents) the K2 spec."""
    text = _read_text(path)
    model = load_model(text)
    try:
        doc = json.loads(text)
    except json.JSONDecodeError:
        doc = {}
    spec = load_k2(doc) if isinstance(doc, dict) and "alphas" in doc else None
    return model, spec


def _digest(model):
    canon = json.dumps(model_to_document(model), sort_keys=True, separators=(",", ":"))
    return "sha256:" + hashlib.sha256(canon.encode("utf-8")).hexdigest()


def _k2_spec(model, spec, base):
    if spec is not None and base is None:
        return spec
    return to_k2(model.ifs_family(), 0.5 if base is None else base)


# subcommands: each returns (results, tolerances)

def _cmd_validate(args, model, spec):
    report = validate_model(model)
    res = {
        "ok": report.ok,
        "violations": list(report.violations),
        "k": model.k,
        "mode": model.mode,
        "n_atoms": model.n_atoms if model.has_weights else None,
        "n_ifs_atoms": len(model.ifs_marginal()),
        "A": model.min_scale,
        "B": model.max_scale_sum,
        "tau": model.tau,
        "k2_convertible": model.k == 2 and model.mode == "independent"
        and len(model.weight_atoms) <= 1,
    }
    return res, {}


def _cmd_hausdorff(args, model, spec):
    return {"D": dims.hausdorff_d(model, tol=args.tol)}, {"set_tol": args.tol}


def _cmd_dims(args, model, spec):
    rep = dims.dim_report(model, tol=args.tol, method=args.method, cap=args.cap)
    return rep.to_dict(), dict(rep.tolerances, cap=args.cap)


def _cmd_synth(args, model, spec):
    upper = args.direction == "upper"
    if args.single:
        fn = synth.attain_updim_single if upper else synth.attain_lowdim_single
    else:
        fn = synth.synth_upper_dependent if upper else synth.synth_lower_dependent
    out = fn(model.ifs_family(), args.target)
    res = out.to_dict()
    res["D"] = dims.hausdorff_d(model)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(res["model"], fh, indent=2)
            fh.write("\n")
        res["written"] = args.out
    return res, {"verify_tol": synth.VERIFY_TOL}


def _cmd_gap(args, model, spec):
    fam = model.ifs_family()
    verdict = synth.detect_gap(fam)
    res = verdict.to_dict()
    if not args.no_margin:
        up = synth.min_updim_single(fam, grid=args.grid)
        low = synth.max_lowdim_single(fam, grid=args.grid)
        res["min_updim_single"] = {"p": list(up.weights), "value": up.value,
                                   "margin": up.value - verdict.D}
        res["max_lowdim_single"] = {"p": list(low.weights), "value": low.value,
                                    "margin": verdict.D - low.value}
    return res, {"gap_tol": synth.GAP_TOL, "grid": args.grid}


def _cmd_mink2(args, model, spec):
    s = _k2_spec(model, spec, args.base)
    res = {"method": args.method, "base": s.base, "mirrored": s.mirrored, "N": s.N,
           "D": dims.hausdorff_d(s.ifs_model())}
    if args.method == "algorithm":
        r = k2.min_m_algorithm(s)
        res.update(p_star=r.p, d_star=r.d, trace=r.trace.to_dict())
    elif args.method == "grid":
        r = k2.min_m_grid(s, n_grid=args.grid)
        res.update(p_star=r.p, d_star=r.d)
    else:
        r = k2.two_ifs_closed_form(s)
        res.update(p_star=r.p, d_star=r.d, case=r.case)
    return res, {"root_tol": 1e-12, "residual_tol": k2.RESIDUAL_TOL}


def _cmd_fj_table(args, model, spec):
    s = _k2_spec(model, spec, args.base)
    text = k2.fj_table_csv(s, args.points)
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return {"written": args.out, "rows": args.points, "columns": s.L + 3,
            "base": s.base, "mirrored": s.mirrored}, {}


def _cmd_simulate(args, model, spec):
    selectors = "all" if args.fixed_selectors else None
    summary = sim.empirical_dims(model, args.depth, args.trials, args.seed,
                                 selectors=selectors, threads=args.threads)
    res = summary.to_dict(tol=args.band)
    res["prng"] = "PCG64"
    if args.emit_intervals:
        seq = sim.sample_sequence(model, max(args.depth, args.interval_depth), args.seed, 0)
        table = sim.emit_intervals(model, seq, args.interval_depth, out=args.emit_intervals,
                                   address_prefix=args.interval_prefix)
        res["intervals"] = {"written": args.emit_intervals, "rows": len(table),
                            "depth": args.interval_depth, "trial": 0}
    return res, {"band": args.band}


def _build_parser():
    p = _Parser(prog="moranphi", description="Dimensions of random Moran sets and measures.")
    p.add_argument("--timing", action="store_true", help="add wall_time_s to the report")
    sub = p.add_subparsers(dest="command", metavar="command", parser_class=_Parser)
    sub.required = True

    def add(name, fn, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("model", help="model document (JSON)")
        sp.set_defaults(fn=fn)
        return sp

    add("validate", _cmd_validate, "check a model document")
    sp = add("hausdorff", _cmd_hausdorff, "Hausdorff dimension D of the random set")
    sp.add_argument("--tol", type=float, default=1e-12)
    sp = add("dims", _cmd_dims, "D and both measure dimensions")
    sp.add_argument("--method", choices=["auto", "bisect", "enum", "both"], default="auto")
    sp.add_argument("--tol", type=float, default=1e-10)
    sp.add_argument("--cap", type=int, default=DEFAULT_CAP)

    sp = sub.add_parser("synth", help="weights realising a target dimension")
    sp.add_argument("direction", choices=["upper", "lower"])
    sp.add_argument("model")
    sp.add_argument("--target", type=float, required=True)
    sp.add_argument("--out", help="write the synthesised model document here")
    sp.add_argument("--single", action="store_true",
                    help="use one weight vector for every IFS instead of per-atom weights")
    sp.set_defaults(fn=_cmd_synth)

    sp = add("gap", _cmd_gap, "gap verdict for independent weights")
    sp.add_argument("--grid", type=int, default=64)
    sp.add_argument("--no-margin", action="store_true", help="skip the single-weight searches")
    sp = add("mink2", _cmd_mink2, "minimise M(p) for a K = 2 family")
    sp.add_argument("--method", choices=["algorithm", "grid", "closed-form"], default="algorithm")
    sp.add_argument("--base", type=float)
    sp.add_argument("--grid", type=int, default=4001)
    sp = add("fj-table", _cmd_fj_table, "CSV of the f_j curves and M")
    sp.add_argument("--out", required=True)
    sp.add_argument("--points", type=int, default=1000)
    sp.add_argument("--base", type=float)
    sp = add("simulate", _cmd_simulate, "Monte Carlo path ratios")
    sp.add_argument("--depth", type=int, required=True, help="path length")
    sp.add_argument("--trials", type=int, required=True)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--threads", type=int, default=1)
    sp.add_argument("--band", type=float, default=0.02)
    sp.add_argument("--fixed-selectors", action="store_true",
                    help="also follow every fixed selector")
    sp.add_argument("--emit-intervals", metavar="CSV")
    sp.add_argument("--interval-depth", type=int, default=8)
    sp.add_argument("--interval-prefix")
    return p


def _echo(args):
    skip = {"fn", "timing"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def run(argv=None, stdout=None, stderr=None) -> int:
    """Run one command; returns the exit code."""
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    argv = list(sys.argv[1:] if argv is None else argv)

    def fail(code, msg):
        stderr.write(f"moranphi: error: {msg}\n")
        return code

    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        return fail(EXIT_USAGE, str(exc))
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    start = time.perf_counter()
    try:
        model, spec = _load(args.model)
        results, tols = args.fn(args, model, spec)
    except InputError as exc:
        return fail(EXIT_NOINPUT, str(exc))
    except ModelValidationError as exc:
        if args.command == "validate":
            results = {"ok": False, "violations": list(getattr(exc, "violations", None) or [str(exc)])}
            report = {"schema_version": SCHEMA_VERSION,
                      "command": {"name": args.command, "args": _echo(args)},
                      "model_digest": None, "results": results, "tolerances": {}}
            stdout.write(json.dumps(report, indent=2) + "\n")
        return fail(EXIT_VALIDATION, str(exc))
    except PreconditionError as exc:
        return fail(EXIT_PRECONDITION, str(exc))
    except ConsistencyError as exc:
        return fail(EXIT_CONSISTENCY, str(exc))
    except OSError as exc:
        return fail(EXIT_NOINPUT, str(exc))
    report = {
        "schema_version": SCHEMA_VERSION,
        "command": {"name": args.command, "args": _echo(args)},
        "model_digest": _digest(model),
        "results": results,
        "tolerances": tols,
    }
    if args.timing:
        report["wall_time_s"] = time.perf_counter() - start
    stdout.write(json.dumps(report, indent=2, allow_nan=False) + "\n")
    return EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
