"""Command line entry point: ``serrin-lab <subcommand> ...``.

Exit codes: 0 success, 2 validation error, 3 numerical non-convergence,
4 a verdict inconsistent with the symmetry theorem.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile

import numpy as np

from serrin_lab import __version__
from serrin_lab.exceptions import (
    ConvergenceError,
    FluxExtractionError,
    FluxInversionError,
    QuadratureError,
    SerrinLabError,
    ValidationError,
)
from serrin_lab.geometry import domain_from_config, symmetry_planes
from serrin_lab.nonlinearity import nonlinearity_from_config, verify_ellipticity
from serrin_lab.radial import make_radial
from serrin_lab.solver import boundary_flux, constancy_defect, make_problem, solve
from serrin_lab import verify as verify_mod

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NONCONVERGENCE = 3
EXIT_INCONSISTENT = 4

_NUMERIC_ERRORS = (ConvergenceError, FluxExtractionError, FluxInversionError, QuadratureError)


def _fmt(x):
    if isinstance(x, str):
        return x
    return "%.17g" % x


def atomic_write(path, text):
    """Write ``text`` to ``path`` through a temporary file and a rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def csv_text(header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _emit(text, out):
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        atomic_write(out, text)


def _load_json(path, what):
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ValidationError(f"cannot read {what} {path!r}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{what} {path!r} is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ValidationError(f"{what} {path!r} must hold a JSON object")
    return data


def _merged(args, keys):
    """Config file values overridden by any flag given on the command line."""
    config = _load_json(args.config, "config") if args.config else {}
    unknown = sorted(set(config) - set(keys))
    if unknown:
        raise ValidationError(f"unknown key(s) in config: {', '.join(unknown)}")
    merged = {k: config.get(k) for k in keys}
    for k in keys:
        value = getattr(args, k, None)
        if value is not None:
            merged[k] = value
    return merged


def _require(opts, *keys):
    missing = [k for k in keys if opts.get(k) is None]
    if missing:
        raise ValidationError(f"missing required parameter(s): {', '.join(missing)}")


def _nl(opts):
    _require(opts, "p")
    return nonlinearity_from_config({"kind": opts.get("nl") or "p_laplacian", "p": opts["p"]})


def _domain(spec):
    if spec is None:
        raise ValidationError("missing required parameter: domain")
    if isinstance(spec, dict):
        return domain_from_config(spec)
    return domain_from_config(_load_json(spec, "domain file"))


def _workers():
    raw = os.environ.get("SERRIN_LAB_THREADS")
    if raw is None:
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise ValidationError(f"SERRIN_LAB_THREADS must be an integer, got {raw!r}") from None
    if n < 1:
        raise ValidationError("SERRIN_LAB_THREADS must be >= 1")
    return min(n, os.cpu_count() or 1)


def _float_or_none(x):
    return None if x is None else float(x)


# subcommands -------------------------------------------------------------


def cmd_ellipticity(args):
    opts = _merged(args, ["nl", "p", "s_min", "s_max", "samples", "tol", "out"])
    nl = _nl(opts)
    kw = {k: opts[k] for k in ("s_min", "s_max", "samples", "tol") if opts[k] is not None}
    report = verify_ellipticity(nl, **kw)
    _emit(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n", opts["out"])
    return EXIT_OK if report.passed else EXIT_VALIDATION


def cmd_radial(args):
    keys = ["nl", "p", "n", "R", "c", "emit", "out", "points", "r_min", "singular_value"]
    opts = _merged(args, keys)
    _require(opts, "n", "R", "c")
    nl = _nl(opts)
    sol = make_radial(nl, opts["n"], opts["R"], opts["c"])
    status = EXIT_OK
    if opts["singular_value"]:
        sv = sol.singular_value()
        print(str(sv))
        if sv.kind == "inconclusive":
            print(f"singular value inconclusive: {sv.detail}", file=sys.stderr)
            status = EXIT_NONCONVERGENCE
    if opts["emit"] == "csv":
        r, v, vp = sol.table(opts["points"] or 1024, _float_or_none(opts["r_min"]))
        defects = [sol.first_integral_defect([x]) for x in r]
        _emit(csv_text(["r", "v", "v_prime", "first_integral_defect"], zip(r, v, vp, defects)), opts["out"])
    elif opts["emit"] is not None:
        raise ValidationError(f"unsupported --emit {opts['emit']!r}; expected 'csv'")
    return status


def cmd_moving_plane(args):
    opts = _merged(args, ["domain", "directions", "emit", "out"])
    domain = _domain(opts["domain"])
    n = opts["directions"] or 64
    entries = symmetry_planes(domain, n, workers=_workers())
    header = ["xi_x", "xi_y", "t_plus", "t_minus", "sum", "case", "contact_x", "contact_y"]
    rows = []
    for e in entries:
        contact = e.reflection.contact
        cx, cy = (np.nan, np.nan) if contact is None else contact
        rows.append([e.xi.x, e.xi.y, e.t_plus, e.t_minus, e.sum, e.reflection.case, cx, cy])
    if opts["emit"] not in (None, "csv"):
        raise ValidationError(f"unsupported --emit {opts['emit']!r}; expected 'csv'")
    _emit(csv_text(header, rows), opts["out"])
    return EXIT_OK


def cmd_solve(args):
    keys = [
        "domain", "nl", "p", "delta", "inner_value", "c", "h", "epsilon",
        "theta", "picard_tol", "max_iter", "emit_field", "emit_flux",
    ]
    opts = _merged(args, keys)
    _require(opts, "h")
    nl = _nl(opts)
    domain = _domain(opts["domain"])
    inner = opts["inner_value"]
    if inner is None or str(inner) == "auto":
        inner = "auto"
    else:
        try:
            inner = float(inner)
        except (TypeError, ValueError):
            raise ValidationError(f"inner_value must be a number or 'auto', got {inner!r}") from None
    problem = make_problem(
        domain,
        nl,
        delta=_float_or_none(opts["delta"]),
        inner_value=inner,
        c=1.0 if opts["c"] is None else opts["c"],
        epsilon=_float_or_none(opts["epsilon"]),
    )
    kw = {k: opts[k] for k in ("theta", "picard_tol", "max_iter") if opts[k] is not None}
    fld = solve(problem, opts["h"], **kw)
    summary = {
        "h": fld.h,
        "unknowns": int(fld.unknown.sum()),
        "iterations": fld.iterations,
        "converged": fld.converged,
        "residual_norm": fld.residual_norm,
        "delta": problem.delta,
        "inner_value": problem.inner_value,
        "max_principle": fld.range_check(),
    }
    if opts["emit_field"]:
        atomic_write(opts["emit_field"], csv_text(["x", "y", "u"], fld.to_rows()))
    if fld.converged:
        trace = boundary_flux(fld)
        cd = constancy_defect(trace)
        summary.update(mean_flux=cd.mean_flux, defect=cd.defect if cd.defined else None,
                       flux_samples=len(trace), dropped=trace.dropped)
        if opts["emit_flux"]:
            atomic_write(opts["emit_flux"], csv_text(["arc_s", "nx", "ny", "du_dnu"], trace.to_rows()))
    print(json.dumps(summary, indent=2, sort_keys=True))
    if not fld.converged:
        print(f"Picard iteration did not converge in {fld.iterations} steps", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    return EXIT_OK


_VERIFY_KEYS = {
    "forward": {"R", "c", "nl", "h_ladder", "delta", "forward_tol", "n_directions", "solver"},
    "contrapositive": {"domain", "c", "nl", "h_ladder", "delta", "separation", "n_directions", "solver"},
    "sweep": {"domain", "n_directions"},
}
_SOLVER_KEYS = {"theta", "picard_tol", "max_iter", "cg_tol"}


def cmd_verify(args):
    if not args.config:
        raise ValidationError("verify needs --config")
    config = _load_json(args.config, "config")
    allowed = _VERIFY_KEYS[args.kind]
    unknown = sorted(set(config) - allowed)
    if unknown:
        raise ValidationError(f"unknown key(s) in {args.kind} config: {', '.join(unknown)}")
    solver = config.get("solver") or {}
    if not isinstance(solver, dict) or set(solver) - _SOLVER_KEYS:
        raise ValidationError(f"solver block accepts only {sorted(_SOLVER_KEYS)}")
    workers = _workers()
    if args.kind == "sweep":
        summary = verify_mod.run_symmetry_sweep(
            _domain(config.get("domain")), config.get("n_directions", 64), workers
        )
        body = {"schema": verify_mod.SCHEMA, "experiment": "sweep",
                "parameters": config, "geometry_summary": summary}
        _emit(json.dumps(body, indent=2, sort_keys=True) + "\n", args.out)
        return EXIT_OK
    if "nl" not in config:
        raise ValidationError("config needs an 'nl' block")
    nl = nonlinearity_from_config(config["nl"])
    if "h_ladder" not in config or not isinstance(config["h_ladder"], list):
        raise ValidationError("config needs an 'h_ladder' list")
    common = dict(
        h_ladder=config["h_ladder"],
        delta=config.get("delta"),
        n_directions=config.get("n_directions", 32),
        solver_options=solver,
        workers=workers,
    )
    if args.kind == "forward":
        report = verify_mod.run_forward(
            config.get("R", 1.0), config.get("c", 1.0), nl,
            forward_tol=config.get("forward_tol", verify_mod.FORWARD_TOL), **common,
        )
    else:
        report = verify_mod.run_contrapositive(
            _domain(config.get("domain")), nl, c=config.get("c", 1.0),
            separation=config.get("separation", verify_mod.SEPARATION), **common,
        )
    _emit(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n", args.out)
    print(f"verdict: {report.verdict} ({report.reason})", file=sys.stderr)
    if report.verdict == verify_mod.INCONSISTENT:
        return EXIT_INCONSISTENT
    if report.verdict == verify_mod.INCONCLUSIVE and report.nonconverged:
        return EXIT_NONCONVERGENCE
    return EXIT_OK


# parser ------------------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(prog="serrin-lab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON file; explicit flags take precedence")
        return p

    def nl_flags(p):
        p.add_argument("--nl", choices=["p_laplacian", "bounded_gradient"])
        p.add_argument("--p", type=float)

    p = common(sub.add_parser("ellipticity", help="sample the ellipticity ratio"))
    nl_flags(p)
    p.add_argument("--s-min", dest="s_min", type=float)
    p.add_argument("--s-max", dest="s_max", type=float)
    p.add_argument("--samples", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--out")
    p.set_defaults(func=cmd_ellipticity)

    p = common(sub.add_parser("radial", help="radial oracle profile and singular value"))
    nl_flags(p)
    p.add_argument("--n", type=int)
    p.add_argument("--R", type=float)
    p.add_argument("--c", type=float)
    p.add_argument("--emit", choices=["csv"])
    p.add_argument("--out")
    p.add_argument("--points", type=int)
    p.add_argument("--r-min", dest="r_min", type=float)
    p.add_argument("--singular-value", dest="singular_value", action="store_true", default=None)
    p.set_defaults(func=cmd_radial)

    p = common(sub.add_parser("moving-plane", help="critical reflections over a direction sweep"))
    p.add_argument("--domain", help="domain JSON file")
    p.add_argument("--directions", type=int)
    p.add_argument("--emit", choices=["csv"])
    p.add_argument("--out")
    p.set_defaults(func=cmd_moving_plane)

    p = common(sub.add_parser("solve", help="finite-difference solve on the excised domain"))
    p.add_argument("--domain", help="domain JSON file")
    nl_flags(p)
    p.add_argument("--delta", type=float)
    p.add_argument("--inner-value", dest="inner_value")
    p.add_argument("--c", type=float)
    p.add_argument("--h", type=float)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--theta", type=float)
    p.add_argument("--picard-tol", dest="picard_tol", type=float)
    p.add_argument("--max-iter", dest="max_iter", type=int)
    p.add_argument("--emit-field", dest="emit_field")
    p.add_argument("--emit-flux", dest="emit_flux")
    p.set_defaults(func=cmd_solve)

    p = common(sub.add_parser("verify", help="forward, contrapositive or sweep experiment"))
    p.add_argument("kind", choices=sorted(_VERIFY_KEYS))
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValidationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except _NUMERIC_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except SerrinLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
