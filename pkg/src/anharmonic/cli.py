"""Command-line driver: ``anharmonic <subcommand> [options]``.

Exit codes: 0 success, 1 numerical-contract failure (error JSON on stderr),
2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import re
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .airy_operator import (
    airy_inverse_transform,
    airy_multiplier_kernel_row,
    airy_transform,
    make_plan,
    plancherel_row,
    scaled_bump,
    verify_finite_propagation,
    verify_kernel_bound,
)
from .multipliers import (
    MultiplierProfile,
    RieszParams,
    apply_multiplier,
    indicator,
    multiplier_kernel_row,
    riesz_profile,
    smooth_bump,
    tabulated_from_csv,
)
from .numerics import Grid, GridFunction, lp_norm
from .profile_lab import (
    CONVERGENT_SLOPE,
    DEFAULT_R_LADDER,
    DIVERGENT_SLOPE,
    kernel_row_L2_bound,
    loglog_slope,
    parse_exponent,
    profile_scan,
    region_csv,
    scan_to_csv,
)
from .spectrum import basis_to_cutoff, build_basis, gap_slacks, gram_matrix, mode_matrix, ode_residual, weyl_deviation

SUBCOMMANDS = ("eig", "eval", "apply", "kernel", "transform", "scan", "verify")
SUITES = ("gaps", "asymptotics", "ortho", "plancherel", "propagation", "i4res", "kernel-bounds")

EXIT_OK, EXIT_CONTRACT, EXIT_USAGE = 0, 1, 2


class ContractFailure(Exception):
    """A verification suite ran to completion but a check did not hold."""

    def __init__(self, message: str, payload: dict | None = None):
        super().__init__(message)
        self.payload = payload or {}


@dataclass(frozen=True)
class CommandSpec:
    subcommand: str
    options: dict = field(default_factory=dict)
    output_path: str | None = None


@dataclass(frozen=True)
class RunManifest:
    tool_version: str
    command_line: list
    parameters: dict
    timestamp: str
    outputs: list = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps(self.__dict__, indent=1, sort_keys=True, default=str)


# --- argument types -------------------------------------------------------------------

def _number(text: str) -> float:
    try:
        return float(Fraction(text.strip()))
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")


def _grid(text: str) -> Grid:
    try:
        lo, hi, n = text.split(":")
        return Grid(_number(lo), _number(hi), int(n))
    except (ValueError, argparse.ArgumentTypeError) as exc:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}; expected LO:HI:N ({exc})")


def _csv_numbers(text: str) -> list[float]:
    return [_number(t) for t in text.split(",") if t.strip()]


def _exponent(text: str) -> float:
    try:
        p = parse_exponent(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))
    if p < 1:
        raise argparse.ArgumentTypeError(f"exponent must be >= 1: {text!r}")
    return p


def _p_grid(text: str) -> list[float]:
    return [_exponent(t) for t in text.split(",") if t.strip()]


def _range(text: str) -> list[float]:
    """LO:HI:STEP inclusive of HI, computed in exact fractions."""
    try:
        lo, hi, step = (Fraction(t.strip()) for t in text.split(":"))
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"bad range {text!r}; expected LO:HI:STEP")
    if step <= 0 or hi < lo:
        raise argparse.ArgumentTypeError(f"bad range {text!r}; need STEP > 0 and HI >= LO")
    n = int((hi - lo) / step)
    return [float(lo + k * step) for k in range(n + 1)]


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1: {text!r}")
    return v


# --- parser -------------------------------------------------------------------------------

def _common(p: argparse.ArgumentParser) -> None:
    S = argparse.SUPPRESS
    p.add_argument("--format", choices=("csv", "json"), default=S)
    p.add_argument("--out", default=S, help="write here instead of stdout (plus a .manifest.json)")
    p.add_argument("--threads", type=_positive_int, default=S, help="worker threads (env ANHARMONIC_THREADS)")
    p.add_argument("--seed", type=int, default=S)


def _profile_opts(p: argparse.ArgumentParser) -> None:
    S = argparse.SUPPRESS
    p.add_argument("--profile", default=S,
                   help="riesz (uses --alpha, --R), bump:LO:HI, indicator:LO:HI or csv:PATH")
    p.add_argument("--alpha", type=_number, default=S)
    p.add_argument("--R", type=_number, default=S)
    p.add_argument("--lambda-scale", type=_number, default=S, help="apply F(L/lambda)")
    p.add_argument("--cutoff", type=_number, default=S)


def build_parser() -> argparse.ArgumentParser:
    S = argparse.SUPPRESS
    parser = argparse.ArgumentParser(prog="anharmonic", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"anharmonic {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True, metavar="{" + ",".join(SUBCOMMANDS) + "}")

    p = sub.add_parser("eig", help="eigenvalues and normalization constants")
    p.add_argument("--count", type=_positive_int, default=S)
    p.add_argument("--cutoff", type=_number, default=S)
    _common(p)

    p = sub.add_parser("eval", help="eigenfunction samples on a grid")
    p.add_argument("--count", type=_positive_int, default=S)
    p.add_argument("--grid", type=_grid, default=S)
    _common(p)

    p = sub.add_parser("apply", help="apply F(L) to a function given as CSV x,re,im")
    p.add_argument("--input", required=True)
    _profile_opts(p)
    _common(p)

    p = sub.add_parser("kernel", help="kernel row K_{F(L)}(., y) or K_{F(A)}(., y)")
    p.add_argument("--operator", choices=("L", "A"), default=S)
    p.add_argument("--y", type=_number, required=True)
    p.add_argument("--grid", type=_grid, default=S)
    _profile_opts(p)
    _common(p)

    p = sub.add_parser("transform", help="Airy transform and round trip of a CSV function")
    p.add_argument("--input", default=S, help="CSV x,re,im (default: Gaussian on --grid)")
    p.add_argument("--grid", type=_grid, default=S)
    p.add_argument("--spectral-hi", type=_number, default=S)
    _common(p)

    p = sub.add_parser("scan", help="Bochner-Riesz profile scan")
    p.add_argument("--p-grid", type=_p_grid, default=S)
    p.add_argument("--alpha-grid", type=_range, default=S)
    p.add_argument("--r-ladder", type=_csv_numbers, default=S)
    p.add_argument("--cutoff", type=_number, default=S)
    p.add_argument("--divergent-slope", type=_number, default=S)
    p.add_argument("--convergent-slope", type=_number, default=S)
    _common(p)

    p = sub.add_parser("verify", help="named verification suites")
    p.add_argument("suite", choices=SUITES)
    p.add_argument("--count", type=_positive_int, default=S)
    p.add_argument("--lambda-scale", type=_number, default=S)
    p.add_argument("--y", type=_number, default=S)
    p.add_argument("--p", type=_exponent, default=S)
    _common(p)
    return parser


_NEGATIVE_VALUE = re.compile(r"^-[\d.]")


def _join_negative_values(argv: list[str]) -> list[str]:
    """Rewrite ``--opt -1:2:5`` as ``--opt=-1:2:5`` so argparse does not read a flag."""
    out: list[str] = []
    for tok in argv:
        if out and out[-1].startswith("--") and "=" not in out[-1] and _NEGATIVE_VALUE.match(tok):
            out[-1] = f"{out[-1]}={tok}"
        else:
            out.append(tok)
    return out


def parse_command(argv) -> CommandSpec:
    """Usage errors exit with status 2 via argparse."""
    ns = vars(build_parser().parse_args(_join_negative_values(list(argv))))
    cmd = ns.pop("subcommand")
    return CommandSpec(cmd, ns, ns.get("out"))


# --- profiles and helpers -------------------------------------------------------------------

def _profile(opts: dict) -> MultiplierProfile:
    spec = opts.get("profile", "riesz")
    kind, _, rest = spec.partition(":")
    if kind == "riesz":
        F = riesz_profile(RieszParams(opts.get("alpha", 0.0), opts.get("R", 16.0)))
    elif kind in ("bump", "indicator"):
        try:
            lo, hi = (_number(t) for t in rest.split(":"))
        except (ValueError, argparse.ArgumentTypeError):
            raise UsageError(f"--profile {spec!r}: expected {kind}:LO:HI")
        F = smooth_bump(lo, hi) if kind == "bump" else indicator(lo, hi)
    elif kind == "csv":
        F = tabulated_from_csv(Path(rest).read_text())
    else:
        raise UsageError(f"--profile {spec!r}: unknown profile kind")
    lam = opts.get("lambda_scale")
    return F.scaled(lam) if lam else F


class UsageError(Exception):
    pass


def _basis_for(F: MultiplierProfile, opts: dict):
    cutoff = opts.get("cutoff")
    if cutoff is None:
        if F.support is None:
            raise UsageError("unbounded profile needs --cutoff")
        cutoff = max(F.support[1], 2.0)
    return basis_to_cutoff(cutoff)


def _threads(opts: dict) -> int:
    if "threads" in opts:
        return opts["threads"]
    env = os.environ.get("ANHARMONIC_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise UsageError(f"ANHARMONIC_THREADS={env!r} is not an integer")
    return 1


def _table(header: list[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in r])
    return buf.getvalue()


def _records_json(header: list[str], rows) -> str:
    return json.dumps([dict(zip(header, (v.item() if isinstance(v, np.generic) else v for v in r)))
                       for r in rows], indent=1)


def _emit(opts: dict, header: list[str], rows) -> str:
    rows = list(rows)
    return _records_json(header, rows) if opts.get("format") == "json" else _table(header, rows)


def _function_out(opts: dict, f: GridFunction, name: str = "x") -> str:
    v = f.values.astype(complex)
    return _emit(opts, [name, "re", "im"], zip(f.x.tolist(), v.real.tolist(), v.imag.tolist()))


# --- subcommands ------------------------------------------------------------------------------

def _cmd_eig(opts):
    if "cutoff" in opts:
        basis = basis_to_cutoff(opts["cutoff"])
        if "count" in opts:
            basis = basis.truncate(min(opts["count"], len(basis)))
    else:
        basis = build_basis(opts.get("count", 10))
    if opts.get("format") == "json":
        return basis.to_json(), {}
    return basis.to_csv(), {}


def _cmd_eval(opts):
    basis = build_basis(opts.get("count", 4))
    grid = opts.get("grid", Grid(-10.0, 10.0, 201))
    x = grid.nodes()
    phi = mode_matrix(basis, x)
    header = ["x"] + [f"phi_{n}" for n in range(1, len(basis) + 1)]
    return _emit(opts, header, (([xi] + phi[:, j].tolist()) for j, xi in enumerate(x.tolist()))), {}


def _cmd_apply(opts):
    f = GridFunction.from_csv(Path(opts["input"]).read_text())
    F = _profile(opts)
    out = apply_multiplier(_basis_for(F, opts), F, f)
    return _function_out(opts, out), {"profile": F.name}


def _cmd_kernel(opts):
    F = _profile(opts)
    y = opts["y"]
    grid = opts.get("grid", Grid(-20.0, 20.0, 801))
    if opts.get("operator", "L") == "A":
        row = airy_multiplier_kernel_row(F, y, grid)
    else:
        row = multiplier_kernel_row(_basis_for(F, opts), F, y, grid)
    return _function_out(opts, row), {"profile": F.name}


def _cmd_transform(opts):
    if "input" in opts:
        f = GridFunction.from_csv(Path(opts["input"]).read_text())
    else:
        f = GridFunction.from_callable(opts.get("grid", Grid(-12.0, 12.0, 2049)), lambda x: np.exp(-x * x / 2))
    plan = make_plan(f.grid, opts.get("spectral_hi", 80.0))
    tf = airy_transform(plan, f)
    back = airy_inverse_transform(plan, tf)
    n_f = lp_norm(f, 2.0)
    summary = {"norm_ratio": lp_norm(tf, 2.0) / n_f, "roundtrip_rel_l2": lp_norm(back - f, 2.0) / n_f}
    if opts.get("format") == "json":
        body = dict(summary, **{"lambda": tf.x.tolist(), "re": np.real(tf.values).tolist(),
                                "im": np.imag(tf.values).tolist()})
        return json.dumps(body, indent=1), summary
    return _function_out(opts, tf, "lambda"), summary


def _cmd_scan(opts):
    ladder = opts.get("r_ladder", list(DEFAULT_R_LADDER))
    cutoff = opts.get("cutoff", 160.0)
    if max(ladder) > cutoff:
        raise ValueError("basis cutoff too small")
    ps = opts.get("p_grid", [1.0, 4.0 / 3.0, 2.0, 4.0, math.inf])
    inv_p = [0.0 if p == math.inf else 1.0 / p for p in ps]
    alphas = opts.get("alpha_grid", _range("0:0.5:0.05"))
    points = profile_scan(basis_to_cutoff(cutoff), inv_p, alphas, ladder,
                          opts.get("divergent_slope", DIVERGENT_SLOPE),
                          opts.get("convergent_slope", CONVERGENT_SLOPE), threads=_threads(opts))
    extra = {"region_csv": region_csv(points)}
    if opts.get("format") == "json":
        return json.dumps([{"inv_p": p.inv_p, "alpha": p.alpha, "slope": p.fitted_slope,
                            "classification": p.classification} for p in points], indent=1), extra
    return scan_to_csv(points), extra


# --- verification suites -------------------------------------------------------------------------

def _suite_gaps(opts):
    basis = build_basis(opts.get("count", 500) + 1)
    lower, upper = gap_slacks(basis)
    m = {"pairs": int(lower.size), "min_lower_slack": float(lower.min()), "min_upper_slack": float(upper.min())}
    return m, min(m["min_lower_slack"], m["min_upper_slack"]) >= -1e-9


def _suite_asymptotics(opts):
    count = max(opts.get("count", 500), 200)
    dev = np.abs(weyl_deviation(build_basis(count)))[99:]
    blocks = np.array_split(dev, 4)
    peaks = [float(b.max()) for b in blocks]
    m = {"max_deviation": float(dev.max()), "block_maxima": peaks}
    return m, m["max_deviation"] <= 0.02 and all(a > b for a, b in zip(peaks, peaks[1:]))


def _suite_ortho(opts):
    count = opts.get("count", 30)
    basis = build_basis(count)
    err = float(np.abs(gram_matrix(basis, count) - np.eye(count)).max())
    rng = np.random.default_rng(opts.get("seed", 0))
    u = rng.uniform(-20.0, 20.0, 64)
    u = u[np.abs(u) > 0.01]
    res = max(float(np.abs(ode_residual(basis.mode(n), u)).max()) for n in range(1, min(count, 5) + 1))
    m = {"gram_max_error": err, "ode_residual_max": res}
    return m, err <= 1e-8 and res <= 1e-4


PLANCHEREL_CASES = ((3.7, (10.0, 20.0)), (0.0, (0.0, 12.0)), (-5.0, (-2.0, 10.0)),
                    (12.0, (5.0, 20.0)), (-2.0, (-6.0, 6.0)))


def _suite_plancherel(opts):
    rows = []
    for x, (lo, hi) in PLANCHEREL_CASES:
        lhs, rhs = plancherel_row(smooth_bump(lo, hi), x)
        rows.append({"x": x, "support": [lo, hi], "lhs": lhs, "rhs": rhs, "rel": abs(lhs - rhs) / rhs})
    worst = max(r["rel"] for r in rows)
    return {"cases": rows, "max_rel": worst}, worst <= 1e-6


PROPAGATION_LADDER = (5.0, 2.5, 1.25)


def _suite_propagation(opts):
    lam, y = opts.get("lambda_scale", 40.0), opts.get("y", 15.0)
    F = smooth_bump(0.5, 1.0)
    base = verify_finite_propagation(F, lam, y)
    ladder = [verify_finite_propagation(F, lam, y, bandwidth_factor=b) for b in PROPAGATION_LADDER]
    m = {"lambda_scale": lam, "y": y, "difference": base,
         "ladder": dict(zip(map(str, PROPAGATION_LADDER), ladder))}
    return m, base <= 1e-3 and all(a > b for a, b in zip(ladder, ladder[1:]))


I4RES_SCALES = (16.0, 32.0, 64.0, 128.0)


def _suite_i4res(opts):
    F = smooth_bump(0.375, 1.125)
    ratios = []
    for lam in I4RES_SCALES:
        basis = basis_to_cutoff(9.0 / 8.0 * lam + 1.0)
        est = kernel_row_L2_bound(basis, F, lam, np.linspace(-lam / 4, lam / 4, 65))
        ratios.append(est.value)
    slope = loglog_slope(I4RES_SCALES, ratios)
    return {"lambda": list(I4RES_SCALES), "ratios": ratios, "log_slope": slope}, slope <= 0.05


def kernel_bound_sweep(ys=(30.0, 60.0), widths=(4.0, 8.0), l: int = 4, half_width: float = 150.0):
    reports = []
    for a in widths:
        for y in ys:
            g = Grid(y - half_width, y + half_width, 3001)
            reports.append(verify_kernel_bound(scaled_bump(a), y, l, g))
    cs = [r.fitted_C for r in reports]
    spread = max(cs) / min(cs) if min(cs) > 0 else math.inf
    violations = sum(r.max_violation_ratio > 1.0 + 1e-12 for r in reports)
    return reports, spread, violations


def _suite_kernel_bounds(opts):
    y = opts.get("y", 30.0)
    ys = (y, 2.0 * y)
    reports, spread, viol = kernel_bound_sweep(ys)
    m = {"reports": [json.loads(r.to_json()) for r in reports], "spread": spread, "violations": viol,
         "holdout_max": max(r.holdout_ratio for r in reports)}
    return m, spread <= 4.0 and viol == 0


SUITE_FUNCS = {
    "gaps": _suite_gaps, "asymptotics": _suite_asymptotics, "ortho": _suite_ortho,
    "plancherel": _suite_plancherel, "propagation": _suite_propagation, "i4res": _suite_i4res,
    "kernel-bounds": _suite_kernel_bounds,
}


def _cmd_verify(opts):
    suite = opts["suite"]
    metrics, ok = SUITE_FUNCS[suite](opts)
    body = {"suite": suite, "passed": bool(ok), "metrics": metrics}
    if opts.get("format") == "csv":
        text = _table(["suite", "passed", "metrics"], [[suite, ok, json.dumps(metrics, sort_keys=True)]])
    else:
        text = json.dumps(body, indent=1, sort_keys=True)
    if not ok:
        raise ContractFailure(f"suite {suite} failed", {"output": text, **body})
    return text, {}


COMMANDS = {"eig": _cmd_eig, "eval": _cmd_eval, "apply": _cmd_apply, "kernel": _cmd_kernel,
            "transform": _cmd_transform, "scan": _cmd_scan, "verify": _cmd_verify}


# --- run -----------------------------------------------------------------------------------------

def _jsonable(v):
    if isinstance(v, Grid):
        return f"{v.lo!r}:{v.hi!r}:{v.n_points}"
    if isinstance(v, float) and math.isinf(v):
        return "inf"
    if isinstance(v, list):
        return [_jsonable(t) for t in v]
    return v


def _write(path: Path, text: str, spec: CommandSpec, argv, extra_files: dict) -> None:
    path.write_text(text)
    outputs = [str(path)]
    for suffix, body in extra_files.items():
        p = path.with_name(path.stem + suffix)
        p.write_text(body)
        outputs.append(str(p))
    manifest = RunManifest(__version__, list(argv) if argv is not None else [spec.subcommand],
                           {k: _jsonable(v) for k, v in spec.options.items()},
                           datetime.now(timezone.utc).isoformat(timespec="seconds"), outputs)
    path.with_name(path.name + ".manifest.json").write_text(manifest.to_json())


def run(spec: CommandSpec, argv=None) -> int:
    opts = dict(spec.options)
    try:
        text, extra = COMMANDS[spec.subcommand](opts)
    except UsageError as exc:
        print(f"anharmonic {spec.subcommand}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ContractFailure as exc:
        _report_output(spec, exc.payload.get("output", ""), {}, argv)
        print(json.dumps({"error": str(exc), "subcommand": spec.subcommand,
                          "metrics": exc.payload.get("metrics")}, sort_keys=True, default=str), file=sys.stderr)
        return EXIT_CONTRACT
    except (ValueError, ArithmeticError, OSError) as exc:
        print(json.dumps({"error": str(exc), "type": type(exc).__name__, "subcommand": spec.subcommand},
                         sort_keys=True), file=sys.stderr)
        return EXIT_CONTRACT
    _report_output(spec, text, extra, argv)
    return EXIT_OK


def _report_output(spec: CommandSpec, text: str, extra: dict, argv) -> None:
    files = {".region.csv": extra["region_csv"]} if "region_csv" in extra else {}
    if spec.output_path:
        _write(Path(spec.output_path), text, spec, argv, files)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def rerun_manifest(path) -> int:
    """Re-execute the command line recorded in a manifest."""
    argv = json.loads(Path(path).read_text())["command_line"]
    return main(argv)


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    if len(argv) == 2 and argv[0] == "--rerun":
        return rerun_manifest(argv[1])
    try:
        spec = parse_command(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    return run(spec, argv)


def console() -> None:
    sys.exit(main())


__all__ = ["CommandSpec", "RunManifest", "parse_command", "run", "main", "rerun_manifest",
           "build_parser", "SUITES", "SUBCOMMANDS", "kernel_bound_sweep"]
