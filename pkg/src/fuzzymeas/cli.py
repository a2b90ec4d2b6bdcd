"""Command-line front end.

Exit codes: 0 success, 1 contract violation or I/O failure, 2 usage error.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import continuous as cont
from .fuzzification import build_effects, delta_kernel, gaussian_kernel, kernel_from_weights
from .matrixio import format_matrix, read_matrix
from .operators import ContractError, DensityOperator, LatticeWindow, min_eigenvalue, purity, validate_density
from .selfcheck import format_report, run_checks
from .statistics import (
    convolution_moment,
    entropy_report,
    gaussian_entropy_closed_form,
    gaussian_fuzzy_state,
    moment_after,
)
from .transformers import EPISTEMIC, FLAVORS, OQP, VON_NEUMANN, probability, shift_covariance_gap, transform

ENTROPY_COLUMNS = ["alpha", "sigma", "S_formula_O", "S_formula_E", "S_brute_O", "S_brute_E", "S_closed_psi", "closed_form_gap"]


class UsageError(Exception):
    pass


def _spec_fields(text: str) -> dict[str, str]:
    fields = {}
    for part in filter(None, text.split(",")):
        key, sep, value = part.partition("=")
        if not sep:
            raise UsageError(f"expected key=value, got {part!r}")
        fields[key.strip()] = value.strip()
    return fields


def parse_values(text: str) -> list[float]:
    """``"0.1,0.5,2"`` or an inclusive range ``"start:stop:count"``."""
    text = text.strip()
    if not text:
        return []
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise argparse.ArgumentTypeError(f"range must be start:stop:count, got {text!r}")
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
        return [float(v) for v in np.linspace(start, stop, count)]
    return [float(v) for v in text.split(",")]


def parse_outcomes(text: str):
    text = text.strip()
    if text == "all":
        return "all"
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"outcome set must be 'all' or comma-separated sites, got {text!r}")


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return value


def _nonnegative_float(text: str) -> float:
    value = float(text)
    if not value >= 0 or not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"expected a nonnegative number, got {text!r}")
    return value


def build_window(args, *widths, center=0) -> LatticeWindow:
    if args.half_width is not None:
        return LatticeWindow(args.half_width, args.boundary)
    return LatticeWindow.for_parameters(*widths, center=center, boundary=args.boundary)


def kernel_width(args) -> float:
    """Gaussian width used to size automatic windows."""
    kind, _, rest = (args.kernel or "").partition(":")
    if kind == "gaussian":
        return float(_spec_fields(rest).get("sigma", args.sigma))
    return args.sigma


def build_kernel(args, window: LatticeWindow):
    spec = args.kernel or f"gaussian:sigma={args.sigma!r}"
    kind, _, rest = spec.partition(":")
    if kind == "gaussian":
        return gaussian_kernel(float(_spec_fields(rest).get("sigma", args.sigma)), window)
    if kind == "file":
        weights, _ = read_matrix(rest)
        return kernel_from_weights(weights, window)
    raise UsageError(f"unknown kernel {spec!r}; use gaussian:sigma=<v> or file:<path>")


def build_state(spec: str, window: LatticeWindow, seed: int) -> DensityOperator:
    kind, _, rest = spec.partition(":")
    if kind == "basis":
        return DensityOperator.basis_state(window, int(rest))
    if kind == "uniform-superposition":
        return DensityOperator.uniform_superposition(window, [int(v) for v in rest.split(",")])
    if kind == "fuzzy-gaussian":
        fields = _spec_fields(rest)
        return gaussian_fuzzy_state(int(fields.get("a", 0)), float(fields.get("alpha", 1.0)), window)
    if kind == "maximally-mixed":
        return DensityOperator.maximally_mixed(window)
    if kind == "random":
        return DensityOperator.random(window, np.random.default_rng(int(rest) if rest else seed))
    if kind == "file":
        return _checked_state(read_matrix(rest)[0], window)
    raise UsageError(f"unknown state {spec!r}")


def _checked_state(matrix, basis) -> DensityOperator:
    rho = DensityOperator(matrix, basis)
    report = validate_density(rho)
    if not report.valid:
        raise ContractError(f"input state is not a density operator: {report}")
    return rho


def state_extent(spec: str) -> tuple[float, int]:
    """Width and center a builtin state needs from an automatically sized window."""
    kind, _, rest = spec.partition(":")
    if kind == "basis":
        return 0.0, int(rest)
    if kind == "uniform-superposition":
        sites = [int(v) for v in rest.split(",")]
        return 0.0, max(sites, key=abs)
    if kind == "fuzzy-gaussian":
        fields = _spec_fields(rest)
        return float(fields.get("alpha", 1.0)), int(fields.get("a", 0))
    return 0.0, 0


def emit_table(rows: list[dict], columns: list[str], fmt: str) -> str:
    if fmt == "json":
        return json.dumps([{c: row[c] for c in columns} for row in rows], indent=2) + "\n"
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(row[c]) for c in columns])
    return out.getvalue()


def _cell(value):
    if isinstance(value, float):
        return repr(value)
    return value


def emit_plot_data(rows: list[dict], columns: list[str], path, config: dict) -> Path:
    """Whitespace-separated columns plus a ``.meta.json`` sidecar."""
    path = Path(path)
    lines = ["# " + " ".join(columns)]
    for row in rows:
        lines.append(" ".join(f"{row[c]:.17g}" if isinstance(row[c], float) else str(row[c]) for c in columns))
    path.write_text("\n".join(lines) + "\n")
    meta = {"config": config, "columns": columns, "version": __version__, "rows": len(rows)}
    sidecar = path.with_suffix(".meta.json")
    sidecar.write_text(json.dumps(meta, indent=2, sort_keys=True, default=str) + "\n")
    return sidecar


def cmd_kernel(args) -> tuple[str, list[str]]:
    window = build_window(args, kernel_width(args))
    kernel = build_kernel(args, window)
    return format_matrix(kernel.weights, "lattice", window.half_width), []


def cmd_compare(args):
    width, center = state_extent(args.state)
    window = build_window(args, kernel_width(args), width, center=center)
    kernel = build_kernel(args, window)
    rho = build_state(args.state, window, args.seed)
    effects = build_effects(kernel)
    sharp = build_effects(delta_kernel(window))
    rows, problems = [], []
    for flavor in FLAVORS:
        out = transform(flavor, kernel, rho, args.set)
        trace = float(np.trace(out).real)
        p = probability(sharp if flavor == VON_NEUMANN else effects, rho, args.set)
        lam = min_eigenvalue(out)
        rows.append({
            "flavor": flavor,
            "trace": trace,
            "purity": purity(out / trace) if trace > 0 else 0.0,
            "p(B)": p,
            "min_eigenvalue": lam,
        })
        if lam < -1e-10:
            problems.append(f"positivity violated for {flavor}: min eigenvalue {lam:.3e}")
        if args.set == "all" and abs(trace - 1) > 1e-12:
            problems.append(f"trace preservation violated for {flavor}: |trace - 1| = {abs(trace - 1):.3e}")
    return emit_table(rows, ["flavor", "trace", "purity", "p(B)", "min_eigenvalue"], args.format), problems


def entropy_rows(alphas, sigmas, a, args) -> list[dict]:
    rows = []
    for alpha, sigma in sorted((al, s) for al in alphas for s in sigmas):
        window = build_window(args, alpha, sigma, center=a)
        rho = gaussian_fuzzy_state(a, alpha, window)
        closed = gaussian_entropy_closed_form(alpha, sigma) if alpha > 0 and sigma > 0 else math.nan
        rep = entropy_report(gaussian_kernel(sigma, window), rho, closed)
        rows.append({
            "alpha": float(alpha),
            "sigma": float(sigma),
            "S_formula_O": rep.S_formula_O,
            "S_formula_E": rep.S_formula_E,
            "S_brute_O": rep.S_brute_O,
            "S_brute_E": rep.S_brute_E,
            "S_closed_psi": closed,
            "closed_form_gap": abs(closed - rep.S_brute_O),
        })
    return rows


def cmd_entropy_scan(args):
    rows = entropy_rows(args.alpha, args.sigma, args.a, args)
    problems = [
        f"entropy formula disagrees with brute force at alpha={r['alpha']}, sigma={r['sigma']}"
        for r in rows
        if max(abs(r["S_formula_O"] - r["S_brute_O"]), abs(r["S_formula_E"] - r["S_brute_E"])) > 1e-10
    ]
    if args.plot_data:
        emit_plot_data(rows, ENTROPY_COLUMNS, args.plot_data, _config_of(args))
    return emit_table(rows, ENTROPY_COLUMNS, args.format), problems


def cmd_moments(args):
    width, center = state_extent(args.state)
    window = build_window(args, kernel_width(args), width, center=center)
    kernel = build_kernel(args, window)
    rho = build_state(args.state, window, args.seed)
    rows = []
    for n in range(args.n_max + 1):
        rows.append({
            "n": n,
            "M_initial": moment_after("initial", kernel, rho, n).value,
            "M_O": moment_after(OQP, kernel, rho, n).value,
            "M_E": moment_after(EPISTEMIC, kernel, rho, n).value,
            "M_E_convolution": convolution_moment(kernel, rho, n) if kernel.homogeneous else math.nan,
        })
    return emit_table(rows, ["n", "M_initial", "M_O", "M_E", "M_E_convolution"], args.format), []


def cmd_covariance(args):
    width, center = state_extent(args.state)
    window = build_window(args, kernel_width(args), width, center=center)
    kernel = build_kernel(args, window)
    rho = build_state(args.state, window, args.seed)
    rows = [
        {"flavor": fl, "shift": args.shift, "gap": shift_covariance_gap(fl, kernel, rho, args.shift)}
        for fl in FLAVORS
    ]
    problems = [f"shift covariance violated for {r['flavor']}: gap {r['gap']:.3e}" for r in rows if r["gap"] > 1e-12]
    return emit_table(rows, ["flavor", "shift", "gap"], args.format), problems


def _continuous_state(spec: str, grid, seed: int) -> DensityOperator:
    kind, _, rest = spec.partition(":")
    if kind == "gaussian":
        fields = {k: float(v) for k, v in _spec_fields(rest).items()}
        unknown = set(fields) - {"x0", "k0", "w"}
        if unknown:
            raise UsageError(f"unknown packet parameters {sorted(unknown)}")
        return cont.gaussian_packet(grid, fields.get("x0", 0.0), fields.get("k0", 0.0), fields.get("w", 1.0))
    if kind == "random":
        return DensityOperator.random(grid, np.random.default_rng(int(rest) if rest else seed))
    if kind == "file":
        return _checked_state(read_matrix(rest)[0], grid)
    raise UsageError(f"unknown continuous state {spec!r}")


def cmd_continuous(args):
    grid = cont.make_grid(args.grid_n, args.length)
    f = cont.gaussian_smearing(args.sigma, grid)
    rho = _continuous_state(args.state, grid, args.seed)
    rows, problems = [], []

    def add(quantity, direct, formula, tol):
        gap = abs(direct - formula)
        rows.append({"quantity": quantity, "direct_value": float(direct), "formula_value": float(formula), "gap": gap})
        if gap > tol:
            problems.append(f"{quantity}: gap {gap:.3e} exceeds {tol:.0e}")

    if args.check in ("momentum", "all"):
        initial = cont.momentum_first_moment(rho, grid)
        ko = cont.momko_value(rho, f, args.derivative)
        ke = cont.momke_value(rho, f, args.derivative)
        tol = 1e-6 * (1 + abs(initial)) if args.derivative == cont.SPECTRAL else math.inf
        add("momentum_oqp", cont.momentum_first_moment(cont.oqp_transform_continuous(f, rho), grid), ko, tol)
        add("momentum_epistemic", cont.momentum_first_moment(cont.epistemic_transform_continuous(f, rho), grid), ke, tol)
        add("memory_term", initial, ko - ke, tol)
        rows.append({"quantity": "formula_sign", "direct_value": float(cont.momentum_sign(rho, f, args.derivative)),
                     "formula_value": float(cont.FORMULA_SIGN), "gap": 0.0})
    if args.check in ("covariance", "all"):
        shift = args.shift_steps * grid.spacing
        for flavor in (OQP, EPISTEMIC):
            gap = cont.translation_covariance_gap_continuous(flavor, f, rho, shift)
            add(f"covariance_{flavor}", gap, 0.0, 1e-11)
        add("commutator_fc_shift", cont.fuzzifier_shift_commutator(f, shift), 0.0, 1e-12)
    return emit_table(rows, ["quantity", "direct_value", "formula_value", "gap"], args.format), problems


def cmd_selfcheck(args):
    checks = run_checks(args.seed)
    failed = [c.name for c in checks if c.passed is False]
    return format_report(checks), [f"selfcheck failed: {', '.join(failed)}"] if failed else []


def _config_of(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("handler", "config", "output")}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value file; command-line flags override it")
    common.add_argument("--output", help="write the result here instead of stdout")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--seed", type=int, default=2024, help="seed for random states")

    lattice = argparse.ArgumentParser(add_help=False)
    lattice.add_argument("--sigma", type=_nonnegative_float, default=1.0)
    lattice.add_argument("--kernel", help="gaussian:sigma=<v> or file:<path>; overrides --sigma")
    lattice.add_argument("--half-width", type=_positive_int, default=None)

    parser = argparse.ArgumentParser(prog="fuzzymeas", description="Fuzzy measurement state transformers.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("kernel", parents=[common, lattice], help="dump a fuzzy kernel matrix")
    p.add_argument("--boundary", choices=("open", "periodic"), default="open")
    p.set_defaults(handler=cmd_kernel)

    p = sub.add_parser("compare", parents=[common, lattice], help="apply all three transformers to one state")
    p.add_argument("--boundary", choices=("open", "periodic"), default="open")
    p.add_argument("--state", default="basis:0")
    p.add_argument("--set", type=parse_outcomes, default="all")
    p.set_defaults(handler=cmd_compare)

    p = sub.add_parser("entropy-scan", parents=[common], help="entropies of the Gaussian fuzzy state")
    p.add_argument("--alpha", type=parse_values, default="1.0")
    p.add_argument("--sigma", type=parse_values, default="1.0")
    p.add_argument("--a", type=int, default=0)
    p.add_argument("--half-width", type=_positive_int, default=None)
    p.add_argument("--boundary", choices=("open", "periodic"), default="open")
    p.add_argument("--plot-data", help="also write whitespace-separated plot data here")
    p.set_defaults(handler=cmd_entropy_scan)

    p = sub.add_parser("moments", parents=[common, lattice], help="moments before and after measurement")
    p.add_argument("--boundary", choices=("open", "periodic"), default="periodic")
    p.add_argument("--state", default="basis:0")
    p.add_argument("--n-max", type=int, default=3)
    p.set_defaults(handler=cmd_moments)

    p = sub.add_parser("covariance", parents=[common, lattice], help="discrete shift covariance gaps")
    p.add_argument("--boundary", choices=("open", "periodic"), default="periodic")
    p.add_argument("--state", default="random")
    p.add_argument("--shift", type=int, default=3)
    p.set_defaults(handler=cmd_covariance)

    p = sub.add_parser("continuous", parents=[common], help="grid position measurement checks")
    p.add_argument("--grid-n", type=int, default=256)
    p.add_argument("--length", type=float, default=40.0)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--state", default="gaussian:x0=0,k0=2,w=2")
    p.add_argument("--check", choices=("covariance", "momentum", "all"), default="all")
    p.add_argument("--shift-steps", type=int, default=5)
    p.add_argument("--derivative", choices=(cont.SPECTRAL, cont.CENTRAL), default=cont.SPECTRAL)
    p.set_defaults(handler=cmd_continuous)

    p = sub.add_parser("selfcheck", parents=[common], help="run the invariant suite")
    p.set_defaults(handler=cmd_selfcheck)
    return parser


def _apply_config(parser, argv, args):
    cfg = configparser.ConfigParser(interpolation=None)
    cfg.read_string("[run]\n" + Path(args.config).read_text())
    values = {k.replace("-", "_"): v for k, v in cfg["run"].items()}
    subparser = parser._subparsers._group_actions[0].choices[args.command]
    known = {a.dest for a in subparser._actions}
    unknown = sorted(set(values) - known - {"config"})
    if unknown:
        subparser.error(f"unknown config keys: {', '.join(unknown)}")
    subparser.set_defaults(**values)
    return parser.parse_args(argv)


def run(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.config:
            args = _apply_config(parser, argv, args)
    except SystemExit as exc:
        return int(exc.code or 0)
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 1
    except configparser.Error as exc:
        print(f"usage error: bad config file: {exc}", file=sys.stderr)
        return 2

    try:
        text, problems = args.handler(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except ContractError as exc:
        print(f"contract violation: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"invalid parameter: {exc}", file=sys.stderr)
        return 2

    try:
        if args.output:
            Path(args.output).write_text(text)
        else:
            sys.stdout.write(text)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for problem in problems:
        print(f"contract violation: {problem}", file=sys.stderr)
    return 1 if problems else 0


def main():
    sys.exit(run())
