"""Command-line interface: problem files in, CSV and verdicts out.

Every analysis subcommand finishes with a machine-readable line

    VERDICT: PASS|FAIL <metric>=<value>

as the last line of stdout, and the exit code distinguishes verification
failures (1) from unusable input (2).  CSV goes to stdout unless --output
names a file; formatting is fixed, so identical inputs give identical
bytes.
"""

from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence, Tuple

import numpy as np

from .exprlang import EvalDomainError
from .gauge import (
    EmdenProblem,
    GaugeError,
    ReductionError,
    canonical_residual,
    kummer_liouville,
    reduce_via_particular_solution,
)
from .invariants import (
    InvariantDomainError,
    dilation_invariant,
    drift,
    invariant_from_particular_solution,
    rescaled_energy_invariant,
)
from .numerics import IntegrationError, QuadratureError, integrate, write_csv
from .problemfile import (
    ProblemSpec,
    SpecError,
    compile_expression,
    load_spec,
    render_spec,
)
from .solutions import (
    SuperpositionDomainError,
    catalog,
    catalog_entry,
    construct_equation,
    superpose,
)
from .vfields import emden_v_basis, emden_w_basis, verify_scheme

__all__ = ["main"]


class InputError(Exception):
    """Unusable command-line input (exit code 2)."""


def _finish(passed: bool, metric: str, value) -> int:
    if isinstance(value, float):
        value = f"{value:.6g}"
    print(f"VERDICT: {'PASS' if passed else 'FAIL'} {metric}={value}")
    return 0 if passed else 1


def _emit_csv(output: Optional[str], header, rows) -> None:
    write_csv(output if output else sys.stdout, header, rows)


def _pair(text: str) -> Tuple[float, float]:
    body = text.strip()
    if body.startswith("[") and body.endswith("]"):
        body = body[1:-1]
    parts = [p.strip() for p in body.split(",")]
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(
            f"expected two comma-separated numbers, got {text!r}"
        )
    try:
        return (float(parts[0]), float(parts[1]))
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not a numeric pair")


# ---------------------------------------------------------------------------
# subcommands


def _cmd_scheme_check(args) -> int:
    w_labels = ("v*d/dv", "x*d/dv", "x*d/dx")
    v_labels = ("x*d/dv", "x^n*d/dv", "v*d/dx", "v*d/dv", "x*d/dx")
    report = verify_scheme(emden_w_basis(), emden_v_basis(), w_labels, v_labels)
    print(report.render())
    return _finish(report.ok, "failures", len(report.failures))


def _cmd_integrate(args) -> int:
    spec = load_spec(args.spec)
    prob = spec.build()
    t0, t1 = spec.interval
    traj = integrate(prob.rhs, t0, spec.initial, t1, spec.config())
    rows = []
    for t in np.linspace(t0, t1, args.samples):
        x, v = traj(float(t))
        rows.append((t, x, v))
    _emit_csv(args.output, ("t", "x", "v"), rows)
    return _finish(True, "steps", traj.accepted)


def _cmd_invariant(args) -> int:
    spec = load_spec(args.spec)
    prob = spec.build_emden()
    t0, t1 = spec.interval
    method = args.method

    if method.startswith("particular:"):
        entry_id = method.split(":", 1)[1]
        try:
            entry = catalog_entry(entry_id)
        except KeyError as exc:
            raise InputError(exc.args[0])
        inv = invariant_from_particular_solution(
            prob, entry.xp, spec.interval, dxp=entry.dxp
        )
    elif method == "generic":
        if not args.solution:
            raise InputError("--method generic needs --solution <expr>")
        xp = compile_expression(args.solution, "--solution")
        inv = invariant_from_particular_solution(prob, xp, spec.interval)
    elif method in ("s7a", "rescaled-energy"):
        cond = rescaled_energy_invariant(prob, t0, spec.interval)
        print(cond.render())
        if not cond.passed:
            return _finish(False, "condition_variation", cond.variation)
        inv = cond.invariant
    elif method in ("s7b", "dilation"):
        # this construction anchors its clock at the window start, so the
        # invariant only opens a little inside the window
        lead = (t1 - t0) / 50.0
        cond = dilation_invariant(prob, t0, (t0 + lead, t1))
        print(cond.render())
        if not cond.passed:
            return _finish(False, "condition_variation", cond.variation)
        inv = cond.invariant
    else:
        raise InputError(
            f"unknown method {method!r}; use particular:<id>, generic, "
            "s7a (rescaled-energy), or s7b (dilation)"
        )

    cfg = spec.config()
    if inv.validity_interval is not None and inv.validity_interval[0] > t0:
        start = inv.validity_interval[0]
        warmup = integrate(prob.rhs, t0, spec.initial, start, cfg)
        z0 = tuple(float(c) for c in warmup(start))
        traj = integrate(prob.rhs, start, z0, t1, cfg)
    else:
        traj = integrate(prob.rhs, t0, spec.initial, t1, cfg)

    report = drift(inv, traj, samples=args.samples)
    print(report.render())
    if args.output:
        report.write_csv(args.output)
    else:
        report.write_csv(sys.stdout)
    return _finish(report.relative_drift < args.threshold, "drift", report.relative_drift)


def _cmd_kummer_liouville(args) -> int:
    spec = load_spec(args.spec)
    prob = spec.build()
    gen = prob.as_generalized() if isinstance(prob, EmdenProblem) else prob
    t0, t1 = spec.interval
    kl = kummer_liouville(gen, t0, t1, gamma_init=args.gamma_init)
    print(kl.render())
    # verification integrates at the checker's own tight tolerances; the
    # file's tolerances only govern plain trajectory output
    residual = canonical_residual(kl, gen, spec.initial, grid_points=args.grid)
    return _finish(residual < args.threshold, "residual", residual)


def _cmd_reduce(args) -> int:
    spec = load_spec(args.spec)
    prob = spec.build_emden()
    xp = compile_expression(args.solution, "--solution")
    red = reduce_via_particular_solution(prob, xp, spec.interval)
    print(red.render())
    return _finish(True, "rate_agreement", red.rate_consistency)


def _cmd_superpose(args) -> int:
    if args.K < 0:
        raise InputError(f"--K must be nonnegative, got {args.K}")
    x1 = compile_expression(args.x1, "--x1")
    t0, t1 = args.interval
    if not t0 < t1:
        raise InputError(f"interval [{t0:g}, {t1:g}] must run forward")
    rows = []
    for t in np.linspace(t0, t1, args.samples):
        value = x1(float(t))
        rows.append((t, value, superpose(value, float(t), args.K)))
    _emit_csv(args.output, ("t", "x1", "x0"), rows)
    return _finish(True, "samples", args.samples)


def _cmd_construct(args) -> int:
    if args.n in (1.0, -1.0):
        raise InputError(f"no slope-compatible profile exists for n = {args.n:g}")
    prob, entry = construct_equation(args.n, args.K)
    spec = ProblemSpec(
        kind="emden",
        n=prob.n,
        expressions={"a": prob.a.to_source(), "b": "-1"},
        singular_points=prob.singular_points,
        interval=entry.window,
        initial=(entry.xp(entry.window[0]), entry.dxp(entry.window[0])),
        rel_tol=1e-10,
        abs_tol=1e-12,
    )
    sys.stdout.write(render_spec(spec))
    print()
    print(entry.describe())
    report = entry.residual_report()
    return _finish(report.passed, "residual", report.max_residual)


def _cmd_catalog(args) -> int:
    entries = catalog()
    print("\n\n".join(e.describe() for e in entries))
    return _finish(True, "entries", len(entries))


# ---------------------------------------------------------------------------
# wiring


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="emdenlab",
        description="Analyses of Emden-Fowler drag equations from plain problem files.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("scheme-check", help="verify the bracket tables of the built-in scheme")
    p.set_defaults(func=_cmd_scheme_check)

    p = sub.add_parser("integrate", help="integrate a problem file to CSV")
    p.add_argument("spec", help="problem file")
    p.add_argument("--samples", type=int, default=201, help="CSV rows (default 201)")
    p.add_argument("--output", help="CSV file (default stdout)")
    p.set_defaults(func=_cmd_integrate)

    p = sub.add_parser("invariant", help="build a constant of motion and measure its drift")
    p.add_argument("spec", help="problem file")
    p.add_argument(
        "--method",
        required=True,
        help="particular:<catalog id>, generic (with --solution), s7a, or s7b",
    )
    p.add_argument("--solution", help="particular solution expression for --method generic")
    p.add_argument("--samples", type=int, default=200, help="drift samples (default 200)")
    p.add_argument("--threshold", type=float, default=1e-6, help="drift verdict bound")
    p.add_argument("--output", help="drift CSV file (default stdout)")
    p.set_defaults(func=_cmd_invariant)

    p = sub.add_parser("kummer-liouville", help="canonical form via scale and clock change")
    p.add_argument("spec", help="problem file")
    p.add_argument(
        "--gamma-init",
        type=_pair,
        default=(1.0, 0.0),
        metavar="G0,DG0",
        help="initial scale and slope (default 1,0)",
    )
    p.add_argument("--threshold", type=float, default=1e-6, help="canonical residual bound")
    p.add_argument("--grid", type=int, default=81, help="clock grid for the residual stencil")
    p.set_defaults(func=_cmd_kummer_liouville)

    p = sub.add_parser("reduce", help="reduce via a particular solution with decaying slope")
    p.add_argument("spec", help="problem file")
    p.add_argument("--solution", required=True, help="particular solution expression")
    p.set_defaults(func=_cmd_reduce)

    p = sub.add_parser("superpose", help="companion solutions on the zero invariant level")
    p.add_argument("--x1", required=True, help="seed solution expression")
    p.add_argument("--K", type=float, required=True, help="nonnegative mixing constant")
    p.add_argument(
        "interval",
        nargs="?",
        type=_pair,
        default=(0.0, 2.0),
        help="evaluation window as 't0,t1' (default 0,2)",
    )
    p.add_argument("--samples", type=int, default=101, help="CSV rows (default 101)")
    p.add_argument("--output", help="CSV file (default stdout)")
    p.set_defaults(func=_cmd_superpose)

    p = sub.add_parser("construct", help="design a drag equation around its exact profile")
    p.add_argument("--n", type=float, required=True, help="nonlinearity exponent")
    p.add_argument("--K", type=float, default=1.0, help="profile shift (default 1)")
    p.set_defaults(func=_cmd_construct)

    p = sub.add_parser("catalog", help="list the built-in verified solutions")
    p.set_defaults(func=_cmd_catalog)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (SpecError, InputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (
        ReductionError,
        GaugeError,
        InvariantDomainError,
        SuperpositionDomainError,
        IntegrationError,
        QuadratureError,
        EvalDomainError,
        ArithmeticError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        print(f"VERDICT: FAIL error={type(exc).__name__}")
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
