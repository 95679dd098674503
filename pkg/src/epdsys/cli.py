"""Command-line driver.

Subcommands:
  solve <config>                 run one simulation, print error summary
  bench <config> [--J LIST]      Table-1 style benchmark, write CSV
  converge <config> [--J LIST]   convergence study; exit 2 if order off-band
  series --lambda L --nu NU --K K --N N [--out PATH]
  validate <config>              run all oracles; exit 2 on failure

Exit codes: 0 success, 2 validation failure, 1 error.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import bench as bench_mod
from .exact import frobenius_coefficients, ode_residual, stationary_additive
from .exceptions import EpdError
from .grid import build_grid, discrete_errors
from .operators import build_operator_set
from .stepper import SOLVER_SYLVESTER, ProblemDef, cfl_guard, run
from .sylvester import CoupledProblem, kronecker_solve, solve_coupled

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_VALIDATION = 2


def _load_config(path):
    with open(path, encoding="utf-8") as fh:
        return bench_mod.parse_config(fh.read())


def _parse_J_list(text):
    return tuple(int(part) for part in text.split(",") if part.strip())


def cmd_solve(args):
    config = _load_config(args.config)
    solver = config.solver if config.solver != "both" else SOLVER_SYLVESTER
    spec = bench_mod.grid_spec_for(config)
    grid = build_grid(spec)
    prob, exact = bench_mod.manufactured_problem(config)
    opset = build_operator_set(grid, prob.lam, prob.gamma)
    ok, guard = cfl_guard(grid, config.alpha, opset)
    if not ok:
        print(f"warning: sufficient stability bound fails, 4*sigma*C_alpha = {guard:.3g}")
    trajectory, reports = run(prob, spec, solver=solver, sing_policy=config.sing_policy)
    report = discrete_errors(trajectory, exact, grid)
    print(f"J={config.J} h={grid.h:.6g} l={grid.l:.6g} steps={grid.n_steps} solver={solver}")
    print(f"Er={report.er:.6g} RelEr={report.rel_er:.6g}")
    print(f"max residual={max(r.residual_coupled for r in reports):.3e} "
          f"min margin={min(r.margin for r in reports):.3e}")
    return EXIT_OK


def cmd_bench(args):
    config = _load_config(args.config)
    J_list = _parse_J_list(args.J) if args.J else bench_mod.DEFAULT_BENCH_J
    rows = bench_mod.run_table1(config, J_list=J_list, repeats=args.repeats)
    print(bench_mod.CSV_HEADER)
    for r in rows:
        print(
            f"{r.J},{r.h:.6g},{r.l:.6g},{r.Er_II:.6g},{r.RelEr_II:.6g},"
            f"{r.Er_I:.6g},{r.RelEr_I:.6g},{r.time_II_ms:.3f},{r.time_I_ms:.3f},{r.ratio:.3g}"
        )
        if r.error:
            print(f"  note: {r.error}")
    print(f"csv written to {config.out_csv}")
    return EXIT_OK


def cmd_converge(args):
    config = _load_config(args.config)
    J_list = _parse_J_list(args.J) if args.J else bench_mod.DEFAULT_CONVERGENCE_J
    report = bench_mod.run_convergence(config, J_list=J_list)
    for J, h, er in report.rows:
        print(f"J={J} h={h:.6g} Er={er:.6g}")
    print(f"order={report.order:.4g}")
    if not report.ok:
        print("validation failure: order outside [1.5, 2.5]")
        return EXIT_VALIDATION
    return EXIT_OK


def cmd_series(args):
    text = bench_mod.emit_series_table(args.lam, args.nu, args.K, args.N, path=args.out)
    if args.out:
        print(f"series table written to {args.out}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_validate(args):
    config = _load_config(args.config)
    failures = []

    def check(name, fn):
        try:
            fn()
            print(f"ok   {name}")
        except Exception as exc:
            failures.append(name)
            print(f"FAIL {name}: {exc}")

    def forcing():
        res = bench_mod.check_forcing_certificate(config)
        print(f"     pde residual = {res:.3e}")

    def closed_form():
        form = stationary_additive(0.25, 0.25, 1.0, 1.0, 1.0)
        if form.certificate > 1e-8:
            raise EpdError(f"additive certificate {form.certificate:.3e} > 1e-8")

    def series_engine():
        s = frobenius_coefficients(0.5, 0.0, 1.0, 40)
        res = ode_residual(s, 0.5, 1.0, "eigen", np.linspace(0.1, 1.0, 19))
        if res > 1e-8:
            raise EpdError(f"series residual {res:.3e} > 1e-8")

    def solver_oracle():
        rng = np.random.default_rng(config.seed)
        n = 6
        p = CoupledProblem(
            W=np.eye(n) + 0.1 * rng.standard_normal((n, n)),
            R=0.1 * rng.standard_normal((n, n)),
            S=0.1 * rng.standard_normal((n, n)),
            C1=rng.standard_normal((n, n)),
            C2=rng.standard_normal((n, n)),
        )
        X1, Y1 = solve_coupled(p)
        X2, Y2 = kronecker_solve(p)
        err = max(np.abs(X1 - X2).max(), np.abs(Y1 - Y2).max())
        if err > 1e-10 * max(1.0, np.abs(X2).max()):
            raise EpdError(f"solver mismatch {err:.3e}")

    def zero_trajectory():
        zero = lambda x, y: np.zeros_like(np.asarray(x, dtype=float))
        prob = ProblemDef(
            a=config.a, lam=0.0, gamma=0.0, p=config.p, q=config.q,
            alpha=config.alpha, data=(zero, zero, zero, zero),
            nonlinear=False, allow_singular_t0=True,
        )
        spec = bench_mod.grid_spec_for(config, 4)
        trajectory, _ = run(prob, spec)
        top = max(s.sup_norm() for s in trajectory)
        if top > 1e-14:
            raise EpdError(f"zero data produced nonzero trajectory ({top:.3e})")

    check("forcing certificate", forcing)
    check("closed-form residuals", closed_form)
    check("series engine residual", series_engine)
    check("solver cross-check", solver_oracle)
    check("trivial zero trajectory", zero_trajectory)

    if failures:
        print(f"{len(failures)} validation failure(s)")
        return EXIT_VALIDATION
    print("all validations passed")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="epdsys", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="run one simulation")
    p_solve.add_argument("config")
    p_solve.set_defaults(fn=cmd_solve)

    p_bench = sub.add_parser("bench", help="error/timing benchmark")
    p_bench.add_argument("config")
    p_bench.add_argument("--J", help="comma-separated J list", default=None)
    p_bench.add_argument("--repeats", type=int, default=3)
    p_bench.set_defaults(fn=cmd_bench)

    p_conv = sub.add_parser("converge", help="convergence-order study")
    p_conv.add_argument("config")
    p_conv.add_argument("--J", help="comma-separated J list", default=None)
    p_conv.set_defaults(fn=cmd_converge)

    p_series = sub.add_parser("series", help="emit Frobenius coefficient table")
    p_series.add_argument("--lambda", dest="lam", type=float, required=True)
    p_series.add_argument("--nu", type=float, required=True)
    p_series.add_argument("--K", type=float, required=True)
    p_series.add_argument("--N", type=int, required=True)
    p_series.add_argument("--out", default=None)
    p_series.set_defaults(fn=cmd_series)

    p_val = sub.add_parser("validate", help="run all oracles")
    p_val.add_argument("config")
    p_val.set_defaults(fn=cmd_validate)

    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except EpdError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
