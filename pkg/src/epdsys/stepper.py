"""Time stepping for the quasi-linear coupled scheme.

Every step advances (U, V) by solving the coupled Lyapunov-Sylvester pair

    W X + X W' + R Y + Y S = C1
    W Y + Y W' + R X + X S = C2

where W = W_alpha, W' = W_alpha^T, R = R_{n,alpha}, S = S_{n,alpha} and the
right-hand sides collect the two known levels, the explicit nonlinearities
and the forcing.  All scalings come from the pointwise difference equation
(the l^2-multiplied form), so the nonlinearity and forcing enter with weight
l^2/2 per level and the gradient history with weight (1-2 alpha) sigma h.
"""

from __future__ import annotations

import dataclasses
import time
from typing import Callable, Sequence

import numpy as np

from .exceptions import BlowUpError, InvalidSpecError, SingularTimeError
from .grid import CoupledState, Field, Grid, GridSpec, build_grid, sample, sample_time
from .operators import (
    OperatorSet,
    StepOperators,
    apply_x,
    apply_y,
    assemble_step_operators,
    build_operator_set,
)
from .sylvester import CoupledProblem, kronecker_solve, residual, solvability_margin, solve_coupled

SOLVER_SYLVESTER = "sylvester"
SOLVER_KRONECKER = "kronecker"

BLOWUP_CAP = 1e8


@dataclasses.dataclass(frozen=True)
class ProblemDef:
    """Continuous problem data: coefficients, nonlinearity, forcing, seeding.

    Exactly one of `exact` (a callable (X, Y, t) -> (u, v) used to sample the
    two seed levels) and `data` (the tuple (u0, u1, v0, v1) of callables
    (x, y) -> value for Taylor seeding) must be set.  `nonlinear=False` drops
    the power-law terms, giving the linear system.
    """

    a: float
    lam: float
    gamma: float
    p: float
    q: float
    alpha: float | None = None
    forcing: tuple[Callable, Callable] | None = None
    exact: Callable | None = None
    data: tuple[Callable, Callable, Callable, Callable] | None = None
    nonlinear: bool = True
    allow_singular_t0: bool = False
    taylor_terms: int = 2

    def __post_init__(self):
        if self.p <= 1 or self.q <= 1:
            raise InvalidSpecError(f"need p, q > 1, got p={self.p}, q={self.q}")
        if (self.exact is None) == (self.data is None):
            raise InvalidSpecError("exactly one seeding source (exact or data) must be set")
        if self.taylor_terms not in (1, 2):
            raise InvalidSpecError("taylor_terms must be 1 or 2")


@dataclasses.dataclass(frozen=True)
class StepReport:
    """Per-step diagnostics; sup_norm is the combined Frobenius norm."""

    n: int
    sup_norm: float
    residual_coupled: float
    margin: float
    wall_time: float
    solve_time: float


def nonlinear_G(X: Field, Y: Field, p: float) -> Field:
    """Entrywise |X|^(p-1) * Y."""
    return Field(np.abs(X.values) ** (p - 1.0) * Y.values, level=X.level)


def nonlinear_H(X: Field, Y: Field, q: float) -> Field:
    """Entrywise |Y|^(q-1) * X."""
    return Field(np.abs(Y.values) ** (q - 1.0) * X.values, level=X.level)


def _laplacian(opset: OperatorSet, F: Field, h: float) -> np.ndarray:
    AF = apply_x(opset.A, F).values
    FA = apply_y(F, opset.A.transpose()).values
    return (AF + FA) / (h * h)


def _gradient_term(opset: OperatorSet, F: Field, h: float) -> np.ndarray:
    TF = apply_x(opset.Theta, F).values
    FL = apply_y(F, opset.Lambda).values
    return (TF + FL) / h


def init_levels(prob: ProblemDef, grid: Grid, opset: OperatorSet | None = None):
    """Seed levels 0 and 1, either from an exact solution or a Taylor expansion.

    Taylor mode computes U^1 = u0 + l u1 + (l^2/2) u_tt with u_tt evaluated
    from the PDE using the discrete spatial operators.  At t0 = 0 with a != 0
    the damping coefficient is singular; with `allow_singular_t0` the pair
    (u_tt, v_tt) is recovered from the one-sided limit system
    u_tt + 2a v_tt = RHS_u, v_tt + 2a u_tt = RHS_v (valid for u1 = v1 = 0).
    """
    t0 = grid.t0
    if prob.exact is not None:
        X, Y = grid.meshgrid()
        u0, v0 = prob.exact(X, Y, t0)
        u1, v1 = prob.exact(X, Y, t0 + grid.l)
        s0 = CoupledState(Field(np.array(u0, dtype=float), 0), Field(np.array(v0, dtype=float), 0))
        s1 = CoupledState(Field(np.array(u1, dtype=float), 1), Field(np.array(v1, dtype=float), 1))
        return s0, s1

    u0f, u1f, v0f, v1f = prob.data
    U0 = sample(u0f, grid, level=0)
    V0 = sample(v0f, grid, level=0)
    Ut = sample(u1f, grid, level=0).values
    Vt = sample(v1f, grid, level=0).values
    l = grid.l

    if prob.taylor_terms == 1:
        U1 = Field(U0.values + l * Ut, level=1)
        V1 = Field(V0.values + l * Vt, level=1)
        return CoupledState(U0, V0), CoupledState(U1, V1)

    if opset is None:
        opset = build_operator_set(grid, prob.lam, prob.gamma)

    def rhs_no_damping(Fu, Fv, own, other, expo, forcing):
        out = _laplacian(opset, Fu, grid.h) + _gradient_term(opset, Fv, grid.h)
        if prob.nonlinear:
            out = out + np.abs(own) ** (expo - 1.0) * other
        if forcing is not None:
            out = out + sample_time(forcing, grid, t0).values
        return out

    G1 = prob.forcing[0] if prob.forcing else None
    G2 = prob.forcing[1] if prob.forcing else None
    rhs_u = rhs_no_damping(U0, V0, U0.values, V0.values, prob.p, G1)
    rhs_v = rhs_no_damping(V0, U0, V0.values, U0.values, prob.q, G2)

    if t0 > 0.0:
        gam = 2.0 * prob.a / t0
        u_tt = rhs_u - gam * Vt
        v_tt = rhs_v - gam * Ut
    elif prob.a == 0.0:
        u_tt = rhs_u
        v_tt = rhs_v
    else:
        if not prob.allow_singular_t0:
            raise SingularTimeError(
                "taylor seeding at t0 = 0 with a != 0 needs allow_singular_t0"
            )
        denom = 1.0 - 4.0 * prob.a * prob.a
        if abs(denom) < 1e-12:
            raise SingularTimeError("regularized t0 = 0 seeding degenerate at 4a^2 = 1")
        u_tt = (rhs_u - 2.0 * prob.a * rhs_v) / denom
        v_tt = (rhs_v - 2.0 * prob.a * rhs_u) / denom

    U1 = Field(U0.values + l * Ut + 0.5 * l * l * u_tt, level=1)
    V1 = Field(V0.values + l * Vt + 0.5 * l * l * v_tt, level=1)
    return CoupledState(U0, V0), CoupledState(U1, V1)


def assemble_rhs(
    history: tuple[CoupledState, CoupledState],
    ops: StepOperators,
    opset: OperatorSet,
    prob: ProblemDef,
    grid: Grid,
    n: int,
) -> tuple[Field, Field]:
    """Right-hand sides (C1, C2) of the coupled solve for level n+1."""
    state_n, state_nm1 = history
    if state_n.level != n or state_nm1.level != n - 1:
        raise InvalidSpecError(
            f"history levels ({state_n.level}, {state_nm1.level}) do not match n={n}"
        )
    Un, Vn = state_n.U.values, state_n.V.values
    Um, Vm = state_nm1.U.values, state_nm1.V.values

    Wh = ops.W_alpha_minus_half
    Wa = ops.W_alpha
    sig_h = grid.sigma * grid.h
    one_m2a = 1.0 - 2.0 * ops.alpha
    l2 = grid.l * grid.l

    def lyap(M, X):
        return apply_x(M, X).values + apply_y(X, M.transpose()).values

    def grad(X):
        return apply_x(opset.Theta, X).values + apply_y(X, opset.Lambda).values

    def cross(Rm, Sm, X):
        return apply_x(Rm, X).values + apply_y(X, Sm).values

    C1 = 2.0 * lyap(Wh, Field(Un)) - lyap(Wa, Field(Um))
    C1 += one_m2a * sig_h * grad(Field(Vn))
    C1 += cross(ops.R_neg, ops.S_neg, Field(Vm))

    C2 = 2.0 * lyap(Wh, Field(Vn)) - lyap(Wa, Field(Vm))
    C2 += one_m2a * sig_h * grad(Field(Un))
    C2 += cross(ops.R_neg, ops.S_neg, Field(Um))

    if prob.nonlinear:
        Gn = np.abs(Un) ** (prob.p - 1.0) * Vn
        Gm = np.abs(Um) ** (prob.p - 1.0) * Vm
        Hn = np.abs(Vn) ** (prob.q - 1.0) * Un
        Hm = np.abs(Vm) ** (prob.q - 1.0) * Um
        C1 += 0.5 * l2 * (Gn + Gm)
        C2 += 0.5 * l2 * (Hn + Hm)

    if prob.forcing is not None:
        G1, G2 = prob.forcing
        t_n, t_m = grid.time(n), grid.time(n - 1)
        C1 += 0.5 * l2 * (sample_time(G1, grid, t_n).values + sample_time(G1, grid, t_m).values)
        C2 += 0.5 * l2 * (sample_time(G2, grid, t_n).values + sample_time(G2, grid, t_m).values)

    return Field(C1, level=n + 1), Field(C2, level=n + 1)


def step(
    history: tuple[CoupledState, CoupledState],
    ops: StepOperators,
    opset: OperatorSet,
    prob: ProblemDef,
    grid: Grid,
    n: int,
    solver: str = SOLVER_SYLVESTER,
    collect_margin: bool = True,
) -> tuple[CoupledState, StepReport]:
    """Advance one level: assemble the RHS and solve the coupled pair."""
    t_start = time.perf_counter()
    C1, C2 = assemble_rhs(history, ops, opset, prob, grid, n)
    W = ops.W_alpha.dense()
    problem = CoupledProblem(
        W=W,
        R=ops.R_pos.dense(),
        S=ops.S_pos.dense(),
        C1=C1.values,
        C2=C2.values,
        W_right=W.T,
    )
    t_solve = time.perf_counter()
    if solver == SOLVER_SYLVESTER:
        X, Y = solve_coupled(problem)
    elif solver == SOLVER_KRONECKER:
        X, Y = kronecker_solve(problem)
    else:
        raise InvalidSpecError(f"unknown solver {solver!r}")
    solve_time = time.perf_counter() - t_solve

    res = residual(problem, (X, Y))
    if collect_margin:
        try:
            margin = solvability_margin(problem.W, problem.R, problem.S, problem.W_right)
        except np.linalg.LinAlgError:  # non-fatal: diagnostics only
            margin = float("nan")
    else:
        margin = float("nan")

    state = CoupledState(Field(X, level=n + 1), Field(Y, level=n + 1))
    report = StepReport(
        n=n,
        sup_norm=state.sup_norm(),
        residual_coupled=res,
        margin=margin,
        wall_time=time.perf_counter() - t_start,
        solve_time=solve_time,
    )
    return state, report


def run(
    prob: ProblemDef,
    spec: GridSpec | Grid,
    solver: str = SOLVER_SYLVESTER,
    blowup_cap: float = BLOWUP_CAP,
    collect_margin: bool = True,
    sing_policy: str = "zero",
) -> tuple[list[CoupledState], list[StepReport]]:
    """Run the full simulation: seed two levels, then advance to n_steps.

    sing_policy selects the axis-node treatment of the gradient operators
    ('zero' drops the singular coefficient, 'limit' uses its L'Hopital
    stencil; see operators.build_operator_set).  Raises BlowUpError when the
    combined norm exceeds blowup_cap.
    """
    grid = spec if isinstance(spec, Grid) else build_grid(spec)
    if grid.n_steps < 2:
        raise InvalidSpecError("run needs n_steps >= 2")
    alpha = prob.alpha if prob.alpha is not None else grid.spec.alpha
    opset = build_operator_set(grid, prob.lam, prob.gamma, sing_policy=sing_policy)
    s0, s1 = init_levels(prob, grid, opset)
    trajectory = [s0, s1]
    reports: list[StepReport] = []
    for n in range(1, grid.n_steps):
        ops = assemble_step_operators(opset, grid, n, alpha, prob.a)
        state, report = step(
            (trajectory[-1], trajectory[-2]),
            ops,
            opset,
            prob,
            grid,
            n,
            solver=solver,
            collect_margin=collect_margin,
        )
        state.U.check_finite()
        state.V.check_finite()
        if report.sup_norm > blowup_cap:
            raise BlowUpError(
                f"blow-up at step {n + 1}: ||(U,V)|| = {report.sup_norm:.3e} > {blowup_cap:.1e}",
                step=n + 1,
                sup_norm=report.sup_norm,
            )
        trajectory.append(state)
        reports.append(report)
    return trajectory, reports


def cfl_guard(grid: Grid, alpha: float, opset: OperatorSet):
    """Sufficient-stability value 4 sigma C_alpha and whether it is < 1.

    C_alpha = alpha * [4 + h (max_j |lam_j| + max_m |gam_m|)].  The bound is
    sufficient, not necessary: a failing guard is a warning, not an error.
    """
    c_alpha = alpha * (
        4.0 + grid.h * (np.max(np.abs(opset.lam_j)) + np.max(np.abs(opset.gam_m)))
    )
    value = 4.0 * grid.sigma * c_alpha
    return value < 1.0, float(value)


def convergence_order(errors: Sequence[tuple[float, float]]) -> float:
    """Least-squares slope of log(Er) against log(h).

    Returns +inf when some error vanishes (exact reproduction).
    """
    if len(errors) < 2:
        raise InvalidSpecError("need at least two (h, Er) pairs")
    hs = np.array([h for h, _ in errors], dtype=float)
    ers = np.array([er for _, er in errors], dtype=float)
    if np.any(ers == 0.0):
        return float("inf")
    slope = np.polyfit(np.log(hs), np.log(ers), 1)[0]
    return float(slope)
