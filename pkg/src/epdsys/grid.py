"""Mesh construction, field sampling, norms and error functionals.

The domain is the square [L0, L1] x [L0, L1] with J+2 uniformly spaced nodes
per axis (x_j = L0 + j*h, h = (L1-L0)/(J+1)) and uniform time levels
t_n = t0 + n*l.  Fields are (J+2) x (J+2) matrices with row index = x node and
column index = y node.
"""

from __future__ import annotations

import dataclasses
import math
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .exceptions import DegenerateExactError, InvalidSpecError

COUPLED = "coupled"          # l = h*sqrt(h)
INDEPENDENT = "independent"  # l given explicitly


@dataclasses.dataclass(frozen=True)
class GridSpec:
    """Mesh parameters.

    step_rule 'coupled' ties the time step to the space step, l = h^(3/2);
    'independent' uses the explicit value in `l`.  sing_eps is the threshold
    below which a node counts as sitting on a coordinate axis (default h/100).
    """

    L0: float
    L1: float
    J: int
    t0: float = 0.0
    n_steps: int = 2
    alpha: float = 0.25
    step_rule: str = COUPLED
    sing_eps: float | None = None
    l: float | None = None

    def validate(self):
        if self.L1 <= self.L0:
            raise InvalidSpecError(f"need L1 > L0, got [{self.L0}, {self.L1}]")
        if self.J < 1:
            raise InvalidSpecError(f"need J >= 1, got J={self.J}")
        if self.t0 < 0:
            raise InvalidSpecError(f"need t0 >= 0, got t0={self.t0}")
        if self.n_steps < 1:
            raise InvalidSpecError(f"need n_steps >= 1, got {self.n_steps}")
        if self.step_rule not in (COUPLED, INDEPENDENT):
            raise InvalidSpecError(f"unknown step_rule {self.step_rule!r}")
        if self.step_rule == INDEPENDENT and (self.l is None or self.l <= 0):
            raise InvalidSpecError("independent step rule needs an explicit l > 0")
        if self.sing_eps is not None and self.sing_eps < 0:
            raise InvalidSpecError("sing_eps must be >= 0")


@dataclasses.dataclass(frozen=True)
class Grid:
    """Realized mesh: node coordinates, time levels, and mesh ratios."""

    spec: GridSpec
    nodes_x: np.ndarray
    nodes_y: np.ndarray
    h: float
    l: float
    sing_eps: float
    singular_x: np.ndarray  # indices j with |x_j| <= sing_eps
    singular_y: np.ndarray

    @property
    def size(self):
        """Matrix dimension J+2."""
        return self.nodes_x.size

    @property
    def sigma(self):
        return self.l * self.l / (self.h * self.h)

    @property
    def t0(self):
        return self.spec.t0

    @property
    def n_steps(self):
        return self.spec.n_steps

    def time(self, n):
        return self.spec.t0 + n * self.l

    @property
    def times(self):
        return self.spec.t0 + self.l * np.arange(self.spec.n_steps + 1)

    def meshgrid(self):
        """(X, Y) coordinate matrices matching the field convention."""
        return np.meshgrid(self.nodes_x, self.nodes_y, indexing="ij")


def build_grid(spec: GridSpec) -> Grid:
    """Build the uniform mesh, flagging nodes that sit on a coordinate axis."""
    spec.validate()
    h = (spec.L1 - spec.L0) / (spec.J + 1)
    if spec.step_rule == COUPLED:
        l = h * math.sqrt(h)
    else:
        l = float(spec.l)
    nodes = spec.L0 + h * np.arange(spec.J + 2)
    sing_eps = spec.sing_eps if spec.sing_eps is not None else h / 100.0
    singular = np.flatnonzero(np.abs(nodes) <= sing_eps)
    return Grid(
        spec=spec,
        nodes_x=nodes,
        nodes_y=nodes.copy(),
        h=h,
        l=l,
        sing_eps=sing_eps,
        singular_x=singular,
        singular_y=singular.copy(),
    )


@dataclasses.dataclass(frozen=True)
class Field:
    """One (J+2) x (J+2) real matrix at a given time level."""

    values: np.ndarray
    level: int = 0

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise InvalidSpecError(f"field must be square, got shape {v.shape}")
        object.__setattr__(self, "values", v)

    @property
    def size(self):
        return self.values.shape[0]

    def check_finite(self):
        if not np.isfinite(self.values).all():
            raise InvalidSpecError(f"field at level {self.level} contains NaN/Inf")
        return self


@dataclasses.dataclass(frozen=True)
class CoupledState:
    """The unknown pair (U, V) at one time level."""

    U: Field
    V: Field

    def __post_init__(self):
        if self.U.size != self.V.size:
            raise InvalidSpecError("U and V must share dimensions")
        if self.U.level != self.V.level:
            raise InvalidSpecError("U and V must share the time level")

    @property
    def level(self):
        return self.U.level

    def sup_norm(self):
        """Combined Frobenius norm of the pair."""
        return math.hypot(l2_norm(self.U), l2_norm(self.V))


def l2_norm(X) -> float:
    """Frobenius norm (sum |X_ij|^2)^(1/2)."""
    values = X.values if isinstance(X, Field) else np.asarray(X)
    return float(np.linalg.norm(values))


def sample(f: Callable, grid: Grid, level: int = 0) -> Field:
    """Sample f(x, y) at all grid nodes; f must accept array arguments."""
    X, Y = grid.meshgrid()
    try:
        values = np.broadcast_to(np.asarray(f(X, Y), dtype=float), X.shape)
    except Exception as exc:
        raise InvalidSpecError(
            f"sampling failed on nodes x in [{grid.nodes_x[0]}, {grid.nodes_x[-1]}]: {exc}"
        ) from exc
    return Field(np.array(values), level=level)


def sample_time(f: Callable, grid: Grid, t: float, level: int = 0) -> Field:
    """Sample f(x, y, t) at all grid nodes for a fixed time."""
    X, Y = grid.meshgrid()
    values = np.broadcast_to(np.asarray(f(X, Y, t), dtype=float), X.shape)
    return Field(np.array(values), level=level)


class ErrorReport(NamedTuple):
    """Discrete error functionals, max over time levels and both components.

    er carries the per-node RMS scaling ||E||_F / (J+2), the scale on which
    the reference table's error values live (a pointwise-O(h^2) field then
    shows order 2); fro is the raw Frobenius value.  rel_er is the ratio
    max_n ||E^n|| / ||x^n|| and is the same under either scaling.
    """

    er: float
    rel_er: float
    er_u: float
    rel_er_u: float
    er_v: float
    rel_er_v: float
    fro: float
    fro_u: float
    fro_v: float


def discrete_errors(
    traj_numeric: Sequence[CoupledState],
    exact: Callable,
    grid: Grid,
) -> ErrorReport:
    """Per-component max_n ||X^n - x^n|| and max_n ||X^n - x^n|| / ||x^n||.

    `exact` is called as exact(X, Y, t) with coordinate matrices and must
    return the pair (u, v).  All J+2 nodes per axis enter the norm, boundary
    included.  Raises DegenerateExactError if a nonzero trajectory is
    compared against an exact level of zero norm.
    """
    if not traj_numeric:
        raise InvalidSpecError("empty trajectory")
    X, Y = grid.meshgrid()
    fro_u = fro_v = rel_u = rel_v = 0.0
    for state in traj_numeric:
        t = grid.time(state.level)
        u_ex, v_ex = exact(X, Y, t)
        u_ex = np.broadcast_to(np.asarray(u_ex, dtype=float), X.shape)
        v_ex = np.broadcast_to(np.asarray(v_ex, dtype=float), X.shape)
        du = float(np.linalg.norm(state.U.values - u_ex))
        dv = float(np.linalg.norm(state.V.values - v_ex))
        nu = float(np.linalg.norm(u_ex))
        nv = float(np.linalg.norm(v_ex))
        fro_u = max(fro_u, du)
        fro_v = max(fro_v, dv)
        if nu == 0.0 or nv == 0.0:
            if du > 0.0 or dv > 0.0:
                raise DegenerateExactError(
                    f"exact solution vanishes identically at level {state.level}"
                )
            continue  # 0/0 convention: an exactly reproduced zero level
        rel_u = max(rel_u, du / nu)
        rel_v = max(rel_v, dv / nv)
    scale = grid.size
    return ErrorReport(
        er=max(fro_u, fro_v) / scale,
        rel_er=max(rel_u, rel_v),
        er_u=fro_u / scale,
        rel_er_u=rel_u,
        er_v=fro_v / scale,
        rel_er_v=rel_v,
        fro=max(fro_u, fro_v),
        fro_u=fro_u,
        fro_v=fro_v,
    )
