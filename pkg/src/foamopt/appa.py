"""Accelerated proximal-point outer loop on the conjugate reformulation.

The minimax problem is recast as minimizing a strongly convex function of
``(z, y)`` whose minimizer is ``(-mu_x x*, y*)``. That function is never
evaluated; the loop only needs an inner solver returning a tuple
``(x_f, y_f, z_f, w_f)`` that passes the relative-error test implemented in
:func:`check_inexactness`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .oracle import ContractError, SaddleOracle, SaddlePoint

__all__ = [
    "AppaParams",
    "AppaState",
    "InnerSolution",
    "InexactnessReport",
    "AppaResult",
    "appa_extrapolate",
    "check_inexactness",
    "membership_violation",
    "appa_update",
    "appa_lyapunov",
    "appa_solve",
    "lyapunov_rate",
    "to_minimax",
]


@dataclass(frozen=True)
class AppaParams:
    mu_x: float
    mu_y: float
    alpha: float
    theta_y: float
    eta_z: float
    eta_y: float

    def __post_init__(self):
        if not 0 < self.alpha <= 1:
            raise ContractError("alpha must lie in (0, 1]")
        for name in ("mu_x", "mu_y", "theta_y", "eta_z", "eta_y"):
            if not getattr(self, name) > 0:
                raise ContractError(f"{name} must be positive")

    @property
    def theta_z(self) -> float:
        # fixed to 1 / (strong convexity of the z-part), i.e. mu_x
        return self.mu_x

    @classmethod
    def from_rates(cls, mu_x: float, mu_y: float, alpha: float,
                   theta_y: float) -> "AppaParams":
        """Stepsizes ``eta_z = mu_x/2``, ``eta_y = min(1/(2 mu_y), theta_y/(2 alpha))``."""
        if not (0 < alpha <= 1 and mu_y > 0):
            raise ContractError("need 0 < alpha <= 1 and mu_y > 0")
        return cls(mu_x=mu_x, mu_y=mu_y, alpha=alpha, theta_y=theta_y,
                   eta_z=mu_x / 2.0,
                   eta_y=min(1.0 / (2.0 * mu_y), theta_y / (2.0 * alpha)))


@dataclass(frozen=True)
class AppaState:
    z: np.ndarray
    y: np.ndarray
    z_f: np.ndarray
    y_f: np.ndarray
    k: int = 0

    @classmethod
    def start(cls, z0, y0) -> "AppaState":
        z0 = np.asarray(z0, dtype=np.float64)
        y0 = np.asarray(y0, dtype=np.float64)
        return cls(z=z0, y=y0, z_f=z0, y_f=y0, k=0)


@dataclass(frozen=True)
class InnerSolution:
    x_f: np.ndarray
    y_f: np.ndarray
    z_f: np.ndarray
    w_f: np.ndarray
    inner_iters: int = 0
    # subproblem residual (a + b) at termination, when the solver has one
    r_x: Optional[np.ndarray] = None
    r_y: Optional[np.ndarray] = None


@dataclass(frozen=True)
class InexactnessReport:
    ok: bool
    lhs: float
    rhs: float

    def __bool__(self) -> bool:
        return self.ok


@dataclass
class AppaResult:
    states: list
    inner: list
    converged: bool

    @property
    def final(self) -> AppaState:
        return self.states[-1]


def appa_extrapolate(state: AppaState, alpha: float):
    """Convex combination ``alpha (z, y) + (1 - alpha) (z_f, y_f)``."""
    if not 0 < alpha <= 1:
        raise ContractError("alpha must lie in (0, 1]")
    z_g = alpha * state.z + (1.0 - alpha) * state.z_f
    y_g = alpha * state.y + (1.0 - alpha) * state.y_f
    return z_g, y_g


def check_inexactness(oracle: SaddleOracle, sol: InnerSolution,
                      z_g: np.ndarray, y_g: np.ndarray, theta_y: float,
                      tol: Optional[float] = None) -> InexactnessReport:
    """Relative inexactness test for the proximal subproblem.

    ``tol`` defaults to ``1e-9 * (1 + rhs)``.
    """
    mu_x, mu_y = oracle.mu_x, oracle.mu_y
    dx = sol.z_f + 0.5 * mu_x * sol.x_f - 0.5 * z_g
    dy = sol.w_f + mu_y * sol.y_f + (sol.y_f - y_g) / theta_y
    ex = sol.x_f + z_g / mu_x
    ey = sol.y_f - y_g
    lhs = float(8.0 / mu_x * (dx @ dx) + theta_y * (dy @ dy))
    rhs = float(mu_x / 8.0 * (ex @ ex) + (ey @ ey) / theta_y)
    if tol is None:
        tol = 1e-9 * (1.0 + rhs)
    return InexactnessReport(ok=lhs <= rhs + tol, lhs=lhs, rhs=rhs)


def membership_violation(oracle: SaddleOracle, sol: InnerSolution,
                         reg_r, reg_g) -> float:
    """Worst violation of ``z_f - grad_x Fhat in dr(x_f)``, ``w_f + grad_y Fhat in dg(y_f)``.

    ``reg_r`` / ``reg_g`` are prox objects exposing ``subgradient_violation``.
    Uses the raw gradient function so the oracle counters are untouched.
    """
    gx, gy = oracle.grad_fn(sol.x_f, sol.y_f)
    ghx = gx - oracle.mu_x * sol.x_f
    ghy = gy + oracle.mu_y * sol.y_f
    return max(reg_r.subgradient_violation(sol.x_f, sol.z_f - ghx),
               reg_g.subgradient_violation(sol.y_f, sol.w_f + ghy))


def appa_update(state: AppaState, sol: InnerSolution,
                params: AppaParams) -> AppaState:
    mu_x, mu_y = params.mu_x, params.mu_y
    eta_z, eta_y = params.eta_z, params.eta_y
    z = (state.z + eta_z / mu_x * (sol.z_f - state.z)
         - eta_z * (sol.x_f + sol.z_f / mu_x))
    y = (state.y + eta_y * mu_y * (sol.y_f - state.y)
         - eta_y * (sol.w_f + mu_y * sol.y_f))
    return AppaState(z=z, y=y, z_f=sol.z_f, y_f=sol.y_f, k=state.k + 1)


def appa_lyapunov(state: AppaState, z_star: np.ndarray, y_star: np.ndarray,
                  params: AppaParams, p_gap: float = 0.0) -> float:
    """Potential ``|z - z*|^2 / eta_z + |y - y*|^2 / eta_y + (2/alpha) p_gap``.

    ``p_gap`` is the objective gap of the reformulated problem at
    ``(z_f, y_f)``; pass 0 for the distance-only proxy.
    """
    dz = state.z - z_star
    dy = state.y - y_star
    return float((dz @ dz) / params.eta_z + (dy @ dy) / params.eta_y
                 + 2.0 / params.alpha * p_gap)


def lyapunov_rate(params: AppaParams) -> float:
    """Per-iteration contraction factor ``1 - 1/max(2/alpha, 2 alpha/(theta_y mu_y))``."""
    a = params.alpha
    return 1.0 - 1.0 / max(2.0 / a, 2.0 * a / (params.theta_y * params.mu_y))


def to_minimax(state: AppaState, mu_x: float) -> SaddlePoint:
    """Map ``(z, y)`` back to the minimax pair ``(-z / mu_x, y)``."""
    return SaddlePoint(-state.z / mu_x, state.y)


InnerSolver = Callable[[np.ndarray, np.ndarray, AppaParams], InnerSolution]


def appa_solve(oracle: SaddleOracle, inner: InnerSolver, params: AppaParams,
               z0, y0, stop: Callable[[AppaState], bool],
               max_outer: int) -> AppaResult:
    """Run the outer loop until ``stop(state)`` or ``max_outer`` iterations.

    Errors raised by ``inner`` (e.g. a budget overrun) propagate. Hitting
    ``max_outer`` is reported through ``converged=False``.
    """
    state = AppaState.start(z0, y0)
    states = [state]
    sols: list[InnerSolution] = []
    while not stop(state):
        if state.k >= max_outer:
            return AppaResult(states, sols, converged=False)
        z_g, y_g = appa_extrapolate(state, params.alpha)
        sol = inner(z_g, y_g, params)
        state = appa_update(state, sol, params)
        states.append(state)
        sols.append(sol)
    return AppaResult(states, sols, converged=True)
