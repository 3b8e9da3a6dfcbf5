"""FOAM: accelerated proximal point with an anchored extragradient inner loop.

The outer loop is the one in :mod:`foamopt.appa`. Each proximal subproblem
is a strongly monotone inclusion in ``(x, y)`` that is solved by the
anchored extragradient iteration of :mod:`foamopt.inclusion`, written here
directly in the original coordinates: the per-block scaling ``gamma_x``,
``gamma_y`` turns into prox step sizes ``gamma_x * lam`` and
``gamma_y * lam``, so the scaled space is never formed.

All constants come from :func:`build_schedule` and depend only on
``(mu_x, mu_y, L)``.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .appa import (AppaParams, AppaState, InnerSolution, appa_extrapolate,
                   appa_lyapunov, appa_update, to_minimax)
from .inclusion import InnerBudgetExceeded, eag_beta
from .oracle import ContractError, SaddleOracle, SaddlePoint, accuracy
from .trace import TraceRecord

__all__ = [
    "FoamSchedule",
    "FoamResult",
    "build_schedule",
    "scaled_operator_a",
    "inner_stop_test",
    "foam_inner",
    "foam_solve",
    "INNER_SLACK",
]

# extra inner iterations allowed beyond the theoretical bound
INNER_SLACK = 10


@dataclass(frozen=True)
class FoamSchedule:
    mu_x: float
    mu_y: float
    lip: float
    alpha: float
    theta_y: float
    lam: float
    eta_z: float
    eta_y: float
    gamma_x: float
    gamma_y: float
    lip_m: float
    t_max: int

    @property
    def appa_params(self) -> AppaParams:
        return AppaParams(mu_x=self.mu_x, mu_y=self.mu_y, alpha=self.alpha,
                          theta_y=self.theta_y, eta_z=self.eta_z,
                          eta_y=self.eta_y)

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def build_schedule(mu_x: float, mu_y: float, lip: float) -> FoamSchedule:
    for name, val in (("mu_x", mu_x), ("mu_y", mu_y), ("lip", lip)):
        if not val > 0:
            raise ContractError(f"{name} must be positive, got {val}")
    if mu_x > lip:
        raise ContractError(f"mu_x={mu_x} exceeds lip={lip}")
    if mu_y > lip:
        raise ContractError(f"mu_y={mu_y} exceeds lip={lip}")

    theta_y = 8.0 / mu_x
    alpha = min(1.0, math.sqrt(theta_y * mu_y))
    gamma_x = 8.0 / mu_x
    gamma_y = theta_y
    lip_m = 2.0 * max(gamma_x * lip, gamma_y * (lip + 1.0 / theta_y))
    # equal to 1/(sqrt(5) M) for the M above
    lam = 1.0 / (2.0 * math.sqrt(5.0) * (1.0 + 8.0 * lip / mu_x))
    t_max = math.ceil(48.0 * math.sqrt(2.0)
                      * max(8.0 * lip / mu_x, 1.0 + theta_y * lip)) - 1
    return FoamSchedule(
        mu_x=mu_x, mu_y=mu_y, lip=lip, alpha=alpha, theta_y=theta_y,
        lam=lam, eta_z=mu_x / 2.0,
        eta_y=min(1.0 / (2.0 * mu_y), theta_y / (2.0 * alpha)),
        gamma_x=gamma_x, gamma_y=gamma_y, lip_m=lip_m, t_max=t_max)


def _shifted_field(oracle: SaddleOracle, sched: FoamSchedule,
                   z_g: np.ndarray, y_g: np.ndarray):
    """Subproblem operator; also returns the raw gradient it used.

    The ``-/+ mu`` shifts of the gradient cancel against the subproblem's own
    quadratic terms, so the raw gradient is used directly.
    """
    half_mu = 0.5 * sched.mu_x
    half_zg = 0.5 * z_g
    inv_theta = 1.0 / sched.theta_y
    grad = oracle.grad

    def field_(x, y):
        gx, gy = grad(x, y)
        ax = gx - half_mu * x - half_zg
        ay = inv_theta * (y - y_g) - gy
        return ax, ay, gx, gy

    return field_


def scaled_operator_a(oracle: SaddleOracle, sched: FoamSchedule,
                      z_g: np.ndarray, y_g: np.ndarray):
    """Return ``(x, y) -> (a_x, a_y)`` for the subproblem anchored at ``(z_g, y_g)``.

    Each evaluation costs one oracle gradient call.
    """
    field_ = _shifted_field(oracle, sched, z_g, y_g)

    def a(x, y):
        ax, ay, _, _ = field_(x, y)
        return ax, ay

    return a


def inner_stop_test(sched: FoamSchedule, x_t, y_t, x_init, y_init, rx, ry) -> bool:
    """Inner stopping test: scaled residual no larger than scaled displacement."""
    dx = x_t - x_init
    dy = y_t - y_init
    lhs = sched.gamma_x * (rx @ rx) + sched.gamma_y * (ry @ ry)
    rhs = (dx @ dx) / sched.gamma_x + (dy @ dy) / sched.gamma_y
    return bool(lhs <= rhs)


def foam_inner(oracle: SaddleOracle, sched: FoamSchedule, z_g: np.ndarray,
               y_g: np.ndarray, max_iters: Optional[int] = None) -> InnerSolution:
    """Approximate proximal step via anchored extragradient.

    Costs ``2 t + 2`` gradient calls and ``2 t + 2`` prox calls, where ``t``
    is the returned ``inner_iters``.

    Raises
    ------
    InnerBudgetExceeded
        If the stopping test fails for more than ``max_iters`` steps
        (default ``t_max + INNER_SLACK``).
    """
    if max_iters is None:
        max_iters = sched.t_max + INNER_SLACK
    field_ = _shifted_field(oracle, sched, z_g, y_g)
    sx = sched.gamma_x * sched.lam
    sy = sched.gamma_y * sched.lam

    x_init = -z_g / sched.mu_x
    y_init = y_g
    ax, ay, _, _ = field_(x_init, y_init)
    vx = x_init - sx * ax
    vy = y_init - sy * ay
    x0 = oracle.prox_r(sx, vx)
    y0 = oracle.prox_g(sy, vy)
    bx = (vx - x0) / sx
    by = (vy - y0) / sy
    x, y = x0, y0
    ax, ay, gx, gy = field_(x, y)

    t = 0
    while True:
        rx = ax + bx
        ry = ay + by
        if inner_stop_test(sched, x, y, x_init, y_init, rx, ry):
            break
        if t >= max_iters:
            raise InnerBudgetExceeded(
                f"inner loop exceeded {max_iters} iterations", (x, y, t))
        beta = eag_beta(t)
        xa = x + beta * (x0 - x)
        ya = y + beta * (y0 - y)
        ahx, ahy, _, _ = field_(xa - sx * rx, ya - sy * ry)
        vx = xa - sx * ahx
        vy = ya - sy * ahy
        x = oracle.prox_r(sx, vx)
        y = oracle.prox_g(sy, vy)
        bx = (vx - x) / sx
        by = (vy - y) / sy
        ax, ay, gx, gy = field_(x, y)
        t += 1
        if not math.isfinite(x @ x + y @ y):
            raise FloatingPointError(f"non-finite inner iterate at t={t}")

    ghx = gx - sched.mu_x * x
    ghy = gy + sched.mu_y * y
    return InnerSolution(x_f=x, y_f=y, z_f=ghx + bx, w_f=by - ghy,
                         inner_iters=t, r_x=rx, r_y=ry)


@dataclass
class FoamResult:
    answer: SaddlePoint
    trace: list
    converged: bool
    schedule: FoamSchedule
    stop_rule: str
    states: list = field(default_factory=list)
    inner: list = field(default_factory=list)


def foam_solve(oracle: SaddleOracle, z0, y0, eps: float,
               ref: Optional[SaddlePoint] = None, max_grad: int = 10**7, *,
               schedule: Optional[FoamSchedule] = None,
               p_gap: Optional[Callable[[np.ndarray, np.ndarray], float]] = None,
               max_outer: Optional[int] = None,
               keep_states: bool = False) -> FoamResult:
    """Solve the saddle-point problem to accuracy ``eps``.

    With ``ref`` given, stops once ``accuracy(answer, ref) <= eps``. Without
    it, stops once the scaled residual of the last inner solve drops below
    ``eps * min(mu_x/8, 1/theta_y)**2`` (a heuristic; ``stop_rule`` says
    which rule was used). ``p_gap(z_f, y_f)``, when given, supplies the
    objective gap of the reformulated problem so the trace carries the full
    potential instead of its distance-only part.
    """
    if not eps > 0:
        raise ContractError("eps must be positive")
    sched = schedule or build_schedule(oracle.mu_x, oracle.mu_y, oracle.lip)
    params = sched.appa_params
    mu_x = sched.mu_x
    stop_rule = "reference" if ref is not None else "residual-heuristic"
    resid_tol = eps * min(mu_x / 8.0, 1.0 / sched.theta_y) ** 2
    if ref is not None:
        z_star = -mu_x * ref.x
        y_star = ref.y

    state = AppaState.start(z0, y0)
    states = [state] if keep_states else []
    sols = []
    trace = []
    t_start = time.perf_counter_ns()

    def record(state, inner_iters):
        ans = to_minimax(state, mu_x)
        acc = accuracy(ans, ref) if ref is not None else math.nan
        lyap = math.nan
        if ref is not None:
            gap = p_gap(state.z_f, state.y_f) if p_gap is not None else 0.0
            lyap = appa_lyapunov(state, z_star, y_star, params, gap)
        trace.append(TraceRecord(
            outer_k=state.k, grad_count=oracle.grad_count,
            prox_count=oracle.prox_count, accuracy=acc,
            inner_iters=inner_iters, lyapunov=lyap,
            wall_nanos=time.perf_counter_ns() - t_start))
        return acc

    acc = record(state, 0)
    converged = ref is not None and acc <= eps
    while not converged:
        if oracle.grad_count >= max_grad:
            break
        if max_outer is not None and state.k >= max_outer:
            break
        z_g, y_g = appa_extrapolate(state, params.alpha)
        sol = foam_inner(oracle, sched, z_g, y_g)
        state = appa_update(state, sol, params)
        if keep_states:
            states.append(state)
            sols.append(sol)
        acc = record(state, sol.inner_iters)
        if ref is not None:
            converged = acc <= eps
        else:
            resid = (sched.gamma_x * (sol.r_x @ sol.r_x)
                     + sched.gamma_y * (sol.r_y @ sol.r_y))
            converged = resid <= resid_tol

    return FoamResult(answer=to_minimax(state, mu_x), trace=trace,
                      converged=converged, schedule=sched,
                      stop_rule=stop_rule, states=states, inner=sols)
