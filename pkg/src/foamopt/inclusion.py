"""Extra anchored gradient for composite monotone inclusions.

Solves ``0 in A(u) + B(u)`` where ``A`` is single-valued, monotone and
``M``-Lipschitz and ``B`` is maximally monotone, accessed only through its
resolvent ``J_{lam B}``. Every iterate carries a certificate ``b in B(u)``
recovered from the resolvent argument, so ``a + b`` is an exact element of
``(A + B)(u)`` and its norm is the residual being driven to zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .oracle import ContractError

__all__ = [
    "InclusionProblem",
    "EagState",
    "EagResult",
    "InnerBudgetExceeded",
    "SolverAbort",
    "eag_beta",
    "eag_lambda",
    "eag_init",
    "eag_step",
    "eag_solve",
    "eag_lyapunov",
    "beta_product",
    "LAMBDA_CAP",
]

LAMBDA_CAP = 1e6


class InnerBudgetExceeded(RuntimeError):
    """A stopping predicate was not met within the iteration cap.

    The final state is kept on ``self.state`` for post-mortem inspection.
    """

    def __init__(self, message: str, state=None):
        super().__init__(message)
        self.state = state


class SolverAbort(FloatingPointError):
    """A non-finite value appeared inside an iteration."""

    def __init__(self, message: str, state=None):
        super().__init__(message)
        self.state = state


@dataclass
class InclusionProblem:
    """``A`` (single-valued, ``lip_m``-Lipschitz) plus a resolvent of ``B``.

    ``resolvent_b(lam, u)`` must return ``u+`` with ``(u - u+)/lam in B(u+)``.
    For ``B`` the subdifferential of a convex ``h`` this is ``prox_h(lam, u)``,
    so every prox in :mod:`foamopt.oracle` can be passed directly.
    """

    apply_a: Callable[[np.ndarray], np.ndarray]
    resolvent_b: Callable[[float, np.ndarray], np.ndarray]
    lip_m: float
    a_calls: int = field(default=0, init=False)
    resolvent_calls: int = field(default=0, init=False)

    def a(self, u: np.ndarray) -> np.ndarray:
        self.a_calls += 1
        return self.apply_a(u)

    def resolvent(self, lam: float, u: np.ndarray) -> np.ndarray:
        self.resolvent_calls += 1
        return self.resolvent_b(lam, u)


@dataclass(frozen=True)
class EagState:
    u0: np.ndarray
    u: np.ndarray
    a: np.ndarray
    b: np.ndarray
    t: int

    @property
    def residual(self) -> np.ndarray:
        return self.a + self.b


@dataclass
class EagResult:
    u: np.ndarray
    residual: np.ndarray
    b: np.ndarray
    iters: int
    history: list = field(default_factory=list)


def eag_beta(t: int) -> float:
    """Anchoring weight ``2 / (t + 3)``."""
    if t < 0:
        raise ContractError("t must be non-negative")
    return 2.0 / (t + 3)


def eag_lambda(m: float) -> float:
    """Step size ``1 / (sqrt(5) M)``, capped at ``LAMBDA_CAP`` for tiny ``M``."""
    if not m > 0:
        raise ContractError("Lipschitz constant must be positive")
    return min(1.0 / (math.sqrt(5.0) * m), LAMBDA_CAP)


def beta_product(T: int) -> float:
    """Running product ``prod_{t<T} (1 - beta_t)``; equals ``2/((T+1)(T+2))``."""
    if T < 1:
        raise ContractError("T must be at least 1")
    prod = 1.0
    for t in range(T):
        prod *= 1.0 - eag_beta(t)
    return prod


def _check_finite(state: EagState, where: str) -> None:
    for name in ("u", "a", "b"):
        if not np.all(np.isfinite(getattr(state, name))):
            raise SolverAbort(f"non-finite {name} after {where} (t={state.t})",
                              state)


def eag_init(problem: InclusionProblem, u_init: np.ndarray,
             lam: float) -> EagState:
    """Forward-backward start: ``u0 = J(u_init - lam A(u_init))``."""
    if not lam > 0:
        raise ContractError("lambda must be positive")
    u_init = np.asarray(u_init, dtype=np.float64)
    a_init = problem.a(u_init)
    if not np.all(np.isfinite(a_init)):
        raise SolverAbort("non-finite A(u_init)")
    v = u_init - lam * a_init
    u0 = problem.resolvent(lam, v)
    state = EagState(u0=u0, u=u0, a=problem.a(u0), b=(v - u0) / lam, t=0)
    _check_finite(state, "init")
    return state


def eag_step(problem: InclusionProblem, state: EagState,
             lam: float) -> EagState:
    """One anchored extragradient step (two ``A`` calls, one resolvent)."""
    beta = eag_beta(state.t)
    anchored = state.u + beta * (state.u0 - state.u)
    u_half = anchored - lam * (state.a + state.b)
    v = anchored - lam * problem.a(u_half)
    u_next = problem.resolvent(lam, v)
    new = replace(state, u=u_next, a=problem.a(u_next),
                  b=(v - u_next) / lam, t=state.t + 1)
    _check_finite(new, "step")
    return new


def eag_solve(problem: InclusionProblem, u_init, *,
              iters: Optional[int] = None,
              stop: Optional[Callable[[EagState], bool]] = None,
              lam: Optional[float] = None,
              max_iters: Optional[int] = None,
              keep_history: bool = False) -> EagResult:
    """Run the anchored extragradient iteration.

    Exactly one of ``iters`` (fixed number of steps) and ``stop`` (predicate
    checked before every step, including at ``t = 0``) must be given. In
    predicate mode ``max_iters`` is mandatory and exceeding it raises
    :class:`InnerBudgetExceeded`.
    """
    if (iters is None) == (stop is None):
        raise ContractError("give exactly one of iters / stop")
    if iters is not None and iters < 1:
        raise ContractError("iters must be >= 1")
    if stop is not None and max_iters is None:
        raise ContractError("predicate mode needs max_iters")
    if lam is None:
        lam = eag_lambda(problem.lip_m)

    state = eag_init(problem, u_init, lam)
    history = [state] if keep_history else []
    if iters is not None:
        for _ in range(iters):
            state = eag_step(problem, state, lam)
            if keep_history:
                history.append(state)
    else:
        while not stop(state):
            if state.t >= max_iters:
                raise InnerBudgetExceeded(
                    f"stopping predicate not met after {state.t} iterations",
                    state)
            state = eag_step(problem, state, lam)
            if keep_history:
                history.append(state)
    return EagResult(u=state.u, residual=state.residual, b=state.b,
                     iters=state.t, history=history)


def eag_lyapunov(state: EagState, lam: float) -> float:
    """``<r, u - u0> + lam / (2 beta_t) |r|^2`` with ``r = a + b``."""
    r = state.residual
    return float(r @ (state.u - state.u0)
                 + lam / (2.0 * eag_beta(state.t)) * (r @ r))
