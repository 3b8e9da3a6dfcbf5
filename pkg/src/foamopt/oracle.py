"""Problem contract for composite saddle-point problems.

The problem is ``min_x max_y r(x) + F(x, y) - g(y)`` with ``F`` smooth,
``mu_x``-strongly convex in ``x`` and ``mu_y``-strongly concave in ``y``.
Solvers only touch ``F`` through :meth:`SaddleOracle.grad` and the
regularizers through their prox maps, so the counters on the oracle are the
single source of truth for gradient complexity.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

__all__ = [
    "ContractError",
    "SaddlePoint",
    "SaddleOracle",
    "grad_hat",
    "prox_zero",
    "prox_l1",
    "prox_box",
    "ZeroProx",
    "L1Prox",
    "BoxProx",
    "accuracy",
]


class ContractError(ValueError):
    """Raised when a caller breaks a documented precondition."""


def _as_vector(v, name: str) -> np.ndarray:
    arr = np.asarray(v, dtype=np.float64)
    if arr.ndim != 1:
        arr = arr.reshape(-1)
    if not np.all(np.isfinite(arr)):
        raise ContractError(f"{name} has non-finite entries")
    return arr


@dataclass(frozen=True)
class SaddlePoint:
    """A primal-dual pair ``(x, y)``."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", _as_vector(self.x, "x"))
        object.__setattr__(self, "y", _as_vector(self.y, "y"))

    @property
    def dims(self) -> tuple[int, int]:
        return self.x.size, self.y.size

    def stacked(self) -> np.ndarray:
        return np.concatenate([self.x, self.y])


# --------------------------------------------------------------------------
# prox library
# --------------------------------------------------------------------------

class ZeroProx:
    """Prox of the zero function (identity map)."""

    kind = "zero"

    def __call__(self, step: float, v: np.ndarray) -> np.ndarray:
        return v

    def value(self, x: np.ndarray) -> float:
        return 0.0

    def subgradient_violation(self, x: np.ndarray, b: np.ndarray) -> float:
        """Distance from ``b`` to the subdifferential at ``x`` (here ``{0}``)."""
        return float(np.max(np.abs(b), initial=0.0))

    def to_dict(self) -> dict:
        return {"kind": "zero"}


class L1Prox:
    """Prox of ``tau * ||u||_1``: soft thresholding at level ``step * tau``."""

    kind = "l1"

    def __init__(self, tau: float):
        if not tau > 0:
            raise ContractError("l1 weight must be positive")
        self.tau = float(tau)

    def __call__(self, step: float, v: np.ndarray) -> np.ndarray:
        thresh = step * self.tau
        return np.sign(v) * np.maximum(np.abs(v) - thresh, 0.0)

    def value(self, x: np.ndarray) -> float:
        return self.tau * float(np.sum(np.abs(x)))

    def subgradient_violation(self, x: np.ndarray, b: np.ndarray) -> float:
        # zero coordinates need |b_i| <= tau, the rest b_i = tau * sign(x_i)
        on_support = x != 0
        err_support = np.abs(b - self.tau * np.sign(x))[on_support]
        err_zero = np.maximum(np.abs(b) - self.tau, 0.0)[~on_support]
        return float(max(np.max(err_support, initial=0.0),
                         np.max(err_zero, initial=0.0)))

    def to_dict(self) -> dict:
        return {"kind": "l1", "tau": self.tau}


class BoxProx:
    """Projection onto ``[lo, hi]``; the prox of the box indicator."""

    kind = "box"

    def __init__(self, lo, hi):
        lo = np.atleast_1d(np.asarray(lo, dtype=np.float64))
        hi = np.atleast_1d(np.asarray(hi, dtype=np.float64))
        if np.any(lo > hi):
            bad = int(np.argmax(lo > hi))
            raise ContractError(f"box bound lo > hi at coordinate {bad}")
        self.lo = lo
        self.hi = hi

    def __call__(self, step: float, v: np.ndarray) -> np.ndarray:
        return np.clip(v, self.lo, self.hi)

    def value(self, x: np.ndarray) -> float:
        inside = np.all(x >= self.lo) and np.all(x <= self.hi)
        return 0.0 if inside else np.inf

    def subgradient_violation(self, x: np.ndarray, b: np.ndarray) -> float:
        """Normal-cone test: ``b <= 0`` at ``lo``, ``b >= 0`` at ``hi``, else 0."""
        lo = np.broadcast_to(self.lo, x.shape)
        hi = np.broadcast_to(self.hi, x.shape)
        outside = np.maximum(np.maximum(lo - x, x - hi), 0.0)
        at_lo = x <= lo
        at_hi = x >= hi
        err = np.abs(b).copy()
        err[at_lo & ~at_hi] = np.maximum(b[at_lo & ~at_hi], 0.0)
        err[at_hi & ~at_lo] = np.maximum(-b[at_hi & ~at_lo], 0.0)
        err[at_lo & at_hi] = 0.0
        return float(max(np.max(err, initial=0.0), np.max(outside, initial=0.0)))

    def to_dict(self) -> dict:
        return {"kind": "box", "lo": self.lo.tolist(), "hi": self.hi.tolist()}


prox_zero = ZeroProx()


def prox_l1(tau: float) -> L1Prox:
    return L1Prox(tau)


def prox_box(lo, hi) -> BoxProx:
    return BoxProx(lo, hi)


# --------------------------------------------------------------------------
# oracle
# --------------------------------------------------------------------------

GradFn = Callable[[np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray]]
ProxFn = Callable[[float, np.ndarray], np.ndarray]


@dataclass
class SaddleOracle:
    """First-order access to a composite saddle-point problem.

    Parameters
    ----------
    grad : callable
        ``grad(x, y) -> (grad_x F, grad_y F)``.
    prox_r, prox_g : callable
        ``prox(step, v)`` for the regularizers ``r`` and ``g``.
    mu_x, mu_y : float
        Strong convexity / concavity moduli of ``F``.
    lip : float
        Joint smoothness constant ``L`` of ``F``.
    dims : tuple of int
        ``(d_x, d_y)``.
    """

    grad_fn: GradFn
    prox_r_fn: ProxFn
    prox_g_fn: ProxFn
    mu_x: float
    mu_y: float
    lip: float
    dims: tuple[int, int]
    grad_count: int = field(default=0, init=False)
    prox_count: int = field(default=0, init=False)

    def __post_init__(self):
        for name in ("mu_x", "mu_y", "lip"):
            if not getattr(self, name) > 0:
                raise ContractError(f"{name} must be positive")
        if self.mu_x > self.lip or self.mu_y > self.lip:
            raise ContractError("moduli must not exceed the smoothness constant")

    @property
    def kappa_x(self) -> float:
        return self.lip / self.mu_x

    @property
    def kappa_y(self) -> float:
        return self.lip / self.mu_y

    def grad(self, x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        if x.shape != (self.dims[0],) or y.shape != (self.dims[1],):
            raise ContractError(
                f"expected dims {self.dims}, got {(x.size, y.size)}")
        self.grad_count += 1
        return self.grad_fn(x, y)

    def prox_r(self, step: float, v: np.ndarray) -> np.ndarray:
        self.prox_count += 1
        return self.prox_r_fn(step, v)

    def prox_g(self, step: float, v: np.ndarray) -> np.ndarray:
        self.prox_count += 1
        return self.prox_g_fn(step, v)

    def reset_counters(self) -> None:
        self.grad_count = 0
        self.prox_count = 0


def grad_hat(oracle: SaddleOracle, x: np.ndarray,
             y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Gradient of ``F(x,y) - mu_x/2 |x|^2 + mu_y/2 |y|^2``.

    Costs one oracle gradient call.
    """
    gx, gy = oracle.grad(x, y)
    return gx - oracle.mu_x * x, gy + oracle.mu_y * y


def accuracy(p: SaddlePoint, ref: SaddlePoint) -> float:
    """Squared distance ``|x - x*|^2 + |y - y*|^2``."""
    if p.dims != ref.dims:
        raise ContractError(f"dimension mismatch {p.dims} vs {ref.dims}")
    dx = p.x - ref.x
    dy = p.y - ref.y
    return float(dx @ dx + dy @ dy)
