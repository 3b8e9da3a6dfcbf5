"""Seeded test instances with known or computable solutions.

The canonical family is the coupled quadratic

    F(x, y) = mu_x/2 |x|^2 + x^T A y - mu_y/2 |y|^2 + b^T x + c^T y

with optional zero / l1 / box regularizers on either block. Every random
draw goes through ``numpy.random.Generator(PCG64(seed))`` so instances are
reproducible from their seed alone.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np

from .appa import AppaParams, InnerSolution
from .baselines import EgConfig, extragradient_solve
from .inclusion import InclusionProblem
from .oracle import (BoxProx, ContractError, L1Prox, SaddleOracle, SaddlePoint,
                     ZeroProx, grad_hat, prox_zero)

__all__ = [
    "QuadraticInstance",
    "make_quadratic",
    "instance_oracle",
    "joint_lipschitz",
    "sigma_for_lipschitz",
    "reference_solution",
    "exact_inner",
    "p_value",
    "condition_sweep",
    "separation_sweep",
    "make_affine_inclusion",
    "assumption_slack",
    "parse_regularizer",
    "instance_to_json",
    "instance_from_json",
    "save_instance",
    "load_instance",
]


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def joint_lipschitz(mu_x: float, mu_y: float, sigma: float) -> float:
    """Spectral norm of the Hessian ``[[mu_x I, A], [A^T, -mu_y I]]``.

    Depends on ``A`` only through its top singular value ``sigma``.
    """
    return 0.5 * (abs(mu_x - mu_y) + math.sqrt((mu_x + mu_y) ** 2 + 4 * sigma**2))


def sigma_for_lipschitz(mu_x: float, mu_y: float, lip: float) -> float:
    """Inverse of :func:`joint_lipschitz` in ``sigma``."""
    s = 2.0 * lip - abs(mu_x - mu_y)
    val = (s * s - (mu_x + mu_y) ** 2) / 4.0
    if val < -1e-12 * s * s:
        raise ContractError("lip is below max(mu_x, mu_y)")
    return math.sqrt(max(val, 0.0))


def parse_regularizer(spec, dim: int):
    """Build a prox object from ``"zero"``, ``"l1:0.1"``, ``"box:-1:1"`` or a dict."""
    if spec is None:
        return prox_zero
    if isinstance(spec, (ZeroProx, L1Prox, BoxProx)):
        return spec
    if isinstance(spec, str):
        parts = spec.split(":")
        kind = parts[0]
        if kind == "zero" and len(parts) == 1:
            return prox_zero
        if kind == "l1" and len(parts) == 2:
            return L1Prox(float(parts[1]))
        if kind == "box" and len(parts) == 3:
            return BoxProx(np.full(dim, float(parts[1])),
                           np.full(dim, float(parts[2])))
        raise ContractError(f"bad regularizer spec {spec!r}")
    kind = spec.get("kind")
    if kind == "zero":
        return prox_zero
    if kind == "l1":
        return L1Prox(spec["tau"])
    if kind == "box":
        return BoxProx(np.broadcast_to(np.asarray(spec["lo"], float), dim).copy(),
                       np.broadcast_to(np.asarray(spec["hi"], float), dim).copy())
    raise ContractError(f"unknown regularizer kind {kind!r}")



@dataclass
class QuadraticInstance:
    a_mat: np.ndarray
    b: np.ndarray
    c: np.ndarray
    mu_x: float
    mu_y: float
    lip: float
    reg_r: object = prox_zero
    reg_g: object = prox_zero
    seed: int = 0

    @property
    def dims(self) -> tuple[int, int]:
        return self.a_mat.shape

    @property
    def smooth(self) -> bool:
        return self.reg_r.kind == "zero" and self.reg_g.kind == "zero"

    def grad(self, x, y):
        return (self.mu_x * x + self.a_mat @ y + self.b,
                self.a_mat.T @ x - self.mu_y * y + self.c)

    def value(self, x, y) -> float:
        return float(0.5 * self.mu_x * (x @ x) + x @ (self.a_mat @ y)
                     - 0.5 * self.mu_y * (y @ y) + self.b @ x + self.c @ y)


def instance_oracle(inst: QuadraticInstance) -> SaddleOracle:
    """Fresh oracle (zeroed counters) for an instance."""
    return SaddleOracle(grad_fn=inst.grad, prox_r_fn=inst.reg_r,
                        prox_g_fn=inst.reg_g, mu_x=inst.mu_x, mu_y=inst.mu_y,
                        lip=inst.lip, dims=inst.dims)


def make_quadratic(d_x: int, d_y: int, mu_x: float, mu_y: float,
                   target_sigma: float, reg_r="zero", reg_g="zero",
                   seed: int = 0, planted: bool = False, check: bool = True):
    """Sample a coupled quadratic with ``sigma_max(A) = target_sigma``.

    ``b`` and ``c`` are standard normal. With ``planted=True`` a standard
    normal ``(x*, y*)`` is drawn instead and ``b, c`` are chosen so that it
    is the saddle point of the unregularized problem, which keeps the
    solution at unit scale however ill-conditioned the instance is.

    Returns ``(oracle, instance)``.
    """
    if target_sigma < 0:
        raise ContractError("target_sigma must be non-negative")
    if not (mu_x > 0 and mu_y > 0):
        raise ContractError("moduli must be positive")
    rng = _rng(seed)
    raw = rng.standard_normal((d_x, d_y))
    if target_sigma == 0:
        a_mat = np.zeros((d_x, d_y))
    else:
        a_mat = raw * (target_sigma / np.linalg.norm(raw, 2))
    if planted:
        xs = rng.standard_normal(d_x)
        ys = rng.standard_normal(d_y)
        b = -(mu_x * xs + a_mat @ ys)
        c = -(a_mat.T @ xs - mu_y * ys)
    else:
        b = rng.standard_normal(d_x)
        c = rng.standard_normal(d_y)
    lip = joint_lipschitz(mu_x, mu_y, target_sigma) * (1 + 1e-12)
    inst = QuadraticInstance(a_mat=a_mat, b=b, c=c, mu_x=mu_x, mu_y=mu_y,
                             lip=lip, reg_r=parse_regularizer(reg_r, d_x),
                             reg_g=parse_regularizer(reg_g, d_y), seed=seed)
    oracle = instance_oracle(inst)
    if check:
        worst = assumption_slack(oracle, seed=seed, n_pairs=20)
        if min(worst.values()) < -1e-9:
            raise ContractError(f"generated instance violates assumptions: {worst}")
    return oracle, inst


def assumption_slack(oracle: SaddleOracle, seed: int = 0, n_pairs: int = 1000,
                     scale: float = 1.0) -> dict:
    """Worst relative slack of strong convexity, concavity and smoothness.

    Negative values mean a violated inequality. Uses the raw gradient map,
    leaving the counters alone.
    """
    rng = _rng(seed + 7919)
    dx, dy = oracle.dims
    sc = sm = lp = math.inf
    for _ in range(n_pairs):
        x1, x2 = scale * rng.standard_normal((2, dx))
        y1, y2 = scale * rng.standard_normal((2, dy))
        # strong convexity in x at fixed y
        g1, _ = oracle.grad_fn(x1, y1)
        g2, _ = oracle.grad_fn(x2, y1)
        d = x1 - x2
        need = oracle.mu_x * (d @ d)
        sc = min(sc, ((g1 - g2) @ d - need) / max(need, 1e-300))
        # strong concavity in y at fixed x
        _, h1 = oracle.grad_fn(x1, y1)
        _, h2 = oracle.grad_fn(x1, y2)
        e = y1 - y2
        need = oracle.mu_y * (e @ e)
        sm = min(sm, (-(h1 - h2) @ e - need) / max(need, 1e-300))
        # joint smoothness
        ga, ha = oracle.grad_fn(x1, y1)
        gb, hb = oracle.grad_fn(x2, y2)
        lhs = (ga - gb) @ (ga - gb) + (ha - hb) @ (ha - hb)
        rhs = oracle.lip**2 * (d @ d + (y1 - y2) @ (y1 - y2))
        lp = min(lp, (rhs - lhs) / rhs)
    return {"strong_convexity": sc, "strong_concavity": sm, "smoothness": lp}


def _linear_solution(inst: QuadraticInstance) -> SaddlePoint:
    d_x, d_y = inst.dims
    kkt = np.block([[inst.mu_x * np.eye(d_x), inst.a_mat],
                    [inst.a_mat.T, -inst.mu_y * np.eye(d_y)]])
    sol = np.linalg.solve(kkt, -np.concatenate([inst.b, inst.c]))
    return SaddlePoint(sol[:d_x], sol[d_x:])


def reference_solution(inst: QuadraticInstance, tol: float = 1e-14,
                       budget: int = 10**7):
    """Saddle point of ``inst`` and a bound on its squared error.

    Smooth instances are solved through the dense stationarity system (bound
    reported as 0). Composite instances use a long extragradient run that
    stops on its certified distance bound; the bound it achieved is returned.
    """
    if inst.smooth:
        return _linear_solution(inst), 0.0
    oracle = instance_oracle(inst)
    d_x, d_y = inst.dims
    res = extragradient_solve(
        oracle, SaddlePoint(np.zeros(d_x), np.zeros(d_y)),
        EgConfig(eps=tol, max_iters=budget // 2), keep_trace=False)
    return res.answer, res.dist_bound


def exact_inner(inst: QuadraticInstance, oracle: SaddleOracle):
    """Closed-form proximal subproblem solver for smooth quadratic instances.

    Returns a callable usable as the ``inner`` argument of
    :func:`foamopt.appa.appa_solve`. Each call spends one counted gradient
    evaluation (to form ``z_f`` and ``w_f``).
    """
    if not inst.smooth:
        raise ContractError("exact inner solver needs r = g = 0")
    d_x, d_y = inst.dims
    a_mat = inst.a_mat

    def inner(z_g, y_g, params: AppaParams) -> InnerSolution:
        inv_theta = 1.0 / params.theta_y
        mat = np.block([[0.5 * inst.mu_x * np.eye(d_x), a_mat],
                        [-a_mat.T, (inst.mu_y + inv_theta) * np.eye(d_y)]])
        rhs = np.concatenate([0.5 * z_g - inst.b, inst.c + inv_theta * y_g])
        sol = np.linalg.solve(mat, rhs)
        x_f, y_f = sol[:d_x], sol[d_x:]
        ghx, ghy = grad_hat(oracle, x_f, y_f)
        return InnerSolution(x_f=x_f, y_f=y_f, z_f=ghx, w_f=-ghy)

    return inner


def p_value(inst: QuadraticInstance, z: np.ndarray, y: np.ndarray,
            rtol: float = 1e-8) -> float:
    """Reformulated objective ``|z|^2/(2 mu_x) + mu_y/2 |y|^2 + G(z, y)``.

    For a smooth quadratic the conjugate term is finite only on the affine
    set ``z = A y + b``, where it equals ``-c^T y``; off that set (beyond
    ``rtol``) the value is ``inf``.
    """
    if not inst.smooth:
        raise ContractError("closed-form objective needs r = g = 0")
    off = z - inst.a_mat @ y - inst.b
    if math.sqrt(off @ off) > rtol * (1.0 + math.sqrt(z @ z)):
        return math.inf
    return float((z @ z) / (2 * inst.mu_x) + 0.5 * inst.mu_y * (y @ y)
                 - inst.c @ y)


def condition_sweep(kappas, d_x: int = 10, d_y: int = 10, seed: int = 0,
                    reg_r="zero", reg_g="zero"):
    """Instances with ``mu_x = mu_y = 1`` and ``L = kappa`` exactly."""
    out = []
    for i, kappa in enumerate(kappas):
        if kappa < 1:
            raise ContractError("condition numbers must be >= 1")
        sigma = sigma_for_lipschitz(1.0, 1.0, kappa)
        out.append(make_quadratic(d_x, d_y, 1.0, 1.0, sigma, reg_r, reg_g,
                                  seed=seed + i, planted=True))
    return out


def separation_sweep(kappas, d_x: int = 10, d_y: int = 20, seed: int = 0):
    """Instances with ``mu_x = 1``, ``mu_y = 1/kappa^2``, ``sigma_max(A) = 1``.

    Then ``sqrt(kx ky)`` grows like ``kappa`` while ``max(kx, ky)`` grows like
    ``kappa^2``. ``d_y > d_x`` leaves directions in ``y`` that only feel the
    weak curvature ``mu_y``.
    """
    out = []
    for kappa in kappas:
        if kappa < 1:
            raise ContractError("condition numbers must be >= 1")
        out.append(make_quadratic(d_x, d_y, 1.0, 1.0 / kappa**2, 1.0,
                                  seed=seed, planted=True))
    return out


def make_affine_inclusion(d: int, kind: str = "zero", seed: int = 0):
    """Affine monotone ``A(u) = K u + q`` with a planted solution.

    ``K`` is a PSD matrix plus a skew part. ``kind`` picks ``B``: ``"zero"``,
    ``"box"`` (normal cone of ``[-1, 1]^d``) or ``"l1"`` (subdifferential of
    ``0.5 |u|_1``). Returns ``(problem, u_star, prox)``.
    """
    rng = _rng(seed)
    g = rng.standard_normal((d, d))
    h = rng.standard_normal((d, d))
    k_mat = g.T @ g / d + (h - h.T) / math.sqrt(d)
    lip_m = float(np.linalg.norm(k_mat, 2))
    u_star = rng.uniform(-0.9, 0.9, d)
    b_star = np.zeros(d)
    pick = rng.integers(0, 3, d)
    if kind == "zero":
        prox = prox_zero
    elif kind == "box":
        prox = BoxProx(-np.ones(d), np.ones(d))
        hi, lo = pick == 1, pick == 2
        u_star[hi], u_star[lo] = 1.0, -1.0
        b_star[hi] = rng.uniform(0, 2, hi.sum())
        b_star[lo] = -rng.uniform(0, 2, lo.sum())
    elif kind == "l1":
        tau = 0.5
        prox = L1Prox(tau)
        zero = pick == 0
        u_star[zero] = 0.0
        b_star[zero] = rng.uniform(-tau, tau, zero.sum())
        b_star[~zero] = tau * np.sign(u_star[~zero])
    else:
        raise ContractError(f"unknown inclusion kind {kind!r}")
    q = -(k_mat @ u_star) - b_star
    problem = InclusionProblem(apply_a=lambda u: k_mat @ u + q,
                               resolvent_b=prox, lip_m=lip_m)
    return problem, u_star, prox


# --------------------------------------------------------------------------
# serialization
# --------------------------------------------------------------------------

def instance_to_json(inst: QuadraticInstance) -> str:
    doc = {
        "family": "quadratic",
        "d_x": inst.dims[0],
        "d_y": inst.dims[1],
        "mu_x": inst.mu_x,
        "mu_y": inst.mu_y,
        "lip": inst.lip,
        "a_mat": inst.a_mat.tolist(),
        "b": inst.b.tolist(),
        "c": inst.c.tolist(),
        "reg_r": inst.reg_r.to_dict(),
        "reg_g": inst.reg_g.to_dict(),
        "seed": inst.seed,
    }
    return json.dumps(doc, indent=1)


def instance_from_json(text: str) -> QuadraticInstance:
    doc = json.loads(text)
    if doc.get("family") != "quadratic":
        raise ContractError(f"unsupported family {doc.get('family')!r}")
    d_x, d_y = int(doc["d_x"]), int(doc["d_y"])
    a_mat = np.asarray(doc["a_mat"], dtype=np.float64).reshape(d_x, d_y)
    return QuadraticInstance(
        a_mat=a_mat, b=np.asarray(doc["b"], float), c=np.asarray(doc["c"], float),
        mu_x=float(doc["mu_x"]), mu_y=float(doc["mu_y"]), lip=float(doc["lip"]),
        reg_r=parse_regularizer(doc["reg_r"], d_x),
        reg_g=parse_regularizer(doc["reg_g"], d_y), seed=int(doc["seed"]))


def save_instance(inst: QuadraticInstance, path: Union[str, Path]) -> None:
    Path(path).write_text(instance_to_json(inst))


def load_instance(path: Union[str, Path]) -> QuadraticInstance:
    return instance_from_json(Path(path).read_text())
