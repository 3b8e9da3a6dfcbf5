"""Benchmark driver: single runs, condition-number sweeps and invariant checks.

Every run writes ``trace.csv`` (header :data:`foamopt.trace.TRACE_HEADER`)
and ``summary.json`` to its output directory. Accuracy is always measured
against a reference solution computed up front, so ``accuracy`` in the
trace is the squared distance to that reference.

Exit codes: 0 converged, 2 budget exhausted, 3 bad configuration,
4 invariant check failed.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .appa import (AppaState, appa_extrapolate, appa_lyapunov, appa_update,
                   check_inexactness, lyapunov_rate, membership_violation,
                   to_minimax)
from .baselines import EgConfig, extragradient_solve
from .foam import build_schedule, foam_inner, foam_solve
from .inclusion import (InnerBudgetExceeded, beta_product, eag_beta,
                        eag_lambda, eag_lyapunov, eag_solve)
from .oracle import ContractError, SaddlePoint, accuracy
from .problems import (QuadraticInstance, condition_sweep, exact_inner,
                       instance_oracle, load_instance, make_affine_inclusion,
                       make_quadratic, p_value, reference_solution,
                       separation_sweep, sigma_for_lipschitz)
from .trace import TraceRecord, trace_to_csv

__all__ = [
    "EXIT_OK",
    "EXIT_BUDGET",
    "EXIT_CONFIG",
    "EXIT_VERIFY",
    "SOLVERS",
    "RunConfig",
    "RunOutcome",
    "ScalingTable",
    "PropertyResult",
    "VerifyReport",
    "parse_problem",
    "run",
    "scaling_experiment",
    "verify_suite",
    "main",
]

EXIT_OK = 0
EXIT_BUDGET = 2
EXIT_CONFIG = 3
EXIT_VERIFY = 4

SOLVERS = ("foam", "appa-exact", "extragradient")


@dataclass(frozen=True)
class RunConfig:
    """One (problem, solver) cell.

    ``problem`` is either a path to an instance JSON file or an inline spec
    such as ``"quadratic:dx=10,dy=10,mu_x=1,mu_y=1,sigma=5,r=l1:0.1"``
    (see :func:`parse_problem`). ``seed`` is used by inline specs that do not
    set their own.
    """

    problem: str
    solver: str = "foam"
    eps: float = 1e-8
    max_grad: int = 10**7
    seed: int = 0
    out: Optional[str] = None

    def validate(self) -> None:
        if self.solver not in SOLVERS:
            raise ContractError(f"unknown solver {self.solver!r}; "
                                f"choose from {', '.join(SOLVERS)}")
        if not self.eps > 0:
            raise ContractError("eps must be positive")
        if self.max_grad < 1:
            raise ContractError("max_grad must be at least 1")


@dataclass
class RunOutcome:
    exit_code: int
    summary: dict
    trace: list = field(default_factory=list)


_INLINE_KEYS = {"dx", "dy", "mu_x", "mu_y", "sigma", "kappa", "r", "g",
                "seed", "planted"}


def parse_problem(spec: str, seed: int = 0) -> QuadraticInstance:
    """Instance from a file path or an inline ``quadratic:key=value,...`` spec.

    Keys: ``dx``, ``dy`` (default 10), ``mu_x``, ``mu_y`` (default 1),
    ``sigma`` (top singular value of the coupling) or ``kappa`` (sets
    ``sigma`` so that ``L / mu_x = kappa``), ``r``, ``g`` (regularizer
    specs such as ``zero``, ``l1:0.1``, ``box:-1:1``), ``seed`` and
    ``planted`` (0/1).
    """
    if spec.startswith("quadratic:") or spec == "quadratic":
        body = spec.partition(":")[2]
        kv = {}
        for item in filter(None, body.split(",")):
            key, sep, val = item.partition("=")
            if not sep or key not in _INLINE_KEYS:
                raise ContractError(f"bad problem field {item!r}")
            kv[key] = val
        mu_x = float(kv.get("mu_x", 1.0))
        mu_y = float(kv.get("mu_y", 1.0))
        if "sigma" in kv and "kappa" in kv:
            raise ContractError("give sigma or kappa, not both")
        if "kappa" in kv:
            sigma = sigma_for_lipschitz(mu_x, mu_y, float(kv["kappa"]) * mu_x)
        else:
            sigma = float(kv.get("sigma", 1.0))
        _, inst = make_quadratic(
            int(kv.get("dx", 10)), int(kv.get("dy", 10)), mu_x, mu_y, sigma,
            reg_r=kv.get("r", "zero"), reg_g=kv.get("g", "zero"),
            seed=int(kv.get("seed", seed)),
            planted=kv.get("planted", "0") not in ("0", "false"))
        return inst
    path = Path(spec)
    if not path.is_file():
        raise ContractError(f"no such instance file or spec: {spec!r}")
    try:
        return load_instance(path)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise ContractError(f"unreadable instance file {spec!r}: {exc}") from exc


def _foam_cell(inst, oracle, ref, cfg):
    # start with z in the domain of the conjugate term: z0 = grad_x Fhat(0, 0)
    d_x, d_y = inst.dims
    x0, y0 = np.zeros(d_x), np.zeros(d_y)
    gx, _ = oracle.grad(x0, y0)
    z0 = gx - inst.mu_x * x0
    p_gap = None
    if inst.smooth:
        p_star = p_value(inst, -inst.mu_x * ref.x, ref.y)
        p_gap = lambda z, y: p_value(inst, z, y) - p_star
    res = foam_solve(oracle, z0, y0, cfg.eps, ref=ref, max_grad=cfg.max_grad,
                     p_gap=p_gap)
    extra = {"schedule": res.schedule.as_dict(),
             "lyapunov_kind": "full" if inst.smooth else "distance-only",
             "stop_rule": res.stop_rule}
    return res.answer, res.trace, res.converged, extra


def _appa_exact_cell(inst, oracle, ref, cfg):
    if not inst.smooth:
        raise ContractError("appa-exact needs an unregularized instance")
    sched = build_schedule(inst.mu_x, inst.mu_y, inst.lip)
    params = sched.appa_params
    inner = exact_inner(inst, oracle)
    d_x, d_y = inst.dims
    x0, y0 = np.zeros(d_x), np.zeros(d_y)
    gx, _ = oracle.grad(x0, y0)
    state = AppaState.start(gx - inst.mu_x * x0, y0)
    z_star, y_star = -inst.mu_x * ref.x, ref.y
    p_star = p_value(inst, z_star, y_star)
    trace = []

    def record(state):
        acc = accuracy(to_minimax(state, inst.mu_x), ref)
        gap = p_value(inst, state.z_f, state.y_f) - p_star
        trace.append(TraceRecord(
            outer_k=state.k, grad_count=oracle.grad_count,
            prox_count=oracle.prox_count, accuracy=acc,
            lyapunov=appa_lyapunov(state, z_star, y_star, params, gap)))
        return acc

    converged = record(state) <= cfg.eps
    while not converged and oracle.grad_count < cfg.max_grad:
        z_g, y_g = appa_extrapolate(state, params.alpha)
        state = appa_update(state, inner(z_g, y_g, params), params)
        converged = record(state) <= cfg.eps
    extra = {"schedule": sched.as_dict(), "lyapunov_kind": "full",
             "stop_rule": "reference"}
    return to_minimax(state, inst.mu_x), trace, converged, extra


def _eg_cell(inst, oracle, ref, cfg):
    d_x, d_y = inst.dims
    # two gradient calls per iteration
    eg_cfg = EgConfig(eps=cfg.eps, max_iters=max(cfg.max_grad // 2, 0))
    res = extragradient_solve(oracle, SaddlePoint(np.zeros(d_x), np.zeros(d_y)),
                              eg_cfg, ref=ref)
    extra = {"schedule": {"step": 1.0 / (2.0 * oracle.lip)},
             "lyapunov_kind": "none", "stop_rule": res.stop_rule}
    return res.answer, res.trace, res.converged, extra


_CELLS = {"foam": _foam_cell, "appa-exact": _appa_exact_cell,
          "extragradient": _eg_cell}


def _write(out: Optional[str], trace, summary) -> None:
    if out is None:
        return
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    (path / "trace.csv").write_text(trace_to_csv(trace))
    (path / "summary.json").write_text(json.dumps(summary, indent=1,
                                                  sort_keys=True))


def run(config: RunConfig) -> RunOutcome:
    """Run one solver on one instance; write its trace and summary.

    The gradient budget is checked between outer iterations, so a run may
    overshoot ``max_grad`` by at most one inner solve.
    """
    try:
        config.validate()
        inst = parse_problem(config.problem, config.seed)
        if config.solver == "appa-exact" and not inst.smooth:
            raise ContractError("appa-exact needs an unregularized instance")
    except ContractError as exc:
        summary = {"solver": config.solver, "problem": config.problem,
                   "error": str(exc), "exit_code": EXIT_CONFIG}
        _write(config.out, [], summary)
        return RunOutcome(EXIT_CONFIG, summary)

    ref, ref_bound = reference_solution(inst)
    oracle = instance_oracle(inst)
    summary = {"solver": config.solver, "problem": config.problem,
               "eps": config.eps, "max_grad": config.max_grad,
               "seed": inst.seed, "dims": list(inst.dims),
               "mu_x": inst.mu_x, "mu_y": inst.mu_y, "lip": inst.lip,
               "reference_bound": ref_bound}
    try:
        answer, trace, converged, extra = _CELLS[config.solver](
            inst, oracle, ref, config)
        summary.update(extra)
        code = EXIT_OK if converged else EXIT_BUDGET
    except InnerBudgetExceeded as exc:
        answer, trace, converged = None, [], False
        summary["error"] = str(exc)
        code = EXIT_BUDGET
    summary.update({
        "converged": converged,
        "final_accuracy": accuracy(answer, ref) if answer is not None else None,
        "grad_count": oracle.grad_count,
        "prox_count": oracle.prox_count,
        "outer_iterations": trace[-1].outer_k if trace else 0,
        "exit_code": code,
    })
    _write(config.out, trace, summary)
    return RunOutcome(code, summary, trace)


# --------------------------------------------------------------------------
# scaling experiment
# --------------------------------------------------------------------------

@dataclass
class ScalingTable:
    mode: str
    kappas: list
    grad_count_foam: list
    grad_count_eg: list
    slope_foam: Optional[float]
    slope_eg: Optional[float]

    def to_csv(self) -> str:
        lines = ["kappa,grad_count_foam,grad_count_eg"]
        lines += [f"{k!r},{f},{e}" for k, f, e in
                  zip(self.kappas, self.grad_count_foam, self.grad_count_eg)]
        return "\n".join(lines) + "\n"

    def as_dict(self) -> dict:
        return {"mode": self.mode, "kappas": list(self.kappas),
                "grad_count_foam": list(self.grad_count_foam),
                "grad_count_eg": list(self.grad_count_eg),
                "slope_foam": self.slope_foam, "slope_eg": self.slope_eg}


def _loglog_slope(kappas, counts) -> Optional[float]:
    if len(set(kappas)) < 2:
        return None
    slope, _ = np.polyfit(np.log(kappas), np.log(counts), 1)
    return float(slope)


def scaling_experiment(kappas: Sequence[float], eps: float = 1e-6,
                       seed: int = 0, mode: str = "equal",
                       max_grad: int = 10**8) -> ScalingTable:
    """Gradient calls of FOAM and extragradient against ``kappa``.

    ``mode="equal"`` uses :func:`condition_sweep` (``kx = ky = kappa``);
    ``mode="separated"`` uses :func:`separation_sweep` (``sqrt(kx ky)``
    grows like ``kappa`` while ``max(kx, ky)`` grows like ``kappa^2``).
    Slopes are least-squares fits of ``log(count)`` on ``log(kappa)``,
    ``None`` with fewer than two distinct ``kappa``.

    Raises
    ------
    RuntimeError
        If any run fails to reach ``eps``.
    """
    kappas = list(kappas)
    if not kappas:
        raise ContractError("empty kappa list")
    if any(k < 1 for k in kappas) or kappas != sorted(kappas):
        raise ContractError("kappas must be ascending and >= 1")
    if mode == "equal":
        cells = condition_sweep(kappas, seed=seed)
    elif mode == "separated":
        cells = separation_sweep(kappas, seed=seed)
    else:
        raise ContractError(f"unknown sweep mode {mode!r}")

    foam_counts, eg_counts = [], []
    for kappa, (_, inst) in zip(kappas, cells):
        ref, _ = reference_solution(inst)
        d_x, d_y = inst.dims
        oracle = instance_oracle(inst)
        gx, _ = oracle.grad(np.zeros(d_x), np.zeros(d_y))
        res = foam_solve(oracle, gx, np.zeros(d_y), eps, ref=ref,
                         max_grad=max_grad)
        if not res.converged:
            raise RuntimeError(f"FOAM did not converge at kappa={kappa}")
        foam_counts.append(oracle.grad_count)

        oracle = instance_oracle(inst)
        eg = extragradient_solve(
            oracle, SaddlePoint(np.zeros(d_x), np.zeros(d_y)),
            EgConfig(eps=eps, max_iters=max_grad // 2), ref=ref,
            keep_trace=False)
        if not eg.converged:
            raise RuntimeError(f"extragradient did not converge at kappa={kappa}")
        eg_counts.append(oracle.grad_count)

    return ScalingTable(mode=mode, kappas=kappas, grad_count_foam=foam_counts,
                        grad_count_eg=eg_counts,
                        slope_foam=_loglog_slope(kappas, foam_counts),
                        slope_eg=_loglog_slope(kappas, eg_counts))


# --------------------------------------------------------------------------
# invariant suite
# --------------------------------------------------------------------------

@dataclass
class PropertyResult:
    name: str
    passed: bool
    worst_slack: float
    checks: int

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return (f"{tag} {self.name:<24} worst_slack={self.worst_slack:.3e} "
                f"checks={self.checks}")


@dataclass
class VerifyReport:
    results: list
    message: str = ""

    @property
    def ok(self) -> bool:
        return bool(self.results) and all(r.passed for r in self.results)

    def lines(self) -> list:
        out = [r.line() for r in self.results]
        if self.message:
            out.append(self.message)
        return out


class _Tally:
    """Running minimum of slacks; a check passes when its slack is >= 0."""

    def __init__(self, name: str):
        self.name = name
        self.worst = math.inf
        self.checks = 0

    def add(self, slack: float) -> None:
        self.checks += 1
        if math.isnan(slack):
            slack = -math.inf
        self.worst = min(self.worst, slack)

    def result(self) -> PropertyResult:
        return PropertyResult(self.name, self.checks > 0 and self.worst >= 0,
                              self.worst, self.checks)


def default_verify_instances(seed: int = 0) -> list:
    """Quadratic instances used by :func:`verify_suite` when none are given."""
    insts = [inst for _, inst in condition_sweep([1, 5, 20], d_x=8, d_y=6,
                                                 seed=seed)]
    insts.append(make_quadratic(6, 8, 1.0, 0.05, 1.0, seed=seed + 11,
                                planted=True)[1])
    insts.append(make_quadratic(8, 8, 1.0, 1.0, 4.0, reg_r="l1:0.3",
                                reg_g="box:-0.5:0.5", seed=seed + 12)[1])
    insts.append(make_quadratic(8, 6, 2.0, 1.0, 3.0, reg_r="box:-1:1",
                                reg_g="l1:0.2", seed=seed + 13)[1])
    return insts


def _verify_eag(lambda_scale: float, seed: int, n_inst: int = 9,
                horizon: int = 200):
    thm2 = _Tally("eag_residual_bound")
    lyap = _Tally("eag_lyapunov_contraction")
    start = _Tally("eag_anchor_start")
    kinds = ("zero", "box", "l1")
    for i in range(n_inst):
        prob, u_star, _ = make_affine_inclusion(6 + 4 * i, kinds[i % 3],
                                                seed=seed + i)
        m = prob.lip_m
        lam = eag_lambda(m) * lambda_scale
        # step-size premise of the residual bound
        thm2.add(1.0 - lam * math.sqrt(5.0) * m * (1.0 - 1e-12))
        u_init = np.zeros_like(u_star)
        res = eag_solve(prob, u_init, iters=horizon, lam=lam,
                        keep_history=True)
        d0 = float((u_init - u_star) @ (u_init - u_star))
        for t, st in enumerate(res.history[1:], start=1):
            r = st.residual
            bound = 288.0 * m * m * d0 / (t + 1) ** 2
            thm2.add((bound + 1e-9 - r @ r) / bound)
        first = res.history[0]
        e0 = first.u - u_star
        r0 = first.residual
        lhs = 96.0 * m * m * (e0 @ e0) + 12.0 * (r0 @ r0)
        start.add((288.0 * m * m * d0 - lhs) / (288.0 * m * m * d0))
        for cur, nxt in zip(res.history[:-1], res.history[1:]):
            u_cur = eag_lyapunov(cur, lam)
            u_nxt = eag_lyapunov(nxt, lam)
            r = nxt.residual
            scale = (abs(r @ (nxt.u - nxt.u0))
                     + lam / (2.0 * eag_beta(nxt.t)) * (r @ r)) or 1.0
            lyap.add(((1.0 - eag_beta(cur.t)) * u_cur - u_nxt) / scale + 1e-9)
    return [thm2, lyap, start]


def _verify_foam(instances, lambda_scale: float, seed: int, eps: float):
    lem3 = _Tally("inner_operator_bounds")
    lem4 = _Tally("inner_iteration_bound")
    cond = _Tally("condition_equivalence")
    memb = _Tally("subgradient_membership")
    fixed = _Tally("solution_fixed_point")
    outer = _Tally("outer_lyapunov")
    rng = np.random.Generator(np.random.PCG64(seed + 104729))

    for inst in instances:
        oracle = instance_oracle(inst)
        sched = build_schedule(inst.mu_x, inst.mu_y, inst.lip)
        sched = replace(sched, lam=sched.lam * lambda_scale)
        ref, _ = reference_solution(inst)
        d_x, d_y = inst.dims
        mu_x, mu_y = inst.mu_x, inst.mu_y

        # Lipschitz and monotonicity of the scaled subproblem operator
        for _ in range(20):
            x1, x2 = rng.standard_normal((2, d_x))
            y1, y2 = rng.standard_normal((2, d_y))
            g1x, g1y = inst.grad(x1, y1)
            g2x, g2y = inst.grad(x2, y2)
            dax = (g1x - g2x) - 0.5 * mu_x * (x1 - x2)
            day = (y1 - y2) / sched.theta_y - (g1y - g2y)
            ddx, ddy = x1 - x2, y1 - y2
            lhs = sched.gamma_x * (dax @ dax) + sched.gamma_y * (day @ day)
            rhs = sched.lip_m**2 * ((ddx @ ddx) / sched.gamma_x
                                    + (ddy @ ddy) / sched.gamma_y)
            lem3.add((rhs - lhs) / rhs)
            lem3.add((dax @ ddx + day @ ddy) / (ddx @ ddx + ddy @ ddy))

        # the inner-loop bound assumes lam = 1 / (sqrt(5) M)
        lem4.add(1.0 - sched.lam * math.sqrt(5.0) * sched.lip_m * (1.0 - 1e-12))
        gx, _ = oracle.grad(np.zeros(d_x), np.zeros(d_y))
        try:
            res = foam_solve(oracle, gx, np.zeros(d_y), eps, ref=ref,
                             schedule=sched, keep_states=True)
        except InnerBudgetExceeded:
            lem4.add(-1.0)
            continue
        params = sched.appa_params
        for st, sol in zip(res.states[:-1], res.inner):
            lem4.add(float(sched.t_max - sol.inner_iters))
            z_g, y_g = appa_extrapolate(st, params.alpha)
            rep = check_inexactness(oracle, sol, z_g, y_g, sched.theta_y)
            cond.add((rep.rhs - rep.lhs) / (1.0 + rep.rhs) + 1e-9)
            memb.add(1e-9 * (1.0 + np.abs(sol.z_f).max() + np.abs(sol.w_f).max())
                     - membership_violation(oracle, sol, inst.reg_r, inst.reg_g))

        if inst.smooth:
            z_star, y_star = -mu_x * ref.x, ref.y
            p_star = p_value(inst, z_star, y_star)
            vals = [appa_lyapunov(st, z_star, y_star, params,
                                  p_value(inst, st.z_f, st.y_f) - p_star)
                    for st in res.states]
            rho = lyapunov_rate(params)
            for a, b in zip(vals[:-1], vals[1:]):
                outer.add((rho * a + 1e-8 * vals[0] - b) / vals[0])
            # the solution is a fixed point of the exact outer step
            star = AppaState(z=z_star, y=y_star, z_f=z_star, y_f=y_star)
            z_g, y_g = appa_extrapolate(star, params.alpha)
            nxt = appa_update(star, exact_inner(inst, oracle)(z_g, y_g, params),
                              params)
            err = math.sqrt(float((nxt.z - z_star) @ (nxt.z - z_star)
                                  + (nxt.y - y_star) @ (nxt.y - y_star)))
            scale = 1.0 + math.sqrt(float(z_star @ z_star + y_star @ y_star))
            fixed.add(1e-9 - err / scale)
        else:
            # composite case: the inner solve at the solution stays there
            z_star = -mu_x * ref.x
            sol = foam_inner(oracle, sched, z_star, ref.y)
            err = math.sqrt(accuracy(SaddlePoint(sol.x_f, sol.y_f), ref))
            fixed.add(1e-6 - err)
    return [lem3, lem4, cond, memb, fixed, outer]


def verify_suite(instances: Optional[list] = None, lambda_scale: float = 1.0,
                 seed: int = 0, eps: float = 1e-8,
                 stream=None) -> VerifyReport:
    """Check the algorithmic invariants on seeded instances.

    ``instances`` is a list of :class:`QuadraticInstance` (default
    :func:`default_verify_instances`); affine inclusions for the inner
    solver are generated from ``seed``. ``lambda_scale`` multiplies every
    inner step size and exists for mutation testing. Each property line
    reports the smallest slack seen (negative means violated). Pass a file
    object as ``stream`` to print the lines.
    """
    if instances is None:
        instances = default_verify_instances(seed)
    if not instances:
        report = VerifyReport([], "no instances")
    else:
        beta = _Tally("beta_product_identity")
        for T in range(1, 2001):
            exact = 2.0 / ((T + 1) * (T + 2))
            beta.add(1e-12 - abs(beta_product(T) - exact) / exact)
        tallies = [beta] + _verify_eag(lambda_scale, seed)
        tallies += _verify_foam(instances, lambda_scale, seed, eps)
        results = [t.result() for t in tallies]
        # a property with nothing to check (e.g. no smooth instance) is skipped
        results = [r for r in results if r.checks > 0]
        report = VerifyReport(results)
    if stream is not None:
        for line in report.lines():
            print(line, file=stream)
        print("verify: " + ("ok" if report.ok else "FAILED"), file=stream)
    return report


# --------------------------------------------------------------------------
# command line
# --------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="foamopt", description="Saddle-point solver benchmarks.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one solver on one instance")
    p_run.add_argument("--problem", required=True,
                       help="instance JSON path or inline quadratic:... spec")
    p_run.add_argument("--solver", default="foam")
    p_run.add_argument("--eps", type=float, default=1e-8)
    p_run.add_argument("--max-grad", type=int, default=10**7)
    p_run.add_argument("--seed", type=int, default=0)
    p_run.add_argument("--out", default="out")

    p_sweep = sub.add_parser("sweep", help="gradient calls against kappa")
    p_sweep.add_argument("--kappas", default="8,16,32,64",
                         help="comma-separated ascending condition numbers")
    p_sweep.add_argument("--mode", choices=("equal", "separated"),
                         default="separated")
    p_sweep.add_argument("--eps", type=float, default=1e-6)
    p_sweep.add_argument("--max-grad", type=int, default=10**8)
    p_sweep.add_argument("--seed", type=int, default=0)
    p_sweep.add_argument("--out", default="out")

    p_ver = sub.add_parser("verify", help="run the invariant checks")
    p_ver.add_argument("--problem", action="append",
                       help="restrict to these instances (repeatable)")
    p_ver.add_argument("--eps", type=float, default=1e-8)
    p_ver.add_argument("--seed", type=int, default=0)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG

    if args.command == "run":
        outcome = run(RunConfig(problem=args.problem, solver=args.solver,
                                eps=args.eps, max_grad=args.max_grad,
                                seed=args.seed, out=args.out))
        print(json.dumps(outcome.summary, sort_keys=True))
        return outcome.exit_code

    if args.command == "sweep":
        try:
            kappas = [float(k) for k in args.kappas.split(",") if k]
            table = scaling_experiment(kappas, eps=args.eps, seed=args.seed,
                                       mode=args.mode, max_grad=args.max_grad)
        except (ContractError, ValueError) as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        except RuntimeError as exc:
            print(f"sweep failed: {exc}", file=sys.stderr)
            return EXIT_BUDGET
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "sweep.csv").write_text(table.to_csv())
        (out / "sweep.json").write_text(json.dumps(table.as_dict(), indent=1))
        print(table.to_csv(), end="")
        print(f"slope_foam={table.slope_foam} slope_eg={table.slope_eg}")
        return EXIT_OK

    # verify
    instances = None
    if args.problem:
        try:
            instances = [parse_problem(p, args.seed) for p in args.problem]
        except ContractError as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
    report = verify_suite(instances, seed=args.seed, eps=args.eps,
                          stream=sys.stdout)
    return EXIT_OK if report.ok else EXIT_VERIFY
