"""Acceptance suite.

Run with ``pytest tests/test_acceptance.py -s`` to see one PASS/FAIL line per
criterion. Every check is strict: a failing criterion fails its test.
"""
import csv
import io
import math
import time

import numpy as np
import pytest

from foamopt.appa import (appa_extrapolate, appa_lyapunov, check_inexactness,
                          lyapunov_rate)
from foamopt.baselines import EgConfig, extragradient_solve
from foamopt.foam import build_schedule, foam_solve
from foamopt.harness import main, scaling_experiment
from foamopt.inclusion import beta_product, eag_beta, eag_lambda, eag_lyapunov, eag_solve
from foamopt.oracle import SaddlePoint, accuracy
from foamopt.problems import (condition_sweep, instance_oracle,
                              make_affine_inclusion, make_quadratic, p_value,
                              reference_solution)

GRID_KAPPAS = [1, 10, 100, 1000]
GRID_SEEDS = [0, 100, 200]


def report(num, name, ok, detail=""):
    line = f"criterion {num} {name}: {'PASS' if ok else 'FAIL'}"
    if detail:
        line += f" ({detail})"
    print("\n" + line)
    assert ok, line


def zero_start(inst):
    return np.zeros(inst.dims[0]), np.zeros(inst.dims[1])


# ---------------------------------------------------------------- criteria 1, 2

@pytest.fixture(scope="module")
def eag_runs():
    kinds = ("zero", "box", "l1")
    runs = []
    t0 = time.perf_counter()
    for i in range(20):
        d = 12 + 2 * i  # 12 .. 50
        prob, u_star, _ = make_affine_inclusion(d, kinds[i % 3], seed=1000 + i)
        lam = eag_lambda(prob.lip_m)
        u_init = np.random.default_rng(i).uniform(-2, 2, d)
        res = eag_solve(prob, u_init, iters=200, lam=lam, keep_history=True)
        runs.append((prob, u_star, u_init, lam, res))
    return runs, time.perf_counter() - t0


def test_criterion1_residual_bound(eag_runs):
    runs, elapsed = eag_runs
    worst = math.inf
    for prob, u_star, u_init, _, res in runs:
        m = prob.lip_m
        d0 = float((u_init - u_star) @ (u_init - u_star))
        for st in res.history[1:]:
            r = st.residual
            bound = 288.0 * m * m * d0 / (st.t + 1) ** 2
            worst = min(worst, bound + 1e-9 - float(r @ r))
    report(1, "residual bound", worst >= 0 and elapsed < 10.0,
           f"min slack {worst:.3e}, {elapsed:.2f}s")


def test_criterion2_eag_lyapunov(eag_runs):
    runs, _ = eag_runs
    worst = math.inf
    steps = 0
    for _, _, _, lam, res in runs:
        for cur, nxt in zip(res.history[:-1], res.history[1:]):
            rhs = (1.0 - eag_beta(cur.t)) * eag_lyapunov(cur, lam)
            lhs = eag_lyapunov(nxt, lam)
            scale = max(abs(rhs), abs(lhs))
            worst = min(worst, (rhs + 1e-9 * scale - lhs) / (scale or 1.0))
            steps += 1
    report(2, "inner Lyapunov contraction", worst >= 0 and steps == 20 * 200,
           f"min relative slack {worst:.3e} over {steps} steps")


# ---------------------------------------------------------------- criteria 3, 4

@pytest.fixture(scope="module")
def foam_grid():
    cells = []
    for seed in GRID_SEEDS:
        for kappa, (oracle, inst) in zip(GRID_KAPPAS,
                                         condition_sweep(GRID_KAPPAS, seed=seed)):
            ref, _ = reference_solution(inst)
            x0, y0 = zero_start(inst)
            gx, _ = oracle.grad(x0, y0)
            res = foam_solve(oracle, gx - inst.mu_x * x0, y0, 1e-8, ref=ref,
                             keep_states=True)
            cells.append((kappa, seed, oracle, res))
    return cells


def test_criterion3_inner_bound(foam_grid):
    worst = None
    ok = True
    for kappa, seed, oracle, res in foam_grid:
        s = res.schedule
        t_max = math.ceil(48 * math.sqrt(2) * max(8 * s.lip / s.mu_x,
                                                  1 + s.theta_y * s.lip)) - 1
        ok &= res.converged and len(res.inner) > 0
        for sol in res.inner:
            ok &= sol.inner_iters <= t_max
            ratio = sol.inner_iters / t_max
            worst = ratio if worst is None else max(worst, ratio)
    report(3, "inner iteration bound", ok and len(foam_grid) == 12,
           f"max t/t_max {worst:.3f} over {len(foam_grid)} instances")


def test_criterion4_condition_equivalence(foam_grid):
    ok = True
    checks = 0
    worst = -math.inf
    for _, _, oracle, res in foam_grid:
        theta_y = res.schedule.theta_y
        for state, sol in zip(res.states[:-1], res.inner):
            z_g, y_g = appa_extrapolate(state, res.schedule.alpha)
            # default tolerance is 1e-9 * (1 + rhs)
            rep = check_inexactness(oracle, sol, z_g, y_g, theta_y)
            ok &= rep.ok
            worst = max(worst, (rep.lhs - rep.rhs) / (1.0 + rep.rhs))
            checks += 1
    report(4, "condition equivalence", ok and checks > 0,
           f"{checks} tuples, max (lhs-rhs)/(1+rhs) {worst:.3e}")


# ---------------------------------------------------------------- criterion 5

def test_criterion5_outer_lyapunov():
    insts = [inst for _, inst in condition_sweep([1, 10, 100], seed=7)]
    insts.append(make_quadratic(10, 12, 1.0, 0.02, 1.0, seed=8, planted=True)[1])
    insts.append(make_quadratic(10, 10, 0.5, 2.0, 6.0, seed=9)[1])
    worst = math.inf
    steps = 0
    for inst in insts:
        oracle = instance_oracle(inst)
        ref, _ = reference_solution(inst)
        z_star, y_star = -inst.mu_x * ref.x, ref.y
        p_star = p_value(inst, z_star, y_star)
        res = foam_solve(oracle, inst.b.copy(), np.zeros(inst.dims[1]), 1e-9,
                         ref=ref, keep_states=True)
        params = res.schedule.appa_params
        rho = lyapunov_rate(params)
        lyap = [appa_lyapunov(s, z_star, y_star, params,
                              p_value(inst, s.z_f, s.y_f) - p_star)
                for s in res.states]
        assert all(math.isfinite(v) for v in lyap)
        for cur, nxt in zip(lyap[:-1], lyap[1:]):
            worst = min(worst, (rho * cur + 1e-8 * lyap[0] - nxt) / lyap[0])
            steps += 1
    report(5, "outer Lyapunov contraction", worst >= 0 and steps > 0,
           f"min slack/L0 {worst:.3e} over {steps} steps")


# ---------------------------------------------------------------- criterion 6

def test_criterion6_solution_fidelity():
    eps = 1e-10
    worst_smooth = 0.0
    for seed, (mu_x, mu_y, sigma) in enumerate([(1.0, 1.0, 3.0), (0.5, 1.0, 4.0),
                                                (1.0, 0.1, 2.0), (2.0, 2.0, 0.0)]):
        oracle, inst = make_quadratic(10, 8, mu_x, mu_y, sigma, seed=300 + seed)
        ref, _ = reference_solution(inst)
        x0, y0 = zero_start(inst)
        res = foam_solve(oracle, inst.b.copy(), y0, eps)
        assert res.converged and res.stop_rule == "residual-heuristic"
        worst_smooth = max(worst_smooth, math.sqrt(accuracy(res.answer, ref)))

    worst_comp = 0.0
    for seed, (reg_r, reg_g) in enumerate([("l1:0.3", "box:-0.5:0.5"),
                                           ("box:-1:1", "l1:0.2"),
                                           ("l1:0.5", "l1:0.1")]):
        oracle, inst = make_quadratic(8, 8, 1.0, 1.0, 5.0, reg_r, reg_g,
                                      seed=400 + seed)
        x0, y0 = zero_start(inst)
        eg = extragradient_solve(oracle, SaddlePoint(x0, y0),
                                 EgConfig(eps=1e-20, max_iters=5 * 10**6),
                                 keep_trace=False)
        ref = eg.answer
        oracle.reset_counters()
        gx, _ = oracle.grad(x0, y0)
        res = foam_solve(oracle, gx - inst.mu_x * x0, y0, eps)
        assert res.converged
        worst_comp = max(worst_comp, math.sqrt(accuracy(res.answer, ref)))

    ok = worst_smooth <= 1e-4 and worst_comp <= 10 * math.sqrt(eps)
    report(6, "solution-map fidelity", ok,
           f"smooth max dist {worst_smooth:.2e}, composite max dist {worst_comp:.2e}")


# ---------------------------------------------------------------- criterion 7

def test_criterion7_complexity_separation():
    t0 = time.perf_counter()
    table = scaling_experiment([8, 16, 32, 64], eps=1e-6, mode="separated")
    elapsed = time.perf_counter() - t0
    ok = (0.7 <= table.slope_foam <= 1.3 and 1.7 <= table.slope_eg <= 2.3
          and table.grad_count_foam[-1] < table.grad_count_eg[-1]
          and elapsed < 300.0)
    report(7, "complexity separation", ok,
           f"slopes foam {table.slope_foam:.3f} eg {table.slope_eg:.3f}, "
           f"at 64: {table.grad_count_foam[-1]} vs {table.grad_count_eg[-1]}, "
           f"{elapsed:.0f}s")


# ---------------------------------------------------------------- criterion 8

def test_criterion8_identities():
    worst = 0.0
    for T in range(1, 10**4 + 1):
        exact = 2.0 / ((T + 1) * (T + 2))
        worst = max(worst, abs(beta_product(T) - exact) / exact)
    s = build_schedule(1.0, 1.0, 1.0)
    sched_ok = (s.theta_y == 8.0 and s.alpha == 1.0 and s.t_max == 610
                and s.lam == 1.0 / (18.0 * math.sqrt(5.0)))
    report(8, "identity checks", worst <= 1e-12 and sched_ok,
           f"max relative error {worst:.2e}, schedule lam {s.lam!r}")


# ---------------------------------------------------------------- criterion 9

def _untimed(text):
    rows = list(csv.reader(io.StringIO(text)))
    col = rows[0].index("wall_nanos") if "wall_nanos" in rows[0] else None
    if col is None:
        return rows
    return [r[:col] + r[col + 1:] for r in rows]


def test_criterion9_determinism(tmp_path, capsys):
    same = True
    problems = ["quadratic:dx=6,dy=5,kappa=8,seed=4",
                "quadratic:dx=6,dy=6,kappa=4,r=l1:0.2,g=box:-1:1,seed=5"]
    for solver in ("foam", "appa-exact", "extragradient"):
        for i, prob in enumerate(problems):
            if solver == "appa-exact" and i == 1:
                continue
            outs = []
            for rep in ("a", "b"):
                out = tmp_path / f"run-{solver}-{i}-{rep}"
                main(["run", "--problem", prob, "--solver", solver,
                      "--out", str(out)])
                outs.append(((out / "trace.csv").read_text(),
                             (out / "summary.json").read_text()))
            same &= _untimed(outs[0][0]) == _untimed(outs[1][0])
            same &= outs[0][1] == outs[1][1]

    sweeps = []
    for rep in ("a", "b"):
        out = tmp_path / f"sweep-{rep}"
        main(["sweep", "--kappas", "2,4", "--out", str(out)])
        sweeps.append(((out / "sweep.csv").read_text(),
                       (out / "sweep.json").read_text()))
    same &= sweeps[0] == sweeps[1]

    capsys.readouterr()
    texts = []
    for _ in range(2):
        main(["verify", "--problem", problems[0], "--problem", problems[1]])
        texts.append(capsys.readouterr().out)
    same &= texts[0] == texts[1] and "verify: ok" in texts[0]
    report(9, "determinism", same, "run, sweep and verify")
