# %% [markdown]
# # FOAM on a bilinearly coupled quadratic
#
# A saddle problem with unequal strong convexity in x and y. We solve it
# with FOAM, compare against a dense linear solve, and inspect the outer
# potential and the inner iteration counts.

# %%
import numpy as np

from foamopt import build_schedule, foam_solve
from foamopt.problems import make_quadratic, p_value, reference_solution

oracle, inst = make_quadratic(20, 15, 1.0, 0.05, 4.0, seed=1)
ref, _ = reference_solution(inst)
sched = build_schedule(inst.mu_x, inst.mu_y, inst.lip)
print("L =", round(inst.lip, 4), " alpha =", round(sched.alpha, 4),
      " t_max =", sched.t_max)

# %%
p_star = p_value(inst, -inst.mu_x * ref.x, ref.y)
res = foam_solve(oracle, inst.b.copy(), np.zeros(15), 1e-10, ref=ref,
                 p_gap=lambda z, y: p_value(inst, z, y) - p_star)
print(f"{'k':>3} {'grads':>8} {'inner':>6} {'dist^2':>11} {'potential':>11}")
for rec in res.trace:
    print(f"{rec.outer_k:3d} {rec.grad_count:8d} {rec.inner_iters:6d} "
          f"{rec.accuracy:11.3e} {rec.lyapunov:11.3e}")

# %% [markdown]
# Inner counts stay far below `t_max`; the potential shrinks by a roughly
# constant factor per outer step.

# %%
print("converged:", res.converged, " gradients:", oracle.grad_count)
