# %% [markdown]
# # Nonsmooth regularizers and runtime invariants
#
# An l1 penalty on x and a box on y. FOAM runs without a reference and
# stops on its own residual test; we compare the answer with a long
# extragradient run. Then we run the invariant suite.

# %%
import numpy as np

from foamopt import EgConfig, SaddlePoint, accuracy, extragradient_solve, foam_solve
from foamopt.harness import verify_suite
from foamopt.problems import make_quadratic

oracle, inst = make_quadratic(12, 10, 1.0, 0.5, 3.0, reg_r="l1:0.4",
                              reg_g="box:-0.3:0.3", seed=2)
eg = extragradient_solve(oracle, SaddlePoint(np.zeros(12), np.zeros(10)),
                         EgConfig(eps=1e-18), keep_trace=False)
oracle.reset_counters()
gx, _ = oracle.grad(np.zeros(12), np.zeros(10))
res = foam_solve(oracle, gx, np.zeros(10), 1e-10)
print("stop rule:", res.stop_rule)
print("distance to extragradient answer:", np.sqrt(accuracy(res.answer, eg.answer)))
# the answer is read off the outer variables, so zeros are only approximate
print("x entries near zero:", int(np.sum(np.abs(res.answer.x) < 1e-5)), "of 12")
print("y entries near the box edge:",
      int(np.sum(np.abs(np.abs(res.answer.y) - 0.3) < 1e-5)), "of 10")

# %% [markdown]
# Every inequality the method relies on, checked on a default suite of
# instances. Doubling the inner step breaks the step-size premise.

# %%
report = verify_suite()
print("\n".join(report.lines()))

# %%
broken = verify_suite(lambda_scale=2.0)
print([r.name for r in broken.results if not r.passed])
