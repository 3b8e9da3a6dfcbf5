# %% [markdown]
# # Gradient counts versus conditioning
#
# Fix the coupling and make y weakly concave: kappa_x = L and kappa_y grows
# like kappa^2. Extragradient pays for the larger of the two condition
# numbers, FOAM for their geometric mean. A log-log fit shows the gap.
# Runs in a few minutes.

# %%
from foamopt.harness import scaling_experiment

table = scaling_experiment([8, 16, 32, 64], eps=1e-6, mode="separated")
print(table.to_csv())
print("slope foam:", round(table.slope_foam, 3))
print("slope extragradient:", round(table.slope_eg, 3))

# %% [markdown]
# With both moduli equal the two methods scale alike, so the separation
# above comes from the imbalance between x and y.

# %%
small = scaling_experiment([4, 8, 16], eps=1e-6, mode="equal")
print(small.to_csv())
