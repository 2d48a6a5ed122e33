# %% [markdown]
# # Two positive solutions of a quasilinear Dirichlet problem
#
# -div(a(|grad u|) grad u) = lam (u^{p-1} - u^{q-1}) on the unit square with
# Phi(t) = t^1.8 / 1.8, p = 1.5, q = 1.2.  The first solution is a global
# minimiser of the energy with negative energy, the second a mountain-pass
# point of the energy truncated at the first.

# %%
import time

import numpy as np

from orlicz_kit import pde

spec = pde.default_spec(33)
print(pde.check_hypotheses(spec))

# %% [markdown]
# lam* is the smallest lam for which some scaling of a plateau function
# has negative energy.  The solver works at twice that value.

# %%
ls = pde.lambda_star_search(spec)
print("lam* ~", ls["lambda_star"], "plateau level", ls["t0"])

# %%
t0 = time.perf_counter()
rep = pde.solve_two_solutions(spec)
print(f"solved in {time.perf_counter() - t0:.1f}s at lam = {rep.lam:.4g}")
print("I(u1) =", rep.I_u1, " max u1 =", rep.u1.max_abs())
print("I(u2) =", rep.I_u2, " max u2 =", rep.u2.max_abs())
print("residuals:", rep.grad_residuals)
print("checks:", rep.checks)

# %% [markdown]
# Energy along the path from 0 to u1, before and after deformation.  The
# barrier is what the second solution sits on.

# %%
first, last = rep.path_snapshot[0], rep.path_snapshot[-1]
for k in range(0, len(first), 4):
    print(f"node {k:2d}  initial {first[k]:12.4f}  final {last[k]:12.4f}")

# %% [markdown]
# Cross-sections through the centre of the square.

# %%
mid = spec.grid.shape[1] // 2
x = spec.grid.axes[0]
for i in range(0, len(x), 4):
    print(f"x={x[i]:.3f}  u1={rep.u1.values[i, mid]:10.4f}  u2={rep.u2.values[i, mid]:8.4f}")
