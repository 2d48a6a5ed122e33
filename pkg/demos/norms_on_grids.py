# %% [markdown]
# # Modulars and norms of grid functions
#
# Luxemburg and Orlicz norms on a 2D grid, the 1x/2x sandwich, Hoelder
# bounds, Steklov smoothing and the Poincare inequality.

# %%
import numpy as np

from orlicz_kit import modular as md
from orlicz_kit import nfunction as nf
from orlicz_kit.grid import Grid, GridFunction, indicator

rng = np.random.default_rng(7)
grid = Grid([(0.0, 1.0), (0.0, 1.0)], 33)
u = grid.sample(lambda x, y: np.sin(3 * x) * np.cos(2 * y) + 0.3 * x * y)

# %%
for G in nf.builtins().values():
    lux, orl = md.luxemburg_norm(u, G), md.orlicz_norm(u, G)
    print(f"{G.name:14s} modular={md.modular(u, G):.5f} lux={lux:.5f} orlicz={orl:.5f} ratio={orl / lux:.4f}")

# %% [markdown]
# For an indicator of a box E the two norms have closed forms in terms of
# mes(E); the grid weights make them exact.

# %%
chi = indicator(grid, (0.25, 0.25), (0.75, 0.5))
G = nf.power(3.0)
mes = 0.125
print(md.luxemburg_norm(chi, G), 1 / G.inverse(1 / mes))
print(md.orlicz_norm(chi, G), mes * G.conjugate().inverse(1 / mes))

# %%
v = GridFunction(grid, rng.standard_normal(grid.shape))
rep = md.holder_check(u, v, nf.exp_minus())
print("int |uv| =", rep["lhs"])
for name, bound in rep["rhs_variants"].items():
    print(f"  {name:14s} {bound:.5f}")

# %% [markdown]
# Steklov averages shrink the norm; the Poincare inequality bounds the
# modular of a Dirichlet function by that of its scaled gradient.

# %%
noisy = u + GridFunction(grid, 0.5 * rng.standard_normal(grid.shape))
for r in (0.05, 0.1, 0.2):
    print(r, md.orlicz_norm(md.steklov(noisy, r), G), "<=", md.orlicz_norm(noisy, G))

bump = grid.sample(lambda x, y: np.sin(np.pi * x) * np.sin(np.pi * y) ** 2)
print(md.poincare_check(bump, nf.exp_minus()))
