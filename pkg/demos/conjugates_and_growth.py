# %% [markdown]
# # Young conjugates and growth classes
#
# A tour of the N-function calculus: closed-form and numerical conjugates,
# Young's inequality, the doubling condition and the Sobolev conjugate.

# %%
import numpy as np

from orlicz_kit import nfunction as nf

G = nf.exp_minus()
Gs_closed = G.conjugate()
Gs_numeric = G.conjugate(closed_form=False)
s = np.array([0.1, 1.0, 5.0, 20.0])
print("G          :", G.name)
print("closed G*  :", Gs_closed(s))
print("numeric G* :", Gs_numeric(s))

# %% [markdown]
# The numerical conjugate uses the equality case of Young's inequality, so
# the gap G(a) + G*(b) - ab vanishes exactly along b = g(a).

# %%
a = np.linspace(0, 3, 7)
print("gap at b = g(a):", nf.young_gap(G, a, G.g(a)))
print("gap at b = 1   :", nf.young_gap(G, a, np.ones_like(a)))

# %% [markdown]
# Doubling: powers pass with k = 2^p; exponentials fail on any long range.

# %%
for F in (nf.power(3.0), nf.power_log(2.0), nf.exp_minus(), nf.exp_power(2.0)):
    rep = nf.delta2_check(F)
    print(f"{F.name:15s} satisfied={rep.satisfied!s:5s} k={rep.k:10.4g} p_bound={rep.p_bound:.4g}")

# %% [markdown]
# Growth comparison.  ``strictly_slower`` means G2(t)/G1(lam t) keeps
# decreasing on the tail for every tested lam.

# %%
print(nf.compare(nf.power(2.5), nf.power_abslog(2.0)).relation)
print(nf.compare(nf.power(2.0), nf.power(2.0, coef=7.0)).to_dict()["witness_constants"])

# %% [markdown]
# Sobolev conjugate.  For t^2/2 in three dimensions it is a pure sixth
# power; for e^t - t - 1 the defining integral converges and G_* jumps to
# infinity at a finite level M.

# %%
S = nf.sobolev_conjugate(nf.power(2.0), 3)
t = np.geomspace(10, 1000, 5)
print("slope:", np.polyfit(np.log(t), np.log(S(t)), 1)[0])
E = nf.sobolev_conjugate(nf.exp_minus(), 3)
print("extended:", E.extended, "M =", E.M)
