"""Acceptance criteria, one test per criterion.

Each criterion is a plain function returning ``(ok, detail)``.  The pytest
wrappers record the outcome, elapsed time and budget; ``conftest.py`` prints
one line per criterion at the end of the session.  Running this file as a
script prints the same lines directly.
"""

import math
import time

import numpy as np
import pytest

from orlicz_kit import modular as md
from orlicz_kit import nfunction as nf
from orlicz_kit import pde
from orlicz_kit.grid import Grid, GridFunction, indicator, integrate

RESULTS = []


def _rng(k):
    return np.random.default_rng(1000 + k)


def _dirichlet(grid, rng, scale=1.0):
    vals = scale * rng.standard_normal(grid.shape)
    vals[grid.boundary_mask] = 0.0
    return GridFunction(grid, vals)


def _random(grid, rng):
    return GridFunction(grid, rng.standard_normal(grid.shape) * rng.uniform(0.05, 5.0))


# -- criteria ------------------------------------------------------------------------


def criterion_01():
    """Computed conjugates match the closed-form pairs."""
    v = np.linspace(0.0, 10.0, 256)
    worst = 0.0
    for alpha in (1.5, 2.0, 3.0):
        beta = alpha / (alpha - 1)
        got = nf.power(alpha).conjugate(closed_form=False)(v)
        ref = v**beta / beta
        worst = max(worst, float(np.max(np.abs(got - ref) / np.where(ref > 0, ref, 1.0))))
    got = nf.exp_minus().conjugate(closed_form=False)(v)
    ref = (1 + v) * np.log1p(v) - v
    worst = max(worst, float(np.max(np.abs(got - ref) / np.where(ref > 0, ref, 1.0))))
    return worst <= 1e-6, f"max rel err {worst:.2e}"


def criterion_02():
    """Young gap nonnegative on a 100x100 grid; equality at b = g(a)."""
    a = np.linspace(0.0, 10.0, 100)
    A, B = np.meshgrid(a, a, indexing="ij")
    min_gap, worst_eq = math.inf, 0.0
    for G in nf.builtins().values():
        Gs = G.conjugate()
        with np.errstate(over="ignore", invalid="ignore"):
            gap = nf.young_gap(G, A, B, Gs)
        min_gap = min(min_gap, float(np.nanmin(gap)))
        ae = np.linspace(0.0, 5.0, 100)
        b = G.g(ae)
        eq = np.abs(nf.young_gap(G, ae, b, Gs)) / np.maximum(1.0, ae * b)
        worst_eq = max(worst_eq, float(np.max(eq)))
    return min_gap >= -1e-9 and worst_eq <= 1e-6, f"min gap {min_gap:.2e}, equality err {worst_eq:.2e}"


def criterion_03():
    """Biconjugation returns G."""
    t = np.geomspace(1e-2, 5.0, 60)
    worst = 0.0
    for G in nf.builtins().values():
        back = G.conjugate(closed_form=False).conjugate(closed_form=False)
        worst = max(worst, float(np.max(np.abs(back(t) - G(t)) / G(t))))
    return worst <= 1e-5, f"max rel err {worst:.2e}"


def criterion_04():
    """t < G^{-1}(t) G*^{-1}(t) <= 2t."""
    t = np.geomspace(1e-3, 1e3, 121)
    lo, hi = math.inf, 0.0
    for G in nf.builtins().values():
        r = G.inverse(t) * G.conjugate().inverse(t) / t
        lo, hi = min(lo, float(r.min())), max(hi, float(r.max()))
    # t^2/2 is self-conjugate and attains 2t exactly, so allow rounding there
    return 1.0 < lo and hi <= 2.0 * (1 + 1e-12), f"ratio range [{lo:.6f}, {hi:.15f}]"


def criterion_05():
    """Delta_2 classification and constants."""
    notes, ok = [], True
    for p in (1.5, 2.0, 3.0):
        rep = nf.delta2_check(nf.power(p, coef=2.0))
        ok &= rep.satisfied and abs(rep.k - 2**p) <= 1e-9 * 2**p
        notes.append(f"t^{p:g}: k={rep.k:.6g}")
    for alpha in (1.5, 2.0):
        rep = nf.delta2_check(nf.power_log(alpha))
        ok &= rep.satisfied and abs(rep.p_bound - (alpha + 1)) <= 1e-9
        notes.append(f"power_log({alpha:g}): p_bound={rep.p_bound:.6g}")
    for G in (nf.exp_minus(), nf.exp_power(2.0)):
        sat = nf.delta2_check(G, probe_range=(1.0, 100.0)).satisfied
        ok &= not sat
        notes.append(f"{G.name}: {'satisfied' if sat else 'not satisfied'}")
    return bool(ok), "; ".join(notes)


def criterion_06():
    """Luxemburg norm of t^p is the L^p norm."""
    rng = _rng(6)
    grid = Grid([(0, 1), (0, 1)], 17)
    worst = 0.0
    for p in (1.5, 2.0, 4.0):
        G = nf.power(p, coef=1.0)
        for _ in range(50):
            u = _random(grid, rng)
            ref = float(np.sum(u.weights * np.abs(u.values) ** p)) ** (1 / p)
            worst = max(worst, abs(md.luxemburg_norm(u, G) - ref) / ref)
    return worst <= 1e-8, f"max rel err {worst:.2e}"


def criterion_07():
    """Norm sandwich and the indicator formula."""
    rng = _rng(7)
    grid = Grid([(0, 1), (0, 1)], 17)
    Gs = list(nf.builtins().values())
    violations = 0
    for k in range(200):
        G = Gs[k % len(Gs)]
        u = _random(grid, rng)
        lux, orl = md.luxemburg_norm(u, G), md.orlicz_norm(u, G)
        violations += not (lux <= orl + 1e-8 and orl <= 2 * lux + 1e-8)
    g2 = Grid([(0, 1), (0, 1)], 21)
    chi = indicator(g2, (0.1, 0.2), (0.6, 0.5))
    mes = 0.15
    worst = 0.0
    for G in Gs:
        ref = mes * G.conjugate().inverse(1 / mes)
        worst = max(worst, abs(md.orlicz_norm(chi, G) - ref) / ref)
    return violations == 0 and worst <= 1e-6, f"{violations} sandwich violations, indicator rel err {worst:.2e}"


def _dual_sup(G, u, levels):
    """Brute-force sup of sum w |u| v over v >= 0 with sum w G*(v) <= 1.

    All but the last node take values on a uniform level grid; the last node
    spends the remaining modular budget exactly.
    """
    Gs = G.conjugate()
    a = np.abs(u.values).ravel()
    w = np.asarray(u.weights).ravel()
    n = a.size
    grids = [np.linspace(0.0, Gs.inverse(1.0 / w[i]), levels) for i in range(n - 1)]
    mesh = np.meshgrid(*grids, indexing="ij", sparse=True)
    used = sum(w[i] * Gs(mesh[i]) for i in range(n - 1))
    gain = sum(w[i] * a[i] * mesh[i] for i in range(n - 1))
    budget = 1.0 - used
    ok = budget >= 0
    v_last = Gs.inverse(np.where(ok, budget, 0.0) / w[-1])
    total = np.where(ok, gain + w[-1] * a[-1] * v_last, -np.inf)
    return float(np.max(total))


def criterion_08():
    """Dual-sup definition agrees with the Amemiya formula on tiny grids."""
    rng = _rng(8)
    cases = [(Grid([(0, 1)], 5), 28), (Grid([(0, 1), (0, 1)], 2), 64)]
    worst = 0.0
    for grid, levels in cases:
        for G in (nf.power(2.0), nf.power(3.0), nf.exp_minus(), nf.llog()):
            for _ in range(2):
                u = GridFunction(grid, rng.uniform(-3, 3, grid.shape))
                brute = _dual_sup(G, u, levels)
                amemiya = md.orlicz_norm(u, G)
                if brute > amemiya * (1 + 1e-9):
                    return False, f"brute force {brute} exceeds Amemiya {amemiya} for {G.name}"
                worst = max(worst, (amemiya - brute) / amemiya)
    return worst <= 0.02, f"max rel gap {worst:.2e}"


def criterion_09():
    """All four Hoelder-type bounds."""
    rng = _rng(9)
    grid = Grid([(0, 1), (0, 1)], 13)
    Gs = list(nf.builtins().values())
    conj = [G.conjugate() for G in Gs]
    fails = 0
    for k in range(100):
        j = k % len(Gs)
        rep = md.holder_check(_random(grid, rng), _random(grid, rng), Gs[j], atol=1e-8, Gstar=conj[j])
        fails += not rep["pass"]
    return fails == 0, f"{fails} failing pairs out of 100"


def criterion_10():
    """Sobolev conjugate of t^2 in dimension 3 grows like t^6."""
    S = nf.sobolev_conjugate(nf.power(2.0), 3)
    t = np.geomspace(10.0, 1e3, 50)
    slope = float(np.polyfit(np.log(t), np.log(S(t)), 1)[0])
    return abs(slope - 6.0) <= 0.02 * 6.0, f"log-log slope {slope:.6f}"


def criterion_11():
    """Poincare inequality with d = 2 diam."""
    rng = _rng(11)
    grid = Grid([(0, 1), (0, 2)], [17, 25])
    Gs = list(nf.builtins().values())
    fails = sum(not md.poincare_check(_dirichlet(grid, rng, rng.uniform(0.1, 3)), Gs[k % len(Gs)])["pass"]
                for k in range(20))
    return fails == 0, f"{fails} failures out of 20"


def criterion_12():
    """Steklov averages do not increase the Orlicz norm."""
    rng = _rng(12)
    grid = Grid([(0, 1), (0, 1)], 17)
    Gs = list(nf.builtins().values())
    worst = -math.inf
    for k in range(20):
        u = _random(grid, rng)
        G = Gs[k % len(Gs)]
        base = md.orlicz_norm(u, G)
        for r in (0.1, 0.25):
            worst = max(worst, md.orlicz_norm(md.steklov(u, r), G) - base)
    return worst <= 1e-8, f"max norm increase {worst:.2e}"


def criterion_13():
    """Discrete gradient against a centred difference of the energy."""
    rng = _rng(13)
    spec = pde.default_spec(17).with_lambda(50.0)
    worst = 0.0
    h = 1e-5
    for _ in range(50):
        u = _dirichlet(spec.grid, rng, rng.uniform(0.1, 2.0))
        v = _dirichlet(spec.grid, rng)
        fd = (pde.energy(spec, u + h * v) - pde.energy(spec, u - h * v)) / (2 * h)
        an = integrate(pde.energy_gradient(spec, u), v)
        worst = max(worst, abs(fd - an) / max(abs(an), 1.0))
    return worst <= 1e-4, f"max rel err {worst:.2e}"


def criterion_14():
    """Two distinct nonnegative solutions on the default configuration."""
    rep = pde.solve_two_solutions(pde.default_spec(33))
    u1, u2 = rep.u1.values, rep.u2.values
    conds = {
        "I(u1) < -1e-4": rep.I_u1 < -1e-4,
        "I(u2) > 1e-4": rep.I_u2 > 1e-4,
        "residuals <= 1e-5": max(rep.grad_residuals.values()) <= 1e-5,
        "0 <= u2 <= u1 + 1e-6": bool(np.all(u2 >= 0) and np.all(u2 <= u1 + 1e-6)),
        "||u1 - u2|| > 1e-2": float(np.max(np.abs(u1 - u2))) > 1e-2,
    }
    detail = (f"lambda={rep.lam:.4g} I(u1)={rep.I_u1:.4g} I(u2)={rep.I_u2:.4g} "
              f"res=({rep.grad_residuals['u1']:.1e},{rep.grad_residuals['u2']:.1e})")
    failed = [k for k, v in conds.items() if not v]
    return not failed, detail + (f" failed: {failed}" if failed else "")


def criterion_15():
    """Norm/modular chains: equalities for homogeneous Phi, inequalities otherwise."""
    rng = _rng(15)
    grid = Grid([(0, 1), (0, 1)], 17)
    worst = 0.0
    for s in (1.5, 1.8, 3.0):
        spec = pde.ProblemSpec(Phi=nf.power(s), p=1.2, q=1.1, grid=grid)
        for target in (0.5, 2.0):
            u = _dirichlet(grid, rng)
            u = u * (target / pde.norm_modular_bounds(spec, u)["norm"])
            rep = pde.norm_modular_bounds(spec, u)
            worst = max(worst, abs(rep["modular"] - rep["norm"] ** s) / rep["modular"])
    fails = 0
    mixed = pde.ProblemSpec(Phi=nf.linear_combination([1.0, 0.5], [nf.power(1.4), nf.power(1.9)]),
                            p=1.2, q=1.1, grid=grid)
    for _ in range(10):
        for target in (0.5, 2.0):
            u = _dirichlet(grid, rng)
            u = u * (target / pde.norm_modular_bounds(mixed, u)["norm"])
            fails += not pde.norm_modular_bounds(mixed, u)["holds"]
    return worst <= 1e-6 and fails == 0, f"homogeneous rel err {worst:.2e}, {fails} chain failures"


CRITERIA = [
    (1, "conjugate pairs", criterion_01, 5),
    (2, "Young inequality", criterion_02, 5),
    (3, "biconjugation", criterion_03, 5),
    (4, "inverse product bounds", criterion_04, 2),
    (5, "Delta_2 classification", criterion_05, 2),
    (6, "Luxemburg vs L^p", criterion_06, 5),
    (7, "norm sandwich and indicator", criterion_07, 10),
    (8, "dual-sup cross-validation", criterion_08, 60),
    (9, "Hoelder suite", criterion_09, 5),
    (10, "Sobolev conjugate slope", criterion_10, 5),
    (11, "Poincare", criterion_11, 5),
    (12, "Steklov contraction", criterion_12, 5),
    (13, "PDE gradient check", criterion_13, 10),
    (14, "two-solution experiment", criterion_14, 600),
    (15, "index/modular chains", criterion_15, 5),
]


def run_criterion(num, name, fn, budget):
    t0 = time.perf_counter()
    ok, detail = fn()
    elapsed = time.perf_counter() - t0
    passed = bool(ok) and elapsed < budget
    line = f"[{'PASS' if passed else 'FAIL'}] {num:2d} {name}: {detail} ({elapsed:.2f}s, budget {budget}s)"
    return passed, line


@pytest.mark.parametrize("num,name,fn,budget", CRITERIA, ids=[f"{c[0]:02d}-{c[1].replace(' ', '_')}" for c in CRITERIA])
def test_criterion(num, name, fn, budget):
    passed, line = run_criterion(num, name, fn, budget)
    RESULTS.append(line)
    print(line)
    assert passed, line


if __name__ == "__main__":
    for c in CRITERIA:
        print(run_criterion(*c)[1], flush=True)
