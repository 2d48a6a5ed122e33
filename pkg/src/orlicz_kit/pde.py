"""Variational solver for  -div(a(|grad u|) grad u) = lam (u^{p-1} - u^{q-1}),
u = 0 on the boundary, with a(t) = phi(t) / t and phi the density of Phi.

The energy

    I(u) = int Phi(|grad u|) - lam/p int u_+^p + lam/q int u_+^q

is discretised with piecewise linear elements (each rectangle cell is cut
into two triangles, intervals in 1D) for the gradient term and with the
trapezoid weights of the grid for the mass terms.  Gradients returned to the
user are Riesz representers for the weighted inner product sum_i w_i u_i v_i,
so that ``integrate(grad * v)`` is the directional derivative.

The global minimiser u1 (negative energy) comes from a preconditioned
descent followed by a Newton polish.  The second solution u2 is a
mountain-pass point of the functional J obtained by truncating the
nonlinearity at u1; it is located by deforming a path from 0 to u1 and
polishing its highest node.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import sparse
from scipy.sparse import linalg as spla

from .grid import Grid, GridFunction
from .modular import luxemburg_norm_values, modular_values
from .nfunction import NFunction, power

__all__ = [
    "ProblemSpec",
    "SolveReport",
    "GeometryError",
    "HypothesisError",
    "index_estimates",
    "check_hypotheses",
    "energy",
    "energy_gradient",
    "energy_from_values",
    "norm_modular_bounds",
    "plateau_function",
    "lambda_star_search",
    "global_minimize",
    "truncated_nonlinearity",
    "truncated_energy",
    "truncated_energy_gradient",
    "mountain_pass",
    "lambda_1_estimate",
    "solve_two_solutions",
    "default_spec",
]


class GeometryError(RuntimeError):
    """The variational geometry needed for two solutions is absent."""


class HypothesisError(ValueError):
    """The structural hypotheses on Phi, p, q do not hold."""


@dataclass
class ProblemSpec:
    """Data of the Dirichlet problem and solver settings.

    ``lam=None`` means: estimate lam* and use ``lam_factor * lam*``.
    """

    Phi: NFunction
    p: float
    q: float
    grid: Grid
    lam: float | None = None
    lam_factor: float = 2.0
    eps_a: float = 1e-8
    tol_res: float = 1e-6
    max_iter: int = 50_000
    armijo_c1: float = 1e-4
    backtrack: float = 0.5
    path_nodes: int = 21
    reparam_every: int = 10
    max_sweeps: int = 60
    newton_maxiter: int = 300
    retries: int = 5
    noise: float = 1e-3
    separation_tol: float = 1e-2
    seed: int = 0

    def with_lambda(self, lam):
        d = dict(self.__dict__)
        d["lam"] = float(lam)
        return ProblemSpec(**d)


def default_spec(n: int = 33) -> ProblemSpec:
    """Desk-scale configuration: unit square, Phi = t^1.8 / 1.8, p = 1.5, q = 1.2."""
    return ProblemSpec(Phi=power(1.8), p=1.5, q=1.2, grid=Grid([(0.0, 1.0), (0.0, 1.0)], n))


# -- structural hypotheses ------------------------------------------------------


def index_estimates(Phi: NFunction, t_lo: float = 1e-6, t_hi: float = 1e6, n: int = 241):
    """phi_0 = inf and phi^0 = sup of t phi(t) / Phi(t) over log probes."""
    t = np.geomspace(t_lo, t_hi, n)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        r = t * Phi.g(t) / Phi(t)
    r = r[np.isfinite(r)]
    return float(np.min(r)), float(np.max(r))


def check_hypotheses(spec: ProblemSpec) -> dict:
    """Index conditions 1 < q < p < phi_0 and phi^0 < min(N, N phi_0 / (N - phi_0)),
    plus convexity of t -> Phi(sqrt t) on probes.

    ``ok`` covers the two index conditions; the convexity flag is informative.
    """
    phi0, phi_sup = index_estimates(spec.Phi)
    N = spec.grid.dim
    # N phi_0 / (N - phi_0) is read as +inf once phi_0 >= N
    cap = min(N, N * phi0 / (N - phi0)) if phi0 < N else float(N)
    t = np.geomspace(1e-6, 1e6, 241)
    s = spec.Phi(np.sqrt(t))
    slopes = np.diff(s) / np.diff(t)
    convex = bool(np.all(np.diff(slopes) >= -1e-9 * np.abs(slopes[1:])))
    flags = {
        "phi_0": phi0,
        "phi^0": phi_sup,
        "exponent_order": bool(1 < spec.q < spec.p < phi0),
        "upper_index_bound": bool(phi_sup < cap),
        "upper_index_cap": cap,
        "phi_sqrt_convex": convex,
    }
    # convexity of Phi(sqrt t) is reported only: for power-type Phi in 2D it
    # contradicts the upper index bound
    flags["ok"] = flags["exponent_order"] and flags["upper_index_bound"]
    return flags


# -- discretisation ---------------------------------------------------------------


class _Mesh:
    """Element gradient operators, element measures and node weights of a grid."""

    def __init__(self, grid: Grid):
        self.grid = grid
        n = grid.size
        idx = np.arange(n).reshape(grid.shape)
        if grid.dim == 1:
            (h,) = grid.h
            ne = grid.shape[0] - 1
            rows = np.repeat(np.arange(ne), 2)
            cols = np.stack([idx[:-1], idx[1:]], 1).ravel()
            vals = np.tile([-1.0 / h, 1.0 / h], ne)
            self.D = [sparse.csr_matrix((vals, (rows, cols)), shape=(ne, n))]
            self.emeas = np.full(ne, h)
        else:
            hx, hy = grid.h
            # lower triangle (i,j),(i+1,j),(i,j+1); upper (i+1,j+1),(i,j+1),(i+1,j)
            a, b, c, d = idx[:-1, :-1].ravel(), idx[1:, :-1].ravel(), idx[:-1, 1:].ravel(), idx[1:, 1:].ravel()
            nc = a.size
            e1, e2 = np.arange(nc), nc + np.arange(nc)
            rows = np.concatenate([e1, e1, e2, e2])
            dx = sparse.csr_matrix(
                (np.concatenate([-np.ones(nc), np.ones(nc), -np.ones(nc), np.ones(nc)]) / hx,
                 (rows, np.concatenate([a, b, c, d]))), shape=(2 * nc, n))
            dy = sparse.csr_matrix(
                (np.concatenate([-np.ones(nc), np.ones(nc), -np.ones(nc), np.ones(nc)]) / hy,
                 (rows, np.concatenate([a, c, b, d]))), shape=(2 * nc, n))
            self.D = [dx, dy]
            self.emeas = np.full(2 * nc, hx * hy / 2)
        self.w = grid.weights.ravel().copy()
        self.interior = np.flatnonzero(grid.interior_mask.ravel())
        self.imask = grid.interior_mask.ravel()
        K = sum(Dk.T @ sparse.diags(self.emeas) @ Dk for Dk in self.D).tocsc()
        self.stiffness = K
        self._solve = spla.factorized(K[self.interior][:, self.interior].tocsc())

    def grads(self, u):
        return [Dk @ u for Dk in self.D]

    def precondition(self, G):
        """Apply the inverse of the interior stiffness matrix (Sobolev gradient)."""
        out = np.zeros_like(G)
        out[self.interior] = self._solve(G[self.interior])
        return out


@lru_cache(maxsize=8)
def _mesh(grid: Grid) -> _Mesh:
    return _Mesh(grid)


class _Functional:
    """I (cap=None) or the truncated J (cap=u1) on flat node arrays."""

    def __init__(self, spec: ProblemSpec, lam: float, cap=None):
        self.spec = spec
        self.mesh = _mesh(spec.grid)
        self.lam = float(lam)
        self.p, self.q = float(spec.p), float(spec.q)
        self.cap = None if cap is None else np.asarray(cap, dtype=float).ravel()
        self.eps = spec.eps_a
        Phi = spec.Phi
        self.Phi = Phi
        if Phi.params.get("kind") == "power":
            al = Phi.params["alpha"]
            c = Phi.params.get("coef", 1.0 / al)
            self._dphi = lambda t: c * al * (al - 1.0) * t ** (al - 2.0)
        else:
            self._dphi = lambda t: (Phi.g(t * (1 + 1e-6)) - Phi.g(t * (1 - 1e-6))) / (2e-6 * t)

    # nonlinearity ---------------------------------------------------------
    def F(self, u):
        return truncated_nonlinearity(self.cap, u, self.p, self.q)[1]

    def f(self, u):
        return truncated_nonlinearity(self.cap, u, self.p, self.q)[0]

    def df(self, u):
        p, q = self.p, self.q
        pos = u > 0
        if self.cap is not None:
            pos &= u <= self.cap
        up = np.where(pos, u, 1.0)
        return np.where(pos, (p - 1) * up ** (p - 2) - (q - 1) * up ** (q - 2), 0.0)

    # energy ---------------------------------------------------------------
    def gradient_modulus(self, u):
        gs = self.mesh.grads(u)
        return gs, np.sqrt(sum(g * g for g in gs))

    def energy(self, u):
        _, t = self.gradient_modulus(u)
        m = self.mesh
        return float(np.sum(m.emeas * self.Phi(t)) - self.lam * np.sum(m.w * self.F(u)))

    def dE(self, u):
        """Derivative vector dE/du_i, zero on boundary nodes."""
        m = self.mesh
        gs, t = self.gradient_modulus(u)
        te = np.maximum(t, self.eps)
        a = self.Phi.g(te) / te
        G = sum(Dk.T @ (m.emeas * a * gk) for Dk, gk in zip(m.D, gs))
        G = G - self.lam * m.w * self.f(u)
        G[~m.imask] = 0.0
        return G

    def riesz(self, u):
        return self.dE(u) / self.mesh.w

    def residual(self, u):
        return float(np.max(np.abs(self.riesz(u))))

    def hessian(self, u):
        """Interior block of the Hessian (regularised at vanishing gradients)."""
        m = self.mesh
        gs, t = self.gradient_modulus(u)
        te = np.maximum(t, self.eps)
        a = self.Phi.g(te) / te
        b = self._dphi(te) - a
        ghat = [g / te for g in gs]
        H = None
        for k, Dk in enumerate(m.D):
            for l, Dl in enumerate(m.D):
                c = m.emeas * (b * ghat[k] * ghat[l] + (a if k == l else 0.0))
                term = Dk.T @ sparse.diags(c) @ Dl
                H = term if H is None else H + term
        H = H - sparse.diags(self.lam * m.w * self.df(u))
        H = H.tocsr()
        ii = m.interior
        return H[ii][:, ii].tocsc()


# -- public energy API --------------------------------------------------------------


def _values(spec, u, require_dirichlet=True):
    if isinstance(u, GridFunction):
        if u.grid != spec.grid:
            raise ValueError("grid function does not live on the problem grid")
        if require_dirichlet and not u.is_dirichlet(1e-12):
            raise ValueError("expected a function vanishing on the boundary")
        return u.values.ravel().astype(float)
    arr = np.asarray(u, dtype=float).ravel()
    if arr.size != spec.grid.size:
        raise ValueError("wrong number of node values")
    if require_dirichlet and np.any(np.abs(arr[spec.grid.boundary_mask.ravel()]) > 1e-12):
        raise ValueError("expected a function vanishing on the boundary")
    return arr


def _lam(spec):
    if spec.lam is None:
        raise ValueError("spec.lam is unset; run lambda_star_search first")
    return spec.lam


def energy(spec: ProblemSpec, u) -> float:
    """Discrete energy I(u) of a Dirichlet grid function."""
    return _Functional(spec, _lam(spec)).energy(_values(spec, u))


def energy_from_values(spec: ProblemSpec, values, lam=None) -> float:
    return _Functional(spec, _lam(spec) if lam is None else lam).energy(_values(spec, values))


def energy_gradient(spec: ProblemSpec, u) -> GridFunction:
    """Riesz representer of I'(u) for the grid inner product; zero on the boundary."""
    g = _Functional(spec, _lam(spec)).riesz(_values(spec, u))
    return GridFunction(spec.grid, g)


def norm_modular_bounds(spec: ProblemSpec, u, rtol: float = 1e-9) -> dict:
    """Compare int Phi(|grad u|) with powers of the gradient Luxemburg norm.

    For ||u|| < 1: ||u||^{phi^0} <= int Phi(|grad u|) <= ||u||^{phi_0};
    for ||u|| > 1 the exponents swap.  ||u|| = 1 is reported as a boundary case.
    """
    vals = _values(spec, u)
    m = _mesh(spec.grid)
    t = np.sqrt(sum(g * g for g in m.grads(vals)))
    rho = modular_values(spec.Phi, t, m.emeas)
    nrm = luxemburg_norm_values(spec.Phi, t, m.emeas)
    phi0, phi_sup = index_estimates(spec.Phi)
    out = {"norm": nrm, "modular": rho, "phi_0": phi0, "phi^0": phi_sup}
    if abs(nrm - 1.0) <= rtol:
        out.update(case="boundary", lower=None, upper=None, holds=None)
        return out
    if nrm < 1:
        lower, upper, case = nrm**phi_sup, nrm**phi0, "below_one"
    else:
        lower, upper, case = nrm**phi0, nrm**phi_sup, "above_one"
    slack = rtol * max(1.0, rho)
    out.update(case=case, lower=lower, upper=upper,
               holds=bool(lower - slack <= rho <= upper + slack))
    return out


# -- lambda* ----------------------------------------------------------------------


def plateau_function(grid: Grid, t0: float, margin: float = 0.25) -> GridFunction:
    """t0 on the inner box at relative distance ``margin`` from the boundary,
    with a linear ramp down to 0 on the boundary."""
    coords = grid.coordinates()
    dist = None
    for x, (a, b) in zip(coords, grid.bounds):
        dk = np.minimum(x - a, b - x) / (b - a)
        dist = dk if dist is None else np.minimum(dist, dk)
    return GridFunction(grid, t0 * np.clip(dist / margin, 0.0, 1.0))


def _default_t0(p, q):
    # t0^p/p - t0^q/q > 0 is needed for negative energy; take twice the crossing point
    return 2.0 * (p / q) ** (1.0 / (p - q))


def _scan(spec, u0, lam, ts):
    F = _Functional(spec, lam)
    base = u0.values.ravel()
    return np.array([F.energy(t * base) for t in ts])


def lambda_star_search(spec: ProblemSpec, u0: GridFunction | None = None, ts=None,
                       rtol: float = 1e-8, max_doublings: int = 60) -> dict:
    """Smallest lam (bisection) for which min_t I(t u0) < 0 on a t-scan.

    Returns a dict with ``lambda_star``, the scan, the plateau level and the
    best scaling at 2 lam*.
    """
    p, q = spec.p, spec.q
    if u0 is None:
        t0 = _default_t0(p, q)
        u0 = plateau_function(spec.grid, t0)
    else:
        t0 = float(np.max(u0.values))
    if ts is None:
        ts = np.geomspace(1e-3, 1e3, 601)
    neg = lambda lam: float(np.min(_scan(spec, u0, lam, ts))) < 0
    if neg(0.0):
        raise GeometryError("I(t u0) < 0 at lam = 0; energy is not a Dirichlet energy")
    hi = 1.0
    trace = []
    for _ in range(max_doublings):
        trace.append(hi)
        if neg(hi):
            break
        hi *= 2.0
    else:
        raise GeometryError(f"no sign change of min_t I(t u0) for lam in {trace}")
    lo = 0.0
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if neg(mid):
            hi = mid
        else:
            lo = mid
    return {"lambda_star": hi, "t0": t0, "u0": u0, "ts": ts, "trace": trace}


# -- solvers ----------------------------------------------------------------------------


def _descent(F: _Functional, u, tol, max_iter, c1, beta):
    """Armijo descent along the Sobolev gradient.

    Stops at the residual tolerance, when no step decreases the energy, after
    20 steps whose decrease is below rounding, or at the iteration cap.
    """
    m = F.mesh
    E = F.energy(u)
    step = 1.0
    flat = 0
    for it in range(max_iter):
        G = F.dE(u)
        r = float(np.max(np.abs(G / m.w)))
        if r <= tol:
            return u, it, r, True
        D = m.precondition(G)
        slope = float(G @ D)
        step = min(1.0, 2.0 * step)
        while True:
            un = u - step * D
            En = F.energy(un)
            if En <= E - c1 * step * slope:
                break
            step *= beta
            if step < 1e-14:
                return u, it, r, False
        # energy differences below rounding: the descent has stalled
        flat = flat + 1 if En >= E - 1e-15 * abs(E) else 0
        u, E = un, En
        if flat >= 20:
            return u, it + 1, F.residual(u), False
    return u, max_iter, F.residual(u), False


def _newton(F: _Functional, u, tol, maxiter, rng=None):
    """Newton iteration on the gradient with a residual merit function.

    Positive nodes may shrink by at most a factor 10 per step, and nodes
    driven to (almost) zero are snapped to zero when that lowers the
    residual; the nonlinearity u^{q-1} is not differentiable at 0.
    """
    m = F.mesh
    ii = m.interior
    r = F.residual(u)
    best = (r, u)
    for k in range(maxiter):
        if r <= tol:
            return u, r, k, True
        G = F.dE(u)
        d = np.zeros_like(u)
        try:
            d[ii] = spla.spsolve(F.hessian(u), -G[ii])
        except RuntimeError:
            break
        if not np.all(np.isfinite(d)):
            break
        step = 1.0
        while True:
            un = u + step * d
            pos = u > 0
            clamp = pos & (un < 0.1 * u)
            un[clamp] = 0.1 * u[clamp]
            rn = F.residual(un)
            if rn < r or step < 1e-3:
                break
            step *= 0.5
        small = (un > 0) & (un < 1e-12)
        if small.any():
            uz = un.copy()
            uz[small] = 0.0
            rz = F.residual(uz)
            if rz < rn:
                un, rn = uz, rz
        u, r = un, rn
        if r < best[0]:
            best = (r, u)
    r, u = best
    return u, r, maxiter, r <= tol


def global_minimize(spec: ProblemSpec, u_init=None, polish: bool = True) -> dict:
    """Minimise I from ``u_init``: Sobolev-gradient Armijo descent, then Newton.

    Returns u1 (GridFunction), its energy, residual and iteration counts.
    """
    lam = _lam(spec)
    F = _Functional(spec, lam)
    u = np.zeros(spec.grid.size) if u_init is None else _values(spec, u_init).copy()
    u, it, r, conv = _descent(F, u, spec.tol_res, spec.max_iter, spec.armijo_c1, spec.backtrack)
    newton_it = 0
    if polish and not conv:
        u, r, newton_it, conv = _newton(F, u, 1e-3 * spec.tol_res, spec.newton_maxiter)
        if not conv and r <= spec.tol_res:
            conv = True
    return {
        "u1": GridFunction(spec.grid, u),
        "I_u1": F.energy(u),
        "residual": r,
        "converged": bool(conv),
        "descent_iterations": it,
        "newton_iterations": newton_it,
    }


def truncated_nonlinearity(u1, t, p: float, q: float):
    """Truncated nonlinearity f(x, t) and its primitive F(x, t).

    f = 0 for t < 0, t^{p-1} - t^{q-1} for 0 <= t <= u1(x) and the constant
    u1^{p-1} - u1^{q-1} beyond.  ``u1=None`` means no truncation.
    Returns ``(f, F)`` arrays.
    """
    t = np.asarray(t, dtype=float)
    tp = np.maximum(t, 0.0)
    f = tp ** (p - 1) - tp ** (q - 1)
    F = tp**p / p - tp**q / q
    if u1 is None:
        return f, F
    c = np.broadcast_to(np.maximum(np.asarray(u1, dtype=float), 0.0), t.shape)
    above = t > c
    fc = c ** (p - 1) - c ** (q - 1)
    Fc = c**p / p - c**q / q + fc * (t - c)
    return np.where(above, fc, f), np.where(above, Fc, F)


def truncated_energy(spec: ProblemSpec, u1, u) -> float:
    """J(u) = int Phi(|grad u|) - lam int F(x, u) with F truncated at u1."""
    cap = _values(spec, u1, require_dirichlet=False)
    return _Functional(spec, _lam(spec), cap).energy(_values(spec, u))


def truncated_energy_gradient(spec: ProblemSpec, u1, u) -> GridFunction:
    cap = _values(spec, u1, require_dirichlet=False)
    return GridFunction(spec.grid, _Functional(spec, _lam(spec), cap).riesz(_values(spec, u)))


def _log_path(u1, K):
    """Nodes expm1(s log1p(u1)), s = k/(K-1): a path from 0 to u1 whose
    nodes are spread evenly in the log1p metric."""
    L = np.log1p(np.maximum(u1, 0.0))
    return [np.expm1(k / (K - 1) * L) for k in range(K)]


def _reparametrize(path, w):
    """Re-space interior nodes at equal arc length in the log1p metric."""
    P = np.array([np.sign(x) * np.log1p(np.abs(x)) for x in path])
    seg = np.sqrt((np.diff(P, axis=0) ** 2 * w).sum(axis=1))
    if not np.all(np.isfinite(seg)) or seg.sum() == 0:
        return path
    s = np.concatenate([[0.0], np.cumsum(seg)]) / seg.sum()
    K = len(path)
    out = [path[0]]
    for k in range(1, K - 1):
        tt = k / (K - 1)
        j = min(int(np.searchsorted(s, tt, side="right")) - 1, K - 2)
        al = (tt - s[j]) / max(s[j + 1] - s[j], 1e-300)
        z = (1 - al) * P[j] + al * P[j + 1]
        out.append(np.sign(z) * np.expm1(np.abs(z)))
    out.append(path[-1])
    return out


def mountain_pass(spec: ProblemSpec, u1) -> dict:
    """Mountain-pass point of the truncated functional J between 0 and u1.

    A K-node path from 0 to u1 is deformed: each interior node takes one
    Armijo step along the Sobolev gradient of J (step capped by half the
    distance to its neighbours), and the nodes are re-spaced by arc length
    every ``reparam_every`` sweeps.  The highest node is then polished to a
    critical point by Newton's method.  If the polish falls back to 0 or u1,
    the start is perturbed by Dirichlet noise and polished again.

    Returns u2, c = J(u2) (the discrete level ``c_discrete``), the residual
    and the path energies per sweep.
    """
    lam = _lam(spec)
    cap = _values(spec, u1, require_dirichlet=False)
    F = _Functional(spec, lam, cap)
    m = F.mesh
    w = m.w
    J0, J1 = 0.0, F.energy(cap)
    if not J1 < 0:
        raise GeometryError("no mountain pass geometry at this lambda: J(u1) >= 0")
    K = spec.path_nodes
    path = _log_path(cap, K)
    wn = lambda v: math.sqrt(float(np.sum(w * v * v)))
    energies = [F.energy(x) for x in path]
    snapshot = [list(energies)]
    km = int(np.argmax(energies))
    r_max = F.residual(path[km])
    sweeps = 0
    for sweep in range(spec.max_sweeps):
        if r_max <= spec.tol_res:
            break
        for k in range(1, K - 1):
            x = path[k]
            G = F.dE(x)
            D = m.precondition(G)
            slope = float(G @ D)
            E = energies[k]
            cap_step = 0.5 * min(wn(path[k] - path[k - 1]), wn(path[k + 1] - path[k]))
            step = min(1.0, cap_step / max(wn(D), 1e-300))
            while step > 1e-14:
                xn = x - step * D
                En = F.energy(xn)
                if En <= E - spec.armijo_c1 * step * slope:
                    path[k], energies[k] = xn, En
                    break
                step *= spec.backtrack
        sweeps = sweep + 1
        if sweeps % spec.reparam_every == 0:
            path = _reparametrize(path, w)
            energies = [F.energy(x) for x in path]
        snapshot.append(list(energies))
        km = int(np.argmax(energies))
        r_max = F.residual(path[km])
    if km in (0, K - 1):
        raise GeometryError("no mountain pass geometry at this lambda: path collapsed")

    rng = np.random.default_rng(spec.seed)
    start = path[km]
    scale = float(np.max(np.abs(start)))
    u2 = None
    retries = 0
    for attempt in range(spec.retries + 1):
        cand, r, it, conv = _newton(F, start, 1e-3 * spec.tol_res, spec.newton_maxiter)
        trivial = (np.max(np.abs(cand)) < spec.separation_tol
                   or np.max(np.abs(cand - cap)) < spec.separation_tol)
        if conv and not trivial:
            u2 = cand
            break
        retries += 1
        noise = rng.standard_normal(cand.size) * m.imask
        start = np.maximum(path[km] + spec.noise * scale * noise, 0.0)
    if u2 is None:
        raise GeometryError("mountain pass polish did not reach a nontrivial critical point")
    return {
        "u2": GridFunction(spec.grid, u2),
        "c": F.energy(u2),
        "residual": r,
        "newton_iterations": it,
        "sweeps": sweeps,
        "retries": retries,
        "path_max_node": km,
        "path_max_energy": float(energies[km]),
        "path_snapshot": snapshot,
        "J_endpoints": (J0, J1),
    }


def lambda_1_estimate(spec: ProblemSpec, samples: int = 100, descent_steps: int = 200,
                      seed: int | None = None) -> dict:
    """Upper estimate of inf int Phi(|grad u|) / int |u|^{phi_0} over Dirichlet u.

    Random smooth Dirichlet fields (sums of a few sine modes) are scaled so
    that their gradient Luxemburg norm equals 2, the best one is improved by
    Armijo descent on the quotient, and the smallest quotient is returned.
    Whether each sample satisfies ||u|| > 1 is recorded.
    """
    rng = np.random.default_rng(spec.seed if seed is None else seed)
    grid = spec.grid
    m = _mesh(grid)
    phi0, _ = index_estimates(spec.Phi)
    coords = grid.coordinates()
    lens = [b - a for a, b in grid.bounds]

    def quotient(u):
        t = np.sqrt(sum(g * g for g in m.grads(u)))
        A = float(np.sum(m.emeas * spec.Phi(t)))
        B = float(np.sum(m.w * np.abs(u) ** phi0))
        return A / B if B > 0 else math.inf

    def gnorm(u):
        t = np.sqrt(sum(g * g for g in m.grads(u)))
        return luxemburg_norm_values(spec.Phi, t, m.emeas)

    best, best_u, status = math.inf, None, []
    for _ in range(samples):
        u = np.zeros(grid.shape)
        for _ in range(3):
            ks = rng.integers(1, 4, size=grid.dim)
            mode = np.ones(grid.shape)
            for x, (a, _b), L, kk in zip(coords, grid.bounds, lens, ks):
                mode = mode * np.sin(kk * np.pi * (x - a) / L)
            u += rng.standard_normal() * mode
        u = u.ravel()
        u *= 2.0 / gnorm(u)
        status.append(bool(gnorm(u) > 1))
        val = quotient(u)
        if val < best:
            best, best_u = val, u
    # Armijo descent on the quotient from the best sample
    F = _Functional(spec, 0.0)
    u = best_u.copy()
    for _ in range(descent_steps):
        t = np.sqrt(sum(g * g for g in m.grads(u)))
        A = float(np.sum(m.emeas * spec.Phi(t)))
        B = float(np.sum(m.w * np.abs(u) ** phi0))
        dA = F.dE(u)
        dB = m.w * phi0 * np.abs(u) ** (phi0 - 1) * np.sign(u)
        dB[~m.imask] = 0
        G = (dA * B - A * dB) / B**2
        D = m.precondition(G)
        slope = float(G @ D)
        Q = A / B
        step = 1.0 / max(np.max(np.abs(D)) / max(np.max(np.abs(u)), 1e-300), 1.0)
        while step > 1e-12:
            un = u - step * D
            if quotient(un) <= Q - 1e-4 * step * slope:
                u = un
                break
            step *= 0.5
        else:
            break
    final = quotient(u)
    return {
        "lambda_1_estimate": min(best, final),
        "best_sample": best,
        "after_descent": final,
        "norm_above_one": status,
        "note": "upper estimate; the quotient is scale invariant only for homogeneous Phi",
    }


@dataclass
class SolveReport:
    """Outcome of :func:`solve_two_solutions`."""

    u1: GridFunction
    u2: GridFunction
    I_u1: float
    I_u2: float
    c_discrete: float
    lam: float
    lambda_star_estimate: float | None
    lambda_1_estimate: float | None
    grad_residuals: dict
    iterations: dict
    hypotheses: dict
    checks: dict
    path_snapshot: list = field(default_factory=list)

    @property
    def c(self):
        return self.c_discrete

    def to_dict(self) -> dict:
        return {
            "schema": 1,
            "lambda": self.lam,
            "lambda_star_estimate": self.lambda_star_estimate,
            "lambda_1_estimate": self.lambda_1_estimate,
            "I_u1": self.I_u1,
            "I_u2": self.I_u2,
            "c_discrete": self.c_discrete,
            "grad_residuals": self.grad_residuals,
            "iterations": self.iterations,
            "hypotheses": self.hypotheses,
            "checks": self.checks,
            "grid": self.u1.grid.to_dict(),
            "u1": self.u1.values.ravel().tolist(),
            "u2": self.u2.values.ravel().tolist(),
        }


def solve_two_solutions(spec: ProblemSpec, force: bool = False, estimate_lambda_1: bool = False,
                        weak_tests: int = 20) -> SolveReport:
    """Find the negative-energy minimiser u1 and the mountain-pass solution u2.

    Raises HypothesisError when the index conditions fail (unless ``force``)
    and GeometryError when no negative-energy minimiser exists or the
    mountain pass cannot be located.
    """
    hyp = check_hypotheses(spec)
    if not hyp["ok"] and not force:
        raise HypothesisError(f"hypotheses fail: {hyp}")
    ls = None
    if spec.lam is None:
        ls = lambda_star_search(spec)
        spec = spec.with_lambda(spec.lam_factor * ls["lambda_star"])
    lam = spec.lam
    if lam <= 0:
        raise GeometryError("lambda <= 0: I >= 0, no negative-energy minimiser")

    # start from the best scaling of the plateau function
    t0 = _default_t0(spec.p, spec.q)
    u0 = plateau_function(spec.grid, t0)
    ts = np.geomspace(1e-3, 1e3, 601)
    scan = _scan(spec, u0, lam, ts)
    if np.min(scan) >= 0:
        raise GeometryError("no negative energy along the plateau scaling; lambda below lambda*")
    u_init = ts[int(np.argmin(scan))] * u0

    gm = global_minimize(spec, u_init)
    u1 = gm["u1"]
    if not gm["I_u1"] < 0:
        raise GeometryError("global minimiser has nonnegative energy")
    mp = mountain_pass(spec, u1)
    u2 = mp["u2"]

    FI = _Functional(spec, lam)
    v1, v2 = u1.values.ravel(), u2.values.ravel()
    I_u2 = FI.energy(v2)
    res1, res2 = FI.residual(v1), FI.residual(v2)

    rng = np.random.default_rng(spec.seed)
    m = FI.mesh
    dE2 = FI.dE(v2)
    weak = 0.0
    for _ in range(weak_tests):
        v = rng.standard_normal(v2.size) * m.imask
        weak = max(weak, abs(float(dE2 @ v)) / math.sqrt(float(np.sum(m.w * v * v))))

    checks = {
        "I_u1_negative": bool(gm["I_u1"] < 0),
        "I_u2_positive": bool(I_u2 > 0),
        "J_equals_I_at_u2": bool(abs(mp["c"] - I_u2) <= 1e-9 * max(1.0, abs(I_u2))),
        "u2_nonnegative": bool(np.min(v2) >= -1e-12),
        "u2_below_u1": bool(np.all(v2 <= v1 + 1e-6)),
        "separation": float(np.max(np.abs(v1 - v2))),
        "separated": bool(np.max(np.abs(v1 - v2)) > spec.separation_tol),
        "weak_residual": weak,
    }
    lam1 = lambda_1_estimate(spec)["lambda_1_estimate"] if estimate_lambda_1 else None
    return SolveReport(
        u1=u1,
        u2=u2,
        I_u1=gm["I_u1"],
        I_u2=I_u2,
        c_discrete=mp["c"],
        lam=lam,
        lambda_star_estimate=None if ls is None else ls["lambda_star"],
        lambda_1_estimate=lam1,
        grad_residuals={"u1": res1, "u2": res2},
        iterations={
            "descent": gm["descent_iterations"],
            "newton_u1": gm["newton_iterations"],
            "path_sweeps": mp["sweeps"],
            "newton_u2": mp["newton_iterations"],
            "retries": mp["retries"],
        },
        hypotheses=hyp,
        checks=checks,
        path_snapshot=mp["path_snapshot"],
    )
