"""N-functions and their calculus.

An N-function is stored through its density ``g``; the primitive
``G(t) = int_0^t g`` is either registered in closed form or obtained by
quadrature.  Inversion, the Young conjugate, the doubling (Delta_2) test,
growth comparisons and the Sobolev conjugate are built on top of that.

Verdicts about asymptotic behaviour (Delta_2, domination, slower growth)
are certificates over a finite probe range and say nothing beyond it.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import integrate
from scipy.interpolate import PchipInterpolator

RTOL = 1e-8
ATOL = 1e-9

__all__ = [
    "ConvergenceError",
    "NFunction",
    "Delta2Report",
    "ComparisonVerdict",
    "SobolevConjugate",
    "power",
    "exp_minus",
    "llog",
    "power_log",
    "power_abslog",
    "exp_power",
    "tabulated",
    "compose",
    "linear_combination",
    "from_config",
    "parse_gspec",
    "builtins",
    "evaluate",
    "inverse",
    "conjugate_density",
    "conjugate",
    "young_gap",
    "delta2_check",
    "compare",
    "sobolev_conditions",
    "sobolev_conjugate",
]


class ConvergenceError(RuntimeError):
    """Raised when an iterative search exceeds its iteration budget."""


def _vectorize(fn):
    """Wrap a scalar or array callable so that it maps arrays to arrays."""

    def wrapped(t):
        arr = np.asarray(t, dtype=float)
        try:
            out = np.asarray(fn(arr), dtype=float)
            if out.shape == arr.shape:
                return out
        except (TypeError, ValueError):
            pass
        return np.vectorize(lambda x: float(fn(float(x))), otypes=[float])(arr)

    return wrapped


def _solve_increasing(f, y, maxiter=2200):
    """Return sup{t >= 0 : f(t) <= y} elementwise for nondecreasing ``f``.

    A geometric bracket [t, 2t] is located first, then bisection runs to
    machine precision.  ``f`` must accept arrays.
    """
    y = np.asarray(y, dtype=float)
    scalar = y.ndim == 0
    y = np.atleast_1d(y)
    out = np.zeros_like(y)
    pos = y > 0
    if not pos.any():
        return float(out[0]) if scalar else out
    yy = y[pos]
    below = f(np.ones_like(yy)) <= yy
    lo = np.where(below, 1.0, 0.5)
    hi = np.where(below, 2.0, 1.0)

    for _ in range(maxiter):
        grow = below & (f(hi) <= yy)
        shrink = ~below & ~(f(lo) <= yy) & (lo > 0)
        if not (grow.any() or shrink.any()):
            break
        lo = np.where(grow, hi, lo)
        hi = np.where(grow, 2.0 * hi, hi)
        hi = np.where(shrink, lo, hi)
        lo = np.where(shrink, 0.5 * lo, lo)
        lo = np.where(lo < 1e-300, 0.0, lo)
        if np.any(~np.isfinite(hi)):
            raise ConvergenceError("unbounded search: value beyond float range")
    else:
        raise ConvergenceError("bracketing exceeded iteration cap")

    for _ in range(200):
        mid = 0.5 * (lo + hi)
        ok = f(mid) <= yy
        lo = np.where(ok, mid, lo)
        hi = np.where(ok, hi, mid)
        if np.all(hi - lo <= 4 * np.finfo(float).eps * hi):
            break
    out[pos] = lo
    return float(out[0]) if scalar else out


class _QuadPrimitive:
    """Primitive of a density by adaptive quadrature on a cached geometric grid."""

    def __init__(self, g, t_lo=1e-6, t_hi=1e6, per_decade=8):
        self.g = g
        n = int(round(math.log10(t_hi / t_lo) * per_decade)) + 1
        self.nodes = np.geomspace(t_lo, t_hi, n)
        f = lambda x: float(g(np.asarray(x)))
        # fast-growing densities overflow on the upper nodes; inf is the right value there
        with np.errstate(over="ignore", invalid="ignore"), warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            head = integrate.quad(f, 0.0, self.nodes[0], limit=200)[0]
            pieces = [integrate.quad(f, a, b, limit=200)[0] for a, b in zip(self.nodes[:-1], self.nodes[1:])]
            self.cum = np.concatenate([[head], head + np.cumsum(pieces)])
        self._f = f

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        flat = t.ravel()
        out = np.empty_like(flat)
        for i, x in enumerate(flat):
            if not np.isfinite(x):
                out[i] = np.inf
                continue
            k = np.searchsorted(self.nodes, x, side="right") - 1
            if k < 0:
                out[i] = integrate.quad(self._f, 0.0, x, limit=200)[0]
            else:
                out[i] = self.cum[k] + integrate.quad(self._f, self.nodes[k], x, limit=200)[0]
        return out.reshape(t.shape)


class NFunction:
    """A Young function G(t) = int_0^t g given by its density.

    Parameters
    ----------
    density : callable
        Nondecreasing map g on [0, inf) with g(0) = 0.  Scalar or array
        callables are accepted.
    primitive : callable, optional
        Closed form of G.  When omitted, G is computed by quadrature.
    name : str
        Label used in reports.
    params : dict, optional
        Registry description, e.g. ``{"kind": "power", "alpha": 2.0}``.
    density_inverse, primitive_inverse : callable, optional
        Closed forms of g^{-1} and G^{-1}; bisection is used otherwise.
    conjugate_factory : callable, optional
        Zero-argument callable returning the conjugate in closed form.
    valid_from : float
        Lower end of the range where the N-function axioms hold.  Functions
        that are N-functions only "at infinity" use a positive value.
    validate : bool
        Run :meth:`check_invariants` on construction and raise on failure.
    """

    def __init__(
        self,
        density: Callable,
        primitive: Callable | None = None,
        *,
        name: str = "custom",
        params: dict | None = None,
        density_inverse: Callable | None = None,
        primitive_inverse: Callable | None = None,
        conjugate_factory: Callable | None = None,
        valid_from: float = 0.0,
        validate: bool = True,
    ):
        self._g = _vectorize(density)
        self._G = _vectorize(primitive) if primitive is not None else _QuadPrimitive(self._g)
        self.closed_form = primitive is not None
        self.name = name
        self.params = dict(params) if params else {"kind": "custom"}
        self._g_inv = _vectorize(density_inverse) if density_inverse is not None else None
        self._G_inv = _vectorize(primitive_inverse) if primitive_inverse is not None else None
        self._conjugate_factory = conjugate_factory
        self.valid_from = float(valid_from)
        if validate:
            report = self.check_invariants()
            if not report["ok"]:
                failed = [k for k, v in report.items() if v is False]
                raise ValueError(f"{name} is not an N-function: failed {failed}")

    def __repr__(self):
        return f"NFunction({self.name})"

    @staticmethod
    def _checked(t):
        t = np.asarray(t, dtype=float)
        if np.any(t < 0):
            raise ValueError("domain error: N-functions are evaluated at t >= 0")
        return t

    def g(self, t):
        """Density g(t)."""
        t = self._checked(t)
        return self._g(t)

    def __call__(self, t):
        t = self._checked(t)
        with np.errstate(over="ignore", invalid="ignore"):
            out = self._G(t)
        return out if out.ndim else float(out)

    def inverse(self, y):
        """G^{-1}(y) for y >= 0."""
        y = self._checked(y)
        if self._G_inv is not None:
            out = self._G_inv(y)
            return out if out.ndim else float(out)
        with np.errstate(over="ignore", invalid="ignore"):
            return _solve_increasing(self._G, y)

    def conjugate_density(self, s):
        """g*(s) = sup{t : g(t) <= s}."""
        s = self._checked(s)
        if self._g_inv is not None:
            out = self._g_inv(s)
            return out if out.ndim else float(out)
        with np.errstate(over="ignore", invalid="ignore"):
            return _solve_increasing(self._g, s)

    def conjugate(self, closed_form: bool = True) -> "NFunction":
        """Young conjugate G*(s) = int_0^s g*.

        The primitive uses the equality case of Young's inequality,
        G*(s) = s t - G(t) with t = g*(s), which holds whenever t realises
        the supremum of st - G(t).  With ``closed_form=False`` any registered
        closed form is ignored and the conjugate is computed by inversion.
        """
        if closed_form and self._conjugate_factory is not None:
            return self._conjugate_factory()

        def primitive(s):
            t = self.conjugate_density(s)
            with np.errstate(over="ignore", invalid="ignore"):
                val = s * t - self._G(t)
            return np.where(np.asarray(s) > 0, np.maximum(val, 0.0), 0.0)

        return NFunction(
            self.conjugate_density,
            primitive,
            name=f"conj({self.name})",
            params={"kind": "conjugate", "of": self.params},
            validate=False,
        )

    def young_gap(self, a, b):
        """G(a) + G*(b) - a b."""
        return young_gap(self, a, b)

    def to_config(self) -> dict:
        return dict(self.params)

    def check_invariants(self, t_lo: float = 1e-4, t_hi: float = 1e3, n: int = 256) -> dict:
        """Check the N-function axioms on a log-spaced sample grid.

        Returns a dict of boolean flags plus ``ok``.  The grid starts at
        ``max(t_lo, valid_from)``.
        """
        lo = max(t_lo, self.valid_from)
        t = np.geomspace(lo, t_hi, n)
        with np.errstate(over="ignore", invalid="ignore"):
            g = self._g(t)
            G = self._G(t)
        fin = np.isfinite(g) & np.isfinite(G)
        t, g, G = t[fin], g[fin], G[fin]
        report = {}
        report["density_positive"] = bool(np.all(g > 0))
        report["density_nondecreasing"] = bool(np.all(np.diff(g) >= -1e-12 * np.abs(g[1:])))
        slopes = np.diff(G) / np.diff(t)
        report["convex"] = bool(np.all(np.diff(slopes) >= -1e-7 * np.abs(slopes[1:]) - 1e-12))
        ratio = G / t
        report["ratio_increasing"] = bool(ratio[-1] > ratio[0])
        if self.valid_from == 0.0:
            report["density_zero_at_origin"] = bool(abs(float(self._g(np.array(0.0)))) <= 1e-12)
            report["ratio_small_at_origin"] = bool(self._G(np.array(1e-8)) / 1e-8 < ratio[0])
        report["ok"] = all(report.values())
        return report


# -- registry -----------------------------------------------------------------


def power(alpha: float, coef: float | None = None) -> NFunction:
    """G(t) = t^alpha / alpha, or coef * t^alpha when ``coef`` is given."""
    alpha = float(alpha)
    if alpha <= 1:
        raise ValueError("power N-function needs alpha > 1")
    c = 1.0 / alpha if coef is None else float(coef)
    if c <= 0:
        raise ValueError("coef must be positive")
    beta = alpha / (alpha - 1.0)
    params = {"kind": "power", "alpha": alpha}
    if coef is not None:
        params["coef"] = c

    def conj():
        if coef is None:
            return power(beta)
        return power(beta, (alpha - 1.0) * c * (c * alpha) ** (-beta))

    return NFunction(
        lambda t: c * alpha * t ** (alpha - 1.0),
        lambda t: c * t**alpha,
        name=f"power({alpha:g})" if coef is None else f"{c:g}*t^{alpha:g}",
        params=params,
        density_inverse=lambda s: (s / (c * alpha)) ** (1.0 / (alpha - 1.0)),
        primitive_inverse=lambda y: (y / c) ** (1.0 / alpha),
        conjugate_factory=conj,
    )


def _expm1_minus_t(t):
    small = t < 1e-3
    ts = np.where(small, t, 0.0)
    series = ts**2 / 2 + ts**3 / 6 + ts**4 / 24 + ts**5 / 120
    return np.where(small, series, np.expm1(np.where(small, 1.0, t)) - t)


def _llog(t):
    small = t < 1e-3
    ts = np.where(small, t, 0.0)
    series = ts**2 / 2 - ts**3 / 6 + ts**4 / 12 - ts**5 / 20
    tl = np.where(small, 1.0, t)
    return np.where(small, series, (1 + tl) * np.log1p(tl) - tl)


def exp_minus() -> NFunction:
    """G(t) = e^t - t - 1."""
    return NFunction(
        np.expm1,
        _expm1_minus_t,
        name="exp_minus",
        params={"kind": "exp_minus"},
        density_inverse=np.log1p,
        conjugate_factory=llog,
    )


def llog() -> NFunction:
    """G(t) = (1 + t) log(1 + t) - t."""
    return NFunction(
        np.log1p,
        _llog,
        name="llog",
        params={"kind": "llog", "form": "(1+t)log(1+t)-t"},
        density_inverse=np.expm1,
        conjugate_factory=exp_minus,
    )


def power_log(alpha: float) -> NFunction:
    """G(t) = t^alpha (log t + 1), an N-function only for t >= 1."""
    alpha = float(alpha)

    def G(t):
        tp = np.where(t > 0, t, 1.0)
        return np.where(t > 0, tp**alpha * (np.log(tp) + 1.0), 0.0)

    def g(t):
        tp = np.where(t > 0, t, 1.0)
        return np.where(t > 0, tp ** (alpha - 1.0) * (alpha * (np.log(tp) + 1.0) + 1.0), 0.0)

    return NFunction(g, G, name=f"power_log({alpha:g})", params={"kind": "power_log", "alpha": alpha}, valid_from=1.0)


def power_abslog(alpha: float) -> NFunction:
    """G(t) = t^alpha (|log t| + 1); convex only for t >= 1."""
    alpha = float(alpha)

    def G(t):
        tp = np.where(t > 0, t, 1.0)
        return np.where(t > 0, tp**alpha * (np.abs(np.log(tp)) + 1.0), 0.0)

    def g(t):
        tp = np.where(t > 0, t, 1.0)
        lg = np.log(tp)
        return np.where(t > 0, tp ** (alpha - 1.0) * (alpha * (np.abs(lg) + 1.0) + np.sign(lg)), 0.0)

    return NFunction(
        g, G, name=f"power_abslog({alpha:g})", params={"kind": "power_abslog", "alpha": alpha}, valid_from=1.0
    )


def exp_power(p: float = 2.0) -> NFunction:
    """G(t) = exp(t^p) - 1, p > 1."""
    p = float(p)
    if p <= 1:
        raise ValueError("exp_power needs p > 1")
    return NFunction(
        lambda t: p * t ** (p - 1.0) * np.exp(t**p),
        lambda t: np.expm1(t**p),
        name=f"exp_power({p:g})",
        params={"kind": "exp_power", "p": p},
        primitive_inverse=lambda y: np.log1p(y) ** (1.0 / p),
    )


def tabulated(nodes: Sequence[Sequence[float]]) -> NFunction:
    """N-function from a tabulated density.

    ``nodes`` is a list of ``[t, g(t)]`` pairs.  The density is piecewise
    linear through them (a node at the origin is added when missing) and is
    continued past the last node with the last slope, so G is piecewise
    quadratic and known in closed form.
    """
    arr = np.asarray(nodes, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2 or len(arr) < 1:
        raise ValueError("tabulated nodes must be a list of [t, g] pairs")
    arr = arr[np.argsort(arr[:, 0])]
    if arr[0, 0] > 0:
        arr = np.vstack([[0.0, 0.0], arr])
    if arr[0, 0] != 0 or arr[0, 1] != 0:
        raise ValueError("tabulated density must start at g(0) = 0")
    if np.any(np.diff(arr[:, 0]) <= 0) or np.any(np.diff(arr[:, 1]) < 0):
        raise ValueError("tabulated density must be nondecreasing with distinct nodes")
    ts, gs = arr[:, 0], arr[:, 1]
    if len(ts) < 2:
        raise ValueError("tabulated density needs a positive node")
    slope_end = (gs[-1] - gs[-2]) / (ts[-1] - ts[-2])
    cum = np.concatenate([[0.0], np.cumsum(0.5 * (gs[1:] + gs[:-1]) * np.diff(ts))])
    seg_slope = np.append(np.diff(gs) / np.diff(ts), slope_end)

    def g(t):
        t = np.asarray(t, dtype=float)
        return np.where(t <= ts[-1], np.interp(t, ts, gs), gs[-1] + slope_end * (t - ts[-1]))

    def G(t):
        t = np.asarray(t, dtype=float)
        k = np.clip(np.searchsorted(ts, t, side="right") - 1, 0, len(ts) - 1)
        dt = t - ts[k]
        gk = gs[k]
        sl = seg_slope[k]
        return cum[k] + gk * dt + 0.5 * sl * dt**2

    return NFunction(g, G, name="tabulated", params={"kind": "tabulated", "nodes": arr.tolist()})


def compose(G1: NFunction, G2: NFunction) -> NFunction:
    """G1 o G2, with density g1(G2(t)) g2(t) by the chain rule."""
    return NFunction(
        lambda t: G1.g(G2(t)) * G2.g(t),
        lambda t: G1(G2(t)),
        name=f"{G1.name}o{G2.name}",
        params={"kind": "compose", "outer": G1.to_config(), "inner": G2.to_config()},
        valid_from=max(G1.valid_from, G2.valid_from),
    )


def linear_combination(coeffs: Sequence[float], funcs: Sequence[NFunction]) -> NFunction:
    """sum_i a_i G_i with a_i > 0."""
    coeffs = [float(a) for a in coeffs]
    if len(coeffs) != len(funcs) or not funcs or min(coeffs) <= 0:
        raise ValueError("need matching positive coefficients and N-functions")
    return NFunction(
        lambda t: sum(a * F.g(t) for a, F in zip(coeffs, funcs)),
        lambda t: sum(a * F(t) for a, F in zip(coeffs, funcs)),
        name="+".join(f"{a:g}*{F.name}" for a, F in zip(coeffs, funcs)),
        params={"kind": "sum", "coeffs": coeffs, "terms": [F.to_config() for F in funcs]},
        valid_from=max(F.valid_from for F in funcs),
    )


def from_config(cfg: dict) -> NFunction:
    """Build an N-function from its registry description."""
    if not isinstance(cfg, dict) or "kind" not in cfg:
        raise ValueError("N-function config needs a 'kind' field")
    kind = cfg["kind"]
    if kind == "power":
        return power(cfg.get("alpha", 2.0), cfg.get("coef"))
    if kind == "exp_minus":
        return exp_minus()
    if kind == "llog":
        return llog()
    if kind == "power_log":
        return power_log(cfg.get("alpha", 2.0))
    if kind == "power_abslog":
        return power_abslog(cfg.get("alpha", 2.0))
    if kind == "exp_power":
        return exp_power(cfg.get("p", 2.0))
    if kind == "tabulated":
        return tabulated(cfg["nodes"])
    if kind == "compose":
        return compose(from_config(cfg["outer"]), from_config(cfg["inner"]))
    if kind == "sum":
        return linear_combination(cfg["coeffs"], [from_config(c) for c in cfg["terms"]])
    raise ValueError(f"unknown N-function kind {kind!r}")


def parse_gspec(text: str) -> NFunction:
    """Parse a short spec such as ``power:2``, ``exp_minus`` or ``exp_power:2``."""
    kind, _, arg = text.strip().partition(":")
    keys = {"power": "alpha", "power_log": "alpha", "power_abslog": "alpha", "exp_power": "p"}
    cfg = {"kind": kind}
    if arg:
        if kind not in keys:
            raise ValueError(f"{kind!r} takes no parameter")
        try:
            cfg[keys[kind]] = float(arg)
        except ValueError:
            raise ValueError(f"bad parameter {arg!r} in {text!r}") from None
    return from_config(cfg)


def builtins() -> dict:
    """The registered N-functions that are N-functions on all of [0, inf)."""
    return {
        "power(1.5)": power(1.5),
        "power(2)": power(2.0),
        "power(3)": power(3.0),
        "exp_minus": exp_minus(),
        "llog": llog(),
        "exp_power(2)": exp_power(2.0),
    }


# -- functional API -------------------------------------------------------------


def evaluate(G: NFunction, t):
    return G(t)


def inverse(G: NFunction, y):
    return G.inverse(y)


def conjugate_density(G: NFunction, s):
    return G.conjugate_density(s)


def conjugate(G: NFunction, closed_form: bool = True) -> NFunction:
    return G.conjugate(closed_form)


def young_gap(G: NFunction, a, b, Gstar: NFunction | None = None):
    """Young gap G(a) + G*(b) - a b, nonnegative up to rounding."""
    Gs = G.conjugate() if Gstar is None else Gstar
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    out = G(a) + Gs(b) - a * b
    return out if np.ndim(out) else float(out)


# -- Delta_2 -------------------------------------------------------------------


@dataclass
class Delta2Report:
    """Finite-range Delta_2 certificate.

    ``satisfied`` only speaks for ``probe_range``.  ``p_bound`` is the largest
    value of t g(t) / G(t) over probes >= ``t0`` and ``k`` the largest doubling
    ratio G(2t) / G(t) over probes >= ``T``.
    """

    satisfied: bool
    k: float
    T: float
    p_bound: float
    t0: float
    probe_range: tuple
    growth_slope: float
    n_skipped: int = 0

    def to_dict(self):
        return {
            "satisfied": self.satisfied,
            "k": self.k,
            "T": self.T,
            "p_bound": self.p_bound,
            "t0": self.t0,
            "probe_range": list(self.probe_range),
            "growth_slope": self.growth_slope,
            "n_skipped": self.n_skipped,
        }


def _index_ratio(G, t):
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        Gt = G(t)
        r = t * G.g(t) / Gt
    bad = ~np.isfinite(r) | (Gt <= 0)
    return r, bad


def delta2_check(G: NFunction, probe_range=(1.0, 100.0), tol: float = 1e-9, n_probes: int = 256,
                 slope_cap: float = 0.05) -> Delta2Report:
    """Ratio test for the Delta_2 condition on a finite probe range.

    The index ratio r(t) = t g(t) / G(t) is evaluated on log-spaced probes.
    The condition is reported as satisfied when r does not grow on the upper
    half of the range: its log-log slope there must stay below ``slope_cap``.
    When the ratio bound also holds on a window reaching eight decades below
    the range, ``T`` is reported as 0.
    """
    t_min, t_max = map(float, probe_range)
    if not 0 < t_min < t_max:
        raise ValueError("probe_range must satisfy 0 < t_min < t_max")
    t = np.geomspace(t_min, t_max, n_probes)
    r, bad = _index_ratio(G, t)
    n_skipped = int(bad.sum())
    ok = ~bad
    if not ok.any():
        return Delta2Report(False, math.inf, t_min, math.inf, t_min, (t_min, t_max), math.inf, n_skipped)
    p_bound = float(np.max(r[ok]))
    t0 = float(t[ok][0])

    upper = ok & (t >= math.sqrt(t_min * t_max))
    if upper.sum() >= 2:
        lt, lr = np.log(t[upper]), np.log(r[upper])
        slope = float(np.polyfit(lt, lr, 1)[0])
    else:
        # the function overflows before the upper half of the range
        slope = math.inf
    satisfied = slope < slope_cap

    T = t_min
    probes_k = t[ok]
    if satisfied and G.valid_from == 0.0:
        low = np.geomspace(t_min * 1e-8, t_min, 129)[:-1]
        r_low, bad_low = _index_ratio(G, low)
        if not bad_low.any() and np.max(r_low) <= p_bound * (1 + tol) + tol:
            T = 0.0
            probes_k = np.concatenate([low, probes_k])
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        dbl = G(2 * probes_k) / G(probes_k)
    dbl = dbl[~np.isnan(dbl)]
    k = float(np.max(dbl)) if dbl.size else math.inf
    if satisfied and not (k > 2):
        satisfied = False
    return Delta2Report(satisfied, k, T, p_bound, t0, (t_min, t_max), slope, n_skipped)


# -- comparisons ---------------------------------------------------------------


@dataclass
class ComparisonVerdict:
    """Growth relation of G2 with respect to G1 on a finite range.

    relation is one of ``dominates`` (G1 dominates G2: G2(x) <= G1(c x) for
    x >= T), ``equivalent`` (G1(a x) <= G2(x) <= G1(b x) for x >= x0),
    ``strictly_slower`` (G2(t) / G1(lam t) decreases towards 0 on the tail for
    every tested lam; implies domination and takes precedence over a finite
    range equivalence) or ``incomparable_on_range``.
    """

    relation: str
    witness_constants: dict
    probe_range: tuple
    details: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "relation": self.relation,
            "witness_constants": self.witness_constants,
            "probe_range": list(self.probe_range),
            "details": self.details,
        }


def _domination_constant(G1, G2, x, c_lo=1e-8, c_hi=1e8):
    """Smallest c (up to bisection accuracy) with G2(x) <= G1(c x) on the probes."""
    with np.errstate(over="ignore", invalid="ignore"):
        target = G2(x)

        def holds(c):
            return bool(np.all(target <= G1(c * x)))

        if not holds(c_hi):
            return None
        if holds(c_lo):
            return c_lo
        lo, hi = math.log(c_lo), math.log(c_hi)
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if holds(math.exp(mid)):
                hi = mid
            else:
                lo = mid
    return math.exp(hi)


def compare(G1: NFunction, G2: NFunction, probe_range=(1.0, 1e6), n_probes: int = 256,
            lambdas=(0.1, 1.0, 10.0), decay: float = 0.9) -> ComparisonVerdict:
    """Classify the growth of G2 relative to G1 on ``probe_range``.

    Domination constants are found by bisection on log c.  Slower growth is
    certified when, for each lam in ``lambdas``, the ratio G2(t) / G1(lam t)
    is nonincreasing on the upper half of the probes and drops by at least
    the factor ``decay`` across it.
    """
    t_min, t_max = map(float, probe_range)
    x = np.geomspace(t_min, t_max, n_probes)
    c = _domination_constant(G1, G2, x)
    c_rev = _domination_constant(G2, G1, x)
    details = {"c_forward": c, "c_reverse": c_rev}

    tail = x[x >= math.sqrt(t_min * t_max)]
    slower = c is not None
    drops = {}
    for lam in lambdas:
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            q = G2(tail) / G1(lam * tail)
        if not np.all(np.isfinite(q)) or q[0] <= 0:
            slower = False
            drops[str(lam)] = None
            continue
        nonincreasing = bool(np.all(np.diff(q) <= 1e-12 * q[:-1]))
        drop = float(q[-1] / q[0])
        drops[str(lam)] = drop
        slower = slower and nonincreasing and drop <= decay
    details["tail_drop"] = drops

    if slower:
        relation = "strictly_slower"
        witness = {"c": c, "T": t_min}
    elif c is not None and c_rev is not None:
        relation = "equivalent"
        witness = {"a": 1.0 / c_rev, "b": c, "x0": t_min}
    elif c is not None:
        relation = "dominates"
        witness = {"c": c, "T": t_min}
    else:
        relation = "incomparable_on_range"
        witness = {}
    return ComparisonVerdict(relation, witness, (t_min, t_max), details)


# -- Sobolev conjugate -----------------------------------------------------------


def _gauss_panels(edges, n=12):
    xg, wg = np.polynomial.legendre.leggauss(n)
    a, b = edges[:-1, None], edges[1:, None]
    nodes = 0.5 * (b - a) * xg[None, :] + 0.5 * (b + a)
    weights = 0.5 * (b - a) * wg[None, :]
    return nodes, weights


def _local_slope(logf, x, factor=1.01):
    """d log f / d log x by a centred difference at x, given log f."""
    l1, l2 = logf(np.array([x / factor, x * factor]))
    return float(l2 - l1) / (2 * math.log(factor))


def _log_integrand(G, N):
    e = (N + 1.0) / N
    return lambda tau: np.log(np.asarray(G.inverse(tau))) - e * np.log(tau)


def sobolev_conditions(G: NFunction, N: int, tau_lo: float = 1e-30, tau_hi: float = 1e300) -> dict:
    """Integral conditions behind the Sobolev conjugate.

    With f(tau) = G^{-1}(tau) tau^{-(N+1)/N}, reports whether int_0^1 f is
    finite and whether int_1^inf f diverges, judged from the local power-law
    exponent of f at ``tau_lo`` and ``tau_hi``.  Also returns partial sums
    int_1^T f for T = 10^k.
    """
    N = int(N)
    if N < 1:
        raise ValueError("dimension must be >= 1")
    logf = _log_integrand(G, N)
    head = _local_slope(logf, tau_lo)
    tail = _local_slope(logf, tau_hi / 10)
    top = int(math.log10(tau_hi)) - 1
    marks = np.arange(0, top + 1, 10)
    # int f dtau = int f(e^x) e^x dx on uniform panels in x = log tau
    edges = np.linspace(0.0, marks[-1] * math.log(10), 16 * int(marks[-1]) + 1)
    nodes, weights = _gauss_panels(edges)
    x = nodes.ravel()
    vals = (np.exp(logf(np.exp(x)) + x).reshape(nodes.shape) * weights).sum(axis=1)
    cum = np.concatenate([[0.0], np.cumsum(vals)])
    partial = np.interp(marks * math.log(10), edges, cum)
    return {
        "near_zero_finite": head > -1 + 1e-3,
        "tail_divergent": tail >= -1 - 1e-3,
        "head_exponent": head,
        "tail_exponent": tail,
        "partial_sums": {f"1e{int(m)}": float(v) for m, v in zip(marks, partial)},
    }


class SobolevConjugate(NFunction):
    """Tabulated Sobolev conjugate G_* of an N-function.

    G_*^{-1}(t) = int_0^t G^{-1}(tau) tau^{-(N+1)/N} dtau is tabulated on
    log-spaced panels in sigma = tau^{1/N}.  In the extended case the
    integral converges at infinity; ``M`` is then its total value and
    G_*(s) = inf for s >= M.
    """

    def __init__(self, G: NFunction, N: int, tau_lo: float = 1e-30, tau_hi: float = 1e300,
                 per_decade: int = 8):
        N = int(N)
        cond = sobolev_conditions(G, N, tau_lo, tau_hi)
        if not cond["near_zero_finite"]:
            raise ValueError("sobolev conjugate undefined near zero")
        self.base = G
        self.N = N
        self.conditions = cond
        self.extended = not cond["tail_divergent"]

        s_lo, s_hi = tau_lo ** (1.0 / N), tau_hi ** (1.0 / N)
        n_edges = int(math.ceil(math.log10(s_hi / s_lo) * per_decade)) + 1
        self._edges = np.geomspace(s_lo, s_hi, n_edges)
        nodes, weights = _gauss_panels(self._edges)
        vals = (self._h(nodes.ravel()).reshape(nodes.shape) * weights).sum(axis=1)
        # analytic head for the power-law behaviour below the first edge
        logh = lambda sig: np.log(self._h(sig))
        gh = _local_slope(logh, s_lo)
        head = s_lo * float(self._h(np.array(s_lo))) / (gh + 1.0)
        self._head_exponent = gh
        self._cum = head + np.concatenate([[0.0], np.cumsum(vals)])
        self.M = None
        if self.extended:
            gt = _local_slope(logh, s_hi / 1.02)
            self.M = float(self._cum[-1] + s_hi * float(self._h(np.array(s_hi))) / (-gt - 1.0))
        self._tau_edges = self._edges**N
        # in the extended case the table saturates; interpolate on the
        # strictly increasing part only
        inc = np.concatenate([[True], np.diff(self._cum) > 1e-13 * self._cum[1:]])
        stop = len(inc) if inc.all() else int(np.argmin(inc))
        self._interp = PchipInterpolator(np.log(self._cum[:stop]), np.log(self._tau_edges[:stop]), extrapolate=True)

        super().__init__(
            self._density,
            self._primitive,
            name=f"sobolev({G.name},N={N})",
            params={"kind": "sobolev_conjugate", "base": G.to_config(), "N": N},
            primitive_inverse=self._inverse,
            validate=False,
        )

    def _h(self, sigma):
        sigma = np.asarray(sigma, dtype=float)
        return self.N * np.asarray(self.base.inverse(sigma**self.N)) / sigma**2

    def _inverse(self, t):
        """G_*^{-1}(t) by table lookup plus a partial Gauss panel."""
        t = np.asarray(t, dtype=float)
        sig = t ** (1.0 / self.N)
        flat = sig.ravel()
        out = np.zeros_like(flat)
        pos = flat > 0
        sp = flat[pos]
        k = np.searchsorted(self._edges, sp, side="right") - 1
        below = k < 0
        k = np.clip(k, 0, len(self._edges) - 1)
        a = self._edges[k]
        xg, wg = np.polynomial.legendre.leggauss(12)
        nodes = 0.5 * (sp - a)[:, None] * xg[None, :] + 0.5 * (sp + a)[:, None]
        part = (self._h(np.abs(nodes).ravel()).reshape(nodes.shape) * 0.5 * (sp - a)[:, None] * wg).sum(axis=1)
        val = self._cum[k] + part
        # below the table: power law with the head exponent
        head = self._cum[0] * (np.maximum(sp, 1e-300) / self._edges[0]) ** (self._head_exponent + 1.0)
        out[pos] = np.where(below, head, val)
        return out.reshape(t.shape)

    def _primitive(self, s):
        s = np.asarray(s, dtype=float)
        flat = s.ravel()
        out = np.zeros_like(flat)
        pos = flat > 0
        sp = flat[pos]
        tau = np.exp(self._interp(np.log(sp)))
        # Newton polish on G_*^{-1}(tau) = s
        for _ in range(4):
            with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
                d = np.asarray(self.base.inverse(tau)) * tau ** (-(self.N + 1.0) / self.N)
                step = (self._inverse(tau) - sp) / d
                tau_new = tau - step
            tau = np.where(np.isfinite(tau_new) & (tau_new > 0), tau_new, tau)
        if self.M is not None:
            tau = np.where(sp >= self.M, np.inf, tau)
        out[pos] = tau
        return out.reshape(s.shape)

    def _density(self, s):
        tau = self._primitive(s)
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            d = tau ** ((self.N + 1.0) / self.N) / np.asarray(self.base.inverse(np.where(np.isfinite(tau), tau, 1.0)))
        return np.where(np.asarray(s) > 0, np.where(np.isfinite(tau), d, np.inf), 0.0)


def sobolev_conjugate(G: NFunction, N: int, **kwargs) -> SobolevConjugate:
    """Sobolev conjugate of G in dimension N (extended object when int_1^inf converges)."""
    return SobolevConjugate(G, N, **kwargs)
