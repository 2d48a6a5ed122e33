"""Command line interface: ``orlicz-kit {conjugate,check,norm,solve}``.

Results go to stdout (or ``--out``) as JSON or CSV; short human summaries go
to stderr.  Exit codes: 0 success, 1 failed check or refused problem,
2 bad input or configuration.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import modular, nfunction, pde
from .grid import Grid, GridFunction

SUITES = ("young", "sandwich", "holder", "poincare", "delta2", "indices")


class ConfigError(ValueError):
    pass


def _clean(obj):
    """Make a structure JSON-safe: non-finite floats become strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isfinite(x):
            return x
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    return obj


def _dump(obj) -> str:
    return json.dumps(_clean(obj), indent=2) + "\n"


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _gspec(text: str) -> nfunction.NFunction:
    try:
        if text.strip().startswith("{"):
            return nfunction.from_config(json.loads(text))
        return nfunction.parse_gspec(text)
    except (ValueError, KeyError, TypeError, json.JSONDecodeError) as exc:
        raise ConfigError(f"bad N-function spec {text!r}: {exc}") from None


def _load_function(path: str) -> GridFunction:
    try:
        if path.endswith(".json"):
            return GridFunction.from_json(path)
        return GridFunction.from_csv(path)
    except (OSError, ValueError, KeyError) as exc:
        raise ConfigError(f"cannot read grid function {path!r}: {exc}") from None


# -- conjugate --------------------------------------------------------------


def cmd_conjugate(args) -> int:
    G = _gspec(args.g)
    try:
        a, b = (float(x) for x in args.range.split(":"))
    except ValueError:
        raise ConfigError(f"bad range {args.range!r}; expected a:b") from None
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["s", "conjugate"])
    n = 0 if (b < a or args.n <= 0) else args.n
    if n:
        if a < 0:
            raise ConfigError("range must lie in [0, inf)")
        s = np.linspace(a, b, n)
        vals = G.conjugate()(s)
        for x, y in zip(s, np.atleast_1d(vals)):
            w.writerow([repr(float(x)), repr(float(y))])
    _emit(buf.getvalue(), args.out)
    print(f"conjugate of {G.name}: {n} rows", file=sys.stderr)
    return 0


# -- check ------------------------------------------------------------------------


def _random_functions(grid, rng, count, dirichlet=False):
    out = []
    coords = grid.coordinates()
    for _ in range(count):
        if dirichlet:
            bump = np.ones(grid.shape)
            for x, (a, b) in zip(coords, grid.bounds):
                bump = bump * np.sin(np.pi * (x - a) / (b - a)) ** rng.integers(1, 4)
            vals = bump * rng.uniform(0.2, 3.0) * (1 + 0.3 * rng.standard_normal(grid.shape))
            vals[grid.boundary_mask] = 0.0
        else:
            vals = rng.standard_normal(grid.shape) * rng.uniform(0.1, 3.0)
        out.append(GridFunction(grid, vals))
    return out


def _suite_young(G, args, rng):
    Gs = G.conjugate()
    a = np.linspace(0, 20, 100)
    A, B = np.meshgrid(a, a, indexing="ij")
    gap = nfunction.young_gap(G, A, B, Gs)
    ga = G.g(a)
    eq = nfunction.young_gap(G, a, ga, Gs)
    scale = np.maximum(1.0, a * ga)
    return [
        {"name": "gap_nonnegative", "min_gap": float(np.min(gap)), "pass": bool(np.min(gap) >= -1e-9)},
        {"name": "equality_at_density", "max_rel_gap": float(np.max(np.abs(eq) / scale)),
         "pass": bool(np.all(np.abs(eq) <= 1e-6 * scale))},
    ]


def _inputs(args, grid_default, rng, count, dirichlet=False):
    if args.input:
        return [_load_function(args.input)]
    return _random_functions(grid_default, rng, count, dirichlet)


def _suite_sandwich(G, args, rng):
    res = []
    for u in _inputs(args, Grid([(0, 1), (0, 1)], 17), rng, 20):
        lux, orl = modular.luxemburg_norm(u, G), modular.orlicz_norm(u, G)
        res.append({"name": "sandwich", "luxemburg": lux, "orlicz": orl,
                    "pass": bool(lux <= orl + args.tol and orl <= 2 * lux + args.tol)})
    return res


def _suite_holder(G, args, rng):
    res = []
    us = _inputs(args, Grid([(0, 1), (0, 1)], 17), rng, 20)
    for u in us:
        v = _load_function(args.input_v) if args.input_v else _random_functions(u.grid, rng, 1)[0]
        rep = modular.holder_check(u, v, G, atol=args.tol)
        res.append({"name": "holder", "lhs": rep["lhs"], "rhs_variants": rep["rhs_variants"], "pass": rep["pass"]})
    return res


def _suite_poincare(G, args, rng):
    res = []
    for u in _inputs(args, Grid([(0, 1), (0, 1)], 17), rng, 20, dirichlet=True):
        try:
            rep = modular.poincare_check(u, G, atol=args.tol)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        res.append({"name": "poincare", "lhs": rep["lhs"], "rhs": rep["rhs"], "d": rep["d"], "pass": rep["pass"]})
    return res


def _suite_delta2(G, args, rng):
    rep = nfunction.delta2_check(G, probe_range=(args.t_min, args.t_max))
    t = np.geomspace(args.t_min, args.t_max, 256)
    consistent = True
    if rep.satisfied:
        tt = t[t >= rep.T]
        consistent = bool(np.all(G(2 * tt) <= rep.k * G(tt) * (1 + 1e-12)) and rep.k > 2)
    out = rep.to_dict()
    out.update(name="delta2_certificate", verdict="satisfied" if rep.satisfied else "not_satisfied",
               **{"pass": consistent})
    return [out]


def _suite_indices(G, args, rng):
    spec = pde.ProblemSpec(Phi=G, p=1.0, q=1.0, grid=Grid([(0, 1), (0, 1)], 17), lam=0.0)
    res = []
    for u in _random_functions(spec.grid, rng, 10, dirichlet=True):
        base = pde.norm_modular_bounds(spec, u)["norm"]
        for target in (0.5, 2.0):
            rep = pde.norm_modular_bounds(spec, u * (target / base))
            res.append({"name": f"chain_norm_{target:g}", **rep, "pass": bool(rep["holds"])})
    return res


def cmd_check(args) -> int:
    G = _gspec(args.g)
    rng = np.random.default_rng(args.seed)
    suite = {
        "young": _suite_young,
        "sandwich": _suite_sandwich,
        "holder": _suite_holder,
        "poincare": _suite_poincare,
        "delta2": _suite_delta2,
        "indices": _suite_indices,
    }[args.suite]
    results = suite(G, args, rng)
    ok = all(r["pass"] for r in results)
    _emit(_dump({"suite": args.suite, "g": G.to_config(), "pass": ok, "assertions": results}), args.out)
    print(f"check {args.suite} on {G.name}: {'pass' if ok else 'FAIL'} ({len(results)} assertions)",
          file=sys.stderr)
    return 0 if ok else 1


# -- norm ----------------------------------------------------------------------------


def cmd_norm(args) -> int:
    G = _gspec(args.g)
    u = _load_function(args.input)
    out = {}
    if args.which in ("luxemburg", "both"):
        val, info = modular.luxemburg_norm(u, G, info=True)
        out["luxemburg"] = {"norm_value": val, "iterations": info["iterations"], "residual": info["residual"]}
    if args.which in ("orlicz", "both"):
        val, info = modular.orlicz_norm(u, G, info=True)
        out["orlicz"] = {"norm_value": val, "iterations": info["iterations"], "residual": info["residual"]}
    if args.which != "both":
        out = out[args.which]
    _emit(_dump(out), args.out)
    print(f"norm ({args.which}) of {args.input} for {G.name}", file=sys.stderr)
    return 0


# -- solve ------------------------------------------------------------------------------


_SOLVER_KEYS = ("eps_a", "tol_res", "max_iter", "armijo_c1", "backtrack", "path_nodes",
                "reparam_every", "max_sweeps", "newton_maxiter", "retries", "noise",
                "separation_tol", "seed")


def spec_from_config(cfg: dict, seed=None, tol=None) -> pde.ProblemSpec:
    """Build a ProblemSpec from a problem.json document (schema 1)."""
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    if cfg.get("schema") != 1:
        raise ConfigError("config needs \"schema\": 1")
    try:
        Phi = nfunction.from_config(cfg.get("Phi", {"kind": "power", "alpha": 1.8}))
        g = cfg.get("grid", {"bounds": [[0, 1], [0, 1]], "nodes": [33, 33]})
        grid = Grid(g["bounds"], g["nodes"])
        kw = {k: cfg["solver"][k] for k in _SOLVER_KEYS if k in cfg.get("solver", {})}
        lam = cfg.get("lambda")
        spec = pde.ProblemSpec(
            Phi=Phi, p=float(cfg.get("p", 1.5)), q=float(cfg.get("q", 1.2)), grid=grid,
            lam=None if lam is None else float(lam), lam_factor=float(cfg.get("lambda_factor", 2.0)), **kw)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid problem config: {exc}") from None
    if seed is not None:
        spec.seed = int(seed)
    if tol is not None:
        spec.tol_res = float(tol)
    return spec


def cmd_solve(args) -> int:
    try:
        with open(args.config) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    spec = spec_from_config(cfg, args.seed, args.tol)
    try:
        rep = pde.solve_two_solutions(spec, force=args.force, estimate_lambda_1=args.lambda_1)
    except (pde.GeometryError, pde.HypothesisError) as exc:
        _emit(_dump({"schema": 1, "status": "refused", "reason": str(exc)}), args.out)
        print(f"solve refused: {exc}", file=sys.stderr)
        return 1
    doc = {"status": "ok", **rep.to_dict()}
    _emit(_dump(doc), args.out)
    if args.path_csv:
        with open(args.path_csv, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["sweep", "node_index", "J_energy"])
            for s, row in enumerate(rep.path_snapshot):
                for k, e in enumerate(row):
                    w.writerow([s, k, repr(float(e))])
    print(
        f"lambda={rep.lam:.6g}  I(u1)={rep.I_u1:.6g}  I(u2)={rep.I_u2:.6g}  "
        f"residuals=({rep.grad_residuals['u1']:.2e}, {rep.grad_residuals['u2']:.2e})",
        file=sys.stderr,
    )
    return 0


# -- entry point -------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="orlicz-kit", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
        p.add_argument("--tol", type=float, default=None, help="tolerance override")
        p.add_argument("--out", default=None, help="output file (default stdout)")

    p = sub.add_parser("conjugate", help="tabulate the Young conjugate as CSV")
    p.add_argument("--g", required=True, help="N-function, e.g. power:2 or exp_minus")
    p.add_argument("--range", default="0:10", help="sample range a:b (empty when b < a)")
    p.add_argument("--n", type=int, default=101, help="number of samples")
    common(p)
    p.set_defaults(func=cmd_conjugate)

    p = sub.add_parser("check", help="run a property suite and report pass/fail JSON")
    p.add_argument("suite", choices=SUITES)
    p.add_argument("--g", required=True)
    p.add_argument("--input", default=None, help="grid function (CSV or JSON)")
    p.add_argument("--input-v", default=None, help="second grid function for holder")
    p.add_argument("--t-min", type=float, default=1.0)
    p.add_argument("--t-max", type=float, default=100.0)
    common(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("norm", help="Luxemburg and/or Orlicz norm of a grid function")
    p.add_argument("--g", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--which", choices=("luxemburg", "orlicz", "both"), default="both")
    common(p)
    p.set_defaults(func=cmd_norm)

    p = sub.add_parser("solve", help="two-solution experiment from a problem.json")
    p.add_argument("--config", required=True)
    p.add_argument("--path-csv", default=None)
    p.add_argument("--force", action="store_true", help="run even if the index hypotheses fail")
    p.add_argument("--lambda-1", action="store_true", help="also estimate lambda_1")
    common(p)
    p.set_defaults(func=cmd_solve)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "tol", None) is None and args.command == "check":
        args.tol = 1e-8
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
