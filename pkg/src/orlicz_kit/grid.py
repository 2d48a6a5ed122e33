"""Uniform grids on intervals and rectangles, and functions sampled on them."""

from __future__ import annotations

import csv
import json
import math

import numpy as np

__all__ = [
    "Grid",
    "GridFunction",
    "integrate",
    "inner",
    "gradient_components",
    "gradient_magnitude",
    "positive_part",
    "negative_part",
    "indicator",
]


class Grid:
    """Uniform tensor grid on an interval (dim 1) or a rectangle (dim 2).

    Parameters
    ----------
    bounds : sequence of (a, b)
        One pair per axis.
    nodes : int or sequence of int
        Number of nodes per axis, boundary nodes included.

    Attributes
    ----------
    h : tuple of float
        Spacing per axis.
    weights : ndarray
        Tensor-product trapezoid weights, shaped like the node array.
    boundary_mask : ndarray of bool
        True on the outermost layer of nodes.
    """

    def __init__(self, bounds, nodes):
        bounds = [tuple(map(float, b)) for b in bounds]
        if len(bounds) not in (1, 2):
            raise ValueError("only 1D and 2D grids are supported")
        if np.isscalar(nodes):
            nodes = [int(nodes)] * len(bounds)
        nodes = [int(n) for n in nodes]
        if len(nodes) != len(bounds):
            raise ValueError("one node count per axis")
        if any(n < 2 for n in nodes) or any(b <= a for a, b in bounds):
            raise ValueError("each axis needs at least 2 nodes and a < b")
        self.dim = len(bounds)
        self.bounds = tuple(bounds)
        self.nodes = tuple(nodes)
        self.shape = tuple(nodes)
        self.h = tuple((b - a) / (n - 1) for (a, b), n in zip(bounds, nodes))
        self.axes = tuple(np.linspace(a, b, n) for (a, b), n in zip(bounds, nodes))

        w1 = []
        for n, h in zip(nodes, self.h):
            w = np.full(n, h)
            w[0] = w[-1] = h / 2
            w1.append(w)
        self.weights = w1[0] if self.dim == 1 else np.outer(w1[0], w1[1])
        self.weights.setflags(write=False)

        mask = np.ones(self.shape, dtype=bool)
        mask[(slice(1, -1),) * self.dim] = False
        self.boundary_mask = mask
        self.boundary_mask.setflags(write=False)

    @classmethod
    def unit(cls, dim=1, n=33):
        return cls([(0.0, 1.0)] * dim, n)

    @property
    def size(self):
        return int(np.prod(self.shape))

    @property
    def interior_mask(self):
        return ~self.boundary_mask

    @property
    def measure(self):
        return float(np.prod([b - a for a, b in self.bounds]))

    @property
    def diam(self):
        return math.sqrt(sum((b - a) ** 2 for a, b in self.bounds))

    def coordinates(self):
        """Node coordinate arrays, one per axis, shaped like the grid."""
        if self.dim == 1:
            return (self.axes[0].copy(),)
        return tuple(np.meshgrid(*self.axes, indexing="ij"))

    def sample(self, f) -> "GridFunction":
        """GridFunction with values f(x) or f(x, y) at the nodes."""
        return GridFunction(self, np.broadcast_to(f(*self.coordinates()), self.shape))

    def zeros(self) -> "GridFunction":
        return GridFunction(self, np.zeros(self.shape))

    def to_dict(self):
        return {"dim": self.dim, "bounds": [list(b) for b in self.bounds], "nodes": list(self.nodes)}

    @classmethod
    def from_dict(cls, d):
        return cls(d["bounds"], d["nodes"])

    def __eq__(self, other):
        return isinstance(other, Grid) and self.bounds == other.bounds and self.nodes == other.nodes

    def __hash__(self):
        return hash((self.bounds, self.nodes))

    def __repr__(self):
        return f"Grid(bounds={list(self.bounds)}, nodes={list(self.nodes)})"


class GridFunction:
    """Real values sampled at the nodes of a :class:`Grid`.

    ``weights`` optionally overrides the grid quadrature weights; it is used
    for indicators of unions of whole cells, whose measure must be exact.
    """

    def __init__(self, grid: Grid, values, weights=None):
        values = np.array(values, dtype=float)
        if values.size != grid.size:
            raise ValueError(f"expected {grid.size} values, got {values.size}")
        values = values.reshape(grid.shape)
        if not np.all(np.isfinite(values)):
            raise ValueError("grid function values must be finite")
        self.grid = grid
        self.values = values
        if weights is None:
            self.weights = grid.weights
        else:
            weights = np.asarray(weights, dtype=float).reshape(grid.shape)
            if np.any(weights < 0):
                raise ValueError("weights must be nonnegative")
            self.weights = weights

    def _like(self, values):
        return GridFunction(self.grid, values, None if self.weights is self.grid.weights else self.weights)

    def _other(self, other):
        if isinstance(other, GridFunction):
            if other.grid != self.grid:
                raise ValueError("grid functions live on different grids")
            return other.values
        return other

    def __add__(self, other):
        return self._like(self.values + self._other(other))

    __radd__ = __add__

    def __sub__(self, other):
        return self._like(self.values - self._other(other))

    def __rsub__(self, other):
        return self._like(self._other(other) - self.values)

    def __mul__(self, other):
        return self._like(self.values * self._other(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self._like(self.values / self._other(other))

    def __neg__(self):
        return self._like(-self.values)

    def __abs__(self):
        return self._like(np.abs(self.values))

    def copy(self):
        return self._like(self.values.copy())

    def max_abs(self):
        return float(np.max(np.abs(self.values)))

    def is_dirichlet(self, tol: float = 0.0) -> bool:
        return bool(np.all(np.abs(self.values[self.grid.boundary_mask]) <= tol))

    def to_dict(self):
        return {"grid": self.grid.to_dict(), "values": self.values.ravel().tolist()}

    @classmethod
    def from_dict(cls, d):
        return cls(Grid.from_dict(d["grid"]), d["values"])

    def to_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh)

    @classmethod
    def from_json(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_csv(self, path):
        """Write one row per node: coordinates then value, row-major order."""
        coords = [c.ravel() for c in self.grid.coordinates()]
        names = ["x", "y"][: self.grid.dim]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(names + ["value"])
            for row in zip(*coords, self.values.ravel()):
                w.writerow([repr(float(v)) for v in row])

    @classmethod
    def from_csv(cls, path):
        """Read a CSV written by :meth:`to_csv`; the grid is inferred from the coordinates."""
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        if data.shape[1] not in (2, 3):
            raise ValueError("CSV must have columns x[,y],value")
        dim = data.shape[1] - 1
        axes = [np.unique(data[:, k]) for k in range(dim)]
        grid = Grid([(a[0], a[-1]) for a in axes], [len(a) for a in axes])
        if len(data) != grid.size:
            raise ValueError("CSV nodes do not form a full tensor grid")
        idx = [np.searchsorted(a, data[:, k]) for k, a in enumerate(axes)]
        values = np.zeros(grid.shape)
        values[tuple(idx)] = data[:, -1]
        return cls(grid, values)

    def __repr__(self):
        return f"GridFunction({self.grid!r})"


def integrate(f: GridFunction, g: GridFunction | None = None) -> float:
    """Quadrature sum of w_i f_i (or of w_i f_i g_i when ``g`` is given)."""
    vals = f.values if g is None else f.values * f._other(g)
    return float(np.sum((f.weights * vals).ravel()))


def inner(f: GridFunction, g: GridFunction) -> float:
    return integrate(f, g)


def gradient_components(u: GridFunction):
    """Finite-difference partial derivatives, central inside and one-sided at the boundary."""
    if min(u.grid.shape) < 3:
        raise ValueError("gradient needs at least 3 nodes per axis")
    if u.grid.dim == 1:
        return (np.gradient(u.values, u.grid.h[0], edge_order=1),)
    return tuple(np.gradient(u.values, *u.grid.h, edge_order=1))


def gradient_magnitude(u: GridFunction) -> GridFunction:
    """Node-wise Euclidean norm of the finite-difference gradient."""
    comps = gradient_components(u)
    return GridFunction(u.grid, np.sqrt(sum(c**2 for c in comps)))


def positive_part(u: GridFunction) -> GridFunction:
    return u._like(np.maximum(u.values, 0.0))


def negative_part(u: GridFunction) -> GridFunction:
    return u._like(np.maximum(-u.values, 0.0))


def indicator(grid: Grid, lower, upper) -> GridFunction:
    """Indicator of a box E made of whole grid cells.

    The returned function carries weights for which the quadrature of any
    node-wise transform F(chi_E) with F(0) = 0 equals mes(E) F(1) exactly.
    The share of the cells outside E owned by nodes on the edge of E is
    dropped, which is harmless for modulars.  Box corners are snapped to
    the nearest nodes.
    """
    lower = np.atleast_1d(np.asarray(lower, dtype=float))
    upper = np.atleast_1d(np.asarray(upper, dtype=float))
    idx_lo = [int(round((lo - a) / h)) for lo, (a, _), h in zip(lower, grid.bounds, grid.h)]
    idx_hi = [int(round((hi - a) / h)) for hi, (a, _), h in zip(upper, grid.bounds, grid.h)]
    if any(hi <= lo for lo, hi in zip(idx_lo, idx_hi)):
        raise ValueError("box must contain at least one cell")
    inside = np.zeros(grid.shape, dtype=bool)
    inside[tuple(slice(lo, hi + 1) for lo, hi in zip(idx_lo, idx_hi))] = True

    # cell-exact weights: each node collects a share of the cells around it
    # according to whether the cell lies in E
    cells = np.zeros(tuple(n - 1 for n in grid.shape), dtype=bool)
    cells[tuple(slice(lo, hi) for lo, hi in zip(idx_lo, idx_hi))] = True
    cell_vol = float(np.prod(grid.h))
    share = cell_vol / 2**grid.dim
    w_in = np.zeros(grid.shape)
    w_out = np.zeros(grid.shape)
    for corner in np.ndindex(*(2,) * grid.dim):
        sl = tuple(slice(c, c + n - 1) for c, n in zip(corner, grid.shape))
        w_in[sl] += share * cells
        w_out[sl] += share * ~cells
    # nodes of E take the E-cell share; nodes outside take the rest
    weights = np.where(inside, w_in, w_out)
    return GridFunction(grid, inside.astype(float), weights)
