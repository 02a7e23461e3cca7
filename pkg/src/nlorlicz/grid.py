"""Uniform cell-centered grids on bounded 1D/2D domains and grid functions.

Functions carry values on interior nodes only; the complement of the domain
is implicitly zero everywhere (the zero-exterior convention of the nonlocal
Dirichlet problem).  Node ordering is row-major over axis indices: the first
axis is the slowest, so in 2D the y index varies fastest.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ValidationError


@dataclass(frozen=True)
class DomainGrid:
    """Cell-centered discretization of an interval, box, or ball."""

    dim: int
    shape: str  # "interval" | "box" | "ball"
    bounds: tuple  # interval: (a, b); box: (a1, b1, a2, b2); ball: (cx, cy, radius)
    n_per_axis: int
    spacing: float
    nodes: np.ndarray  # (n_nodes, dim), row-major over axis indices

    @property
    def cell_volume(self) -> float:
        return self.spacing ** self.dim

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def center(self) -> np.ndarray:
        if self.shape == "interval":
            a, b = self.bounds
            return np.array([0.5 * (a + b)])
        if self.shape == "box":
            a1, b1, a2, b2 = self.bounds
            return np.array([0.5 * (a1 + b1), 0.5 * (a2 + b2)])
        cx, cy, _ = self.bounds
        return np.array([cx, cy])

    @property
    def volume(self) -> float:
        """Measure of the continuum domain (not of the union of cells)."""
        if self.shape == "interval":
            a, b = self.bounds
            return b - a
        if self.shape == "box":
            a1, b1, a2, b2 = self.bounds
            return (b1 - a1) * (b2 - a2)
        return np.pi * self.bounds[2] ** 2

    @property
    def inradius(self) -> float:
        """sup over the domain of the distance to the complement."""
        if self.shape == "interval":
            a, b = self.bounds
            return 0.5 * (b - a)
        if self.shape == "box":
            a1, b1, a2, b2 = self.bounds
            return 0.5 * min(b1 - a1, b2 - a2)
        return self.bounds[2]

    def __hash__(self):
        return hash((self.dim, self.shape, self.bounds, self.n_per_axis))

    def __eq__(self, other):
        return (
            isinstance(other, DomainGrid)
            and (self.dim, self.shape, self.bounds, self.n_per_axis)
            == (other.dim, other.shape, other.bounds, other.n_per_axis)
        )


@dataclass(frozen=True)
class GridFunction:
    """Real values on the interior nodes of a grid, zero on the complement."""

    grid: DomainGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.n_nodes,):
            raise ValidationError(
                f"value vector has shape {v.shape}, grid has {self.grid.n_nodes} nodes"
            )
        if not np.all(np.isfinite(v)):
            raise ValidationError("grid function carries non-finite values")
        object.__setattr__(self, "values", v)


def make_grid(shape: str, n_per_axis: int, bounds: Optional[tuple] = None) -> DomainGrid:
    """Build a cell-centered grid.

    shape "interval" with bounds (a, b); "box" with (a1, b1, a2, b2);
    "ball" with (cx, cy, radius).  For balls, the nodes are the centers of
    the bounding-box cells that fall inside the ball.
    """
    if n_per_axis < 4:
        raise ValidationError("need at least 4 nodes per axis")
    if shape == "interval":
        a, b = bounds if bounds is not None else (-1.0, 1.0)
        if not b > a:
            raise ValidationError("degenerate interval")
        h = (b - a) / n_per_axis
        xs = a + h * (np.arange(n_per_axis) + 0.5)
        return DomainGrid(
            dim=1,
            shape=shape,
            bounds=(float(a), float(b)),
            n_per_axis=n_per_axis,
            spacing=h,
            nodes=xs.reshape(-1, 1),
        )
    if shape == "box":
        a1, b1, a2, b2 = bounds if bounds is not None else (0.0, 1.0, 0.0, 1.0)
        if not (b1 > a1 and b2 > a2):
            raise ValidationError("degenerate box")
        if abs((b1 - a1) - (b2 - a2)) > 1e-12 * (b1 - a1):
            # one spacing h for both axes keeps the pair-weight table exact
            raise ValidationError("box must be square (uniform spacing on both axes)")
        h = (b1 - a1) / n_per_axis
        x1 = a1 + h * (np.arange(n_per_axis) + 0.5)
        x2 = a2 + h * (np.arange(n_per_axis) + 0.5)
        X1, X2 = np.meshgrid(x1, x2, indexing="ij")
        nodes = np.column_stack([X1.ravel(), X2.ravel()])
        return DomainGrid(
            dim=2,
            shape=shape,
            bounds=(float(a1), float(b1), float(a2), float(b2)),
            n_per_axis=n_per_axis,
            spacing=h,
            nodes=nodes,
        )
    if shape == "ball":
        cx, cy, radius = bounds if bounds is not None else (0.0, 0.0, 1.0)
        if radius <= 0.0:
            raise ValidationError("degenerate ball")
        h = 2.0 * radius / n_per_axis
        x1 = cx - radius + h * (np.arange(n_per_axis) + 0.5)
        x2 = cy - radius + h * (np.arange(n_per_axis) + 0.5)
        X1, X2 = np.meshgrid(x1, x2, indexing="ij")
        nodes = np.column_stack([X1.ravel(), X2.ravel()])
        inside = np.hypot(nodes[:, 0] - cx, nodes[:, 1] - cy) < radius
        return DomainGrid(
            dim=2,
            shape=shape,
            bounds=(float(cx), float(cy), float(radius)),
            n_per_axis=n_per_axis,
            spacing=h,
            nodes=nodes[inside],
        )
    raise ValidationError(f"unknown grid shape {shape!r}")


def decreasing_rearrangement(u: GridFunction) -> GridFunction:
    """Radially nonincreasing rearrangement of |u| on the grid's own nodes.

    Sorts the absolute values in descending order and assigns them to nodes
    ranked by distance from the domain center, ties broken by node index.
    This is an exact rearrangement of the discrete value multiset, not an
    interpolation of the continuum symmetrization.
    """
    g = u.grid
    dist = np.linalg.norm(g.nodes - g.center, axis=1)
    order = np.lexsort((np.arange(g.n_nodes), dist))
    sorted_vals = np.sort(np.abs(u.values))[::-1]
    out = np.empty_like(sorted_vals)
    out[order] = sorted_vals
    return GridFunction(grid=g, values=out)


def bump(grid: DomainGrid, center, radius: float, height: float) -> GridFunction:
    """Smooth compactly supported bump with a raised-cosine profile."""
    center = np.atleast_1d(np.asarray(center, dtype=float))
    r = np.linalg.norm(grid.nodes - center, axis=1)
    vals = np.where(r < radius, height * np.cos(0.5 * np.pi * r / radius) ** 2, 0.0)
    return GridFunction(grid=grid, values=vals)


def random_function(grid: DomainGrid, seed: int, amplitude: float = 1.0) -> GridFunction:
    """Sign-mixed uniform values in [-amplitude, amplitude], PCG64-seeded."""
    rng = np.random.default_rng(seed)
    vals = rng.uniform(-amplitude, amplitude, grid.n_nodes)
    return GridFunction(grid=grid, values=vals)


def indicator_function(grid: DomainGrid, seed: int, fraction: float = 0.3,
                       height: float = 1.0) -> GridFunction:
    """Indicator of a random node subset, for rearrangement and corpus tests."""
    rng = np.random.default_rng(seed)
    k = max(1, int(fraction * grid.n_nodes))
    idx = rng.choice(grid.n_nodes, size=k, replace=False)
    vals = np.zeros(grid.n_nodes)
    vals[idx] = height
    return GridFunction(grid=grid, values=vals)


def to_csv(u: GridFunction) -> str:
    """Serialize in the documented row-major CSV layout."""
    g = u.grid
    header = "x,value" if g.dim == 1 else "x,y,value"
    lines = [header]
    for node, v in zip(g.nodes, u.values):
        coords = ",".join(f"{c:.17g}" for c in node)
        lines.append(f"{coords},{v:.17g}")
    return "\n".join(lines) + "\n"


def from_csv(grid: DomainGrid, text: str) -> GridFunction:
    """Parse the CSV layout written by to_csv against a known grid."""
    lines = [ln for ln in text.strip().splitlines() if ln]
    vals = np.array([float(ln.rsplit(",", 1)[1]) for ln in lines[1:]])
    return GridFunction(grid=grid, values=vals)
