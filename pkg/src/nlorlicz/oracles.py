"""Independent verification routes, kept out of the production solver path.

Dense linear algebra for the quadratic case (direct solve and full
eigendecomposition), a constrained-manifold ground-state computation for the
superlinear problem, and a per-node quadrature consistency check of the
assembled weights.  The acceptance suite diffs solver output against these.
"""

from __future__ import annotations

import numpy as np

from .energy import EnergyAssembly, E_value
from .errors import ValidationError
from .grid import GridFunction, bump, make_grid
from .kernels import lambda_exterior
from .solvers import _descent


def _require_quadratic(asm: EnergyAssembly):
    if not (asm.young.family == "power" and abs(asm.young.p - 2.0) < 1e-12):
        raise ValidationError("dense oracle is defined for the quadratic case only")


def operator_matrix(asm: EnergyAssembly) -> np.ndarray:
    """Matrix of the pointwise operator for the quadratic nonlinearity."""
    _require_quadratic(asm)
    W = asm.weights
    D = np.diag(W.sum(axis=1))
    return 2.0 * ((D - W) / asm.h_pow_dim + np.diag(asm.exterior))


def dense_dirichlet_solve(asm: EnergyAssembly, f: GridFunction) -> GridFunction:
    """Direct dense solve of the linear problem (quadratic case)."""
    M = operator_matrix(asm)
    return GridFunction(asm.grid, np.linalg.solve(M, f.values))


def dense_min_eigenvalue(asm: EnergyAssembly):
    """Smallest eigenvalue/vector of the symmetric quadratic-case operator,
    normalized so the eigenvector has unit modular."""
    _require_quadratic(asm)
    W = asm.weights
    D = np.diag(W.sum(axis=1))
    M = (D - W) / asm.h_pow_dim + np.diag(asm.exterior)
    vals, vecs = np.linalg.eigh(M)
    v = vecs[:, 0]
    v = v * np.sign(v.sum() or 1.0)
    v = v / np.sqrt(np.sum(v * v) * asm.h_pow_dim)
    return float(vals[0]), GridFunction(asm.grid, v)


def nehari_ground_state(asm: EnergyAssembly, m: float, max_iter: int = 4000):
    """Ground-state level of E(v) - sum (v+)^m / m via the scale-invariant
    quotient E(v) / Q(v)^(2/m); quadratic case, m > 2.

    Independent of the path-deformation search: this minimizes over the
    constraint manifold where the radial derivative vanishes."""
    _require_quadratic(asm)
    if m <= 2.0:
        raise ValidationError("ground-state oracle needs a superquadratic exponent")
    hN = asm.h_pow_dim
    g = asm.grid

    def Q(x):
        xp = np.maximum(x, 0.0)
        return float(np.sum(xp ** m)) * hN

    def gradQ(x):
        xp = np.maximum(x, 0.0)
        return m * xp ** (m - 1.0) * hN

    def phi(x):
        q = Q(x)
        if q <= 0.0:
            return float("inf")
        return E_value(asm, GridFunction(g, x)) / q ** (2.0 / m)

    def gradphi(x):
        q = Q(x)
        E = E_value(asm, GridFunction(g, x))
        gE = _quadratic_gradient(asm, x)
        return gE / q ** (2.0 / m) - (2.0 / m) * E * gradQ(x) / q ** (2.0 / m + 1.0)

    x0 = bump(g, g.center, 0.6 * g.inradius, 1.0).values

    def stop(x, grad):
        return float(np.max(np.abs(grad))) <= 1e-11 * (1.0 + abs(phi(x)))

    x, _, _, _ = _descent(phi, gradphi, x0, stop, max_iter)
    phi_min = phi(x)
    level = (1.0 - 2.0 / m) * 2.0 ** (2.0 / (m - 2.0)) * phi_min ** (m / (m - 2.0))
    return level, GridFunction(g, x)


def _quadratic_gradient(asm: EnergyAssembly, x: np.ndarray) -> np.ndarray:
    W = asm.weights
    row = 2.0 * (W.sum(axis=1) * x - W @ x)
    return row + 2.0 * x * asm.exterior * asm.h_pow_dim


def node_mass_consistency(asm: EnergyAssembly, i: int):
    """Total interior weight plus exterior weight at node i against an
    adaptive-quadrature reference (kernel mass outside the node's own cell)."""
    g = asm.grid
    h = g.spacing
    total = float(asm.weights[i].sum()) / asm.h_pow_dim + float(asm.exterior[i])
    node = g.nodes[i]
    if g.dim == 1:
        cell = make_grid("interval", 4, (node[0] - h / 2, node[0] + h / 2))
    else:
        cell = make_grid(
            "box", 4, (node[0] - h / 2, node[0] + h / 2, node[1] - h / 2, node[1] + h / 2)
        )
    reference = lambda_exterior(asm.kernel, cell, node)
    return total, reference
