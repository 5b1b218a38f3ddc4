"""Generic second-kind Fredholm/Volterra solvers on Gauss grids.

Dense Nystrom discretization throughout: psi = mu * A psi + F becomes
(I - mu A) psi = F with A the quadrature matrix of the kernel.  Kernels with
a diagonal kink get the product-integration assembly from ``grid``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, ContractionError, OnSpectrumError
from .grid import Grid1D, GridFunction, operator_matrix

__all__ = [
    "SecondKindSystem",
    "SpectrumEstimate",
    "solve_direct",
    "neumann_iterate",
    "estimate_spectrum",
    "deflate_on_spectrum",
    "solve_volterra2",
]

# relative smallest-singular-value threshold separating spectrum hits from
# conditioning noise at desk-scale n
ON_SPECTRUM_RTOL = 1e-10


@dataclass(frozen=True)
class SecondKindSystem:
    """psi = mu * int K(x, xi) psi(xi) d xi + F(x) on a fixed grid.

    ``diag_split`` marks kernels with a kink at xi = x so the assembly splits
    the quadrature there.
    """

    kernel: object
    free_term: object
    mu: float
    grid: Grid1D
    diag_split: bool = False

    def matrix(self) -> np.ndarray:
        return operator_matrix(self.kernel, self.grid, diag_split=self.diag_split)

    def rhs(self) -> np.ndarray:
        return np.asarray(self.free_term(self.grid.nodes), dtype=float)


@dataclass(frozen=True)
class SpectrumEstimate:
    """Leading characteristic numbers and L2-normalized grid eigenfunctions."""

    char_numbers: np.ndarray
    eigenfunctions: list = field(default_factory=list)


def solve_direct(system: SecondKindSystem, matrix: np.ndarray | None = None) -> GridFunction:
    """Dense solve of the Nystrom system (I - mu A) psi = F.

    Raises OnSpectrumError when the smallest singular value of I - mu A
    drops below ON_SPECTRUM_RTOL times its norm.
    """
    A = system.matrix() if matrix is None else matrix
    M = np.eye(system.grid.n) - system.mu * A
    svals = np.linalg.svd(M, compute_uv=False)
    if svals[-1] <= ON_SPECTRUM_RTOL * svals[0]:
        raise OnSpectrumError(system.mu, float(svals[-1]))
    return GridFunction(system.grid, np.linalg.solve(M, system.rhs()))


def neumann_iterate(system: SecondKindSystem, max_iter: int = 1000,
                    tol: float = 1e-12) -> GridFunction:
    """Simple iteration psi <- mu A psi + F; requires |mu| * c1 < 1.

    c1^2 is the L2(0,1)^2 norm of the kernel, measured by quadrature on the
    system grid.
    """
    g = system.grid
    K = np.asarray(system.kernel(g.nodes[:, None], g.nodes[None, :]), dtype=float)
    c1 = float(np.sqrt(np.sum(g.weights[:, None] * g.weights[None, :] * K * K)))
    if abs(system.mu) * c1 >= 1.0:
        raise ContractionError(system.mu, c1)
    A = system.matrix()
    F = system.rhs()
    psi = F.copy()
    for _ in range(max_iter):
        nxt = system.mu * (A @ psi) + F
        if g.l2_norm(nxt - psi) <= tol:
            return GridFunction(g, nxt)
        psi = nxt
    return GridFunction(g, psi)


def estimate_spectrum(kernel, grid: Grid1D, count: int,
                      diag_split: bool = True) -> SpectrumEstimate:
    """Leading characteristic numbers/eigenfunctions of a symmetric kernel.

    Works on the weight-symmetrized Nystrom matrix; eigenfunctions come back
    L2-normalized on the grid, ordered by ascending |characteristic number|.
    """
    xs, ws = grid.nodes, grid.weights
    K = np.asarray(kernel(xs[:, None], xs[None, :]), dtype=float)
    asym = float(np.max(np.abs(K - K.T)))
    if asym > 1e-8:
        raise ConfigError(f"kernel asymmetry {asym:.3g} exceeds 1e-8")
    sw = np.sqrt(ws)
    A = operator_matrix(kernel, grid, diag_split=diag_split)
    S = sw[:, None] * A / sw[None, :]
    S = 0.5 * (S + S.T)  # assembly asymmetry is at rounding level
    evals, evecs = np.linalg.eigh(S)
    order = np.argsort(np.abs(evals))[::-1]
    evals, evecs = evals[order], evecs[:, order]
    count = min(int(count), grid.n)
    keep = [i for i in range(count) if abs(evals[i]) > 1e-14 * abs(evals[0])]
    char_numbers = np.array([1.0 / evals[i] for i in keep])
    funcs = []
    for i in keep:
        v = evecs[:, i] / sw
        v /= grid.l2_norm(v)
        if v[np.argmax(np.abs(v))] < 0:  # deterministic sign
            v = -v
        funcs.append(GridFunction(grid, v))
    return SpectrumEstimate(char_numbers=char_numbers, eigenfunctions=funcs)


def deflate_on_spectrum(f: GridFunction, eig: GridFunction) -> GridFunction:
    """Remove the eig-component of f: f - eig * <f, eig>.

    Stabilizes second-kind solves whose parameter sits on the spectrum; eig
    must be L2-normalized on its grid.
    """
    norm = eig.l2_norm()
    if abs(norm - 1.0) > 1e-8:
        raise ConfigError(f"eigenfunction not normalized (norm {norm:.12g})")
    coeff = float(np.sum(f.grid.weights * f.values * eig.values))
    return GridFunction(f.grid, f.values - coeff * eig.values)


def solve_volterra2(kernel, f, grid: Grid1D) -> GridFunction:
    """Second-kind Volterra solve: psi(x) = int_a^x kernel(x, xi) psi(xi) d xi + f(x).

    The kernel is taken as zero for xi > x; assembly uses product integration
    so the truncated upper limit costs no accuracy.
    """
    V = operator_matrix(kernel, grid, volterra=True)
    fv = np.asarray(f(grid.nodes), dtype=float) if callable(f) else np.asarray(f, dtype=float)
    return GridFunction(grid, np.linalg.solve(np.eye(grid.n) - V, fv))
