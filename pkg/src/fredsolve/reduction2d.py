"""Reduction of boundary problems to integral equations, and the 2D method.

The 1D second-order problem u'' - a u = f with u'(0) = u(1) = 0 reduces to a
Volterra or a Fredholm second-kind equation for psi = u''.  Two-dimensional
problems (membrane, heat) reduce to the first-kind form

    int_0^1 tau1(x, y, xi) psi(xi, y) d xi
  + int_0^1 tau2(x, y, eta) psi(x, eta) d eta = f(x, y),

which the grid-route reformulation solves with y as a parameter: the Poisson
machinery acts in x only, and the second-kind system couples the tensor grid
through kernels N (x-smoothed tau1), M = tau2, and T (the cross block).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (ConfigError, DegenerateProblemError, NoValidMuError,
                     OnSpectrumError, UndefinedDeltaError)
from .grid import (GridFunction, Grid1D, gauss_legendre, interp_matrix,
                   operator_matrix)
from .kernels import kernel_matrix, poisson_h, require_lambda_valid
from .method_core import DEFAULT_MU_CANDIDATES, MethodParams, ResidualReport

__all__ = [
    "Bvp2DReduction",
    "GridFunction2D",
    "Method2DResult",
    "reduce_ode_volterra",
    "reduce_ode_fredholm",
    "reduce_membrane",
    "reduce_heat",
    "forward2d",
    "reconstruct_u",
    "closure_delta",
    "method2d_solve",
    "verify2d",
]

MAX_2D_UNKNOWNS = 4096


@dataclass(frozen=True)
class Bvp2DReduction:
    """Kernels and free term of the reduced 2D first-kind equation."""

    name: str
    tau1: object
    tau2: object
    free_term: object

    def tau1_depends_on_y(self) -> bool:
        probe = [self.tau1(0.37, y, 0.61) for y in (0.21, 0.84)]
        return abs(float(probe[0]) - float(probe[1])) > 1e-14

    def tau2_depends_on_x(self) -> bool:
        probe = [self.tau2(x, 0.37, 0.21) for x in (0.29, 0.73)]
        return abs(float(probe[0]) - float(probe[1])) > 1e-14


@dataclass(frozen=True)
class GridFunction2D:
    """Values on a tensor Gauss grid; values[i, j] pairs x_i with y_j."""

    x_grid: Grid1D
    y_grid: Grid1D
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        if values.shape != (self.x_grid.n, self.y_grid.n):
            raise ConfigError("2D value shape does not match the tensor grid")

    def l2_norm(self) -> float:
        w = self.x_grid.weights[:, None] * self.y_grid.weights[None, :]
        return float(np.sqrt(np.sum(w * self.values * self.values)))


@dataclass(frozen=True)
class Method2DResult:
    psi: GridFunction2D
    psi0: GridFunction2D
    psi1: GridFunction2D
    report: ResidualReport
    mu: float


def _volterra_cumulative(grid: Grid1D) -> np.ndarray:
    # rows of int_0^x (x - xi) g(xi) d xi by product integration
    return operator_matrix(lambda x, xi: x - xi, grid, volterra=True)


def reduce_ode_volterra(a, f, n: int = 64) -> tuple[GridFunction, GridFunction]:
    """Volterra route for u'' - a u = f, u'(0) = u(1) = 0; returns (psi, u)."""
    grid = gauss_legendre(n, 0.0, 1.0)
    kern = lambda x, xi: np.asarray(a(x), dtype=float) * (x - xi)
    V = operator_matrix(kern, grid, volterra=True)
    M = np.eye(grid.n) - V
    av = np.asarray(a(grid.nodes), dtype=float)
    fv = np.asarray(f(grid.nodes), dtype=float)
    psi_f = np.linalg.solve(M, fv)      # response to the load term
    psi_a = np.linalg.solve(M, av)      # response to the c0 a(x) term
    wt = grid.weights * (1.0 - grid.nodes)
    denom = 1.0 + float(wt @ psi_a)
    if abs(denom) <= 1e-10:
        raise DegenerateProblemError(f"constant-of-integration denominator {denom:.3g}")
    c0 = -float(wt @ psi_f) / denom
    psi = psi_f + c0 * psi_a
    u = _volterra_cumulative(grid) @ psi + c0
    return GridFunction(grid, psi), GridFunction(grid, u)


def reduce_ode_fredholm(a, f, n: int = 64) -> tuple[GridFunction, GridFunction]:
    """Fredholm route for the same problem; u is rebuilt without explicit c0."""
    grid = gauss_legendre(n, 0.0, 1.0)

    def kern(x, xi):
        x = np.asarray(x, dtype=float)
        xi = np.asarray(xi, dtype=float)
        return np.asarray(a(x), dtype=float) * np.where(xi <= x, -(1.0 - x), -(1.0 - xi))

    A = operator_matrix(kern, grid, diag_split=True)
    M = np.eye(grid.n) - A
    svals = np.linalg.svd(M, compute_uv=False)
    if svals[-1] <= 1e-10 * svals[0]:
        raise OnSpectrumError(1.0, float(svals[-1]))
    psi = np.linalg.solve(M, np.asarray(f(grid.nodes), dtype=float))
    u = _volterra_cumulative(grid) @ psi - float((grid.weights * (1.0 - grid.nodes)) @ psi)
    return GridFunction(grid, psi), GridFunction(grid, u)


def _tau_membrane_x(x, y, xi):
    x = np.asarray(x, dtype=float)
    xi = np.asarray(xi, dtype=float)
    return (x - xi) * (xi <= x) - x * (1.0 - xi)


def reduce_membrane() -> Bvp2DReduction:
    """Uniformly loaded membrane clamped on the unit square."""
    def tau2(x, y, eta):
        y = np.asarray(y, dtype=float)
        eta = np.asarray(eta, dtype=float)
        return (y - eta) * (eta <= y) - y * (1.0 - eta)

    return Bvp2DReduction(
        name="membrane",
        tau1=lambda x, y, xi: _tau_membrane_x(x, y, xi),
        tau2=tau2,
        free_term=lambda x, y: 0.5 * np.asarray(y, dtype=float) * (1.0 - np.asarray(y, dtype=float))
                               + 0.0 * np.asarray(x, dtype=float),
    )


def reduce_heat(u0) -> Bvp2DReduction:
    """Heat conduction on [0,1] x [0,1] (t as second axis) from initial data u0."""
    edge = max(abs(float(u0(0.0))), abs(float(u0(1.0))))
    if edge > 1e-8:
        raise ConfigError(f"u0 must vanish at both ends; boundary value {edge:.3g}")

    def tau2(x, t, eta):
        t = np.asarray(t, dtype=float)
        eta = np.asarray(eta, dtype=float)
        return -1.0 * (eta <= t) + 0.0 * t

    return Bvp2DReduction(
        name="heat",
        tau1=lambda x, t, xi: _tau_membrane_x(x, t, xi),
        tau2=tau2,
        free_term=lambda x, t: np.asarray(u0(x), dtype=float) + 0.0 * np.asarray(t, dtype=float),
    )


def _x_rows(reduction, y, x_grid: Grid1D, base) -> np.ndarray:
    # product rows of xi -> tau1(x_i, y, xi) with a split at xi = x_i
    t, v = base
    n = x_grid.n
    A = np.zeros((n, n))
    for i, x in enumerate(x_grid.nodes):
        zq, wq = _split(0.0, x, 1.0, t, v)
        vals = np.asarray(reduction.tau1(x, y, zq), dtype=float)
        A[i, :] = (vals * wq) @ interp_matrix(x_grid.nodes, zq)
    return A


def _y_rows(reduction, x, y_grid: Grid1D, base) -> np.ndarray:
    t, v = base
    n = y_grid.n
    A = np.zeros((n, n))
    for j, y in enumerate(y_grid.nodes):
        zq, wq = _split(0.0, y, 1.0, t, v)
        vals = np.asarray(reduction.tau2(x, y, zq), dtype=float)
        A[j, :] = (vals * wq) @ interp_matrix(y_grid.nodes, zq)
    return A


def _split(lo, mid, hi, t, v):
    xs, ws = [], []
    for p, q in ((lo, mid), (mid, hi)):
        if q - p < 1e-14:
            continue
        xs.append(0.5 * (q - p) * t + 0.5 * (p + q))
        ws.append(0.5 * (q - p) * v)
    return np.concatenate(xs), np.concatenate(ws)


def forward2d(reduction: Bvp2DReduction, psi: GridFunction2D,
              quad_order: int = 32) -> GridFunction2D:
    """Left-hand side of the reduced first-kind equation, sampled on psi's grid."""
    gx, gy = psi.x_grid, psi.y_grid
    base = np.polynomial.legendre.leggauss(int(quad_order))
    out = np.zeros((gx.n, gy.n))
    tau1_y = reduction.tau1_depends_on_y()
    tau2_x = reduction.tau2_depends_on_x()
    rows_x = None
    for j, y in enumerate(gy.nodes):
        if rows_x is None or tau1_y:
            rows_x = _x_rows(reduction, y, gx, base)
        out[:, j] += rows_x @ psi.values[:, j]
    rows_y = None
    for i, x in enumerate(gx.nodes):
        if rows_y is None or tau2_x:
            rows_y = _y_rows(reduction, x, gy, base)
        out[i, :] += rows_y @ psi.values[i, :]
    return GridFunction2D(gx, gy, out)


def reconstruct_u(reduction: Bvp2DReduction, psi: GridFunction2D, which: str = "x",
                  boundary_corrected: bool = False, quad_order: int = 32) -> GridFunction2D:
    """Field u from psi via one representation.

    'x' integrates tau1 against psi (vanishes where tau1 does); 'y' uses
    f - the tau2 integral.  Boundary correction subtracts the linear blend of
    the values on the other pair of edges.
    """
    if which not in ("x", "y"):
        raise ConfigError(f"route must be 'x' or 'y', got {which!r}")
    gx, gy = psi.x_grid, psi.y_grid
    base = np.polynomial.legendre.leggauss(int(quad_order))
    vals = np.zeros((gx.n, gy.n))
    if which == "x":
        tau1_y = reduction.tau1_depends_on_y()
        rows = None
        for j, y in enumerate(gy.nodes):
            if rows is None or tau1_y:
                rows = _x_rows(reduction, y, gx, base)
            vals[:, j] = rows @ psi.values[:, j]
        if boundary_corrected:
            vals = vals - _edge_blend_y(reduction, psi, base)
    else:
        tau2_x = reduction.tau2_depends_on_x()
        rows = None
        F = np.asarray(reduction.free_term(gx.nodes[:, None], gy.nodes[None, :]), dtype=float)
        for i, x in enumerate(gx.nodes):
            if rows is None or tau2_x:
                rows = _y_rows(reduction, x, gy, base)
            vals[i, :] = F[i, :] - rows @ psi.values[i, :]
        if boundary_corrected:
            vals = vals - _edge_blend_x(reduction, psi, base)
    return GridFunction2D(gx, gy, vals)


def _edge_blend_y(reduction, psi, base):
    # (1 - y) u(x, 0) + y u(x, 1), edges evaluated from the same representation
    gx, gy = psi.x_grid, psi.y_grid
    Ly = interp_matrix(gy.nodes, np.array([0.0, 1.0]))
    edge = np.zeros((gx.n, 2))
    for col, y in enumerate((0.0, 1.0)):
        rows = _x_rows(reduction, y, gx, base)
        edge[:, col] = rows @ (psi.values @ Ly[col])
    y = gy.nodes[None, :]
    return edge[:, [0]] * (1.0 - y) + edge[:, [1]] * y


def _edge_blend_x(reduction, psi, base):
    gx, gy = psi.x_grid, psi.y_grid
    Lx = interp_matrix(gx.nodes, np.array([0.0, 1.0]))
    F = np.asarray(reduction.free_term(np.array([0.0, 1.0])[:, None], gy.nodes[None, :]),
                   dtype=float)
    edge = np.zeros((2, gy.n))
    for row, x in enumerate((0.0, 1.0)):
        rows = _y_rows(reduction, x, gy, base)
        edge[row, :] = F[row, :] - rows @ (Lx[row] @ psi.values)
    x = gx.nodes[:, None]
    return (1.0 - x) * edge[[0], :] + x * edge[[1], :]


def closure_delta(U1: GridFunction2D, U2: GridFunction2D) -> float:
    """Relative disagreement 2 ||U1 - U2|| / ||U1 + U2|| of the two routes."""
    diff = GridFunction2D(U1.x_grid, U1.y_grid, U1.values - U2.values)
    summ = GridFunction2D(U1.x_grid, U1.y_grid, U1.values + U2.values)
    denom = summ.l2_norm()
    if denom <= 1e-14:
        raise UndefinedDeltaError("both reconstructions vanish; delta undefined")
    return 2.0 * diff.l2_norm() / denom


def method2d_solve(reduction: Bvp2DReduction, params: MethodParams,
                   nx: int = 24, ny: int = 24, mu_candidates=None,
                   verify_threshold: float = 0.05) -> Method2DResult:
    """Grid-route reformulation of the 2D first-kind equation.

    y acts as a parameter: the Poisson smoothing applies along x only.  The
    Nystrom system couples all nx*ny unknowns densely (capped at
    MAX_2D_UNKNOWNS).
    """
    require_lambda_valid(params.poisson, params.min_rel_dist)
    if nx * ny > MAX_2D_UNKNOWNS:
        raise ConfigError(f"{nx}x{ny} exceeds the dense cap of {MAX_2D_UNKNOWNS} unknowns")
    p = params.poisson
    gx = gauss_legendre(nx, 0.0, 1.0)
    gy = gauss_legendre(ny, 0.0, 1.0)
    gm = gauss_legendre(nx, -1.0, 0.0)
    base = np.polynomial.legendre.leggauss(max(24, params.quad_order // 2))
    mrd = params.min_rel_dist
    H_w = kernel_matrix("H", p, gx.nodes, gx.nodes, mrd) * gx.weights[None, :]

    tau1_y = reduction.tau1_depends_on_y()
    tau2_x = reduction.tau2_depends_on_x()
    NN = nx * ny
    A = np.zeros((NN, NN))
    rows_x = None
    for j, y in enumerate(gy.nodes):
        if rows_x is None or tau1_y:
            rows_x = _x_rows(reduction, y, gx, base)
        # N = tau1 + lam * H tau1; discrete composition along x
        N_y = rows_x + p.lam * (H_w @ rows_x)
        idx = np.arange(nx) * ny + j
        A[np.ix_(idx, idx)] += N_y
    rows_y = None
    M_per_x = []
    for i, x in enumerate(gx.nodes):
        if rows_y is None or tau2_x:
            rows_y = _y_rows(reduction, x, gy, base)
        M_per_x.append(rows_y)
        idx = i * ny + np.arange(ny)
        A[np.ix_(idx, idx)] += rows_y
    # cross block T = lam H(x, xi) tau2(xi, y, eta)
    for i in range(nx):
        for k in range(nx):
            A[i * ny:(i + 1) * ny, k * ny:(k + 1) * ny] += p.lam * H_w[i, k] * M_per_x[k]

    mu = params.mu
    eye = np.eye(NN)
    if mu is None:
        candidates = list(DEFAULT_MU_CANDIDATES if mu_candidates is None else mu_candidates)
        for cand in candidates:
            svals = np.linalg.svd(eye - cand * A, compute_uv=False)
            if svals[-1] > 1e-6 * svals[0]:
                mu = float(cand)
                break
        if mu is None:
            raise NoValidMuError(candidates)
    M = eye - mu * A
    svals = np.linalg.svd(M, compute_uv=False)
    if svals[-1] <= 1e-10 * svals[0]:
        raise OnSpectrumError(mu, float(svals[-1]))

    F = np.asarray(reduction.free_term(gx.nodes[:, None], gy.nodes[None, :]), dtype=float)
    F1 = -mu * (F + p.lam * (H_w @ F))
    psi1 = np.linalg.solve(M, F1.reshape(-1)).reshape(nx, ny)
    h_m = poisson_h(gm.nodes[:, None], gx.nodes[None, :], p) * gx.weights[None, :]
    rho = -p.lam * (h_m @ psi1)
    L_mm = kernel_matrix("L", p, gm.nodes, gm.nodes, mrd) * gm.weights[None, :]
    kappa = rho + p.Lambda * (L_mm @ rho)
    H_0m = kernel_matrix("H", p, gx.nodes, gm.nodes, mrd) * gm.weights[None, :]
    F0 = p.lam * (H_0m @ kappa)
    psi0 = np.linalg.solve(M, F0.reshape(-1)).reshape(nx, ny)
    psi = GridFunction2D(gx, gy, psi0 + psi1)
    report = verify2d(reduction, psi, threshold=verify_threshold)
    return Method2DResult(psi=psi,
                          psi0=GridFunction2D(gx, gy, psi0),
                          psi1=GridFunction2D(gx, gy, psi1),
                          report=report, mu=mu)


def verify2d(reduction: Bvp2DReduction, psi: GridFunction2D,
             threshold: float = 0.05, quad_order: int = 32) -> ResidualReport:
    """Substitute psi into the 2D first-kind equation and threshold the residual."""
    lhs = forward2d(reduction, psi, quad_order=quad_order)
    F = np.asarray(reduction.free_term(psi.x_grid.nodes[:, None],
                                       psi.y_grid.nodes[None, :]), dtype=float)
    diff = GridFunction2D(psi.x_grid, psi.y_grid, lhs.values - F)
    residual = diff.l2_norm()
    fnorm = GridFunction2D(psi.x_grid, psi.y_grid, F).l2_norm()
    relative = residual / fnorm if fnorm > 0 else (0.0 if residual == 0.0 else np.inf)
    if relative > threshold:
        verdict = "no"
    elif relative < threshold / 10.0:
        verdict = "yes"
    else:
        verdict = "unknown"
    return ResidualReport(residual_l2=float(residual), relative=float(relative),
                          solvable=verdict, threshold=float(threshold))
