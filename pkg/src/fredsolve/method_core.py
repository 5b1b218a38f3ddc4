"""Second-kind reformulation of the first-kind problem.

Two routes are provided.  The grid route (``method_v2``) runs the chain

    K  = k + lam * int_0^1 H(x, z) k(z, xi) dz
    F1 = -mu [f + lam * int_0^1 H f]
    psi1 solves  psi = mu * int K psi + F1          on [0, 1]
    rho(x)   = -lam * int_0^1 h(x, xi) psi1(xi) d xi     on [-1, 0)
    kappa    = rho + Lambda * int_-1^0 L(x, xi) rho(xi) d xi
    F0(x)    = lam * int_-1^0 H(x, xi) kappa(xi) d xi    on [0, 1]
    psi0 solves  psi = mu * int K psi + F0          (same K, same mu)
    psi = psi0 + psi1

The Fourier route (``method_v1``) works at the r -> 1 limit entirely in
trigonometric coefficients: a (2N+1) x (2N+1) linear system for the
coefficients of psi1, then closed-form multipliers to the coefficients of
psi.  Reconstruction quality of either route is an empirical question;
``verify_solution`` measures it by substituting the output back into the
first-kind equation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, NoValidMuError, ParameterExclusionError
from .fredholm2 import SecondKindSystem, solve_direct
from .grid import (FourierCoeffs, GridFunction, Grid1D, KernelFourierCoeffs,
                   apply_operator, fourier_coeffs, gauss_legendre,
                   kernel_fourier_coeffs, operator_matrix)
from .kernels import (PoissonParams, kernel_matrix, poisson_h,
                      require_lambda_valid)
from .problems import FirstKindProblem

__all__ = [
    "MethodParams",
    "PipelineState",
    "FourierState",
    "ResidualReport",
    "DEFAULT_MU_CANDIDATES",
    "select_mu",
    "build_K",
    "build_F1",
    "solve_psi1",
    "build_rho",
    "build_kappa",
    "build_F0",
    "method_v2",
    "method_v2_single",
    "method_v1",
    "verify_solution",
]

DEFAULT_MU_CANDIDATES = (0.05, 0.1, 0.2, -0.1, 0.5)

# select_mu keeps a wider margin than solve_direct's hard singularity gate
_MU_PROBE_RTOL = 1e-6


@dataclass(frozen=True)
class MethodParams:
    """Reformulation parameters: Poisson pair (r, lambda), mu, and grid sizes."""

    poisson: PoissonParams
    mu: float | None = None
    quad_order: int = 64
    n_out: int = 64
    min_rel_dist: float = 1e-3

    @classmethod
    def create(cls, r: float = 0.5, lam: float = 0.2, mu: float | None = None,
               quad_order: int = 64, n_out: int = 64,
               min_rel_dist: float = 1e-3) -> "MethodParams":
        poisson = PoissonParams.create(r=r, lam=lam)
        require_lambda_valid(poisson, min_rel_dist)
        return cls(poisson=poisson, mu=mu, quad_order=quad_order, n_out=n_out,
                   min_rel_dist=min_rel_dist)


@dataclass(frozen=True)
class PipelineState:
    """Intermediates of a grid-route run; psi = psi0 + psi1 holds exactly."""

    psi1: GridFunction
    rho: GridFunction
    kappa: GridFunction
    F0: GridFunction
    F1: GridFunction
    psi0: GridFunction
    psi: GridFunction
    residual_l2: float
    relative_residual: float
    mu: float
    reconstruction_error: float | None = None


@dataclass(frozen=True)
class FourierState:
    """Fourier-route output: coefficient sets of f, k, psi1, phi1', psi."""

    c: FourierCoeffs
    p: KernelFourierCoeffs
    s: FourierCoeffs
    a: FourierCoeffs
    t: FourierCoeffs
    sigma: float

    def evaluate(self, x):
        return self.t.evaluate(x)


@dataclass(frozen=True)
class ResidualReport:
    """Solvability verdict from substituting a candidate back into A psi = f."""

    residual_l2: float
    relative: float
    solvable: str
    threshold: float


class _Workspace:
    """Grids and dense operator blocks shared by the pipeline stages."""

    def __init__(self, problem: FirstKindProblem, params: MethodParams):
        require_lambda_valid(params.poisson, params.min_rel_dist)
        p = params.poisson
        self.problem = problem
        self.params = params
        self.grid01 = gauss_legendre(params.n_out, 0.0, 1.0)
        self.gridm = gauss_legendre(params.n_out, -1.0, 0.0)
        xs, xm = self.grid01.nodes, self.gridm.nodes
        self.A_k = operator_matrix(problem.kernel, self.grid01,
                                   diag_split=problem.diag_split,
                                   quad_order=params.quad_order)
        mrd = params.min_rel_dist
        self.H_w = kernel_matrix("H", p, xs, xs, mrd) * self.grid01.weights[None, :]
        # discrete composition of K = k + lam * H k; exact in the grid algebra
        self.A_K = self.A_k + p.lam * (self.H_w @ self.A_k)
        self.h_m01_w = poisson_h(xm[:, None], xs[None, :], p) * self.grid01.weights[None, :]
        self.L_mm_w = kernel_matrix("L", p, xm, xm, mrd) * self.gridm.weights[None, :]
        self.H_01m_w = kernel_matrix("H", p, xs, xm, mrd) * self.gridm.weights[None, :]

    def f_values(self) -> np.ndarray:
        return np.asarray(self.problem.free_term(self.grid01.nodes), dtype=float)

    def second_kind(self, mu: float, free_values: np.ndarray):
        system = SecondKindSystem(kernel=None, free_term=lambda x: free_values,
                                  mu=mu, grid=self.grid01)
        return solve_direct(system, matrix=self.A_K)


def select_mu(problem: FirstKindProblem, params: MethodParams, candidates=None) -> float:
    """First candidate for which I - mu A_K stays comfortably nonsingular."""
    candidates = list(DEFAULT_MU_CANDIDATES if candidates is None else candidates)
    if not candidates:
        raise ConfigError("select_mu needs a nonempty candidate list")
    ws = _Workspace(problem, params)
    for mu in candidates:
        svals = np.linalg.svd(np.eye(ws.grid01.n) - mu * ws.A_K, compute_uv=False)
        if svals[-1] > _MU_PROBE_RTOL * svals[0]:
            return float(mu)
    raise NoValidMuError(candidates)


def build_K(kernel, params: MethodParams, diag_split: bool = False):
    """Pointwise evaluator of K(x, xi) = k(x, xi) + lam int_0^1 H(x, z) k(z, xi) dz.

    The z-quadrature is split at the k-kink (z = xi) and graded toward z = x
    where H concentrates as r -> 1.
    """
    require_lambda_valid(params.poisson, params.min_rel_dist)
    p = params.poisson
    base = np.polynomial.legendre.leggauss(max(24, params.quad_order // 2))

    def z_rule(x, xi):
        breaks = {0.0, 1.0, float(xi), float(x)}
        d = max(1e-12, 1.0 - p.r)
        while d < 1.0:
            for s in (x - d, x + d):
                if 1e-14 < s < 1.0 - 1e-14:
                    breaks.add(float(s))
            d *= 8.0
        bp = sorted(breaks)
        t, v = base
        zs, wsl = [], []
        for lo, hi in zip(bp[:-1], bp[1:]):
            if hi - lo < 1e-14:
                continue
            zs.append(0.5 * (hi - lo) * t + 0.5 * (lo + hi))
            wsl.append(0.5 * (hi - lo) * v)
        return np.concatenate(zs), np.concatenate(wsl)

    def evaluate(x, xi):
        x_arr, xi_arr = np.broadcast_arrays(np.asarray(x, dtype=float),
                                            np.asarray(xi, dtype=float))
        out = np.empty(x_arr.shape)
        for idx in np.ndindex(x_arr.shape):
            xx, zz = float(x_arr[idx]), float(xi_arr[idx])
            zq, wq = z_rule(xx, zz)
            Hv = kernel_matrix("H", p, np.array([xx]), zq, params.min_rel_dist)[0]
            kv = np.asarray(kernel(zq, np.full_like(zq, zz)), dtype=float)
            out[idx] = (np.asarray(kernel(xx, zz), dtype=float)
                        + p.lam * float(np.sum(wq * Hv * kv)))
        return out if out.ndim else float(out)

    return evaluate


def build_F1(f, params: MethodParams, grid: Grid1D | None = None) -> GridFunction:
    """F1 = -mu [f + lam int_0^1 H(x, xi) f(xi) d xi] on the solve grid."""
    if params.mu is None:
        raise ConfigError("build_F1 needs mu; run select_mu first")
    require_lambda_valid(params.poisson, params.min_rel_dist)
    p = params.poisson
    grid = grid if grid is not None else gauss_legendre(params.n_out, 0.0, 1.0)
    fv = np.asarray(f(grid.nodes), dtype=float)
    Hw = kernel_matrix("H", p, grid.nodes, grid.nodes,
                       params.min_rel_dist) * grid.weights[None, :]
    return GridFunction(grid, -params.mu * (fv + p.lam * (Hw @ fv)))


def solve_psi1(problem: FirstKindProblem, params: MethodParams) -> GridFunction:
    """Solve the data-only second-kind equation for psi1."""
    if params.mu is None:
        raise ConfigError("solve_psi1 needs mu; run select_mu first")
    ws = _Workspace(problem, params)
    F1 = build_F1(problem.free_term, params, ws.grid01)
    return ws.second_kind(params.mu, F1.values)


def build_rho(psi1: GridFunction, params: MethodParams) -> GridFunction:
    """rho(x) = -lam int_0^1 h(x, xi) psi1(xi) d xi, sampled on [-1, 0]."""
    p = params.poisson
    gridm = gauss_legendre(params.n_out, -1.0, 0.0)
    h = poisson_h(gridm.nodes[:, None], psi1.grid.nodes[None, :], p)
    return GridFunction(gridm, -p.lam * (h @ (psi1.grid.weights * psi1.values)))


def build_kappa(rho: GridFunction, params: MethodParams) -> GridFunction:
    """kappa = rho + Lambda int_-1^0 L(x, xi) rho(xi) d xi."""
    require_lambda_valid(params.poisson, params.min_rel_dist)
    p = params.poisson
    Lw = kernel_matrix("L", p, rho.grid.nodes, rho.grid.nodes,
                       params.min_rel_dist) * rho.grid.weights[None, :]
    return GridFunction(rho.grid, rho.values + p.Lambda * (Lw @ rho.values))


def build_F0(kappa: GridFunction, params: MethodParams,
             grid: Grid1D | None = None) -> GridFunction:
    """F0(x) = lam int_-1^0 H(x, xi) kappa(xi) d xi on [0, 1]."""
    require_lambda_valid(params.poisson, params.min_rel_dist)
    p = params.poisson
    grid = grid if grid is not None else gauss_legendre(params.n_out, 0.0, 1.0)
    Hw = kernel_matrix("H", p, grid.nodes, kappa.grid.nodes,
                       params.min_rel_dist) * kappa.grid.weights[None, :]
    return GridFunction(grid, p.lam * (Hw @ kappa.values))


def method_v2(problem: FirstKindProblem, params: MethodParams,
              mu_candidates=None, verify_threshold: float = 0.05) -> PipelineState:
    """Run the full grid route and verify the output against A psi = f."""
    ws = _Workspace(problem, params)
    mu = params.mu
    if mu is None:
        candidates = list(DEFAULT_MU_CANDIDATES if mu_candidates is None else mu_candidates)
        for cand in candidates:
            svals = np.linalg.svd(np.eye(ws.grid01.n) - cand * ws.A_K, compute_uv=False)
            if svals[-1] > _MU_PROBE_RTOL * svals[0]:
                mu = float(cand)
                break
        if mu is None:
            raise NoValidMuError(candidates)
    p = params.poisson
    fv = ws.f_values()
    F1 = GridFunction(ws.grid01, -mu * (fv + p.lam * (ws.H_w @ fv)))
    psi1 = ws.second_kind(mu, F1.values)
    rho = GridFunction(ws.gridm, -p.lam * (ws.h_m01_w @ psi1.values))
    kappa = GridFunction(ws.gridm, rho.values + p.Lambda * (ws.L_mm_w @ rho.values))
    F0 = GridFunction(ws.grid01, p.lam * (ws.H_01m_w @ kappa.values))
    psi0 = ws.second_kind(mu, F0.values)
    psi = GridFunction(ws.grid01, psi0.values + psi1.values)
    report = verify_solution(problem, psi, threshold=verify_threshold,
                             quad_order=max(96, params.quad_order))
    recon = None
    if problem.psi_star is not None:
        target = np.asarray(problem.psi_star(ws.grid01.nodes), dtype=float)
        recon = ws.grid01.l2_norm(psi.values - target)
    return PipelineState(psi1=psi1, rho=rho, kappa=kappa, F0=F0, F1=F1,
                         psi0=psi0, psi=psi,
                         residual_l2=report.residual_l2,
                         relative_residual=report.relative,
                         mu=mu, reconstruction_error=recon)


def method_v2_single(problem: FirstKindProblem, params: MethodParams,
                     psi1: GridFunction | None = None) -> GridFunction:
    """Single-solve route: after psi1, only integrations remain.

    psi = f' + Lambda int_0^1 L f' with f'(x) = -Lambda int_0^1 l(x, xi)
    psi1(xi) d xi; algebraically this reproduces the grid route's F0.
    """
    require_lambda_valid(params.poisson, params.min_rel_dist)
    if psi1 is None:
        psi1 = solve_psi1(problem, params)
    p = params.poisson
    g = psi1.grid
    lw = kernel_matrix("l", p, g.nodes, g.nodes, params.min_rel_dist) * g.weights[None, :]
    Lw = kernel_matrix("L", p, g.nodes, g.nodes, params.min_rel_dist) * g.weights[None, :]
    fprime = -p.Lambda * (lw @ psi1.values)
    return GridFunction(g, fprime + p.Lambda * (Lw @ fprime))


# r = 1 exclusion points of the Fourier route
_R1_EXCLUDED = (("zero", 0.0), ("one", 1.0), ("one-half", 0.5),
                ("-1+sqrt2", -1.0 + np.sqrt(2.0)), ("-1-sqrt2", -1.0 - np.sqrt(2.0)))


def _check_lambda_r1(lam: float, min_rel_dist: float) -> None:
    for name, value in _R1_EXCLUDED:
        dist = abs(lam - value) if value == 0.0 else abs(lam - value) / abs(value)
        if dist < min_rel_dist:
            raise ParameterExclusionError(lam, f"{name} (r=1)", 0, value, dist)


def method_v1(problem: FirstKindProblem, params: MethodParams,
              n_fourier: int = 16) -> FourierState:
    """Fourier route at the r -> 1 limit.

    Solves the truncated (2N+1)-coefficient system for psi1's coefficients s,
    then maps them to psi's coefficients t = sigma * b with
    sigma = -mu lam^2 (1-lam) / [(1-2 lam)(1-2 lam-lam^2)].
    """
    lam = params.poisson.lam
    _check_lambda_r1(lam, params.min_rel_dist)
    mu = params.mu
    if mu is None:
        mu = select_mu(problem, params)
    N = int(n_fourier)
    if N < 1:
        raise ConfigError(f"need n_fourier >= 1, got {N}")
    c = fourier_coeffs(problem.free_term, N, params.quad_order)
    pk = kernel_fourier_coeffs(problem.kernel, N, params.quad_order,
                               diag_split=problem.diag_split)
    g = mu * (1.0 - lam)
    d = 2.0 * (1.0 - 2.0 * lam)
    dim = 2 * N + 1
    A = np.zeros((dim, dim))
    b = np.zeros(dim)
    A[0, 0] = d - g * pk.p00
    A[0, 1:N + 1] = -2.0 * g * pk.row0_cos
    A[0, N + 1:] = -2.0 * g * pk.row0_sin
    b[0] = -2.0 * g * c.c0
    for n in range(1, N + 1):
        i = n
        A[i, 0] = -g * pk.col0_cos[n - 1]
        A[i, 1:N + 1] = -2.0 * g * pk.cc[n - 1, :]
        A[i, N + 1:] = -2.0 * g * pk.cs[n - 1, :]
        A[i, i] += d
        b[i] = -2.0 * g * c.cn[n - 1]
        j = N + n
        A[j, 0] = -g * pk.col0_sin[n - 1]
        A[j, 1:N + 1] = -2.0 * g * pk.sc[n - 1, :]
        A[j, N + 1:] = -2.0 * g * pk.ss[n - 1, :]
        A[j, j] += d
        b[j] = -2.0 * g * c.cn_prime[n - 1]
    cond = np.linalg.cond(A)
    if not np.isfinite(cond) or cond > 1e12:
        raise NoValidMuError([mu])
    sol = np.linalg.solve(A, b)
    s = FourierCoeffs(c0=sol[0], cn=sol[1:N + 1], cn_prime=sol[N + 1:])
    b0 = 0.5 * s.c0 * pk.p00 + float(pk.row0_cos @ s.cn + pk.row0_sin @ s.cn_prime) - c.c0
    bn = 0.5 * s.c0 * pk.col0_cos + pk.cc @ s.cn + pk.cs @ s.cn_prime - c.cn
    bpn = 0.5 * s.c0 * pk.col0_sin + pk.sc @ s.cn + pk.ss @ s.cn_prime - c.cn_prime
    sigma = -mu * lam ** 2 * (1.0 - lam) / ((1.0 - 2.0 * lam) * (1.0 - 2.0 * lam - lam ** 2))
    scale = mu * lam / (1.0 - 2.0 * lam)
    return FourierState(
        c=c, p=pk, s=s,
        a=FourierCoeffs(c0=scale * b0, cn=scale * bn, cn_prime=scale * bpn),
        t=FourierCoeffs(c0=sigma * b0, cn=sigma * bn, cn_prime=sigma * bpn),
        sigma=sigma,
    )


def verify_solution(problem: FirstKindProblem, psi, threshold: float = 0.05,
                    quad_order: int = 96) -> ResidualReport:
    """Substitute psi into the first-kind equation and threshold the residual.

    solvable: 'no' above threshold, 'yes' below threshold/10, else 'unknown'.
    """
    grid = gauss_legendre(quad_order, 0.0, 1.0)
    forward = apply_operator(problem.kernel, grid.nodes, psi, lo=0.0, hi=1.0,
                             diag_split=problem.diag_split, quad_order=quad_order)
    fv = np.asarray(problem.free_term(grid.nodes), dtype=float)
    residual = grid.l2_norm(forward - fv)
    fnorm = grid.l2_norm(fv)
    if fnorm > 0.0:
        relative = residual / fnorm
    else:
        relative = 0.0 if residual == 0.0 else np.inf
    if relative > threshold:
        verdict = "no"
    elif relative < threshold / 10.0:
        verdict = "yes"
    else:
        verdict = "unknown"
    return ResidualReport(residual_l2=float(residual), relative=float(relative),
                          solvable=verdict, threshold=float(threshold))
