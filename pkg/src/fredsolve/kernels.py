"""Poisson kernel, its resolvents, and the parameter-exclusion validator.

All four kernels are 1-periodic difference kernels on the line, evaluated
either in closed form (h) or as truncated cosine series (h, H, l, L).  With
u = x - xi and coefficients a_n:

    h(u) = 1 + 2 sum r^n cos(2 n pi u)            (closed Poisson form exists)
    H(u) = 1/(1-2L) + 2 sum r^n/(1-2L r^n) cos(2 n pi u)
    l(u) = 1/(1-2L) + 2 sum r^2n/(1-2L r^n) cos(2 n pi u)
    L(u) = 1/(1-2L-L^2) + 2 sum r^2n/(1-2L r^n - L^2 r^2n) cos(2 n pi u)

where L stands for lambda.  The series denominators degenerate when lambda
approaches 0, r^-n, r^-n/2 or (-1 +- sqrt(2)) r^-n, hence the validator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, ParameterExclusionError

__all__ = [
    "PoissonParams",
    "ExclusionReport",
    "poisson_h",
    "poisson_h_series",
    "resolvent_H",
    "kernel_l",
    "resolvent_L",
    "validate_lambda",
    "require_lambda_valid",
    "kernel_matrix",
]

_SQRT2 = math.sqrt(2.0)

# cap keeps n_trunc finite as r -> 1; evaluation cost stays manageable
_MAX_TRUNC = 200_000


def _default_n_trunc(r: float, series_tol: float) -> int:
    # smallest N with 2 r^(N+1) / (1 - r) <= series_tol
    target = series_tol * (1.0 - r) / 2.0
    n = int(math.ceil(math.log(target) / math.log(r))) - 1
    return min(max(n, 1), _MAX_TRUNC)


@dataclass(frozen=True)
class PoissonParams:
    """Parameters r, lambda of the reformulation; Lambda is pinned to lambda^2.

    ``n_trunc`` truncates every cosine series so the geometric tail
    2 r^(n_trunc+1)/(1-r) stays below ``series_tol``.
    """

    r: float
    lam: float
    Lambda: float
    n_trunc: int
    series_tol: float

    def __post_init__(self):
        if not 0.0 < self.r < 1.0:
            raise ConfigError(f"r must lie in (0, 1), got {self.r}")
        if self.Lambda != self.lam * self.lam:
            raise ConfigError("Lambda must equal lambda^2 exactly")
        if self.n_trunc < 1:
            raise ConfigError("n_trunc must be >= 1")
        tail = 2.0 * self.r ** (self.n_trunc + 1) / (1.0 - self.r)
        if tail > self.series_tol and self.n_trunc < _MAX_TRUNC:
            raise ConfigError(
                f"n_trunc={self.n_trunc} leaves series tail {tail:.3g} > {self.series_tol:.3g}"
            )

    @classmethod
    def create(cls, r: float = 0.5, lam: float = 0.2, series_tol: float = 1e-12,
               n_trunc: int | None = None) -> "PoissonParams":
        if not 0.0 < r < 1.0:
            raise ConfigError(f"r must lie in (0, 1), got {r}")
        if n_trunc is None:
            n_trunc = _default_n_trunc(r, series_tol)
        return cls(r=float(r), lam=float(lam), Lambda=float(lam) * float(lam),
                   n_trunc=int(n_trunc), series_tol=float(series_tol))


@dataclass(frozen=True)
class ExclusionReport:
    """Names the excluded value an offered lambda came too close to."""

    lam: float
    family: str
    n: int
    value: float
    rel_dist: float


# family name -> base value at n = 0; members are base * r^(-n)
_FAMILIES = (
    ("r^-n", 1.0),
    ("(1/2) r^-n", 0.5),
    ("(-1+sqrt2) r^-n", -1.0 + _SQRT2),
    ("(-1-sqrt2) r^-n", -1.0 - _SQRT2),
)


def validate_lambda(p: PoissonParams, min_rel_dist: float = 1e-3) -> ExclusionReport | None:
    """Check lambda against the excluded families {0, r^-n, r^-n/2, (-1+-sqrt2) r^-n}.

    Returns None when lambda keeps relative distance >= min_rel_dist from
    every member with n = 0..n_trunc (absolute distance for the value 0),
    otherwise a report naming the violated family.
    """
    lam = p.lam
    if abs(lam) < min_rel_dist:
        return ExclusionReport(lam, "zero", 0, 0.0, abs(lam))
    for family, base in _FAMILIES:
        # |base| r^-n grows with n; stop once the family is permanently clear
        for n in range(p.n_trunc + 1):
            value = base / p.r ** n
            if n > 0 and abs(value) > abs(lam) and 1.0 - abs(lam) / abs(value) >= min_rel_dist:
                break
            rel = abs(lam - value) / abs(value)
            if rel < min_rel_dist:
                return ExclusionReport(lam, family, n, value, rel)
    return None


def require_lambda_valid(p: PoissonParams, min_rel_dist: float = 1e-3) -> None:
    """Raise ParameterExclusionError when validate_lambda reports a hit."""
    report = validate_lambda(p, min_rel_dist)
    if report is not None:
        raise ParameterExclusionError(report.lam, report.family, report.n,
                                      report.value, report.rel_dist)


def poisson_h(x, xi, p: PoissonParams):
    """Closed-form Poisson kernel (1-r^2) / (1 - 2 r cos(2 pi (x-xi)) + r^2)."""
    u = np.asarray(x, dtype=float) - np.asarray(xi, dtype=float)
    return (1.0 - p.r ** 2) / (1.0 - 2.0 * p.r * np.cos(2.0 * np.pi * u) + p.r ** 2)


def _cosine_series(c0, coeffs, x, xi):
    u = np.asarray(x, dtype=float) - np.asarray(xi, dtype=float)
    out = np.full(np.shape(u), float(c0))
    n = np.arange(1, coeffs.size + 1)
    # chunked so huge truncations (r near 1) stay within memory
    step = max(1, int(4e6 // max(out.size, 1)))
    for s in range(0, coeffs.size, step):
        e = min(coeffs.size, s + step)
        out += 2.0 * (np.cos(2.0 * np.pi * np.multiply.outer(u, n[s:e])) @ coeffs[s:e])
    return float(out) if out.ndim == 0 else out


def poisson_h_series(x, xi, p: PoissonParams, n_terms: int | None = None):
    """Partial sum 1 + 2 sum_{n<=N} r^n cos(2 n pi (x-xi))."""
    N = p.n_trunc if n_terms is None else int(n_terms)
    if N == 0:
        u = np.asarray(x, dtype=float) - np.asarray(xi, dtype=float)
        out = np.ones_like(u)
        return float(out) if out.ndim == 0 else out
    n = np.arange(1, N + 1)
    return _cosine_series(1.0, p.r ** n, x, xi)


def _h_coeffs(p):
    n = np.arange(1, p.n_trunc + 1)
    return 1.0, p.r ** n


def _H_coeffs(p):
    n = np.arange(1, p.n_trunc + 1)
    rn = p.r ** n
    return 1.0 / (1.0 - 2.0 * p.lam), rn / (1.0 - 2.0 * p.lam * rn)


def _l_coeffs(p):
    n = np.arange(1, p.n_trunc + 1)
    rn = p.r ** n
    return 1.0 / (1.0 - 2.0 * p.lam), rn ** 2 / (1.0 - 2.0 * p.lam * rn)


def _L_coeffs(p):
    n = np.arange(1, p.n_trunc + 1)
    rn = p.r ** n
    return (1.0 / (1.0 - 2.0 * p.lam - p.Lambda),
            rn ** 2 / (1.0 - 2.0 * p.lam * rn - p.Lambda * rn ** 2))


def resolvent_H(x, xi, p: PoissonParams, min_rel_dist: float = 1e-3):
    """Resolvent of the Poisson operator on [-1, 1] (characteristic numbers r^-n / 2)."""
    require_lambda_valid(p, min_rel_dist)
    return _cosine_series(*_H_coeffs(p), x=x, xi=xi)


def kernel_l(x, xi, p: PoissonParams, min_rel_dist: float = 1e-3):
    """Iterated kernel: the half-interval composition of h with H."""
    require_lambda_valid(p, min_rel_dist)
    return _cosine_series(*_l_coeffs(p), x=x, xi=xi)


def resolvent_L(x, xi, p: PoissonParams, min_rel_dist: float = 1e-3):
    """Resolvent of kernel_l at parameter Lambda = lambda^2."""
    require_lambda_valid(p, min_rel_dist)
    return _cosine_series(*_L_coeffs(p), x=x, xi=xi)


_KINDS = {"h": _h_coeffs, "H": _H_coeffs, "l": _l_coeffs, "L": _L_coeffs}


def kernel_matrix(kind: str, p: PoissonParams, out_nodes, in_nodes,
                  min_rel_dist: float = 1e-3) -> np.ndarray:
    """Dense cross matrix kind(out_i, in_j) for kind in {'h', 'H', 'l', 'L'}."""
    if kind not in _KINDS:
        raise ConfigError(f"unknown kernel kind {kind!r}")
    if kind != "h":
        require_lambda_valid(p, min_rel_dist)
    if kind == "h":
        return poisson_h(np.asarray(out_nodes, float)[:, None],
                         np.asarray(in_nodes, float)[None, :], p)
    c0, coeffs = _KINDS[kind](p)
    return _cosine_series(c0, coeffs,
                          np.asarray(out_nodes, float)[:, None],
                          np.asarray(in_nodes, float)[None, :])
