"""Independent oracles shared by the test modules.

Everything here is deliberately built from different primitives than the
package paths it checks: composite quadrature built in-place, analytic
eigen-expansions, and separation-of-variables series.
"""

import numpy as np


def composite_gauss(a, b, panels, n_per_panel):
    """Flat (nodes, weights) composite Gauss rule; built without the package."""
    t, v = np.polynomial.legendre.leggauss(n_per_panel)
    edges = np.linspace(a, b, panels + 1)
    xs, ws = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        xs.append(0.5 * (hi - lo) * t + 0.5 * (lo + hi))
        ws.append(0.5 * (hi - lo) * v)
    return np.concatenate(xs), np.concatenate(ws)


def split_gauss(a, mid, b, n_per_panel):
    t, v = np.polynomial.legendre.leggauss(n_per_panel)
    xs, ws = [], []
    for lo, hi in ((a, mid), (mid, b)):
        if hi - lo < 1e-15:
            continue
        xs.append(0.5 * (hi - lo) * t + 0.5 * (lo + hi))
        ws.append(0.5 * (hi - lo) * v)
    return np.concatenate(xs), np.concatenate(ws)


def tri_green(x, xi):
    x = np.asarray(x, dtype=float)
    xi = np.asarray(xi, dtype=float)
    return np.where(x <= xi, x * (1.0 - xi), xi * (1.0 - x))


def lavrentiev_exact_m1(alpha, x):
    """Exact regularized solution for the sine test problem at mode 1."""
    return np.sin(np.pi * x) / (1.0 + alpha * np.pi ** 2)


def membrane_psi(x, y, n_terms=20):
    """d^2 u / dx^2 of the clamped-membrane field for unit load.

    Single series, closed form in x: converges geometrically in the odd mode
    index away from y in {0, 1}.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    out = -np.ones(np.broadcast(x, y).shape)
    for j in range(n_terms):
        n = 2 * j + 1
        out = out + (4.0 / np.pi) * np.sin(n * np.pi * x) \
            * np.cosh(n * np.pi * (y - 0.5)) / (n * np.cosh(n * np.pi / 2.0))
    return out


def membrane_u(x, y, n_terms=20):
    """The membrane deflection itself (u = 0 on the whole boundary)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    out = 0.5 * x * (1.0 - x) + 0.0 * y
    for j in range(n_terms):
        n = 2 * j + 1
        out = out - (4.0 / np.pi ** 3) * np.sin(n * np.pi * x) \
            * np.cosh(n * np.pi * (y - 0.5)) / (n ** 3 * np.cosh(n * np.pi / 2.0))
    return out


def heat_mode(x, t):
    """Single separated mode of the heat problem with u0 = sin(pi x)."""
    return np.exp(-np.pi ** 2 * np.asarray(t, dtype=float)) * np.sin(np.pi * np.asarray(x, dtype=float))
