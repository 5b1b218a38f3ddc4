import numpy as np
import pytest

from fredsolve.errors import ConfigError, ContractionError, OnSpectrumError
from fredsolve.fredholm2 import (SecondKindSystem, deflate_on_spectrum,
                                 estimate_spectrum, neumann_iterate,
                                 solve_direct, solve_volterra2)
from fredsolve.grid import GridFunction, gauss_legendre, operator_matrix

from oracles import tri_green

GRID = gauss_legendre(64, 0.0, 1.0)


def _ones(x):
    return np.ones_like(np.asarray(x, dtype=float))


class TestSolveDirect:
    def test_zero_kernel(self):
        sys_ = SecondKindSystem(lambda x, xi: 0.0 * x * xi, np.sin, mu=0.7, grid=GRID)
        psi = solve_direct(sys_)
        assert np.array_equal(psi.values, np.sin(GRID.nodes))

    def test_rank_one_constant(self):
        sys_ = SecondKindSystem(lambda x, xi: _ones(x * xi), _ones, mu=0.5, grid=GRID)
        psi = solve_direct(sys_)
        assert np.max(np.abs(psi.values - 2.0)) < 1e-12

    def test_regularized_canonical_form(self):
        # alpha psi + A psi = f in canonical form psi = -(1/alpha) A psi + f/alpha;
        # oracle: eigen-expansion with lambda_n = (n pi)^2, psi_n = sqrt2 sin(n pi x)
        alpha = 0.1
        sys_ = SecondKindSystem(tri_green, lambda x: np.sin(np.pi * x) / alpha,
                                mu=-1.0 / alpha, grid=GRID, diag_split=True)
        psi = solve_direct(sys_)
        exact = np.pi ** 2 / (1.0 + alpha * np.pi ** 2) * np.sin(np.pi * GRID.nodes)
        assert np.max(np.abs(psi.values - exact)) < 1e-8

    def test_on_spectrum_raises(self):
        est = estimate_spectrum(tri_green, GRID, count=1)
        mu_hit = float(est.char_numbers[0])
        sys_ = SecondKindSystem(tri_green, np.sin, mu=mu_hit, grid=GRID, diag_split=True)
        with pytest.raises(OnSpectrumError):
            solve_direct(sys_)


class TestNeumannIterate:
    def test_geometric_series(self):
        sys_ = SecondKindSystem(lambda x, xi: _ones(x * xi), _ones, mu=0.4, grid=GRID)
        psi = neumann_iterate(sys_, tol=1e-14)
        assert np.max(np.abs(psi.values - 5.0 / 3.0)) < 1e-10

    def test_contraction_violation(self):
        sys_ = SecondKindSystem(lambda x, xi: _ones(x * xi), _ones, mu=1.5, grid=GRID)
        with pytest.raises(ContractionError) as exc:
            neumann_iterate(sys_)
        assert exc.value.c1 == pytest.approx(1.0, abs=1e-10)

    def test_agreement_with_direct_solve(self):
        # |mu| c1 < 1 needs alpha > ||k|| = 1/sqrt(90) ~ 0.105; alpha = 0.2
        alpha = 0.2
        sys_ = SecondKindSystem(tri_green, lambda x: np.sin(np.pi * x) / alpha,
                                mu=-1.0 / alpha, grid=GRID, diag_split=True)
        direct = solve_direct(sys_)
        iterated = neumann_iterate(sys_, max_iter=2000, tol=1e-12)
        assert GRID.l2_norm(direct.values - iterated.values) < 1e-8

    def test_canonical_alpha_refused(self):
        # at alpha = 0.1 the contraction condition |mu| c1 < 1 fails (c1 = 1/sqrt(90))
        sys_ = SecondKindSystem(tri_green, np.sin, mu=-10.0, grid=GRID, diag_split=True)
        with pytest.raises(ContractionError):
            neumann_iterate(sys_)


class TestEstimateSpectrum:
    def test_triangular_kernel(self):
        est = estimate_spectrum(tri_green, GRID, count=4)
        assert abs(est.char_numbers[0] - np.pi ** 2) / np.pi ** 2 < 1e-3
        x = GRID.nodes
        dev = np.min([GRID.l2_norm(est.eigenfunctions[0].values - s * np.sqrt(2) * np.sin(np.pi * x))
                      for s in (1.0, -1.0)])
        assert dev < 1e-6

    def test_poisson_restricted_char_numbers(self):
        grid2 = gauss_legendre(64, -1.0, 1.0)
        r = 0.5
        kern = lambda x, xi: (1 - r * r) / (1 - 2 * r * np.cos(2 * np.pi * (x - xi)) + r * r)
        est = estimate_spectrum(kern, grid2, count=5)
        expected = np.array([0.5, 1.0, 1.0, 2.0, 2.0])
        assert np.max(np.abs(est.char_numbers - expected) / expected) < 1e-3

    def test_rank_one(self):
        est = estimate_spectrum(lambda x, xi: _ones(x * xi), GRID, count=3)
        assert est.char_numbers.size == 1
        assert est.char_numbers[0] == pytest.approx(1.0, abs=1e-10)
        assert np.max(np.abs(est.eigenfunctions[0].values - 1.0)) < 1e-8

    def test_orthogonality(self):
        est = estimate_spectrum(tri_green, GRID, count=6)
        for i in range(6):
            for j in range(i):
                ip = np.sum(GRID.weights * est.eigenfunctions[i].values
                            * est.eigenfunctions[j].values)
                assert abs(ip) < 1e-8

    def test_normalization(self):
        est = estimate_spectrum(tri_green, GRID, count=4)
        for f in est.eigenfunctions:
            assert abs(f.l2_norm() - 1.0) < 1e-10

    def test_asymmetric_kernel_rejected(self):
        with pytest.raises(ConfigError):
            estimate_spectrum(lambda x, xi: x * (1 + 0.0 * xi), GRID, count=2)


class TestDeflate:
    def _eig(self):
        return GridFunction.sample(lambda x: np.sqrt(2) * np.sin(np.pi * x), GRID)

    def test_orthogonal_unchanged(self):
        eig = self._eig()
        f = GridFunction.sample(lambda x: np.sqrt(2) * np.sin(2 * np.pi * x), GRID)
        out = deflate_on_spectrum(f, eig)
        assert np.max(np.abs(out.values - f.values)) < 1e-12

    def test_eigendirection_removed(self):
        eig = self._eig()
        out = deflate_on_spectrum(eig, eig)
        assert np.max(np.abs(out.values)) < 1e-12

    def test_mixed_input(self):
        # Gram-Schmidt oracle: g = raw - eig <raw, eig> is orthogonal by construction
        eig = self._eig()
        raw = GridFunction.sample(lambda x: x * x, GRID)
        coeff = np.sum(GRID.weights * raw.values * eig.values)
        g = raw.values - coeff * eig.values
        f = GridFunction(GRID, eig.values + g)
        out = deflate_on_spectrum(f, eig)
        assert np.max(np.abs(out.values - g)) < 1e-10

    def test_unnormalized_rejected(self):
        eig = GridFunction.sample(lambda x: np.sin(np.pi * x), GRID)  # norm 1/sqrt2
        with pytest.raises(ConfigError):
            deflate_on_spectrum(eig, eig)


class TestVolterra:
    def test_zero_kernel(self):
        psi = solve_volterra2(lambda x, xi: 0.0 * x * xi, np.cos, GRID)
        assert np.array_equal(psi.values, np.cos(GRID.nodes))

    def test_exponential_fixed_point(self):
        psi = solve_volterra2(lambda x, xi: _ones(x * xi), _ones, GRID)
        assert np.max(np.abs(psi.values - np.exp(GRID.nodes))) < 1e-6


def test_conditioning_grows_with_refinement():
    # unregularized first-kind Nystrom matrix of the triangular kernel
    conds = []
    for n in (8, 16, 32, 64):
        g = gauss_legendre(n, 0.0, 1.0)
        A = operator_matrix(tri_green, g)
        s = np.linalg.svd(A, compute_uv=False)
        conds.append(s[0] / s[-1])
    assert all(b >= a for a, b in zip(conds, conds[1:]))
