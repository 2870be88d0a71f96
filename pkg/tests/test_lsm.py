"""Regularized sampling engine: SVD, Tikhonov, discrepancy principle,
right-hand sides, and the imaging sweep."""

import os

import numpy as np
import pytest

from nfem.errors import InvalidArgumentError
from nfem.forward import LayeredCavityConfig, Shell
from nfem.green import green_tensor
from nfem.lsm import (
    build_sampling_grid,
    indicator_at,
    morozov_alpha,
    rhs_matrix,
    rhs_vector,
    run_imaging,
    single_layer_eval,
    svd_factorize,
    tikhonov_solve,
)
from nfem.measurement import NoiseSpec, add_noise, assemble_nearfield, build_sphere_grid

K = 0.75
POL = np.array([1.0, -1.0, 1.0]) / np.sqrt(3.0)
BALL = LayeredCavityConfig(1.5, (Shell(2.5, 1.0, 2.0),), K, 20)


@pytest.fixture(scope="module")
def sphere():
    return build_sphere_grid(8, 16, 1.0)


@pytest.fixture(scope="module")
def noisy(sphere):
    clean = assemble_nearfield(BALL, sphere)
    return add_noise(clean, NoiseSpec(0.02, 7))


@pytest.fixture(scope="module")
def svd(noisy):
    return svd_factorize(noisy, k=K)


class TestSvd:
    def test_reconstruction(self, noisy, svd):
        a = noisy.entries * svd.weights2[None, :]
        back = (svd.u * svd.s) @ svd.vh
        assert np.max(np.abs(back - a)) < 1e-10 * svd.s[0]

    def test_operator_norm_hermitian_oracle(self, noisy, svd):
        # ||A||_2^2 is the top eigenvalue of A^H A, computed by an
        # independent Hermitian eigensolver.
        a = noisy.entries * svd.weights2[None, :]
        top = np.linalg.eigvalsh(a.conj().T @ a)[-1]
        assert svd.norm2 == pytest.approx(np.sqrt(top), rel=1e-8)


class TestTikhonov:
    def test_matches_normal_equations_oracle(self, svd, sphere):
        # Dense oracle: (A^H A + alpha I) g = A^H b solved directly.
        b = rhs_vector(np.array([1.8, 0.3, -0.4]), POL, sphere, K)
        a = (svd.u * svd.s) @ svd.vh
        for alpha in (1e-2, 1e-5, 1e-8):
            sol = tikhonov_solve(svd, b, alpha)
            n = a.shape[1]
            g_oracle = np.linalg.solve(
                a.conj().T @ a + alpha * np.eye(n), a.conj().T @ b
            )
            assert np.linalg.norm(sol.g - g_oracle) < 1e-6 * np.linalg.norm(g_oracle)

    def test_normal_equations_residual(self, svd, sphere):
        b = rhs_vector(np.array([2.0, 0.0, 0.5]), POL, sphere, K)
        a = (svd.u * svd.s) @ svd.vh
        for alpha in (1e-3, 1e-7):
            sol = tikhonov_solve(svd, b, alpha)
            resid = a.conj().T @ (a @ sol.g - b) + alpha * sol.g
            scale = np.linalg.norm(a.conj().T @ b)
            assert np.linalg.norm(resid) < 1e-10 * scale

    def test_discrepancy_field_consistent(self, svd, sphere):
        b = rhs_vector(np.array([1.6, -0.9, 0.2]), POL, sphere, K)
        a = (svd.u * svd.s) @ svd.vh
        sol = tikhonov_solve(svd, b, 1e-4)
        direct = np.linalg.norm(a @ sol.g - b)
        assert sol.discrepancy == pytest.approx(direct, rel=1e-12)

    def test_limits(self, svd, sphere):
        # alpha -> large shrinks g to 0; alpha -> small drives the residual
        # toward the least-squares floor.
        b = rhs_vector(np.array([1.5, 1.0, 0.3]), POL, sphere, K)
        big = tikhonov_solve(svd, b, 1e6 * svd.norm2**2)
        small = tikhonov_solve(svd, b, 1e-14 * svd.norm2**2)
        assert np.linalg.norm(big.g) < 1e-5 * np.linalg.norm(small.g)
        assert small.discrepancy < 0.01 * np.linalg.norm(b)

    def test_alpha_positive_required(self, svd, sphere):
        b = rhs_vector(np.array([1.5, 1.0, 0.3]), POL, sphere, K)
        with pytest.raises(InvalidArgumentError):
            tikhonov_solve(svd, b, 0.0)


class TestMorozov:
    def test_discrepancy_monotone_in_alpha(self, svd, sphere):
        b = rhs_vector(np.array([1.7, 0.4, 0.8]), POL, sphere, K)
        alphas = np.logspace(-12, 2, 10) * svd.norm2**2
        disc = [tikhonov_solve(svd, b, a).discrepancy for a in alphas]
        assert all(y > x for x, y in zip(disc, disc[1:]))

    def test_root_satisfies_discrepancy_equation(self, svd, sphere):
        for z in ([1.8, 0.3, -0.4], [2.4, -1.0, 0.9], [0.0, 0.0, 1.2]):
            b = rhs_vector(np.array(z), POL, sphere, K)
            alpha, flagged = morozov_alpha(svd, b, 0.02)
            assert not flagged
            sol = tikhonov_solve(svd, b, alpha)
            target = 0.02 * svd.norm2 * np.linalg.norm(sol.g)
            assert abs(sol.discrepancy - target) < 1e-6 * np.linalg.norm(b)

    def test_zero_noise_flagged_at_bracket_floor(self, svd, sphere):
        b = rhs_vector(np.array([1.8, 0.3, -0.4]), POL, sphere, K)
        alpha, flagged = morozov_alpha(svd, b, 0.0)
        assert flagged
        assert alpha == pytest.approx(1e-14 * svd.norm2**2, rel=1e-12)

    def test_zero_rhs_rejected(self, svd):
        with pytest.raises(InvalidArgumentError):
            morozov_alpha(svd, np.zeros(svd.u.shape[0], dtype=complex), 0.02)


class TestRhs:
    def test_matches_green_tensor(self, sphere):
        z = np.array([1.9, -0.2, 0.6])
        b = rhs_vector(z, POL, sphere, K)
        i = 13
        want1 = sphere.e1[i] @ (green_tensor(sphere.nodes[i], z, K) @ POL)
        want2 = sphere.e2[i] @ (green_tensor(sphere.nodes[i], z, K) @ POL)
        assert b[2 * i] == pytest.approx(want1, rel=1e-13)
        assert b[2 * i + 1] == pytest.approx(want2, rel=1e-13)

    def test_batch_matches_single(self, sphere):
        zs = np.array([[1.9, -0.2, 0.6], [0.4, 0.1, 1.4], [2.5, 2.5, 2.5]])
        batch = rhs_matrix(zs, POL, sphere, K)
        for t, z in enumerate(zs):
            assert np.allclose(batch[:, t], rhs_vector(z, POL, sphere, K), rtol=1e-14)

    def test_linearity_in_polarization(self, sphere):
        z = np.array([1.2, 1.2, 0.0])
        h1 = np.array([1.0, 0.0, 0.0])
        h2 = np.array([0.0, 1.0, 0.0])
        combo = rhs_vector(z, 2 * h1 - 0.5 * h2, sphere, K)
        assert np.allclose(
            combo,
            2 * rhs_vector(z, h1, sphere, K) - 0.5 * rhs_vector(z, h2, sphere, K),
            rtol=1e-13,
        )

    def test_decay_with_distance(self, sphere):
        near = rhs_vector(np.array([1.5, 0, 0]), POL, sphere, K)
        far = rhs_vector(np.array([40.0, 0, 0]), POL, sphere, K)
        assert np.linalg.norm(far) < 0.05 * np.linalg.norm(near)

    def test_point_on_sphere_rejected(self, sphere):
        with pytest.raises(InvalidArgumentError):
            rhs_vector(np.array([1.0, 0.0, 0.0]), POL, sphere, K)


class TestIndicator:
    def test_inside_point_smaller_than_outside(self, noisy, svd, sphere):
        v_in, _ = indicator_at(np.array([1.2, 0.0, 0.0]), POL, svd, sphere, K, 0.02)
        v_out, _ = indicator_at(np.array([2.0, 0.0, 0.0]), POL, svd, sphere, K, 0.02)
        assert np.log10(v_out) - np.log10(v_in) > 0.5

    def test_scaling_invariance_of_ranking(self, noisy, sphere):
        # Rescaling the data matrix rescales 1/||g|| uniformly, leaving
        # the normalized image unchanged.
        from dataclasses import replace

        scaled = replace(noisy, entries=noisy.entries * 7.5)
        svd1 = svd_factorize(noisy, k=K)
        svd2 = svd_factorize(scaled, k=K)
        zs = [np.array([1.3, 0.4, 0.0]), np.array([2.1, 0.0, 0.3])]
        vals1 = [indicator_at(z, POL, svd1, sphere, K, 0.02)[0] for z in zs]
        vals2 = [indicator_at(z, POL, svd2, sphere, K, 0.02)[0] for z in zs]
        assert vals2[0] / vals2[1] == pytest.approx(vals1[0] / vals1[1], rel=1e-8)


class TestSamplingGrid:
    def test_lattice_shape_and_order(self):
        grid = build_sampling_grid(np.array([[-1, 1], [-1, 1], [-1, 1]]), 0.5, 0.75)
        assert grid.shape == (5, 5, 5)
        assert grid.n_points == 125
        # x varies fastest in storage order
        assert np.allclose(grid.points[1] - grid.points[0], [0.5, 0, 0])
        assert np.allclose(grid.points[5] - grid.points[0], [0, 0.5, 0])
        assert np.allclose(grid.points[25] - grid.points[0], [0, 0, 0.5])

    def test_mask(self):
        grid = build_sampling_grid(np.array([[-1, 1], [-1, 1], [-1, 1]]), 0.5, 0.75)
        r = np.linalg.norm(grid.points, axis=1)
        assert np.array_equal(grid.active, r > 0.75 + 1e-9)
        assert not grid.active[62]  # the origin

    def test_bad_spacing(self):
        with pytest.raises(InvalidArgumentError):
            build_sampling_grid(np.zeros((3, 2)) + [[0, 1]], 0.0, 0.5)


class TestImagingSweep:
    BOUNDS = np.array([[-2, 2], [-2, 2], [-2, 2]])

    def test_normalization_and_masking(self, noisy):
        grid = build_sampling_grid(self.BOUNDS, 0.5, 1.0)
        field = run_imaging(noisy, grid, POL, 0.02, k=K)
        active = grid.active
        assert np.max(field.indicator[active]) == pytest.approx(1.0, rel=1e-15)
        assert np.all(field.indicator[~active] == 0.0)
        assert np.all(field.log_indicator[~active] == 0.0)
        assert np.all(field.log_indicator[active] <= 0.0)

    def test_thread_count_invariance(self, noisy, monkeypatch):
        grid = build_sampling_grid(self.BOUNDS, 0.5, 1.0)

        def image_with(threads):
            monkeypatch.setenv("NFEM_THREADS", str(threads))
            return run_imaging(noisy, grid, POL, 0.02, k=K)

        f1 = image_with(1)
        f4 = image_with(4)
        assert np.array_equal(f1.indicator, f4.indicator)
        assert np.array_equal(f1.log_indicator, f4.log_indicator)

    def test_empty_active_set_rejected(self, noisy):
        grid = build_sampling_grid(np.array([[-0.2, 0.2]] * 3), 0.1, 1.0)
        with pytest.raises(InvalidArgumentError):
            run_imaging(noisy, grid, POL, 0.02, k=K)

    def test_wavenumber_required(self, noisy):
        grid = build_sampling_grid(self.BOUNDS, 0.5, 1.0)
        svd = svd_factorize(noisy)  # untagged
        with pytest.raises(InvalidArgumentError):
            run_imaging(noisy, grid, POL, 0.02, svd=svd)


class TestSingleLayer:
    def test_solves_helmholtz_componentwise(self, noisy, svd, sphere):
        # The potential is a superposition of outgoing kernels, so each
        # Cartesian component satisfies (Laplacian + k^2) u = 0 off the sphere.
        z = np.array([1.8, 0.3, -0.4])
        _, sol = indicator_at(z, POL, svd, sphere, K, 0.02)
        x = np.array([1.6, 0.9, 0.8])
        eps = 1e-4
        lap = np.zeros(3, dtype=complex)
        for j in range(3):
            step = np.zeros(3)
            step[j] = eps
            lap += (
                single_layer_eval(sol.g, x + step, sphere, K)
                - 2 * single_layer_eval(sol.g, x, sphere, K)
                + single_layer_eval(sol.g, x - step, sphere, K)
            ) / eps**2
        val = single_layer_eval(sol.g, x, sphere, K)
        resid = np.linalg.norm(lap + K**2 * val)
        assert resid < 1e-3 * max(np.linalg.norm(val), 1e-30) * K**2

    def test_point_on_sphere_rejected(self, svd, sphere):
        g = np.zeros(2 * sphere.n_nodes, dtype=complex)
        with pytest.raises(InvalidArgumentError):
            single_layer_eval(g, np.array([0.0, 1.0, 0.0]), sphere, K)
