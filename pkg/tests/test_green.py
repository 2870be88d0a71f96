"""Helmholtz kernel and dipole-field layer, checked against finite
differences and closed-form limits."""

import numpy as np
import pytest

from nfem.errors import InvalidArgumentError, SingularPointError
from nfem.green import (
    Dipole,
    curl_incident_field,
    grad_phi,
    green_apply,
    green_tensor,
    incident_field,
    phi,
)

K = 1.3
X = np.array([0.9, -0.3, 0.5])
Y = np.array([-0.2, 0.4, -0.1])
P = np.array([0.6, -1.0, 0.8])


def fd_grad(f, x, eps=1e-6):
    out = np.zeros(3, dtype=complex)
    for j in range(3):
        step = np.zeros(3)
        step[j] = eps
        out[j] = (f(x + step) - f(x - step)) / (2 * eps)
    return out


def fd_curl(f, x, eps=1e-5):
    jac = np.zeros((3, 3), dtype=complex)
    for j in range(3):
        step = np.zeros(3)
        step[j] = eps
        jac[:, j] = (f(x + step) - f(x - step)) / (2 * eps)
    return np.array(
        [jac[2, 1] - jac[1, 2], jac[0, 2] - jac[2, 0], jac[1, 0] - jac[0, 1]]
    )


class TestPhi:
    def test_closed_form(self):
        r = np.linalg.norm(X - Y)
        assert phi(X, Y, K) == pytest.approx(
            np.exp(1j * K * r) / (4 * np.pi * r), rel=1e-15
        )

    def test_gradient_matches_finite_difference(self):
        got = grad_phi(X, Y, K)
        want = fd_grad(lambda x: phi(x, Y, K), X)
        assert np.max(np.abs(got - want)) < 1e-8 * np.max(np.abs(got))

    def test_helmholtz_residual(self):
        # (Laplacian + k^2) Phi = 0 away from the source.
        eps = 1e-4
        lap = 0.0
        for j in range(3):
            step = np.zeros(3)
            step[j] = eps
            lap += (phi(X + step, Y, K) - 2 * phi(X, Y, K) + phi(X - step, Y, K)) / eps**2
        assert abs(lap + K**2 * phi(X, Y, K)) < 1e-6 * abs(phi(X, Y, K))

    def test_coincident_points_rejected(self):
        with pytest.raises(SingularPointError):
            phi(X, X, K)
        with pytest.raises(SingularPointError):
            green_tensor(X, X + 1e-12, K)

    def test_bad_wavenumber_rejected(self):
        for bad in (0.0, -1.0, np.nan):
            with pytest.raises(InvalidArgumentError):
                phi(X, Y, bad)


class TestGreenTensor:
    def test_symmetry_in_arguments(self):
        # G(x, y) = G(y, x)^T, and here G is itself complex-symmetric.
        gxy = green_tensor(X, Y, K)
        gyx = green_tensor(Y, X, K)
        assert np.allclose(gxy, gyx.T, rtol=0, atol=1e-16)
        assert np.allclose(gxy, gxy.T, rtol=0, atol=1e-16)

    def test_matches_curl_curl_definition(self):
        # G p = (i/k) curl curl (Phi p), checked by nested finite differences.
        def field(x):
            return phi(x, Y, K) * P

        cc = fd_curl(lambda z: fd_curl(field, z, eps=1e-4), X, eps=1e-4)
        want = (1j / K) * cc
        got = green_tensor(X, Y, K) @ P
        assert np.max(np.abs(got - want)) < 1e-5 * np.max(np.abs(got))

    def test_linearity_in_polarization(self):
        g = green_tensor(X, Y, K)
        p2 = np.array([0.1, 0.2, -0.5])
        lhs = g @ (2.0 * P - 3.0 * p2)
        rhs = 2.0 * (g @ P) - 3.0 * (g @ p2)
        assert np.allclose(lhs, rhs, rtol=1e-14)

    def test_far_field_decay(self):
        # Radiating fields decay like 1/r: doubling a large radius halves
        # the magnitude to within a 1/r^2 correction.
        direction = np.array([1.0, 2.0, 2.0]) / 3.0
        wavelength = 2 * np.pi / K
        e50 = incident_field(50 * wavelength * direction, Dipole(Y, P), K)
        e100 = incident_field(100 * wavelength * direction, Dipole(Y, P), K)
        ratio = np.linalg.norm(e100) / np.linalg.norm(e50)
        assert ratio == pytest.approx(0.5, rel=0.02)

    def test_green_apply_matches_tensor(self):
        pts = np.array([X, X + 0.3, X - 0.2])
        got = green_apply(pts, Y, P, K)
        want = np.array([green_tensor(x, Y, K) @ P for x in pts])
        assert np.allclose(got, want, rtol=1e-14)


class TestDipoleField:
    def test_curl_matches_finite_difference(self):
        d = Dipole(Y, P)
        got = curl_incident_field(X, d, K)
        want = fd_curl(lambda x: incident_field(x, d, K), X)
        assert np.max(np.abs(got - want)) < 1e-7 * np.max(np.abs(got))

    def test_field_solves_maxwell(self):
        # curl curl E = k^2 E away from the source.
        d = Dipole(Y, P)
        cc = fd_curl(
            lambda z: fd_curl(lambda x: incident_field(x, d, K), z, eps=1e-4),
            X,
            eps=1e-4,
        )
        want = K**2 * incident_field(X, d, K)
        assert np.max(np.abs(cc - want)) < 1e-4 * np.max(np.abs(want))

    def test_dipole_validation(self):
        with pytest.raises(InvalidArgumentError):
            Dipole(np.zeros(2), P)
        with pytest.raises(InvalidArgumentError):
            Dipole(Y, np.array([np.inf, 0, 0]))
