"""Special-function layer: radial functions, normalized Legendre functions,
and vector spherical wavefunctions checked against independent oracles."""

import math

import numpy as np
import pytest

from nfem import specialfun as sf
from nfem.errors import InvalidArgumentError, SingularPointError


def series_spherical_jn(n: int, t: float, terms: int = 60) -> float:
    """Taylor-series oracle: j_n(t) = t^n sum_m (-t^2/2)^m / (m! (2n+2m+1)!!)."""
    total = 0.0
    term = 1.0
    for m in range(terms):
        dfact = 1.0
        for q in range(2 * n + 2 * m + 1, 0, -2):
            dfact *= q
        total += term / dfact
        term *= -t * t / 2.0 / (m + 1)
    return t**n * total


class TestRadial:
    def test_bessel_matches_taylor_series(self):
        table = sf.sph_bessel_table(8, 2.0)
        for n in range(9):
            assert table.j_values[n] == pytest.approx(
                series_spherical_jn(n, 2.0), rel=1e-12
            )

    def test_hankel_low_order_closed_forms(self):
        t = 1.7
        h, hp = sf.sph_hankel1(1, t)
        # h_0(t) = -i e^{it}/t, h_1(t) = -(1 + i/t) e^{it}/t
        assert h[0] == pytest.approx(-1j * np.exp(1j * t) / t, rel=1e-14)
        assert h[1] == pytest.approx(
            -(1 + 1j / t) * np.exp(1j * t) / t, rel=1e-14
        )
        # d/dt h_0 = -h_1
        assert hp[0] == pytest.approx(-h[1], rel=1e-14)

    def test_wronskian_identity(self):
        # j_n(t) y_n'(t) - j_n'(t) y_n(t) = 1/t^2
        for t in (0.3, 1.0, 4.7, 21.0):
            tab = sf.sph_bessel_table(12, t)
            w = tab.j_values * tab.y_derivs - tab.j_derivs * tab.y_values
            assert np.max(np.abs(w - 1.0 / t**2)) < 1e-10 / t**2

    def test_recurrence_residual(self):
        # (2n+1) z_n(t) = t (z_{n-1}(t) + z_{n+1}(t))
        t = 3.1
        j = sf.sph_bessel_table(15, t)
        n = np.arange(1, 15)
        lhs = (2 * n + 1) * j.j_values[n]
        rhs = t * (j.j_values[n - 1] + j.j_values[n + 1])
        assert np.max(np.abs(lhs - rhs)) < 1e-10 * np.max(np.abs(lhs))

    def test_riccati_consistency(self):
        # psi_n(t) = t j_n(t), psi_n'(t) = j_n(t) + t j_n'(t)
        t = 2.6
        j = sf.sph_bessel_table(6, t)
        vals, derivs = sf.riccati(6, t, kind=1)
        assert np.allclose(vals, t * j.j_values, rtol=1e-14)
        assert np.allclose(derivs, j.j_values + t * j.j_derivs, rtol=1e-13)

    def test_order_cap(self):
        with pytest.raises(InvalidArgumentError):
            sf.sph_bessel_table(sf.ORDER_CAP + 1, 1.0)


def legendre_recurrence(n_max: int, m: int, x: float) -> list[float]:
    """Unnormalized P_n^m(x) by the standard upward recurrence (with the
    Condon-Shortley phase), an oracle independent of the library path."""
    pmm = 1.0
    somx2 = math.sqrt((1.0 - x) * (1.0 + x))
    fact = 1.0
    for _ in range(m):
        pmm *= -fact * somx2
        fact += 2.0
    out = {m: pmm}
    if n_max > m:
        out[m + 1] = x * (2 * m + 1) * pmm
    for n in range(m + 2, n_max + 1):
        out[n] = ((2 * n - 1) * x * out[n - 1] - (n + m - 1) * out[n - 2]) / (n - m)
    return [out[n] for n in range(m, n_max + 1)]


def norm_factor(n: int, m: int) -> float:
    return math.sqrt(
        (2 * n + 1) / (4 * math.pi) * math.factorial(n - m) / math.factorial(n + m)
    )


class TestLegendre:
    @pytest.mark.parametrize("m", [0, 1, 2, 5])
    def test_matches_recurrence_oracle(self, m):
        xs = np.linspace(-0.999, 0.999, 100)
        for n in range(max(m, 1), 13):
            got = np.array([sf.assoc_legendre(n, m, x)[0] for x in xs])
            want = np.array(
                [legendre_recurrence(n, m, x)[n - m] for x in xs]
            )
            scale = max(np.max(np.abs(want)), 1e-300)
            assert np.max(np.abs(got - want)) < 1e-11 * scale

    def test_theta_derivative_finite_difference(self):
        eps = 1e-6
        for n, m in [(1, 0), (3, 1), (5, 2), (8, 4)]:
            for theta in (0.4, 1.1, 2.3):
                _, dp = sf.assoc_legendre(n, m, math.cos(theta))
                p_hi = sf.assoc_legendre(n, m, math.cos(theta + eps))[0]
                p_lo = sf.assoc_legendre(n, m, math.cos(theta - eps))[0]
                fd = (p_hi - p_lo) / (2 * eps)
                assert dp == pytest.approx(fd, rel=1e-7, abs=1e-9)

    def test_pole_values(self):
        # m = 0 is regular at the poles; m >= 2 vanishes together with its
        # theta-derivative, handled through the tangential-function path.
        p, dp = sf.assoc_legendre(3, 0, 1.0)
        assert p == pytest.approx(1.0, rel=1e-14)  # P_n(1) = 1
        assert dp == pytest.approx(0.0, abs=1e-14)
        with pytest.raises(InvalidArgumentError):
            sf.assoc_legendre(3, 2, 1.0)

    def test_tangential_functions_pole_limits(self):
        # For m = 1 both tau and pi tend to -lambda n(n+1)/2 at the north pole;
        # approach the axis and compare against the stored limit.
        n, m = 3, 1
        eps = 1e-4
        cos_t = np.array([np.cos(eps), 1.0])
        sin_t = np.array([np.sin(eps), 0.0])
        tau, pi_f = sf._tau_pi(n, m, cos_t, sin_t)
        assert tau[1] == pytest.approx(tau[0], rel=1e-6)
        assert pi_f[1] == pytest.approx(pi_f[0], rel=1e-6)
        lam = sf._norm_factor(n, m)
        assert tau[1] == pytest.approx(-lam * n * (n + 1) / 2.0, rel=1e-13)


def fd_curl(f, x, eps=1e-5):
    """Second-order finite-difference curl of a vector field f: R^3 -> C^3."""
    jac = np.zeros((3, 3), dtype=complex)
    for j in range(3):
        step = np.zeros(3)
        step[j] = eps
        jac[:, j] = (f(x + step) - f(x - step)) / (2 * eps)
    return np.array(
        [jac[2, 1] - jac[1, 2], jac[0, 2] - jac[2, 0], jac[1, 0] - jac[0, 1]]
    )


def fd_div(f, x, eps=1e-5):
    out = 0.0
    for j in range(3):
        step = np.zeros(3)
        step[j] = eps
        out += (f(x + step)[j] - f(x - step)[j]) / (2 * eps)
    return out


class TestVswf:
    K = 0.9
    POINTS = [np.array(p) for p in [(0.7, -0.4, 0.9), (1.3, 0.2, -0.5)]]

    def field(self, which, n, m, kind):
        def f(x):
            return sf.vswf_eval(which, kind, n, m, self.K, x).field

        return f

    @pytest.mark.parametrize("kind", [1, 3])
    @pytest.mark.parametrize("n,m", [(1, 0), (2, 1), (3, -2), (4, 4)])
    def test_divergence_free(self, n, m, kind):
        for x in self.POINTS:
            for which in ("M", "N"):
                f = self.field(which, n, m, kind)
                scale = max(np.max(np.abs(f(x))), 1e-12)
                assert abs(fd_div(f, x)) < 5e-6 * self.K * scale

    @pytest.mark.parametrize("kind", [1, 3])
    @pytest.mark.parametrize("n,m", [(1, 1), (2, -1), (3, 2)])
    def test_curl_relations(self, n, m, kind):
        # curl M = k N and curl N = k M
        for x in self.POINTS:
            fm = self.field("M", n, m, kind)
            fn = self.field("N", n, m, kind)
            scale = max(np.max(np.abs(fn(x))), np.max(np.abs(fm(x))), 1e-12)
            assert np.max(np.abs(fd_curl(fm, x) - self.K * fn(x))) < 1e-5 * scale
            assert np.max(np.abs(fd_curl(fn, x) - self.K * fm(x))) < 1e-5 * scale

    def test_curl_curl_eigenrelation(self):
        # curl curl M = k^2 M via the two first-order relations; checked
        # directly with a nested finite difference at looser tolerance.
        n, m, kind = 2, 1, 1
        fm = self.field("M", n, m, kind)
        x = self.POINTS[0]
        cc = fd_curl(lambda p: fd_curl(fm, p, eps=1e-4), x, eps=1e-4)
        want = self.K**2 * fm(x)
        assert np.max(np.abs(cc - want)) < 1e-4 * max(np.max(np.abs(want)), 1e-12)

    def test_m_field_tangential(self):
        for x in self.POINTS:
            for n, m in [(1, 0), (3, 2)]:
                val = sf.vswf_eval("M", 1, n, m, self.K, x)
                assert abs(val.field @ x) < 1e-13 * np.linalg.norm(x)

    def test_conjugation_symmetry(self):
        # Regular VSWFs obey conj(F_{n,m}) = (-1)^m F_{n,-m}.
        x = self.POINTS[0]
        for n, m in [(2, 1), (3, 3), (4, 2)]:
            sign = (-1.0) ** m
            for fam in ("M", "N"):
                a = sf.vswf_eval(fam, 1, n, m, self.K, x)
                b = sf.vswf_eval(fam, 1, n, -m, self.K, x)
                assert np.allclose(np.conj(a.field), sign * b.field, atol=1e-14)

    def test_batch_matches_single(self):
        pts = np.array(self.POINTS)
        m_all, n_all = sf.vswf_fields(pts, self.K, 3, 1)
        modes = sf.vswf_modes(3)
        for q, (n, m) in enumerate(modes):
            for i, x in enumerate(self.POINTS):
                vm = sf.vswf_eval("M", 1, n, m, self.K, x)
                vn = sf.vswf_eval("N", 1, n, m, self.K, x)
                assert np.allclose(m_all[q, i], vm.field, atol=1e-15)
                assert np.allclose(n_all[q, i], vn.field, atol=1e-15)

    def test_mode_ordering(self):
        modes = sf.vswf_modes(2)
        assert modes == [(1, -1), (1, 0), (1, 1), (2, -2), (2, -1), (2, 0), (2, 1), (2, 2)]

    def test_origin_rejected_for_radiating(self):
        with pytest.raises(SingularPointError):
            sf.vswf_eval("M", 3, 1, 0, self.K, np.zeros(3))
