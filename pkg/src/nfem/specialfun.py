"""Spherical Bessel/Hankel functions, Riccati-Bessel pairs, associated
Legendre functions, and vector spherical wavefunctions (VSWFs).

Conventions
-----------
Spherical harmonics are fully normalized,

    Y_nm(theta, phi) = sqrt((2n+1)/(4 pi) (n-m)!/(n+m)!) P_n^m(cos theta) e^{i m phi},

with the Condon-Shortley phase included in P_n^m.  The wavefunctions are

    M_nm = z_n(kr) C_nm,
    N_nm = sqrt(n(n+1)) z_n(kr)/(kr) Y_nm rhat + psi_n'(kr)/(kr) B_nm,

where psi_n(t) = t z_n(t), z_n is the spherical Bessel function j_n
(kind 1, regular) or Hankel function h_n^(1) (kind 3, radiating), and
B_nm, C_nm are the orthonormal tangential vector harmonics

    B_nm = (tau thetahat + i pi phihat) e^{i m phi} / sqrt(n(n+1)),
    C_nm = (i pi thetahat - tau phihat) e^{i m phi} / sqrt(n(n+1)),

with tau = d/dtheta of the normalized Legendre part and
pi = m/(sin theta) times it.  With this choice curl M = k N and
curl N = k M, and both families are divergence free.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, lpmv, spherical_jn, spherical_yn

from .errors import InvalidArgumentError, SingularPointError

# Upward recurrence of y_n overflows silently well before this; keep a hard cap.
ORDER_CAP = 200


def _check_order(order_max: int) -> None:
    if order_max < 0:
        raise InvalidArgumentError(f"order_max must be >= 0, got {order_max}")
    if order_max > ORDER_CAP:
        raise InvalidArgumentError(
            f"order_max {order_max} exceeds the hard cap {ORDER_CAP}"
        )


def _check_argument(t: float) -> None:
    if not np.isfinite(t) or t <= 0:
        raise InvalidArgumentError(f"argument must be positive and finite, got {t}")


@dataclass(frozen=True)
class RadialTable:
    """j_n, y_n and first derivatives for n = 0..order_max at one argument."""

    order_max: int
    argument: float
    j_values: np.ndarray
    y_values: np.ndarray
    j_derivs: np.ndarray
    y_derivs: np.ndarray


def sph_bessel_table(order_max: int, t: float) -> RadialTable:
    """Tabulate spherical Bessel functions of both kinds with derivatives."""
    _check_order(order_max)
    _check_argument(t)
    n = np.arange(order_max + 1)
    return RadialTable(
        order_max=order_max,
        argument=float(t),
        j_values=spherical_jn(n, t),
        y_values=spherical_yn(n, t),
        j_derivs=spherical_jn(n, t, derivative=True),
        y_derivs=spherical_yn(n, t, derivative=True),
    )


def sph_hankel1(order_max: int, t: float) -> tuple[np.ndarray, np.ndarray]:
    """h_n^(1) = j_n + i y_n and its derivative for n = 0..order_max."""
    table = sph_bessel_table(order_max, t)
    h = table.j_values + 1j * table.y_values
    hp = table.j_derivs + 1j * table.y_derivs
    return h, hp


def riccati(order_max: int, t: float, kind: int) -> tuple[np.ndarray, np.ndarray]:
    """Riccati functions psi_n(t) = t z_n(t) and psi_n'(t) = z_n + t z_n'."""
    if kind not in (1, 3):
        raise InvalidArgumentError(f"kind must be 1 or 3, got {kind}")
    if kind == 1:
        table = sph_bessel_table(order_max, t)
        z, zp = table.j_values, table.j_derivs
    else:
        z, zp = sph_hankel1(order_max, t)
    return t * z, z + t * zp


def assoc_legendre(n: int, m: int, x: float) -> tuple[float, float]:
    """P_n^m(x) (Condon-Shortley phase included) and d/dtheta P_n^m(cos theta).

    The second return value is the theta-derivative evaluated where
    cos theta = x, not the x-derivative.
    """
    if m < 0 or m > n:
        raise InvalidArgumentError(f"need 0 <= m <= n, got n={n}, m={m}")
    if abs(x) > 1:
        raise InvalidArgumentError(f"|x| must be <= 1, got {x}")
    if abs(x) == 1.0:
        # Analytic pole limits; tangential-harmonic grids never hit the poles.
        sign = 1.0 if x > 0 else (-1.0) ** n
        if m == 0:
            return float(sign if x > 0 else (-1.0) ** n), 0.0
        if m == 1:
            # P_n^1 ~ -sin(theta) n(n+1)/2 near x=1 (CS phase).
            dtheta = -n * (n + 1) / 2.0
            return 0.0, float(dtheta if x > 0 else -((-1.0) ** n) * dtheta)
        raise InvalidArgumentError(
            f"theta-derivative undefined at the pole for m={m} >= 2"
        )
    p = float(lpmv(m, n, x))
    sin_t = float(np.sqrt(1.0 - x * x))
    # (1-x^2) dP/dx = (n+m) P_{n-1}^m - n x P_n^m;  d/dtheta = -sin(theta) d/dx.
    p_prev = float(lpmv(m, n - 1, x)) if n - 1 >= m else 0.0
    dtheta = -((n + m) * p_prev - n * x * p) / sin_t
    return p, dtheta


def _norm_factor(n: np.ndarray | int, m: np.ndarray | int) -> np.ndarray:
    """sqrt((2n+1)/(4 pi) (n-m)!/(n+m)!)."""
    n = np.asarray(n, dtype=float)
    m = np.asarray(m, dtype=float)
    return np.sqrt(
        (2 * n + 1) / (4 * np.pi) * np.exp(gammaln(n - m + 1) - gammaln(n + m + 1))
    )


def _tau_pi(n: int, m: int, cos_t: np.ndarray, sin_t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Normalized tangential Legendre functions for m >= 0.

    tau = lambda_nm d/dtheta P_n^m(cos theta), pi = lambda_nm m P_n^m / sin theta,
    with analytic limits on the polar axis.
    """
    lam = _norm_factor(n, m)
    tau = np.zeros_like(cos_t)
    pi_f = np.zeros_like(cos_t)
    on_pole = sin_t < 1e-13
    off = ~on_pole
    if np.any(off):
        x, s = cos_t[off], sin_t[off]
        p = lpmv(m, n, x)
        p_prev = lpmv(m, n - 1, x) if n - 1 >= m else np.zeros_like(x)
        tau[off] = -lam * ((n + m) * p_prev - n * x * p) / s
        pi_f[off] = lam * m * p / s
    if np.any(on_pole) and m == 1:
        north = on_pole & (cos_t > 0)
        south = on_pole & (cos_t < 0)
        base = -lam * n * (n + 1) / 2.0
        tau[north] = base
        pi_f[north] = base
        tau[south] = -((-1.0) ** n) * base
        pi_f[south] = ((-1.0) ** n) * base
    # m = 0 and m >= 2: both limits vanish on the axis.
    return tau, pi_f


def _radial_parts(
    n: int, kind: int, t: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """z_n(t), z_n(t)/t and psi_n'(t)/t with the regular t->0 limit for kind 1."""
    z_over_t = np.empty_like(t, dtype=complex)
    psip_over_t = np.empty_like(t, dtype=complex)
    z = np.empty_like(t, dtype=complex)
    small = t < 1e-6
    big = ~small
    if np.any(big):
        tb = t[big]
        if kind == 1:
            zb = spherical_jn(n, tb)
            zpb = spherical_jn(n, tb, derivative=True)
        else:
            zb = spherical_jn(n, tb) + 1j * spherical_yn(n, tb)
            zpb = spherical_jn(n, tb, derivative=True) + 1j * spherical_yn(
                n, tb, derivative=True
            )
        z[big] = zb
        z_over_t[big] = zb / tb
        psip_over_t[big] = (zb + tb * zpb) / tb
    if np.any(small):
        if kind == 3:
            raise SingularPointError(
                "radiating wavefunction evaluated at the origin"
            )
        ts = t[small]
        # j_n(t) ~ t^n / (2n+1)!!
        dfact = float(np.prod(np.arange(2 * n + 1, 0, -2)))
        z[small] = ts**n / dfact
        z_over_t[small] = ts ** (n - 1) / dfact
        psip_over_t[small] = (n + 1) * ts ** (n - 1) / dfact
    return z, z_over_t, psip_over_t


@dataclass(frozen=True)
class VswfValue:
    """One vector spherical wavefunction value in Cartesian components."""

    field: np.ndarray
    kind: int
    family: str
    degree: int
    order: int


def _spherical_frame(points: np.ndarray) -> tuple[np.ndarray, ...]:
    """r, cos/sin theta, cos/sin phi and the local unit vectors at each point."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    r = np.linalg.norm(pts, axis=1)
    rho = np.hypot(pts[:, 0], pts[:, 1])
    with np.errstate(invalid="ignore", divide="ignore"):
        cos_t = np.where(r > 0, pts[:, 2] / np.where(r > 0, r, 1.0), 1.0)
    sin_t = rho / np.where(r > 0, r, 1.0)
    on_axis = rho < 1e-300
    cos_p = np.where(on_axis, 1.0, pts[:, 0] / np.where(on_axis, 1.0, rho))
    sin_p = np.where(on_axis, 0.0, pts[:, 1] / np.where(on_axis, 1.0, rho))
    rhat = np.stack([sin_t * cos_p, sin_t * sin_p, cos_t], axis=1)
    that = np.stack([cos_t * cos_p, cos_t * sin_p, -sin_t], axis=1)
    phat = np.stack([-sin_p, cos_p, np.zeros_like(sin_p)], axis=1)
    phi = np.arctan2(pts[:, 1], pts[:, 0])
    return pts, r, cos_t, sin_t, phi, rhat, that, phat


def vswf_modes(n_max: int) -> list[tuple[int, int]]:
    """Mode enumeration (n, m), n = 1..n_max, m = -n..n, in a fixed order."""
    return [(n, m) for n in range(1, n_max + 1) for m in range(-n, n + 1)]


def vswf_fields(
    points: np.ndarray, k: float, n_max: int, kind: int
) -> tuple[np.ndarray, np.ndarray]:
    """Evaluate all M and N wavefunctions up to degree n_max at many points.

    Returns arrays of shape (n_modes, n_points, 3) in the order of
    ``vswf_modes(n_max)``.
    """
    if kind not in (1, 3):
        raise InvalidArgumentError(f"kind must be 1 or 3, got {kind}")
    if k <= 0:
        raise InvalidArgumentError(f"wavenumber must be positive, got {k}")
    _check_order(n_max)
    pts, r, cos_t, sin_t, phi, rhat, that, phat = _spherical_frame(points)
    if kind == 3 and np.any(r < 1e-12):
        raise SingularPointError("radiating wavefunction evaluated at the origin")
    npts = pts.shape[0]
    modes = vswf_modes(n_max)
    m_fields = np.zeros((len(modes), npts, 3), dtype=complex)
    n_fields = np.zeros((len(modes), npts, 3), dtype=complex)
    t = k * r
    idx = 0
    for n in range(1, n_max + 1):
        z, z_over_t, psip_over_t = _radial_parts(n, kind, t)
        s = 1.0 / np.sqrt(n * (n + 1))
        for m in range(-n, n + 1):
            ma = abs(m)
            tau, pi_f = _tau_pi(n, ma, cos_t, sin_t)
            if m < 0:
                # lambda_{n,-m} P_n^{-m} = (-1)^m lambda_nm P_n^m flips pi's sign
                # through the factor m.
                sgn = (-1.0) ** ma
                tau = sgn * tau
                pi_f = -sgn * pi_f
            lam_p = _norm_factor(n, ma) * (
                lpmv(ma, n, cos_t) if ma <= n else np.zeros_like(cos_t)
            )
            if m < 0:
                lam_p = ((-1.0) ** ma) * lam_p
            e_imphi = np.exp(1j * m * phi)
            b_t = s * tau * e_imphi
            b_p = 1j * s * pi_f * e_imphi
            y_nm = lam_p * e_imphi
            # M = z C,  C = i pi that - tau phat  (scaled by s, e^{im phi})
            m_fields[idx] = z[:, None] * (
                b_p[:, None] * that - b_t[:, None] * phat
            )
            n_fields[idx] = (
                (np.sqrt(n * (n + 1)) * z_over_t * y_nm)[:, None] * rhat
                + psip_over_t[:, None] * (b_t[:, None] * that + b_p[:, None] * phat)
            )
            idx += 1
    return m_fields, n_fields


def vswf_eval(
    family: str, kind: int, n: int, m: int, wavenumber: float, point: np.ndarray
) -> VswfValue:
    """Evaluate one VSWF at one point (Cartesian complex 3-vector)."""
    if family not in ("M", "N"):
        raise InvalidArgumentError(f"family must be 'M' or 'N', got {family!r}")
    if n < 1:
        raise InvalidArgumentError(f"degree must be >= 1, got {n}")
    if abs(m) > n:
        raise InvalidArgumentError(f"|m| must be <= n, got n={n}, m={m}")
    m_f, n_f = vswf_fields(np.asarray(point, dtype=float)[None, :], wavenumber, n, kind)
    idx = vswf_modes(n).index((n, m))
    field = m_f[idx, 0] if family == "M" else n_f[idx, 0]
    return VswfValue(field=field, kind=kind, family=family, degree=n, order=m)
