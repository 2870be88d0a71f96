"""Linear sampling engine: near-field right-hand sides, SVD-based Tikhonov
solves with Morozov's discrepancy principle, and the 3D imaging function.

For each sampling point z the discretized near-field equation

    sum_m sum_j w_j g_m(y_j) e_m(y_j) . E_s(x_i, y_j, e_l(x_i))
        = e_l(x_i) . G(x_i, z) h

is solved in regularized form; the imaging function is the normalized
reciprocal of the weighted density norm, large outside the cavity and small
inside, plotted in log scale with points inside the measurement ball masked
to 0.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError
from .green import check_wavenumber, green_apply
from .measurement import NearFieldMatrix, SphereGrid

# Morozov bisection bracket relative to sigma_1^2, and stopping width in
# log10 units of alpha.  The width must be tight enough that the discrepancy
# equation holds to 1e-6 relative at the returned root.
ALPHA_LO_FACTOR = 1e-14
ALPHA_LOG10_TOL = 1e-8
ALPHA_MAX_STEPS = 200

_CHUNK = 2048


@dataclass(frozen=True)
class SvdFactorization:
    """Full SVD of the quadrature-weighted near-field matrix."""

    u: np.ndarray
    s: np.ndarray
    vh: np.ndarray
    weights2: np.ndarray  # per-column quadrature weight (w_j repeated per tangent)
    grid: SphereGrid
    k: float | None = None

    @property
    def norm2(self) -> float:
        return float(self.s[0])


def svd_factorize(matrix: NearFieldMatrix, k: float | None = None) -> SvdFactorization:
    """SVD of A[(i,l),(j,m)] = w_j S[(i,l),(j,m)]."""
    if not np.all(np.isfinite(matrix.entries)):
        raise InvalidArgumentError("near-field matrix has non-finite entries")
    w2 = np.repeat(matrix.grid.weights, 2)
    a = matrix.entries * w2[None, :]
    u, s, vh = np.linalg.svd(a)
    return SvdFactorization(u=u, s=s, vh=vh, weights2=w2, grid=matrix.grid, k=k)


def rhs_vector(z: np.ndarray, h_pol: np.ndarray, grid: SphereGrid, k: float) -> np.ndarray:
    """b[(i, l)] = e_l(x_i) . G(x_i, z) h for one sampling point."""
    return rhs_matrix(np.asarray(z, dtype=float)[None, :], h_pol, grid, k)[:, 0]


def rhs_matrix(z: np.ndarray, h_pol: np.ndarray, grid: SphereGrid, k: float) -> np.ndarray:
    """Right-hand sides for a batch of sampling points, shape (2n, n_z)."""
    check_wavenumber(k)
    z = np.atleast_2d(np.asarray(z, dtype=float))
    if np.any(np.abs(np.linalg.norm(z, axis=1) - grid.radius) <= 1e-9):
        raise InvalidArgumentError(
            "sampling point lies on the measurement sphere; rhs is singular"
        )
    # gz[i, t, :] = G(x_i, z_t) h
    gz = green_apply(grid.nodes[:, None, :], z[None, :, :], h_pol, k)
    frames = np.stack([grid.e1, grid.e2], axis=1)  # (n, 2, 3)
    b = np.einsum("ilc,itc->ilt", frames, gz)
    return b.reshape(-1, z.shape[0])


@dataclass(frozen=True)
class TikhonovSolution:
    """Regularized density for one sampling point."""

    g: np.ndarray
    alpha: float
    discrepancy: float
    g_norm_discrete: float
    morozov_flagged: bool = False


def _filter_sums(s: np.ndarray, beta_abs2: np.ndarray, alpha: np.ndarray):
    """Residual^2 and ||g||_2^2 of the Tikhonov solution in the SVD basis.

    s: (r,), beta_abs2: (r, n_z), alpha: (n_z,).
    """
    s2 = (s * s)[:, None]
    denom = s2 + alpha[None, :]
    res2 = np.sum((alpha[None, :] / denom) ** 2 * beta_abs2, axis=0)
    gn2 = np.sum((s[:, None] / denom) ** 2 * beta_abs2, axis=0)
    return res2, gn2


def _morozov_bisect(
    s: np.ndarray, beta_abs2: np.ndarray, h: float
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized bisection for the discrepancy roots of many columns.

    Solves ||A g_a - b|| = h ||A|| ||g_a|| per column on a log-alpha bracket;
    the left side minus right side is monotone increasing in alpha.  Columns
    whose bracket shows no sign change are clamped to the appropriate
    endpoint and flagged.
    """
    n_z = beta_abs2.shape[1]
    sigma1 = s[0]
    lo = np.full(n_z, np.log10(ALPHA_LO_FACTOR * sigma1**2))
    hi = np.full(n_z, np.log10(sigma1**2))
    flagged = np.zeros(n_z, dtype=bool)

    def d(log_alpha):
        res2, gn2 = _filter_sums(s, beta_abs2, 10.0**log_alpha)
        return np.sqrt(res2) - h * sigma1 * np.sqrt(gn2)

    if h == 0:
        return 10.0**lo, np.ones(n_z, dtype=bool)
    d_lo, d_hi = d(lo), d(hi)
    clamp_lo = d_lo >= 0
    clamp_hi = d_hi <= 0
    flagged = clamp_lo | clamp_hi
    for _ in range(ALPHA_MAX_STEPS):
        if np.all((hi - lo) < ALPHA_LOG10_TOL):
            break
        mid = 0.5 * (lo + hi)
        pos = d(mid) >= 0
        hi = np.where(pos, mid, hi)
        lo = np.where(pos, lo, mid)
    alpha = 10.0 ** (0.5 * (lo + hi))
    alpha = np.where(clamp_lo, ALPHA_LO_FACTOR * sigma1**2, alpha)
    alpha = np.where(clamp_hi, sigma1**2, alpha)
    return alpha, flagged


def tikhonov_solve(
    svd: SvdFactorization, b: np.ndarray, alpha: float
) -> TikhonovSolution:
    """Spectral Tikhonov solution g = sum_i s_i/(s_i^2 + alpha) (u_i* b) v_i."""
    if alpha <= 0:
        raise InvalidArgumentError("alpha must be positive")
    beta = svd.u.conj().T @ b
    filt = svd.s / (svd.s**2 + alpha)
    g = svd.vh.conj().T @ (filt * beta)
    res2, _ = _filter_sums(svd.s, np.abs(beta[:, None]) ** 2, np.array([alpha]))
    g_norm_disc = float(np.sqrt(np.sum(svd.weights2 * np.abs(g) ** 2)))
    return TikhonovSolution(
        g=g,
        alpha=float(alpha),
        discrepancy=float(np.sqrt(res2[0])),
        g_norm_discrete=g_norm_disc,
    )


def morozov_alpha(
    svd: SvdFactorization, b: np.ndarray, h: float
) -> tuple[float, bool]:
    """Root of ||A g_a - b|| = h ||A|| ||g_a||; returns (alpha, flagged)."""
    if h < 0:
        raise InvalidArgumentError("noise level must be nonnegative")
    if not np.any(b):
        raise InvalidArgumentError("right-hand side is zero")
    beta = svd.u.conj().T @ b
    alpha, flagged = _morozov_bisect(svd.s, np.abs(beta[:, None]) ** 2, h)
    return float(alpha[0]), bool(flagged[0])


def indicator_at(
    z: np.ndarray,
    h_pol: np.ndarray,
    svd: SvdFactorization,
    grid: SphereGrid,
    k: float,
    h_noise: float,
) -> tuple[float, TikhonovSolution]:
    """Unnormalized indicator 1/||g_z|| (weighted norm) at one sampling point."""
    b = rhs_vector(z, h_pol, grid, k)
    alpha, flagged = morozov_alpha(svd, b, h_noise)
    sol = tikhonov_solve(svd, b, alpha)
    sol = TikhonovSolution(
        g=sol.g,
        alpha=sol.alpha,
        discrepancy=sol.discrepancy,
        g_norm_discrete=sol.g_norm_discrete,
        morozov_flagged=flagged,
    )
    return 1.0 / sol.g_norm_discrete, sol


@dataclass(frozen=True)
class SamplingGrid:
    """Axis-aligned lattice of sampling points with a spherical mask."""

    bounds: np.ndarray  # (3, 2)
    spacing: float
    mask_radius: float
    points: np.ndarray  # (P, 3), x fastest
    shape: tuple[int, int, int]  # (nx, ny, nz)
    active: np.ndarray  # (P,) bool, True outside the mask

    @property
    def n_points(self) -> int:
        return self.points.shape[0]


def build_sampling_grid(
    bounds, spacing: float, mask_radius: float
) -> SamplingGrid:
    """Lattice over the box; points with |z| <= mask_radius are masked.

    The mask carries a 1e-9 guard band so lattice points that land on the
    measurement sphere to rounding error count as masked rather than hitting
    the singular right-hand side.
    """
    if spacing <= 0:
        raise InvalidArgumentError("spacing must be positive")
    bounds = np.asarray(bounds, dtype=float).reshape(3, 2)
    axes = [
        lo + spacing * np.arange(int(np.floor((hi - lo) / spacing + 0.5)) + 1)
        for lo, hi in bounds
    ]
    nx, ny, nz = (len(a) for a in axes)
    zz, yy, xx = np.meshgrid(axes[2], axes[1], axes[0], indexing="ij")
    points = np.stack([xx.ravel(), yy.ravel(), zz.ravel()], axis=1)
    active = np.linalg.norm(points, axis=1) > mask_radius + 1e-9
    return SamplingGrid(
        bounds=bounds,
        spacing=float(spacing),
        mask_radius=float(mask_radius),
        points=points,
        shape=(nx, ny, nz),
        active=active,
    )


@dataclass(frozen=True)
class ImagingField:
    """Normalized indicator over a sampling grid plus its masked log version."""

    grid: SamplingGrid
    indicator: np.ndarray
    log_indicator: np.ndarray


def _worker_count() -> int:
    env = os.environ.get("NFEM_THREADS", "0")
    try:
        n = int(env)
    except ValueError:
        n = 0
    if n <= 0:
        n = min(4, os.cpu_count() or 1)
    return n


def _sweep_chunk(svd, grid, k, h_pol, h_noise, pts):
    """1/||g_z|| for a chunk of sampling points (weighted density norm)."""
    b = rhs_matrix(pts, h_pol, grid, k)
    beta = svd.u.conj().T @ b
    alpha, _ = _morozov_bisect(svd.s, np.abs(beta) ** 2, h_noise)
    filt = svd.s[:, None] / (svd.s[:, None] ** 2 + alpha[None, :])
    g = svd.vh.conj().T @ (filt * beta)
    gnorm = np.sqrt(np.sum(svd.weights2[:, None] * np.abs(g) ** 2, axis=0))
    return 1.0 / gnorm


def run_imaging(
    data: NearFieldMatrix,
    grid: SamplingGrid,
    h_pol: np.ndarray,
    h_noise: float,
    svd: SvdFactorization | None = None,
    k: float | None = None,
) -> ImagingField:
    """Full indicator sweep: I normalized to max 1 over active points,
    log10(I) with masked points set to 0.

    The SVD is computed once and shared by every sampling point; chunks of
    points are independent, so the result is bitwise identical for any
    worker count.
    """
    if svd is None:
        svd = svd_factorize(data, k=k)
    if k is None:
        k = svd.k
    if k is None:
        raise InvalidArgumentError("wavenumber required (pass k or a tagged SVD)")
    active_idx = np.nonzero(grid.active)[0]
    if active_idx.size == 0:
        raise InvalidArgumentError("sampling grid has no active points")
    raw = np.zeros(grid.n_points)
    chunks = [
        active_idx[i : i + _CHUNK] for i in range(0, active_idx.size, _CHUNK)
    ]
    sphere = svd.grid

    def work(idx):
        return idx, _sweep_chunk(svd, sphere, k, h_pol, h_noise, grid.points[idx])

    n_workers = _worker_count()
    if n_workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            for idx, vals in pool.map(work, chunks):
                raw[idx] = vals
    else:
        for idx in chunks:
            raw[idx] = work(idx)[1]
    peak = np.max(raw[active_idx])
    indicator = raw / peak
    log_ind = np.zeros(grid.n_points)
    log_ind[active_idx] = np.log10(indicator[active_idx])
    return ImagingField(grid=grid, indicator=indicator, log_indicator=log_ind)


def single_layer_eval(
    g: np.ndarray, x: np.ndarray, grid: SphereGrid, k: float
) -> np.ndarray:
    """Electric single layer potential sum_j w_j G(x, y_j) g(y_j), g tangential."""
    check_wavenumber(k)
    x = np.asarray(x, dtype=float)
    if abs(np.linalg.norm(x) - grid.radius) <= 1e-9:
        raise InvalidArgumentError("evaluation point lies on the measurement sphere")
    g = np.asarray(g).reshape(grid.n_nodes, 2)
    density = g[:, 0, None] * grid.e1 + g[:, 1, None] * grid.e2
    diff = x[None, :] - grid.nodes
    r = np.linalg.norm(diff, axis=1)
    p = np.exp(1j * k * r) / (4 * np.pi * r)
    f1 = (1j * k - 1.0 / r) * p
    f2 = ((1j * k - 1.0 / r) ** 2 + 1.0 / r**2) * p
    rhat = diff / r[:, None]
    rd = np.einsum("jc,jc->j", rhat, density.astype(complex))
    gp = (
        f2[:, None] * rd[:, None] * rhat
        + (f1 / r)[:, None] * (density - rd[:, None] * rhat)
    )
    vals = (1j / k) * (k**2 * p[:, None] * density + gp)
    return np.einsum("j,jc->c", grid.weights, vals)
