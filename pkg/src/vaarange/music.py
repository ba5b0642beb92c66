"""Joint ToA/DoA super-resolution from a single CFR snapshot.

A single sweep gives one N x M observation, so the covariance is rank-one
unless it is smoothed. Subcarrier spacing is uniform, which makes sliding
sub-band windows along the frequency axis legitimate; the spatial axis is
non-uniform, so no spatial smoothing is attempted. Each length-``subband``
window is vectorized (positions fastest) into an (N*subband)-dimensional
snapshot; the averaged outer products feed a 2-D MUSIC search over a
(theta, tau) grid with the matching joint steering vector.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .exceptions import DimensionMismatchError
from .signal_model import RadioConfig, VaaGeometry, _check_geometry_config

DEFAULT_THETA_GRID = (0.0, np.pi, np.deg2rad(0.25))
DEFAULT_TAU_GRID = (0.0, 400e-9, 0.5e-9)


def grid_points(start: float, stop: float, step: float) -> np.ndarray:
    """Half-open uniform grid [start, stop) with the given step."""
    if not (np.isfinite(step) and step > 0):
        raise ValueError(f"grid step must be positive, got {step}")
    if not stop > start:
        raise ValueError(f"empty grid: stop {stop} <= start {start}")
    n = int(np.floor((stop - start) / step - 1e-9)) + 1
    return start + step * np.arange(n)


@dataclass(frozen=True)
class MusicConfig:
    """Estimator knobs: assumed model order, smoothing window, search grids.

    ``theta_grid`` is (start, stop, step) in radians, ``tau_grid`` in seconds;
    both stops are exclusive. ``refine_factor`` > 1 adds a local fine search
    (step divided by the factor) around each coarse peak, which is needed to
    push quantization error below the estimator's own variance at high SNR.
    """

    model_order: int = 1
    subband: int = 4
    theta_grid: tuple[float, float, float] = DEFAULT_THETA_GRID
    tau_grid: tuple[float, float, float] = DEFAULT_TAU_GRID
    fb_average: bool = False
    refine_factor: int = 20

    def __post_init__(self):
        if self.model_order < 1:
            raise ValueError("model_order must be >= 1")
        if self.subband < 1:
            raise ValueError("subband must be >= 1")
        if self.refine_factor < 1:
            raise ValueError("refine_factor must be >= 1")
        grid_points(*self.theta_grid)
        grid_points(*self.tau_grid)

    @property
    def theta_points(self) -> np.ndarray:
        return grid_points(*self.theta_grid)

    @property
    def tau_points(self) -> np.ndarray:
        return grid_points(*self.tau_grid)


@dataclass(frozen=True)
class EstimateSet:
    """Estimated (theta, tau) pairs, sorted by descending pseudospectrum peak.

    ``degenerate`` is set when the grid held fewer strict local maxima than
    the requested model order and plain grid maxima had to fill in.
    """

    thetas: np.ndarray
    taus: np.ndarray
    peak_values: np.ndarray
    degenerate: bool = False

    def __post_init__(self):
        object.__setattr__(self, "thetas", np.asarray(self.thetas, dtype=float))
        object.__setattr__(self, "taus", np.asarray(self.taus, dtype=float))
        object.__setattr__(self, "peak_values", np.asarray(self.peak_values, dtype=float))


def spatial_covariance(y: np.ndarray) -> np.ndarray:
    """Position-space covariance: average of per-subcarrier column outer products."""
    y = np.asarray(y)
    cov = y @ y.conj().T / y.shape[1]
    return 0.5 * (cov + cov.conj().T)


def smoothed_joint_covariance(y: np.ndarray, subband: int, fb_average: bool = False) -> np.ndarray:
    """Frequency-smoothed covariance of vectorized N x subband windows.

    Averages the outer products of the M - subband + 1 sliding windows, each
    vectorized with the position index running fastest. ``fb_average`` also
    averages with the exchange-conjugated matrix (off by default: the joint
    manifold of a non-uniform array is not conjugate-symmetric).
    """
    y = np.asarray(y)
    n, m = y.shape
    if not 1 <= subband <= m:
        raise ValueError(f"subband must lie in [1, {m}], got {subband}")
    windows = m - subband + 1
    x = np.empty((windows, n * subband), dtype=complex)
    for w in range(windows):
        x[w] = y[:, w : w + subband].reshape(-1, order="F")
    cov = x.T @ x.conj() / windows
    cov = 0.5 * (cov + cov.conj().T)
    if fb_average:
        cov = 0.5 * (cov + cov[::-1, ::-1].conj())
    return cov


def noise_projector(cov: np.ndarray, order: int) -> np.ndarray:
    """Projector onto the noise subspace (all but the ``order`` top eigenvectors).

    Eigenvalues are taken in ascending order as returned by the Hermitian
    eigensolver, so ties resolve deterministically by index.
    """
    dim = cov.shape[0]
    if not 1 <= order < dim:
        raise ValueError(f"model order must lie in [1, {dim - 1}], got {order}")
    if not np.isfinite(cov).all():
        raise ValueError("covariance contains non-finite entries")
    _, vecs = np.linalg.eigh(cov)
    noise = vecs[:, : dim - order]
    return noise @ noise.conj().T


def _steering_tables(
    geometry: VaaGeometry,
    config: RadioConfig,
    thetas: np.ndarray,
    taus: np.ndarray,
    subband: int,
    phase_factor: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Spatial table S (n_theta, N) and frequency table F (n_tau, subband).

    The joint steering vector for (theta, tau) is ``kron(F[u], S[t])`` with the
    position index fastest, matching the window vectorization. ``phase_factor``
    2 gives the doubled-phase manifold of the two-way self-terms.
    """
    d = geometry.displacements
    phi = geometry.directions
    spatial_phase = (
        phase_factor * 2.0 * np.pi / geometry.wavelength
        * d[None, :] * np.cos(thetas[:, None] - phi[None, :])
    )
    s = np.exp(1j * spatial_phase)
    m = np.arange(subband)
    freq_phase = -2.0 * np.pi * config.subcarrier_spacing * phase_factor * np.outer(taus, m)
    f = np.exp(1j * freq_phase)
    return s, f


def _evaluate_spectrum(
    projector: np.ndarray,
    geometry: VaaGeometry,
    config: RadioConfig,
    thetas: np.ndarray,
    taus: np.ndarray,
    phase_factor: float = 1.0,
) -> np.ndarray:
    """P(theta, tau) = 1 / (a^H E_n E_n^H a) evaluated over the grid product.

    Exploits the Kronecker structure of the joint steering vector: the
    quadratic form is contracted over the spatial index per sub-band block,
    then combined across blocks per tau.
    """
    dim = projector.shape[0]
    n = geometry.num_positions
    subband = dim // n
    if subband * n != dim:
        raise DimensionMismatchError(
            f"projector dimension {dim} is not a multiple of the position count {n}"
        )
    s, f = _steering_tables(geometry, config, thetas, taus, subband, phase_factor)
    blocks = projector.reshape(subband, n, subband, n).transpose(0, 2, 1, 3)
    # C[t, b1, b2] = s[t]^H blocks[b1, b2] s[t]
    tmp = np.tensordot(s.conj(), blocks, axes=([1], [2]))
    c = np.einsum("tabn,tn->tab", tmp, s)
    ff = f.conj()[:, :, None] * f[:, None, :]
    denom = c.reshape(len(thetas), -1) @ ff.reshape(len(taus), -1).T
    denom = np.maximum(denom.real, np.finfo(float).tiny)
    return 1.0 / denom


def music_spectrum(
    cov: np.ndarray,
    geometry: VaaGeometry,
    config: RadioConfig,
    mcfg: MusicConfig,
) -> np.ndarray:
    """2-D MUSIC pseudospectrum over the configured grids.

    ``cov`` must be (N*subband) x (N*subband) for some subband in [1, M]; the
    subband length is inferred from the dimensions. Returns a strictly
    positive, finite array of shape (num theta points, num tau points).
    """
    cov = np.asarray(cov)
    _check_geometry_config(geometry, config)
    if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
        raise DimensionMismatchError(f"covariance must be square, got {cov.shape}")
    proj = noise_projector(cov, mcfg.model_order)
    return _evaluate_spectrum(proj, geometry, config, mcfg.theta_points, mcfg.tau_points)


def find_peaks(
    spectrum: np.ndarray,
    order: int,
    thetas: np.ndarray,
    taus: np.ndarray,
) -> EstimateSet:
    """The ``order`` largest strict local maxima (8-neighborhood) of the grid.

    If the grid holds fewer local maxima, the largest otherwise-unused grid
    values pad the result and the estimate set is flagged degenerate.
    """
    spectrum = np.asarray(spectrum)
    if spectrum.size == 0:
        raise ValueError("empty spectrum grid")
    padded = np.full((spectrum.shape[0] + 2, spectrum.shape[1] + 2), -np.inf)
    padded[1:-1, 1:-1] = spectrum
    core = padded[1:-1, 1:-1]
    is_peak = np.ones(spectrum.shape, dtype=bool)
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di == 0 and dj == 0:
                continue
            neighbor = padded[1 + di : padded.shape[0] - 1 + di, 1 + dj : padded.shape[1] - 1 + dj]
            is_peak &= core > neighbor

    flat = spectrum.ravel()
    peak_idx = np.flatnonzero(is_peak.ravel())
    peak_idx = peak_idx[np.argsort(-flat[peak_idx], kind="stable")]
    chosen = list(peak_idx[:order])
    degenerate = len(chosen) < order
    if degenerate:
        rest = np.argsort(-flat, kind="stable")
        taken = set(chosen)
        for idx in rest:
            if len(chosen) >= order:
                break
            if idx not in taken:
                chosen.append(idx)
                taken.add(idx)
    rows, cols = np.unravel_index(np.asarray(chosen, dtype=int), spectrum.shape)
    return EstimateSet(
        thetas=thetas[rows],
        taus=taus[cols],
        peak_values=flat[np.asarray(chosen, dtype=int)],
        degenerate=degenerate,
    )


def _refine_peaks(
    est: EstimateSet,
    projector: np.ndarray,
    geometry: VaaGeometry,
    config: RadioConfig,
    mcfg: MusicConfig,
    phase_factor: float,
) -> EstimateSet:
    """Local fine grid search (+- one coarse step) around each coarse peak."""
    factor = mcfg.refine_factor
    theta_step = mcfg.theta_grid[2]
    tau_step = mcfg.tau_grid[2]
    theta_lo, theta_hi = mcfg.theta_grid[0], mcfg.theta_grid[1]
    tau_lo, tau_hi = mcfg.tau_grid[0], mcfg.tau_grid[1]
    offsets = np.arange(-factor, factor + 1) / factor

    thetas = np.empty(est.thetas.size)
    taus = np.empty(est.taus.size)
    peaks = np.empty(est.peak_values.size)
    for i, (th, ta) in enumerate(zip(est.thetas, est.taus)):
        local_thetas = np.clip(th + offsets * theta_step, theta_lo, theta_hi - 1e-12 * theta_step)
        local_taus = np.clip(ta + offsets * tau_step, tau_lo, tau_hi - 1e-12 * tau_step)
        patch = _evaluate_spectrum(projector, geometry, config, local_thetas, local_taus, phase_factor)
        r, c = np.unravel_index(np.argmax(patch), patch.shape)
        thetas[i] = local_thetas[r]
        taus[i] = local_taus[c]
        peaks[i] = patch[r, c]
    order = np.argsort(-peaks, kind="stable")
    return EstimateSet(thetas[order], taus[order], peaks[order], est.degenerate)


def _estimate(
    y: np.ndarray,
    geometry: VaaGeometry,
    config: RadioConfig,
    mcfg: MusicConfig,
    phase_factor: float,
) -> EstimateSet:
    cov = smoothed_joint_covariance(y, mcfg.subband, mcfg.fb_average)
    proj = noise_projector(cov, mcfg.model_order)
    spectrum = _evaluate_spectrum(
        proj, geometry, config, mcfg.theta_points, mcfg.tau_points, phase_factor
    )
    est = find_peaks(spectrum, mcfg.model_order, mcfg.theta_points, mcfg.tau_points)
    if mcfg.refine_factor > 1:
        est = _refine_peaks(est, proj, geometry, config, mcfg, phase_factor)
    return est


def estimate_paths(
    y_oneway: np.ndarray,
    geometry: VaaGeometry,
    config: RadioConfig,
    mcfg: MusicConfig,
) -> EstimateSet:
    """Smoothing + 2-D MUSIC + peak search on a (recovered) one-way CFR."""
    _check_geometry_config(geometry, config)
    return _estimate(y_oneway, geometry, config, mcfg, phase_factor=1.0)


def estimate_two_way_baseline(
    y2: np.ndarray,
    geometry: VaaGeometry,
    config: RadioConfig,
    mcfg: MusicConfig,
) -> EstimateSet:
    """The same pipeline run directly on the two-way CFR.

    Targets the squared-channel self-terms, whose steering vectors carry
    doubled spatial phases and doubled delays; the assumed signal-subspace
    order grows to min(L*(L+1)/2, N*subband - 1) to cover the cross-terms.
    """
    _check_geometry_config(geometry, config)
    order = mcfg.model_order * (mcfg.model_order + 1) // 2
    order = min(order, geometry.num_positions * mcfg.subband - 1)
    mcfg2 = replace(mcfg, model_order=order)
    est = _estimate(y2, geometry, config, mcfg2, phase_factor=2.0)
    keep = slice(0, mcfg.model_order)
    return EstimateSet(
        est.thetas[keep], est.taus[keep], est.peak_values[keep], est.degenerate
    )
