"""One-way CFR synthesis over a non-uniform virtual antenna array.

The virtual array is formed by single-antenna snapshots taken at N positions
along a device trajectory; each position n sits at displacement d_n in
direction phi_n from the reference position (d_0 = 0, phi_0 = 0). The channel
is sampled on M subcarriers with uniform spacing. Narrowband assumptions
apply: one carrier wavelength for all subcarriers, path delays common to all
positions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import DimensionMismatchError

SPEED_OF_LIGHT = 299_792_458.0


@dataclass(frozen=True)
class RadioConfig:
    """Static radio parameters of a VAA sounding sweep.

    Attributes:
        num_positions: Number of virtual array positions N.
        num_subcarriers: Number of subcarriers M.
        subcarrier_spacing: Subcarrier spacing in Hz.
        wavelength: Carrier wavelength in meters.
    """

    num_positions: int = 16
    num_subcarriers: int = 80
    subcarrier_spacing: float = 1e6
    wavelength: float = 0.125

    def __post_init__(self):
        if self.num_positions < 2:
            raise ValueError(f"num_positions must be >= 2, got {self.num_positions}")
        if self.num_subcarriers < 2:
            raise ValueError(f"num_subcarriers must be >= 2, got {self.num_subcarriers}")
        if not self.subcarrier_spacing > 0:
            raise ValueError("subcarrier_spacing must be positive")
        if not self.wavelength > 0:
            raise ValueError("wavelength must be positive")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.num_positions, self.num_subcarriers)


@dataclass(frozen=True)
class VaaGeometry:
    """Per-position displacement magnitudes and directions of the virtual array.

    ``displacements[n]`` is the distance of position n from the reference,
    ``directions[n]`` the bearing of that displacement. The reference element
    is pinned at ``displacements[0] == 0`` and ``directions[0] == 0``, and
    adjacent displacement magnitudes may differ by at most half a carrier
    wavelength (spatial Nyquist).
    """

    displacements: np.ndarray
    directions: np.ndarray
    wavelength: float

    def __post_init__(self):
        d = np.asarray(self.displacements, dtype=float)
        phi = np.asarray(self.directions, dtype=float)
        object.__setattr__(self, "displacements", d)
        object.__setattr__(self, "directions", phi)
        if d.ndim != 1 or phi.shape != d.shape:
            raise DimensionMismatchError(
                f"displacements {d.shape} and directions {phi.shape} must be equal-length 1-D arrays"
            )
        if not (np.isfinite(d).all() and np.isfinite(phi).all()):
            raise ValueError("geometry entries must be finite")
        if not self.wavelength > 0:
            raise ValueError("wavelength must be positive")
        if d[0] != 0.0 or phi[0] != 0.0:
            raise ValueError("reference element must have d[0] == 0 and phi[0] == 0")
        steps = np.abs(np.diff(d))
        if steps.size and steps.max() > self.wavelength / 2 + 1e-12:
            raise ValueError(
                "spatial Nyquist violated: adjacent displacement step "
                f"{steps.max():.6g} m exceeds half wavelength {self.wavelength / 2:.6g} m"
            )

    @property
    def num_positions(self) -> int:
        return self.displacements.size


@dataclass(frozen=True)
class PathSet:
    """L multipath components: DoA, ToA and complex amplitude per path.

    ``gains[l] = alpha_l * exp(1j * psi_l)`` with alpha_l > 0. DoAs live in
    [0, pi) because a trajectory-based array cannot tell front from back.
    """

    doas: np.ndarray
    toas: np.ndarray
    gains: np.ndarray

    def __post_init__(self):
        doas = np.asarray(self.doas, dtype=float)
        toas = np.asarray(self.toas, dtype=float)
        gains = np.asarray(self.gains, dtype=complex)
        object.__setattr__(self, "doas", doas)
        object.__setattr__(self, "toas", toas)
        object.__setattr__(self, "gains", gains)
        if not (doas.ndim == 1 and doas.shape == toas.shape == gains.shape):
            raise DimensionMismatchError("doas, toas, gains must be equal-length 1-D arrays")
        if doas.size < 1:
            raise ValueError("need at least one path")
        if np.any(np.abs(gains) <= 0):
            raise ValueError("path amplitudes must be positive")
        if np.any(toas < 0):
            raise ValueError("path delays must be non-negative")
        if np.any((doas < 0) | (doas >= np.pi)):
            raise ValueError("DoAs must lie in [0, pi)")

    @property
    def num_paths(self) -> int:
        return self.doas.size


def _check_geometry_config(geometry: VaaGeometry, config: RadioConfig) -> None:
    if geometry.num_positions != config.num_positions:
        raise DimensionMismatchError(
            f"geometry has {geometry.num_positions} positions, config expects {config.num_positions}"
        )
    if abs(geometry.wavelength - config.wavelength) > 1e-12:
        raise DimensionMismatchError(
            f"geometry wavelength {geometry.wavelength} differs from config wavelength {config.wavelength}"
        )


def spatial_steering(geometry: VaaGeometry, config: RadioConfig, theta: float) -> np.ndarray:
    """Array response of the virtual array to a unit plane wave from DoA theta.

    Entry n is ``exp(1j * 2*pi * d_n / wavelength * cos(theta - phi_n))``;
    the reference entry is exactly 1.
    """
    _check_geometry_config(geometry, config)
    phase = (
        2.0
        * np.pi
        * geometry.displacements
        / geometry.wavelength
        * np.cos(theta - geometry.directions)
    )
    return np.exp(1j * phase)


def frequency_steering(config: RadioConfig, tau: float) -> np.ndarray:
    """Subcarrier response to a path of delay tau: entry m is exp(1j*2*pi*m*df*tau)."""
    if tau < 0:
        raise ValueError(f"delay must be non-negative, got {tau}")
    m = np.arange(config.num_subcarriers)
    return np.exp(1j * 2.0 * np.pi * m * config.subcarrier_spacing * tau)


def synthesize_cfr(
    geometry: VaaGeometry,
    config: RadioConfig,
    paths: PathSet,
    noise_std: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """Synthesize the N x M one-way CFR for a set of paths plus AWGN.

    The noiseless part is ``sum_l gains[l] * outer(a_theta(doas[l]),
    conj(a_freq(toas[l])))``; the frequency steering enters conjugated, so the
    per-entry phase is ``2*pi*(d_n/wl*cos(theta_l - phi_n) - m*df*tau_l)``.
    ``noise_std**2`` is the total complex noise variance, split equally
    between real and imaginary parts.
    """
    _check_geometry_config(geometry, config)
    if not np.isfinite(noise_std) or noise_std < 0:
        raise ValueError(f"noise_std must be finite and non-negative, got {noise_std}")
    n, m = config.shape
    y = np.zeros((n, m), dtype=complex)
    for theta, tau, gain in zip(paths.doas, paths.toas, paths.gains):
        a_sp = spatial_steering(geometry, config, theta)
        a_fr = frequency_steering(config, tau)
        y += gain * np.outer(a_sp, a_fr.conj())
    if noise_std > 0:
        w = rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))
        y += noise_std / np.sqrt(2.0) * w
    return y


def perturb_geometry(
    geometry: VaaGeometry,
    displacement_std: float = 0.0,
    direction_std: float = 0.0,
    rng: np.random.Generator | None = None,
) -> VaaGeometry:
    """Add Gaussian measurement noise to a geometry (reference element stays fixed).

    Defaults to no perturbation: displacements and directions are treated as
    exactly known. The perturbed geometry must still satisfy the Nyquist
    invariant, so keep the noise small relative to the element spacing.
    """
    if displacement_std == 0.0 and direction_std == 0.0:
        return geometry
    if rng is None:
        raise ValueError("rng is required when perturbing the geometry")
    n = geometry.num_positions
    d = geometry.displacements.copy()
    phi = geometry.directions.copy()
    d[1:] += displacement_std * rng.standard_normal(n - 1)
    phi[1:] += direction_std * rng.standard_normal(n - 1)
    return VaaGeometry(d, phi, geometry.wavelength)


def snr_db_to_noise_std(snr_db: float) -> float:
    """Noise std for a given SNR in dB, with the LoS amplitude normalized to 1."""
    return float(10.0 ** (-snr_db / 20.0))
