"""Cramer-Rao lower bounds for joint DoA/ToA estimation from a one-way CFR.

Deterministic-parameter bounds under circular complex Gaussian noise: the
Fisher information is (2 / sigma^2) * Re(J^H J) with J the Jacobian of the
vectorized noiseless mean. Complex path amplitudes are nuisance parameters,
parameterized as (Re c, Im c) to avoid the polar singularity at zero
amplitude; bounds on angles and delays are invariant to that choice.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import SingularFisherError
from .signal_model import PathSet, RadioConfig, VaaGeometry, frequency_steering, spatial_steering

PINV_CUTOFF = 1e-12
RAD2_TO_DEG2 = (180.0 / np.pi) ** 2
S2_TO_NS2 = 1e18


def mean_jacobian(geometry: VaaGeometry, config: RadioConfig, paths: PathSet) -> np.ndarray:
    """Jacobian of the vectorized noiseless CFR mean, shape (N*M, 4L).

    Parameter order: [theta_1..L, tau_1..L, Re c_1..L, Im c_1..L]. The CFR is
    flattened row-major (position-major), matching ``ndarray.ravel()``.
    """
    num = paths.num_paths
    n, m = config.shape
    jac = np.empty((n * m, 4 * num), dtype=complex)
    d = geometry.displacements
    phi = geometry.directions
    freq_factor = -1j * 2.0 * np.pi * config.subcarrier_spacing * np.arange(m)
    for ell in range(num):
        theta, tau, c = paths.doas[ell], paths.toas[ell], paths.gains[ell]
        a_sp = spatial_steering(geometry, config, theta)
        a_fr_h = frequency_steering(config, tau).conj()
        outer = np.outer(a_sp, a_fr_h)
        dsp = -1j * 2.0 * np.pi * d / geometry.wavelength * np.sin(theta - phi)
        jac[:, ell] = (c * dsp[:, None] * outer).ravel()
        jac[:, num + ell] = (c * outer * freq_factor[None, :]).ravel()
        jac[:, 2 * num + ell] = outer.ravel()
        jac[:, 3 * num + ell] = (1j * outer).ravel()
    return jac


def fisher_information(jacobian: np.ndarray, noise_std: float) -> np.ndarray:
    """Fisher information matrix (2 / sigma^2) * Re(J^H J); symmetric PSD."""
    if not noise_std > 0:
        raise ValueError(f"noise_std must be positive, got {noise_std}")
    fim = (2.0 / noise_std**2) * (jacobian.conj().T @ jacobian).real
    return 0.5 * (fim + fim.T)


@dataclass(frozen=True)
class CrlbBounds:
    """Per-path variance bounds: DoA in rad^2, ToA in s^2."""

    theta_var: np.ndarray
    tau_var: np.ndarray

    @property
    def theta_var_deg2(self) -> np.ndarray:
        return self.theta_var * RAD2_TO_DEG2

    @property
    def tau_var_ns2(self) -> np.ndarray:
        return self.tau_var * S2_TO_NS2


def _parameter_name(idx: int, num: int) -> str:
    kind = "theta" if idx < num else "tau"
    return f"{kind}_{idx % num + 1}"


def crlb_bounds(fim: np.ndarray) -> CrlbBounds:
    """DoA/ToA variance bounds from the pseudo-inverse of the Fisher matrix.

    Angles (rad), delays (s) and amplitudes live on wildly different scales,
    so the matrix is first normalized to unit diagonal; eigenvalues of the
    normalized matrix below ``PINV_CUTOFF`` times its largest are treated as
    zero. A requested angle or delay parameter with zero information or with
    a component in the null space has an unbounded variance and raises a
    :class:`SingularFisherError` naming it.
    """
    fim = np.asarray(fim, dtype=float)
    dim = fim.shape[0]
    if dim % 4 != 0:
        raise ValueError(f"Fisher matrix dimension {dim} is not 4L")
    num = dim // 4
    diag = fim.diagonal().copy()
    dead = diag <= 0.0
    for idx in range(2 * num):
        if dead[idx]:
            raise SingularFisherError(
                f"Fisher matrix is singular for {_parameter_name(idx, num)}; "
                "the parameter carries no information in this configuration"
            )
    scale = np.where(dead, 1.0, 1.0 / np.sqrt(np.where(dead, 1.0, diag)))
    normalized = fim * np.outer(scale, scale)
    vals, vecs = np.linalg.eigh(normalized)
    cutoff = PINV_CUTOFF * max(vals.max(), 0.0)
    null_mask = vals <= cutoff
    if null_mask.any():
        null_weight = (vecs[:, null_mask] ** 2).sum(axis=1)
        for idx in range(2 * num):
            if null_weight[idx] > 1e-8:
                raise SingularFisherError(
                    f"Fisher matrix is singular for {_parameter_name(idx, num)}; "
                    "the parameter is not identifiable in this configuration"
                )
    inv_vals = np.where(null_mask, 0.0, 1.0 / np.where(null_mask, 1.0, vals))
    pinv_diag = (vecs**2 * inv_vals[None, :]).sum(axis=1) * scale**2
    return CrlbBounds(theta_var=pinv_diag[:num], tau_var=pinv_diag[num : 2 * num])


def crlb_for_scenario(
    geometry: VaaGeometry,
    config: RadioConfig,
    paths: PathSet,
    noise_std: float,
) -> CrlbBounds:
    """Convenience wrapper: Jacobian, Fisher matrix, bounds in one call."""
    jac = mean_jacobian(geometry, config, paths)
    return crlb_bounds(fisher_information(jac, noise_std))
