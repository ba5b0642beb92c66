"""Two-way CFR construction and the element-wise square root.

BLE initiator and reflector run unsynchronized local oscillators, so either
one-way CFR carries an unknown per-measurement phase offset. The Hadamard
product of the two directions cancels the offsets but squares the channel;
taking the element-wise principal square root brings it back to one-way form
up to a {+1, -1} sign per entry.
"""

from __future__ import annotations

import numpy as np

from .exceptions import DegenerateEntryError, DimensionMismatchError

ZERO_ENTRY_THRESHOLD = 1e-12


def sample_lo_phases(shape: tuple[int, int], rng: np.random.Generator) -> np.ndarray:
    """Draw an N x M matrix of LO phase offsets, uniform on [0, 2*pi)."""
    return rng.uniform(0.0, 2.0 * np.pi, size=shape)


def apply_lo_offsets(y: np.ndarray, phases: np.ndarray, direction: str) -> np.ndarray:
    """Impose LO phase offsets on a one-way CFR.

    ``direction="reflector"`` multiplies entry-wise by exp(1j*phases),
    ``direction="initiator"`` by the conjugate exp(-1j*phases).
    """
    y = np.asarray(y)
    phases = np.asarray(phases, dtype=float)
    if y.shape != phases.shape:
        raise DimensionMismatchError(f"CFR shape {y.shape} != phase matrix shape {phases.shape}")
    if direction == "reflector":
        return np.exp(1j * phases) * y
    if direction == "initiator":
        return np.exp(-1j * phases) * y
    raise ValueError(f"direction must be 'reflector' or 'initiator', got {direction!r}")


def two_way_cfr(y_reflector: np.ndarray, y_initiator: np.ndarray) -> np.ndarray:
    """Hadamard product of the two one-way CFRs.

    When both derive from the same channel via conjugate LO offsets the
    product equals the squared channel and is offset-independent.
    """
    y_reflector = np.asarray(y_reflector)
    y_initiator = np.asarray(y_initiator)
    if y_reflector.shape != y_initiator.shape:
        raise DimensionMismatchError(
            f"shape mismatch {y_reflector.shape} != {y_initiator.shape}"
        )
    return y_reflector * y_initiator


def _principal_angle(y: np.ndarray) -> np.ndarray:
    """Phase in (-pi, pi]: like np.angle but the -pi branch edge maps to +pi."""
    phase = np.angle(y)
    return np.where(phase == -np.pi, np.pi, phase)


def half_phase_sqrt(y2: np.ndarray) -> np.ndarray:
    """Element-wise principal square root: r*exp(1j*p) -> sqrt(r)*exp(1j*p/2).

    Phases are taken in (-pi, pi], so the output phase lies in (-pi/2, pi/2]
    and squaring the result reproduces the input.
    """
    y2 = np.asarray(y2)
    return np.sqrt(np.abs(y2)) * np.exp(0.5j * _principal_angle(y2))


def half_phases(y2: np.ndarray) -> np.ndarray:
    """Half of the principal phase of each entry, in (-pi/2, pi/2]."""
    return 0.5 * _principal_angle(np.asarray(y2))


def true_sign_matrix(y: np.ndarray, y_sqrt: np.ndarray) -> np.ndarray:
    """Ground-truth sign-ambiguity matrix relating y_sqrt to the one-way CFR.

    With ``y_sqrt = half_phase_sqrt(y * y)`` the element-wise ratio
    ``y_sqrt / y`` is exactly +1 or -1; the sign of its real part is returned,
    globally normalized so the first entry is +1 (a global sign does not
    affect ToA/DoA estimation).
    """
    y = np.asarray(y)
    y_sqrt = np.asarray(y_sqrt)
    if y.shape != y_sqrt.shape:
        raise DimensionMismatchError(f"shape mismatch {y.shape} != {y_sqrt.shape}")
    small = np.abs(y) < ZERO_ENTRY_THRESHOLD
    if small.any():
        n, m = np.argwhere(small)[0]
        raise DegenerateEntryError(
            f"CFR entry ({n}, {m}) has magnitude below {ZERO_ENTRY_THRESHOLD}; sign undefined"
        )
    ratio = y_sqrt / y
    signs = np.where(ratio.real >= 0, 1, -1).astype(np.int8)
    return signs * signs[0, 0]
