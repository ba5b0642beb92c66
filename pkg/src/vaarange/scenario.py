"""Random scenario generation for benchmark sweeps and training data.

A base station sits at the origin of a square area; the user device is placed
at a uniform distance and bearing, scatterers uniformly inside the square.
The LoS path plus one bounce per scatterer define the path set; the virtual
array grows along the device trajectory with per-position random spacing and
direction. Arrival bearings are folded into [0, pi) by reflection, the half
plane the estimator searches, and the synthesized CFR uses the folded angles
so data and ground truth stay consistent.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .signal_model import (
    SPEED_OF_LIGHT,
    PathSet,
    RadioConfig,
    VaaGeometry,
    snr_db_to_noise_std,
    synthesize_cfr,
)
from .twoway import apply_lo_offsets, half_phase_sqrt, sample_lo_phases, true_sign_matrix, two_way_cfr

NLOS_AMPLITUDE_RANGE = (0.2, 0.8)


@dataclass(frozen=True)
class ScenarioConfig:
    """Scenario distribution parameters (defaults match the benchmark setup).

    ``spacing_range`` is in fractions of the carrier wavelength;
    ``direction_range`` bounds the per-position displacement directions.
    """

    area_side: float = 40.0
    dist_range: tuple[float, float] = (20.0, 30.0)
    nlos_range: tuple[int, int] = (1, 3)
    spacing_range: tuple[float, float] = (0.25, 0.5)
    direction_range: tuple[float, float] = (-np.pi / 4, np.pi / 4)
    snr_db: float = 10.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "dist_range", tuple(float(v) for v in self.dist_range))
        object.__setattr__(self, "nlos_range", tuple(int(v) for v in self.nlos_range))
        object.__setattr__(self, "spacing_range", tuple(float(v) for v in self.spacing_range))
        object.__setattr__(self, "direction_range", tuple(float(v) for v in self.direction_range))
        if self.area_side <= 0:
            raise ValueError("area_side must be positive")
        for name in ("dist_range", "spacing_range", "direction_range", "nlos_range"):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise ValueError(f"{name} is not well-ordered: {lo} > {hi}")
        if self.nlos_range[0] < 0:
            raise ValueError("nlos_range must be non-negative")
        if self.spacing_range[0] <= 0 or self.spacing_range[1] > 0.5:
            raise ValueError("spacing_range must lie in (0, 0.5] wavelengths")
        if self.dist_range[0] <= 0:
            raise ValueError("dist_range must be positive")


def fold_bearing(bearing: float) -> float:
    """Reflect an arrival bearing into [0, pi).

    A trajectory array cannot separate a wave from its mirror image across
    the reference axis, so bearings in (pi, 2*pi) map to their reflection.
    """
    b = float(np.mod(bearing, 2.0 * np.pi))
    if b >= np.pi:
        b = 2.0 * np.pi - b
    if b >= np.pi:  # the b == pi edge reflects onto itself
        b = np.nextafter(np.pi, 0.0)
    return b


def gen_scenario(
    cfg: ScenarioConfig,
    radio: RadioConfig,
    rng: np.random.Generator,
) -> tuple[VaaGeometry, PathSet]:
    """Draw one geometry and path set.

    LoS: unit amplitude, uniform initial phase, delay = distance / c. Each
    scatterer adds one path with delay along the bounce and amplitude uniform
    on [0.2, 0.8] (kept below the LoS so the direct path dominates). Element
    spacings are cumulative uniform draws from ``spacing_range`` and satisfy
    the spatial Nyquist bound by construction.
    """
    ue_dist = rng.uniform(*cfg.dist_range)
    ue_bearing = rng.uniform(0.0, 2.0 * np.pi)
    ue = ue_dist * np.array([np.cos(ue_bearing), np.sin(ue_bearing)])

    num_nlos = int(rng.integers(cfg.nlos_range[0], cfg.nlos_range[1] + 1))
    half_side = cfg.area_side / 2.0
    scatterers = rng.uniform(-half_side, half_side, size=(num_nlos, 2))

    doas = [fold_bearing(np.arctan2(-ue[1], -ue[0]))]
    toas = [ue_dist / SPEED_OF_LIGHT]
    amps = [1.0]
    for s in scatterers:
        rel = s - ue
        doas.append(fold_bearing(np.arctan2(rel[1], rel[0])))
        toas.append((np.linalg.norm(s) + np.linalg.norm(rel)) / SPEED_OF_LIGHT)
        amps.append(rng.uniform(*NLOS_AMPLITUDE_RANGE))
    phases = rng.uniform(0.0, 2.0 * np.pi, size=len(amps))
    gains = np.asarray(amps) * np.exp(1j * phases)

    wl = radio.wavelength
    steps = rng.uniform(cfg.spacing_range[0] * wl, cfg.spacing_range[1] * wl, radio.num_positions - 1)
    displacements = np.concatenate([[0.0], np.cumsum(steps)])
    directions = np.concatenate(
        [[0.0], rng.uniform(*cfg.direction_range, size=radio.num_positions - 1)]
    )
    geometry = VaaGeometry(displacements, directions, wl)
    paths = PathSet(np.asarray(doas), np.asarray(toas), gains)
    return geometry, paths


@dataclass(frozen=True)
class Measurement:
    """One synthesized sounding exchange.

    ``y_ref`` is the reference one-way CFR the sign labels are defined
    against; ``y2`` the LO-cancelled two-way CFR; ``signs`` the ground-truth
    ambiguity matrix with the first entry normalized to +1.
    """

    y_ref: np.ndarray
    y2: np.ndarray
    lo_phases: np.ndarray
    signs: np.ndarray


def simulate_measurement(
    geometry: VaaGeometry,
    radio: RadioConfig,
    paths: PathSet,
    snr_db: float,
    rng: np.random.Generator,
    independent_noise: bool = False,
) -> Measurement:
    """Synthesize a two-way sounding exchange with random LO offsets.

    By default one noise matrix is shared by both directions, so the two-way
    CFR is exactly the squared noisy one-way CFR. With ``independent_noise``
    each direction gets its own noise (physically plausible but the square
    root then only approximately factors); the label reference becomes the
    average of the two direction channels.
    """
    noise_std = snr_db_to_noise_std(snr_db)
    phases = sample_lo_phases(radio.shape, rng)
    if not independent_noise:
        y = synthesize_cfr(geometry, radio, paths, noise_std, rng)
        y_fwd, y_rev = y, y
    else:
        clean = synthesize_cfr(geometry, radio, paths, 0.0, rng)
        w = noise_std / np.sqrt(2.0)
        y_fwd = clean + w * (rng.standard_normal(radio.shape) + 1j * rng.standard_normal(radio.shape))
        y_rev = clean + w * (rng.standard_normal(radio.shape) + 1j * rng.standard_normal(radio.shape))
        y = 0.5 * (y_fwd + y_rev)
    y2 = two_way_cfr(
        apply_lo_offsets(y_fwd, phases, "reflector"),
        apply_lo_offsets(y_rev, phases, "initiator"),
    )
    signs = true_sign_matrix(y, half_phase_sqrt(y2))
    return Measurement(y_ref=y, y2=y2, lo_phases=phases, signs=signs)
