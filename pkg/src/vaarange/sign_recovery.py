"""Resolving the {+1, -1} ambiguity of the square-rooted two-way CFR.

Two predictors emit per-entry probabilities that an entry shares the sign of
its slice reference: a row predictor works along subcarriers (entry vs. first
column of its row), a column predictor along positions (entry vs. first row of
its column). Predictors can be learned (see :mod:`vaarange.predictor`), a
phase-continuity baseline, or an oracle for testing. Their hard decisions are
fused per row by majority voting over the subcarriers, which pins down the
first-column signs; the rest of the matrix then follows from the row
predictor alone.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import DegenerateInputError, DimensionMismatchError
from .signal_model import VaaGeometry
from .twoway import half_phases

HARD_PROB_HIGH = 0.99
HARD_PROB_LOW = 0.01

ROW_FEATURE_CHANNELS = 3
COL_FEATURE_CHANNELS = 5


@dataclass(frozen=True)
class LabelMatrices:
    """Binary training targets: q relates entries to their row's first column,
    p to their column's first row. Self-references are identically 1."""

    q: np.ndarray
    p: np.ndarray


@dataclass(frozen=True)
class SignProbabilities:
    """Per-entry probabilities from the row and column predictors, in (0, 1)."""

    row_probs: np.ndarray
    col_probs: np.ndarray

    def __post_init__(self):
        if self.row_probs.shape != self.col_probs.shape:
            raise DimensionMismatchError(
                f"row probs {self.row_probs.shape} != col probs {self.col_probs.shape}"
            )


def make_labels(signs: np.ndarray) -> LabelMatrices:
    """Relative-sign labels for a ground-truth sign matrix.

    ``q[n, m] = 1`` iff ``signs[n, m] == signs[n, 0]`` and
    ``p[n, m] = 1`` iff ``signs[n, m] == signs[0, m]``.
    """
    signs = np.asarray(signs)
    q = (signs == signs[:, :1]).astype(np.int8)
    p = (signs == signs[:1, :]).astype(np.int8)
    return LabelMatrices(q=q, p=p)


def signs_from_labels(q: np.ndarray, p: np.ndarray) -> np.ndarray:
    """Invert :func:`make_labels`: rebuild the sign matrix (first entry +1).

    Row labels give each entry's sign relative to its row's first column, and
    the first column of p gives the first-column signs relative to the top-left
    entry, which pins everything down.
    """
    q = np.asarray(q)
    p = np.asarray(p)
    if q.shape != p.shape:
        raise DimensionMismatchError(f"label shapes differ: {q.shape} != {p.shape}")
    first_col = (2 * p[:, :1] - 1).astype(np.int8)
    return ((2 * q - 1) * first_col).astype(np.int8)


def extract_features(
    y2: np.ndarray,
    geometry: VaaGeometry,
    axis: str,
    index: int,
) -> np.ndarray:
    """Real-valued feature channels for one slice of the two-way CFR.

    Rows (axis="row", slice across subcarriers) get 3 channels: cos and sin of
    the entry's half-phase, plus magnitude normalized by the slice maximum.
    Columns (axis="col", slice across positions) get those 3 plus two geometry
    channels, the fractional part of d_n / wavelength and phi_n / pi, since the
    column predictor must cope with the non-uniform element placement.
    """
    feats = _features_all(y2, geometry, axis)
    if index < 0 or index >= feats.shape[0]:
        raise IndexError(f"slice index {index} out of range for axis {axis!r}")
    return feats[index]


def _features_all(y2: np.ndarray, geometry: VaaGeometry, axis: str) -> np.ndarray:
    """Features for every slice along an axis, shape (num_slices, channels, length)."""
    y2 = np.asarray(y2)
    if y2.ndim != 2:
        raise DimensionMismatchError(f"expected a 2-D CFR, got shape {y2.shape}")
    if axis == "row":
        slices = y2
    elif axis == "col":
        slices = y2.T
    else:
        raise ValueError(f"axis must be 'row' or 'col', got {axis!r}")

    half = half_phases(slices)
    mag = np.abs(slices)
    peak = mag.max(axis=1)
    if np.any(peak == 0):
        bad = int(np.argmax(peak == 0))
        raise DegenerateInputError(f"all-zero {axis} slice at index {bad}")
    base = np.stack([np.cos(half), np.sin(half), mag / peak[:, None]], axis=1)
    if axis == "row":
        return base

    if geometry.num_positions != y2.shape[0]:
        raise DimensionMismatchError(
            f"geometry has {geometry.num_positions} positions, CFR has {y2.shape[0]} rows"
        )
    frac_d = np.mod(geometry.displacements / geometry.wavelength, 1.0)
    dir_norm = geometry.directions / np.pi
    geo = np.stack([frac_d, dir_norm])  # (2, N)
    geo_tiled = np.broadcast_to(geo, (slices.shape[0],) + geo.shape)
    return np.concatenate([base, geo_tiled], axis=1)


def g(x) -> np.ndarray:
    """Hard sign decision on a probability: +1 for x >= 0.5, else -1.

    The tie at exactly 0.5 resolves to +1 (deterministic, measure zero for
    continuous predictor outputs).
    """
    return np.where(np.asarray(x) >= 0.5, 1, -1).astype(np.int8)


def _wrap_phase(phase: np.ndarray) -> np.ndarray:
    """Wrap to (-pi, pi]."""
    wrapped = np.mod(phase + np.pi, 2.0 * np.pi) - np.pi
    return np.where(wrapped == -np.pi, np.pi, wrapped)


def continuity_predictor(y2: np.ndarray, axis: str) -> np.ndarray:
    """Greedy phase-continuity sign tracking along one axis.

    Walks each slice of half-phases and flips the current entry whenever the
    flipped phase is closer (in wrapped distance) to the previous corrected
    entry. Designed for uniform arrays; the per-step decision breaks down when
    the true half-phase advances by more than pi/2, which non-uniform spacing
    and multipath make common. Hard decisions are lifted to 0.99/0.01
    probabilities so the output plugs into the same voting interface as the
    learned predictors. Returns the full N x M probability matrix for the
    requested role.
    """
    y2 = np.asarray(y2)
    slices = y2 if axis == "row" else y2.T if axis == "col" else None
    if slices is None:
        raise ValueError(f"axis must be 'row' or 'col', got {axis!r}")
    half = half_phases(slices)
    num, length = half.shape
    rel_signs = np.ones((num, length), dtype=np.int8)
    for i in range(num):
        prev_phase = half[i, 0]  # corrected phase of the previous element
        for k in range(1, length):
            keep = _wrap_phase(half[i, k] - prev_phase)
            flip = _wrap_phase(half[i, k] + np.pi - prev_phase)
            if abs(flip) < abs(keep):
                rel_signs[i, k] = -1
                prev_phase = _wrap_phase(half[i, k] + np.pi)
            else:
                prev_phase = half[i, k]
    probs = np.where(rel_signs == 1, HARD_PROB_HIGH, HARD_PROB_LOW)
    return probs if axis == "row" else probs.T


def oracle_predictor(
    signs: np.ndarray,
    flip_rate: float,
    rng: np.random.Generator,
) -> SignProbabilities:
    """Probabilities matching the true labels, each entry flipped independently.

    A testing aid for the voting stage: ``flip_rate`` in [0, 0.5) controls the
    per-entry error rate of both the row and column channel.
    """
    if not 0.0 <= flip_rate < 0.5:
        raise ValueError(f"flip_rate must lie in [0, 0.5), got {flip_rate}")
    labels = make_labels(signs)
    shape = labels.q.shape
    q = np.logical_xor(labels.q, rng.random(shape) < flip_rate)
    p = np.logical_xor(labels.p, rng.random(shape) < flip_rate)
    return SignProbabilities(
        row_probs=np.where(q, HARD_PROB_HIGH, HARD_PROB_LOW),
        col_probs=np.where(p, HARD_PROB_HIGH, HARD_PROB_LOW),
    )


def vote_first_column(probs: SignProbabilities) -> np.ndarray:
    """Majority-vote the first-column signs from row and column predictions.

    The reference sign is +1. For every other row n, each subcarrier m offers
    the candidate ``g(row[0, m]) * g(col[n, m]) * g(row[n, m])`` (the three
    factors chain first row -> column m -> row n back to the row's first
    entry); the sign of the candidate sum decides, ties resolving to +1.
    """
    g_row = g(probs.row_probs)
    g_col = g(probs.col_probs)
    n = g_row.shape[0]
    first_col = np.ones(n, dtype=np.int8)
    candidates = g_row[0:1, :] * g_col[1:, :] * g_row[1:, :]
    vote = candidates.sum(axis=1, dtype=np.int64)
    first_col[1:] = np.where(vote >= 0, 1, -1)
    return first_col


def reconstruct_sign_matrix(probs: SignProbabilities, first_column: np.ndarray) -> np.ndarray:
    """Row-consistent sign matrix from row predictions and first-column signs.

    Entry (n, m) is the row predictor's relative sign times first_column[n];
    the first column itself is taken verbatim (its relative sign is +1 by
    definition of the labels).
    """
    first_column = np.asarray(first_column)
    g_row = g(probs.row_probs)
    if first_column.shape != (g_row.shape[0],):
        raise DimensionMismatchError(
            f"first column length {first_column.shape} != row count {g_row.shape[0]}"
        )
    signs = (g_row * first_column[:, None]).astype(np.int8)
    signs[:, 0] = first_column
    return signs


def recover_one_way(y_sqrt: np.ndarray, signs: np.ndarray) -> np.ndarray:
    """Sign-corrected one-way CFR: the square-rooted two-way CFR times the signs."""
    y_sqrt = np.asarray(y_sqrt)
    signs = np.asarray(signs)
    if y_sqrt.shape != signs.shape:
        raise DimensionMismatchError(f"shape mismatch {y_sqrt.shape} != {signs.shape}")
    return y_sqrt * signs


def resolve_signs(probs: SignProbabilities) -> np.ndarray:
    """Full pipeline from probabilities to a sign matrix: vote, then reconstruct."""
    return reconstruct_sign_matrix(probs, vote_first_column(probs))
