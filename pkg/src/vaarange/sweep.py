"""SNR sweeps: paired Monte-Carlo comparison of the estimation methods.

Every method at a given (SNR, trial) consumes the identical channel
realization; per-trial RNGs are derived from (seed, snr index, trial index)
so sweeps are reproducible and trials are independent. Errors are measured on
the LoS path (the ranging use case): the estimate nearest to the LoS truth in
grid-normalized (theta, tau) distance is scored.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace

import numpy as np

from .crlb import crlb_for_scenario
from .music import EstimateSet, MusicConfig, estimate_paths, estimate_two_way_baseline
from .predictor import SignPredictor, predict_batch
from .scenario import ScenarioConfig, gen_scenario, simulate_measurement
from .sign_recovery import (
    SignProbabilities,
    _features_all,
    continuity_predictor,
    recover_one_way,
    resolve_signs,
)
from .signal_model import RadioConfig, snr_db_to_noise_std
from .twoway import half_phase_sqrt

METHODS = ("proposed", "proposed-oracle", "two-way", "continuity")

CSV_COLUMNS = (
    "snr_db",
    "method",
    "mse_doa_deg2",
    "se_doa",
    "mse_toa_ns2",
    "se_toa",
    "trials",
    "crlb_doa_deg2",
    "crlb_toa_ns2",
)


def mse(errors) -> tuple[float, float]:
    """Mean and standard error of the mean of a list of squared errors."""
    errors = np.asarray(errors, dtype=float)
    if errors.size == 0:
        raise ValueError("cannot aggregate an empty error list")
    mean = float(errors.mean())
    if errors.size == 1:
        return mean, 0.0
    return mean, float(errors.std(ddof=1) / np.sqrt(errors.size))


@dataclass(frozen=True)
class SweepRow:
    """Aggregated results for one (SNR, method) cell."""

    snr_db: float
    method: str
    mse_doa_deg2: float
    se_doa: float
    mse_toa_ns2: float
    se_toa: float
    trials: int
    crlb_doa_deg2: float
    crlb_toa_ns2: float


@dataclass(frozen=True)
class SweepResult:
    rows: tuple[SweepRow, ...]

    def row(self, snr_db: float, method: str) -> SweepRow:
        for r in self.rows:
            if r.method == method and r.snr_db == snr_db:
                return r
        raise KeyError(f"no row for snr={snr_db}, method={method!r}")

    def write_csv(self, path: str) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(CSV_COLUMNS)
            for r in self.rows:
                writer.writerow([getattr(r, c) for c in CSV_COLUMNS])


def predicted_probabilities(
    y2: np.ndarray,
    geometry,
    row_model: SignPredictor,
    col_model: SignPredictor,
) -> SignProbabilities:
    """Run both learned predictors over a full two-way CFR."""
    row_feats = _features_all(y2, geometry, "row").astype(np.float32)
    col_feats = _features_all(y2, geometry, "col").astype(np.float32)
    return SignProbabilities(
        row_probs=predict_batch(row_model, row_feats),
        col_probs=predict_batch(col_model, col_feats).T,
    )


def continuity_probabilities(y2: np.ndarray) -> SignProbabilities:
    return SignProbabilities(
        row_probs=continuity_predictor(y2, "row"),
        col_probs=continuity_predictor(y2, "col"),
    )


def _recovered_estimate(y2, signs, geometry, radio, mcfg) -> EstimateSet:
    y_rec = recover_one_way(half_phase_sqrt(y2), signs)
    return estimate_paths(y_rec, geometry, radio, mcfg)


def run_method(
    method: str,
    meas,
    geometry,
    radio: RadioConfig,
    mcfg: MusicConfig,
    models: dict | None = None,
) -> EstimateSet:
    """Dispatch one estimation method on one measurement."""
    if method == "proposed-oracle":
        return _recovered_estimate(meas.y2, meas.signs, geometry, radio, mcfg)
    if method == "proposed":
        if not models or "row" not in models or "col" not in models:
            raise ValueError("method 'proposed' needs trained row and col models")
        probs = predicted_probabilities(meas.y2, geometry, models["row"], models["col"])
        return _recovered_estimate(meas.y2, resolve_signs(probs), geometry, radio, mcfg)
    if method == "continuity":
        probs = continuity_probabilities(meas.y2)
        return _recovered_estimate(meas.y2, resolve_signs(probs), geometry, radio, mcfg)
    if method == "two-way":
        return estimate_two_way_baseline(meas.y2, geometry, radio, mcfg)
    raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")


def los_squared_errors(
    est: EstimateSet,
    los_theta: float,
    los_tau: float,
    mcfg: MusicConfig,
) -> tuple[float, float]:
    """Squared DoA (deg^2) and ToA (ns^2) errors of the estimate nearest the LoS truth.

    Nearness is measured jointly, each axis normalized by its grid step.
    """
    theta_step = mcfg.theta_grid[2]
    tau_step = mcfg.tau_grid[2]
    dist = ((est.thetas - los_theta) / theta_step) ** 2 + ((est.taus - los_tau) / tau_step) ** 2
    i = int(np.argmin(dist))
    err_theta = np.rad2deg(est.thetas[i] - los_theta) ** 2
    err_tau = ((est.taus[i] - los_tau) * 1e9) ** 2
    return float(err_theta), float(err_tau)


def matched_squared_errors(
    est: EstimateSet,
    thetas: np.ndarray,
    taus: np.ndarray,
    mcfg: MusicConfig,
) -> tuple[float, float]:
    """Per-path matched errors averaged over all true paths (optional metric)."""
    theta_step = mcfg.theta_grid[2]
    tau_step = mcfg.tau_grid[2]
    errs_theta, errs_tau = [], []
    for th, ta in zip(thetas, taus):
        dist = ((est.thetas - th) / theta_step) ** 2 + ((est.taus - ta) / tau_step) ** 2
        i = int(np.argmin(dist))
        errs_theta.append(np.rad2deg(est.thetas[i] - th) ** 2)
        errs_tau.append(((est.taus[i] - ta) * 1e9) ** 2)
    return float(np.mean(errs_theta)), float(np.mean(errs_tau))


def trial_rng(seed: int, snr_index: int, trial_index: int) -> np.random.Generator:
    """Deterministic per-trial generator from (seed, SNR index, trial index)."""
    return np.random.default_rng(np.random.SeedSequence((seed, snr_index, trial_index)))


def run_sweep(
    snr_list,
    trials_per_snr: int,
    methods,
    cfg: ScenarioConfig,
    radio: RadioConfig,
    mcfg: MusicConfig,
    models: dict | None = None,
    match_all_paths: bool = False,
) -> SweepResult:
    """Paired Monte-Carlo sweep over SNR points.

    For each trial all methods see the same realization; the assumed model
    order is set to the true path count. The CRLB for the LoS parameters is
    evaluated per realization and averaged.
    """
    methods = list(methods)
    if not methods:
        raise ValueError("need at least one method")
    for m in methods:
        if m not in METHODS:
            raise ValueError(f"unknown method {m!r}; expected one of {METHODS}")
    if "proposed" in methods and (not models or "row" not in models or "col" not in models):
        raise ValueError("method 'proposed' needs trained row and col models")

    rows = []
    for i_snr, snr_db in enumerate(snr_list):
        errs = {m: ([], []) for m in methods}
        crlb_doa, crlb_toa = [], []
        for t in range(trials_per_snr):
            rng = trial_rng(cfg.seed, i_snr, t)
            geometry, paths = gen_scenario(cfg, radio, rng)
            meas = simulate_measurement(geometry, radio, paths, snr_db, rng)
            mcfg_t = replace(mcfg, model_order=paths.num_paths)
            for m in methods:
                est = run_method(m, meas, geometry, radio, mcfg_t, models)
                if match_all_paths:
                    e_th, e_ta = matched_squared_errors(est, paths.doas, paths.toas, mcfg_t)
                else:
                    e_th, e_ta = los_squared_errors(est, paths.doas[0], paths.toas[0], mcfg_t)
                errs[m][0].append(e_th)
                errs[m][1].append(e_ta)
            bounds = crlb_for_scenario(geometry, radio, paths, snr_db_to_noise_std(snr_db))
            crlb_doa.append(bounds.theta_var_deg2[0])
            crlb_toa.append(bounds.tau_var_ns2[0])

        mean_crlb_doa = float(np.mean(crlb_doa))
        mean_crlb_toa = float(np.mean(crlb_toa))
        for m in methods:
            mse_doa, se_doa = mse(errs[m][0])
            mse_toa, se_toa = mse(errs[m][1])
            rows.append(
                SweepRow(
                    snr_db=float(snr_db),
                    method=m,
                    mse_doa_deg2=mse_doa,
                    se_doa=se_doa,
                    mse_toa_ns2=mse_toa,
                    se_toa=se_toa,
                    trials=trials_per_snr,
                    crlb_doa_deg2=mean_crlb_doa,
                    crlb_toa_ns2=mean_crlb_toa,
                )
            )
    return SweepResult(rows=tuple(rows))
