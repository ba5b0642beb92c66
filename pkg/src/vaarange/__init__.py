"""BLE virtual-antenna-array ranging toolkit.

Simulation of two-way channel frequency responses with LO-offset
cancellation, recovery of the element-wise square-root sign ambiguity via
row/column predictors fused by majority voting, joint ToA/DoA
super-resolution estimation, and Cramer-Rao benchmarking.
"""

from .crlb import CrlbBounds, crlb_bounds, crlb_for_scenario, fisher_information, mean_jacobian
from .exceptions import (
    ConfigError,
    DegenerateEntryError,
    DegenerateInputError,
    DimensionMismatchError,
    SingularFisherError,
)
from .music import (
    EstimateSet,
    MusicConfig,
    estimate_paths,
    estimate_two_way_baseline,
    find_peaks,
    music_spectrum,
    smoothed_joint_covariance,
    spatial_covariance,
)
from .predictor import (
    SignPredictor,
    TrainConfig,
    load_model,
    predict,
    predict_batch,
    save_model,
    train,
)
from .scenario import Measurement, ScenarioConfig, gen_scenario, simulate_measurement
from .sign_recovery import (
    LabelMatrices,
    SignProbabilities,
    continuity_predictor,
    extract_features,
    g,
    make_labels,
    oracle_predictor,
    reconstruct_sign_matrix,
    recover_one_way,
    resolve_signs,
    signs_from_labels,
    vote_first_column,
)
from .signal_model import (
    SPEED_OF_LIGHT,
    PathSet,
    RadioConfig,
    VaaGeometry,
    frequency_steering,
    perturb_geometry,
    snr_db_to_noise_std,
    spatial_steering,
    synthesize_cfr,
)
from .sweep import SweepResult, SweepRow, mse, run_method, run_sweep
from .twoway import (
    apply_lo_offsets,
    half_phase_sqrt,
    half_phases,
    sample_lo_phases,
    true_sign_matrix,
    two_way_cfr,
)

__version__ = "0.1.0"
