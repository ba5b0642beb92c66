"""Dataset persistence: JSON-lines records with a split manifest.

A dataset directory holds ``records.jsonl`` (one record per line),
``split.json`` (record indices per train/val/test split) and ``meta.json``
(generation parameters). Records are self-contained: the two-way CFR, both
label matrices, the geometry, the ground-truth paths, the per-record SNR and
the per-record RNG seed.
"""

from __future__ import annotations

import json
import os
from dataclasses import asdict

import numpy as np

from .scenario import ScenarioConfig, gen_scenario, simulate_measurement
from .sign_recovery import _features_all, make_labels
from .signal_model import RadioConfig, VaaGeometry

DATASET_FORMAT_VERSION = 1
SPLIT_FRACTIONS = (0.6, 0.2, 0.2)
DEFAULT_TRAIN_SNR_RANGE = (0.0, 20.0)

RECORDS_FILE = "records.jsonl"
SPLIT_FILE = "split.json"
META_FILE = "meta.json"

_SPLIT_TAG = 2**63  # seed-stream index reserved for the split shuffle


def _complex_to_pairs(y: np.ndarray) -> list:
    stacked = np.stack([y.real, y.imag], axis=-1)
    return stacked.tolist()


def _pairs_to_complex(pairs) -> np.ndarray:
    arr = np.asarray(pairs, dtype=float)
    return arr[..., 0] + 1j * arr[..., 1]


def record_seed(dataset_seed: int, index: int) -> int:
    """Derived per-record seed; each record is reproducible from it alone."""
    ss = np.random.SeedSequence((dataset_seed, index))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def gen_dataset(
    count: int,
    cfg: ScenarioConfig,
    radio: RadioConfig,
    out_dir: str,
    snr_range: tuple[float, float] = DEFAULT_TRAIN_SNR_RANGE,
) -> dict:
    """Generate ``count`` records and persist them with a 60/20/20 split.

    Every record draws its SNR uniformly from ``snr_range`` (the evaluation
    sweep range) and its scenario from ``cfg``; the master seed is
    ``cfg.seed``. Identical inputs produce byte-identical files. Returns the
    split manifest.
    """
    if count < 10:
        raise ValueError(f"need at least 10 records for a 60/20/20 split, got {count}")
    os.makedirs(out_dir, exist_ok=True)

    with open(os.path.join(out_dir, RECORDS_FILE), "w", encoding="utf-8") as fh:
        for i in range(count):
            seed_i = record_seed(cfg.seed, i)
            rng = np.random.default_rng(seed_i)
            snr_db = float(rng.uniform(*snr_range))
            geometry, paths = gen_scenario(cfg, radio, rng)
            meas = simulate_measurement(geometry, radio, paths, snr_db, rng)
            labels = make_labels(meas.signs)
            record = {
                "y2": _complex_to_pairs(meas.y2),
                "q": labels.q.tolist(),
                "p": labels.p.tolist(),
                "geometry": {
                    "d": geometry.displacements.tolist(),
                    "phi": geometry.directions.tolist(),
                },
                "truth": {
                    "theta": paths.doas.tolist(),
                    "tau": paths.toas.tolist(),
                    "c_re": paths.gains.real.tolist(),
                    "c_im": paths.gains.imag.tolist(),
                },
                "snr_db": snr_db,
                "seed": seed_i,
            }
            fh.write(json.dumps(record, separators=(",", ":")))
            fh.write("\n")

    split_rng = np.random.default_rng(record_seed(cfg.seed, _SPLIT_TAG))
    order = split_rng.permutation(count)
    n_train = int(count * SPLIT_FRACTIONS[0])
    n_val = int(count * SPLIT_FRACTIONS[1])
    manifest = {
        "train": sorted(int(i) for i in order[:n_train]),
        "val": sorted(int(i) for i in order[n_train : n_train + n_val]),
        "test": sorted(int(i) for i in order[n_train + n_val :]),
    }
    with open(os.path.join(out_dir, SPLIT_FILE), "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, separators=(",", ":"), sort_keys=True)
        fh.write("\n")

    meta = {
        "format_version": DATASET_FORMAT_VERSION,
        "count": count,
        "snr_range": list(snr_range),
        "scenario": asdict(cfg),
        "radio": asdict(radio),
    }
    with open(os.path.join(out_dir, META_FILE), "w", encoding="utf-8") as fh:
        json.dump(meta, fh, separators=(",", ":"), sort_keys=True)
        fh.write("\n")
    return manifest


def load_meta(dataset_dir: str) -> dict:
    with open(os.path.join(dataset_dir, META_FILE), "r", encoding="utf-8") as fh:
        return json.load(fh)


def load_split(dataset_dir: str) -> dict:
    with open(os.path.join(dataset_dir, SPLIT_FILE), "r", encoding="utf-8") as fh:
        return json.load(fh)


def load_radio(dataset_dir: str) -> RadioConfig:
    meta = load_meta(dataset_dir)
    return RadioConfig(**meta["radio"])


def iter_records(dataset_dir: str, indices=None):
    """Yield parsed records (dicts with numpy arrays), optionally a subset.

    Each yielded record has keys ``y2`` (complex N x M), ``q``/``p`` (int8),
    ``geometry`` (:class:`VaaGeometry`), ``truth`` (dict of arrays),
    ``snr_db`` and ``seed``.
    """
    wanted = None if indices is None else set(int(i) for i in indices)
    wavelength = load_radio(dataset_dir).wavelength
    with open(os.path.join(dataset_dir, RECORDS_FILE), "r", encoding="utf-8") as fh:
        for i, line in enumerate(fh):
            if wanted is not None and i not in wanted:
                continue
            raw = json.loads(line)
            yield {
                "index": i,
                "y2": _pairs_to_complex(raw["y2"]),
                "q": np.asarray(raw["q"], dtype=np.int8),
                "p": np.asarray(raw["p"], dtype=np.int8),
                "geometry": VaaGeometry(
                    np.asarray(raw["geometry"]["d"], dtype=float),
                    np.asarray(raw["geometry"]["phi"], dtype=float),
                    wavelength,
                ),
                "truth": {k: np.asarray(v, dtype=float) for k, v in raw["truth"].items()},
                "snr_db": raw["snr_db"],
                "seed": raw["seed"],
            }


def load_slices(dataset_dir: str, role: str, split: str) -> tuple[np.ndarray, np.ndarray]:
    """Per-slice training arrays for one predictor role and split.

    Returns float32 ``(num_slices, channels, length)`` features and
    ``(num_slices, length)`` targets: row slices with q labels, column slices
    with p labels.
    """
    if role not in ("row", "col"):
        raise ValueError(f"role must be 'row' or 'col', got {role!r}")
    indices = load_split(dataset_dir)[split]
    features = []
    targets = []
    for rec in iter_records(dataset_dir, indices):
        feats = _features_all(rec["y2"], rec["geometry"], role)
        labels = rec["q"] if role == "row" else rec["p"].T
        features.append(feats.astype(np.float32))
        targets.append(labels.astype(np.float32))
    if not features:
        raise ValueError(f"split {split!r} of {dataset_dir} is empty")
    return np.concatenate(features), np.concatenate(targets)
