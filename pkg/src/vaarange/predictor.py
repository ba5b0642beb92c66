"""Learned sign predictors: a small 1-D convolutional encoder-decoder.

One network per role: the row predictor reads a 3-channel subcarrier slice,
the column predictor a 5-channel position slice (with geometry channels). A
stride-2 convolutional encoder, a mirrored transposed-convolution decoder with
skip concatenations, and a per-position 1x1 head produce one logit per slice
position; sigmoid maps logits to the probability that the position shares the
sign of the slice reference.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass

import numpy as np
import torch
from torch import nn

from .sign_recovery import COL_FEATURE_CHANNELS, ROW_FEATURE_CHANNELS

WEIGHT_FORMAT_VERSION = 1
PROB_EPS = 1e-7

DEFAULT_CHANNELS = (16, 32, 64)

_ROLE_CHANNELS = {"row": ROW_FEATURE_CHANNELS, "col": COL_FEATURE_CHANNELS}


class SignPredictor(nn.Module):
    """Encoder-decoder sign classifier for one slice role ("row" or "col")."""

    def __init__(self, role: str, channels: tuple[int, ...] = DEFAULT_CHANNELS):
        super().__init__()
        if role not in _ROLE_CHANNELS:
            raise ValueError(f"role must be 'row' or 'col', got {role!r}")
        channels = tuple(int(c) for c in channels)
        if len(channels) < 2 or any(c < 1 for c in channels):
            raise ValueError(f"need at least two positive channel sizes, got {channels}")
        self.role = role
        self.channels = channels
        self.in_channels = _ROLE_CHANNELS[role]

        self.stem = nn.Conv1d(self.in_channels, channels[0], 3, padding=1)
        self.downs = nn.ModuleList(
            nn.Conv1d(channels[i - 1], channels[i], 3, stride=2, padding=1)
            for i in range(1, len(channels))
        )
        self.ups = nn.ModuleList(
            nn.ConvTranspose1d(channels[i], channels[i - 1], 4, stride=2, padding=1)
            for i in range(len(channels) - 1, 0, -1)
        )
        self.fuses = nn.ModuleList(
            nn.Conv1d(2 * channels[i - 1], channels[i - 1], 3, padding=1)
            for i in range(len(channels) - 1, 0, -1)
        )
        self.head = nn.Conv1d(channels[0], 1, 1)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        """Logits per slice position; input shape (batch, channels, length)."""
        feats = [torch.relu(self.stem(x))]
        for down in self.downs:
            feats.append(torch.relu(down(feats[-1])))
        h = feats[-1]
        for i, (up, fuse) in enumerate(zip(self.ups, self.fuses)):
            skip = feats[-2 - i]
            h = torch.relu(up(h))
            h = h[..., : skip.shape[-1]]
            h = torch.relu(fuse(torch.cat([h, skip], dim=1)))
        return self.head(h).squeeze(1)

    @property
    def num_weights(self) -> int:
        return sum(p.numel() for p in self.parameters())


def predict(model: SignPredictor, features: np.ndarray) -> np.ndarray:
    """Per-position probabilities for one feature slice (channels, length).

    Deterministic given the weights; outputs are clipped into the open
    interval (0, 1) so downstream consumers can rely on strict bounds.
    """
    features = np.asarray(features)
    if features.ndim != 2:
        raise ValueError(f"expected a (channels, length) slice, got shape {features.shape}")
    return predict_batch(model, features[None])[0]


def predict_batch(model: SignPredictor, features: np.ndarray) -> np.ndarray:
    """Vectorized :func:`predict` over a (batch, channels, length) array."""
    features = np.asarray(features)
    if features.ndim != 3 or features.shape[1] != model.in_channels:
        raise ValueError(
            f"expected (batch, {model.in_channels}, length) features for role "
            f"{model.role!r}, got shape {features.shape}"
        )
    dtype = next(model.parameters()).dtype
    model.eval()
    with torch.no_grad():
        logits = model(torch.from_numpy(np.ascontiguousarray(features)).to(dtype))
        probs = torch.sigmoid(logits).double().numpy()
    return np.clip(probs, PROB_EPS, 1.0 - PROB_EPS)


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters for predictor training."""

    learning_rate: float = 1e-3
    batch_size: int = 32
    epochs: int = 50
    patience: int = 5
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0 or self.batch_size <= 0:
            raise ValueError("learning_rate and batch_size must be positive")
        if self.epochs <= 0 or self.patience <= 0:
            raise ValueError("epochs and patience must be positive")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")


def bce_loss(model: SignPredictor, features: torch.Tensor, targets: torch.Tensor) -> torch.Tensor:
    """Mean binary cross-entropy of the model on a feature batch."""
    return nn.functional.binary_cross_entropy_with_logits(model(features), targets)


def loss_and_gradient(
    model: SignPredictor, features: np.ndarray, targets: np.ndarray
) -> tuple[float, np.ndarray]:
    """Training loss and its flattened weight gradient for a batch.

    Used by the finite-difference gradient check; runs in the model's dtype.
    """
    dtype = next(model.parameters()).dtype
    x = torch.from_numpy(np.ascontiguousarray(features)).to(dtype)
    t = torch.from_numpy(np.ascontiguousarray(targets)).to(dtype)
    model.zero_grad(set_to_none=True)
    loss = bce_loss(model, x, t)
    loss.backward()
    grads = [p.grad.detach().reshape(-1) for p in model.parameters()]
    model.zero_grad(set_to_none=True)
    return float(loss.item()), torch.cat(grads).double().numpy()


def flat_weights(model: SignPredictor) -> np.ndarray:
    """All weights concatenated in parameter order (row-major within tensors)."""
    return torch.cat([p.detach().reshape(-1) for p in model.parameters()]).double().numpy()


def set_flat_weights(model: SignPredictor, values: np.ndarray) -> None:
    """Inverse of :func:`flat_weights`."""
    values = np.asarray(values, dtype=float)
    if values.size != model.num_weights:
        raise ValueError(f"expected {model.num_weights} weights, got {values.size}")
    dtype = next(model.parameters()).dtype
    offset = 0
    with torch.no_grad():
        for p in model.parameters():
            chunk = values[offset : offset + p.numel()]
            p.copy_(torch.from_numpy(chunk.reshape(p.shape)).to(dtype))
            offset += p.numel()


def train(
    model: SignPredictor,
    train_data: tuple[np.ndarray, np.ndarray],
    val_data: tuple[np.ndarray, np.ndarray],
    config: TrainConfig,
) -> tuple[SignPredictor, dict]:
    """Mini-batch Adam training against binary cross-entropy.

    ``train_data`` and ``val_data`` are (features, targets) pairs of shapes
    (num, channels, length) and (num, length). Keeps the weights of the best
    validation epoch and stops early when validation loss has not improved for
    ``config.patience`` epochs. Returns the model and a history dict with
    per-epoch train/validation losses.
    """
    x_train, t_train = _as_tensors(model, train_data)
    x_val, t_val = _as_tensors(model, val_data)
    if x_train.shape[0] == 0:
        raise ValueError("training set is empty")

    torch.manual_seed(config.seed)
    gen = torch.Generator().manual_seed(config.seed)
    optimizer = torch.optim.Adam(model.parameters(), lr=config.learning_rate)

    history = {"train_loss": [], "val_loss": []}
    best_val = np.inf
    best_state = copy.deepcopy(model.state_dict())
    stale = 0

    for epoch in range(config.epochs):
        model.train()
        perm = torch.randperm(x_train.shape[0], generator=gen)
        epoch_loss = 0.0
        for start in range(0, x_train.shape[0], config.batch_size):
            idx = perm[start : start + config.batch_size]
            optimizer.zero_grad(set_to_none=True)
            loss = bce_loss(model, x_train[idx], t_train[idx])
            if not torch.isfinite(loss):
                raise RuntimeError(
                    f"training diverged: non-finite loss at epoch {epoch}, "
                    f"batch offset {start} (lr={config.learning_rate})"
                )
            loss.backward()
            optimizer.step()
            epoch_loss += float(loss.item()) * idx.numel()
        history["train_loss"].append(epoch_loss / x_train.shape[0])

        model.eval()
        with torch.no_grad():
            val_loss = float(bce_loss(model, x_val, t_val).item()) if x_val.shape[0] else float("nan")
        history["val_loss"].append(val_loss)

        if x_val.shape[0] and val_loss < best_val - 1e-6:
            best_val = val_loss
            best_state = copy.deepcopy(model.state_dict())
            stale = 0
        else:
            stale += 1
            if x_val.shape[0] and stale >= config.patience:
                break

    if x_val.shape[0]:
        model.load_state_dict(best_state)
    return model, history


def _as_tensors(model, data):
    features, targets = data
    dtype = next(model.parameters()).dtype
    x = torch.from_numpy(np.ascontiguousarray(features)).to(dtype)
    t = torch.from_numpy(np.ascontiguousarray(targets)).to(dtype)
    if x.ndim != 3 or x.shape[1] != model.in_channels:
        raise ValueError(f"features shape {tuple(x.shape)} does not match role {model.role!r}")
    if t.shape != (x.shape[0], x.shape[2]):
        raise ValueError(f"targets shape {tuple(t.shape)} does not match features")
    return x, t


def save_model(model: SignPredictor, path: str, seed: int = 0) -> None:
    """Write weights as a self-describing JSON document.

    The file carries a format version, the role tag, the per-layer shapes and
    row-major weight values as decimal floats, and the training seed. Values
    round-trip exactly (float32 weights are embedded in float64 decimals).
    """
    layers = []
    for name, tensor in model.state_dict().items():
        layers.append(
            {
                "name": name,
                "shape": list(tensor.shape),
                "data": tensor.detach().double().reshape(-1).tolist(),
            }
        )
    doc = {
        "format_version": WEIGHT_FORMAT_VERSION,
        "role": model.role,
        "channels": list(model.channels),
        "seed": int(seed),
        "layers": layers,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)
        fh.write("\n")


def load_model(path: str) -> tuple[SignPredictor, int]:
    """Rebuild a predictor from :func:`save_model` output; returns (model, seed)."""
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    version = doc.get("format_version")
    if version != WEIGHT_FORMAT_VERSION:
        raise ValueError(f"unsupported weight format version {version!r} in {path}")
    model = SignPredictor(doc["role"], tuple(doc["channels"]))
    state = model.state_dict()
    for layer in doc["layers"]:
        name = layer["name"]
        if name not in state:
            raise ValueError(f"unknown layer {name!r} in {path}")
        values = torch.tensor(layer["data"], dtype=torch.float64).reshape(layer["shape"])
        state[name] = values.to(state[name].dtype)
    model.load_state_dict(state)
    return model, int(doc["seed"])
