"""Single-trial training: minibatch Adam on an MSE objective.

Hyperparameter ranges follow the published tuning space: learning rate in
[1e-4, 1e-2], weight decay in [1e-4, 1e-1], dropout in [0, 0.8], batch
size in [32, 512]. Weight decay enters as an L2 term on the weight
gradients (not biases). The best-validation parameters are kept, so the
returned model never reflects a late overfit epoch.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .dataset import Dataset
from .errors import DivergedTrainingError
from .mlp import TrainableMLP, init_mlp

__all__ = ["Arch", "HyperParams", "TrialResult", "hidden_dims", "train"]

LR_RANGE = (1e-4, 1e-2)
WD_RANGE = (1e-4, 1e-1)
DROPOUT_RANGE = (0.0, 0.8)
BATCH_RANGE = (32, 512)


@dataclass(frozen=True)
class Arch:
    n_hidden_layers: int
    hidden1_size: int
    feature_multiplier: float
    activation: str = "relu"

    def __post_init__(self):
        if self.n_hidden_layers < 0:
            raise ValueError("n_hidden_layers must be >= 0")
        if self.n_hidden_layers > 0 and self.hidden1_size < 1:
            raise ValueError("hidden1_size must be >= 1")
        if not 0.0 < self.feature_multiplier <= 1.0:
            raise ValueError("feature_multiplier must be in (0, 1]")
        if self.activation not in ("relu", "tanh"):
            raise ValueError(f"unsupported hidden activation {self.activation!r}")


@dataclass(frozen=True)
class HyperParams:
    learning_rate: float = 1e-3
    weight_decay: float = 1e-4
    dropout: float = 0.0
    batch_size: int = 64

    def __post_init__(self):
        if not LR_RANGE[0] <= self.learning_rate <= LR_RANGE[1]:
            raise ValueError(f"learning_rate outside {LR_RANGE}")
        if not WD_RANGE[0] <= self.weight_decay <= WD_RANGE[1]:
            raise ValueError(f"weight_decay outside {WD_RANGE}")
        if not DROPOUT_RANGE[0] <= self.dropout <= DROPOUT_RANGE[1]:
            raise ValueError(f"dropout outside {DROPOUT_RANGE}")
        if not BATCH_RANGE[0] <= self.batch_size <= BATCH_RANGE[1]:
            raise ValueError(f"batch_size outside {BATCH_RANGE}")


@dataclass
class TrialResult:
    arch: Arch
    hypers: HyperParams
    validation_rmse: float
    train_seconds: float
    parameter_count: int
    trial_index: int = 0
    exported_path: Optional[str] = None
    model: Optional[TrainableMLP] = field(default=None, repr=False)


def hidden_dims(arch: Arch) -> list[int]:
    """Sizes of the hidden layers; the multiplier shrinks each layer
    relative to the previous one."""
    dims = []
    size = float(arch.hidden1_size)
    for _ in range(arch.n_hidden_layers):
        dims.append(max(1, int(round(size))))
        size *= arch.feature_multiplier
    return dims


def _val_rmse(model: TrainableMLP, x, y) -> float:
    pred, _ = model.forward(x, train=False)
    return float(np.sqrt(np.mean((pred - y) ** 2)))


def train(dataset: Dataset, arch: Arch, hypers: HyperParams, epochs: int,
          seed: int = 0, trial_index: int = 0) -> TrialResult:
    """Train one model; deterministic given (dataset, arch, hypers, seed).

    Raises DivergedTrainingError when the loss leaves the finite range.
    """
    started = time.perf_counter()
    rng = np.random.default_rng(seed)
    dims = [dataset.n_features] + hidden_dims(arch) + [dataset.n_outputs]
    model = init_mlp(dims, activation=arch.activation, seed=seed,
                     dropout=hypers.dropout if arch.n_hidden_layers else 0.0)

    n = dataset.train_x.shape[0]
    batch = min(hypers.batch_size, n)
    lr, wd = hypers.learning_rate, hypers.weight_decay
    b1, b2, eps = 0.9, 0.999, 1e-8
    m_w = [np.zeros_like(w) for w in model.weights]
    v_w = [np.zeros_like(w) for w in model.weights]
    m_b = [np.zeros_like(b) for b in model.biases]
    v_b = [np.zeros_like(b) for b in model.biases]

    best_rmse = _val_rmse(model, dataset.val_x, dataset.val_y)
    best_params = model.copy_params()
    if not np.isfinite(best_rmse):
        raise DivergedTrainingError("validation loss non-finite at initialization")

    step = 0
    for _ in range(epochs):
        perm = rng.permutation(n)
        for lo in range(0, n, batch):
            idx = perm[lo : lo + batch]
            x, y = dataset.train_x[idx], dataset.train_y[idx]
            pred, caches = model.forward(x, train=True, rng=rng)
            resid = pred - y
            loss = float(np.mean(resid**2))
            if not np.isfinite(loss):
                raise DivergedTrainingError(f"loss became {loss} at step {step}")
            grad_out = (2.0 / resid.size) * resid
            gw, gb = model.backward(caches, grad_out)

            step += 1
            corr1 = 1.0 - b1**step
            corr2 = 1.0 - b2**step
            for k in range(model.n_layers):
                gw[k] = gw[k] + wd * model.weights[k]
                m_w[k] = b1 * m_w[k] + (1 - b1) * gw[k]
                v_w[k] = b2 * v_w[k] + (1 - b2) * gw[k] ** 2
                model.weights[k] -= lr * (m_w[k] / corr1) / (np.sqrt(v_w[k] / corr2) + eps)
                m_b[k] = b1 * m_b[k] + (1 - b1) * gb[k]
                v_b[k] = b2 * v_b[k] + (1 - b2) * gb[k] ** 2
                model.biases[k] -= lr * (m_b[k] / corr1) / (np.sqrt(v_b[k] / corr2) + eps)

        rmse = _val_rmse(model, dataset.val_x, dataset.val_y)
        if not np.isfinite(rmse):
            raise DivergedTrainingError("validation loss became non-finite")
        if rmse < best_rmse:
            best_rmse = rmse
            best_params = model.copy_params()

    model.set_params(best_params)
    return TrialResult(
        arch=arch,
        hypers=hypers,
        validation_rmse=best_rmse,
        train_seconds=time.perf_counter() - started,
        parameter_count=model.parameter_count,
        trial_index=trial_index,
        model=model,
    )
