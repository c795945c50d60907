"""Turn SRDB regions into flat supervised-learning splits."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyDatasetError
from .srdb_reader import read_region

__all__ = ["Dataset", "load_dataset", "sweep_split"]


@dataclass
class Dataset:
    train_x: np.ndarray
    train_y: np.ndarray
    val_x: np.ndarray
    val_y: np.ndarray

    @property
    def n_features(self) -> int:
        return self.train_x.shape[1]

    @property
    def n_outputs(self) -> int:
        return self.train_y.shape[1]


def sweep_split(input_shape, output_shape) -> int:
    """Number of leading sweep axes shared by the per-record shapes.

    Records store (sweep..., features...) tensors; inputs and outputs share
    the sweep prefix, and each keeps at least one trailing feature axis.
    """
    limit = min(len(input_shape), len(output_shape)) - 1
    k = 0
    while k < limit and input_shape[k] == output_shape[k]:
        k += 1
    return k


def load_dataset(db_path, region: str, split_fraction: float = 0.8,
                 seed: int = 0) -> Dataset:
    """Flatten a region's records to [samples, F] / [samples, G] pairs and
    make a deterministic shuffled train/validation split."""
    if not 0.0 < split_fraction < 1.0:
        raise ValueError("split_fraction must be in (0, 1)")
    inputs, outputs, _ = read_region(db_path, region)
    if inputs.shape[0] == 0:
        raise EmptyDatasetError(f"region {region!r} holds no records")

    n_sweep = sweep_split(inputs.shape[1:], outputs.shape[1:])
    rows = inputs.shape[0] * int(np.prod(inputs.shape[1 : 1 + n_sweep], dtype=np.int64))
    x = inputs.reshape(rows, -1).astype(np.float64)
    y = outputs.reshape(rows, -1).astype(np.float64)
    if rows < 2:
        raise EmptyDatasetError(
            f"region {region!r} flattens to {rows} sample(s); need at least 2"
        )

    perm = np.random.default_rng(seed).permutation(rows)
    cut = int(round(rows * split_fraction))
    cut = min(max(cut, 1), rows - 1)
    train_idx, val_idx = perm[:cut], perm[cut:]
    return Dataset(x[train_idx], y[train_idx], x[val_idx], y[val_idx])
