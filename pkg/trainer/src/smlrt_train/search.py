"""Reduced-scale architecture/hyperparameter search.

The published workflow nests an outer architecture search around an inner
hyperparameter search and stops early after five consecutive trials
without improvement. At desk scale, Gaussian-process machinery buys
nothing over randomized proposals, so both levels sample uniformly (log-
uniform for learning rate and weight decay) while keeping the nesting and
the early-stop rule. Inference latency is proxied by parameter count when
ranking equal-error trials.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .dataset import Dataset
from .errors import DivergedTrainingError
from .train import Arch, HyperParams, TrialResult, train

__all__ = ["ArchSpace", "sample_arch", "sample_hypers", "search"]

EARLY_STOP_PATIENCE = 5


@dataclass(frozen=True)
class ArchSpace:
    n_hidden_layers: tuple[int, int] = (0, 2)
    hidden1_choices: tuple[int, ...] = (8, 16, 32, 64)
    feature_multiplier: tuple[float, float] = (0.25, 0.8)
    activations: tuple[str, ...] = ("relu", "tanh")


def sample_arch(space: ArchSpace, rng: np.random.Generator) -> Arch:
    return Arch(
        n_hidden_layers=int(rng.integers(space.n_hidden_layers[0],
                                         space.n_hidden_layers[1] + 1)),
        hidden1_size=int(rng.choice(space.hidden1_choices)),
        feature_multiplier=float(rng.uniform(*space.feature_multiplier)),
        activation=str(rng.choice(space.activations)),
    )


def _log_uniform(rng, lo, hi) -> float:
    return float(math.exp(rng.uniform(math.log(lo), math.log(hi))))


def sample_hypers(rng: np.random.Generator) -> HyperParams:
    return HyperParams(
        learning_rate=_log_uniform(rng, 1e-4, 1e-2),
        weight_decay=_log_uniform(rng, 1e-4, 1e-1),
        dropout=float(rng.uniform(0.0, 0.8)),
        batch_size=int(rng.integers(32, 513)),
    )


def search(
    space: ArchSpace,
    dataset: Dataset,
    n_trials: int,
    seed: int = 0,
    epochs: int = 60,
    inner_trials: int = 3,
    patience: int = EARLY_STOP_PATIENCE,
) -> list[TrialResult]:
    """Run up to n_trials trainings; returns results sorted by
    (validation_rmse, parameter_count).

    Each outer iteration proposes an architecture; the inner loop tunes its
    hyperparameters. Failed (diverged) trials are recorded with infinite
    error rather than aborting the search. The incumbent error over the
    chronological trial order is non-increasing by construction; use
    trial_index to recover chronology from the sorted list.
    """
    if n_trials < 1:
        raise ValueError("n_trials must be >= 1")
    rng = np.random.default_rng(seed)
    trials: list[TrialResult] = []
    best = math.inf
    stagnant = 0
    stop = False
    while len(trials) < n_trials and not stop:
        arch = sample_arch(space, rng)
        for _ in range(inner_trials):
            if len(trials) >= n_trials:
                break
            hypers = sample_hypers(rng)
            index = len(trials)
            trial_seed = int(rng.integers(0, 2**31))
            try:
                result = train(dataset, arch, hypers, epochs=epochs,
                               seed=trial_seed, trial_index=index)
            except DivergedTrainingError:
                result = TrialResult(
                    arch=arch, hypers=hypers, validation_rmse=math.inf,
                    train_seconds=0.0, parameter_count=0, trial_index=index,
                )
            trials.append(result)
            if result.validation_rmse < best:
                best = result.validation_rmse
                stagnant = 0
            else:
                stagnant += 1
                if stagnant >= patience:
                    stop = True
                    break
    return sorted(trials, key=lambda t: (t.validation_rmse, t.parameter_count))
