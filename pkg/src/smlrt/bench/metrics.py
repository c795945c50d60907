"""Quality-of-interest error metrics."""

from __future__ import annotations

import numpy as np

from ..errors import EmptyInputError, LengthMismatchError

__all__ = ["compute_rmse", "compute_mape", "MAPE_EPS"]

# Absolute floor on |truth| so zero-valued truths keep MAPE finite.
MAPE_EPS = 1e-8


def _check(pred, truth):
    p = np.asarray(pred, dtype=np.float64).reshape(-1)
    t = np.asarray(truth, dtype=np.float64).reshape(-1)
    if p.size != t.size:
        raise LengthMismatchError(f"pred has {p.size} values, truth has {t.size}")
    if p.size == 0:
        raise EmptyInputError("metric over zero elements")
    return p, t


def compute_rmse(pred, truth) -> float:
    p, t = _check(pred, truth)
    return float(np.sqrt(np.mean((p - t) ** 2)))


def compute_mape(pred, truth) -> float:
    """Mean absolute percentage error, in percent."""
    p, t = _check(pred, truth)
    denom = np.maximum(np.abs(t), MAPE_EPS)
    return float(100.0 * np.mean(np.abs(p - t) / denom))
