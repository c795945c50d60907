"""Write trained models in the portable inference format.

The format is the runtime's external interface: a model.json manifest
(version 1, f32) plus weights.bin holding little-endian f32 weight
matrices in row-major [out x in] order and [out] bias vectors at the
offsets the manifest declares. Dropout exists only during training and
never reaches the exported file.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import NonFiniteWeightsError
from .mlp import TrainableMLP

__all__ = ["export_model"]


def export_model(model: TrainableMLP, path) -> None:
    for w, b in zip(model.weights, model.biases):
        if not (np.isfinite(w).all() and np.isfinite(b).all()):
            raise NonFiniteWeightsError("refusing to export NaN/inf parameters")

    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    layers = []
    chunks = []
    offset = 0
    for k, (w, b) in enumerate(zip(model.weights, model.biases)):
        w32 = np.ascontiguousarray(w, dtype="<f4")
        b32 = np.ascontiguousarray(b, dtype="<f4")
        last = k == model.n_layers - 1
        layers.append(
            {
                "in": int(w.shape[1]),
                "out": int(w.shape[0]),
                "activation": "identity" if last else model.activation,
                "weights_offset": offset,
                "bias_offset": offset + w32.nbytes,
            }
        )
        chunks += [w32.tobytes(), b32.tobytes()]
        offset += w32.nbytes + b32.nbytes

    manifest = {
        "version": 1,
        "dtype": "f32",
        "input_features": int(model.weights[0].shape[1]),
        "output_features": int(model.weights[-1].shape[0]),
        "layers": layers,
    }
    (out / "weights.bin").write_bytes(b"".join(chunks))
    (out / "model.json").write_text(json.dumps(manifest, indent=2) + "\n",
                                    encoding="utf-8")
