"""Portable MLP inference engine.

Models live on disk as a `model.json` manifest next to a `weights.bin`
blob: little-endian f32 weights in row-major [out x in] order plus [out]
biases, each at a byte offset stated by the manifest. Dense layers with
relu/tanh/identity activations only.

The forward pass computes in f32. f64 batches are cast down on entry and
the result cast back, so application arrays keep their dtype at the cost
of f32 inference precision. The batched matrix multiply accumulates over
input features in a fixed order, which keeps every row's result identical
no matter what batch it arrives in.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .bridge import Tensor
from .errors import (
    DimChainError,
    ManifestError,
    NonFiniteOutputError,
    NonFiniteWeightsError,
    ShapeMismatchError,
)

__all__ = ["DenseLayer", "Model", "load_model", "save_model", "infer", "jacobi_model"]

ACTIVATIONS = ("relu", "tanh", "identity")

MODEL_MANIFEST = "model.json"
WEIGHTS_BLOB = "weights.bin"


@dataclass
class DenseLayer:
    weights: np.ndarray  # [out, in], f32
    bias: np.ndarray  # [out], f32
    activation: str

    def __post_init__(self):
        self.weights = np.ascontiguousarray(self.weights, dtype=np.float32)
        self.bias = np.ascontiguousarray(self.bias, dtype=np.float32)
        if self.weights.ndim != 2 or self.bias.ndim != 1:
            raise ManifestError("layer weights must be [out, in], bias [out]")
        if self.bias.shape[0] != self.weights.shape[0]:
            raise DimChainError(
                f"bias length {self.bias.shape[0]} != out dim {self.weights.shape[0]}"
            )
        if self.activation not in ACTIVATIONS:
            raise ManifestError(f"unknown activation {self.activation!r}")

    @property
    def in_dim(self) -> int:
        return self.weights.shape[1]

    @property
    def out_dim(self) -> int:
        return self.weights.shape[0]


@dataclass
class Model:
    input_features: int
    output_features: int
    layers: list[DenseLayer]

    def __post_init__(self):
        if not self.layers:
            raise ManifestError("model needs at least one layer")
        if self.layers[0].in_dim != self.input_features:
            raise DimChainError(
                f"first layer takes {self.layers[0].in_dim} features,"
                f" model declares {self.input_features}"
            )
        if self.layers[-1].out_dim != self.output_features:
            raise DimChainError(
                f"last layer emits {self.layers[-1].out_dim} features,"
                f" model declares {self.output_features}"
            )
        for a, b in zip(self.layers, self.layers[1:]):
            if a.out_dim != b.in_dim:
                raise DimChainError(
                    f"layer chain breaks: {a.out_dim} -> {b.in_dim}"
                )
        for layer in self.layers:
            if not (np.isfinite(layer.weights).all() and np.isfinite(layer.bias).all()):
                raise NonFiniteWeightsError("model parameters contain NaN/inf")

    @property
    def parameter_count(self) -> int:
        return sum(l.weights.size + l.bias.size for l in self.layers)


def _manifest_paths(path) -> tuple[Path, Path]:
    p = Path(path)
    if p.is_dir():
        return p / MODEL_MANIFEST, p / WEIGHTS_BLOB
    return p, p.parent / WEIGHTS_BLOB


def load_model(path) -> Model:
    """Load a model from a directory (or direct path to its model.json)."""
    manifest_path, weights_path = _manifest_paths(path)
    if not manifest_path.exists():
        raise ManifestError(f"no model manifest at {manifest_path}")
    if not weights_path.exists():
        raise ManifestError(f"no weights blob at {weights_path}")
    try:
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        raise ManifestError(f"unreadable manifest: {e}") from None
    if not isinstance(manifest, dict) or manifest.get("version") != 1:
        raise ManifestError("manifest must declare version 1")
    if manifest.get("dtype") != "f32":
        raise ManifestError("only f32 models are supported")
    try:
        f = int(manifest["input_features"])
        g = int(manifest["output_features"])
        layer_specs = manifest["layers"]
    except (KeyError, TypeError, ValueError) as e:
        raise ManifestError(f"bad manifest field: {e}") from None
    if not isinstance(layer_specs, list) or not layer_specs:
        raise ManifestError("manifest declares no layers")

    blob = weights_path.read_bytes()
    layers = []
    for i, spec in enumerate(layer_specs):
        try:
            n_in = int(spec["in"])
            n_out = int(spec["out"])
            act = spec["activation"]
            w_off = int(spec["weights_offset"])
            b_off = int(spec["bias_offset"])
        except (KeyError, TypeError, ValueError) as e:
            raise ManifestError(f"bad layer {i}: {e}") from None
        w_bytes = n_out * n_in * 4
        b_bytes = n_out * 4
        if w_off < 0 or b_off < 0 or w_off + w_bytes > len(blob) or b_off + b_bytes > len(blob):
            raise ManifestError(
                f"layer {i} offsets exceed weights blob of {len(blob)} bytes"
            )
        w = np.frombuffer(blob, dtype="<f4", count=n_out * n_in, offset=w_off)
        b = np.frombuffer(blob, dtype="<f4", count=n_out, offset=b_off)
        layers.append(DenseLayer(w.reshape(n_out, n_in).copy(), b.copy(), act))
    return Model(f, g, layers)


def save_model(model: Model, path) -> None:
    """Write model.json + weights.bin into directory `path`."""
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    specs = []
    chunks = []
    offset = 0
    for layer in model.layers:
        w = np.ascontiguousarray(layer.weights, dtype="<f4")
        b = np.ascontiguousarray(layer.bias, dtype="<f4")
        specs.append(
            {
                "in": layer.in_dim,
                "out": layer.out_dim,
                "activation": layer.activation,
                "weights_offset": offset,
                "bias_offset": offset + w.nbytes,
            }
        )
        chunks += [w.tobytes(), b.tobytes()]
        offset += w.nbytes + b.nbytes
    manifest = {
        "version": 1,
        "dtype": "f32",
        "input_features": model.input_features,
        "output_features": model.output_features,
        "layers": specs,
    }
    (out / WEIGHTS_BLOB).write_bytes(b"".join(chunks))
    (out / MODEL_MANIFEST).write_text(
        json.dumps(manifest, indent=2) + "\n", encoding="utf-8"
    )


def _matmul_rowwise(x: np.ndarray, w: np.ndarray) -> np.ndarray:
    """x [B, in] @ w.T [in, out] with a fixed accumulation order over the
    input features, so each row's result is independent of batch size."""
    out = np.zeros((x.shape[0], w.shape[0]), dtype=np.float32)
    for f in range(w.shape[1]):
        out += x[:, f, None] * w[None, :, f]
    return out


def infer(model: Model, batch):
    """Run the forward pass on a [B, F] batch.

    Accepts a Tensor or ndarray and returns the same kind; f64 input is
    computed in f32 and cast back.
    """
    is_tensor = isinstance(batch, Tensor)
    x = batch.data if is_tensor else np.asarray(batch)
    if x.ndim != 2:
        raise ShapeMismatchError(f"batch must be rank 2, got shape {tuple(x.shape)}")
    if x.shape[1] != model.input_features:
        raise ShapeMismatchError(
            f"batch has {x.shape[1]} features, model expects {model.input_features}"
        )
    wide = x.dtype == np.float64
    y = np.ascontiguousarray(x, dtype=np.float32)
    with np.errstate(over="ignore", invalid="ignore"):
        for layer in model.layers:
            y = _matmul_rowwise(y, layer.weights) + layer.bias
            if layer.activation == "relu":
                y = np.maximum(y, np.float32(0.0))
            elif layer.activation == "tanh":
                y = np.tanh(y)
    if not np.isfinite(y).all():
        raise NonFiniteOutputError("forward pass produced NaN/inf")
    if wide:
        y = y.astype(np.float64)
    return Tensor(y) if is_tensor else y


def jacobi_model(alpha: float) -> Model:
    """Exact one-layer linear model of the 5-point update
    alpha*(up+down+left+right) + (1-4*alpha)*center, with features ordered
    [up, down, left, center, right]."""
    a = np.float32(alpha)
    w = np.array([[a, a, a, np.float32(1.0) - 4 * a, a]], dtype=np.float32)
    b = np.zeros(1, dtype=np.float32)
    return Model(5, 1, [DenseLayer(w, b, "identity")])
