"""Trainable MLP with hand-rolled backprop.

Hidden layers share one activation (relu or tanh); the output layer is
linear. Dropout (inverted scaling) applies to hidden activations during
training only. Everything runs in float64 numpy; models are cast to f32
at export time.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["TrainableMLP", "init_mlp"]

_ACTS = {
    "relu": (lambda z: np.maximum(z, 0.0), lambda z, a: (z > 0.0).astype(z.dtype)),
    "tanh": (np.tanh, lambda z, a: 1.0 - a**2),
}


@dataclass
class TrainableMLP:
    weights: list[np.ndarray]  # [out, in]
    biases: list[np.ndarray]  # [out]
    activation: str = "relu"  # hidden layers only
    dropout: float = 0.0

    @property
    def n_layers(self) -> int:
        return len(self.weights)

    @property
    def dims(self) -> list[int]:
        return [self.weights[0].shape[1]] + [w.shape[0] for w in self.weights]

    @property
    def parameter_count(self) -> int:
        return sum(w.size + b.size for w, b in zip(self.weights, self.biases))

    def copy_params(self):
        return [w.copy() for w in self.weights], [b.copy() for b in self.biases]

    def set_params(self, params):
        weights, biases = params
        self.weights = [w.copy() for w in weights]
        self.biases = [b.copy() for b in biases]

    def forward(self, x: np.ndarray, train: bool = False, rng=None):
        """Returns (output, caches); caches feed backward()."""
        act, _ = _ACTS.get(self.activation, (None, None))
        a = np.asarray(x, dtype=np.float64)
        caches = []
        for k, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = a @ w.T + b
            if k == self.n_layers - 1:
                activated = z  # linear output layer
                mask = None
                out = z
            else:
                activated = act(z) if act else z
                mask = None
                out = activated
                if train and self.dropout > 0.0:
                    keep = 1.0 - self.dropout
                    mask = (rng.random(out.shape) < keep) / keep
                    out = out * mask
            caches.append((a, z, activated, mask))
            a = out
        return a, caches

    def backward(self, caches, grad_out: np.ndarray):
        """Gradient of a scalar loss w.r.t. every weight and bias, given
        dLoss/dOutput. Returns (grad_weights, grad_biases)."""
        _, dact = _ACTS.get(self.activation, (None, None))
        gw = [None] * self.n_layers
        gb = [None] * self.n_layers
        delta = np.asarray(grad_out, dtype=np.float64)
        for k in range(self.n_layers - 1, -1, -1):
            a_prev, z, activated, mask = caches[k]
            if k != self.n_layers - 1:
                if mask is not None:
                    delta = delta * mask
                if dact is not None:
                    delta = delta * dact(z, activated)
            gw[k] = delta.T @ a_prev
            gb[k] = delta.sum(axis=0)
            if k:
                delta = delta @ self.weights[k]
        return gw, gb


def init_mlp(dims, activation: str = "relu", seed: int = 0,
             dropout: float = 0.0) -> TrainableMLP:
    """He initialization for relu, Glorot-style for tanh/linear."""
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for fan_in, fan_out in zip(dims, dims[1:]):
        scale = np.sqrt(2.0 / fan_in) if activation == "relu" else np.sqrt(1.0 / fan_in)
        weights.append(rng.normal(0.0, scale, size=(fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
    return TrainableMLP(weights, biases, activation=activation, dropout=dropout)
