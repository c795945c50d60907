import json

import numpy as np
import pytest

from smlrt.bridge import Tensor
from smlrt.errors import (
    DimChainError,
    ManifestError,
    NonFiniteOutputError,
    NonFiniteWeightsError,
    ShapeMismatchError,
)
from smlrt.models import DenseLayer, Model, infer, jacobi_model, load_model, save_model


def identity_model(n=5):
    return Model(n, n, [DenseLayer(np.eye(n, dtype=np.float32),
                                   np.zeros(n, dtype=np.float32), "identity")])


def random_model(rng, dims, activation="tanh"):
    layers = []
    for a, b in zip(dims, dims[1:]):
        layers.append(
            DenseLayer(
                rng.normal(scale=0.5, size=(b, a)).astype(np.float32),
                rng.normal(scale=0.1, size=b).astype(np.float32),
                activation,
            )
        )
    layers[-1].activation = "identity"
    return Model(dims[0], dims[-1], layers)


class TestLoadSave:
    def test_identity_round_trip(self, tmp_path):
        save_model(identity_model(), tmp_path / "m")
        m = load_model(tmp_path / "m")
        x = np.random.default_rng(0).normal(size=(7, 5)).astype(np.float32)
        assert np.array_equal(infer(m, x), x)

    def test_load_by_manifest_path(self, tmp_path):
        save_model(identity_model(3), tmp_path / "m")
        m = load_model(tmp_path / "m" / "model.json")
        assert m.input_features == 3

    def test_dim_chain_error(self, tmp_path):
        save_model(random_model(np.random.default_rng(1), [5, 8, 1]), tmp_path / "m")
        manifest = json.loads((tmp_path / "m" / "model.json").read_text())
        manifest["layers"][1]["in"] = 7
        (tmp_path / "m" / "model.json").write_text(json.dumps(manifest))
        with pytest.raises((DimChainError, ManifestError)):
            load_model(tmp_path / "m")

    def test_truncated_weights(self, tmp_path):
        save_model(identity_model(), tmp_path / "m")
        blob = (tmp_path / "m" / "weights.bin").read_bytes()
        (tmp_path / "m" / "weights.bin").write_bytes(blob[:-8])
        with pytest.raises(ManifestError):
            load_model(tmp_path / "m")

    def test_non_finite_weights_rejected(self):
        w = np.eye(2, dtype=np.float32)
        w[0, 0] = np.nan
        with pytest.raises(NonFiniteWeightsError):
            Model(2, 2, [DenseLayer(w, np.zeros(2, dtype=np.float32), "identity")])

    def test_bad_version(self, tmp_path):
        save_model(identity_model(2), tmp_path / "m")
        manifest = json.loads((tmp_path / "m" / "model.json").read_text())
        manifest["version"] = 9
        (tmp_path / "m" / "model.json").write_text(json.dumps(manifest))
        with pytest.raises(ManifestError):
            load_model(tmp_path / "m")


class TestInfer:
    def test_hand_matrix_multiply(self):
        m = Model(2, 1, [DenseLayer(np.array([[0.25, 0.25]], dtype=np.float32),
                                    np.array([0.5], dtype=np.float32), "identity")])
        out = infer(m, np.array([[1.0, 3.0]], dtype=np.float32))
        assert out[0, 0] == pytest.approx(1.5)

    def test_relu(self):
        m = Model(2, 2, [DenseLayer(np.eye(2, dtype=np.float32),
                                    np.zeros(2, dtype=np.float32), "relu")])
        out = infer(m, np.array([[-1.0, 2.0]], dtype=np.float32))
        assert out.tolist() == [[0.0, 2.0]]

    def test_rank_and_feature_checks(self):
        m = identity_model(5)
        with pytest.raises(ShapeMismatchError):
            infer(m, np.zeros((3,), dtype=np.float32))
        with pytest.raises(ShapeMismatchError):
            infer(m, np.zeros((3, 4), dtype=np.float32))

    def test_f64_round_trips_dtype(self):
        m = identity_model(4)
        x = np.random.default_rng(0).normal(size=(6, 4))
        out = infer(m, x)
        assert out.dtype == np.float64
        assert np.allclose(out, x, atol=1e-6)

    def test_tensor_in_tensor_out(self):
        m = identity_model(4)
        t = Tensor(np.ones((2, 4), dtype=np.float32))
        out = infer(m, t)
        assert isinstance(out, Tensor)

    def test_overflow_detected(self):
        big = np.full((1, 1), 3e38, dtype=np.float32)
        m = Model(1, 1, [DenseLayer(np.array([[2.0]], dtype=np.float32),
                                    np.zeros(1, dtype=np.float32), "identity")])
        with pytest.raises(NonFiniteOutputError):
            infer(m, big)

    def test_determinism(self):
        rng = np.random.default_rng(5)
        m = random_model(rng, [6, 16, 3])
        x = rng.normal(size=(32, 6)).astype(np.float32)
        assert np.array_equal(infer(m, x), infer(m, x))

    def test_batch_independence_exact(self):
        rng = np.random.default_rng(11)
        m = random_model(rng, [5, 12, 12, 2], activation="relu")
        x = rng.normal(size=(33, 5)).astype(np.float32)
        whole = infer(m, x)
        rows = np.concatenate([infer(m, x[k : k + 1]) for k in range(33)], axis=0)
        assert np.array_equal(whole, rows)
        split = np.concatenate([infer(m, x[:10]), infer(m, x[10:])], axis=0)
        assert np.array_equal(whole, split)

    def test_linearity_for_identity_activations(self):
        rng = np.random.default_rng(21)
        for _ in range(10):
            m = random_model(rng, [4, 8, 3], activation="identity")
            x = rng.normal(size=(5, 4)).astype(np.float32)
            a = np.float32(rng.uniform(0.5, 2.0))
            lhs = infer(m, (a * x).astype(np.float32)).astype(np.float64)
            bias_term = infer(m, np.zeros((1, 4), dtype=np.float32)).astype(np.float64)
            rhs = a * infer(m, x).astype(np.float64) - (a - 1.0) * bias_term
            scale = np.maximum(np.abs(rhs), 1.0)
            assert np.all(np.abs(lhs - rhs) / scale <= 1e-5)

    def test_gradient_matches_finite_differences(self):
        # analytic chain rule vs central differences on a 2-layer tanh net;
        # guards against transposed weights and activation mix-ups
        rng = np.random.default_rng(31)
        m = random_model(rng, [4, 8, 1], activation="tanh")
        x0 = rng.normal(size=4).astype(np.float64)

        def forward(x):
            return float(infer(m, x.reshape(1, -1).astype(np.float32))[0, 0])

        w1 = m.layers[0].weights.astype(np.float64)
        b1 = m.layers[0].bias.astype(np.float64)
        w2 = m.layers[1].weights.astype(np.float64)
        z1 = w1 @ x0 + b1
        a1 = np.tanh(z1)
        grad = w2[0] @ (np.diag(1 - a1**2) @ w1)

        h = 1e-3
        for k in range(4):
            e = np.zeros(4)
            e[k] = h
            numeric = (forward(x0 + e) - forward(x0 - e)) / (2 * h)
            assert abs(numeric - grad[k]) <= 1e-4 * max(1.0, abs(grad[k]))


class TestJacobiModel:
    def test_worked_example_row(self):
        m = jacobi_model(0.25)
        out = infer(m, np.array([[1, 9, 4, 5, 6]], dtype=np.float32))
        assert out[0, 0] == 5.0

    def test_alpha_zero_is_center_passthrough(self):
        m = jacobi_model(0.0)
        x = np.array([[3, 1, 4, 1.5, 9]], dtype=np.float32)
        assert infer(m, x)[0, 0] == np.float32(1.5)

    def test_constant_field_preserved(self):
        for alpha in (0.0, 0.1, 0.25, 0.5):
            m = jacobi_model(alpha)
            for c in (0.0, 1.0, -3.5):
                x = np.full((1, 5), c, dtype=np.float32)
                assert infer(m, x)[0, 0] == pytest.approx(c, abs=1e-6)

    def test_shapes(self):
        m = jacobi_model(0.25)
        assert (m.input_features, m.output_features) == (5, 1)
        assert m.parameter_count == 6
