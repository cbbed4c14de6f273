"""Feed-forward neural surrogate for R_t.

A small from-scratch MLP (rectified-linear hidden layers, linear output)
trained with mini-batch gradient descent and adaptive moment estimation.
All arithmetic is float64 and fully seeded, so training is reproducible
bit for bit.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DataError,
    DivergenceError,
    InvalidParameterError,
)

DEFAULT_HIDDEN = (1000, 50)


@dataclass(frozen=True)
class NetworkConfig:
    hidden_layers: tuple = DEFAULT_HIDDEN
    seed: int = 0

    def __post_init__(self):
        layers = tuple(int(h) for h in self.hidden_layers)
        if any(h <= 0 for h in layers):
            raise InvalidParameterError("hidden layer sizes must be positive")
        object.__setattr__(self, "hidden_layers", layers)


@dataclass(frozen=True)
class TrainingConfig:
    batch_size: int = 64
    learning_rate: float = 1e-3
    max_epochs: int = 500
    patience: int = 20
    val_fraction: float = 0.1
    # Step size halves every `lr_halving_epochs`; None means max_epochs // 8.
    lr_halving_epochs: int | None = None

    def halving_epochs(self) -> int:
        if self.lr_halving_epochs is not None:
            return max(1, self.lr_halving_epochs)
        return max(1, self.max_epochs // 8)


@dataclass(frozen=True)
class EvalReport:
    r2: float
    rmse: float
    n_test: int


def init_weights(n_inputs, hidden_layers, rng):
    """He-style initialization for ReLU layers; zero biases."""
    sizes = [n_inputs, *hidden_layers, 1]
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        scale = math.sqrt(2.0 / fan_in)
        weights.append(rng.standard_normal((fan_in, fan_out)) * scale)
        biases.append(np.zeros(fan_out))
    # Zero output layer: the net starts at its output bias and learns
    # deviations, which stabilizes the first optimization steps.
    weights[-1][:] = 0.0
    return weights, biases


def forward_pass(weights, biases, X):
    """Returns (output column, list of layer activations incl. input)."""
    activations = [X]
    a = X
    last = len(weights) - 1
    for idx, (W, b) in enumerate(zip(weights, biases)):
        z = a @ W + b
        a = z if idx == last else np.maximum(z, 0.0)
        activations.append(a)
    return a[:, 0], activations


def backward_pass(weights, activations, residual):
    """Gradients of mean squared error 0.5*mean((pred-y)^2) wrt weights/biases.

    `residual` is (pred - y) / n_samples.
    """
    grads_w = [None] * len(weights)
    grads_b = [None] * len(weights)
    delta = residual[:, None]
    for idx in range(len(weights) - 1, -1, -1):
        a_prev = activations[idx]
        grads_w[idx] = a_prev.T @ delta
        grads_b[idx] = delta.sum(axis=0)
        if idx > 0:
            delta = (delta @ weights[idx].T) * (activations[idx] > 0.0)
    return grads_w, grads_b


@dataclass
class TrainedPredictor:
    """Trained network plus the train-split standardization it expects."""

    weights: list
    biases: list
    standardization: tuple  # (means, stds)
    config: NetworkConfig
    training_log: list = field(default_factory=list)  # (epoch, train, val) losses

    def predict(self, X) -> np.ndarray:
        """Predicted R_t for raw (unstandardized) feature rows, clamped at 0."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        means, stds = self.standardization
        if X.shape[1] != len(means):
            raise InvalidParameterError(
                f"expected {len(means)} features, got {X.shape[1]}"
            )
        out, _ = forward_pass(self.weights, self.biases, (X - means) / stds)
        return np.maximum(out, 0.0)

    def predict_row(self, row) -> float:
        return float(self.predict(np.asarray(row, dtype=float)[None, :])[0])

    def to_json(self) -> str:
        return json.dumps(
            {
                "hidden_layers": list(self.config.hidden_layers),
                "seed": self.config.seed,
                "weights": [w.tolist() for w in self.weights],
                "biases": [b.tolist() for b in self.biases],
                "standardization": {
                    "means": list(self.standardization[0]),
                    "stds": list(self.standardization[1]),
                },
                "training_log": self.training_log,
            }
        )

    @staticmethod
    def from_json(text: str) -> "TrainedPredictor":
        doc = json.loads(text)
        return TrainedPredictor(
            weights=[np.array(w, dtype=float) for w in doc["weights"]],
            biases=[np.array(b, dtype=float) for b in doc["biases"]],
            standardization=(
                np.array(doc["standardization"]["means"], dtype=float),
                np.array(doc["standardization"]["stds"], dtype=float),
            ),
            config=NetworkConfig(
                hidden_layers=tuple(doc["hidden_layers"]), seed=doc["seed"]
            ),
            training_log=[tuple(entry) for entry in doc["training_log"]],
        )


def _canonical_order(X, y):
    # Batch schedules are derived from the seed over canonically sorted rows,
    # so the result is independent of the storage order of the input.
    order = np.lexsort(np.vstack([X.T, y]))
    return order


def fit_network(
    X,
    y,
    config: NetworkConfig = NetworkConfig(),
    training: TrainingConfig = TrainingConfig(),
    standardization=None,
) -> TrainedPredictor:
    """Train the MLP on raw feature rows with labels.

    Standardization stats default to the z-score of the provided rows.
    Early stopping watches a seeded validation carve-out with the
    configured patience.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or len(X) != len(y):
        raise DataError("X must be 2-D with one label per row")

    order = _canonical_order(X, y)
    X, ys = X[order], y[order]

    if standardization is None:
        means = X.mean(axis=0)
        stds = X.std(axis=0)
        stds[stds == 0] = 1.0
        standardization = (means, stds)
    means, stds = standardization
    Xs = (X - means) / stds

    rng = np.random.default_rng(config.seed)
    weights, biases = init_weights(Xs.shape[1], config.hidden_layers, rng)
    # Start the output at the target mean; the optimizer then only has to
    # learn deviations from it.
    biases[-1][:] = ys.mean()

    n = len(Xs)
    n_val = max(1, int(round(training.val_fraction * n))) if n >= 10 else 0
    perm = rng.permutation(n)
    val_idx, train_idx = perm[:n_val], perm[n_val:]
    Xt, yt = Xs[train_idx], ys[train_idx]
    Xv, yv = Xs[val_idx], ys[val_idx]

    m_w = [np.zeros_like(w) for w in weights]
    v_w = [np.zeros_like(w) for w in weights]
    m_b = [np.zeros_like(b) for b in biases]
    v_b = [np.zeros_like(b) for b in biases]
    beta1, beta2, eps = 0.9, 0.999, 1e-8
    step = 0

    best_val = math.inf
    best_state = None
    stale = 0
    log = []
    halving = training.halving_epochs()
    for epoch in range(training.max_epochs):
        epoch_lr = training.learning_rate * 0.5 ** (epoch // halving)
        batch_order = rng.permutation(len(Xt))
        for start in range(0, len(Xt), training.batch_size):
            idx = batch_order[start : start + training.batch_size]
            xb, yb = Xt[idx], yt[idx]
            pred, acts = forward_pass(weights, biases, xb)
            residual = (pred - yb) / len(yb)
            grads_w, grads_b = backward_pass(weights, acts, residual)
            step += 1
            lr_t = epoch_lr * math.sqrt(1 - beta2**step) / (1 - beta1**step)
            for j in range(len(weights)):
                m_w[j] = beta1 * m_w[j] + (1 - beta1) * grads_w[j]
                v_w[j] = beta2 * v_w[j] + (1 - beta2) * grads_w[j] ** 2
                weights[j] -= lr_t * m_w[j] / (np.sqrt(v_w[j]) + eps)
                m_b[j] = beta1 * m_b[j] + (1 - beta1) * grads_b[j]
                v_b[j] = beta2 * v_b[j] + (1 - beta2) * grads_b[j] ** 2
                biases[j] -= lr_t * m_b[j] / (np.sqrt(v_b[j]) + eps)

        train_loss = _mse(weights, biases, Xt, yt)
        val_loss = _mse(weights, biases, Xv, yv) if n_val else train_loss
        if not (math.isfinite(train_loss) and math.isfinite(val_loss)):
            raise DivergenceError(f"loss became non-finite at epoch {epoch}")
        log.append((epoch, train_loss, val_loss))

        if val_loss < best_val - 1e-15:
            best_val = val_loss
            best_state = ([w.copy() for w in weights], [b.copy() for b in biases])
            stale = 0
        else:
            stale += 1
            if stale > training.patience:
                break

    if best_state is not None:
        weights, biases = best_state
    return TrainedPredictor(
        weights=weights,
        biases=biases,
        standardization=(np.asarray(means, dtype=float), np.asarray(stds, dtype=float)),
        config=config,
        training_log=log,
    )


def _mse(weights, biases, X, y):
    pred, _ = forward_pass(weights, biases, X)
    return float(np.mean((pred - y) ** 2))


def train(dataset, config: NetworkConfig = NetworkConfig(), training: TrainingConfig = TrainingConfig()) -> TrainedPredictor:
    """Train on the train split of a Dataset, using its train-only
    standardization stats."""
    X, y = dataset.matrix("train")
    if len(X) < 100:
        raise DataError(f"need at least 100 train rows, got {len(X)}")
    if np.isnan(y).any():
        raise DataError("train rows must all carry an R_t label")
    if dataset.standardization is None:
        dataset.compute_standardization()
    return fit_network(X, y, config, training, standardization=dataset.standardization)


def evaluate(predictor, dataset) -> EvalReport:
    """R^2 and RMSE of the predictor on the test split."""
    X, y = dataset.matrix("test")
    if len(X) == 0:
        raise DataError("test split is empty")
    pred = predictor.predict(X)
    return eval_report(y, pred)


def eval_report(y, pred) -> EvalReport:
    y = np.asarray(y, dtype=float)
    pred = np.asarray(pred, dtype=float)
    ss_res = float(np.sum((y - pred) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot == 0:
        raise DataError("R^2 is undefined for constant test targets")
    rmse = math.sqrt(ss_res / len(y))
    return EvalReport(r2=1.0 - ss_res / ss_tot, rmse=rmse, n_test=len(y))


def _loss_and_grads(weights, biases, X, y):
    pred, acts = forward_pass(weights, biases, X)
    residual = (pred - y) / len(y)
    loss = 0.5 * float(np.sum((pred - y) ** 2)) / len(y)
    grads_w, grads_b = backward_pass(weights, acts, residual)
    return loss, grads_w, grads_b


def gradient_check(config: NetworkConfig, X, y, h: float = 1e-5) -> float:
    """Max relative error between backprop and central finite differences.

    Checks every parameter of a freshly initialized network on the given
    batch; only feasible for small topologies.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    rng = np.random.default_rng(config.seed)
    weights, biases = init_weights(X.shape[1], config.hidden_layers, rng)
    # Training initializes the output layer and all biases to zero. Here
    # that would make upstream gradients vacuously zero and park hidden
    # pre-activations exactly on the ReLU kink (where finite differences
    # disagree with the subgradient), so randomize both for the check.
    weights[-1] = rng.normal(0.0, 0.5, weights[-1].shape)
    biases = [rng.normal(0.0, 0.5, b.shape) for b in biases]

    def loss_fn():
        pred, _ = forward_pass(weights, biases, X)
        return 0.5 * float(np.sum((pred - y) ** 2)) / len(y)

    _, grads_w, grads_b = _loss_and_grads(weights, biases, X, y)

    max_err = 0.0
    for params, grads in ((weights, grads_w), (biases, grads_b)):
        for arr, grad in zip(params, grads):
            flat = arr.reshape(-1)
            gflat = grad.reshape(-1)
            for j in range(flat.size):
                orig = flat[j]
                flat[j] = orig + h
                up = loss_fn()
                flat[j] = orig - h
                down = loss_fn()
                flat[j] = orig
                numeric = (up - down) / (2 * h)
                denom = max(abs(numeric), abs(gflat[j]), 1e-8)
                max_err = max(max_err, abs(numeric - gflat[j]) / denom)
    return max_err


class FeedForwardRegressor:
    """Scikit-learn style estimator facade over the from-scratch MLP.

    fit/predict/get_params only; lets the surrogate drop into sklearn
    pipelines and model-selection utilities.
    """

    def __init__(
        self,
        hidden_layers=DEFAULT_HIDDEN,
        seed=0,
        batch_size=64,
        learning_rate=1e-3,
        max_epochs=500,
        patience=20,
        val_fraction=0.1,
    ):
        self.hidden_layers = hidden_layers
        self.seed = seed
        self.batch_size = batch_size
        self.learning_rate = learning_rate
        self.max_epochs = max_epochs
        self.patience = patience
        self.val_fraction = val_fraction

    def get_params(self, deep=True):
        return {
            "hidden_layers": self.hidden_layers,
            "seed": self.seed,
            "batch_size": self.batch_size,
            "learning_rate": self.learning_rate,
            "max_epochs": self.max_epochs,
            "patience": self.patience,
            "val_fraction": self.val_fraction,
        }

    def set_params(self, **params):
        for key, value in params.items():
            if key not in self.get_params():
                raise InvalidParameterError(f"unknown parameter {key!r}")
            setattr(self, key, value)
        return self

    def fit(self, X, y):
        config = NetworkConfig(hidden_layers=tuple(self.hidden_layers), seed=self.seed)
        training = TrainingConfig(
            batch_size=self.batch_size,
            learning_rate=self.learning_rate,
            max_epochs=self.max_epochs,
            patience=self.patience,
            val_fraction=self.val_fraction,
        )
        self.model_ = fit_network(X, y, config, training)
        return self

    def predict(self, X):
        if not hasattr(self, "model_"):
            raise DataError("estimator is not fitted")
        return self.model_.predict(X)

    def score(self, X, y):
        return eval_report(y, self.predict(X)).r2


def grid_search(
    dataset,
    hidden_options=((1000, 50), (500, 50), (1000, 100)),
    lr_options=(1e-3, 1e-4),
    folds: int = 3,
    seed: int = 0,
    training: TrainingConfig = TrainingConfig(max_epochs=100),
):
    """Cross-validated grid search over topology and step size.

    Returns (best NetworkConfig, best TrainingConfig, per-candidate mean
    validation MSE). Optional tooling; not part of the default pipeline.
    """
    X, y = dataset.matrix("train")
    if dataset.standardization is None:
        dataset.compute_standardization()
    rng = np.random.default_rng(seed)
    fold_of = rng.integers(0, folds, size=len(X))
    results = []
    for hidden in hidden_options:
        for lr in lr_options:
            losses = []
            for fold in range(folds):
                mask = fold_of == fold
                hyper = TrainingConfig(
                    batch_size=training.batch_size,
                    learning_rate=lr,
                    max_epochs=training.max_epochs,
                    patience=training.patience,
                    val_fraction=training.val_fraction,
                )
                model = fit_network(
                    X[~mask], y[~mask],
                    NetworkConfig(hidden_layers=hidden, seed=seed),
                    hyper,
                    standardization=dataset.standardization,
                )
                pred = model.predict(X[mask])
                losses.append(float(np.mean((pred - y[mask]) ** 2)))
            results.append(((tuple(hidden), lr), float(np.mean(losses))))
    (best_hidden, best_lr), _ = min(results, key=lambda kv: kv[1])
    best_config = NetworkConfig(hidden_layers=best_hidden, seed=seed)
    best_training = TrainingConfig(
        batch_size=training.batch_size,
        learning_rate=best_lr,
        max_epochs=training.max_epochs,
        patience=training.patience,
        val_fraction=training.val_fraction,
    )
    return best_config, best_training, dict(results)
