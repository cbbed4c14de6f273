"""Shapley-value attribution of surrogate predictions to features.

Missing features are imputed by substituting the background-mean value
(interventional imputation). The exact estimator enumerates all
coalitions and is limited to small feature counts; the permutation
sampler scales to the full 32 features and enforces the efficiency
property by construction.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, InvalidParameterError, TooManyFeaturesError

EXACT_FEATURE_LIMIT = 16
DEFAULT_PERMUTATIONS = 2048


@dataclass
class Attribution:
    feature_names: tuple
    phi: np.ndarray
    base_value: float
    prediction: float
    std_errors: np.ndarray | None = None

    def to_json(self) -> str:
        return json.dumps(
            {
                "feature_names": list(self.feature_names),
                "phi": self.phi.tolist(),
                "base_value": self.base_value,
                "prediction": self.prediction,
                "std_errors": None if self.std_errors is None else self.std_errors.tolist(),
            }
        )


def _as_model_fn(model):
    """Accepts a callable on a single row or an object with .predict."""
    if callable(model):
        return model
    if hasattr(model, "predict_row"):
        return model.predict_row
    if hasattr(model, "predict"):
        return lambda row: float(np.asarray(model.predict(np.asarray(row)[None, :]))[0])
    raise InvalidParameterError("model must be callable or expose predict()")


def shapley_exact(model, row, background, feature_names=None) -> Attribution:
    """Exact Shapley values by full coalition enumeration.

    The value of a coalition is the model output with out-of-coalition
    features replaced by the background mean; the base value is the
    prediction at the all-background-mean point, so efficiency holds to
    float precision.
    """
    fn = _as_model_fn(model)
    row = np.asarray(row, dtype=float)
    background = np.atleast_2d(np.asarray(background, dtype=float))
    n = len(row)
    if n > EXACT_FEATURE_LIMIT:
        raise TooManyFeaturesError(
            f"exact enumeration is limited to {EXACT_FEATURE_LIMIT} features, got {n}"
        )
    bg_mean = background.mean(axis=0)

    values = np.empty(1 << n)
    for mask in range(1 << n):
        x = bg_mean.copy()
        for j in range(n):
            if mask >> j & 1:
                x[j] = row[j]
        values[mask] = fn(x)

    fact = [math.factorial(i) for i in range(n + 1)]
    phi = np.zeros(n)
    for mask in range(1 << n):
        size = bin(mask).count("1")
        weight = fact[size] * fact[n - size - 1] / fact[n]
        for j in range(n):
            if not mask >> j & 1:
                phi[j] += weight * (values[mask | (1 << j)] - values[mask])

    names = tuple(feature_names) if feature_names else tuple(f"f{j}" for j in range(n))
    return Attribution(
        feature_names=names,
        phi=phi,
        base_value=float(values[0]),
        prediction=float(values[(1 << n) - 1]),
    )


def shapley_sampled(
    model,
    row,
    background,
    n_permutations: int = DEFAULT_PERMUTATIONS,
    seed: int = 0,
    feature_names=None,
) -> Attribution:
    """Permutation-sampling Shapley estimator with exact efficiency.

    Each sampled permutation contributes one marginal contribution per
    feature; any float residual against (prediction - base) is
    redistributed proportionally to |phi|.
    """
    if n_permutations < 100:
        raise InvalidParameterError("n_permutations must be >= 100")
    fn = _as_model_fn(model)
    row = np.asarray(row, dtype=float)
    background = np.atleast_2d(np.asarray(background, dtype=float))
    n = len(row)
    bg_mean = background.mean(axis=0)
    rng = np.random.default_rng(seed)

    sums = np.zeros(n)
    sq_sums = np.zeros(n)
    base = fn(bg_mean.copy())
    for _ in range(n_permutations):
        perm = rng.permutation(n)
        x = bg_mean.copy()
        prev = base
        for j in perm:
            x[j] = row[j]
            cur = fn(x)
            delta = cur - prev
            sums[j] += delta
            sq_sums[j] += delta * delta
            prev = cur
    phi = sums / n_permutations
    variance = np.maximum(sq_sums / n_permutations - phi**2, 0.0)
    std_errors = np.sqrt(variance / n_permutations)

    prediction = fn(row.copy())
    residual = (prediction - base) - float(phi.sum())
    total = float(np.abs(phi).sum())
    if total > 0:
        phi = phi + residual * np.abs(phi) / total
    elif n > 0:
        phi = phi + residual / n

    names = tuple(feature_names) if feature_names else tuple(f"f{j}" for j in range(n))
    return Attribution(
        feature_names=names,
        phi=phi,
        base_value=float(base),
        prediction=float(prediction),
        std_errors=std_errors,
    )


def summary(attributions) -> dict:
    """Per-feature influence ranking by mean |phi|, ties broken by index.

    Retains the per-feature (phi, feature value placeholder) pairs for
    beeswarm-style rendering when rows are attached to the attributions.
    """
    attributions = list(attributions)
    if not attributions:
        raise DataError("need at least one attribution")
    names = attributions[0].feature_names
    phis = np.array([a.phi for a in attributions])
    mean_abs = np.abs(phis).mean(axis=0)
    order = sorted(range(len(names)), key=lambda j: (-mean_abs[j], j))
    return {
        "ranking": [
            {
                "feature": names[j],
                "index": j,
                "mean_abs_phi": float(mean_abs[j]),
                "phi_values": phis[:, j].tolist(),
            }
            for j in order
        ]
    }
