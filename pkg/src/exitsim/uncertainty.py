"""Bayesian linear model for confidence bands around surrogate predictions.

An evidence-maximizing Bayesian ridge regression is fit on the 32
standardized features, grid-searched over the documented
(alpha_init, lambda_init) pairs; its predictive standard deviation drives
the min/max forecast trajectories.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass

import numpy as np
from sklearn.linear_model import BayesianRidge

from .errors import DataError, SingularDesignError

ALPHA_INITS = (0.1, 1.0, 1.9)
LAMBDA_INITS = (1.0, 0.1, 0.01)
BAND_Z = 1.96


@dataclass
class UncertaintyModel:
    """Posterior of a Bayesian ridge regressor on standardized features."""

    coef_mean: np.ndarray
    coef_cov: np.ndarray
    intercept: float
    noise_precision: float  # alpha
    weight_precision: float  # lambda
    standardization: tuple
    log_evidence: float

    def predict_mean_std(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        means, stds = self.standardization
        Xs = (X - means) / stds
        mean = Xs @ self.coef_mean + self.intercept
        var = 1.0 / self.noise_precision + np.einsum(
            "ij,jk,ik->i", Xs, self.coef_cov, Xs
        )
        return mean, np.sqrt(np.maximum(var, 0.0))

    def to_json(self) -> str:
        return json.dumps(
            {
                "coef_mean": self.coef_mean.tolist(),
                "coef_cov": self.coef_cov.tolist(),
                "intercept": self.intercept,
                "noise_precision": self.noise_precision,
                "weight_precision": self.weight_precision,
                "standardization": {
                    "means": list(self.standardization[0]),
                    "stds": list(self.standardization[1]),
                },
                "log_evidence": self.log_evidence,
            }
        )

    @staticmethod
    def from_json(text: str) -> "UncertaintyModel":
        doc = json.loads(text)
        return UncertaintyModel(
            coef_mean=np.array(doc["coef_mean"], dtype=float),
            coef_cov=np.array(doc["coef_cov"], dtype=float),
            intercept=doc["intercept"],
            noise_precision=doc["noise_precision"],
            weight_precision=doc["weight_precision"],
            standardization=(
                np.array(doc["standardization"]["means"], dtype=float),
                np.array(doc["standardization"]["stds"], dtype=float),
            ),
            log_evidence=doc["log_evidence"],
        )


def fit_uncertainty_xy(X, y, standardization=None) -> UncertaintyModel:
    """Fit on raw feature rows; best log marginal likelihood over the grid wins."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(X) <= X.shape[1]:
        raise DataError("need more training rows than features")

    if standardization is None:
        means = X.mean(axis=0)
        stds = X.std(axis=0)
        stds[stds == 0] = 1.0
        standardization = (means, stds)
    means, stds = standardization
    Xs = (X - means) / stds

    if np.linalg.matrix_rank(Xs) < Xs.shape[1]:
        raise SingularDesignError("features are collinear after standardization")

    best = None
    for alpha_init, lambda_init in itertools.product(ALPHA_INITS, LAMBDA_INITS):
        model = BayesianRidge(
            alpha_init=alpha_init, lambda_init=lambda_init, compute_score=True
        )
        model.fit(Xs, y)
        evidence = float(model.scores_[-1])
        if best is None or evidence > best[0]:
            best = (evidence, model)

    evidence, model = best
    return UncertaintyModel(
        coef_mean=model.coef_.copy(),
        coef_cov=model.sigma_.copy(),
        intercept=float(model.intercept_),
        noise_precision=float(model.alpha_),
        weight_precision=float(model.lambda_),
        standardization=(np.asarray(means, dtype=float), np.asarray(stds, dtype=float)),
        log_evidence=evidence,
    )


def fit_uncertainty(dataset) -> UncertaintyModel:
    """Fit on the train split of a Dataset."""
    X, y = dataset.matrix("train")
    if dataset.standardization is None:
        dataset.compute_standardization()
    return fit_uncertainty_xy(X, y, standardization=dataset.standardization)


def predict_band(model: UncertaintyModel, row):
    """(mean, lower, upper) at 1.96 predictive standard deviations.

    The lower bound is clamped at 0 since R_t is non-negative.
    """
    mean, std = model.predict_mean_std(np.asarray(row, dtype=float)[None, :])
    mean, std = float(mean[0]), float(std[0])
    return mean, max(0.0, mean - BAND_Z * std), mean + BAND_Z * std


def fixed_hyperparameter_posterior(X, y, alpha: float, lam: float):
    """Closed-form Gaussian posterior for fixed noise/weight precisions.

    Returns (posterior mean, posterior covariance). Used as an oracle for
    the evidence-maximizing fit and for posterior-contraction checks.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    precision = lam * np.eye(X.shape[1]) + alpha * X.T @ X
    cov = np.linalg.inv(precision)
    mean = alpha * cov @ X.T @ y
    return mean, cov
