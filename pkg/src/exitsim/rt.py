"""Parametric decay curves for R_t and least-squares fitting against
observed cumulative case/death series.

The fitted Hill curve, injected back into the epidemic model, labels the
historical R_t values that the neural surrogate is trained on.
"""

from __future__ import annotations

import datetime as dt
import itertools
import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from . import epi
from .errors import (
    DegenerateDataError,
    FitFailureError,
    InvalidParameterError,
)

BOUNDS = {"r0": (0.1, 10.0), "k": (0.1, 10.0), "l": (1.0, 200.0)}
RESTART_GRID = list(itertools.product((1.5, 3.0, 5.0), (1.0, 2.0), (15.0, 40.0)))
N_RESTARTS = 5


@dataclass(frozen=True)
class HillParams:
    """Hill decay parameters: initial value r0, exponent k, half-decay time l."""

    r0: float
    k: float
    l: float

    def __post_init__(self):
        for name in ("r0", "k", "l"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if self.r0 < 0:
            raise InvalidParameterError("r0 must be >= 0")
        if self.k <= 0 or self.l <= 0:
            raise InvalidParameterError("k and l must be > 0")


@dataclass(frozen=True)
class ObservedSeries:
    """Daily cumulative case and death counts for one country."""

    start_date: dt.date
    cumulative_cases: tuple
    cumulative_deaths: tuple
    population: float

    def __post_init__(self):
        cases = tuple(float(v) for v in self.cumulative_cases)
        deaths = tuple(float(v) for v in self.cumulative_deaths)
        if len(cases) != len(deaths):
            raise InvalidParameterError("case and death series must have equal length")
        for name, series in (("cases", cases), ("deaths", deaths)):
            if any(b < a - 1e-9 for a, b in zip(series, series[1:])):
                raise InvalidParameterError(f"cumulative {name} must be non-decreasing")
            if any(v > self.population for v in series):
                raise InvalidParameterError(f"{name} exceed the population")
        object.__setattr__(self, "cumulative_cases", cases)
        object.__setattr__(self, "cumulative_deaths", deaths)

    def __len__(self):
        return len(self.cumulative_cases)


@dataclass(frozen=True)
class FitResult:
    params: HillParams
    loss: float
    rt_history: epi.RtSeries
    converged: bool
    restarts_used: int

    def to_json(self) -> str:
        return json.dumps(
            {
                "params": {"r0": self.params.r0, "k": self.params.k, "l": self.params.l},
                "loss": self.loss,
                "converged": self.converged,
                "restarts_used": self.restarts_used,
                "start_date": self.rt_history.start_date.isoformat(),
                "rt_history": list(self.rt_history.values),
            }
        )

    @staticmethod
    def from_json(text: str) -> "FitResult":
        doc = json.loads(text)
        params = HillParams(**doc["params"])
        return FitResult(
            params=params,
            loss=doc["loss"],
            rt_history=epi.RtSeries(
                start_date=dt.date.fromisoformat(doc["start_date"]),
                values=tuple(doc["rt_history"]),
            ),
            converged=doc["converged"],
            restarts_used=doc["restarts_used"],
        )


def hill_rt(t: float, params: HillParams) -> float:
    """R_t at day t: r0 / (1 + (t/l)^k)."""
    if t < 0:
        raise InvalidParameterError("t must be >= 0")
    try:
        denom = 1.0 + (float(t) / params.l) ** params.k
    except OverflowError:
        return 0.0
    return params.r0 / denom


def hill_series(params: HillParams, start_date: dt.date, n_days: int) -> epi.RtSeries:
    values = tuple(hill_rt(float(t), params) for t in range(n_days))
    return epi.RtSeries(start_date=start_date, values=values)


def decay_family(kind: str, **kwargs):
    """A callable time -> R_t from one of the supported decay families.

    `hill` is the family used by the training pipeline; `exponential` and
    `linear-plateau` exist for side-by-side comparison. For all families
    `l` is the half-decay (or ramp) time in days.
    """
    if kind == "hill":
        params = HillParams(r0=kwargs["r0"], k=kwargs["k"], l=kwargs["l"])
        return lambda t: hill_rt(t, params)
    if kind == "exponential":
        r0, l = float(kwargs["r0"]), float(kwargs["l"])
        if l <= 0:
            raise InvalidParameterError("l must be > 0")
        return lambda t: r0 * 0.5 ** (t / l)
    if kind == "linear-plateau":
        r0, l = float(kwargs["r0"]), float(kwargs["l"])
        floor = float(kwargs.get("floor", 0.0))
        if l <= 0:
            raise InvalidParameterError("l must be > 0")
        if floor < 0 or floor > r0:
            raise InvalidParameterError("floor must be in [0, r0]")
        return lambda t: max(floor, r0 - (r0 - floor) * t / l)
    raise InvalidParameterError(f"unknown decay family: {kind!r}")


def initial_state_from_observed(observed: ObservedSeries) -> epi.CompartmentState:
    """Seed state convention at the first observation day.

    Deaths to date go to D, the remaining cases are split as still
    infectious, with an equal exposed pool feeding them. Chosen so that
    the simulated cumulative cases at day 0 reproduce the observation.
    """
    pop = observed.population
    d0 = observed.cumulative_deaths[0] / pop
    i0 = max(observed.cumulative_cases[0] / pop - d0, 0.0)
    e0 = i0
    s0 = 1.0 - e0 - i0 - d0
    if s0 < 0:
        raise DegenerateDataError("initial cases exceed the population")
    return epi.CompartmentState(s=s0, e=e0, i=i0, h=0.0, c=0.0, rec=0.0, d=d0)


def fit_loss(
    params: HillParams,
    observed: ObservedSeries,
    epi_params: epi.EpiParams,
    initial_state: epi.CompartmentState,
    case_weight: float = 0.5,
) -> float:
    """Equal-weight MSE of simulated vs observed per-capita cases and deaths."""
    n = len(observed)
    series = hill_series(params, observed.start_date, n)
    traj = epi.integrate(initial_state, series, epi_params, n - 1)
    m = traj.as_matrix()
    sim_cases = m[:, 2:7].sum(axis=1)
    sim_deaths = m[:, 6]
    obs_cases = np.asarray(observed.cumulative_cases) / observed.population
    obs_deaths = np.asarray(observed.cumulative_deaths) / observed.population
    mse_cases = float(np.mean((sim_cases - obs_cases) ** 2))
    mse_deaths = float(np.mean((sim_deaths - obs_deaths) ** 2))
    return case_weight * mse_cases + (1.0 - case_weight) * mse_deaths


def _penalized_objective(x, observed, epi_params, initial_state, case_weight):
    # x holds log(r0), log(k), log(l); the log map enforces positivity and
    # the quadratic penalty keeps the search inside the documented bounds.
    logs = np.clip(x, -20.0, 20.0)
    r0, k, l = np.exp(logs)
    penalty = 0.0
    for value, (lo, hi) in zip((r0, k, l), BOUNDS.values()):
        if value < lo:
            penalty += (lo - value) ** 2
        elif value > hi:
            penalty += (value - hi) ** 2
    params = HillParams(r0=r0, k=k, l=l)
    try:
        loss = fit_loss(params, observed, epi_params, initial_state, case_weight)
    except epi.NonFiniteStateError:
        return 1e6 + penalty
    return loss + penalty


def _central_diff_grad(fun, x, rel_h=1e-5):
    g = np.empty_like(x)
    for j in range(len(x)):
        h = rel_h * max(abs(x[j]), 1.0)
        xp, xm = x.copy(), x.copy()
        xp[j] += h
        xm[j] -= h
        g[j] = (fun(xp) - fun(xm)) / (2.0 * h)
    return g


def fit_hill(
    observed: ObservedSeries,
    epi_params: epi.EpiParams,
    initial_state: epi.CompartmentState,
    case_weight: float = 0.5,
    seed: int = 0,
) -> FitResult:
    """Fit Hill parameters by L-BFGS with multi-start restarts.

    Gradients are central finite differences of the penalized loss in
    log-parameter space. Restarts are drawn without replacement from a
    fixed guess grid; the best loss wins, ties going to the lowest
    restart index.
    """
    if len(observed) < 14:
        raise DegenerateDataError("need at least 14 days of observations")
    if max(observed.cumulative_cases) <= 0:
        raise DegenerateDataError("case series never exceeds zero")

    fun = lambda x: _penalized_objective(x, observed, epi_params, initial_state, case_weight)
    rng = np.random.default_rng(seed)
    idx = rng.choice(len(RESTART_GRID), size=N_RESTARTS, replace=False)
    guesses = [RESTART_GRID[i] for i in idx]

    best = None
    any_converged = False
    for restart, guess in enumerate(guesses):
        x0 = np.log(np.asarray(guess, dtype=float))
        res = minimize(
            fun,
            x0,
            jac=lambda x: _central_diff_grad(fun, x),
            method="L-BFGS-B",
            options={"maxiter": 200, "ftol": 1e-14, "gtol": 1e-10},
        )
        any_converged = any_converged or bool(res.success)
        candidate = (float(res.fun), restart, res)
        if best is None or candidate[:2] < best[:2]:
            best = candidate
    if not any_converged:
        raise FitFailureError("no L-BFGS restart converged")

    loss, _, res = best
    r0, k, l = np.exp(np.clip(res.x, -20.0, 20.0))
    params = HillParams(r0=float(r0), k=float(k), l=float(l))
    true_loss = fit_loss(params, observed, epi_params, initial_state, case_weight)
    history = hill_series(params, observed.start_date, len(observed))
    return FitResult(
        params=params,
        loss=float(true_loss),
        rt_history=history,
        converged=bool(res.success),
        restarts_used=N_RESTARTS,
    )
