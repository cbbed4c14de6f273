"""Policy schedules and their simulation through the surrogate pipeline.

A schedule assigns a restriction level in [0, 100] to each of the six
mobility categories on a biweekly grid. Simulating a schedule maps it to
daily mobility, builds feature rows (smoothing over the concatenated
history + forecast), predicts daily R_t with the surrogate, and integrates
the epidemic model to produce the health and activity objectives.
"""

from __future__ import annotations

import datetime as dt
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import epi, ingest
from .errors import InvalidParameterError

DEFAULT_START = dt.date(2020, 4, 30)
DEFAULT_END = dt.date(2020, 9, 30)
DEFAULT_PERIOD_DAYS = 14
PROGRESSIVE_STEP = 15.0
HARD_EXIT_DATE = dt.date(2020, 5, 11)
CYCLIC_CYCLES = 4
CANNED_KINDS = ("hard", "progressive", "cyclic", "status_quo")

N_CATEGORIES = len(ingest.MOBILITY_CATEGORIES)
RESIDENTIAL_INDEX = ingest.MOBILITY_CATEGORIES.index("residential")


def n_periods(start: dt.date, end: dt.date, period_days: int) -> int:
    return math.ceil((end - start).days / period_days)


@dataclass(frozen=True)
class PolicySchedule:
    """Restriction levels per mobility category on a biweekly grid.

    0 means no restriction, 100 full lockdown.
    """

    country: str
    levels: np.ndarray  # (6, n_periods)
    start_date: dt.date = DEFAULT_START
    end_date: dt.date = DEFAULT_END
    period_days: int = DEFAULT_PERIOD_DAYS

    def __post_init__(self):
        levels = np.asarray(self.levels, dtype=float)
        expected = n_periods(self.start_date, self.end_date, self.period_days)
        if levels.shape != (N_CATEGORIES, expected):
            raise InvalidParameterError(
                f"levels must be {N_CATEGORIES}x{expected}, got {levels.shape}"
            )
        if np.any(levels < 0) or np.any(levels > 100):
            bad = np.argwhere((levels < 0) | (levels > 100))[0]
            raise InvalidParameterError(
                f"levels[{bad[0]}][{bad[1]}] out of range [0, 100]"
            )
        object.__setattr__(self, "levels", levels)

    @property
    def n_days(self) -> int:
        return (self.end_date - self.start_date).days

    @property
    def n_periods(self) -> int:
        return self.levels.shape[1]

    def daily_levels(self) -> np.ndarray:
        """(n_days, 6) levels, constant within each period."""
        period_of_day = np.minimum(
            np.arange(self.n_days) // self.period_days, self.n_periods - 1
        )
        return self.levels.T[period_of_day]

    def to_json(self) -> str:
        return json.dumps(
            {
                "country": self.country,
                "start_date": self.start_date.isoformat(),
                "end_date": self.end_date.isoformat(),
                "period_days": self.period_days,
                "levels": self.levels.tolist(),
            }
        )

    @staticmethod
    def from_json(text) -> "PolicySchedule":
        doc = json.loads(text) if isinstance(text, str) else text
        return PolicySchedule(
            country=doc["country"],
            levels=np.array(doc["levels"], dtype=float),
            start_date=dt.date.fromisoformat(doc["start_date"]),
            end_date=dt.date.fromisoformat(doc["end_date"]),
            period_days=doc["period_days"],
        )


@dataclass
class CountryContext:
    """Everything country-specific a simulation needs: demographics, ICU
    capacity, the fitted state at the schedule start, and the observed
    mobility history leading up to it."""

    demographics: ingest.Demographics
    icu_capacity: float
    initial_state: epi.CompartmentState
    history_dates: list  # daily dates ending the day before the schedule start
    history_mobility: np.ndarray  # (n_hist, 6) percent changes
    residential_scale: float | None = None

    def __post_init__(self):
        if self.icu_capacity <= 0:
            raise InvalidParameterError("icu_capacity must be > 0")
        self.history_mobility = np.asarray(self.history_mobility, dtype=float)
        if self.residential_scale is None:
            observed = self.history_mobility[:, RESIDENTIAL_INDEX]
            peak = float(observed.max()) if len(observed) else 0.0
            self.residential_scale = max(peak, 0.0)

    @property
    def population(self) -> float:
        return self.demographics.population


@dataclass(frozen=True)
class StrategyOutcome:
    total_deaths: float
    mobility_auc_mean: float
    peak_critical: float
    trajectory: epi.Trajectory
    rt_series: epi.RtSeries
    feasible: bool

    def to_json(self, include_trajectory: bool = True) -> str:
        doc = {
            "total_deaths": self.total_deaths,
            "mobility_auc_mean": self.mobility_auc_mean,
            "peak_critical": self.peak_critical,
            "feasible": self.feasible,
            "rt_series": list(self.rt_series.values),
            "start_date": self.rt_series.start_date.isoformat(),
        }
        if include_trajectory:
            doc["trajectory"] = json.loads(epi.trajectory_to_json(self.trajectory))
        return json.dumps(doc)


def schedule_to_mobility(schedule: PolicySchedule, context: CountryContext) -> np.ndarray:
    """Daily mobility percent changes implied by a schedule, (n_days, 6).

    Non-residential categories drop linearly with the restriction level;
    residential activity rises, scaled by the country's historical peak.
    """
    levels = schedule.daily_levels()
    mobility = -levels
    mobility[:, RESIDENTIAL_INDEX] = (
        levels[:, RESIDENTIAL_INDEX] * context.residential_scale / 100.0
    )
    return mobility


def mobility_auc(mobility: np.ndarray) -> float:
    """Mean across categories of the daily sum of percent changes.

    Closer to 0 means more activity over the window.
    """
    mobility = np.atleast_2d(np.asarray(mobility, dtype=float))
    return float(mobility.sum(axis=0).mean())


def current_levels(context: CountryContext) -> np.ndarray:
    """Restriction levels implied by the last day of observed mobility."""
    last = context.history_mobility[-1]
    levels = np.clip(-last, 0.0, 100.0)
    scale = context.residential_scale
    if scale and scale > 0:
        levels[RESIDENTIAL_INDEX] = np.clip(
            last[RESIDENTIAL_INDEX] / scale * 100.0, 0.0, 100.0
        )
    else:
        levels[RESIDENTIAL_INDEX] = 0.0
    return levels


def canned_strategy(
    kind: str,
    context: CountryContext,
    country: str | None = None,
    start_date: dt.date = DEFAULT_START,
    end_date: dt.date = DEFAULT_END,
    period_days: int = DEFAULT_PERIOD_DAYS,
) -> PolicySchedule:
    """One of the four hand-crafted exit strategies.

    hard: everything reopens from the period containing May 11.
    progressive: activity regained 15 points per 2-week period.
    cyclic: periods alternate reopened/locked-down for 4 reopening cycles,
    fully open afterwards.
    status_quo: the schedule-start restriction levels are held throughout.
    """
    if kind not in CANNED_KINDS:
        raise InvalidParameterError(f"unknown strategy kind: {kind!r}")
    country = country or context.demographics.country
    periods = n_periods(start_date, end_date, period_days)
    current = current_levels(context)
    levels = np.zeros((N_CATEGORIES, periods))

    if kind == "hard":
        exit_period = max((HARD_EXIT_DATE - start_date).days // period_days, 0)
        for p in range(min(exit_period, periods)):
            levels[:, p] = current
    elif kind == "progressive":
        for p in range(periods):
            levels[:, p] = np.maximum(current - PROGRESSIVE_STEP * p, 0.0)
    elif kind == "cyclic":
        # Reopen on even periods, lock down on odd ones; the 4th reopening
        # (period 6) stays open for good. The biweekly grid anchored at the
        # schedule start cannot land exactly on the paper-style boundary.
        for p in range(min(2 * CYCLIC_CYCLES - 1, periods)):
            if p % 2 == 1:
                levels[:, p] = current
    elif kind == "status_quo":
        levels[:] = current[:, None]
    return PolicySchedule(
        country=country,
        levels=levels,
        start_date=start_date,
        end_date=end_date,
        period_days=period_days,
    )


def forecast_features(
    schedule: PolicySchedule, context: CountryContext
) -> tuple[np.ndarray, np.ndarray]:
    """Feature rows for every day of the schedule window.

    Smoothing windows run over the concatenated historical and scheduled
    mobility so the first forecast days stay continuous with observations.
    Returns (features (n_days, 32), scheduled mobility (n_days, 6)).
    """
    scheduled = schedule_to_mobility(schedule, context)
    full = np.vstack([context.history_mobility, scheduled])
    smoothed = ingest.smooth_matrix(full)[len(context.history_mobility) :]

    n_days = schedule.n_days
    demo = np.array(context.demographics.feature_values(), dtype=float)
    features = np.empty((n_days, ingest.N_FEATURES))
    features[:, :24] = smoothed
    features[:, 24:30] = demo
    for i in range(n_days):
        date = schedule.start_date + dt.timedelta(days=i)
        features[i, 30] = float(date.weekday())
    features[:, 31] = float(context.demographics.region)
    return features, scheduled


def simulate_schedule(
    schedule: PolicySchedule,
    context: CountryContext,
    predictor,
    epi_params: epi.EpiParams,
) -> StrategyOutcome:
    """Run the full pipeline for one schedule and score both objectives."""
    features, scheduled = forecast_features(schedule, context)
    rt_values = np.maximum(np.asarray(predictor.predict(features), dtype=float), 0.0)
    rt_series = epi.RtSeries(start_date=schedule.start_date, values=tuple(rt_values))

    traj = epi.integrate(context.initial_state, rt_series, epi_params, schedule.n_days)
    traj = epi.with_population(traj, schedule.start_date, context.population)

    peak = epi.peak_critical(traj)
    return StrategyOutcome(
        total_deaths=float(context.population * traj.states[-1].d),
        mobility_auc_mean=mobility_auc(scheduled),
        peak_critical=peak,
        trajectory=traj,
        rt_series=rt_series,
        feasible=bool(peak <= context.icu_capacity),
    )
