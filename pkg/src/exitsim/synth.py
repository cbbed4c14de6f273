"""Synthetic data generators and stub predictors.

Provides the shipped CLI fixtures (mobility, demographics, case/death
CSVs for imaginary countries) and the deterministic stand-ins used when
exercising the strategy search without a trained surrogate.
"""

from __future__ import annotations

import datetime as dt

import numpy as np

from . import epi, ingest, rt, strategy

FIXTURE_START = dt.date(2020, 2, 15)
SCHEDULE_START = dt.date(2020, 4, 30)

FIXTURE_COUNTRIES = {
    # country: (population, icu, region, hill params, lockdown depth)
    "LU": (600_000.0, 42.0, 3, rt.HillParams(3.2, 2.5, 25.0), 90.0),
    "IT": (60_000_000.0, 2054.0, 3, rt.HillParams(3.6, 2.2, 20.0), 85.0),
}


class MonotoneStubPredictor:
    """R_t rises monotonically with mean non-residential activity.

    Tuned so a deep lockdown keeps R_t below 1 while a full reopening
    approaches `r_max`.
    """

    def __init__(self, r_min: float = 0.4, r_max: float = 3.5):
        self.r_min = r_min
        self.r_max = r_max

    def predict(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        activity = X[:, :20].mean(axis=1)  # smoothed non-residential columns
        frac = np.clip(1.0 + activity / 100.0, 0.0, 1.5)
        return self.r_min + (self.r_max - self.r_min) * frac**2

    def predict_row(self, row):
        return float(self.predict(np.asarray(row, dtype=float)[None, :])[0])


class ConstantPredictor:
    """Always predicts the same R_t; composition and zero-R oracles."""

    def __init__(self, value: float):
        self.value = float(value)

    def predict(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return np.full(len(X), self.value)

    def predict_row(self, row):
        return self.value


def synthetic_mobility(country: str, depth: float, n_days: int, seed: int = 0):
    """Daily mobility records ramping into lockdown with weekly wiggle."""
    rng = np.random.default_rng(seed)
    records = []
    phase = rng.uniform(0, 2 * np.pi, 6)
    for i in range(n_days):
        date = FIXTURE_START + dt.timedelta(days=i)
        level = depth * min(1.0, max(0.0, (i - 14) / 30.0))
        values = {}
        for c, cat in enumerate(ingest.MOBILITY_CATEGORIES):
            wiggle = 3.0 * np.sin(2 * np.pi * i / 7.0 + phase[c])
            if cat == "residential":
                values[cat] = level * 0.18 + wiggle * 0.2
            else:
                values[cat] = -level + wiggle
        records.append(ingest.MobilityRecord(country=country, date=date, **values))
    return records


def fixture_demographics() -> list:
    return [
        ingest.Demographics("LU", 71e9, 600_000, 250.0, 2586.0, 0.16, 0.15, 3),
        ingest.Demographics("IT", 2.0e12, 60_000_000, 200.0, 301_340.0, 0.13, 0.23, 3),
    ]


def fixture_initial_state() -> epi.CompartmentState:
    # Small enough that critical care at the schedule start is below the
    # Luxembourg ICU fixture capacity, so feasible exit schedules exist.
    i0 = 1e-5
    return epi.CompartmentState(1.0 - 2 * i0, i0, i0, 0.0, 0.0, 0.0, 0.0)


def synthetic_observed(country: str, n_days: int = 75) -> rt.ObservedSeries:
    """Noiseless cumulative cases/deaths generated by the epidemic model
    under the country's fixture Hill curve, so a refit recovers it."""
    population, _, _, hill, _ = FIXTURE_COUNTRIES[country]
    params = epi.EpiParams()
    series = rt.hill_series(hill, FIXTURE_START, n_days)
    traj = epi.integrate(fixture_initial_state(), series, params, n_days - 1)
    m = traj.as_matrix()
    cases = population * m[:, 2:7].sum(axis=1)
    deaths = population * m[:, 6]
    return rt.ObservedSeries(
        start_date=FIXTURE_START,
        cumulative_cases=tuple(cases),
        cumulative_deaths=tuple(deaths),
        population=population,
    )


def cases_csv(countries=None, n_days: int = 75) -> str:
    lines = ["country,date,cumulative_cases,cumulative_deaths"]
    for country in countries or FIXTURE_COUNTRIES:
        obs = synthetic_observed(country, n_days)
        for i in range(len(obs)):
            date = obs.start_date + dt.timedelta(days=i)
            lines.append(
                f"{country},{date.isoformat()},"
                f"{float(obs.cumulative_cases[i])!r},{float(obs.cumulative_deaths[i])!r}"
            )
    return "\n".join(lines) + "\n"


def mobility_csv(countries=None, n_days: int = 75, seed: int = 0) -> str:
    records = []
    for idx, country in enumerate(countries or FIXTURE_COUNTRIES):
        depth = FIXTURE_COUNTRIES[country][4]
        records.extend(synthetic_mobility(country, depth, n_days, seed=seed + idx))
    return ingest.mobility_to_csv(records)


def demographics_csv() -> str:
    lines = ["country,gdp,population,density,area,under15,over64,region"]
    for d in fixture_demographics():
        lines.append(
            f"{d.country},{d.gdp!r},{d.population!r},{d.density!r},{d.area!r},"
            f"{d.under15!r},{d.over64!r},{d.region}"
        )
    return "\n".join(lines) + "\n"


def write_fixtures(directory, n_days: int = 75, seed: int = 0):
    """Write the three fixture CSVs into a directory."""
    import pathlib

    directory = pathlib.Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    (directory / "mobility.csv").write_text(mobility_csv(n_days=n_days, seed=seed))
    (directory / "demographics.csv").write_text(demographics_csv())
    (directory / "cases.csv").write_text(cases_csv(n_days=n_days))
    return directory


def stub_context(country: str = "LU", history_days: int = 60) -> strategy.CountryContext:
    """A lockdown-era country context for strategy and search tests."""
    population, icu, region, _, depth = FIXTURE_COUNTRIES[country]
    demo = next(d for d in fixture_demographics() if d.country == country)
    dates = [SCHEDULE_START - dt.timedelta(days=history_days - i) for i in range(history_days)]
    hist = np.zeros((history_days, 6))
    for i in range(history_days):
        level = depth * min(1.0, (i + 10) / 30.0)
        hist[i, :5] = -level
        hist[i, 5] = level * 0.18
    initial = epi.CompartmentState(
        1.0 - 4.5e-4, 1.5e-4, 1.5e-4, 8e-5, 2e-5, 0.0, 5e-5
    )
    return strategy.CountryContext(
        demographics=demo,
        icu_capacity=icu,
        initial_state=initial,
        history_dates=dates,
        history_mobility=hist,
    )
