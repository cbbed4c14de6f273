"""Glue between raw input files and the simulation objects: building
country contexts from ingested data and fitted R_t curves, and labeling
datasets with fit histories.
"""

from __future__ import annotations

import datetime as dt

from . import epi, ingest, rt, strategy
from .errors import DataError

# Reported intensive-care capacities for the countries studied most often;
# anything else needs an explicit value.
DEFAULT_ICU_CAPACITY = {"LU": 42.0, "IT": 2054.0, "JP": 1822.0}


def build_context(
    country: str,
    mobility_records,
    demographics,
    fit_result: rt.FitResult | None = None,
    observed: rt.ObservedSeries | None = None,
    icu_capacity: float | None = None,
    start_date: dt.date = strategy.DEFAULT_START,
    epi_params: epi.EpiParams | None = None,
) -> strategy.CountryContext:
    """Country context at `start_date`.

    With a fit and its observed series the initial compartment state is
    obtained by replaying the fitted R_t history from the observation
    start; without one the epidemic starts from a fully susceptible
    population (fine for schedule construction, not for simulation).
    """
    demo_by_country = {d.country: d for d in demographics}
    if country not in demo_by_country:
        raise DataError(f"no demographics for country {country!r}")
    demo = demo_by_country[country]

    per_country = ingest.mobility_by_country(
        [r for r in mobility_records if r.country == country]
    )
    if country not in per_country:
        raise DataError(f"no mobility data for country {country!r}")
    dates, daily = per_country[country]
    keep = [i for i, d in enumerate(dates) if d < start_date]
    if not keep:
        raise DataError(f"no mobility history before {start_date} for {country!r}")
    history_dates = [dates[i] for i in keep]
    history = daily[keep]

    if fit_result is not None:
        fit_start = fit_result.rt_history.start_date
        horizon = (start_date - fit_start).days
        if horizon < 1:
            raise DataError("fit history must start before the schedule start date")
        params = epi_params or epi.EpiParams()
        series = rt.hill_series(fit_result.params, fit_start, horizon + 1)
        if observed is not None:
            initial = rt.initial_state_from_observed(observed)
        else:
            initial = epi.CompartmentState(1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
        traj = epi.integrate(initial, series, params, horizon)
        state_at_start = traj.states[-1]
    else:
        state_at_start = epi.CompartmentState(1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0)

    if icu_capacity is None:
        icu_capacity = DEFAULT_ICU_CAPACITY.get(country)
    if icu_capacity is None:
        raise DataError(f"no ICU capacity known for {country!r}; pass one explicitly")

    return strategy.CountryContext(
        demographics=demo,
        icu_capacity=float(icu_capacity),
        initial_state=state_at_start,
        history_dates=history_dates,
        history_mobility=history,
    )


def label_dataset(dataset: ingest.Dataset, country: str, history: epi.RtSeries) -> ingest.Dataset:
    """Attach label_rt values from a fitted history to one country's rows."""
    rows = []
    for row in dataset.rows:
        if row.country != country:
            rows.append(row)
            continue
        day = (row.date - history.start_date).days
        label = history.value_at(day) if 0 <= day < len(history.values) else row.label_rt
        rows.append(
            ingest.FeatureRow(
                country=row.country, date=row.date, features=row.features, label_rt=label
            )
        )
    out = ingest.Dataset(rows=rows, split=dataset.split)
    if dataset.split is not None:
        out.compute_standardization()
    return out
