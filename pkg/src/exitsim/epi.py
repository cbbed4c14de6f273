"""SEI-HCRD compartmental model and its fixed-step RK4 integrator.

Compartments are stored as population fractions: Susceptible, Exposed,
Infectious, Hospitalized, Critical, Recovered, Dead. Counts are derived at
the reporting boundary by multiplying by the population size.
"""

from __future__ import annotations

import csv
import datetime as dt
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameterError, NonFiniteStateError

COMPARTMENTS = ("s", "e", "i", "h", "c", "rec", "d")

# Clamp floor for small negative excursions produced by the integrator.
NEGATIVE_TOL = 1e-10


@dataclass(frozen=True)
class EpiParams:
    """Disease transition times (days) and severity fractions.

    Defaults are the literature values used throughout: incubation 5.6 d,
    infectious 2.9 d, hospital stay 4 d, critical stay 14 d; 80% mild,
    10% of hospitalized turn critical, 30% of critical die.
    """

    t_inc: float = 5.6
    t_inf: float = 2.9
    t_hosp: float = 4.0
    t_crit: float = 14.0
    m: float = 0.8
    c: float = 0.1
    f: float = 0.3

    def __post_init__(self):
        for name in ("t_inc", "t_inf", "t_hosp", "t_crit"):
            if not getattr(self, name) > 0:
                raise InvalidParameterError(f"{name} must be strictly positive")
        for name in ("m", "c", "f"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise InvalidParameterError(f"{name} must be in [0, 1], got {v}")


@dataclass(frozen=True)
class CompartmentState:
    """The seven compartment fractions at one instant; sums to 1."""

    s: float
    e: float
    i: float
    h: float
    c: float
    rec: float
    d: float

    def __post_init__(self):
        vals = self.as_tuple()
        for name, v in zip(COMPARTMENTS, vals):
            if not math.isfinite(v):
                raise InvalidParameterError(f"compartment {name} is not finite")
            if v < 0:
                raise InvalidParameterError(f"compartment {name} is negative: {v}")
        total = sum(vals)
        if abs(total - 1.0) > 1e-9:
            raise InvalidParameterError(f"compartments sum to {total}, expected 1")

    def as_tuple(self):
        return (self.s, self.e, self.i, self.h, self.c, self.rec, self.d)

    def as_array(self):
        return np.array(self.as_tuple(), dtype=float)


@dataclass(frozen=True)
class RtSeries:
    """Per-day effective reproduction numbers from a given start date."""

    start_date: dt.date
    values: tuple

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        if any(not math.isfinite(v) or v < 0 for v in vals):
            raise InvalidParameterError("R_t values must be finite and >= 0")
        object.__setattr__(self, "values", vals)

    def value_at(self, day_index: int) -> float:
        """R_t on a given day; the last value is held beyond the series."""
        if day_index < 0:
            raise InvalidParameterError("day_index must be >= 0")
        if day_index >= len(self.values):
            return self.values[-1]
        return self.values[day_index]


@dataclass(frozen=True)
class Trajectory:
    """Daily samples of an integrated epidemic, anchored to a calendar date."""

    start_date: dt.date
    population: float
    states: tuple = field(default=())

    def __len__(self):
        return len(self.states)

    def as_matrix(self):
        return np.array([s.as_tuple() for s in self.states], dtype=float)


def derivatives(state: CompartmentState, rt: float, params: EpiParams):
    """Right-hand side of the SEI-HCRD ODE system, per day.

    Returns (dS, dE, dI, dH, dC, dRec, dD)/dt; the components sum to zero.
    """
    if not (math.isfinite(rt) and rt >= 0):
        raise InvalidParameterError(f"rt must be finite and >= 0, got {rt}")
    s, e, i, h, c, rec, d = state.as_tuple()
    return _rhs(s, e, i, h, c, rt, params)


def _rhs(s, e, i, h, c, rt, p):
    # Plain-float arithmetic: this is the innermost hot loop of every
    # simulation, and 7-element numpy ops would dominate the runtime.
    new_inf = rt / p.t_inf * i * s
    out_e = e / p.t_inc
    out_i = i / p.t_inf
    out_h = h / p.t_hosp
    out_c = c / p.t_crit
    ds = -new_inf
    de = new_inf - out_e
    di = out_e - out_i
    dh = (1.0 - p.m) * out_i + (1.0 - p.f) * out_c - out_h
    dc = p.c * out_h - out_c
    drec = p.m * out_i + (1.0 - p.c) * out_h
    dd = p.f * out_c
    return (ds, de, di, dh, dc, drec, dd)


def integrate(
    initial: CompartmentState,
    rt_series: RtSeries,
    params: EpiParams,
    horizon_days: int,
    dt_days: float = 0.25,
) -> Trajectory:
    """Integrate the SEI-HCRD system with classical RK4 at a fixed step.

    R_t is piecewise-constant per calendar day (the value at floor(t)).
    Returns daily states for t = 0..horizon_days inclusive.
    """
    if horizon_days < 1:
        raise InvalidParameterError("horizon_days must be >= 1")
    steps_per_day = int(round(1.0 / dt_days))
    if abs(steps_per_day * dt_days - 1.0) > 1e-12:
        raise InvalidParameterError("dt_days must evenly divide one day")

    y = list(initial.as_tuple())
    states = [initial]
    h = dt_days
    for day in range(horizon_days):
        rt = rt_series.value_at(day)
        for _ in range(steps_per_day):
            y = _rk4_step(y, rt, params, h)
        y = _clamp_state(y, day)
        states.append(CompartmentState(*_renorm(y)))
    return Trajectory(start_date=rt_series.start_date, population=1.0, states=tuple(states))


def _rk4_step(y, rt, p, h):
    s, e, i, hh, c, rec, d = y
    k1 = _rhs(s, e, i, hh, c, rt, p)
    y2 = [y[j] + 0.5 * h * k1[j] for j in range(7)]
    k2 = _rhs(y2[0], y2[1], y2[2], y2[3], y2[4], rt, p)
    y3 = [y[j] + 0.5 * h * k2[j] for j in range(7)]
    k3 = _rhs(y3[0], y3[1], y3[2], y3[3], y3[4], rt, p)
    y4 = [y[j] + h * k3[j] for j in range(7)]
    k4 = _rhs(y4[0], y4[1], y4[2], y4[3], y4[4], rt, p)
    return [
        y[j] + h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]) for j in range(7)
    ]


def _clamp_state(y, day):
    out = []
    for name, v in zip(COMPARTMENTS, y):
        if not math.isfinite(v):
            raise NonFiniteStateError(f"compartment {name} became {v} on day {day + 1}")
        if v < 0:
            if v < -NEGATIVE_TOL:
                raise NonFiniteStateError(
                    f"compartment {name} went negative ({v}) on day {day + 1}; "
                    "the integration is unstable"
                )
            v = 0.0
        out.append(v)
    return out


def _renorm(y):
    # The clamp floor can leave the sum a hair off 1; keep the stored state
    # within the CompartmentState invariant without touching the dynamics.
    total = sum(y)
    if abs(total - 1.0) > 1e-9:
        raise NonFiniteStateError(f"compartments sum drifted to {total}")
    return y


def with_population(traj: Trajectory, start_date: dt.date, population: float) -> Trajectory:
    """Re-anchor a trajectory to a calendar date and population size."""
    return Trajectory(start_date=start_date, population=population, states=traj.states)


def cumulative_cases(traj: Trajectory) -> np.ndarray:
    """Cumulative cases per day: population x (I + H + C + Rec + D).

    Counts everyone who has left the Exposed compartment, i.e. symptom
    onset is treated as detection. The definition is held fixed across
    fitting and forecasting.
    """
    m = traj.as_matrix()
    return traj.population * m[:, 2:7].sum(axis=1)


def cumulative_deaths(traj: Trajectory) -> np.ndarray:
    """Cumulative deaths per day as a count."""
    return traj.population * traj.as_matrix()[:, 6]


def peak_critical(traj: Trajectory) -> float:
    """Maximum daily critical-care occupancy, as a count."""
    if not traj.states:
        return 0.0
    return traj.population * max(s.c for s in traj.states)


def trajectory_to_json(traj: Trajectory) -> str:
    doc = {
        "start_date": traj.start_date.isoformat(),
        "population": traj.population,
        "states": [list(s.as_tuple()) for s in traj.states],
    }
    return json.dumps(doc)


def trajectory_from_json(text: str) -> Trajectory:
    doc = json.loads(text)
    states = tuple(CompartmentState(*row) for row in doc["states"])
    return Trajectory(
        start_date=dt.date.fromisoformat(doc["start_date"]),
        population=doc["population"],
        states=states,
    )


def trajectory_to_csv(traj: Trajectory) -> str:
    """CSV export with fraction columns plus case/death counts."""
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["date", "S", "E", "I", "H", "C", "Rec", "D", "cases", "deaths"])
    cases = cumulative_cases(traj)
    for idx, state in enumerate(traj.states):
        date = traj.start_date + dt.timedelta(days=idx)
        row = [date.isoformat(), *state.as_tuple(), cases[idx], traj.population * state.d]
        writer.writerow(row)
    return buf.getvalue()
