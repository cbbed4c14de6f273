import numpy as np
import pytest

from exitsim import epi, rt, synth


@pytest.fixture(scope="session")
def table_params():
    return epi.EpiParams()


@pytest.fixture(scope="session")
def lux_context():
    """Luxembourg-like lockdown context shared across strategy/search tests."""
    return synth.stub_context("LU")


@pytest.fixture(scope="session")
def stub_predictor():
    return synth.MonotoneStubPredictor()


@pytest.fixture(scope="session")
def seeded_epidemic(table_params):
    """30-day constant-R epidemic used by several oracle comparisons."""
    initial = epi.CompartmentState(0.99, 0.0, 0.01, 0.0, 0.0, 0.0, 0.0)
    series = rt.hill_series(rt.HillParams(3.0, 2.0, 1e9), synth.FIXTURE_START, 31)
    return epi.integrate(initial, series, table_params, 30)


def euler_oracle(initial, rt_values, params, n_days, dt=1e-4):
    """Independent fine-step forward-Euler integration (the RK4 oracle).

    Implemented directly from the rate equations, sharing no code with
    the integrator under test.
    """
    s, e, i, h, c, rec, d = initial
    steps_per_day = int(round(1.0 / dt))
    out = [(s, e, i, h, c, rec, d)]
    for day in range(n_days):
        r = rt_values[min(day, len(rt_values) - 1)]
        for _ in range(steps_per_day):
            new_inf = r / params.t_inf * i * s
            ds = -new_inf
            de = new_inf - e / params.t_inc
            di = e / params.t_inc - i / params.t_inf
            dh = (1 - params.m) / params.t_inf * i + (1 - params.f) / params.t_crit * c - h / params.t_hosp
            dc = params.c / params.t_hosp * h - c / params.t_crit
            drec = params.m / params.t_inf * i + (1 - params.c) / params.t_hosp * h
            dd = params.f / params.t_crit * c
            s += dt * ds
            e += dt * de
            i += dt * di
            h += dt * dh
            c += dt * dc
            rec += dt * drec
            d += dt * dd
        out.append((s, e, i, h, c, rec, d))
    return np.array(out)
