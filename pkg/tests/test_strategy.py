import datetime as dt

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from exitsim import epi, strategy, synth
from exitsim.errors import InvalidParameterError


def schedule_from(levels, **kwargs):
    return strategy.PolicySchedule(country="LU", levels=np.asarray(levels, dtype=float), **kwargs)


def uniform_schedule(level):
    return schedule_from(np.full((6, 11), float(level)))


# ------------------------------------------------------------------ schedule

def test_schedule_window_has_eleven_periods():
    assert strategy.n_periods(strategy.DEFAULT_START, strategy.DEFAULT_END, 14) == 11
    sched = uniform_schedule(50)
    assert sched.n_periods == 11
    assert sched.n_days == 153


def test_schedule_rejects_out_of_range_levels():
    levels = np.zeros((6, 11))
    levels[2, 4] = 101.0
    with pytest.raises(InvalidParameterError) as err:
        schedule_from(levels)
    assert "levels[2][4]" in str(err.value)
    with pytest.raises(InvalidParameterError):
        schedule_from(np.zeros((6, 10)))


def test_daily_levels_piecewise_constant():
    levels = np.tile(np.arange(11.0) * 9, (6, 1))
    daily = schedule_from(levels).daily_levels()
    assert daily.shape == (153, 6)
    assert np.all(daily[0] == 0.0)
    assert np.all(daily[13] == 0.0)
    assert np.all(daily[14] == 9.0)
    assert np.all(daily[-1] == 90.0)  # last (short) period holds its level


def test_schedule_json_round_trip():
    sched = uniform_schedule(37.5)
    back = strategy.PolicySchedule.from_json(sched.to_json())
    assert back.country == sched.country
    assert np.array_equal(back.levels, sched.levels)
    assert back.start_date == sched.start_date


# ------------------------------------------------------------------ mobility

def test_zero_levels_mean_baseline_activity(lux_context):
    mobility = strategy.schedule_to_mobility(uniform_schedule(0), lux_context)
    assert np.all(mobility == 0.0)


def test_full_lockdown_workplaces(lux_context):
    mobility = strategy.schedule_to_mobility(uniform_schedule(100), lux_context)
    workplaces = list(synth.ingest.MOBILITY_CATEGORIES).index("workplaces")
    assert np.all(mobility[:, workplaces] == -100.0)


def test_residential_rises_with_its_scale():
    ctx = synth.stub_context("LU")
    ctx.residential_scale = 18.0
    mobility = strategy.schedule_to_mobility(uniform_schedule(100), ctx)
    assert np.allclose(mobility[:, strategy.RESIDENTIAL_INDEX], 18.0)


def test_residential_scale_defaults_to_history_peak():
    ctx = synth.stub_context("LU")
    assert ctx.residential_scale == pytest.approx(ctx.history_mobility[:, -1].max())


@given(st.integers(0, 99), st.integers(0, 5), st.integers(0, 10))
@settings(max_examples=30, deadline=None)
def test_schedule_to_mobility_monotone(level, category, period):
    ctx = synth.stub_context("LU")
    levels = np.full((6, 11), 40.0)
    low = strategy.schedule_to_mobility(schedule_from(levels), ctx)
    levels2 = levels.copy()
    levels2[category, period] = 100.0
    high = strategy.schedule_to_mobility(schedule_from(levels2), ctx)
    nonres = [i for i in range(6) if i != strategy.RESIDENTIAL_INDEX]
    assert np.all(high[:, nonres] <= low[:, nonres] + 1e-12)
    assert np.all(high[:, strategy.RESIDENTIAL_INDEX] >= low[:, strategy.RESIDENTIAL_INDEX] - 1e-12)


def test_mobility_auc_anchors():
    assert strategy.mobility_auc(np.zeros((153, 6))) == 0.0
    assert strategy.mobility_auc(np.full((153, 6), -100.0)) == pytest.approx(-15_300.0)


# -------------------------------------------------------------------- canned

def test_hard_strategy_zero_from_may_11(lux_context):
    sched = strategy.canned_strategy("hard", lux_context)
    # 2020-05-11 falls in period 0, so everything reopens immediately
    assert np.all(sched.levels == 0.0)


def test_progressive_ladder(lux_context):
    ctx = synth.stub_context("LU")
    ctx.history_mobility = np.tile(
        np.array([-60.0, -60, -60, -60, -60, 10.0]), (30, 1)
    )
    ctx.residential_scale = 10.0
    sched = strategy.canned_strategy("progressive", ctx)
    expected = [60.0, 45.0, 30.0, 15.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]
    assert np.allclose(sched.levels[0], expected)


def test_cyclic_alternation(lux_context):
    sched = strategy.canned_strategy("cyclic", lux_context)
    current = strategy.current_levels(lux_context)
    for p in range(11):
        if p in (1, 3, 5):
            assert np.allclose(sched.levels[:, p], current)
        else:
            assert np.all(sched.levels[:, p] == 0.0)


def test_status_quo_holds_current_levels(lux_context):
    sched = strategy.canned_strategy("status_quo", lux_context)
    current = strategy.current_levels(lux_context)
    assert np.allclose(sched.levels, current[:, None])


def test_unknown_kind_rejected(lux_context):
    with pytest.raises(InvalidParameterError):
        strategy.canned_strategy("lockdown_forever", lux_context)


# ---------------------------------------------------------------- simulation

def test_zero_rt_stub_drains_pipeline(lux_context, table_params):
    zero = synth.ConstantPredictor(0.0)
    sched = strategy.canned_strategy("status_quo", lux_context)
    outcome = strategy.simulate_schedule(sched, lux_context, zero, table_params)
    positive = strategy.simulate_schedule(
        sched, lux_context, synth.ConstantPredictor(1.5), table_params
    )
    assert outcome.total_deaths < positive.total_deaths
    # susceptibles frozen: only the already-infected pipeline drains
    m = outcome.trajectory.as_matrix()
    assert np.allclose(m[:, 0], m[0, 0], atol=1e-12)


def test_constant_stub_matches_direct_integration(lux_context, table_params):
    sched = strategy.canned_strategy("status_quo", lux_context)
    outcome = strategy.simulate_schedule(
        sched, lux_context, synth.ConstantPredictor(1.3), table_params
    )
    series = epi.RtSeries(start_date=sched.start_date, values=tuple([1.3] * sched.n_days))
    direct = epi.integrate(lux_context.initial_state, series, table_params, sched.n_days)
    assert np.array_equal(outcome.trajectory.as_matrix(), direct.as_matrix())
    assert set(outcome.rt_series.values) == {1.3}


def test_monotone_stub_orderings(lux_context, stub_predictor, table_params):
    outcomes = {
        kind: strategy.simulate_schedule(
            strategy.canned_strategy(kind, lux_context), lux_context,
            stub_predictor, table_params,
        )
        for kind in strategy.CANNED_KINDS
    }
    deaths = {k: o.total_deaths for k, o in outcomes.items()}
    assert deaths["hard"] >= deaths["cyclic"] >= deaths["progressive"] >= deaths["status_quo"]
    auc = {k: o.mobility_auc_mean for k, o in outcomes.items()}
    assert auc["hard"] >= auc["cyclic"] >= auc["progressive"] >= auc["status_quo"]
    assert all(o.mobility_auc_mean <= 0.0 for o in outcomes.values())


def test_feasible_flag_definition(lux_context, stub_predictor, table_params):
    sched = strategy.canned_strategy("status_quo", lux_context)
    outcome = strategy.simulate_schedule(sched, lux_context, stub_predictor, table_params)
    assert outcome.feasible == (outcome.peak_critical <= lux_context.icu_capacity)
    tight = synth.stub_context("LU")
    tight.icu_capacity = max(outcome.peak_critical / 2.0, 1e-9)
    worse = strategy.simulate_schedule(sched, tight, stub_predictor, table_params)
    assert not worse.feasible


def test_deaths_monotone_in_uniform_level(lux_context, stub_predictor, table_params):
    rng = np.random.default_rng(0)
    for _ in range(20):
        levels = rng.uniform(0, 85, (6, 11))
        low = strategy.simulate_schedule(
            schedule_from(levels), lux_context, stub_predictor, table_params
        )
        high = strategy.simulate_schedule(
            schedule_from(np.clip(levels + 15.0, 0, 100)), lux_context,
            stub_predictor, table_params,
        )
        assert high.total_deaths <= low.total_deaths + 1e-9


def test_forecast_features_shape_and_continuity(lux_context):
    sched = strategy.canned_strategy("status_quo", lux_context)
    features, mobility = strategy.forecast_features(sched, lux_context)
    assert features.shape == (153, 32)
    assert mobility.shape == (153, 6)
    # 30-day smoothing at day 0 blends history, so it differs from the
    # instantaneous scheduled value but stays between historical and
    # scheduled extremes
    col30 = 3  # retail_recreation_30d
    lo = min(lux_context.history_mobility[:, 0].min(), mobility[:, 0].min())
    hi = max(lux_context.history_mobility[:, 0].max(), mobility[:, 0].max())
    assert lo - 1e-9 <= features[0, col30] <= hi + 1e-9


def test_outcome_json_shape(lux_context, stub_predictor, table_params):
    sched = strategy.canned_strategy("status_quo", lux_context)
    outcome = strategy.simulate_schedule(sched, lux_context, stub_predictor, table_params)
    import json

    doc = json.loads(outcome.to_json())
    assert len(doc["rt_series"]) == 153
    assert len(doc["trajectory"]["states"]) == 154
    assert doc["feasible"] is True
