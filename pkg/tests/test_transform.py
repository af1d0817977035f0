import datetime as dt
import logging
import math

import numpy as np
import pytest

from heatcall.market import OptionContract, QuoteRow, QuoteSeries
from heatcall.transform import (
    HeatPoint,
    c_from_u,
    context_for,
    initial_condition_u,
    make_context,
    to_tau,
    to_x,
    transform_series,
    u_from_c,
)


def ctx_k1(strike=10.0):
    # r = sigma^2/2 makes k exactly 1 in floating point (0.25 is exact)
    return make_context(strike=strike, rate=0.125, sigma=0.5, expiry=1.0)


class TestMakeContext:
    def test_k_one_example(self):
        ctx = make_context(strike=1.0, rate=0.02, sigma=0.2, expiry=1.0)
        assert ctx.k == pytest.approx(1.0, rel=1e-12)
        assert ctx.alpha == pytest.approx(0.0, abs=1e-12)
        assert ctx.beta == pytest.approx(-1.0, rel=1e-12)

    def test_k_one_exponent_factor_collapses(self):
        ctx = ctx_k1()
        # with k exactly 1 the x-exponent of the price map vanishes
        assert ctx.k == 1.0
        assert c_from_u(HeatPoint(x=2.0, tau=0.0, u=1.0), ctx) == pytest.approx(ctx.strike)

    def test_selic_rate_example(self):
        ctx = make_context(strike=1.0, rate=0.1375, sigma=0.5, expiry=1.0)
        assert ctx.k == pytest.approx(1.1, rel=1e-12)

    def test_rejects_bad_inputs(self):
        with pytest.raises(ValueError):
            make_context(strike=1.0, rate=0.05, sigma=0.0, expiry=1.0)
        with pytest.raises(ValueError):
            make_context(strike=0.0, rate=0.05, sigma=0.2, expiry=1.0)
        with pytest.raises(ValueError):
            make_context(strike=1.0, rate=0.05, sigma=0.2, expiry=0.0)


class TestCoordinates:
    def test_x_at_strike_is_exactly_zero(self):
        ctx = ctx_k1(strike=24.76)
        assert to_x(24.76, ctx) == 0.0

    def test_x_log_identity(self):
        ctx = ctx_k1(strike=3.0)
        assert to_x(3.0 * math.e, ctx) == pytest.approx(1.0, abs=1e-14)

    def test_x_doubled_spot(self):
        ctx = ctx_k1(strike=24.76)
        assert to_x(2 * 24.76, ctx) == pytest.approx(math.log(2.0), abs=1e-14)

    def test_x_rejects_non_positive(self):
        with pytest.raises(ValueError):
            to_x(0.0, ctx_k1())

    def test_tau_zero_at_expiry(self):
        ctx = make_context(strike=1.0, rate=0.05, sigma=0.37, expiry=2.5)
        assert to_tau(2.5, ctx) == 0.0

    def test_tau_hand_values(self):
        ctx = make_context(strike=1.0, rate=0.05, sigma=0.2, expiry=1.0)
        assert to_tau(0.0, ctx) == pytest.approx(0.02, rel=1e-12)
        ctx = make_context(strike=1.0, rate=0.05, sigma=0.5, expiry=0.5)
        assert to_tau(0.0, ctx) == pytest.approx(0.0625, rel=1e-15)

    def test_tau_strictly_decreasing_in_t(self):
        ctx = make_context(strike=1.0, rate=0.05, sigma=0.3, expiry=1.0)
        taus = [to_tau(t, ctx) for t in np.linspace(0, 1, 11)]
        assert all(b < a for a, b in zip(taus, taus[1:]))

    def test_tau_rejects_past_expiry(self):
        with pytest.raises(ValueError):
            to_tau(1.5, make_context(strike=1.0, rate=0.05, sigma=0.3, expiry=1.0))


class TestPriceMap:
    def test_zero_maps_to_zero(self):
        assert c_from_u(HeatPoint(x=0.3, tau=0.1, u=0.0), ctx_k1()) == 0.0

    def test_origin_scales_by_strike(self):
        ctx = make_context(strike=7.0, rate=0.08, sigma=0.4, expiry=1.0)
        assert c_from_u(HeatPoint(x=0.0, tau=0.0, u=1.3), ctx) == pytest.approx(7.0 * 1.3)

    def test_hand_value_k1(self):
        ctx = ctx_k1(strike=10.0)
        c = c_from_u(HeatPoint(x=2.0, tau=1.0, u=1.0), ctx)
        assert c == pytest.approx(10.0 * math.exp(-1.0), rel=1e-12)

    def test_inverse_of_hand_value(self):
        ctx = ctx_k1(strike=10.0)
        assert u_from_c(10.0 * math.exp(-1.0), 2.0, 1.0, ctx) == pytest.approx(1.0, rel=1e-12)

    def test_zero_price_inverse(self):
        assert u_from_c(0.0, 0.7, 0.2, ctx_k1()) == 0.0

    def test_negative_price_rejected(self):
        with pytest.raises(ValueError):
            u_from_c(-0.5, 0.0, 0.0, ctx_k1())

    def test_round_trip_random(self):
        rng = np.random.default_rng(21)
        ctx = make_context(strike=24.76, rate=0.1375, sigma=0.45, expiry=0.5)
        for _ in range(10_000):
            c = rng.uniform(0, 60)
            x = rng.uniform(-2, 2)
            tau = rng.uniform(0, 0.1)
            back = c_from_u(HeatPoint(x=x, tau=tau, u=u_from_c(c, x, tau, ctx)), ctx)
            assert back == pytest.approx(c, rel=1e-12, abs=1e-15)


class TestInitialCondition:
    def test_zero_at_origin(self):
        assert initial_condition_u(0.0, ctx_k1()) == 0.0

    def test_zero_for_non_positive_x(self):
        ctx = make_context(strike=1.0, rate=0.06, sigma=0.3, expiry=1.0)
        for x in (-5.0, -1.0, -1e-9, 0.0):
            assert initial_condition_u(x, ctx) == 0.0

    def test_hand_value_k1(self):
        assert initial_condition_u(math.log(4.0), ctx_k1()) == pytest.approx(3.0, rel=1e-12)

    def test_positive_and_increasing_beyond_origin(self):
        ctx = make_context(strike=1.0, rate=0.1, sigma=0.25, expiry=1.0)
        xs = np.linspace(1e-6, 2.0, 50)
        vals = initial_condition_u(xs, ctx)
        assert np.all(vals > 0)
        assert np.all(np.diff(vals) > 0)

    def test_continuous_at_origin(self):
        ctx = make_context(strike=1.0, rate=0.1, sigma=0.25, expiry=1.0)
        assert initial_condition_u(1e-12, ctx) < 1e-11
        assert initial_condition_u(-1e-12, ctx) == 0.0


def make_series(rows):
    return QuoteSeries(rows=tuple(QuoteRow(*r) for r in rows))


def make_contract(strike=10.0, expiry=dt.date(2023, 3, 17), sigma=0.5, rate=0.125):
    return OptionContract(
        underlying="PETR", code="PETRA332", kind="call",
        strike=strike, expiry_date=expiry, rate=rate, sigma=sigma,
    )


class TestTransformSeries:
    def test_constant_series_at_strike(self):
        series = make_series([
            (dt.date(2023, 3, 13), 10.0, 0.0),
            (dt.date(2023, 3, 15), 10.0, 0.0),
            (dt.date(2023, 3, 17), 10.0, 0.0),
        ])
        points = transform_series(series, make_contract())
        assert len(points) == 3
        for p in points:
            assert p.x == 0.0 and p.u == 0.0
        assert points[-1].tau == 0.0
        assert all(a.tau > b.tau for a, b in zip(points, points[1:]))

    def test_expiry_row_matches_initial_condition(self):
        contract = make_contract()
        spot_at_expiry = 14.0
        payoff = spot_at_expiry - contract.strike
        series = make_series([
            (dt.date(2023, 3, 16), 13.0, 3.1),
            (dt.date(2023, 3, 17), spot_at_expiry, payoff),
        ])
        points = transform_series(series, contract)
        ctx = context_for(series, contract)
        last = points[-1]
        assert last.tau == 0.0
        assert last.u == pytest.approx(float(initial_condition_u(last.x, ctx)), rel=1e-12)

    def test_rows_after_expiry_rejected_with_diagnostic(self, caplog):
        contract = make_contract()
        series = make_series([
            (dt.date(2023, 3, 16), 13.0, 3.1),
            (dt.date(2023, 3, 17), 14.0, 4.0),
            (dt.date(2023, 3, 20), 14.5, 4.5),
        ])
        with caplog.at_level(logging.WARNING, logger="heatcall.transform"):
            points = transform_series(series, contract)
        assert len(points) == 2
        assert any("after expiry" in rec.message for rec in caplog.records)

    def test_bad_prices_rejected_with_diagnostic(self, caplog):
        # QuoteSeries normally forbids these rows; build one without running
        # validation to exercise the defensive path.
        contract = make_contract()
        bad = object.__new__(QuoteSeries)
        object.__setattr__(bad, "rows", (
            QuoteRow(dt.date(2023, 3, 15), -1.0, 0.5),
            QuoteRow(dt.date(2023, 3, 16), 13.0, -0.5),
            QuoteRow(dt.date(2023, 3, 17), 13.0, 3.0),
        ))
        with caplog.at_level(logging.WARNING, logger="heatcall.transform"):
            points = transform_series(bad, contract)
        assert len(points) == 1
        messages = " | ".join(rec.message for rec in caplog.records)
        assert "non-positive spot" in messages
        assert "negative option price" in messages

    def test_matches_analytic_heat_solution_on_synthetic_series(self):
        # prices generated from the closed form must land exactly on the
        # analytic solution surface in heat coordinates
        from heatcall.fd import analytic_heat_u
        from heatcall.pricing import MarketParams, call_price
        from heatcall.market import time_to_maturity

        contract = make_contract(strike=20.0, sigma=0.4, rate=0.08)
        dates = [dt.date(2023, 3, 6) + dt.timedelta(days=d) for d in (0, 1, 2, 3, 4, 7, 8, 9, 10, 11)]
        rows = []
        rng = np.random.default_rng(8)
        for date in dates:
            tenor = time_to_maturity(date, contract.expiry_date)
            spot = float(rng.uniform(12, 30))
            c = call_price(MarketParams(spot=spot, strike=20.0, rate=0.08, sigma=0.4, tenor=tenor))
            rows.append((date, spot, c))
        series = make_series(rows)
        ctx = context_for(series, contract)
        for p in transform_series(series, contract):
            assert p.u == pytest.approx(analytic_heat_u(p.x, p.tau, ctx), abs=1e-8)
