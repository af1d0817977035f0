"""Change of variables between option coordinates (S, t, c) and heat-equation
coordinates (x, tau, u).

x is log-moneyness ln(S/K), tau the diffusion time sigma^2 (T - t) / 2, and u
the generalized price. The maps are exact inverses of each other, and the
transformed payoff is the initial condition the network solution must satisfy
at tau = 0.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .market import OptionContract, QuoteSeries, time_to_maturity

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TransformContext:
    """Contract constants plus the derived exponents of the variable change.

    k = 2 r / sigma^2; alpha and beta are fixed by requiring that
    exp(alpha x + beta tau) turns the scaled price into a pure heat-equation
    solution: alpha = -(k - 1)/2, beta = -(k + 1)^2 / 4.
    """

    strike: float
    rate: float
    sigma: float
    expiry: float  # years from the start of the observation window
    k: float
    alpha: float
    beta: float


@dataclass(frozen=True)
class HeatPoint:
    """One observation in transformed coordinates."""

    x: float
    tau: float
    u: float


def make_context(strike: float, rate: float, sigma: float, expiry: float) -> TransformContext:
    if strike <= 0:
        raise ValueError("strike must be > 0")
    if sigma <= 0:
        raise ValueError("sigma must be > 0")
    if expiry <= 0:
        raise ValueError("expiry must be > 0")
    k = 2.0 * rate / sigma**2
    return TransformContext(
        strike=strike,
        rate=rate,
        sigma=sigma,
        expiry=expiry,
        k=k,
        alpha=-(k - 1.0) / 2.0,
        beta=-((k + 1.0) ** 2) / 4.0,
    )


def to_x(spot: float, ctx: TransformContext) -> float:
    """Log-moneyness of a spot price."""
    if spot <= 0:
        raise ValueError("spot must be > 0")
    return math.log(spot / ctx.strike)


def to_tau(t: float, ctx: TransformContext) -> float:
    """Diffusion time for calendar time t (years from window start)."""
    if t > ctx.expiry:
        raise ValueError("t is past expiry")
    return 0.5 * ctx.sigma**2 * (ctx.expiry - t)


def price_scale(x, tau, ctx: TransformContext):
    """Factor mapping u back to currency: c = u * price_scale(x, tau)."""
    return ctx.strike * np.exp(-0.5 * (ctx.k - 1.0) * x - 0.25 * (ctx.k + 1.0) ** 2 * tau)


def c_from_u(pt: HeatPoint, ctx: TransformContext) -> float:
    """Option price corresponding to a transformed point."""
    return pt.u * float(price_scale(pt.x, pt.tau, ctx))


def u_from_c(c: float, x: float, tau: float, ctx: TransformContext) -> float:
    """Generalized price of an observed option price; exact inverse of c_from_u."""
    if c < 0:
        raise ValueError("option price must be >= 0")
    return c / float(price_scale(x, tau, ctx))


def initial_condition_u(x, ctx: TransformContext):
    """Transformed call payoff: the solution surface at tau = 0.

    Zero for x <= 0, positive and increasing for x > 0.
    """
    xa = np.asarray(x, dtype=float)
    half_up = 0.5 * (ctx.k + 1.0)
    half_dn = 0.5 * (ctx.k - 1.0)
    return np.maximum(np.exp(half_up * xa) - np.exp(half_dn * xa), 0.0)


def initial_condition_curvature(x, ctx: TransformContext):
    """Classical second x-derivative of the transformed payoff (0 for x <= 0).

    The slope kink at x = 0 has no classical second derivative there; the
    left-branch value 0 is used at exactly 0.
    """
    xa = np.asarray(x, dtype=float)
    a = 0.5 * (ctx.k + 1.0)
    b = 0.5 * (ctx.k - 1.0)
    positive = a * a * np.exp(a * xa) - b * b * np.exp(b * xa)
    return np.where(xa > 0, positive, 0.0)


def context_for(series: QuoteSeries, contract: OptionContract) -> TransformContext:
    """Transform context with expiry measured in years from the series start."""
    expiry_years = time_to_maturity(series.rows[0].date, contract.expiry_date, contract.basis)
    return make_context(contract.strike, contract.rate, contract.sigma, expiry_years)


def transform_series(series: QuoteSeries, contract: OptionContract) -> list[HeatPoint]:
    """Map a quote series into heat coordinates, one point per usable row.

    Output is ordered by calendar date (equivalently decreasing tau). Rows
    with non-positive spot, negative option price, or dates past expiry are
    rejected with a logged diagnostic rather than silently dropped.
    """
    ctx = context_for(series, contract)
    points: list[HeatPoint] = []
    for i, row in enumerate(series.rows):
        if row.spot_close <= 0:
            log.warning("row %d (%s) rejected: non-positive spot %s", i, row.date, row.spot_close)
            continue
        if row.option_close < 0:
            log.warning("row %d (%s) rejected: negative option price %s", i, row.date, row.option_close)
            continue
        if row.date > contract.expiry_date:
            log.warning("row %d (%s) rejected: after expiry %s", i, row.date, contract.expiry_date)
            continue
        ttm = time_to_maturity(row.date, contract.expiry_date, contract.basis)
        tau = to_tau(ctx.expiry - ttm, ctx)
        x = to_x(row.spot_close, ctx)
        points.append(HeatPoint(x=x, tau=tau, u=u_from_c(row.option_close, x, tau, ctx)))
    return points
