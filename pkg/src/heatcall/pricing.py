"""Closed-form Black-Scholes-Merton pricing of European calls and puts.

Serves both as a user-facing pricer and as the analytic baseline curve that
the network solution is compared against.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

_SQRT2 = math.sqrt(2.0)


class AtExpiryError(ValueError):
    """Raised when d1/d2 are requested with zero time to maturity."""


@dataclass(frozen=True)
class MarketParams:
    """Inputs of the pricing formulas.

    spot and strike are in currency units, rate is a continuously-compounded
    annual rate, sigma an annualized volatility, tenor the remaining time to
    maturity in years.
    """

    spot: float
    strike: float
    rate: float
    sigma: float
    tenor: float

    def __post_init__(self):
        for name in ("spot", "strike", "rate", "sigma", "tenor"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.spot <= 0:
            raise ValueError("spot must be > 0")
        if self.strike <= 0:
            raise ValueError("strike must be > 0")
        if self.sigma <= 0:
            raise ValueError("sigma must be > 0")
        if self.tenor < 0:
            raise ValueError("tenor must be >= 0")


def std_normal_cdf(x: float) -> float:
    """Standard normal cumulative distribution function."""
    if not math.isfinite(x):
        raise ValueError("std_normal_cdf requires a finite argument")
    # erfc keeps full precision in the far tails where 1 - erf(x) would cancel.
    return 0.5 * math.erfc(-x / _SQRT2)


def d1_d2(p: MarketParams) -> tuple[float, float]:
    """The two normal-quantile arguments of the call/put formulas.

    Raises AtExpiryError at tenor 0; callers must price by payoff there.
    """
    if p.tenor == 0:
        raise AtExpiryError("at expiry; use the payoff instead of d1/d2")
    vol_sqrt_t = p.sigma * math.sqrt(p.tenor)
    d1 = (math.log(p.spot / p.strike) + (p.rate + 0.5 * p.sigma**2) * p.tenor) / vol_sqrt_t
    return d1, d1 - vol_sqrt_t


def call_price(p: MarketParams) -> float:
    """European call value; at tenor 0 this is the payoff."""
    if p.tenor == 0:
        return call_payoff(p.spot, p.strike)
    d1, d2 = d1_d2(p)
    return p.spot * std_normal_cdf(d1) - p.strike * math.exp(-p.rate * p.tenor) * std_normal_cdf(d2)


def put_price(p: MarketParams) -> float:
    """European put value; at tenor 0 this is the payoff."""
    if p.tenor == 0:
        return put_payoff(p.spot, p.strike)
    d1, d2 = d1_d2(p)
    return p.strike * math.exp(-p.rate * p.tenor) * std_normal_cdf(-d2) - p.spot * std_normal_cdf(-d1)


def call_payoff(spot_at_expiry: float, strike: float) -> float:
    """Exercise value of a call at expiry."""
    if spot_at_expiry < 0:
        raise ValueError("spot at expiry must be >= 0")
    if strike <= 0:
        raise ValueError("strike must be > 0")
    return max(spot_at_expiry - strike, 0.0)


def put_payoff(spot_at_expiry: float, strike: float) -> float:
    """Exercise value of a put at expiry."""
    if spot_at_expiry < 0:
        raise ValueError("spot at expiry must be >= 0")
    if strike <= 0:
        raise ValueError("strike must be > 0")
    return max(strike - spot_at_expiry, 0.0)
