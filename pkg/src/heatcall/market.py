"""Option/spot time-series ingestion, option-code parsing, volatility
estimation, and trading-day year fractions.

Series files are comma-separated with a header and columns `date`
(yyyy-mm-dd), `spot_close`, `option_close`. Contract terms live in a sidecar
of `key = value` lines: `code`, `strike`, `expiry`, and optional `rate`,
`sigma`, `basis`.
"""
from __future__ import annotations

import csv
import datetime as dt
import io
import math
import re
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

TRADING_DAYS_PER_YEAR = 252
DEFAULT_RATE = 0.1375  # Brazilian base rate held constant over the study window

_CODE_RE = re.compile(r"^([A-Z]{4})([A-Z])([0-9]{2,3})$")


class SeriesError(ValueError):
    """A series file failed format or row validation."""


class QuoteRow(NamedTuple):
    date: dt.date
    spot_close: float
    option_close: float


@dataclass(frozen=True)
class QuoteSeries:
    """Dated, aligned spot and option closes for one contract."""

    rows: tuple[QuoteRow, ...]

    def __post_init__(self):
        if len(self.rows) < 2:
            raise SeriesError("a series needs at least 2 rows")
        for i, row in enumerate(self.rows):
            if row.spot_close <= 0:
                raise SeriesError(f"row {i} ({row.date}): spot_close must be > 0")
            if row.option_close < 0:
                raise SeriesError(f"row {i} ({row.date}): option_close must be >= 0")
        for prev, cur in zip(self.rows, self.rows[1:]):
            if cur.date <= prev.date:
                raise SeriesError(f"dates must be strictly increasing near {cur.date}")

    def spots(self) -> np.ndarray:
        return np.array([r.spot_close for r in self.rows])

    def option_closes(self) -> np.ndarray:
        return np.array([r.option_close for r in self.rows])

    def dates(self) -> list[dt.date]:
        return [r.date for r in self.rows]


def parse_series_csv(data: bytes | str) -> QuoteSeries:
    """Parse, validate and date-sort a series file."""
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    reader = csv.DictReader(io.StringIO(text))
    required = ("date", "spot_close", "option_close")
    header = reader.fieldnames or []
    for col in required:
        if col not in header:
            raise SeriesError(f"missing column {col!r}")
    rows: list[QuoteRow] = []
    seen: dict[dt.date, int] = {}
    for record in reader:
        line = reader.line_num
        raw_date = (record.get("date") or "").strip()
        try:
            date = dt.date.fromisoformat(raw_date)
        except ValueError:
            raise SeriesError(f"line {line}: unparseable date {raw_date!r}") from None
        try:
            spot = float(record["spot_close"])
            option = float(record["option_close"])
        except (TypeError, ValueError):
            raise SeriesError(f"line {line}: non-numeric price") from None
        if spot <= 0:
            raise SeriesError(f"line {line}: spot_close must be > 0 (got {spot})")
        if option < 0:
            raise SeriesError(f"line {line}: option_close must be >= 0 (got {option})")
        if date in seen:
            raise SeriesError(f"line {line}: duplicate date {date} (first on line {seen[date]})")
        seen[date] = line
        rows.append(QuoteRow(date, spot, option))
    rows.sort(key=lambda r: r.date)
    return QuoteSeries(rows=tuple(rows))


def write_series_csv(series: QuoteSeries) -> str:
    """Inverse of parse_series_csv: parse(write(s)) reproduces s exactly."""
    lines = ["date,spot_close,option_close"]
    for row in series.rows:
        lines.append(f"{row.date.isoformat()},{row.spot_close!r},{row.option_close!r}")
    return "\n".join(lines) + "\n"


def parse_option_code(code: str) -> tuple[str, str, str]:
    """Split an exchange option code into (underlying, kind, series hint).

    Four root letters, a call/put letter (A-L call, M-X put), then two or
    three digits.
    """
    m = _CODE_RE.match(code)
    if not m:
        raise ValueError(f"option code {code!r} is not 4 letters + 1 letter + 2-3 digits")
    root, letter, digits = m.groups()
    if letter <= "L":
        return root, "call", digits
    if letter <= "X":
        return root, "put", digits
    raise ValueError(f"option code {code!r}: fifth letter {letter} outside A-X")


@dataclass(frozen=True)
class OptionContract:
    underlying: str
    code: str
    kind: str  # "call" | "put"
    strike: float
    expiry_date: dt.date
    rate: float = DEFAULT_RATE
    sigma: float = 0.0
    basis: int = TRADING_DAYS_PER_YEAR

    def __post_init__(self):
        if self.kind not in ("call", "put"):
            raise ValueError("kind must be 'call' or 'put'")
        if self.strike <= 0:
            raise ValueError("strike must be > 0")
        if self.sigma <= 0:
            raise ValueError("sigma must be > 0 once resolved")
        if not math.isfinite(self.rate):
            raise ValueError("rate must be finite")
        try:
            _, kind, _ = parse_option_code(self.code)
        except ValueError:
            return  # free-form codes are allowed; no consistency check possible
        if kind != self.kind:
            raise ValueError(f"code {self.code} implies a {kind}, not a {self.kind}")


def estimate_volatility(spots: Sequence[float], basis: int = TRADING_DAYS_PER_YEAR) -> float:
    """Annualized close-to-close volatility over the whole window.

    Sample standard deviation of log returns, scaled by sqrt(basis).
    """
    prices = np.asarray(spots, dtype=float)
    if prices.size < 3:
        raise ValueError("need at least 3 prices to estimate volatility")
    if np.any(prices <= 0):
        raise ValueError("all prices must be > 0")
    returns = np.log(prices[1:] / prices[:-1])
    return float(np.std(returns, ddof=1) * np.sqrt(basis))


def time_to_maturity(d: dt.date, expiry: dt.date, basis: int = TRADING_DAYS_PER_YEAR) -> float:
    """Trading days (weekends excluded) between d and expiry, as a year
    fraction on the given basis; exactly 0 at expiry."""
    if d > expiry:
        raise ValueError(f"date {d} is after expiry {expiry}")
    return int(np.busday_count(d, expiry)) / basis


def parse_sidecar(text: str) -> dict[str, str]:
    """Key = value lines; blank lines and # comments ignored."""
    values: dict[str, str] = {}
    for i, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"sidecar line {i}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        values[key.strip()] = value.strip()
    return values


def contract_from_sidecar(
    text: str,
    series: QuoteSeries,
    default_rate: float = DEFAULT_RATE,
    default_basis: int = TRADING_DAYS_PER_YEAR,
) -> OptionContract:
    """Resolve a full contract from sidecar text plus its series.

    Volatility falls back to the historical estimate over the series' spots
    when the sidecar does not pin it.
    """
    values = parse_sidecar(text)
    for key in ("code", "strike", "expiry"):
        if key not in values:
            raise ValueError(f"sidecar is missing required key {key!r}")
    code = values["code"]
    underlying, kind, _ = parse_option_code(code)
    basis = int(values.get("basis", default_basis))
    sigma = float(values["sigma"]) if "sigma" in values else estimate_volatility(series.spots(), basis)
    return OptionContract(
        underlying=underlying,
        code=code,
        kind=kind,
        strike=float(values["strike"]),
        expiry_date=dt.date.fromisoformat(values["expiry"]),
        rate=float(values.get("rate", default_rate)),
        sigma=sigma,
        basis=basis,
    )


def write_sidecar(contract: OptionContract) -> str:
    return (
        f"code = {contract.code}\n"
        f"strike = {contract.strike!r}\n"
        f"expiry = {contract.expiry_date.isoformat()}\n"
        f"rate = {contract.rate!r}\n"
        f"sigma = {contract.sigma!r}\n"
        f"basis = {contract.basis}\n"
    )
