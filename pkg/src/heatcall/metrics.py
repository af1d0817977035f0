"""Evaluation measures over an actual series Y and a predicted series Y_hat:
MAE, MSE, MAPE (stored as a fraction), POCID (percent of matching day-over-day
directions) and ARV (error normalized against spread around the actual mean).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ARV_DENOMINATOR_FLOOR = 1e-12


@dataclass(frozen=True)
class MetricsReport:
    """One evaluated contract's error measures; None marks a measure whose
    domain guard fired (zero actual value, degenerate denominator)."""

    mae: float
    mse: float
    mape: float | None
    pocid: float
    arv: float | None
    n: int


def _as_pair(actual, predicted) -> tuple[np.ndarray, np.ndarray]:
    y = np.asarray(actual, dtype=float)
    y_hat = np.asarray(predicted, dtype=float)
    if y.ndim != 1 or y_hat.ndim != 1:
        raise ValueError("series must be one-dimensional")
    if y.shape != y_hat.shape:
        raise ValueError(f"length mismatch: {y.size} actual vs {y_hat.size} predicted")
    if y.size < 2:
        raise ValueError("need at least 2 points")
    return y, y_hat


def mae(actual, predicted) -> float:
    y, y_hat = _as_pair(actual, predicted)
    return float(np.mean(np.abs(y - y_hat)))


def mse(actual, predicted) -> float:
    y, y_hat = _as_pair(actual, predicted)
    return float(np.mean((y - y_hat) ** 2))


def mape(actual, predicted) -> float:
    """Mean absolute relative error as a fraction (no x100)."""
    y, y_hat = _as_pair(actual, predicted)
    zeros = np.nonzero(y == 0.0)[0]
    if zeros.size:
        raise ValueError(f"actual value at index {zeros[0]} is zero; MAPE undefined")
    return float(np.mean(np.abs((y - y_hat) / y)))


def pocid(actual, predicted) -> float:
    """Percent of steps whose actual and predicted changes share a strict sign.

    Ties (either change zero) count as misses.
    """
    y, y_hat = _as_pair(actual, predicted)
    hits = np.diff(y) * np.diff(y_hat) > 0.0
    return float(100.0 * np.sum(hits) / (y.size - 1))


def arv(actual, predicted, denominator: str = "predicted") -> float:
    """Squared error relative to spread around the actual-series mean.

    The spread is measured on the predicted series by default; `denominator`
    = "actual" switches to the conventional actual-series spread.
    """
    y, y_hat = _as_pair(actual, predicted)
    if denominator not in ("predicted", "actual"):
        raise ValueError("denominator must be 'predicted' or 'actual'")
    y_bar = float(np.mean(y))
    base = y_hat if denominator == "predicted" else y
    denom = float(np.sum((base - y_bar) ** 2))
    if denom < ARV_DENOMINATOR_FLOOR:
        raise ValueError("degenerate series: ARV denominator is (near) zero")
    return float(np.sum((y_hat - y) ** 2) / denom / y.size)


def report_all(actual, predicted, arv_denominator: str = "predicted") -> MetricsReport:
    """All five measures; measures with a tripped domain guard come back None."""
    y, y_hat = _as_pair(actual, predicted)
    try:
        mape_value = mape(y, y_hat)
    except ValueError:
        mape_value = None
    try:
        arv_value = arv(y, y_hat, arv_denominator)
    except ValueError:
        arv_value = None
    return MetricsReport(
        mae=mae(y, y_hat),
        mse=mse(y, y_hat),
        mape=mape_value,
        pocid=pocid(y, y_hat),
        arv=arv_value,
        n=int(y.size),
    )


def render_report_csv(code: str, strike: float, report: MetricsReport) -> str:
    """One header plus one row matching the evaluation-table column layout."""

    def cell(v):
        return "NA" if v is None else repr(float(v))

    header = "code,strike,mae,mse,mape,pocid,arv,n"
    row = ",".join([
        code,
        repr(float(strike)),
        cell(report.mae),
        cell(report.mse),
        cell(report.mape),
        cell(report.pocid),
        cell(report.arv),
        str(report.n),
    ])
    return header + "\n" + row + "\n"
