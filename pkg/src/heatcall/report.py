"""Evaluation outputs: the delimited four-curve file, the metrics row, and
matplotlib renderings saved next to them.

Curve naming: `spot` is the underlying stock price, `option_market` the
traded option price, `bls_analytic` the closed-form value, `nn_price` the
network value. Colors follow the reference scheme (spot purple, closed form
magenta, market blue, network green).
"""
from __future__ import annotations

import datetime as dt
from typing import Sequence

CURVE_COLORS = {
    "spot": "purple",
    "option_market": "tab:blue",
    "bls_analytic": "magenta",
    "nn_price": "green",
}


def write_plot_data(path, dates: Sequence[dt.date], spot, option, bls, nn) -> None:
    """Tidy per-date file with all four curves; loadable by any plotting tool."""
    n = len(dates)
    if not (len(spot) == len(option) == len(bls) == len(nn) == n):
        raise ValueError("curve lengths differ")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("date,spot,option_market,bls_analytic,nn_price\n")
        for i in range(n):
            fh.write(
                f"{dates[i].isoformat()},{float(spot[i])!r},{float(option[i])!r},"
                f"{float(bls[i])!r},{float(nn[i])!r}\n"
            )


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def render_four_curves(path, dates, spot, option, bls, nn, title: str) -> None:
    """Price history figure with the four standard curves."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(8, 4.5))
    ax.plot(dates, spot, color=CURVE_COLORS["spot"], label="SPOT")
    ax.plot(dates, bls, color=CURVE_COLORS["bls_analytic"], label="BLS")
    ax.plot(dates, option, color=CURVE_COLORS["option_market"], label="OPTION")
    ax.plot(dates, nn, color=CURVE_COLORS["nn_price"], label="NN")
    ax.set_xlabel("date")
    ax.set_ylabel("price")
    ax.set_title(title)
    ax.legend(loc="best")
    fig.autofmt_xdate()
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata={"Software": "heatcall"})
    plt.close(fig)


def render_loss_history(path, history: Sequence[tuple[int, float, float]]) -> None:
    """Residual and data loss components against the training epoch."""
    plt = _pyplot()
    epochs = [h[0] for h in history]
    residual = [h[1] for h in history]
    data = [h[2] for h in history]
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.semilogy(epochs, residual, label="residual loss", color="tab:red")
    if any(v > 0 for v in data):
        ax.semilogy(epochs, data, label="data loss", color="tab:blue")
    ax.set_xlabel("epoch")
    ax.set_ylabel("loss")
    ax.legend(loc="best")
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata={"Software": "heatcall"})
    plt.close(fig)
