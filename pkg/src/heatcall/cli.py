"""Command-line entry point.

Subcommands: `price` (closed-form call/put), `synth` (synthetic series +
sidecar), `train` (fit the network to a series), `evaluate` (metrics, plot
data and figures for a trained checkpoint), `oracle` (finite-difference
cross-check). Exit codes: 0 success, 1 runtime/data failure, 2 usage error.
"""
from __future__ import annotations

import argparse
import datetime as dt
import hashlib
import sys
from pathlib import Path

import numpy as np

from . import __version__, fd, net, report, solver
from .config import ConfigError, RunConfig, load_config
from .market import (
    OptionContract,
    QuoteRow,
    QuoteSeries,
    SeriesError,
    contract_from_sidecar,
    parse_option_code,
    parse_series_csv,
    time_to_maturity,
    write_series_csv,
    write_sidecar,
)
from .metrics import render_report_csv, report_all
from .pricing import MarketParams, call_price, put_price
from .transform import context_for, make_context, transform_series


def _context_hash(contract: OptionContract) -> str:
    key = f"{contract.strike!r}|{contract.expiry_date.isoformat()}|{contract.rate!r}|{contract.sigma!r}|{contract.basis}"
    return hashlib.sha256(key.encode("ascii")).hexdigest()[:16]


def _load_market(cfg: RunConfig) -> tuple[QuoteSeries, OptionContract]:
    series = parse_series_csv(Path(cfg.series).read_bytes())
    contract = contract_from_sidecar(Path(cfg.sidecar).read_text(encoding="utf-8"), series, cfg.rate, cfg.basis)
    return series, contract


def _build_domain(cfg: RunConfig, points, ctx) -> solver.Domain2D:
    xs = [p.x for p in points]
    return solver.Domain2D(
        x_min=min(xs) - cfg.domain_margin,
        x_max=max(xs) + cfg.domain_margin,
        tau_max=0.5 * ctx.sigma**2 * ctx.expiry,
        collocation_count=cfg.collocation_count,
        seed=cfg.seed,
    )


def cmd_price(args) -> int:
    params = MarketParams(spot=args.spot, strike=args.strike, rate=args.rate,
                          sigma=args.sigma, tenor=args.tenor)
    print(f"call {call_price(params):.6f}")
    print(f"put {put_price(params):.6f}")
    return 0


def cmd_synth(args) -> int:
    cfg = load_config(args.config)
    if cfg.series is None or cfg.sidecar is None:
        raise ConfigError("[data] series and sidecar paths are required to write synthetic output")
    _, kind, _ = parse_option_code(cfg.synth_code)
    if kind != "call":
        raise ConfigError(f"synthetic series must be a call contract; code {cfg.synth_code} is a {kind}")

    start = np.datetime64(dt.date.fromisoformat(cfg.synth_start))
    days = np.busday_offset(start, np.arange(cfg.synth_days), roll="forward")
    dates = [d.astype(dt.date) for d in days]
    expiry = dates[-1]

    rng = np.random.default_rng(cfg.synth_seed)
    step = 1.0 / cfg.basis
    shocks = rng.standard_normal(cfg.synth_days - 1)
    log_path = np.concatenate([
        [0.0],
        np.cumsum((cfg.synth_drift - 0.5 * cfg.synth_sigma**2) * step
                  + cfg.synth_sigma * np.sqrt(step) * shocks),
    ])
    spots = cfg.synth_spot0 * np.exp(log_path)

    rows = []
    for date, spot in zip(dates, spots):
        tenor = time_to_maturity(date, expiry, cfg.basis)
        clean = call_price(MarketParams(spot=float(spot), strike=cfg.synth_strike,
                                        rate=cfg.rate, sigma=cfg.synth_sigma, tenor=tenor))
        observed = clean
        if cfg.synth_noise > 0:
            observed = max(clean + cfg.synth_noise * rng.uniform(-1.0, 1.0), 0.0)
        rows.append(QuoteRow(date=date, spot_close=float(spot), option_close=float(observed)))
    series = QuoteSeries(rows=tuple(rows))

    contract = OptionContract(
        underlying=cfg.synth_code[:4],
        code=cfg.synth_code,
        kind="call",
        strike=cfg.synth_strike,
        expiry_date=expiry,
        rate=cfg.rate,
        sigma=cfg.synth_sigma,
        basis=cfg.basis,
    )
    Path(cfg.series).parent.mkdir(parents=True, exist_ok=True)
    Path(cfg.series).write_text(write_series_csv(series), encoding="utf-8")
    Path(cfg.sidecar).parent.mkdir(parents=True, exist_ok=True)
    Path(cfg.sidecar).write_text(write_sidecar(contract), encoding="utf-8")
    print(f"wrote {cfg.series} ({len(series.rows)} rows) and {cfg.sidecar}")
    return 0


def cmd_train(args) -> int:
    cfg = load_config(args.config, require_paths=("series", "sidecar"))
    series, contract = _load_market(cfg)
    if contract.kind != "call":
        print("error: only call contracts can be trained", file=sys.stderr)
        return 1
    ctx = context_for(series, contract)
    points = transform_series(series, contract)
    if not points:
        print("error: no usable rows after validation", file=sys.stderr)
        return 1
    domain = _build_domain(cfg, points, ctx)
    train_config = solver.TrainConfig(
        domain=domain,
        epochs=cfg.epochs,
        lambda_data=cfg.lambda_data,
        lr=cfg.lr,
        beta1=cfg.beta1,
        beta2=cfg.beta2,
        epsilon=cfg.epsilon,
        record_every=cfg.record_every,
        seed=cfg.seed,
        hidden=cfg.hidden,
        collocation_grid=cfg.collocation_grid,
    )
    model = solver.train(train_config, points, ctx)

    out = Path(cfg.directory)
    out.mkdir(parents=True, exist_ok=True)
    ckpt = out / "model.ckpt"
    net.save_checkpoint(ckpt, model.params, seed=cfg.seed, steps=cfg.epochs,
                        context_hash=_context_hash(contract))
    history_path = out / "history.csv"
    with open(history_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("epoch,residual_loss,data_loss\n")
        for epoch, res, dat in model.loss_history:
            fh.write(f"{epoch},{res!r},{dat!r}\n")
    config_hash = hashlib.sha256(Path(args.config).read_bytes()).hexdigest()
    manifest = out / "manifest.txt"
    manifest.write_text(
        f"version = heatcall {__version__}\n"
        f"command = train\n"
        f"config_sha256 = {config_hash}\n"
        f"seed = {cfg.seed}\n"
        f"epochs = {cfg.epochs}\n"
        f"context = {_context_hash(contract)}\n",
        encoding="utf-8",
    )
    report.render_loss_history(out / "loss.png", model.loss_history)
    print(f"wrote {ckpt}, {history_path}, {manifest}")
    return 0


def cmd_evaluate(args) -> int:
    cfg = load_config(args.config, require_paths=("series", "sidecar"))
    ckpt_path = Path(args.checkpoint)
    if not ckpt_path.is_file():
        print(f"error: checkpoint not found: {ckpt_path}", file=sys.stderr)
        return 1
    series, contract = _load_market(cfg)
    params, meta = net.load_checkpoint(ckpt_path)
    expected = _context_hash(contract)
    if meta["context"] != expected:
        print(
            f"error: checkpoint context {meta['context']} does not match the "
            f"series sidecar ({expected}); refusing to evaluate",
            file=sys.stderr,
        )
        return 1
    ctx = context_for(series, contract)
    points = transform_series(series, contract)
    domain = _build_domain(cfg, points, ctx)
    model = solver.TrainedModel(params=params, ctx=ctx, domain=domain)

    dates = series.dates()
    spots = series.spots()
    option = series.option_closes()
    bls = np.empty(len(dates))
    nn = np.empty(len(dates))
    for i, row in enumerate(series.rows):
        tenor = time_to_maturity(row.date, contract.expiry_date, contract.basis)
        bls[i] = call_price(MarketParams(spot=row.spot_close, strike=contract.strike,
                                         rate=contract.rate, sigma=contract.sigma, tenor=tenor))
        nn[i] = solver.predict_option_price(model, row.spot_close, ctx.expiry - tenor).price

    mask = np.ones(len(dates), dtype=bool)
    if cfg.eval_start is not None:
        start = dt.date.fromisoformat(cfg.eval_start)
        mask &= np.array([d >= start for d in dates])
    if cfg.eval_end is not None:
        end = dt.date.fromisoformat(cfg.eval_end)
        mask &= np.array([d <= end for d in dates])
    if mask.sum() < 2:
        print("error: evaluation window keeps fewer than 2 rows", file=sys.stderr)
        return 1
    result = report_all(option[mask], nn[mask], arv_denominator=cfg.arv_denominator)

    out = Path(cfg.directory)
    out.mkdir(parents=True, exist_ok=True)
    metrics_path = out / "metrics.csv"
    metrics_path.write_text(render_report_csv(contract.code, contract.strike, result), encoding="utf-8")
    curves_path = out / "curves.csv"
    report.write_plot_data(curves_path, dates, spots, option, bls, nn)
    report.render_four_curves(out / "curves.png", dates, spots, option, bls, nn,
                              title=f"{contract.code} (strike {contract.strike})")
    summary = (
        f"n={result.n} mae={result.mae:.6g} mse={result.mse:.6g} "
        f"mape={'NA' if result.mape is None else format(result.mape, '.6g')} "
        f"pocid={result.pocid:.6g} "
        f"arv={'NA' if result.arv is None else format(result.arv, '.6g')}"
    )
    print(summary)
    print(f"wrote {metrics_path}, {curves_path}, {out / 'curves.png'}")
    return 0


def cmd_oracle(args) -> int:
    cfg = load_config(args.config)
    grid = fd.Grid1D(
        x_nodes=np.linspace(cfg.oracle_x_min, cfg.oracle_x_max, cfg.oracle_nodes),
        tau_steps=cfg.oracle_steps,
        tau_max=cfg.oracle_tau_max,
    )
    out = Path(cfg.directory)
    out.mkdir(parents=True, exist_ok=True)
    dump = out / "oracle_field.csv"
    if cfg.oracle_ic == "zero":
        field = fd.crank_nicolson(
            np.asarray(grid.x_nodes, dtype=float), grid.tau_steps, grid.dtau,
            np.zeros(cfg.oracle_nodes), lambda tau: 0.0, lambda tau: 0.0,
        )
        fd.write_field_dump(dump, grid, field)
        print(f"zero initial condition: max |u| = {float(np.max(np.abs(field))):.3e}")
        print(f"wrote {dump}")
        return 0
    ctx = make_context(
        strike=1.0,
        rate=cfg.oracle_rate,
        sigma=cfg.oracle_sigma,
        expiry=2.0 * cfg.oracle_tau_max / cfg.oracle_sigma**2,
    )
    field = fd.crank_nicolson_solve(grid, ctx)
    max_err, l2_err = fd.error_vs_analytic(grid, field, ctx)
    fd.write_field_dump(dump, grid, field)
    print(f"max-norm error vs analytic: {max_err:.6e}")
    print(f"L2 error vs analytic: {l2_err:.6e}")
    print(f"wrote {dump}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="heatcall", description=__doc__)
    parser.add_argument("--version", action="version", version=f"heatcall {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_price = sub.add_parser("price", help="closed-form call and put prices")
    for flag in ("spot", "strike", "rate", "sigma", "tenor"):
        p_price.add_argument(f"--{flag}", type=float, required=True)
    p_price.set_defaults(func=cmd_price)

    for name, func, extra in (
        ("synth", cmd_synth, "generate a synthetic series + sidecar"),
        ("train", cmd_train, "train the network on a series"),
        ("oracle", cmd_oracle, "finite-difference cross-check"),
    ):
        p = sub.add_parser(name, help=extra)
        p.add_argument("config", help="path to the run config file")
        p.set_defaults(func=func)

    p_eval = sub.add_parser("evaluate", help="metrics, plot data and figures for a checkpoint")
    p_eval.add_argument("config", help="path to the run config file")
    p_eval.add_argument("checkpoint", help="path to a trained checkpoint")
    p_eval.set_defaults(func=cmd_evaluate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, SeriesError, ValueError, OSError, RuntimeError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
