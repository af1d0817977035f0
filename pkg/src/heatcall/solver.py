"""Heat-equation residual training with a hard initial condition.

The network output u_hat never enters the loss directly: the trial surface

    u_trial(x, tau) = u0(x) + (1 - exp(-tau)) * u_hat(x, tau)

equals the transformed payoff u0 exactly at tau = 0 for any parameters, so
the initial condition costs nothing to enforce. The loss is the mean squared
heat-operator residual of u_trial over resampled collocation points, plus an
optional mean squared data-fit term on observed points in heat coordinates.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from . import net
from .net import MlpParams, NonFiniteError
from .transform import (
    HeatPoint,
    TransformContext,
    initial_condition_curvature,
    initial_condition_u,
    price_scale,
    to_tau,
    to_x,
)


@dataclass(frozen=True)
class Domain2D:
    """Truncated collocation box; tau always starts at 0."""

    x_min: float
    x_max: float
    tau_max: float
    collocation_count: int = 1024
    seed: int = 42

    def __post_init__(self):
        if self.x_min >= self.x_max:
            raise ValueError("x_min must be < x_max")
        if self.tau_max <= 0:
            raise ValueError("tau_max must be > 0")
        if self.collocation_count < 1:
            raise ValueError("collocation_count must be >= 1")


@dataclass(frozen=True)
class TrainConfig:
    domain: Domain2D
    epochs: int = 30000
    lambda_data: float = 1.0
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    record_every: int = 100
    seed: int = 42                       # network init seed
    hidden: tuple[int, ...] = net.DEFAULT_HIDDEN
    collocation_grid: bool = False       # fixed equispaced grid instead of resampling

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.lambda_data < 0:
            raise ValueError("lambda_data must be >= 0")


@dataclass
class TrainedModel:
    params: MlpParams
    ctx: TransformContext
    domain: Domain2D
    loss_history: list[tuple[int, float, float]] = field(default_factory=list)


class TrainingDivergedError(RuntimeError):
    """Loss became non-finite; carries the epoch and batch summary."""

    def __init__(self, epoch, detail):
        super().__init__(f"training diverged at epoch {epoch}: {detail}")
        self.epoch = epoch


class Prediction(NamedTuple):
    price: float
    extrapolated: bool


def _blend(tau):
    # 1 - exp(-tau) via expm1: exactly 0.0 at tau = 0
    return -np.expm1(-np.asarray(tau, dtype=float))


def trial_u(params: MlpParams, x, tau, ctx: TransformContext):
    """Trial surface value; equals the transformed payoff exactly at tau = 0."""
    xa, ta = np.broadcast_arrays(np.asarray(x, float), np.asarray(tau, float))
    pts = np.column_stack([np.ravel(xa), np.ravel(ta)])
    u_hat = net.forward_batch(params, pts)
    out = initial_condition_u(np.ravel(xa), ctx) + _blend(np.ravel(ta)) * u_hat
    if np.isscalar(x) and np.isscalar(tau):
        return float(out[0])
    return out.reshape(xa.shape)


def residual_from_outputs(u, du_dtau, d2u_dx2, x, tau, ctx: TransformContext, apply_trial: bool = True):
    """Heat-operator residual given raw network outputs at (x, tau).

    With apply_trial the outputs are treated as u_hat and the residual is that
    of the blended trial surface (the initial-condition curvature and the
    blend's own derivatives enter exactly); without it, the residual of the
    outputs themselves, which lets closed-form surfaces be checked directly.
    """
    if not apply_trial:
        return np.asarray(du_dtau) - np.asarray(d2u_dx2)
    g = _blend(tau)
    gp = np.exp(-np.asarray(tau, dtype=float))
    return gp * u + g * du_dtau - (initial_condition_curvature(x, ctx) + g * d2u_dx2)


def residual(params: MlpParams, x: float, tau: float, ctx: TransformContext) -> float:
    """Residual of the trial surface at one point."""
    u, _, ut, uxx = net.forward_with_input_derivs(params, x, tau)
    return float(residual_from_outputs(u, ut, uxx, x, tau, ctx))


def sample_collocation(domain: Domain2D, epoch: int) -> np.ndarray:
    """Uniform (x, tau) batch; the stream is fixed by (domain.seed, epoch)."""
    rng = np.random.default_rng(np.random.SeedSequence(domain.seed, spawn_key=(epoch,)))
    return rng.uniform(
        [domain.x_min, 0.0],
        [domain.x_max, domain.tau_max],
        size=(domain.collocation_count, 2),
    )


def collocation_grid(domain: Domain2D) -> np.ndarray:
    """Fixed equispaced alternative to resampling, roughly 8:1 x-to-tau points."""
    n_tau = max(2, int(round(math.sqrt(domain.collocation_count / 8.0))))
    n_x = max(2, domain.collocation_count // n_tau)
    gx = np.linspace(domain.x_min, domain.x_max, n_x)
    gt = np.linspace(0.0, domain.tau_max, n_tau)
    mx, mt = np.meshgrid(gx, gt)
    return np.column_stack([mx.ravel(), mt.ravel()])


@dataclass
class ResidualLoss:
    """Mean squared trial-surface residual over a collocation batch."""

    points: np.ndarray
    ctx: TransformContext

    def value_and_seeds(self, u, ux, ut, uxx):
        tau = self.points[:, 1]
        g = _blend(tau)
        gp = np.exp(-tau)
        r = gp * u + g * ut - (initial_condition_curvature(self.points[:, 0], self.ctx) + g * uxx)
        n = len(r)
        value = float(np.mean(r * r))
        scale = 2.0 * r / n
        return value, (scale * gp, None, scale * g, -scale * g)


@dataclass
class DataFitLoss:
    """Mean squared mismatch between the trial surface and observed u values."""

    points: np.ndarray
    targets: np.ndarray
    ctx: TransformContext

    def value_and_seeds(self, u, ux, ut, uxx):
        g = _blend(self.points[:, 1])
        gap = initial_condition_u(self.points[:, 0], self.ctx) + g * u - self.targets
        n = len(gap)
        return float(np.mean(gap * gap)), (2.0 * gap * g / n, None, None, None)


def _data_arrays(data: Sequence[HeatPoint]):
    pts = np.array([[p.x, p.tau] for p in data], dtype=float).reshape(-1, 2)
    targets = np.array([p.u for p in data], dtype=float)
    return pts, targets


def total_loss(
    params: MlpParams,
    collocation: np.ndarray,
    data: Sequence[HeatPoint],
    lambda_data: float,
    ctx: TransformContext,
) -> tuple[float, float, float]:
    """(total, residual part, data part) of the training objective."""
    collocation = np.asarray(collocation, dtype=float)
    if collocation.size == 0:
        raise ValueError("need at least one collocation point")
    u, ux, ut, uxx = net.input_derivs_batch(params, collocation)
    residual_part, _ = ResidualLoss(collocation, ctx).value_and_seeds(u, ux, ut, uxx)
    data_part = 0.0
    if len(data) > 0:
        pts, targets = _data_arrays(data)
        du, dux, dut, duxx = net.input_derivs_batch(params, pts)
        data_part, _ = DataFitLoss(pts, targets, ctx).value_and_seeds(du, dux, dut, duxx)
    return residual_part + lambda_data * data_part, residual_part, data_part


def _combine(a: MlpParams, b: MlpParams, scale: float) -> MlpParams:
    return MlpParams(
        weights=tuple(wa + scale * wb for wa, wb in zip(a.weights, b.weights)),
        biases=tuple(ba + scale * bb for ba, bb in zip(a.biases, b.biases)),
    )


def train(config: TrainConfig, data: Sequence[HeatPoint], ctx: TransformContext) -> TrainedModel:
    """Run the full training loop; with empty data this is pure-PDE mode."""
    params = net.init_params(config.seed, config.hidden)
    state = net.make_adam_state(params, config.lr, config.beta1, config.beta2, config.epsilon)
    data_pts, data_targets = (None, None)
    if len(data) > 0:
        data_pts, data_targets = _data_arrays(data)
    fixed = collocation_grid(config.domain) if config.collocation_grid else None
    history: list[tuple[int, float, float]] = []
    for epoch in range(1, config.epochs + 1):
        pts = fixed if fixed is not None else sample_collocation(config.domain, epoch)
        try:
            residual_part, grads = net.value_and_param_gradients(params, ResidualLoss(pts, ctx))
            data_part = 0.0
            if data_pts is not None and config.lambda_data > 0.0:
                data_part, data_grads = net.value_and_param_gradients(
                    params, DataFitLoss(data_pts, data_targets, ctx)
                )
                grads = _combine(grads, data_grads, config.lambda_data)
            params, state = net.adam_step(params, grads, state)
        except NonFiniteError as err:
            detail = f"{err}; batch x in [{pts[:, 0].min():.4g}, {pts[:, 0].max():.4g}], " \
                     f"tau in [{pts[:, 1].min():.4g}, {pts[:, 1].max():.4g}]"
            raise TrainingDivergedError(epoch, detail) from err
        if epoch % config.record_every == 0 or epoch == config.epochs:
            history.append((epoch, residual_part, data_part))
    return TrainedModel(params=params, ctx=ctx, domain=config.domain, loss_history=history)


def predict_option_price(model: TrainedModel, spot: float, t: float) -> Prediction:
    """Option price from the trained surface at calendar time t (years from
    the window start); flags predictions outside the collocation x-range."""
    if spot <= 0:
        raise ValueError("spot must be > 0")
    x = to_x(spot, model.ctx)
    tau = to_tau(t, model.ctx)
    u = trial_u(model.params, x, tau, model.ctx)
    price = float(u * price_scale(x, tau, model.ctx))
    extrapolated = not (model.domain.x_min <= x <= model.domain.x_max)
    return Prediction(price=max(price, 0.0), extrapolated=extrapolated)
