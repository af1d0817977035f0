"""Small tanh multilayer perceptron with exact input derivatives and exact
parameter gradients, plus a bias-corrected Adam optimizer.

The network maps (x, tau) to a scalar. Alongside the value, the forward pass
propagates du/dx, du/dtau and d2u/dx2 through every layer in closed form
(tanh' = 1 - tanh^2, tanh'' = -2 tanh tanh'), so the heat-operator residual
is built from machine-precision derivatives rather than finite differences.
Parameter gradients of any scalar loss of those four outputs are obtained by
reverse accumulation through the same extended pass.

Checkpoint layout (version 1): a single ASCII header line

    heatcall-mlp 1 arch=<w0-w1-...-wn-tanh> seed=<int> steps=<int> context=<hex>\n

followed by the raw little-endian float64 bytes of every layer's weight
matrix (row-major) then bias vector, in layer order.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Protocol, Sequence

import numpy as np

DEFAULT_HIDDEN = (32, 32)


class NonFiniteError(RuntimeError):
    """A non-finite value appeared during a loss/gradient evaluation."""

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


@dataclass(frozen=True)
class MlpParams:
    """Weights and biases, one entry per layer; also used as the container
    for gradients and optimizer moments (identical shapes)."""

    weights: tuple[np.ndarray, ...]
    biases: tuple[np.ndarray, ...]

    def __post_init__(self):
        if len(self.weights) != len(self.biases) or len(self.weights) < 2:
            raise ValueError("need matching weights/biases for at least two layers")
        prev = self.weights[0].shape[1]
        for w, b in zip(self.weights, self.biases):
            if w.ndim != 2 or b.ndim != 1 or w.shape[0] != b.shape[0] or w.shape[1] != prev:
                raise ValueError("inconsistent layer shapes")
            prev = w.shape[0]
        if self.weights[0].shape[1] != 2 or self.weights[-1].shape[0] != 1:
            raise ValueError("network must map 2 inputs to 1 output")

    @property
    def widths(self) -> tuple[int, ...]:
        return (2,) + tuple(w.shape[0] for w in self.weights)

    @property
    def arch_tag(self) -> str:
        return "-".join(str(n) for n in self.widths) + "-tanh"

    def flat_arrays(self) -> list[np.ndarray]:
        """Arrays in checkpoint order: w1, b1, w2, b2, ..."""
        out = []
        for w, b in zip(self.weights, self.biases):
            out.append(w)
            out.append(b)
        return out

    def all_finite(self) -> bool:
        return all(np.all(np.isfinite(a)) for a in self.flat_arrays())


def init_params(seed: int, hidden: Sequence[int] = DEFAULT_HIDDEN) -> MlpParams:
    """Glorot-uniform weights, zero biases; the seed fixes every entry."""
    widths = (2, *hidden, 1)
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for fan_in, fan_out in zip(widths[:-1], widths[1:]):
        limit = math.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-limit, limit, size=(fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
    return MlpParams(weights=tuple(weights), biases=tuple(biases))


def _extended_forward(params: MlpParams, pts: np.ndarray):
    """Propagate value and input derivatives through every layer.

    pts has shape (n, 2) with columns (x, tau). Returns the four output
    arrays plus the per-layer caches the reverse pass needs.
    """
    n = pts.shape[0]
    h = pts
    hx = np.broadcast_to(np.array([1.0, 0.0]), (n, 2))
    ht = np.broadcast_to(np.array([0.0, 1.0]), (n, 2))
    hxx = np.zeros((n, 2))
    caches = []
    for w, b in zip(params.weights[:-1], params.biases[:-1]):
        a_x = hx @ w.T
        a_t = ht @ w.T
        a_xx = hxx @ w.T
        s = np.tanh(h @ w.T + b)
        phi = 1.0 - s * s
        caches.append((h, hx, ht, hxx, s, phi, a_x, a_t, a_xx))
        h = s
        hx = phi * a_x
        ht = phi * a_t
        hxx = phi * a_xx - 2.0 * s * phi * a_x * a_x
    w_out = params.weights[-1][0]
    b_out = params.biases[-1][0]
    caches.append((h, hx, ht, hxx))
    u = h @ w_out + b_out
    return u, hx @ w_out, ht @ w_out, hxx @ w_out, caches


def _reverse(params: MlpParams, caches, seed_u, seed_ux, seed_ut, seed_uxx) -> MlpParams:
    """Accumulate d(sum of seeded outputs)/d(params) back through the caches."""
    n_layers = len(params.weights)
    g_w = [None] * n_layers
    g_b = [None] * n_layers
    h, hx, ht, hxx = caches[-1]
    w_out = params.weights[-1][0]
    g_w[-1] = (h.T @ seed_u + hx.T @ seed_ux + ht.T @ seed_ut + hxx.T @ seed_uxx)[None, :]
    g_b[-1] = np.array([seed_u.sum()])
    cb = seed_u[:, None] * w_out
    cbx = seed_ux[:, None] * w_out
    cbt = seed_ut[:, None] * w_out
    cbxx = seed_uxx[:, None] * w_out
    for layer in range(n_layers - 2, -1, -1):
        h, hx, ht, hxx, s, phi, a_x, a_t, a_xx = caches[layer]
        d2 = -2.0 * s * phi                  # tanh''
        d3 = phi * (6.0 * s * s - 2.0)       # tanh'''
        ca = cb * phi + cbx * d2 * a_x + cbt * d2 * a_t + cbxx * (d3 * a_x * a_x + d2 * a_xx)
        cax = cbx * phi + cbxx * 2.0 * d2 * a_x
        cat = cbt * phi
        caxx = cbxx * phi
        w = params.weights[layer]
        g_w[layer] = ca.T @ h + cax.T @ hx + cat.T @ ht + caxx.T @ hxx
        g_b[layer] = ca.sum(axis=0)
        if layer > 0:
            cb, cbx, cbt, cbxx = ca @ w, cax @ w, cat @ w, caxx @ w
    return MlpParams(weights=tuple(g_w), biases=tuple(g_b))


def forward_batch(params: MlpParams, pts: np.ndarray) -> np.ndarray:
    """Network values at an (n, 2) array of (x, tau) points."""
    h = np.asarray(pts, dtype=float)
    for w, b in zip(params.weights[:-1], params.biases[:-1]):
        h = np.tanh(h @ w.T + b)
    return h @ params.weights[-1][0] + params.biases[-1][0]


def forward(params: MlpParams, x: float, tau: float) -> float:
    """Scalar network value."""
    if not (math.isfinite(x) and math.isfinite(tau)):
        raise ValueError("inputs must be finite")
    return float(forward_batch(params, np.array([[x, tau]]))[0])


def input_derivs_batch(params: MlpParams, pts: np.ndarray):
    """Values plus du/dx, du/dtau, d2u/dx2 at an (n, 2) array of points."""
    u, ux, ut, uxx, _ = _extended_forward(params, np.asarray(pts, dtype=float))
    return u, ux, ut, uxx


def forward_with_input_derivs(params: MlpParams, x: float, tau: float):
    """Scalar value and its exact first/second input derivatives."""
    if not (math.isfinite(x) and math.isfinite(tau)):
        raise ValueError("inputs must be finite")
    u, ux, ut, uxx = input_derivs_batch(params, np.array([[x, tau]]))
    return float(u[0]), float(ux[0]), float(ut[0]), float(uxx[0])


class BatchLoss(Protocol):
    """A scalar loss over network outputs at a fixed batch of points.

    value_and_seeds receives the four output arrays at `points` and returns
    the loss value together with its partial derivatives with respect to each
    output array (None for an output the loss ignores).
    """

    points: np.ndarray

    def value_and_seeds(self, u, ux, ut, uxx): ...


def value_and_param_gradients(params: MlpParams, loss: BatchLoss) -> tuple[float, MlpParams]:
    """Loss value and exact gradients with respect to every parameter."""
    pts = np.asarray(loss.points, dtype=float)
    u, ux, ut, uxx, caches = _extended_forward(params, pts)
    for arr in (u, ux, ut, uxx):
        bad = ~np.isfinite(arr)
        if bad.any():
            i = int(np.argmax(bad))
            raise NonFiniteError(
                f"non-finite network output at point (x={pts[i, 0]}, tau={pts[i, 1]})",
                point=(float(pts[i, 0]), float(pts[i, 1])),
            )
    value, seeds = loss.value_and_seeds(u, ux, ut, uxx)
    if not math.isfinite(value):
        raise NonFiniteError("non-finite loss value", point=None)
    zeros = np.zeros(len(pts))
    su, sx, st, sxx = (zeros if s is None else np.asarray(s, dtype=float) for s in seeds)
    return float(value), _reverse(params, caches, su, sx, st, sxx)


def param_gradients(params: MlpParams, loss: BatchLoss) -> MlpParams:
    """Gradient of a batch loss with respect to every parameter."""
    return value_and_param_gradients(params, loss)[1]


@dataclass(frozen=True)
class AdamState:
    """First/second moment accumulators plus the step counter."""

    m: MlpParams
    v: MlpParams
    step: int
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8


def make_adam_state(params: MlpParams, lr=1e-3, beta1=0.9, beta2=0.999, epsilon=1e-8) -> AdamState:
    zeros = MlpParams(
        weights=tuple(np.zeros_like(w) for w in params.weights),
        biases=tuple(np.zeros_like(b) for b in params.biases),
    )
    zeros2 = MlpParams(
        weights=tuple(np.zeros_like(w) for w in params.weights),
        biases=tuple(np.zeros_like(b) for b in params.biases),
    )
    return AdamState(m=zeros, v=zeros2, step=0, lr=lr, beta1=beta1, beta2=beta2, epsilon=epsilon)


def adam_step(params: MlpParams, grads: MlpParams, state: AdamState) -> tuple[MlpParams, AdamState]:
    """One bias-corrected Adam update; rejects non-finite gradients up front."""
    if not grads.all_finite():
        raise NonFiniteError("non-finite gradient; parameters left unchanged")
    t = state.step + 1
    c1 = 1.0 - state.beta1**t
    c2 = 1.0 - state.beta2**t

    def update(p, g, m, v):
        m_new = state.beta1 * m + (1.0 - state.beta1) * g
        v_new = state.beta2 * v + (1.0 - state.beta2) * g * g
        p_new = p - state.lr * (m_new / c1) / (np.sqrt(v_new / c2) + state.epsilon)
        return p_new, m_new, v_new

    new_w, new_b, m_w, m_b, v_w, v_b = [], [], [], [], [], []
    for p, g, m, v in zip(params.weights, grads.weights, state.m.weights, state.v.weights):
        pn, mn, vn = update(p, g, m, v)
        new_w.append(pn); m_w.append(mn); v_w.append(vn)
    for p, g, m, v in zip(params.biases, grads.biases, state.m.biases, state.v.biases):
        pn, mn, vn = update(p, g, m, v)
        new_b.append(pn); m_b.append(mn); v_b.append(vn)
    new_params = MlpParams(weights=tuple(new_w), biases=tuple(new_b))
    if not new_params.all_finite():
        raise NonFiniteError("update produced non-finite parameters")
    new_state = replace(
        state,
        m=MlpParams(weights=tuple(m_w), biases=tuple(m_b)),
        v=MlpParams(weights=tuple(v_w), biases=tuple(v_b)),
        step=t,
    )
    return new_params, new_state


def save_checkpoint(path, params: MlpParams, seed: int, steps: int, context_hash: str = "0" * 16) -> None:
    header = f"heatcall-mlp 1 arch={params.arch_tag} seed={seed} steps={steps} context={context_hash}\n"
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        for arr in params.flat_arrays():
            fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def load_checkpoint(path) -> tuple[MlpParams, dict]:
    with open(path, "rb") as fh:
        header = fh.readline().decode("ascii").strip()
        blob = fh.read()
    fields = header.split()
    if len(fields) != 6 or fields[0] != "heatcall-mlp" or fields[1] != "1":
        raise ValueError(f"unrecognized checkpoint header: {header!r}")
    meta = dict(item.split("=", 1) for item in fields[2:])
    arch = meta["arch"]
    if not arch.endswith("-tanh"):
        raise ValueError(f"unrecognized architecture tag {arch!r}")
    widths = [int(n) for n in arch[: -len("-tanh")].split("-")]
    flat = np.frombuffer(blob, dtype="<f8")
    expected = sum(wo * wi + wo for wi, wo in zip(widths[:-1], widths[1:]))
    if flat.size != expected:
        raise ValueError(f"checkpoint holds {flat.size} values, expected {expected}")
    weights, biases, pos = [], [], 0
    for fan_in, fan_out in zip(widths[:-1], widths[1:]):
        weights.append(flat[pos : pos + fan_out * fan_in].reshape(fan_out, fan_in).copy())
        pos += fan_out * fan_in
        biases.append(flat[pos : pos + fan_out].copy())
        pos += fan_out
    params = MlpParams(weights=tuple(weights), biases=tuple(biases))
    return params, {"seed": int(meta["seed"]), "steps": int(meta["steps"]), "context": meta["context"], "arch": arch}
