"""Physics-regularized velocity predictor: a small MLP trained from scratch.

A depth-to-velocity regression network (hidden sizes 64/128/128, batch norm
after each hidden layer, rectifier activations) trained with mean-square
error plus a stationarity penalty built from each sample's energy-derivative
coefficients.  With the regularization coefficient at zero the loss reduces
to plain MSE (the "vanilla" ablation variant).

Everything is numpy: forward, analytic backprop (including batch-norm batch
statistics), and an adaptive-moment optimizer, so seeded training is
bit-reproducible and gradients can be checked against finite differences.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DivergenceDetected,
    EmptyDataset,
    NonPositiveDepth,
    NonPositiveVelocity,
)

HIDDEN_SIZES = (64, 128, 128)
DEPTH_SCALE = 1.0 / 6.0   # input normalization
V_MIN = 0.5               # output clamp bounds [m/s]
V_MAX = 20.0
BN_EPS = 1e-12


@dataclass
class MlpParams:
    """Network parameters; lists run input-to-output.

    Trainable arrays in documented order: weights w0..w3, biases b0..b3,
    batch-norm scales g0..g2, batch-norm shifts s0..s2.  Running mean and
    variance are inference statistics, not trainable.
    """

    weights: list = field(default_factory=list)
    biases: list = field(default_factory=list)
    bn_gamma: list = field(default_factory=list)
    bn_beta: list = field(default_factory=list)
    bn_mean: list = field(default_factory=list)
    bn_var: list = field(default_factory=list)

    def trainable(self) -> list:
        return [*self.weights, *self.biases, *self.bn_gamma, *self.bn_beta]

    def copy(self) -> "MlpParams":
        return MlpParams(
            [w.copy() for w in self.weights],
            [b.copy() for b in self.biases],
            [g.copy() for g in self.bn_gamma],
            [b.copy() for b in self.bn_beta],
            [m.copy() for m in self.bn_mean],
            [v.copy() for v in self.bn_var],
        )


def init_params(seed: int = 0, hidden_sizes=HIDDEN_SIZES) -> MlpParams:
    """He-initialized parameters; the output layer starts near zero so the
    clamped prediction starts mid-range."""
    rng = np.random.default_rng(seed)
    sizes = [1, *hidden_sizes, 1]
    params = MlpParams()
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        scale = np.sqrt(2.0 / fan_in)
        params.weights.append(rng.normal(0.0, scale, (fan_in, fan_out)))
        params.biases.append(np.zeros(fan_out))
    params.weights[-1] *= 0.1
    for width in hidden_sizes:
        params.bn_gamma.append(np.ones(width))
        params.bn_beta.append(np.zeros(width))
        params.bn_mean.append(np.zeros(width))
        params.bn_var.append(np.ones(width))
    return params


def _sigmoid(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _forward(params: MlpParams, depths: np.ndarray, mode: str):
    """Forward pass; returns predictions and the caches backprop needs."""
    if mode not in ("train", "infer"):
        raise ValueError(f"unknown mode {mode!r}")
    x = (depths * DEPTH_SCALE).reshape(-1, 1)
    caches = []
    h = x
    n_hidden = len(params.bn_gamma)
    for i in range(n_hidden):
        a = h @ params.weights[i] + params.biases[i]
        if mode == "train":
            mu = a.mean(axis=0)
            var = a.var(axis=0)
        else:
            mu = params.bn_mean[i]
            var = params.bn_var[i]
        inv = 1.0 / np.sqrt(var + BN_EPS)
        xhat = (a - mu) * inv
        y = params.bn_gamma[i] * xhat + params.bn_beta[i]
        out = np.maximum(y, 0.0)
        caches.append({"h": h, "xhat": xhat, "inv": inv, "y": y,
                       "mu": mu, "var": var})
        h = out
    z = h @ params.weights[-1] + params.biases[-1]
    s = _sigmoid(z)
    v = V_MIN + (V_MAX - V_MIN) * s
    caches.append({"h": h, "s": s})
    return v.ravel(), caches


def mlp_forward(params: MlpParams, depth, mode: str = "infer"):
    """Predicted velocity [m/s] for one depth or an array of depths.

    Deterministic in infer mode (running statistics); the output is clamped
    smoothly onto [V_MIN, V_MAX].
    """
    depths = np.atleast_1d(np.asarray(depth, dtype=float))
    if np.any(depths <= 0):
        raise NonPositiveDepth("depth must be positive")
    v, _ = _forward(params, depths, mode)
    return float(v[0]) if np.isscalar(depth) or np.ndim(depth) == 0 else v


def _sample_arrays(samples):
    if len(samples) == 0:
        raise EmptyDataset("no training samples")
    depths = np.array([s.depth for s in samples])
    targets = np.array([s.v_star for s in samples])
    constraints = np.array([s.constraint for s in samples])
    return depths, targets, constraints


def physics_term(constraints: np.ndarray, velocities: np.ndarray) -> float:
    """Stationarity penalty: sum_i sum_j j * k_ij * v_i^(j-1)."""
    j = np.arange(1, 6)
    powers = velocities[:, None] ** (j - 1)
    return float(np.sum(j * constraints * powers))


def loss_terms(
    predictions: np.ndarray,
    samples,
    lam: float,
    physics_at_prediction: bool = False,
) -> tuple[float, float, float]:
    """(mse, physics, total) for given predictions; pure arithmetic."""
    _, targets, constraints = _sample_arrays(samples)
    predictions = np.asarray(predictions, dtype=float)
    mse = float(np.mean((targets - predictions) ** 2))
    at = predictions if physics_at_prediction else targets
    phys = physics_term(constraints, at)
    return mse, phys, mse + lam * phys


def pgnn_loss(
    params: MlpParams,
    samples,
    lam: float,
    mode: str = "train",
    physics_at_prediction: bool = False,
) -> float:
    """Mean-square velocity error plus lam times the stationarity penalty.

    By default the penalty is evaluated at each sample's ground-truth
    velocity (the dataset's per-row constraint); set
    ``physics_at_prediction`` to penalize the network's own output instead.
    """
    depths, _, _ = _sample_arrays(samples)
    v, _ = _forward(params, depths, mode)
    return loss_terms(v, samples, lam, physics_at_prediction)[2]


def pgnn_loss_grads(
    params: MlpParams,
    samples,
    lam: float,
    mode: str = "train",
    physics_at_prediction: bool = False,
):
    """Loss and analytic gradients for every trainable array.

    Returns (loss, grads, batch_stats) with grads ordered like
    params.trainable() and batch_stats the per-layer (mean, var) pairs seen
    during the pass (used to update running statistics).
    """
    depths, targets, constraints = _sample_arrays(samples)
    n = len(depths)
    v, caches = _forward(params, depths, mode)
    mse = float(np.mean((targets - v) ** 2))
    at = v if physics_at_prediction else targets
    phys = physics_term(constraints, at)
    loss = mse + lam * phys

    dv = 2.0 * (v - targets) / n
    if physics_at_prediction:
        j = np.arange(1, 6)
        dphys = np.sum(j * (j - 1) * constraints * v[:, None] ** (j - 2), axis=1)
        dv = dv + lam * dphys

    out_cache = caches[-1]
    s = out_cache["s"].ravel()
    dz = (dv * (V_MAX - V_MIN) * s * (1.0 - s)).reshape(-1, 1)

    n_hidden = len(params.bn_gamma)
    grads_w = [None] * len(params.weights)
    grads_b = [None] * len(params.biases)
    grads_g = [None] * n_hidden
    grads_s = [None] * n_hidden

    grads_w[-1] = out_cache["h"].T @ dz
    grads_b[-1] = dz.sum(axis=0)
    dh = dz @ params.weights[-1].T

    for i in range(n_hidden - 1, -1, -1):
        cache = caches[i]
        dy = dh * (cache["y"] > 0)
        grads_g[i] = (dy * cache["xhat"]).sum(axis=0)
        grads_s[i] = dy.sum(axis=0)
        dxhat = dy * params.bn_gamma[i]
        if mode == "train":
            da = cache["inv"] * (
                dxhat
                - dxhat.mean(axis=0)
                - cache["xhat"] * (dxhat * cache["xhat"]).mean(axis=0)
            )
        else:
            da = dxhat * cache["inv"]
        grads_w[i] = cache["h"].T @ da
        grads_b[i] = da.sum(axis=0)
        dh = da @ params.weights[i].T

    grads = [*grads_w, *grads_b, *grads_g, *grads_s]
    batch_stats = [(caches[i]["mu"], caches[i]["var"]) for i in range(n_hidden)]
    return loss, grads, batch_stats


@dataclass(frozen=True)
class TrainConfig:
    """Training hyperparameters; the defaults train the physics-regularized
    variant and lam=0 gives the vanilla ablation."""

    lam: float = 1e-4
    epochs: int = 2000
    learning_rate: float = 1e-3
    batch_size: int | None = None  # None -> full dataset
    seed: int = 0
    physics_at_prediction: bool = False
    bn_momentum: float = 0.9

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError("lam must be >= 0")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")


def train_pgnn(samples, config: TrainConfig = TrainConfig()):
    """Train the network with adaptive-moment gradient descent.

    Full-batch by default; seeded and bit-reproducible.  Returns the trained
    parameters and the loss history as (epoch, mse, physics, total) rows.
    Raises DivergenceDetected when the loss becomes non-finite.
    """
    if len(samples) < 8:
        raise EmptyDataset(f"need >= 8 training samples, got {len(samples)}")
    params = init_params(config.seed)
    rng = np.random.default_rng(config.seed + 1)
    n = len(samples)
    batch = n if config.batch_size is None else min(config.batch_size, n)

    beta1, beta2, eps = 0.9, 0.999, 1e-8
    m_state = [np.zeros_like(a) for a in params.trainable()]
    v_state = [np.zeros_like(a) for a in params.trainable()]
    step = 0
    history = []

    for epoch in range(config.epochs):
        order = np.arange(n) if batch == n else rng.permutation(n)
        for start in range(0, n, batch):
            chunk = [samples[i] for i in order[start:start + batch]]
            loss, grads, batch_stats = pgnn_loss_grads(
                params, chunk, config.lam, "train", config.physics_at_prediction
            )
            if not np.isfinite(loss):
                raise DivergenceDetected(f"loss became {loss} at epoch {epoch}")
            step += 1
            arrays = params.trainable()
            for k, (arr, grad) in enumerate(zip(arrays, grads)):
                m_state[k] = beta1 * m_state[k] + (1 - beta1) * grad
                v_state[k] = beta2 * v_state[k] + (1 - beta2) * grad**2
                m_hat = m_state[k] / (1 - beta1**step)
                v_hat = v_state[k] / (1 - beta2**step)
                arr -= config.learning_rate * m_hat / (np.sqrt(v_hat) + eps)
            mom = config.bn_momentum
            for i, (mu, var) in enumerate(batch_stats):
                params.bn_mean[i] = mom * params.bn_mean[i] + (1 - mom) * mu
                params.bn_var[i] = mom * params.bn_var[i] + (1 - mom) * var

        preds, _ = _forward(params, np.array([s.depth for s in samples]), "infer")
        mse, phys, total = loss_terms(
            preds, samples, config.lam, config.physics_at_prediction
        )
        history.append((epoch, mse, phys, total))

    return params, history


@dataclass(frozen=True)
class PgnnOutput:
    """Network prediction for one depth plus the derived flight time."""

    v_pred: float
    t_traj: float
    depth: float


def trajectory_time(v_pred: float, depth: float) -> float:
    """Planned flight duration: depth / predicted velocity."""
    if v_pred <= 0:
        raise NonPositiveVelocity(f"v_pred {v_pred} is not positive")
    if depth <= 0:
        raise NonPositiveDepth(f"depth {depth} is not positive")
    return depth / v_pred


def predict(params: MlpParams, depth: float) -> PgnnOutput:
    """Inference-mode prediction bundled with its trajectory time."""
    v = mlp_forward(params, float(depth), "infer")
    return PgnnOutput(v, trajectory_time(v, float(depth)), float(depth))


def save_params(params: MlpParams, path) -> None:
    """Persist parameters as a flat npz: w0..w3, b0..b3, g0..g2, s0..s2,
    rm0..rm2 (running means), rv0..rv2 (running variances)."""
    arrays = {}
    for i, w in enumerate(params.weights):
        arrays[f"w{i}"] = w
    for i, b in enumerate(params.biases):
        arrays[f"b{i}"] = b
    for i, g in enumerate(params.bn_gamma):
        arrays[f"g{i}"] = g
    for i, s in enumerate(params.bn_beta):
        arrays[f"s{i}"] = s
    for i, m in enumerate(params.bn_mean):
        arrays[f"rm{i}"] = m
    for i, v in enumerate(params.bn_var):
        arrays[f"rv{i}"] = v
    np.savez(path, **arrays)


def load_params(path) -> MlpParams:
    """Load parameters written by save_params."""
    data = np.load(path)
    n_layers = sum(1 for k in data.files if k.startswith("w"))
    n_hidden = sum(1 for k in data.files if k.startswith("g"))
    return MlpParams(
        [data[f"w{i}"] for i in range(n_layers)],
        [data[f"b{i}"] for i in range(n_layers)],
        [data[f"g{i}"] for i in range(n_hidden)],
        [data[f"s{i}"] for i in range(n_hidden)],
        [data[f"rm{i}"] for i in range(n_hidden)],
        [data[f"rv{i}"] for i in range(n_hidden)],
    )


def write_loss_curve_csv(history, path) -> None:
    """Export the loss history as CSV: epoch,mse,physics_term,total."""
    with open(path, "w") as fh:
        fh.write("epoch,mse,physics_term,total\n")
        for epoch, mse, phys, total in history:
            fh.write(f"{epoch},{mse:.12e},{phys:.12e},{total:.12e}\n")
