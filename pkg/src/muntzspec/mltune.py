"""Learned exponent tuner: a small feedforward network mapping the
fractional order mu to the basis exponent scale lambda, trained with the
solver in the loop, plus a per-order optimized cubic-spline baseline.

The loss of a sample (mu, nu) is the nodal solution error of the solve at
the predicted lambda divided by the error of the classical lambda = 1 solve
for the same sample; the denominator is lambda-independent and cached with
the dataset.  The gradient with respect to lambda is a central finite
difference (two extra small solves), chained into analytic backpropagation
through the network.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from scipy.special import expit

from .assembly import ManufacturedProblem
from .errors import (
    NumericalFailure,
    ParameterDomainError,
    StructuralError,
    TrainingFailure,
)
from .quadrature import gauss_jacobi, gauss_jacobi_unit
from .solver1d import SolverConfig, evaluate_grid, solve_1d

logger = logging.getLogger(__name__)

__all__ = [
    "AdamState",
    "Dataset",
    "Network",
    "SolverContext",
    "SplineModel",
    "TrainResult",
    "TrainingConfig",
    "adam_step",
    "backprop",
    "batch_loss",
    "cawr_lr",
    "forward",
    "forward_batch",
    "generate_dataset",
    "init_network",
    "load_dataset",
    "load_model",
    "load_spline",
    "sample_error",
    "sample_ratio",
    "save_dataset",
    "save_model",
    "save_spline",
    "spline_fit",
    "spline_predict",
    "train",
]

MODEL_SCHEMA_VERSION = 1


# ---------------------------------------------------------------------------
# Configuration


@dataclass(frozen=True)
class TrainingConfig:
    """Training hyperparameters; defaults are the full-scale settings."""

    n_mu: int = 30
    n_nu: int = 30
    batch_size: int = 100
    epochs: int = 400
    restarts: int = 10
    lr_base: float = 1.0e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1.0e-8
    t0: int = 50
    t_mult: int = 2
    lr_min: float = 1.0e-6
    fd_step: float = 1.0e-4
    clamp_lo: float = 0.02
    clamp_hi: float = 0.999
    seed: int = 0
    hidden_layers: int = 2
    hidden_width: int = 20
    negative_slope: float = 0.01
    workers: int = 1

    def __post_init__(self) -> None:
        if min(self.n_mu, self.n_nu, self.batch_size, self.epochs, self.restarts) < 1:
            raise ParameterDomainError("grid counts, batch size, epochs and restarts must be positive")
        if min(self.hidden_layers, self.hidden_width) < 1:
            raise ParameterDomainError("network needs at least one hidden layer and unit")
        if not 0.0 < self.lr_min <= self.lr_base:
            raise ParameterDomainError("learning rates must satisfy 0 < lr_min <= lr_base")
        if self.t0 < 1 or self.t_mult < 1:
            raise ParameterDomainError("scheduler cycle constants must be positive")
        if not 0.0 < self.fd_step < 0.01:
            raise ParameterDomainError("finite-difference step must lie in (0, 0.01)")
        if not 0.01 + self.fd_step <= self.clamp_lo < self.clamp_hi <= 1.0 - self.fd_step:
            raise ParameterDomainError(
                "lambda clamp must leave room for the finite-difference stencil "
                "inside the solver domain"
            )
        if self.workers < 1:
            raise ParameterDomainError("worker count must be positive")

    @property
    def layer_sizes(self) -> tuple[int, ...]:
        return (1,) + (self.hidden_width,) * self.hidden_layers + (1,)


# ---------------------------------------------------------------------------
# Network


@dataclass
class Network:
    """Fully connected scalar-to-scalar network with Leaky ReLU hidden
    activations and a sigmoid output."""

    layer_sizes: tuple[int, ...]
    negative_slope: float
    weights: list[np.ndarray]
    biases: list[np.ndarray]

    def __post_init__(self) -> None:
        sizes = tuple(int(s) for s in self.layer_sizes)
        if len(sizes) < 3 or sizes[0] != 1 or sizes[-1] != 1:
            raise StructuralError(f"layer sizes must map scalar to scalar, got {sizes}")
        if len(self.weights) != len(sizes) - 1 or len(self.biases) != len(sizes) - 1:
            raise StructuralError("one weight matrix and bias vector per layer transition")
        for l, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.shape != (sizes[l + 1], sizes[l]) or b.shape != (sizes[l + 1],):
                raise StructuralError(
                    f"layer {l} shapes {w.shape}/{b.shape} inconsistent with sizes {sizes}"
                )
        object.__setattr__(self, "layer_sizes", sizes)


def init_network(
    layer_sizes: Sequence[int], negative_slope: float, rng: np.random.Generator
) -> Network:
    """Uniform init in +-sqrt(1/fan_in), weights then bias per layer."""
    weights, biases = [], []
    for fan_in, fan_out in zip(layer_sizes[:-1], layer_sizes[1:]):
        bound = math.sqrt(1.0 / fan_in)
        weights.append(rng.uniform(-bound, bound, size=(fan_out, fan_in)))
        biases.append(rng.uniform(-bound, bound, size=fan_out))
    return Network(tuple(layer_sizes), negative_slope, weights, biases)


def _forward_pass(net: Network, mu: np.ndarray):
    """Forward over a batch (columns = samples); returns activations and
    pre-activations per layer for the backward pass."""
    acts = [np.asarray(mu, dtype=float).reshape(1, -1)]
    pres = []
    last = len(net.weights) - 1
    for l, (w, b) in enumerate(zip(net.weights, net.biases)):
        z = w @ acts[-1] + b[:, None]
        pres.append(z)
        if l == last:
            # clip keeps the output strictly inside (0,1) even when the
            # sigmoid saturates to a representable 0 or 1
            acts.append(np.clip(expit(z), 1e-12, 1.0 - 1e-12))
        else:
            acts.append(np.where(z > 0.0, z, net.negative_slope * z))
    return acts, pres


def forward_batch(net: Network, mu: np.ndarray) -> np.ndarray:
    """Network outputs in (0,1) for a vector of orders."""
    mu = np.asarray(mu, dtype=float)
    acts, _ = _forward_pass(net, mu.reshape(1, -1))
    return acts[-1].reshape(mu.shape if mu.ndim else ())


def forward(net: Network, mu: float) -> float:
    """Scalar wrapper over forward_batch."""
    return float(forward_batch(net, np.array([float(mu)]))[0])


def backprop(net: Network, mu: np.ndarray, upstream: np.ndarray):
    """Gradients of sum_i upstream_i * output_i w.r.t. weights and biases.

    The Leaky ReLU subgradient at zero takes the negative-slope branch.
    """
    mu = np.asarray(mu, dtype=float).reshape(1, -1)
    upstream = np.asarray(upstream, dtype=float).reshape(1, -1)
    if mu.shape[1] != upstream.shape[1]:
        raise StructuralError("one upstream value per sample")
    acts, pres = _forward_pass(net, mu)
    out = acts[-1]
    delta = upstream * out * (1.0 - out)
    grads_w = [np.empty(0)] * len(net.weights)
    grads_b = [np.empty(0)] * len(net.biases)
    for l in range(len(net.weights) - 1, -1, -1):
        grads_w[l] = delta @ acts[l].T
        grads_b[l] = delta.sum(axis=1)
        if l > 0:
            delta = net.weights[l].T @ delta
            delta = delta * np.where(pres[l - 1] > 0.0, 1.0, net.negative_slope)
    return grads_w, grads_b


@dataclass
class AdamState:
    """First/second moment accumulators and the step counter."""

    m_w: list[np.ndarray]
    v_w: list[np.ndarray]
    m_b: list[np.ndarray]
    v_b: list[np.ndarray]
    t: int = 0

    @classmethod
    def for_network(cls, net: Network) -> "AdamState":
        return cls(
            [np.zeros_like(w) for w in net.weights],
            [np.zeros_like(w) for w in net.weights],
            [np.zeros_like(b) for b in net.biases],
            [np.zeros_like(b) for b in net.biases],
        )


def adam_step(
    state: AdamState,
    net: Network,
    grads_w: list[np.ndarray],
    grads_b: list[np.ndarray],
    lr: float,
    config: TrainingConfig,
) -> None:
    """Standard bias-corrected Adam update, in place."""
    state.t += 1
    b1, b2, eps = config.beta1, config.beta2, config.eps
    c1 = 1.0 - b1**state.t
    c2 = 1.0 - b2**state.t
    for params, grads, ms, vs in (
        (net.weights, grads_w, state.m_w, state.v_w),
        (net.biases, grads_b, state.m_b, state.v_b),
    ):
        for p, g, m, v in zip(params, grads, ms, vs):
            m *= b1
            m += (1.0 - b1) * g
            v *= b2
            v += (1.0 - b2) * g * g
            p -= lr * (m / c1) / (np.sqrt(v / c2) + eps)


def cawr_lr(epoch: int, config: TrainingConfig) -> float:
    """Cosine-annealing learning rate with warm restarts.

    Cycle lengths are t0, t0*t_mult, ...; a cycle spans positions 0..T
    inclusive, so a cycle start returns lr_base and a cycle end lr_min.
    """
    if epoch < 1:
        raise ParameterDomainError(f"epoch counts from 1, got {epoch}")
    e = epoch - 1
    t = config.t0
    while e > t:
        e -= t + 1
        t *= config.t_mult
    return config.lr_min + (config.lr_base - config.lr_min) * 0.5 * (
        1.0 + math.cos(math.pi * e / t)
    )


# ---------------------------------------------------------------------------
# Solver-in-the-loop loss


@dataclass(frozen=True)
class SolverContext:
    """Equation family and discretization used inside the loss.

    The manufactured family is u = t^nu sin(pi x) with unit diffusion and
    convection on the unit time interval; sizes follow the training setup
    (11 temporal members, 19 spatial modes).
    """

    m_space: int = 20
    n_time: int = 10
    kappa: float = 1.0
    rho: float = 1.0
    t_end: float = 1.0

    def solver_config(self, mu: float, lam: float) -> SolverConfig:
        return SolverConfig(
            mu=mu,
            lam=lam,
            kappa=self.kappa,
            rho=self.rho,
            m_space=self.m_space,
            n_time=self.n_time,
            t_end=self.t_end,
        )


def _error_grid(context: SolverContext, lam: float):
    """Spatial Gauss-Legendre nodes x temporal mass-rule nodes at this lam."""
    xs = gauss_jacobi(0.0, 0.0, context.m_space - 1).nodes
    ts = gauss_jacobi_unit(0.0, 1.0 + 1.0 / lam, context.n_time + 1).nodes ** (1.0 / lam)
    return xs, ts * context.t_end


def sample_error(context: SolverContext, mu: float, nu: float, lam: float) -> float:
    """Frobenius norm of the nodal solution error for one (mu, nu) at lam."""
    problem = ManufacturedProblem(
        mu=mu, nu=nu, kappa=context.kappa, rho=context.rho, t_end=context.t_end
    )
    solution = solve_1d(context.solver_config(mu, lam), problem)
    xs, ts = _error_grid(context, lam)
    approx = evaluate_grid(solution, xs, ts)
    exact = problem.exact(xs[None, :], ts[:, None])
    return float(np.linalg.norm(approx - exact))


def sample_ratio(
    context: SolverContext, mu: float, nu: float, lam: float, ref_error: float
) -> float:
    """Normalized sample error: solve error at lam over the cached lam = 1
    reference error."""
    if ref_error <= 0.0:
        raise StructuralError(f"reference error must be positive, got {ref_error}")
    return sample_error(context, mu, nu, lam) / ref_error


# ---------------------------------------------------------------------------
# Datasets


@dataclass(frozen=True)
class Dataset:
    """Flattened tensorial (mu, nu) samples with cached reference errors."""

    kind: str
    mu: np.ndarray
    nu: np.ndarray
    ref_error: np.ndarray
    seed: int | None
    n_mu: int
    n_nu: int

    def __post_init__(self) -> None:
        if self.kind not in ("training", "validation"):
            raise StructuralError(f"dataset kind must be training or validation, got {self.kind}")
        n = self.n_mu * self.n_nu
        if not (self.mu.shape == self.nu.shape == self.ref_error.shape == (n,)):
            raise StructuralError("sample arrays must be flat with tensorial length")
        for name, arr in (("mu", self.mu), ("nu", self.nu)):
            if np.any(arr <= 0.0) or np.any(arr >= 1.0):
                raise StructuralError(f"{name} samples must lie strictly inside (0, 1)")

    @property
    def size(self) -> int:
        return self.mu.size


def _interior_uniform(rng: np.random.Generator, count: int) -> np.ndarray:
    """Uniform draws strictly inside (0, 1); exact zeros are redrawn."""
    draws = rng.uniform(0.0, 1.0, size=count)
    while np.any(draws == 0.0):
        draws[draws == 0.0] = rng.uniform(0.0, 1.0, size=int(np.sum(draws == 0.0)))
    return draws


def generate_dataset(
    kind: str,
    n_mu: int,
    n_nu: int,
    seed: int | None = None,
    context: SolverContext | None = None,
) -> Dataset:
    """Tensorial sampling: random axes for training, uniform interior grids
    for validation; reference errors are solved at creation."""
    if n_mu < 1 or n_nu < 1:
        raise ParameterDomainError("grid counts must be positive")
    context = context or SolverContext()
    if kind == "training":
        rng = np.random.default_rng(seed)
        mu_axis = _interior_uniform(rng, n_mu)
        nu_axis = _interior_uniform(rng, n_nu)
    elif kind == "validation":
        mu_axis = np.arange(1, n_mu + 1) / (n_mu + 1)
        nu_axis = np.arange(1, n_nu + 1) / (n_nu + 1)
    else:
        raise ParameterDomainError(f"dataset kind must be training or validation, got {kind}")
    mu = np.repeat(mu_axis, n_nu)
    nu = np.tile(nu_axis, n_mu)
    ref = np.array([sample_error(context, m, n, 1.0) for m, n in zip(mu, nu)])
    for arr in (mu, nu, ref):
        arr.flags.writeable = False
    return Dataset(kind, mu, nu, ref, seed, n_mu, n_nu)


def save_dataset(dataset: Dataset, path: str) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        handle.write("mu,nu,ref_error\n")
        for m, n, r in zip(dataset.mu, dataset.nu, dataset.ref_error):
            handle.write(f"{m:.17g},{n:.17g},{r:.17g}\n")


def load_dataset(path: str, kind: str, n_mu: int, n_nu: int, seed: int | None = None) -> Dataset:
    rows = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if rows.shape[1] != 3:
        raise StructuralError(f"dataset file must have three columns, found {rows.shape[1]}")
    mu, nu, ref = rows[:, 0].copy(), rows[:, 1].copy(), rows[:, 2].copy()
    for arr in (mu, nu, ref):
        arr.flags.writeable = False
    return Dataset(kind, mu, nu, ref, seed, n_mu, n_nu)


# ---------------------------------------------------------------------------
# Batch loss and training


def _clamp_lambda(lam: np.ndarray, config: TrainingConfig) -> np.ndarray:
    return np.clip(lam, config.clamp_lo, config.clamp_hi)


def _safe_ratio(context, mu, nu, lam, ref):
    try:
        return sample_ratio(context, mu, nu, lam, ref)
    except (NumericalFailure, ParameterDomainError) as exc:
        logger.warning("sample (mu=%.6g, nu=%.6g, lam=%.6g) excluded: %s", mu, nu, lam, exc)
        return None


def batch_loss(
    net: Network,
    mu: np.ndarray,
    nu: np.ndarray,
    ref_error: np.ndarray,
    context: SolverContext,
    config: TrainingConfig,
    lambda_override: float | None = None,
):
    """Mean normalized error over the batch.

    With lambda_override the network is bypassed and every sample solves at
    the given lambda with no clamping (so an override of 1 reproduces the
    cached reference solves and the loss is exactly 1).  Returns (loss,
    lambdas used, per-sample ratios with NaN marking excluded samples).
    """
    mu = np.asarray(mu, dtype=float)
    nu = np.asarray(nu, dtype=float)
    ref_error = np.asarray(ref_error, dtype=float)
    if lambda_override is None:
        lams = _clamp_lambda(forward_batch(net, mu), config)
    else:
        lams = np.full(mu.shape, float(lambda_override))
    ratios = np.full(mu.shape, np.nan)
    for i in range(mu.size):
        ratio = _safe_ratio(context, mu[i], nu[i], lams[i], ref_error[i])
        if ratio is not None:
            ratios[i] = ratio
    ok = ~np.isnan(ratios)
    if not np.any(ok):
        raise NumericalFailure("every sample in the batch failed to solve")
    return float(np.mean(ratios[ok])), lams, ratios


def _loss_and_gradient(
    net: Network,
    mu: np.ndarray,
    nu: np.ndarray,
    ref_error: np.ndarray,
    context: SolverContext,
    config: TrainingConfig,
):
    """Batch loss plus its gradient w.r.t. network parameters.

    dLoss/dlambda_i comes from a central finite difference (two extra
    solves); the clamp passes the gradient straight through.
    """
    raw = forward_batch(net, mu)
    lams = _clamp_lambda(raw, config)
    h = config.fd_step
    ratios = np.full(mu.shape, np.nan)
    dratio = np.zeros(mu.shape)
    for i in range(mu.size):
        center = _safe_ratio(context, mu[i], nu[i], lams[i], ref_error[i])
        if center is None:
            continue
        plus = _safe_ratio(context, mu[i], nu[i], lams[i] + h, ref_error[i])
        minus = _safe_ratio(context, mu[i], nu[i], lams[i] - h, ref_error[i])
        if plus is None or minus is None:
            logger.warning(
                "sample (mu=%.6g, nu=%.6g) excluded: perturbed solve failed", mu[i], nu[i]
            )
            continue
        ratios[i] = center
        dratio[i] = (plus - minus) / (2.0 * h)
    ok = ~np.isnan(ratios)
    if not np.any(ok):
        raise NumericalFailure("every sample in the batch failed to solve")
    n_ok = int(np.sum(ok))
    upstream = np.where(ok, dratio, 0.0) / n_ok
    grads_w, grads_b = backprop(net, mu, upstream)
    return float(np.mean(ratios[ok])), grads_w, grads_b


@dataclass(frozen=True)
class TrainResult:
    """Best network over all restarts plus the full loss history.

    history rows are (restart, epoch, train_loss, val_loss).
    """

    network: Network
    best_restart: int
    final_train_loss: float
    final_val_loss: float
    history: np.ndarray


def _run_restart(args) -> tuple[Network, float, float, np.ndarray]:
    config, train_ds, val_ds, context, restart = args
    rng = np.random.default_rng((config.seed, restart))
    net = init_network(config.layer_sizes, config.negative_slope, rng)
    state = AdamState.for_network(net)
    n_batches = train_ds.size // config.batch_size
    history = np.empty((config.epochs, 4))
    train_loss = val_loss = math.nan
    for epoch in range(1, config.epochs + 1):
        lr = cawr_lr(epoch, config)
        perm = rng.permutation(train_ds.size)
        batch_losses = []
        for b in range(n_batches):
            idx = perm[b * config.batch_size : (b + 1) * config.batch_size]
            loss, grads_w, grads_b = _loss_and_gradient(
                net, train_ds.mu[idx], train_ds.nu[idx], train_ds.ref_error[idx],
                context, config,
            )
            adam_step(state, net, grads_w, grads_b, lr, config)
            batch_losses.append(loss)
        train_loss = float(np.mean(batch_losses))
        val_loss, _, _ = batch_loss(
            net, val_ds.mu, val_ds.nu, val_ds.ref_error, context, config
        )
        history[epoch - 1] = (restart, epoch, train_loss, val_loss)
    return net, train_loss, val_loss, history


def train(
    config: TrainingConfig,
    train_ds: Dataset,
    val_ds: Dataset,
    context: SolverContext | None = None,
) -> TrainResult:
    """Multi-restart training; returns the restart with the smallest final
    validation loss."""
    context = context or SolverContext()
    if train_ds.size % config.batch_size != 0:
        raise ParameterDomainError(
            f"batch size {config.batch_size} must divide the training size {train_ds.size}"
        )
    jobs = [(config, train_ds, val_ds, context, r) for r in range(config.restarts)]
    if config.workers > 1:
        import multiprocessing

        with multiprocessing.get_context("fork").Pool(config.workers) as pool:
            outcomes = pool.map(_run_restart, jobs)
    else:
        outcomes = [_run_restart(job) for job in jobs]
    history = np.vstack([out[3] for out in outcomes])
    finals = np.array([out[2] for out in outcomes])
    best = int(np.argmin(finals))
    if not np.any(finals <= 1.0):
        raise TrainingFailure(
            f"all {config.restarts} restarts ended with validation loss above 1 "
            f"(best {finals[best]:.3e})"
        )
    net, train_loss, val_loss, _ = outcomes[best]
    return TrainResult(net, best, train_loss, val_loss, history)


# ---------------------------------------------------------------------------
# Model persistence


def save_model(net: Network, path: str, metadata: dict | None = None) -> None:
    doc = {
        "schema_version": MODEL_SCHEMA_VERSION,
        "layer_sizes": list(net.layer_sizes),
        "negative_slope": net.negative_slope,
        "weights": [w.tolist() for w in net.weights],
        "biases": [b.tolist() for b in net.biases],
        "metadata": metadata or {},
    }
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(doc, handle, indent=1)
        handle.write("\n")


def load_model(path: str) -> tuple[Network, dict]:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            doc = json.load(handle)
    except json.JSONDecodeError as exc:
        raise StructuralError(f"model file {path} is not valid: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("schema_version") != MODEL_SCHEMA_VERSION:
        raise StructuralError(
            f"model file {path} has unsupported schema {doc.get('schema_version')!r}"
        )
    try:
        sizes = tuple(int(s) for s in doc["layer_sizes"])
        weights = [np.asarray(w, dtype=float) for w in doc["weights"]]
        biases = [np.asarray(b, dtype=float) for b in doc["biases"]]
        slope = float(doc["negative_slope"])
    except (KeyError, TypeError, ValueError) as exc:
        raise StructuralError(f"model file {path} is missing or corrupt: {exc}") from exc
    net = Network(sizes, slope, weights, biases)
    metadata = doc.get("metadata", {})
    return net, metadata


# ---------------------------------------------------------------------------
# Spline baseline


@dataclass(frozen=True)
class SplineModel:
    """Natural cubic spline through per-order optimized exponents."""

    mu_knots: np.ndarray
    lambda_knots: np.ndarray
    boundary_flags: np.ndarray

    def __post_init__(self) -> None:
        if self.mu_knots.ndim != 1 or self.mu_knots.size < 2:
            raise StructuralError("spline needs at least two knots")
        if self.mu_knots.shape != self.lambda_knots.shape or (
            self.mu_knots.shape != self.boundary_flags.shape
        ):
            raise StructuralError("knot arrays must share one shape")
        if np.any(np.diff(self.mu_knots) <= 0.0):
            raise StructuralError("knot orders must be strictly ascending")


def _profile_loss(context, mu, nus, refs, lam):
    """Mean normalized error over the nu-profile at one (mu, lam)."""
    ratios = []
    for nu, ref in zip(nus, refs):
        ratio = _safe_ratio(context, mu, nu, lam, ref)
        if ratio is not None:
            ratios.append(ratio)
    if not ratios:
        raise NumericalFailure(f"every profile solve failed at mu={mu:.6g}")
    return float(np.mean(ratios))


def _scalar_adam_lambda(
    context: SolverContext,
    config: TrainingConfig,
    mu: float,
    nus: np.ndarray,
    refs: np.ndarray,
    lo: float,
    hi: float,
    iterations: int,
) -> tuple[float, bool]:
    """Per-order scalar Adam descent on the profile loss, central-difference
    gradient, early stop after 30 consecutive improvements below 1e-8."""
    lam = 0.5
    m = v = 0.0
    h = config.fd_step
    lr = config.lr_base
    best = math.inf
    small_improvements = 0
    for it in range(1, iterations + 1):
        plus = _profile_loss(context, mu, nus, refs, min(lam + h, 1.0))
        minus = _profile_loss(context, mu, nus, refs, lam - h)
        grad = (plus - minus) / (2.0 * h)
        m = config.beta1 * m + (1.0 - config.beta1) * grad
        v = config.beta2 * v + (1.0 - config.beta2) * grad * grad
        mhat = m / (1.0 - config.beta1**it)
        vhat = v / (1.0 - config.beta2**it)
        lam = float(np.clip(lam - lr * mhat / (math.sqrt(vhat) + config.eps), lo, hi))
        current = 0.5 * (plus + minus)
        if best - current < 1e-8:
            small_improvements += 1
            if small_improvements >= 30:
                break
        else:
            small_improvements = 0
        best = min(best, current)
    at_boundary = lam <= lo + 1e-12 or lam >= hi - 1e-12
    return lam, at_boundary


def spline_fit(
    context: SolverContext | None = None,
    config: TrainingConfig | None = None,
    n_knots: int = 30,
    n_nu: int = 30,
    iterations: int = 400,
) -> SplineModel:
    """Optimize lambda per uniform mu knot over a uniform nu profile, then
    interpolate with a natural cubic spline.

    The nominal lambda domain [0.001, 0.999] is clipped to [0.011, 0.999] so
    the finite-difference stencil stays inside the solver's conditioning
    floor; knots that finish on the clipped boundary carry a flag.
    """
    context = context or SolverContext()
    config = config or TrainingConfig()
    if n_knots < 2:
        raise ParameterDomainError("spline needs at least two knots")
    mu_knots = np.arange(1, n_knots + 1) / (n_knots + 1)
    nus = np.arange(1, n_nu + 1) / (n_nu + 1)
    lo = 0.01 + config.fd_step
    hi = 0.999
    lams = np.empty(n_knots)
    flags = np.zeros(n_knots, dtype=bool)
    for i, mu in enumerate(mu_knots):
        refs = np.array([sample_error(context, mu, nu, 1.0) for nu in nus])
        lams[i], flags[i] = _scalar_adam_lambda(
            context, config, mu, nus, refs, lo, hi, iterations
        )
        if flags[i]:
            logger.warning("knot mu=%.4f finished on the lambda boundary (%.4f)", mu, lams[i])
    for arr in (mu_knots, lams, flags):
        arr.flags.writeable = False
    return SplineModel(mu_knots, lams, flags)


def spline_predict(model: SplineModel, mu) -> np.ndarray | float:
    """Spline value with queries clamped to the knot range."""
    from scipy.interpolate import CubicSpline

    spline = CubicSpline(model.mu_knots, model.lambda_knots, bc_type="natural")
    arr = np.clip(np.asarray(mu, dtype=float), model.mu_knots[0], model.mu_knots[-1])
    out = spline(arr)
    return out if np.ndim(mu) else float(out)


def save_spline(model: SplineModel, path: str) -> None:
    doc = {
        "schema_version": MODEL_SCHEMA_VERSION,
        "boundary_condition": "natural",
        "knots": [
            {"mu": float(m), "lambda": float(l), "at_boundary": bool(f)}
            for m, l, f in zip(model.mu_knots, model.lambda_knots, model.boundary_flags)
        ],
    }
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(doc, handle, indent=1)
        handle.write("\n")


def load_spline(path: str) -> SplineModel:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            doc = json.load(handle)
    except json.JSONDecodeError as exc:
        raise StructuralError(f"spline file {path} is not valid: {exc}") from exc
    if doc.get("schema_version") != MODEL_SCHEMA_VERSION or doc.get("boundary_condition") != "natural":
        raise StructuralError(f"spline file {path} has an unsupported layout")
    try:
        knots = doc["knots"]
        mu = np.array([k["mu"] for k in knots], dtype=float)
        lam = np.array([k["lambda"] for k in knots], dtype=float)
        flags = np.array([bool(k["at_boundary"]) for k in knots])
    except (KeyError, TypeError, ValueError) as exc:
        raise StructuralError(f"spline file {path} is missing or corrupt: {exc}") from exc
    for arr in (mu, lam, flags):
        arr.flags.writeable = False
    return SplineModel(mu, lam, flags)
