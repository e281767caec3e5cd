"""Proximity-weighted skip-gram with clipped, Gaussian-perturbed SGD."""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit, log_expit

from . import accountant as acct
from .graph import Graph
from .proximity import ProximityMatrix, negative_weights
from .sampler import SubgraphSample, SubgraphSet, draw_negatives, sample_batch

logger = logging.getLogger(__name__)


class NoiseMode(str, enum.Enum):
    NAIVE = "naive"
    NONZERO = "nonzero"
    NONOISE = "nonoise"


class NegWeighting(str, enum.Enum):
    # weights normalised by the proximity mass each center carries as a positive
    THEORETICAL = "theoretical"
    # weights normalised by full proximity row sums
    THEORETICAL_FULL = "theoretical_full"
    UNIFORM = "uniform"


class TrainingError(RuntimeError):
    pass


class BudgetError(ValueError):
    pass


@dataclass
class TrainConfig:
    eta: float = 0.1
    B: int = 128
    C: float = 2.0
    sigma: float = 5.0
    k: int = 5
    r: int = 128
    n_epoch: int = 200
    eps_target: float = 3.5
    delta: float = 1e-5
    sensitivity: float | None = None
    mode: NoiseMode = NoiseMode.NONZERO
    neg_weighting: NegWeighting = NegWeighting.THEORETICAL
    reject_neighbors: bool = True
    both_directions: bool = False
    resample_negatives: bool = False
    strict_accounting: bool = False
    seed: int = 0

    def __post_init__(self):
        self.mode = NoiseMode(self.mode)
        self.neg_weighting = NegWeighting(self.neg_weighting)
        if self.sensitivity is None:
            self.sensitivity = self.C
        checks = {
            "eta > 0": self.eta > 0,
            "C > 0": self.C > 0,
            "sigma >= 0": self.sigma >= 0,
            "B >= 1": self.B >= 1,
            "k >= 1": self.k >= 1,
            "r >= 1": self.r >= 1,
            "n_epoch >= 0": self.n_epoch >= 0,
            "0 < delta < 1": 0 < self.delta < 1,
            "sensitivity >= 0": self.sensitivity >= 0,
        }
        failed = [name for name, ok in checks.items() if not ok]
        if failed:
            raise ValueError("invalid config: " + ", ".join(failed))
        if self.mode is not NoiseMode.NONOISE and self.sigma == 0:
            raise ValueError("sigma must be > 0 for a private mode")

    @property
    def private(self) -> bool:
        return self.mode is not NoiseMode.NONOISE


@dataclass
class EmbeddingModel:
    w_in: np.ndarray
    w_out: np.ndarray

    @classmethod
    def init(cls, num_nodes: int, r: int, rng: np.random.Generator) -> "EmbeddingModel":
        w_in = rng.uniform(-0.5 / r, 0.5 / r, size=(num_nodes, r))
        return cls(w_in, np.zeros((num_nodes, r)))

    def copy(self) -> "EmbeddingModel":
        return EmbeddingModel(self.w_in.copy(), self.w_out.copy())

    @property
    def num_nodes(self) -> int:
        return self.w_in.shape[0]

    @property
    def dim(self) -> int:
        return self.w_in.shape[1]


# ---------------------------------------------------------------------------
# single-sample objective


def _rows(sample: SubgraphSample, model: EmbeddingModel):
    vi = model.w_in[sample.center]
    ctx = np.array((sample.positive, *sample.negatives), dtype=np.int64)
    vc = model.w_out[ctx]
    if not (np.all(np.isfinite(vi)) and np.all(np.isfinite(vc))):
        raise TrainingError("non-finite embedding rows")
    return vi, ctx, vc


def _omega(k: int, w_i: float) -> np.ndarray:
    om = np.full(k + 1, float(w_i))
    om[0] = 1.0
    return om


def loss(sample: SubgraphSample, model: EmbeddingModel, p_ij: float, w_i: float = 1.0) -> float:
    """``-p [log s(v_j.v_i) + w sum_n log s(-v_n.v_i)]``."""
    vi, _, vc = _rows(sample, model)
    x = vc @ vi
    return float(-p_ij * (log_expit(x[0]) + w_i * np.sum(log_expit(-x[1:]))))


def _coefficients(sample, model, p_ij, w_i):
    vi, ctx, vc = _rows(sample, model)
    ind = np.zeros(len(ctx))
    ind[0] = 1.0
    coef = p_ij * _omega(len(ctx) - 1, w_i) * (expit(vc @ vi) - ind)
    return vi, ctx, vc, coef


def grad_center(sample, model, p_ij, w_i=1.0) -> np.ndarray:
    """Gradient of :func:`loss` with respect to the center row of ``w_in``."""
    _, _, vc, coef = _coefficients(sample, model, p_ij, w_i)
    return coef @ vc


def grad_context(sample, model, p_ij, w_i=1.0, which: int = 0) -> np.ndarray:
    """Contribution of term ``which`` (0 = positive, 1..k = negatives) to the ``w_out`` gradient."""
    vi, _, _, coef = _coefficients(sample, model, p_ij, w_i)
    return coef[which] * vi


def clip(g: np.ndarray, C: float) -> np.ndarray:
    """Scale ``g`` to l2 norm at most ``C``; rows are clipped independently for 2-D input."""
    if C <= 0:
        raise ValueError("C must be > 0")
    g = np.asarray(g, dtype=np.float64)
    norm = np.linalg.norm(g, axis=-1, keepdims=True)
    return g / np.maximum(1.0, norm / C)


# ---------------------------------------------------------------------------
# batched update


@dataclass
class UpdateReport:
    touched_in: np.ndarray
    touched_out: np.ndarray
    batch_loss: float


def per_sample_gradients(batch: SubgraphSet, model: EmbeddingModel, p: np.ndarray, w: np.ndarray):
    """Clipped-ready per-sample, per-row gradients for a batch.

    Returns ``(g_in, out_rows, g_out, out_sample, losses)`` where ``g_in[b]``
    is the gradient on ``w_in[centers[b]]`` and ``g_out[u]`` the gradient of
    sample ``out_sample[u]`` on ``w_out[out_rows[u]]``; repeated rows within a
    sample are summed first.
    """
    n = model.num_nodes
    Bn, k = len(batch), batch.k
    vi = model.w_in[batch.centers]
    ctx = np.concatenate([batch.positives[:, None], batch.negatives], axis=1)
    vc = model.w_out[ctx]
    x = np.einsum("bnr,br->bn", vc, vi)
    omega = np.ones((Bn, k + 1))
    omega[:, 1:] = w[:, None]
    ind = np.zeros((Bn, k + 1))
    ind[:, 0] = 1.0
    coef = p[:, None] * omega * (expit(x) - ind)
    losses = -p * (log_expit(x[:, 0]) + w * log_expit(-x[:, 1:]).sum(axis=1))

    g_in = np.einsum("bn,bnr->br", coef, vc)
    terms = coef[:, :, None] * vi[:, None, :]
    keys = (np.arange(Bn)[:, None] * n + ctx).ravel()
    uniq, inv = np.unique(keys, return_inverse=True)
    g_out = np.zeros((uniq.shape[0], model.dim))
    np.add.at(g_out, inv, terms.reshape(-1, model.dim))
    return g_in, uniq % n, g_out, uniq // n, losses


def batch_update(
    model: EmbeddingModel,
    batch: SubgraphSet,
    P: ProximityMatrix,
    config: TrainConfig,
    weights: np.ndarray,
    rng: np.random.Generator | None = None,
) -> UpdateReport:
    """One noisy SGD step on ``model`` (in place).

    ``weights`` holds the per-center negative weight. Clipped per-sample
    per-row gradients are summed, perturbed according to ``config.mode``,
    divided by the batch size and applied with step ``eta``.
    """
    p = P.values[batch.centers, batch.positives]
    w = weights[batch.centers]
    g_in, out_rows, g_out, _, losses = per_sample_gradients(batch, model, p, w)
    g_in = clip(g_in, config.C)
    g_out = clip(g_out, config.C)

    acc_in = np.zeros_like(model.w_in)
    acc_out = np.zeros_like(model.w_out)
    np.add.at(acc_in, batch.centers, g_in)
    np.add.at(acc_out, out_rows, g_out)

    touched_in = np.unique(batch.centers)
    touched_out = np.unique(out_rows)
    std = config.sensitivity * config.sigma
    if config.mode is NoiseMode.NAIVE:
        if rng is None:
            raise ValueError("a noise generator is required for private modes")
        acc_in += rng.normal(0.0, std, size=acc_in.shape)
        acc_out += rng.normal(0.0, std, size=acc_out.shape)
        rows_in = rows_out = slice(None)
    else:
        if config.mode is NoiseMode.NONZERO:
            if rng is None:
                raise ValueError("a noise generator is required for private modes")
            acc_in[touched_in] += rng.normal(0.0, std, size=(touched_in.size, model.dim))
            acc_out[touched_out] += rng.normal(0.0, std, size=(touched_out.size, model.dim))
        rows_in, rows_out = touched_in, touched_out

    new_in = model.w_in[rows_in] - config.eta * acc_in[rows_in] / len(batch)
    new_out = model.w_out[rows_out] - config.eta * acc_out[rows_out] / len(batch)
    if not (np.all(np.isfinite(new_in)) and np.all(np.isfinite(new_out))):
        raise TrainingError("non-finite parameters after update")
    model.w_in[rows_in] = new_in
    model.w_out[rows_out] = new_out
    return UpdateReport(touched_in, touched_out, float(losses.mean()))


# ---------------------------------------------------------------------------
# training loop


@dataclass
class RunReport:
    epochs: int
    eps: float
    delta_hat: float
    alpha: int | None
    gamma: float
    sensitivity: float
    sigma: float
    stopped_early: bool
    loss_trace: list[float] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "epochs": self.epochs,
            "eps": self.eps,
            "delta_hat": self.delta_hat,
            "alpha": self.alpha,
            "gamma": self.gamma,
            "sensitivity": self.sensitivity,
            "sigma": self.sigma,
            "stopped_early": self.stopped_early,
        }


def center_weights(P: ProximityMatrix, samples: SubgraphSet, config: TrainConfig) -> np.ndarray:
    if config.neg_weighting is NegWeighting.UNIFORM:
        return np.ones(P.num_nodes)
    if config.neg_weighting is NegWeighting.THEORETICAL_FULL:
        return negative_weights(P)
    return negative_weights(P, samples.centers, samples.positives)


def compositions_per_epoch(config: TrainConfig) -> int:
    return 2 if config.strict_accounting else 1


def make_run_accountant(config: TrainConfig, num_samples: int) -> acct.AccountantState:
    B = min(config.B, num_samples)
    return acct.make_accountant(B / num_samples, config.sensitivity, config.sigma)


def epochs_until_stop(config: TrainConfig, num_samples: int) -> int:
    """Epoch at which the stopping rule fires, capped at ``n_epoch``."""
    state = make_run_accountant(config, num_samples)
    per = compositions_per_epoch(config)
    for e in range(1, config.n_epoch + 1):
        state = acct.compose(state, per)
        if acct.delta_spent(state, config.eps_target) >= config.delta:
            return e
    return config.n_epoch


def train(
    g: Graph,
    P: ProximityMatrix,
    samples: SubgraphSet,
    config: TrainConfig,
    model: EmbeddingModel | None = None,
) -> tuple[EmbeddingModel, RunReport]:
    """Run the private training loop with accountant-driven stopping.

    After every epoch the accountant composes one subsampled Gaussian
    release (two with ``strict_accounting``) and training stops as soon as
    the spent delta at ``eps_target`` reaches ``delta``.
    """
    if P.num_nodes != g.num_nodes:
        raise ValueError("proximity and graph sizes differ")
    if len(samples) == 0:
        raise ValueError("no training samples")
    B = min(config.B, len(samples))
    init_ss, batch_ss, noise_ss, neg_ss = np.random.SeedSequence(config.seed).spawn(4)
    batch_rng = np.random.default_rng(batch_ss)
    noise_rng = np.random.default_rng(noise_ss)
    neg_rng = np.random.default_rng(neg_ss)
    if model is None:
        model = EmbeddingModel.init(g.num_nodes, config.r, np.random.default_rng(init_ss))
    elif model.w_in.shape != (g.num_nodes, config.r):
        raise ValueError("model shape does not match graph and r")

    weights = center_weights(P, samples, config)
    state = None
    if config.private:
        if not config.eps_target > 0:
            raise BudgetError("eps_target must be > 0")
        state = make_run_accountant(config, len(samples))
        if acct.delta_spent(state, config.eps_target) >= config.delta:
            raise BudgetError("privacy budget exhausted before the first epoch")
    per = compositions_per_epoch(config)

    trace: list[float] = []
    stopped = False
    epoch = 0
    delta_hat = 0.0
    while epoch < config.n_epoch:
        idx, _ = sample_batch(len(samples), B, batch_rng)
        batch = samples.take(idx)
        if config.resample_negatives:
            negs = draw_negatives(g, batch.centers, samples.k, neg_rng, reject=config.reject_neighbors)
            batch = batch.with_negatives(negs)
        report = batch_update(model, batch, P, config, weights, noise_rng)
        trace.append(report.batch_loss)
        epoch += 1
        if state is not None:
            state = acct.compose(state, per)
            delta_hat = acct.delta_spent(state, config.eps_target)
            if delta_hat >= config.delta:
                stopped = True
                logger.info("privacy budget reached after %d epochs", epoch)
                break

    if state is not None:
        eps, alpha = acct.to_dp(state, config.delta)
    else:
        eps, alpha, delta_hat = math.inf, None, 1.0
    return model, RunReport(
        epochs=epoch,
        eps=eps,
        delta_hat=delta_hat,
        alpha=alpha,
        gamma=B / len(samples),
        sensitivity=float(config.sensitivity),
        sigma=config.sigma,
        stopped_early=stopped,
        loss_trace=trace,
    )
