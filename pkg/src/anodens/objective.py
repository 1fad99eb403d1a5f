"""Training objective: normal-data log-likelihood plus a pairwise ranking regularizer.

The regularizer averages sigmoid(log p(normal) - log p(anomaly)) over all
(anomaly, normal) pairs, a differentiable surrogate for the probability that
a random anomaly scores above a random normal.  The objective is maximized.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import MadeParams, backprop_log_density, forward_ensemble


@dataclass
class ObjectiveConfig:
    lam: float = 0.0  # weight of the ranking regularizer, >= 0

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError("regularizer weight must be non-negative")


@dataclass
class LabeledBatch:
    normals: np.ndarray  # (n_normals, D), non-empty
    anomalies: np.ndarray = field(default_factory=lambda: np.empty((0, 0)))

    def __post_init__(self):
        self.normals = np.atleast_2d(np.asarray(self.normals, dtype=np.float64))
        self.anomalies = np.atleast_2d(np.asarray(self.anomalies, dtype=np.float64))
        if self.normals.shape[0] == 0:
            raise ValueError("batch needs at least one normal instance")
        if self.anomalies.size and self.anomalies.shape[1] != self.normals.shape[1]:
            raise ValueError("normals and anomalies must share the attribute dimension")

    @property
    def n_anomalies(self) -> int:
        return self.anomalies.shape[0] if self.anomalies.size else 0


def sigmoid(s):
    """1 / (1 + exp(-s)), overflow-safe for arbitrarily large |s|."""
    arr = np.asarray(s, dtype=np.float64)
    out = np.empty_like(arr)
    pos = arr >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-arr[pos]))
    es = np.exp(arr[~pos])
    out[~pos] = es / (1.0 + es)
    return out if arr.ndim else float(out)


def normal_loglik(params: MadeParams, normals: np.ndarray) -> float:
    """Mean log-density of the given normal instances."""
    normals = np.atleast_2d(np.asarray(normals, dtype=np.float64))
    if normals.shape[0] == 0:
        raise ValueError("need at least one normal instance")
    return float(forward_ensemble(params, normals).log_density.mean())


def pairwise_regularizer(
    logdens_normals: np.ndarray, logdens_anomalies: np.ndarray, transfer=sigmoid
) -> float:
    """Mean transfer(log-density gap) over all (anomaly, normal) pairs.

    Depends only on differences of log-densities, so it is invariant to
    shifting every value by a constant.  `transfer` defaults to the sigmoid;
    substituting the step indicator recovers the exact pairwise ranking rate.
    """
    ld_n = np.asarray(logdens_normals, dtype=np.float64)
    ld_a = np.asarray(logdens_anomalies, dtype=np.float64)
    if ld_n.size == 0 or ld_a.size == 0:
        raise ValueError("need at least one normal and one anomaly log-density")
    gaps = ld_n[None, :] - ld_a[:, None]
    return float(np.mean(transfer(gaps)))


def auc_regularizer(
    params: MadeParams, anomalies: np.ndarray, normals: np.ndarray, transfer=sigmoid
) -> float:
    """Model-level ranking regularizer over labeled anomaly/normal instances."""
    anomalies = np.atleast_2d(np.asarray(anomalies, dtype=np.float64))
    normals = np.atleast_2d(np.asarray(normals, dtype=np.float64))
    if anomalies.shape[0] == 0 or normals.shape[0] == 0:
        raise ValueError("regularizer needs both anomalies and normals")
    ld_a = forward_ensemble(params, anomalies).log_density
    ld_n = forward_ensemble(params, normals).log_density
    return pairwise_regularizer(ld_n, ld_a, transfer)


def _objective_with_optional_gradient(params, batch, cfg, want_gradient):
    lam = cfg.lam
    n_norm = batch.normals.shape[0]
    n_anom = batch.n_anomalies

    if lam == 0.0 or n_anom == 0:
        # pure maximum-likelihood path: anomaly rows are never touched
        cache = forward_ensemble(params, batch.normals)
        value = float(cache.log_density.mean())
        if not want_gradient:
            return value, None
        coeff = np.full(n_norm, 1.0 / n_norm)
        return value, backprop_log_density(params, cache, coeff)

    stacked = np.vstack([batch.normals, batch.anomalies])
    cache = forward_ensemble(params, stacked)
    ld_normals = cache.log_density[:n_norm]
    ld_anoms = cache.log_density[n_norm:]
    loglik = float(ld_normals.mean())
    gaps = ld_normals[None, :] - ld_anoms[:, None]  # (n_anom, n_norm)
    sig = sigmoid(gaps)
    value = loglik + lam * float(sig.mean())
    if not want_gradient:
        return value, None
    pair_weight = lam / (n_anom * n_norm)
    slope = sig * (1.0 - sig)
    coeff = np.concatenate(
        [1.0 / n_norm + pair_weight * slope.sum(axis=0), -pair_weight * slope.sum(axis=1)]
    )
    return value, backprop_log_density(params, cache, coeff)


def objective_value(params: MadeParams, batch: LabeledBatch, cfg: ObjectiveConfig) -> float:
    """normal_loglik + lam * regularizer; reduces to the likelihood alone when
    lam is zero or the batch holds no anomalies."""
    value, _ = _objective_with_optional_gradient(params, batch, cfg, want_gradient=False)
    return value


def gradient(params: MadeParams, batch: LabeledBatch, cfg: ObjectiveConfig) -> dict[str, np.ndarray]:
    """Exact reverse-mode gradient of objective_value w.r.t. every weight and bias."""
    _, grads = _objective_with_optional_gradient(params, batch, cfg, want_gradient=True)
    return grads


def objective_and_gradient(
    params: MadeParams, batch: LabeledBatch, cfg: ObjectiveConfig
) -> tuple[float, dict[str, np.ndarray]]:
    """One fused forward/backward pass returning (value, gradient)."""
    return _objective_with_optional_gradient(params, batch, cfg, want_gradient=True)
