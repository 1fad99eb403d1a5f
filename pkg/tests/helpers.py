"""Shared test oracles: finite differences, quadrature, brute-force AUC."""

from __future__ import annotations

import numpy as np

from anodens.model import GAUSSIAN_MIXTURE, build_masks, init_params
from anodens.objective import LabeledBatch, ObjectiveConfig, objective_value

FD_STEP = 1e-5
FD_RTOL = 1e-4


def tiny_params(head=GAUSSIAN_MIXTURE, seed=0, n_attributes=3, n_hidden=5,
                n_components=2, n_orderings=2, n_masks=2, noise=0.3):
    """Small randomized model: Glorot init plus Gaussian jitter on every array."""
    rng = np.random.default_rng(seed)
    masks = build_masks(n_attributes, n_hidden, n_orderings, n_masks, seed=seed)
    params = init_params(masks, head=head, n_components=n_components, seed=seed + 1)
    if noise:
        for arr in params.trainable().values():
            arr += rng.normal(scale=noise, size=arr.shape)
    return params


def random_batch(head, seed, n_attributes=3, n_normals=4, n_anomalies=2):
    rng = np.random.default_rng(seed)
    shape_n = (n_normals, n_attributes)
    shape_a = (n_anomalies, n_attributes)
    if head == GAUSSIAN_MIXTURE:
        return LabeledBatch(rng.uniform(size=shape_n), rng.uniform(size=shape_a))
    return LabeledBatch(
        (rng.uniform(size=shape_n) > 0.5).astype(float),
        (rng.uniform(size=shape_a) > 0.5).astype(float),
    )


def fd_gradient(params, batch, cfg: ObjectiveConfig, h: float = FD_STEP):
    """Central finite differences of the objective over every parameter."""
    out = {}
    for name, arr in params.trainable().items():
        flat = arr.ravel()
        grad = np.empty(flat.size)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + h
            up = objective_value(params, batch, cfg)
            flat[i] = orig - h
            down = objective_value(params, batch, cfg)
            flat[i] = orig
            grad[i] = (up - down) / (2.0 * h)
        out[name] = grad.reshape(arr.shape)
    return out


def max_rel_err(analytic, numeric, objective_scale, h=FD_STEP, rtol=FD_RTOL):
    """Max relative gradient error, floored at the certifiable FD resolution.

    Roundoff on each objective evaluation is ~eps * |f|, so the central
    quotient carries ~2 eps |f| / (2h) of noise; coordinates below
    noise / rtol can only be compared absolutely.
    """
    floor = 2.0 * np.finfo(float).eps * max(1.0, abs(objective_scale)) / (h * rtol)
    worst = 0.0
    for name in analytic:
        a = analytic[name].ravel()
        n = numeric[name].ravel()
        denom = np.maximum(np.maximum(np.abs(a), np.abs(n)), floor)
        worst = max(worst, float((np.abs(a - n) / denom).max()))
    return worst


def auc_double_loop(anomaly_scores, normal_scores):
    """Literal pairwise indicator sum with 0.5 credit for ties."""
    total = 0.0
    for a in anomaly_scores:
        for n in normal_scores:
            if a > n:
                total += 1.0
            elif a == n:
                total += 0.5
    return total / (len(anomaly_scores) * len(normal_scores))


def mixture_pdf(weights, means, sigmas, grid):
    comps = np.exp(-0.5 * ((grid[:, None] - means[None, :]) / sigmas[None, :]) ** 2)
    comps /= sigmas[None, :] * np.sqrt(2.0 * np.pi)
    return comps @ weights


def trapezoid_mixture_mass(weights, means, variances, n_points=10001, tail=8.0):
    """Trapezoid quadrature of a 1-D Gaussian mixture over its +-tail support."""
    sigmas = np.sqrt(variances)
    lo = means.min() - tail * sigmas.max()
    hi = means.max() + tail * sigmas.max()
    grid = np.linspace(lo, hi, n_points)
    pdf = mixture_pdf(weights, means, sigmas, grid)
    return float(np.trapezoid(pdf, grid))


def gaussian_logpdf(x, mean, variance):
    return -0.5 * (np.log(2.0 * np.pi * variance) + (x - mean) ** 2 / variance)
