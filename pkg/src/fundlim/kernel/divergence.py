"""Conditional log-densities and per-step KL divergences between kernels.

A *history* is a pair ``(ys, us)`` holding y_1..y_{t-1} and u_1..u_{t-1};
the kernel it conditions is the law of Y_t.  ``us`` may be ``None`` (all
inputs zero).  An empty history addresses the initial law of Y_1, which is
shared by every model in a comparison.
"""
from __future__ import annotations

import math

import numpy as np

from fundlim.kernel import models as M
from fundlim.kernel.sampling import simulate
from fundlim.seeding import mean_and_se, trial_seeds

LOG_2PI = math.log(2.0 * math.pi)


class AbsoluteContinuityError(ValueError):
    """The reference law assigns zero mass where the other law does not."""


def _split_history(model: M.SystemModel, history):
    ys, us = history if isinstance(history, tuple) else (history, None)
    if model.kind == M.TABULAR:
        ys = np.asarray(ys, dtype=np.int64).reshape(-1)
        us = np.zeros(len(ys), dtype=np.int64) if us is None else np.asarray(us, dtype=np.int64).reshape(-1)
    else:
        n = model.output_dim
        ys = np.asarray(ys, dtype=float).reshape(-1, n)
        us = np.zeros_like(ys) if us is None else np.asarray(us, dtype=float).reshape(-1, n)
    if len(us) != len(ys):
        raise ValueError("history must hold as many inputs as outputs")
    return ys, us


def next_output_law(model: M.SystemModel, history):
    """Parameters of the law of the next output: a pmf (tabular) or (mean, variance)."""
    ys, us = _split_history(model, history)
    if model.kind == M.TABULAR:
        if len(ys) == 0:
            return model.initial_probs
        return model.transition_table[ys[-1], us[-1]]
    if len(ys) == 0:
        return np.zeros(model.output_dim), model.initial_variance
    return model.next_mean(ys[-1], us[-1]), model.noise_variance


def conditional_log_density(model: M.SystemModel, y_next, history) -> float:
    law = next_output_law(model, history)
    if model.kind == M.TABULAR:
        y = int(y_next)
        if not 0 <= y < model.alphabet_size:
            raise ValueError(f"output symbol {y} outside alphabet of size {model.alphabet_size}")
        p = law[y]
        return math.log(p) if p > 0 else -math.inf
    mean, var = law
    if var == 0:
        raise ValueError("the initial law is a point mass and has no density")
    y = np.asarray(y_next, dtype=float).reshape(mean.shape)
    n = mean.size
    return float(-0.5 * (n * (LOG_2PI + math.log(var)) + ((y - mean) ** 2).sum() / var))


def gaussian_kl(mean_p, mean_q, var_p, var_q=None) -> np.ndarray:
    """KL(N(m_p, var_p I) || N(m_q, var_q I)) row-wise over the last axis."""
    mean_p = np.asarray(mean_p, dtype=float)
    diff = mean_p - np.asarray(mean_q, dtype=float)
    sq = (diff * diff).sum(-1)
    if var_q is None or var_q == var_p:
        return sq / (2.0 * var_p)
    n = mean_p.shape[-1]
    r = var_p / var_q
    return 0.5 * n * (r - 1.0 - math.log(r)) + sq / (2.0 * var_q)


def categorical_kl(p, q) -> np.ndarray:
    """Row-wise sum p log(p/q), with 0 log 0 = 0.  Raises unless p << q."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if np.any((p > 0) & (q <= 0)):
        raise AbsoluteContinuityError("reference pmf vanishes where the other pmf is positive")
    pos = p > 0
    terms = np.where(pos, p * (np.log(np.where(pos, p, 1.0)) - np.log(np.where(pos, q, 1.0))), 0.0)
    return terms.sum(-1)


def _check_pair(p: M.SystemModel, q: M.SystemModel) -> None:
    if p.kind != q.kind:
        raise ValueError(f"cannot compare a {p.kind} model with a {q.kind} model")
    if p.is_gaussian:
        if p.noise_variance != q.noise_variance:
            raise ValueError("Gaussian models in a comparison must share the noise variance")
        if p.output_dim != q.output_dim:
            raise M.DimensionError("output dimensions differ")
    elif p.transition_table.shape != q.transition_table.shape:
        raise M.DimensionError("tabular alphabets differ")


def kernel_divergence(model_p: M.SystemModel, model_q: M.SystemModel, history) -> float:
    """KL between the two next-output laws given the same history."""
    _check_pair(model_p, model_q)
    lp = next_output_law(model_p, history)
    lq = next_output_law(model_q, history)
    if model_p.kind == M.TABULAR:
        return float(categorical_kl(lp, lq))
    (mp, vp), (mq, vq) = lp, lq
    if vp == 0 or vq == 0:
        if vp != vq:
            raise AbsoluteContinuityError("initial laws differ")
        return 0.0
    return float(gaussian_kl(mp, mq, vp))


def step_divergences(model_p: M.SystemModel, model_q: M.SystemModel, batch) -> np.ndarray:
    """Per-trial, per-transition KL(P_p || P_q) along sampled trajectories.

    Column k is the divergence of the kernels producing Y_{k+2} given the
    realized (Y_{k+1}, U_{k+1}).
    """
    _check_pair(model_p, model_q)
    if model_p.kind == M.TABULAR:
        ys, us = batch.outputs[:, :-1], batch.inputs
        return categorical_kl(model_p.transition_table[ys, us], model_q.transition_table[ys, us])
    ys, us = batch.outputs[:, :-1], batch.inputs
    return gaussian_kl(model_p.next_mean(ys, us), model_q.next_mean(ys, us), model_p.noise_variance)


def expected_divergence(
    model_p: M.SystemModel,
    model_q: M.SystemModel,
    controller: M.ControllerPolicy,
    step: int,
    trials: int,
    seed: int,
    workers: int = 1,
):
    """Monte-Carlo E D(P_{p,t} || P_{q,t}) over histories drawn from (p, controller).

    Returns ``(estimate, std_error)``.  Step t = 1 is the shared initial law.
    """
    if trials < 2:
        raise ValueError("trials must be >= 2")
    if step < 1:
        raise ValueError("step must be >= 1")
    _check_pair(model_p, model_q)
    if step == 1:
        return 0.0, 0.0
    batch = simulate(model_p, controller, step - 1, trial_seeds(seed, trials), workers)
    vals = step_divergences(model_p, model_q, batch)[:, step - 2]
    est, se = mean_and_se(vals)
    return float(est), float(se)
