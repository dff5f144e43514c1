"""Exact enumeration of tabular interconnections.

Histories are enumerated as integer arrays ``ys`` (P, n_out) and ``us``
(P, n_in); histories the controller can never produce are dropped.
"""
from __future__ import annotations

import itertools

import numpy as np

from fundlim.kernel import models as M
from fundlim.kernel.sampling import TrajectoryBatch, check_compatible

PATH_BUDGET = 10**6


class EnumerationBudgetError(ValueError):
    pass


def _check_family(models) -> tuple:
    models = tuple(models)
    if not models or any(m.kind != M.TABULAR for m in models):
        raise TypeError("exact enumeration needs tabular models")
    shape = models[0].transition_table.shape
    if any(m.transition_table.shape != shape for m in models):
        raise M.DimensionError("tabular models must share alphabets")
    return models


def input_probabilities(controller: M.ControllerPolicy, ys: np.ndarray, us: np.ndarray) -> np.ndarray:
    """Probability that the controller emits ``us`` given outputs ``ys`` (first len(us) used)."""
    n_in = us.shape[1]
    if controller.kind == M.ZERO:
        return np.all(us == 0, axis=1).astype(float)
    if controller.kind == M.OPEN_LOOP:
        seq = np.asarray(controller.input_sequence[:n_in])
        return np.all(us == seq, axis=1).astype(float)
    if controller.kind == M.TABULAR_POLICY:
        p = np.ones(len(us))
        for k in range(n_in):
            p = p * controller.policy_table[ys[:, k], us[:, k]]
        return p
    raise TypeError(f"controller {controller.kind} cannot drive a tabular model")


def enumerate_histories(models, controller: M.ControllerPolicy, n_out: int, n_in: int, budget_factor: int = 1):
    """All (y_1..y_{n_out}, u_1..u_{n_in}) with positive controller probability.

    Returns ``ys, us, ctrl_prob``.
    """
    models = _check_family(models)
    S, Ua = models[0].alphabet_size, models[0].input_alphabet_size
    total = S**n_out * Ua**n_in
    if total * budget_factor > PATH_BUDGET:
        raise EnumerationBudgetError(
            f"{total} histories x {budget_factor} models exceeds the budget of {PATH_BUDGET}"
        )
    grid = np.array(list(itertools.product(range(S), repeat=n_out)), dtype=np.int64).reshape(-1, n_out)
    ugrid = np.array(list(itertools.product(range(Ua), repeat=n_in)), dtype=np.int64).reshape(-1, n_in)
    ys = np.repeat(grid, len(ugrid), axis=0)
    us = np.tile(ugrid, (len(grid), 1))
    cp = input_probabilities(controller, ys, us)
    keep = cp > 0
    return ys[keep], us[keep], cp[keep]


def history_probabilities(models, ys: np.ndarray, us: np.ndarray, ctrl_prob: np.ndarray) -> np.ndarray:
    """P_i(history) for each model, shape (N, P).

    The history may end with an output (len(ys) = len(us) + 1) or with an
    input (len(ys) = len(us)).
    """
    out = np.empty((len(models), len(ys)))
    n_trans = ys.shape[1] - 1
    for i, m in enumerate(models):
        p = m.initial_probs[ys[:, 0]] * ctrl_prob
        for k in range(n_trans):
            p = p * m.transition_table[ys[:, k], us[:, k], ys[:, k + 1]]
        out[i] = p
    return out


def enumerate_paths(models, controller: M.ControllerPolicy, horizon: int):
    """Full horizon-T trajectories as a batch plus their probabilities (N, P)."""
    models = _check_family(models)
    for m in models:
        check_compatible(m, controller, horizon)
    ys, us, cp = enumerate_histories(models, controller, horizon + 1, horizon, len(models))
    probs = history_probabilities(models, ys, us, cp)
    batch = TrajectoryBatch(ys, us, None, None, np.zeros(len(ys), dtype=np.uint64))
    return batch, probs
