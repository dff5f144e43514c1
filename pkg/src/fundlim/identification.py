"""Identification algorithms and exact / Monte-Carlo identification error.

Identifiers are deterministic maps from a trajectory (outputs, inputs and,
for linear policies, the recorded gains) to a parameter point.  Identifiers
that take values in a packing also report the packing index.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import linprog

from fundlim import entropy as E
from fundlim import tabular as TB
from fundlim.kernel import models as M
from fundlim.kernel.sampling import TrajectoryBatch, simulate
from fundlim.seeding import mean_and_se, mix64, trial_seeds

SINGULAR_REL_TOL = 1e-10

LEAST_SQUARES = "least_squares"
NEAREST = "nearest_packing_point"
CONSTANT = "constant_guess"
PLUG_IN = "plug_in_sequence"
EXHAUSTIVE = "exhaustive_optimal"
IDENTIFIER_KINDS = (LEAST_SQUARES, NEAREST, CONSTANT, PLUG_IN, EXHAUSTIVE)

# point estimators underlying least_squares / nearest_packing_point
GAIN_AVERAGE = "gain_average"
ORDINARY = "ordinary"
FREQUENCY = "frequency"


class MissingGainsError(ValueError):
    pass


def _gram_is_singular(G: np.ndarray) -> np.ndarray:
    tr = np.trace(G, axis1=-2, axis2=-1)
    lam = np.linalg.eigvalsh(G)[..., 0]
    return ~((tr > 0) & (lam >= SINGULAR_REL_TOL * tr))


def _solve_right(S: np.ndarray, G: np.ndarray) -> np.ndarray:
    """S G^{-1} for stacks, with zeros wherever G is numerically singular."""
    sing = _gram_is_singular(G)
    n = G.shape[-1]
    G_safe = np.where(sing[..., None, None], np.eye(n), G)
    est = np.swapaxes(np.linalg.solve(G_safe, np.swapaxes(S, -1, -2)), -1, -2)
    return np.where(sing[..., None, None], 0.0, est)


def least_squares_batch(outputs: np.ndarray, gains: Optional[np.ndarray]) -> np.ndarray:
    """A_tilde = sum_t F_t Y_t Y_t^T G_T^{-1}, G_T = sum_t Y_t Y_t^T (t = 1..T)."""
    if gains is None:
        raise MissingGainsError("least-squares identification needs the recorded gains F_t")
    T = gains.shape[1]
    Y = outputs[:, :T]
    H = Y[..., :, None] * Y[..., None, :]
    G = H.sum(1)
    S = (gains @ H).sum(1)
    return _solve_right(S, G)


def least_squares_estimate(trajectory) -> np.ndarray:
    return least_squares_batch(trajectory.outputs[None], None if trajectory.gains is None else trajectory.gains[None])[0]


def ordinary_least_squares_batch(outputs: np.ndarray, inputs: np.ndarray, upto: Optional[int] = None) -> np.ndarray:
    """Regression of Y_{t+1} - U_t on Y_t over the first ``upto`` transitions."""
    k = inputs.shape[1] if upto is None else upto
    Y, Yn, U = outputs[:, :k], outputs[:, 1 : k + 1], inputs[:, :k]
    G = (Y[..., :, None] * Y[..., None, :]).sum(1)
    S = ((Yn - U)[..., :, None] * Y[..., None, :]).sum(1)
    return _solve_right(S, G)


def nonlinear_least_squares_batch(model: M.SystemModel, outputs, inputs, upto: Optional[int] = None) -> np.ndarray:
    """theta_hat = (sum g g^T)^{-1} sum g (Y_{t+1} - U_t); zeros when singular."""
    k = inputs.shape[1] if upto is None else upto
    g = model.features(outputs[:, :k])
    r = (outputs[:, 1 : k + 1] - inputs[:, :k])[..., 0]
    G = (g[..., :, None] * g[..., None, :]).sum(1)
    S = (g * r[..., None]).sum(1)[:, None, :]
    return _solve_right(S, G)[:, 0, :]


def frequency_estimate_batch(outputs, inputs, n_inputs: int, upto: Optional[int] = None) -> np.ndarray:
    """Empirical P(Y'=1 | y, u) for binary chains; unvisited cells get 1/2."""
    k = inputs.shape[1] if upto is None else upto
    cell = outputs[:, :k] * n_inputs + inputs[:, :k]
    ones = outputs[:, 1 : k + 1] == 1
    C = 2 * n_inputs
    counts = np.stack([(cell == c).sum(1) for c in range(C)], axis=1)
    hits = np.stack([((cell == c) & ones).sum(1) for c in range(C)], axis=1)
    return np.where(counts > 0, hits / np.maximum(counts, 1), 0.5)


def nearest_packing_point(estimate, packing: E.PackingSet) -> int:
    """Index of the closest packing point; ties go to the lowest index."""
    if len(packing) == 0:
        raise ValueError("packing is empty")
    d = E.distances(packing.distance, estimate, packing.points)
    return int(np.argmin(d))


def nearest_indices(estimates: np.ndarray, packing: E.PackingSet) -> np.ndarray:
    return np.array([nearest_packing_point(e, packing) for e in estimates], dtype=np.int64)


@dataclass(frozen=True, eq=False)
class Identifier:
    kind: str
    packing: Optional[E.PackingSet] = None
    guess: Optional[object] = None
    schedule: tuple = ()
    method: Optional[str] = None

    def __post_init__(self):
        if self.kind not in IDENTIFIER_KINDS:
            raise ValueError(f"unknown identifier kind {self.kind!r}")
        if self.kind in (NEAREST, EXHAUSTIVE) and self.packing is None:
            raise ValueError(f"{self.kind} needs a packing")
        if self.kind == EXHAUSTIVE and self.packing.models is None:
            raise ValueError("exhaustive_optimal needs the packing's models")
        if self.kind == CONSTANT and self.guess is None:
            raise ValueError("constant_guess needs a guess")
        if self.kind == PLUG_IN and not self.schedule:
            raise ValueError("plug_in_sequence needs a schedule")

    @property
    def packing_valued(self) -> bool:
        if self.kind in (NEAREST, EXHAUSTIVE):
            return True
        if self.kind == PLUG_IN:
            return all(s.packing_valued for s in self.schedule)
        return self.kind == CONSTANT and self.packing is not None

    def at_step(self, t: int) -> "Identifier":
        """The t-step member of a plug-in schedule (the last one repeats)."""
        if self.kind != PLUG_IN:
            return self
        return self.schedule[min(t, len(self.schedule) - 1)]


def least_squares_identifier(method: str = GAIN_AVERAGE) -> Identifier:
    return Identifier(LEAST_SQUARES, method=method)


def nearest_identifier(packing: E.PackingSet, method: Optional[str] = None) -> Identifier:
    return Identifier(NEAREST, packing=packing, method=method)


def constant_identifier(guess, packing: Optional[E.PackingSet] = None) -> Identifier:
    """Always returns ``guess``; with a packing, ``guess`` is a packing index."""
    return Identifier(CONSTANT, packing=packing, guess=guess)


def maximum_likelihood_identifier(packing: E.PackingSet) -> Identifier:
    return Identifier(EXHAUSTIVE, packing=packing)


def plug_in_identifier(base: Identifier, initial_guess) -> Identifier:
    """theta_hat_0 = initial_guess (data-free); theta_hat_t = base on the first t transitions."""
    first = constant_identifier(initial_guess, base.packing if base.packing_valued else None)
    return Identifier(PLUG_IN, schedule=(first, base), packing=base.packing if base.packing_valued else None)


@dataclass(frozen=True)
class Estimates:
    points: np.ndarray
    indices: Optional[np.ndarray]


def log_likelihoods(models, batch: TrajectoryBatch, upto: Optional[int] = None) -> np.ndarray:
    """Log-likelihood of each trajectory under each model over the first ``upto``
    transitions, shape (B, N).  Controller factors are common to all models and omitted."""
    k = batch.horizon if upto is None else upto
    out = np.empty((len(batch), len(models)))
    ys, us = batch.outputs, batch.inputs
    for i, m in enumerate(models):
        if m.kind == M.TABULAR:
            with np.errstate(divide="ignore"):
                ll = np.log(m.initial_probs[ys[:, 0]])
                for j in range(k):
                    ll = ll + np.log(m.transition_table[ys[:, j], us[:, j], ys[:, j + 1]])
        else:
            mean = m.next_mean(ys[:, :k], us[:, :k])
            r = ys[:, 1 : k + 1] - mean
            ll = -((r * r).sum(-1)).sum(-1) / (2.0 * m.noise_variance)
        out[:, i] = ll
    return out


def _base_point_estimates(identifier: Identifier, model: M.SystemModel, batch, upto):
    method = identifier.method
    if model.kind == M.LINEAR:
        method = method or (GAIN_AVERAGE if identifier.kind == LEAST_SQUARES else ORDINARY)
        if method == GAIN_AVERAGE:
            k = batch.horizon if upto is None else upto
            return least_squares_batch(batch.outputs, None if batch.gains is None else batch.gains[:, :k])
        return ordinary_least_squares_batch(batch.outputs, batch.inputs, upto)
    if model.kind == M.NONLINEAR:
        return nonlinear_least_squares_batch(model, batch.outputs, batch.inputs, upto)
    if model.input_alphabet_size and model.alphabet_size == 2:
        return frequency_estimate_batch(batch.outputs, batch.inputs, model.input_alphabet_size, upto)
    raise TypeError("point estimation for tabular models needs a binary alphabet")


def identify(identifier: Identifier, batch: TrajectoryBatch, model: M.SystemModel, upto: Optional[int] = None) -> Estimates:
    """Apply ``identifier`` to each trajectory, using the first ``upto`` transitions.

    ``model`` only fixes the model family (kind, basis, alphabet); the
    identifier never sees the true parameter.
    """
    B = len(batch)
    kind = identifier.kind
    if kind == PLUG_IN:
        return identify(identifier.at_step(batch.horizon if upto is None else upto), batch, model, upto)
    if kind == CONSTANT:
        if identifier.packing is not None:
            idx = np.full(B, int(identifier.guess), dtype=np.int64)
            return Estimates(identifier.packing.points[idx], idx)
        g = np.asarray(identifier.guess, dtype=float)
        return Estimates(np.broadcast_to(g, (B,) + g.shape).copy(), None)
    if kind == EXHAUSTIVE:
        ll = log_likelihoods(identifier.packing.models, batch, upto)
        idx = np.argmax(ll, axis=1).astype(np.int64)
        return Estimates(identifier.packing.points[idx], idx)
    pts = _base_point_estimates(identifier, model, batch, upto)
    if kind == LEAST_SQUARES:
        return Estimates(pts, None)
    idx = nearest_indices(pts, identifier.packing)
    return Estimates(identifier.packing.points[idx], idx)


# -- error reports -------------------------------------------------------------


@dataclass(frozen=True)
class IdErrorReport:
    per_model_error: list
    per_model_error_prob: list
    worst_case: float
    max_error_prob: float
    min_success_prob: float
    avg_error_prob: float

    def to_dict(self) -> dict:
        return {
            "per_model_error": [{"mean": m, "std_error": s} for m, s in self.per_model_error],
            "per_model_error_prob": list(self.per_model_error_prob),
            "worst_case": self.worst_case,
            "max_error_prob": self.max_error_prob,
            "min_success_prob": self.min_success_prob,
            "avg_error_prob": self.avg_error_prob,
        }


def _report(errors, error_probs) -> IdErrorReport:
    probs = [float(p) for p in error_probs]
    max_err = max(probs)
    return IdErrorReport(
        per_model_error=[(float(m), float(s)) for m, s in errors],
        per_model_error_prob=probs,
        worst_case=max(float(m) for m, _ in errors),
        max_error_prob=max_err,
        min_success_prob=1.0 - max_err,
        avg_error_prob=float(np.mean(probs)),
    )


def _errors_against(identifier, est: Estimates, packing: E.PackingSet, i: int):
    err = E.distances(packing.distance, packing.points[i], est.points)
    if est.indices is not None and identifier.packing is packing:
        wrong = est.indices != i
    else:
        flat = est.points.reshape(len(est.points), -1)
        wrong = ~np.all(flat == packing.points[i].reshape(-1), axis=1)
    return err, wrong


def empirical_id_report(
    models: E.PackingSet,
    controller: M.ControllerPolicy,
    identifier: Identifier,
    horizon: int,
    trials: int,
    seed: int,
    workers: int = 1,
) -> IdErrorReport:
    """Monte-Carlo error report; model i uses the trial stream of mix64(seed, i)."""
    if trials < 2:
        raise ValueError("trials must be >= 2")
    if models.models is None:
        raise ValueError("packing has no models attached")
    errors, probs = [], []
    for i, m in enumerate(models.models):
        batch = simulate(m, controller, horizon, trial_seeds(mix64(seed, i), trials), workers)
        est = identify(identifier, batch, m)
        err, wrong = _errors_against(identifier, est, models, i)
        errors.append(mean_and_se(err))
        probs.append(wrong.mean())
    return _report(errors, probs)


def exact_tabular_report(
    models: E.PackingSet, controller: M.ControllerPolicy, identifier: Identifier, horizon: int
) -> IdErrorReport:
    """Exact error report by summing path probabilities over all trajectories."""
    batch, P = TB.enumerate_paths(models.models, controller, horizon)
    est = identify(identifier, batch, models.models[0])
    errors, probs = [], []
    for i in range(len(models)):
        err, wrong = _errors_against(identifier, est, models, i)
        errors.append((float(P[i] @ err), 0.0))
        probs.append(float(P[i] @ wrong))
    return _report(errors, probs)


# -- optimal decision rules ---------------------------------------------------------


@dataclass(frozen=True)
class OptimalErrors:
    """Exact optimal-rule quantities on a tabular packing.

    ``min_max_error_prob`` is a certified lower bound on the minimax error
    probability over deterministic rules: the exact Bayes error under the
    better of the uniform and the (LP-computed) least-favourable prior.
    ``min_avg_metric_error`` is the exact uniform-prior Bayes metric risk
    with estimates in the packing; ``minimax_metric_error`` is the matching
    certified lower bound on the minimax metric error.
    """

    min_max_error_prob: float
    min_avg_metric_error: float
    bayes_error_prob: float
    map_rule_max_error_prob: float
    minimax_metric_error: float
    least_favorable_prior: tuple

    def to_dict(self) -> dict:
        return {
            "min_max_error_prob": self.min_max_error_prob,
            "min_avg_metric_error": self.min_avg_metric_error,
            "bayes_error_prob": self.bayes_error_prob,
            "map_rule_max_error_prob": self.map_rule_max_error_prob,
            "minimax_metric_error": self.minimax_metric_error,
        }


def bayes_risk(P: np.ndarray, loss: np.ndarray, prior: np.ndarray) -> float:
    """sum_path min_j sum_i prior_i P_i(path) loss[j, i]; exact for the given prior."""
    weighted = prior[:, None] * P  # (N, paths)
    return float(np.min(loss @ weighted, axis=0).sum())


def least_favorable_prior(P: np.ndarray, loss: np.ndarray) -> np.ndarray:
    """Prior maximizing the Bayes risk (LP); returned clipped and renormalized."""
    N, npath = P.shape
    J = loss.shape[0]
    # variables: prior (N), s (npath); maximize sum s
    c = np.concatenate([np.zeros(N), -np.ones(npath)])
    rows = []
    for j in range(J):
        # s_p - sum_i prior_i P_i(p) loss[j, i] <= 0
        block = np.hstack([-(P * loss[j][:, None]).T, np.eye(npath)])
        rows.append(block)
    A_ub = np.vstack(rows)
    b_ub = np.zeros(len(A_ub))
    A_eq = np.concatenate([np.ones(N), np.zeros(npath)])[None]
    bounds = [(0, None)] * N + [(None, None)] * npath
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=[1.0], bounds=bounds, method="highs")
    if not res.success:
        return np.full(N, 1.0 / N)
    prior = np.clip(res.x[:N], 0.0, None)
    return prior / prior.sum()


def exhaustive_optimal_error(models: E.PackingSet, controller: M.ControllerPolicy, horizon: int) -> OptimalErrors:
    batch, P = TB.enumerate_paths(models.models, controller, horizon)
    N = len(models)
    uniform = np.full(N, 1.0 / N)
    zero_one = 1.0 - np.eye(N)
    metric = E.pairwise_distances(models.distance, models.points)

    bayes = bayes_risk(P, zero_one, uniform)
    map_rule = np.argmax(P, axis=0)
    map_err = [float(P[i][map_rule != i].sum()) for i in range(N)]

    lfp = least_favorable_prior(P, zero_one)
    minimax_prob = max(bayes, bayes_risk(P, zero_one, lfp))
    lfp_metric = least_favorable_prior(P, metric)
    avg_metric = bayes_risk(P, metric, uniform)
    minimax_metric = max(avg_metric, bayes_risk(P, metric, lfp_metric))
    return OptimalErrors(
        min_max_error_prob=minimax_prob,
        min_avg_metric_error=avg_metric,
        bayes_error_prob=bayes,
        map_rule_max_error_prob=max(map_err),
        minimax_metric_error=minimax_metric,
        least_favorable_prior=tuple(float(x) for x in lfp),
    )
