"""Trajectory sampling for the system/controller interconnection.

Indexing convention: a horizon-T trajectory holds outputs Y_1..Y_{T+1},
inputs U_1..U_T and, for Gaussian kinds, the noises V_2..V_{T+1}.  Array
position k therefore holds Y_{k+1}, U_{k+1} and V_{k+2}.

Each trial draws all of its randomness from ``default_rng(seed)`` up front:
a (T+1, n) standard-normal block for Gaussian kinds (row 0 is the initial
state, rows 1.. the noise) or 2T+1 uniforms for tabular kinds (Y_1, then the
T inputs, then the T outputs).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from fundlim.kernel import models as M
from fundlim.seeding import chunked_map


class IncompatibleControllerError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Trajectory:
    outputs: np.ndarray
    inputs: np.ndarray
    noises: Optional[np.ndarray]
    gains: Optional[np.ndarray]
    seed: int

    @property
    def horizon(self) -> int:
        return len(self.inputs)


@dataclass(frozen=True, eq=False)
class TrajectoryBatch:
    """Trajectories stacked along a leading trial axis."""

    outputs: np.ndarray
    inputs: np.ndarray
    noises: Optional[np.ndarray]
    gains: Optional[np.ndarray]
    seeds: np.ndarray

    def __len__(self) -> int:
        return len(self.seeds)

    @property
    def horizon(self) -> int:
        return self.inputs.shape[1]

    def trajectory(self, i: int) -> Trajectory:
        return Trajectory(
            outputs=self.outputs[i],
            inputs=self.inputs[i],
            noises=None if self.noises is None else self.noises[i],
            gains=None if self.gains is None else self.gains[i],
            seed=int(self.seeds[i]),
        )

    @staticmethod
    def concatenate(parts: list["TrajectoryBatch"]) -> "TrajectoryBatch":
        if len(parts) == 1:
            return parts[0]

        def cat(name):
            vals = [getattr(p, name) for p in parts]
            return None if vals[0] is None else np.concatenate(vals)

        return TrajectoryBatch(
            cat("outputs"), cat("inputs"), cat("noises"), cat("gains"), cat("seeds")
        )


def check_compatible(model: M.SystemModel, controller: M.ControllerPolicy, horizon: int) -> None:
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    kind = controller.kind
    if model.kind == M.TABULAR:
        if kind not in (M.ZERO, M.OPEN_LOOP, M.TABULAR_POLICY):
            raise IncompatibleControllerError(
                f"tabular model cannot be driven by a real-valued {kind} controller"
            )
        if kind == M.TABULAR_POLICY:
            tab = controller.policy_table
            if tab.shape != (model.alphabet_size, model.input_alphabet_size):
                raise M.DimensionError(
                    f"policy table shape {tab.shape} does not match "
                    f"({model.alphabet_size}, {model.input_alphabet_size})"
                )
        if kind == M.OPEN_LOOP:
            seq = controller.input_sequence
            if not np.issubdtype(seq.dtype, np.integer):
                raise IncompatibleControllerError("tabular open-loop inputs must be integer symbols")
            if np.any(seq < 0) or np.any(seq >= model.input_alphabet_size):
                raise ValueError("open-loop input symbol outside the input alphabet")
    else:
        if kind == M.TABULAR_POLICY:
            raise IncompatibleControllerError("tabular policy cannot drive a Gaussian model")
        if kind == M.CERTAINTY_EQUIVALENCE and model.kind != M.LINEAR:
            raise IncompatibleControllerError("certainty equivalence is defined for linear models")
        n = model.output_dim
        if kind == M.LINEAR_FEEDBACK:
            g = controller.gain
            if g.shape[-2:] != (n, n) or g.ndim not in (2, 3):
                raise M.DimensionError(f"gain shape {g.shape} incompatible with n={n}")
            if g.ndim == 3 and len(g) < horizon:
                raise ValueError("gain schedule shorter than horizon")
    if kind == M.OPEN_LOOP:
        seq = controller.input_sequence
        if len(seq) < horizon:
            raise ValueError("open-loop input sequence shorter than horizon")
        if model.is_gaussian and seq.ndim == 2 and seq.shape[1] != model.output_dim:
            raise M.DimensionError("open-loop input dimension mismatch")


def simulate(
    model: M.SystemModel,
    controller: M.ControllerPolicy,
    horizon: int,
    seeds,
    workers: int = 1,
) -> TrajectoryBatch:
    """Sample one trajectory per seed.  Trial i depends only on seeds[i]."""
    check_compatible(model, controller, horizon)
    seeds = np.asarray(seeds, dtype=np.uint64).reshape(-1)
    run = _simulate_tabular if model.kind == M.TABULAR else _simulate_gaussian
    parts = chunked_map(lambda s: run(model, controller, horizon, s), seeds, workers)
    return TrajectoryBatch.concatenate(parts)


def sample_trajectory(
    model: M.SystemModel, controller: M.ControllerPolicy, horizon: int, seed: int
) -> Trajectory:
    return simulate(model, controller, horizon, [seed]).trajectory(0)


def _outer(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a[..., :, None] * b[..., None, :]


def _ce_update(Sxy, G, A_hat, project):
    tr = np.trace(G, axis1=-2, axis2=-1)
    lam = np.linalg.eigvalsh(G)[..., 0]
    ok = (tr > 0) & (lam > 1e-10 * tr)
    if not np.any(ok):
        return A_hat
    n = G.shape[-1]
    G_safe = np.where(ok[:, None, None], G, np.eye(n))
    # A_hat = Sxy G^{-1}  <=>  A_hat^T = G^{-1} Sxy^T
    est = np.swapaxes(np.linalg.solve(G_safe, np.swapaxes(Sxy, -1, -2)), -1, -2)
    if project:
        U, s, Vt = np.linalg.svd(est)
        est = (U * np.minimum(s, 1.0)[..., None, :]) @ Vt
    return np.where(ok[:, None, None], est, A_hat)


def _simulate_gaussian(model, controller, T, seeds) -> TrajectoryBatch:
    B, n = len(seeds), model.output_dim
    z = np.empty((B, T + 1, n))
    for i, s in enumerate(seeds):
        z[i] = np.random.default_rng(int(s)).standard_normal((T + 1, n))
    y = np.zeros((B, T + 1, n))
    if model.initial_variance > 0:
        y[:, 0] = np.sqrt(model.initial_variance) * z[:, 0]
    noise = np.sqrt(model.noise_variance) * z[:, 1:]
    u = np.zeros((B, T, n))
    kind = controller.kind
    record = (controller.records_gains and model.kind == M.LINEAR) or kind == M.LINEAR_FEEDBACK
    gains = np.zeros((B, T, n, n)) if record else None

    if kind == M.CERTAINTY_EQUIVALENCE:
        Sxy = np.zeros((B, n, n))
        G = np.zeros((B, n, n))
        A_hat = np.zeros((B, n, n))
        dither = controller.dither(T, n)

    for k in range(T):
        yt = y[:, k]
        if kind == M.ZERO:
            ut = np.zeros((B, n))
        elif kind == M.OPEN_LOOP:
            ut = np.broadcast_to(np.asarray(controller.input_sequence[k], dtype=float), (B, n)).copy()
        elif kind == M.LINEAR_FEEDBACK:
            F = controller.gain if controller.gain.ndim == 2 else controller.gain[k]
            ut = -M.matvec(F, yt)
            gains[:, k] = F
        elif kind == M.ORACLE:
            ut = -(model.next_mean(yt, np.zeros_like(yt)))
            if record:
                gains[:, k] = model.A
        else:  # certainty equivalence
            if k > 0 and k % controller.update_period == 0:
                A_hat = _ce_update(Sxy, G, A_hat, controller.project)
            sq = (yt * yt).sum(-1)
            nz = sq > 0
            d = np.where(nz[:, None], dither[k], 0.0)
            ut = -M.matvec(A_hat, yt) + d
            F = A_hat - _outer(d, yt) / np.where(nz, sq, 1.0)[:, None, None]
            gains[:, k] = F
        u[:, k] = ut
        y[:, k + 1] = model.next_mean(yt, ut) + noise[:, k]
        if kind == M.CERTAINTY_EQUIVALENCE:
            Sxy = Sxy + _outer(y[:, k + 1] - ut, yt)
            G = G + _outer(yt, yt)

    return TrajectoryBatch(y, u, noise, gains, seeds.copy())


def _inverse_cdf(probs: np.ndarray, draws: np.ndarray) -> np.ndarray:
    """Row-wise categorical sampling; zero-probability cells are never chosen."""
    cdf = np.cumsum(probs, axis=-1)
    idx = (cdf <= draws[:, None]).sum(-1)
    return np.minimum(idx, probs.shape[-1] - 1)


def _simulate_tabular(model, controller, T, seeds) -> TrajectoryBatch:
    B = len(seeds)
    draws = np.empty((B, 2 * T + 1))
    for i, s in enumerate(seeds):
        draws[i] = np.random.default_rng(int(s)).random(2 * T + 1)
    table = model.transition_table
    ys = np.zeros((B, T + 1), dtype=np.int64)
    us = np.zeros((B, T), dtype=np.int64)
    ys[:, 0] = _inverse_cdf(np.broadcast_to(model.initial_probs, (B, model.alphabet_size)), draws[:, 0])
    for k in range(T):
        yt = ys[:, k]
        if controller.kind == M.ZERO:
            ut = np.zeros(B, dtype=np.int64)
        elif controller.kind == M.OPEN_LOOP:
            ut = np.full(B, int(controller.input_sequence[k]), dtype=np.int64)
        else:
            ut = _inverse_cdf(controller.policy_table[yt], draws[:, 1 + k])
        us[:, k] = ut
        ys[:, k + 1] = _inverse_cdf(table[yt, ut], draws[:, 1 + T + k])
    return TrajectoryBatch(ys, us, None, None, seeds.copy())
