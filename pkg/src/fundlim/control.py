"""Regret, persistent excitation and identification checks for the
linear system Y_{t+1} = A Y_t + U_t + V_{t+1} with A in the spectral unit ball.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from fundlim import entropy as E
from fundlim import identification as ID
from fundlim.kernel import models as M
from fundlim.kernel.models import certainty_equivalence_controller  # noqa: F401  (public re-export)
from fundlim.kernel.sampling import Trajectory, TrajectoryBatch, simulate
from fundlim.seeding import mean_and_se, mix64, trial_seeds

LOG2 = math.log(2.0)
# the least-squares solve leaves ~1e-30 residue where both sides vanish exactly (oracle gains)
LEMMA_ROUNDOFF = 1e-12


class SeparationError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class ControlScenario:
    n: int
    noise_variance: float
    models: np.ndarray
    controller: M.ControllerPolicy
    pe_constant: float = 0.1
    pe_confidence: float = 0.2
    initial_second_moment: float = 0.0
    packing: Optional[E.PackingSet] = None

    def __post_init__(self):
        mats = np.array(self.models, dtype=float).reshape(-1, self.n, self.n)
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if not self.noise_variance > 0:
            raise ValueError("noise_variance must be positive")
        if not 0 < self.pe_confidence < 1:
            raise ValueError("pe_confidence must lie in (0, 1)")
        if not self.pe_constant > 0:
            raise ValueError("pe_constant must be positive")
        if self.initial_second_moment < 0:
            raise ValueError("initial_second_moment must be nonnegative")
        if np.any(E.spectral_norms(mats) > 1 + 1e-12):
            raise ValueError("every A must satisfy ||A|| <= 1")
        mats.setflags(write=False)
        object.__setattr__(self, "models", mats)

    @classmethod
    def from_packing(cls, packing: E.PackingSet, controller, noise_variance=1.0, **kw) -> "ControlScenario":
        pts = np.asarray(packing.points, dtype=float)
        n = pts.shape[-1]
        return cls(n, noise_variance, pts, controller, packing=packing, **kw)

    def system(self, index: int) -> M.SystemModel:
        c0 = self.initial_second_moment / self.n
        return M.linear_gaussian(self.models[index], self.noise_variance, c0)

    def __len__(self) -> int:
        return len(self.models)


# -- regret ------------------------------------------------------------------------


def _require_noises(noises) -> None:
    if noises is None:
        raise ValueError("regret needs stored noise realizations")


def pathwise_regret(trajectory: Trajectory) -> float:
    """sum_{t=1}^T ||Y_{t+1} - V_{t+1}||^2 from the stored realizations."""
    _require_noises(trajectory.noises)
    d = trajectory.outputs[1:] - trajectory.noises
    return float((d * d).sum())


def cumulative_regret(batch: TrajectoryBatch) -> np.ndarray:
    """Running pathwise regret R_1..R_T per trajectory, shape (B, T)."""
    _require_noises(batch.noises)
    d = batch.outputs[:, 1:] - batch.noises
    return np.cumsum((d * d).sum(-1), axis=1)


def regret(scenario: ControlScenario, index: int, horizon: int, trials: int, seed: int, workers: int = 1):
    """Monte-Carlo (R_T, std error) for model ``index`` under the scenario's controller."""
    if trials < 2:
        raise ValueError("trials must be >= 2")
    batch = simulate(scenario.system(index), scenario.controller, horizon, trial_seeds(seed, trials), workers)
    mu, se = mean_and_se(cumulative_regret(batch)[:, -1])
    return float(mu), float(se)


def _write_rows(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for r in rows:
            w.writerow([repr(x) if isinstance(x, float) else x for x in r])


@dataclass(frozen=True)
class RegretCurve:
    per_T: list  # (T, mean R_T, std error)
    model_id: int

    def to_csv(self, path) -> None:
        _write_rows(path, ["T", "mean", "std_error"], self.per_T)

    def to_dict(self) -> dict:
        return {
            "model_id": self.model_id,
            "per_T": [{"T": T, "mean": m, "std_error": s} for T, m, s in self.per_T],
        }


def regret_curve(
    scenario: ControlScenario, index: int, horizons: Sequence[int], trials: int, seed: int, workers: int = 1
) -> RegretCurve:
    """R_T on a horizon grid; each T uses its own trajectories (seed mix64(seed, T))."""
    rows = []
    for T in horizons:
        mu, se = regret(scenario, index, int(T), trials, mix64(seed, int(T)), workers)
        rows.append((int(T), mu, se))
    return RegretCurve(rows, index)


# -- persistent excitation ------------------------------------------------------------


def gram_min_eigenvalues(batch: TrajectoryBatch) -> np.ndarray:
    """lambda_min((1/T) sum_{t=1}^T Y_t Y_t^T) per trajectory, clipped at 0 (the matrix is PSD)."""
    T = batch.horizon
    Y = batch.outputs[:, :T]
    G = (Y[..., :, None] * Y[..., None, :]).sum(1) / T
    return np.maximum(np.linalg.eigvalsh(G)[:, 0], 0.0)


def persistent_excitation_prob(
    scenario: ControlScenario,
    model: M.SystemModel,
    horizon: int,
    trials: int,
    seed: int,
    workers: int = 1,
    c: Optional[float] = None,
):
    """Empirical P(lambda_min of the normalized Gram matrix >= c) with its std error.

    ``c`` defaults to the scenario's constant; any c >= 0 may be passed to probe the threshold.
    """
    if trials < 2:
        raise ValueError("trials must be >= 2")
    c = scenario.pe_constant if c is None else float(c)
    if c < 0:
        raise ValueError("c must be nonnegative")
    batch = simulate(model, scenario.controller, horizon, trial_seeds(seed, trials), workers)
    hit = gram_min_eigenvalues(batch) >= c
    p, se = mean_and_se(hit.astype(float))
    return float(p), float(se)


@dataclass(frozen=True)
class PECurve:
    per_T: list  # (T, probability, std error)
    c: float
    delta: float

    @property
    def T0(self) -> Optional[int]:
        """Smallest tested horizon whose PE probability reaches 1 - delta."""
        for T, p, _ in self.per_T:
            if p >= 1.0 - self.delta:
                return T
        return None

    def to_csv(self, path) -> None:
        _write_rows(path, ["T", "mean", "std_error"], self.per_T)

    def to_dict(self) -> dict:
        return {
            "c": self.c,
            "delta": self.delta,
            "T0": self.T0,
            "per_T": [{"T": T, "mean": m, "std_error": s} for T, m, s in self.per_T],
        }


def pe_curve(
    scenario: ControlScenario, index: int, horizons: Sequence[int], trials: int, seed: int, workers: int = 1
) -> PECurve:
    model = scenario.system(index)
    rows = []
    for T in horizons:
        p, se = persistent_excitation_prob(scenario, model, int(T), trials, mix64(seed, int(T)), workers)
        rows.append((int(T), p, se))
    return PECurve(rows, scenario.pe_constant, scenario.pe_confidence)


# -- least-squares lemma ----------------------------------------------------------------


@dataclass(frozen=True)
class LemmaCheck:
    pe_event_held: bool
    lemma_held: bool
    lhs: float
    rhs: float


def check_ident_lemma_batch(batch: TrajectoryBatch, true_A, c: float):
    """Vectorized check of ||A_tilde_T - A||^2 <= (1/(cT)) sum ||Y_{t+1} - V_{t+1}||^2.

    Returns arrays ``(pe_event_held, lemma_held, lhs, rhs)``; the comparison
    allows LEMMA_ROUNDOFF for floating-point residue.
    """
    if not c > 0:
        raise ValueError("c must be positive")
    A = np.asarray(true_A, dtype=float)
    T = batch.horizon
    est = ID.least_squares_batch(batch.outputs, batch.gains)
    lhs = E.spectral_norms(est - A) ** 2
    rhs = cumulative_regret(batch)[:, -1] / (c * T)
    pe = gram_min_eigenvalues(batch) >= c
    return pe, lhs <= rhs + LEMMA_ROUNDOFF, lhs, rhs


def check_ident_lemma(trajectory: Trajectory, true_A, c: float) -> LemmaCheck:
    b = TrajectoryBatch(
        trajectory.outputs[None],
        trajectory.inputs[None],
        None if trajectory.noises is None else trajectory.noises[None],
        None if trajectory.gains is None else trajectory.gains[None],
        np.array([trajectory.seed], dtype=np.uint64),
    )
    pe, ok, lhs, rhs = check_ident_lemma_batch(b, true_A, c)
    return LemmaCheck(bool(pe[0]), bool(ok[0]), float(lhs[0]), float(rhs[0]))


# -- estimator error probability -------------------------------------------------------


def required_separation(epsilon: float, c: float) -> float:
    return 4.0 * math.sqrt(epsilon / c)


def estimator_error_prob(
    scenario: ControlScenario, epsilon: float, horizon: int, trials: int, seed: int, workers: int = 1
):
    """Empirical P(W_hat != W) for W uniform on the scenario's packing and
    W_hat the packing point nearest to the least-squares estimate."""
    pk = scenario.packing
    if pk is None:
        raise ValueError("scenario needs a packing")
    need = required_separation(epsilon, scenario.pe_constant)
    if len(pk) > 1 and pk.min_pairwise_distance() < need * (1 - 1e-12):
        raise SeparationError(
            f"packing separation {pk.min_pairwise_distance():.6g} is below 4 sqrt(eps/c) = {need:.6g}"
        )
    if trials < 2:
        raise ValueError("trials must be >= 2")
    N = len(scenario)
    if N == 1:
        return 0.0, 0.0
    seeds = trial_seeds(seed, trials)
    labels = np.random.default_rng(mix64(seed, trials)).integers(N, size=trials)
    wrong = np.zeros(trials)
    for i in range(N):
        sel = np.flatnonzero(labels == i)
        if not len(sel):
            continue
        batch = simulate(scenario.system(i), scenario.controller, horizon, seeds[sel], workers)
        est = ID.least_squares_batch(batch.outputs, batch.gains)
        wrong[sel] = ID.nearest_indices(est, pk) != i
    p, se = mean_and_se(wrong)
    return float(p), float(se)


# -- minimum time -----------------------------------------------------------------------------


@dataclass(frozen=True)
class MinTimeResult:
    epsilons: list
    min_times: list  # None where the grid never reaches the target
    horizons: list
    worst_average_regret: list  # max over models of R_T / T at each grid T
    nonincreasing: bool

    def to_dict(self) -> dict:
        return {
            "epsilons": list(self.epsilons),
            "min_times": [("not reached" if t is None else t) for t in self.min_times],
            "horizons": list(self.horizons),
            "worst_average_regret": list(self.worst_average_regret),
            "nonincreasing": self.nonincreasing,
        }


def average_regret_table(
    scenario: ControlScenario, horizon_grid: Sequence[int], trials: int, seed: int, workers: int = 1
) -> np.ndarray:
    """max over models of the Monte-Carlo mean of R_T / T for every grid T."""
    grid = [int(T) for T in horizon_grid]
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("horizon grid must be strictly ascending")
    worst = np.full(len(grid), -np.inf)
    for i in range(len(scenario)):
        for j, T in enumerate(grid):
            mu, _ = regret(scenario, i, T, trials, mix64(mix64(seed, i), T), workers)
            worst[j] = max(worst[j], mu / T)
    return worst


def _first_below(worst: np.ndarray, grid, epsilon: float):
    hits = np.flatnonzero(worst < epsilon)
    return int(grid[hits[0]]) if len(hits) else None


def min_time_empirical(
    scenario: ControlScenario, epsilon: float, horizon_grid: Sequence[int], trials: int, seed: int, workers: int = 1
) -> Optional[int]:
    """Smallest grid T whose worst-case average regret is below epsilon, else None."""
    worst = average_regret_table(scenario, horizon_grid, trials, seed, workers)
    return _first_below(worst, list(horizon_grid), epsilon)


def min_time_sweep(
    scenario: ControlScenario,
    epsilons: Sequence[float],
    horizon_grid: Sequence[int],
    trials: int,
    seed: int,
    workers: int = 1,
) -> MinTimeResult:
    """T*(epsilon) for several epsilons from one shared table of regret estimates."""
    grid = [int(T) for T in horizon_grid]
    worst = average_regret_table(scenario, grid, trials, seed, workers)
    eps = sorted(float(e) for e in epsilons)
    times = [_first_below(worst, grid, e) for e in eps]
    big = math.inf
    seq = [big if t is None else t for t in times]
    mono = all(b <= a for a, b in zip(seq, seq[1:]))
    return MinTimeResult(eps, times, grid, [float(w) for w in worst], mono)


def min_time_lower_bound(n: int, sigma2: float, epsilon: float, c: float, C: float, b_n: float) -> float:
    """T >= (2 sigma^2/eps) [ (b_n + n^2 log(1/(4 sqrt(eps/c))))/2 - (C + n sigma^2)/sigma^2 - log 2 ], floored at 0."""
    if not (sigma2 > 0 and epsilon > 0 and c > 0) or C < 0:
        raise ValueError("need sigma2, epsilon, c > 0 and C >= 0")
    bracket = 0.5 * (b_n + n * n * math.log(1.0 / (4.0 * math.sqrt(epsilon / c)))) - (C + n * sigma2) / sigma2 - LOG2
    return max(0.0, 2.0 * sigma2 / epsilon * bracket)


def chain_rhs(n: int, sigma2: float, epsilon: float, C: float, T: float) -> float:
    """(C + n sigma^2)/sigma^2 + log 2 + T eps / (2 sigma^2)."""
    return (C + n * sigma2) / sigma2 + LOG2 + T * epsilon / (2.0 * sigma2)


def chain_lhs(n: int, epsilon: float, c: float, b_n: float) -> float:
    """(b_n + n^2 log(1/(4 sqrt(eps/c)))) / 2."""
    return 0.5 * (b_n + n * n * math.log(1.0 / (4.0 * math.sqrt(epsilon / c))))


def packing_intercept(n: int, resolution: float = 0.25, epsilons=None, seed: int = 0) -> float:
    """b_n estimated as the intercept of an n^2-slope fit to a greedy curve of the spectral ball."""
    space = E.spectral_ball_grid(n, 1.0, resolution)
    if epsilons is None:
        epsilons = np.geomspace(2 * resolution, 1.0, 8)
    curve = E.entropy_curve(space, epsilons, seed)
    return E.fit_entropy_curve(curve, slope=n * n).intercept
