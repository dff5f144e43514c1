"""Fano bound, auxiliary-kernel divergence sums, exact mutual information and
the information-theoretic lower-bound pipelines.

Step indexing: a horizon-T run has T transitions.  Step t (1..T) is the
kernel producing Y_{t+1} from the history (Y_1..Y_t, U_1..U_t).  The law of
Y_1 is shared by all models and contributes nothing to any divergence.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.special import logsumexp

from fundlim import entropy as E
from fundlim import identification as ID
from fundlim import tabular as TB
from fundlim.kernel import models as M
from fundlim.kernel.divergence import AbsoluteContinuityError, categorical_kl, gaussian_kl
from fundlim.kernel.sampling import TrajectoryBatch, simulate
from fundlim.seeding import mean_and_se, mix64, trial_seeds

LOG2 = math.log(2.0)
EXACT_TOL = 1e-12

NOMINAL = "nominal_model"
PLUG_IN = "plug_in_schedule"
FIXED_GAUSSIAN = "fixed_gaussian_zero_mean"
MIXTURE = "exact_conditional_mixture"
FIXED_UNIFORM = "fixed_uniform"
AUX_KINDS = (NOMINAL, PLUG_IN, FIXED_GAUSSIAN, MIXTURE, FIXED_UNIFORM)

HOLDS = "holds"
MARGINAL = "holds_within_mc_error"
VIOLATED = "violated"


def fano_lower_bound(num_hypotheses: int, mutual_info_nats: float) -> float:
    """max(0, 1 - (I + log 2) / log N)."""
    if num_hypotheses < 2:
        raise ValueError("Fano's bound needs at least two hypotheses")
    if mutual_info_nats < 0:
        raise ValueError("mutual information must be nonnegative")
    return max(0.0, 1.0 - (mutual_info_nats + LOG2) / math.log(num_hypotheses))


@dataclass(frozen=True, eq=False)
class AuxiliaryKernelSpec:
    """The comparison kernels Q_t.

    ``plug_in_schedule`` uses P_{theta_hat_{t-1}, t} where theta_hat is the
    schedule applied to the transitions observed so far; point estimates are
    turned into models through ``family`` unless the schedule is
    packing-valued.  ``fixed_uniform`` is the tabular analogue of the fixed
    zero-mean Gaussian.
    """

    kind: str
    nominal: Optional[M.SystemModel] = None
    schedule: Optional[ID.Identifier] = None
    variance: Optional[float] = None
    family: Optional[M.ModelFamily] = None

    def __post_init__(self):
        if self.kind not in AUX_KINDS:
            raise ValueError(f"unknown auxiliary kernel kind {self.kind!r}")
        if self.kind == NOMINAL and self.nominal is None:
            raise ValueError("nominal_model needs a nominal system")
        if self.kind == PLUG_IN:
            if self.schedule is None:
                raise ValueError("plug_in_schedule needs an identifier schedule")
            if not self.schedule.packing_valued and self.family is None:
                raise ValueError("a point-valued plug-in schedule needs a model family")
        if self.kind == FIXED_GAUSSIAN and not (self.variance is not None and self.variance > 0):
            raise ValueError("fixed_gaussian_zero_mean needs a positive variance")


def nominal_aux(model: M.SystemModel) -> AuxiliaryKernelSpec:
    return AuxiliaryKernelSpec(NOMINAL, nominal=model)


def plug_in_aux(schedule: ID.Identifier, family: Optional[M.ModelFamily] = None) -> AuxiliaryKernelSpec:
    return AuxiliaryKernelSpec(PLUG_IN, schedule=schedule, family=family)


def fixed_gaussian_aux(variance: float) -> AuxiliaryKernelSpec:
    return AuxiliaryKernelSpec(FIXED_GAUSSIAN, variance=variance)


def mixture_aux() -> AuxiliaryKernelSpec:
    return AuxiliaryKernelSpec(MIXTURE)


def uniform_aux() -> AuxiliaryKernelSpec:
    return AuxiliaryKernelSpec(FIXED_UNIFORM)


def _check_aux(aux: AuxiliaryKernelSpec, models) -> None:
    tab = models[0].kind == M.TABULAR
    if tab and aux.kind == FIXED_GAUSSIAN:
        raise TypeError("fixed_gaussian_zero_mean needs Gaussian models")
    if not tab and aux.kind == FIXED_UNIFORM:
        raise TypeError("fixed_uniform needs tabular models")
    if aux.kind == NOMINAL and aux.nominal.kind != models[0].kind:
        raise TypeError("nominal model kind differs from the packing's")


# -- plug-in estimates as kernels ------------------------------------------------------


def _plug_in_models(aux: AuxiliaryKernelSpec, reference: M.SystemModel, batch: TrajectoryBatch, step: int):
    """Per-trajectory plug-in parameters after ``step - 1`` observed transitions.

    Returns ``(indices, points)``; exactly one of them is not None.
    """
    est = ID.identify(aux.schedule, batch, reference, upto=step - 1)
    ident = aux.schedule.at_step(step - 1)
    if ident.packing_valued and ident.packing.models is not None:
        return est.indices, ident.packing
    return None, est.points


def _means_from_points(reference: M.SystemModel, points: np.ndarray, y: np.ndarray, u: np.ndarray) -> np.ndarray:
    if reference.kind == M.LINEAR:
        return M.matvec(points, y) + u
    theta = points.reshape(len(points), -1)
    return (reference.features(y) * theta).sum(-1, keepdims=True) + u


def _plug_in_rows(aux, reference, batch, step) -> np.ndarray:
    """Tabular plug-in next-output pmfs, shape (B, S)."""
    idx, src = _plug_in_models(aux, reference, batch, step)
    y, u = batch.outputs[:, step - 1], batch.inputs[:, step - 1]
    if idx is not None:
        tables = np.stack([m.transition_table for m in src.models])
        return tables[idx, y, u]
    return np.stack([aux.family.model(p).transition_table[yy, uu] for p, yy, uu in zip(src, y, u)])


def _plug_in_means(aux, reference, batch, step) -> np.ndarray:
    idx, src = _plug_in_models(aux, reference, batch, step)
    y, u = batch.outputs[:, step - 1], batch.inputs[:, step - 1]
    if idx is not None:
        pts = np.asarray(src.points)[idx]
    else:
        pts = src
    return _means_from_points(reference, np.asarray(pts, dtype=float), y, u)


# -- per-step divergences along given trajectories -----------------------------------


def transition_log_densities(models, batch: TrajectoryBatch) -> np.ndarray:
    """log P_i(Y_{t+1} | history) for every model i and step t, shape (B, N, T)."""
    B, T = len(batch), batch.horizon
    out = np.empty((B, len(models), T))
    ys, us = batch.outputs, batch.inputs
    for i, m in enumerate(models):
        if m.kind == M.TABULAR:
            with np.errstate(divide="ignore"):
                out[:, i] = np.log(m.transition_table[ys[:, :-1], us, ys[:, 1:]])
        else:
            r = ys[:, 1:] - m.next_mean(ys[:, :-1], us)
            n = r.shape[-1]
            out[:, i] = -0.5 * (n * math.log(2 * math.pi * m.noise_variance) + (r * r).sum(-1) / m.noise_variance)
    return out


def trajectory_step_divergences(
    models, true_index: int, batch: TrajectoryBatch, aux: AuxiliaryKernelSpec
) -> np.ndarray:
    """Per-trajectory divergence terms (B, T) for trajectories drawn from models[true_index].

    Closed-form conditional KL for every kind except the Gaussian mixture,
    whose terms are the sampled log-ratio log p(Y_{t+1}|h) - log q(Y_{t+1}|h).
    Tabular mixtures use the exact posterior-weighted pmf.
    """
    p = models[true_index]
    T = batch.horizon
    ys, us = batch.outputs, batch.inputs
    if aux.kind == MIXTURE:
        ld = transition_log_densities(models, batch)
        prior = np.concatenate([np.zeros((len(batch), len(models), 1)), np.cumsum(ld, axis=2)[:, :, :-1]], axis=2)
        if p.kind == M.TABULAR:
            tables = np.stack([m.transition_table for m in models])
            out = np.empty((len(batch), T))
            for k in range(T):
                w = np.exp(prior[:, :, k] - logsumexp(prior[:, :, k], axis=1, keepdims=True))
                rows = tables[:, ys[:, k], us[:, k]]  # (N, B, S)
                q = np.einsum("bn,nbs->bs", w, rows)
                out[:, k] = categorical_kl(rows[true_index], q)
            return out
        with np.errstate(invalid="ignore"):
            log_q = logsumexp(prior + ld, axis=1) - logsumexp(prior, axis=1)
        return ld[:, true_index] - log_q
    if p.kind == M.TABULAR:
        rows_p = p.transition_table[ys[:, :-1], us]  # (B, T, S)
        if aux.kind == NOMINAL:
            rows_q = aux.nominal.transition_table[ys[:, :-1], us]
        elif aux.kind == FIXED_UNIFORM:
            rows_q = np.full_like(rows_p, 1.0 / p.alphabet_size)
        else:
            rows_q = np.stack([_plug_in_rows(aux, p, batch, k + 1) for k in range(T)], axis=1)
        return categorical_kl(rows_p, rows_q)
    mean_p = p.next_mean(ys[:, :-1], us)
    if aux.kind == NOMINAL:
        return gaussian_kl(mean_p, aux.nominal.next_mean(ys[:, :-1], us), p.noise_variance)
    if aux.kind == FIXED_GAUSSIAN:
        return gaussian_kl(mean_p, np.zeros_like(mean_p), p.noise_variance, aux.variance)
    mean_q = np.stack([_plug_in_means(aux, p, batch, k + 1) for k in range(T)], axis=1)
    return gaussian_kl(mean_p, mean_q, p.noise_variance)


# -- exact tabular per-step divergences ----------------------------------------------


def exact_step_divergences(models, controller: M.ControllerPolicy, aux: AuxiliaryKernelSpec, horizon: int) -> np.ndarray:
    """E_i D(P_{i,t} || Q_t) for every model i and step t by enumeration, shape (N, T)."""
    models = TB._check_family(models)
    _check_aux(aux, models)
    N = len(models)
    tables = np.stack([m.transition_table for m in models])
    out = np.zeros((N, horizon))
    for k in range(horizon):
        ys, us, cp = TB.enumerate_histories(models, controller, k + 1, k + 1, N)
        P = TB.history_probabilities(models, ys, us, cp)  # (N, H)
        y, u = ys[:, -1], us[:, -1]
        rows = tables[:, y, u]  # (N, H, S)
        if aux.kind == MIXTURE:
            mass = P.sum(0)
            w = P / np.where(mass > 0, mass, 1.0)
            q = np.einsum("nh,nhs->hs", w, rows)
        elif aux.kind == NOMINAL:
            q = aux.nominal.transition_table[y, u]
        elif aux.kind == FIXED_UNIFORM:
            q = np.full(rows.shape[1:], 1.0 / rows.shape[-1])
        else:
            batch = TrajectoryBatch(ys, us[:, :k], None, None, np.zeros(len(ys), dtype=np.uint64))
            # identify on the k observed transitions; the current (y, u) come from ys/us directly
            est = ID.identify(aux.schedule, batch, models[0], upto=k)
            ident = aux.schedule.at_step(k)
            if ident.packing_valued and ident.packing.models is not None:
                ptab = np.stack([m.transition_table for m in ident.packing.models])
                q = ptab[est.indices, y, u]
            else:
                q = np.stack([aux.family.model(pt).transition_table[a, b] for pt, a, b in zip(est.points, y, u)])
        for i in range(N):
            live = P[i] > 0
            if np.any(live):
                out[i, k] = float(P[i, live] @ categorical_kl(rows[i, live], q[live]))
    return out


@dataclass(frozen=True)
class DivergenceSum:
    per_step: list
    total: float
    total_std_error: float
    exact: bool

    def to_dict(self) -> dict:
        return {
            "per_step": [{"t": t + 1, "estimate": e, "std_error": s} for t, (e, s) in enumerate(self.per_step)],
            "total": self.total,
            "total_std_error": self.total_std_error,
            "exact": self.exact,
        }


def _use_exact(models, exact: Optional[bool]) -> bool:
    tab = models[0].kind == M.TABULAR
    if exact and not tab:
        raise TypeError("exact evaluation is available for tabular models only")
    return tab if exact is None else exact


def divergence_sum(
    packing: E.PackingSet,
    controller: M.ControllerPolicy,
    aux: AuxiliaryKernelSpec,
    horizon: int,
    trials: int = 10_000,
    seed: int = 0,
    workers: int = 1,
    exact: Optional[bool] = None,
) -> DivergenceSum:
    """sum_t D(P_{Y_t | history, W} || Q_t | P_{history, W}) with W uniform on the packing.

    Tabular packings are enumerated exactly by default.  Otherwise trial j
    draws W_j uniformly, samples a trajectory under theta_{W_j} and records
    the per-step terms.
    """
    models = packing.models
    if models is None:
        raise ValueError("packing has no models attached")
    _check_aux(aux, models)
    if _use_exact(models, exact):
        per = exact_step_divergences(models, controller, aux, horizon).mean(0)
        return DivergenceSum([(float(v), 0.0) for v in per], float(per.sum()), 0.0, True)
    if trials < 2:
        raise ValueError("trials must be >= 2")
    seeds = trial_seeds(seed, trials)
    labels = np.random.default_rng(mix64(seed, trials)).integers(len(models), size=trials)
    vals = np.empty((trials, horizon))
    for i, m in enumerate(models):
        sel = np.flatnonzero(labels == i)
        if len(sel):
            batch = simulate(m, controller, horizon, seeds[sel], workers)
            vals[sel] = trajectory_step_divergences(models, i, batch, aux)
    if not np.all(np.isfinite(vals)):
        raise AbsoluteContinuityError("auxiliary kernel is not absolutely continuous along a sampled history")
    means, ses = mean_and_se(vals)
    total, total_se = mean_and_se(vals.sum(1))
    per = [(float(a), float(b)) for a, b in zip(np.atleast_1d(means), np.atleast_1d(ses))]
    return DivergenceSum(per, float(total), float(total_se), False)


def mutual_information_exact(packing: E.PackingSet, controller: M.ControllerPolicy, horizon: int) -> float:
    """I(W; Z^T) in nats with W uniform, by enumerating complete trajectories."""
    _, P = TB.enumerate_paths(packing.models, controller, horizon)
    N = len(P)
    mix = P.mean(0)
    total = 0.0
    for i in range(N):
        live = P[i] > 0
        total += float(P[i, live] @ (np.log(P[i, live]) - np.log(mix[live])))
    return max(total / N, 0.0)


# -- the meta-theorem --------------------------------------------------------------


@dataclass(frozen=True)
class BoundReport:
    lhs: float
    rhs: float
    slack: float
    verdict: str
    per_step: list
    lhs_components: dict
    rhs_components: dict
    std_error: float
    exact: bool
    extras: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = {
            "lhs": self.lhs,
            "rhs": self.rhs,
            "slack": self.slack,
            "verdict": self.verdict,
            "per_step": [{"t": t + 1, "estimate": e, "std_error": s} for t, (e, s) in enumerate(self.per_step)],
            "lhs_components": dict(self.lhs_components),
            "rhs_components": dict(self.rhs_components),
            "std_error": self.std_error,
            "exact": self.exact,
        }
        d.update(self.extras)
        return d


def verdict_for(slack: float, std_error: float, exact: bool) -> str:
    if exact:
        return HOLDS if slack >= -EXACT_TOL else VIOLATED
    if slack >= 0:
        return HOLDS
    return MARGINAL if slack >= -3.0 * std_error else VIOLATED


def _check_packing_valued(identifier: ID.Identifier, packing: E.PackingSet) -> None:
    for ident in (identifier.schedule or (identifier,)) if identifier.kind == ID.PLUG_IN else (identifier,):
        pk = ident.packing
        ok = ident.packing_valued and (
            pk is packing
            or (len(pk) == len(packing) and np.array_equal(np.asarray(pk.points), np.asarray(packing.points)))
        )
        if not ok:
            raise ValueError("identifier must take values in the packing")


def verify_meta_theorem(
    packing: E.PackingSet,
    controller: M.ControllerPolicy,
    identifier: ID.Identifier,
    aux: AuxiliaryKernelSpec,
    horizon: int,
    trials: int = 10_000,
    seed: int = 0,
    workers: int = 1,
    exact: Optional[bool] = None,
) -> BoundReport:
    """Both sides of  log N * min_i P_i(theta_hat_T = theta_i) <= sum_t D_t + log 2."""
    models = packing.models
    if models is None:
        raise ValueError("packing has no models attached")
    _check_packing_valued(identifier, packing)
    use_exact = _use_exact(models, exact)
    N = len(packing)
    if use_exact:
        rep = ID.exact_tabular_report(packing, controller, identifier, horizon)
        succ_se = 0.0
    else:
        rep = ID.empirical_id_report(packing, controller, identifier, horizon, trials, mix64(seed, 1), workers)
        p = rep.max_error_prob
        succ_se = math.sqrt(p * (1.0 - p) / trials)
    ds = divergence_sum(packing, controller, aux, horizon, trials, mix64(seed, 2), workers, use_exact)
    H = math.log(N)
    lhs = H * rep.min_success_prob
    rhs = ds.total + LOG2
    slack = rhs - lhs
    se = math.hypot(ds.total_std_error, H * succ_se)
    return BoundReport(
        lhs=lhs,
        rhs=rhs,
        slack=slack,
        verdict=verdict_for(slack, se, use_exact),
        per_step=ds.per_step,
        lhs_components={"entropy_nats": H, "min_success_prob": rep.min_success_prob},
        rhs_components={"divergence_total": ds.total, "divergence_std_error": ds.total_std_error, "log2": LOG2},
        std_error=se,
        exact=use_exact,
        extras={"aux_kind": aux.kind, "num_hypotheses": N, "horizon": horizon},
    )


# -- critical-separation floor ----------------------------------------------------------


@dataclass(frozen=True)
class Theorem2Result:
    deltas: list
    delta_std_errors: list
    budget: float
    critical: E.CriticalSeparation
    sigma_T: Optional[float]
    asserted_floor: Optional[float]
    exact: bool
    curve: E.EntropyCurve = field(repr=False, default=None)

    def to_dict(self) -> dict:
        return {
            "deltas": list(self.deltas),
            "delta_std_errors": list(self.delta_std_errors),
            "budget": self.budget,
            "target_entropy": self.critical.target,
            "separation_exists": self.critical.exists,
            "sigma_T": self.sigma_T,
            "bracket": None if self.critical.bracket is None else list(self.critical.bracket),
            "asserted_floor": self.asserted_floor,
            "exact": self.exact,
            "reason": self.critical.reason,
        }


def space_packing(space: E.MetricSpaceSpec, family: M.ModelFamily) -> E.PackingSet:
    """The whole candidate set as a (possibly unseparated) packing with models."""
    return E.PackingSet(space.candidates, 0.0, space.distance, False, family.models(space.candidates))


def plug_in_deltas(
    models,
    controller: M.ControllerPolicy,
    plug_in: ID.Identifier,
    horizon: int,
    trials: int = 10_000,
    seed: int = 0,
    workers: int = 1,
    exact: Optional[bool] = None,
    family: Optional[M.ModelFamily] = None,
):
    """delta_t = max_i E_i D(P_{theta_i,t} || P_{theta_hat_{t-1},t}).

    Exact on tabular families; otherwise the per-model Monte-Carlo mean plus
    three standard errors.  Returns ``(deltas, std_errors, exact)``.
    """
    aux = plug_in_aux(plug_in, family)
    if _use_exact(models, exact):
        d = exact_step_divergences(models, controller, aux, horizon)
        return d.max(0), np.zeros(horizon), True
    if trials < 2:
        raise ValueError("trials must be >= 2")
    ups, ses = [], []
    for i, m in enumerate(models):
        batch = simulate(m, controller, horizon, trial_seeds(mix64(seed, i), trials), workers)
        vals = trajectory_step_divergences(models, i, batch, aux)
        mu, se = mean_and_se(vals)
        ups.append(mu + 3.0 * se)
        ses.append(se)
    ups, ses = np.array(ups), np.array(ses)
    best = np.argmax(ups, axis=0)
    cols = np.arange(horizon)
    return ups[best, cols], ses[best, cols], False


def theorem2_pipeline(
    space: E.MetricSpaceSpec,
    family: M.ModelFamily,
    controller: M.ControllerPolicy,
    plug_in: ID.Identifier,
    horizon: int,
    trials: int = 10_000,
    seed: int = 0,
    workers: int = 1,
    epsilons=None,
    exact: Optional[bool] = None,
) -> Theorem2Result:
    """Divergence budget of a plug-in schedule, critical separation and floor sigma_T / 4.

    The uncertainty set is the candidate set of ``space``.  Without an
    explicit epsilon grid, small sets use exact packing numbers at every
    distinct pairwise distance and larger ones a greedy curve on a log grid.
    """
    models = family.models(space.candidates)
    deltas, ses, used_exact = plug_in_deltas(models, controller, plug_in, horizon, trials, seed, workers, exact, family)
    budget = float(np.sum(deltas))
    if epsilons is None and len(space) <= 40:
        curve = E.exact_entropy_curve(space)
    else:
        if epsilons is None:
            diam = max(space.diameter(), 1e-12)
            epsilons = np.geomspace(diam / 64, diam, 25)
        curve = E.entropy_curve(space, epsilons)
    crit = E.critical_separation(curve, budget)
    sigma = crit.sigma if crit.exists else None
    return Theorem2Result(
        deltas=[float(x) for x in deltas],
        delta_std_errors=[float(x) for x in ses],
        budget=budget,
        critical=crit,
        sigma_T=sigma,
        asserted_floor=None if sigma is None else sigma / 4.0,
        exact=used_exact,
        curve=curve,
    )


# -- entropy cap from identification rates -------------------------------------------


@dataclass(frozen=True)
class Theorem3Result:
    betas: list
    raw_betas: list
    K: float
    k: float
    cap: int
    scale: float
    entropy_at_scale: float
    holds: bool

    def to_dict(self) -> dict:
        return {
            "betas": list(self.betas),
            "raw_betas": list(self.raw_betas),
            "K": self.K,
            "k": self.k,
            "cap": self.cap,
            "scale": self.scale,
            "entropy_at_scale": self.entropy_at_scale,
            "holds": self.holds,
        }


def identification_rates(
    space: E.MetricSpaceSpec,
    family: M.ModelFamily,
    controller: M.ControllerPolicy,
    schedule: ID.Identifier,
    horizon: int,
    k: float = 2.0,
    trials: int = 2_000,
    seed: int = 0,
    workers: int = 1,
) -> np.ndarray:
    """Upper estimates of sup_theta E rho^k(theta_hat_t, theta), t = 0..T (mean + 3 SE)."""
    models = family.models(space.candidates)
    raw = np.zeros(horizon + 1)
    for i, m in enumerate(models):
        batch = simulate(m, controller, horizon, trial_seeds(mix64(seed, i), trials), workers)
        truth = space.candidates[i]
        for t in range(horizon + 1):
            est = ID.identify(schedule, batch, m, upto=t).points
            err = E.distances(space.distance, truth, est.reshape((len(est),) + np.shape(truth))) ** k
            mu, se = mean_and_se(err)
            raw[t] = max(raw[t], mu + 3.0 * se)
    return raw


def theorem3_pipeline(
    space: E.MetricSpaceSpec,
    family: M.ModelFamily,
    controller: M.ControllerPolicy,
    schedule: ID.Identifier,
    horizon: int,
    k: float = 2.0,
    trials: int = 2_000,
    seed: int = 0,
    workers: int = 1,
    packing_seeds: int = 8,
) -> Theorem3Result:
    """Entropy cap from measured identification rates on the nonlinear family.

    beta_t is the running minimum of the measured rates (an identifier may
    always reuse an earlier estimate), and K the family's smoothness constant.
    """
    if family.kind != M.NONLINEAR:
        raise TypeError("the entropy-cap pipeline uses the scalar nonlinear family")
    raw = identification_rates(space, family, controller, schedule, horizon, k, trials, seed, workers)
    betas = np.minimum.accumulate(np.maximum(raw, 1e-300))
    K = family.model(space.candidates[0]).smoothness_constant()
    cap, scale = E.entropy_cap_from_rates(K, k, betas, horizon)
    if len(space) <= 40:
        size = E.exact_packing_number(space, scale)
    else:
        size = max(len(E.greedy_packing(space, scale, s)) for s in range(packing_seeds))
    H = math.log(size)
    return Theorem3Result(
        betas=[float(b) for b in betas],
        raw_betas=[float(b) for b in raw],
        K=float(K),
        k=float(k),
        cap=int(cap),
        scale=float(scale),
        entropy_at_scale=H,
        holds=H <= cap,
    )
