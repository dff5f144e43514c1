"""Experiment orchestration: config -> module calls -> RunRecord."""
from __future__ import annotations

import datetime as dt
import os
from dataclasses import dataclass
from typing import Optional

import numpy as np

import fundlim
from fundlim import control as C
from fundlim import entropy as E
from fundlim import identification as ID
from fundlim import meta as MT
from fundlim.config import ExperimentConfig, validate_config
from fundlim.kernel import models as M
from fundlim.kernel.divergence import expected_divergence
from fundlim.seeding import mix64
from fundlim.serialize import blob_hash, dumps

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_MARGINAL = 2
EXIT_VIOLATED = 3


@dataclass
class RunRecord:
    config: dict
    config_hash: str
    started_at: str
    finished_at: str
    version: str
    payload: dict
    verdicts: list
    exit_code: int

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "config_hash": self.config_hash,
            "started_at": self.started_at,
            "finished_at": self.finished_at,
            "version": self.version,
            "payload": self.payload,
            "verdicts": self.verdicts,
            "exit_code": self.exit_code,
        }

    def payload_text(self) -> str:
        return dumps(self.payload)


def exit_code_for(verdicts) -> int:
    if MT.VIOLATED in verdicts:
        return EXIT_VIOLATED
    if MT.MARGINAL in verdicts:
        return EXIT_MARGINAL
    return EXIT_OK


# -- building blocks from the config ------------------------------------------------------


def family_for(cfg: ExperimentConfig) -> M.ModelFamily:
    c0 = cfg.initial_second_moment / cfg.dimension
    if cfg.model_kind == M.LINEAR:
        return M.ModelFamily(M.LINEAR, cfg.noise_variance, c0)
    if cfg.model_kind == M.NONLINEAR:
        return M.ModelFamily(M.NONLINEAR, cfg.noise_variance, c0, basis=tuple(cfg.basis))
    return M.ModelFamily(M.TABULAR)


def space_for(cfg: ExperimentConfig) -> E.MetricSpaceSpec:
    """The uncertainty set: explicit points, or a grid over the family's ball."""
    if cfg.points is not None:
        pts = np.asarray(cfg.points, dtype=float)
        if cfg.model_kind == M.LINEAR:
            n = cfg.dimension
            return E.MetricSpaceSpec(E.SPECTRAL, pts.reshape(-1, n, n), n * n)
        if cfg.model_kind == M.NONLINEAR and len(cfg.basis) == 1:
            return E.scalar_points(pts.reshape(-1))
        pts = pts.reshape(len(pts), -1)
        return E.vector_points(pts)
    if cfg.model_kind == M.LINEAR:
        return E.spectral_ball_grid(cfg.dimension, cfg.grid_radius, cfg.grid_resolution)
    if cfg.model_kind == M.NONLINEAR:
        if len(cfg.basis) == 1:
            ax = E._axis(cfg.grid_radius, cfg.grid_resolution)
            return E.scalar_points(ax)
        return E.euclidean_ball_grid(len(cfg.basis), cfg.grid_radius, cfg.grid_resolution)
    # binary chains: P(Y'=1 | y) on a grid inside (0, 1)
    ax = np.arange(cfg.grid_resolution, 1.0 - 1e-12, cfg.grid_resolution)
    pts = np.array([(a, b) for a in ax for b in ax])
    return E.vector_points(pts)


def packing_for(cfg: ExperimentConfig) -> E.PackingSet:
    """Explicit points are used as given; grids are greedily packed at ``separation``."""
    fam = family_for(cfg)
    space = space_for(cfg)
    if cfg.points is not None:
        return E.packing_from_models(fam.models(space.candidates), space.candidates, space.distance)
    return E.greedy_packing(space, cfg.separation, 0).with_models(fam)


def controller_for(cfg: ExperimentConfig) -> M.ControllerPolicy:
    kind = cfg.controller
    if kind == "zero":
        return M.zero_controller()
    if kind == "oracle":
        return M.oracle_controller()
    if kind == "linear_feedback":
        if cfg.gain is None:
            raise ValueError("gain: required for linear_feedback")
        n = cfg.dimension
        gain = np.asarray(cfg.gain, dtype=float)
        return M.linear_feedback(gain.reshape(n, n) if gain.size == n * n else gain.reshape(-1, n, n))
    if kind == "tabular_policy":
        if cfg.policy_table is None:
            raise ValueError("policy_table: required for tabular_policy")
        return M.tabular_policy(cfg.policy_table)
    return M.certainty_equivalence_controller(cfg.update_period, cfg.dither_amplitude, cfg.dither_seed)


def identifier_for(cfg: ExperimentConfig, packing: E.PackingSet) -> ID.Identifier:
    if cfg.identifier == "constant_guess":
        return ID.constant_identifier(min(cfg.initial_guess, len(packing) - 1), packing)
    if cfg.identifier == "nearest_least_squares":
        return ID.nearest_identifier(packing)
    return ID.maximum_likelihood_identifier(packing)


def aux_for(cfg: ExperimentConfig, packing: E.PackingSet, identifier: ID.Identifier) -> MT.AuxiliaryKernelSpec:
    if cfg.aux == "nominal_model":
        return MT.nominal_aux(packing.models[min(cfg.initial_guess, len(packing) - 1)])
    if cfg.aux == "fixed_gaussian_zero_mean":
        return MT.fixed_gaussian_aux(cfg.aux_variance)
    if cfg.aux == "fixed_uniform":
        return MT.uniform_aux()
    if cfg.aux == "plug_in_schedule":
        guess = min(cfg.initial_guess, len(packing) - 1)
        return MT.plug_in_aux(ID.plug_in_identifier(identifier, guess), family_for(cfg))
    return MT.mixture_aux()


def scenario_for(cfg: ExperimentConfig, packing: Optional[E.PackingSet] = None) -> C.ControlScenario:
    n = cfg.dimension
    if packing is not None:
        mats = packing.points
    elif cfg.points is not None:
        mats = np.asarray(cfg.points, dtype=float).reshape(-1, n, n)
    else:
        mats = np.eye(n)[None]
    return C.ControlScenario(
        n,
        cfg.noise_variance,
        mats,
        controller_for(cfg),
        cfg.pe_constant,
        cfg.pe_confidence,
        cfg.initial_second_moment,
        packing,
    )


def _is_tabular(cfg) -> bool:
    return cfg.model_kind == M.TABULAR


# -- experiments -----------------------------------------------------------------------------


def _packing_payload(pk: E.PackingSet) -> dict:
    return {
        "size": len(pk),
        "separation": pk.separation,
        "maximal": pk.maximal,
        "min_pairwise_distance": pk.min_pairwise_distance() if len(pk) > 1 else None,
        "entropy_nats": pk.entropy,
        "points": pk.points,
    }


def run_packing(cfg):
    space = space_for(cfg)
    curve = E.entropy_curve(space, cfg.epsilons, cfg.base_seed)
    pk = E.greedy_packing(space, cfg.separation, cfg.base_seed)
    payload = {
        "candidates": len(space),
        "curve": [{"epsilon": e, "entropy_nats": h, "packing_size": n} for e, h, n in curve.rows()],
        "raw_entropy": curve.raw_entropy,
        "packing": _packing_payload(pk),
    }
    if len(cfg.epsilons) >= 2:
        free = E.fit_entropy_curve(curve)
        payload["fit_free"] = {"intercept": free.intercept, "slope": free.slope, "residual": free.residual}
        dim = space.ambient_dim
        fixed = E.fit_entropy_curve(curve, slope=dim)
        payload["fit_fixed_slope"] = {"intercept": fixed.intercept, "slope": fixed.slope, "residual": fixed.residual}
    return payload, [], {"curve": curve}


def run_divergence(cfg):
    space = space_for(cfg)
    if len(space) < 2:
        raise ValueError("points: need two parameter points for a divergence")
    fam = family_for(cfg)
    p, q = fam.model(space.candidates[0]), fam.model(space.candidates[1])
    ctrl = controller_for(cfg)
    steps = []
    if _is_tabular(cfg):
        exact = MT.exact_step_divergences([p], ctrl, MT.nominal_aux(q), cfg.horizon)[0]
    for t in range(1, cfg.horizon + 2):
        if _is_tabular(cfg):
            est, se = (0.0 if t == 1 else float(exact[t - 2])), 0.0
        else:
            est, se = expected_divergence(p, q, ctrl, t, cfg.trials, mix64(cfg.base_seed, t), cfg.workers)
        steps.append({"t": t, "estimate": est, "std_error": se})
    return {"per_step": steps, "total": float(sum(s["estimate"] for s in steps))}, [], {}


def run_fano(cfg):
    return {
        "num_hypotheses": cfg.num_hypotheses,
        "mutual_info_nats": cfg.mutual_info,
        "bound": MT.fano_lower_bound(cfg.num_hypotheses, cfg.mutual_info),
    }, [], {}


def run_meta_verify(cfg):
    pk = packing_for(cfg)
    ident = identifier_for(cfg, pk)
    aux = aux_for(cfg, pk, ident)
    rep = MT.verify_meta_theorem(pk, controller_for(cfg), ident, aux, cfg.horizon, cfg.trials, cfg.base_seed, cfg.workers)
    payload = rep.to_dict()
    if _is_tabular(cfg) and len(pk) >= 2:
        mi = MT.mutual_information_exact(pk, controller_for(cfg), cfg.horizon)
        payload["mutual_information"] = mi
        payload["fano_bound"] = MT.fano_lower_bound(len(pk), mi)
    return payload, [rep.verdict], {}


def run_theorem2(cfg):
    space = space_for(cfg)
    fam = family_for(cfg)
    ctrl = controller_for(cfg)
    pk = E.PackingSet(space.candidates, 0.0, space.distance, False, fam.models(space.candidates))
    if _is_tabular(cfg):
        base = ID.maximum_likelihood_identifier(pk)
    else:
        base = ID.nearest_identifier(pk)
    plug = ID.plug_in_identifier(base, min(cfg.initial_guess, len(pk) - 1))
    res = MT.theorem2_pipeline(space, fam, ctrl, plug, cfg.horizon, cfg.trials, cfg.base_seed, cfg.workers)
    payload = res.to_dict()
    verdicts = []
    if _is_tabular(cfg) and res.sigma_T is not None:
        opt = ID.exhaustive_optimal_error(pk, ctrl, cfg.horizon)
        payload["minimax_metric_lower_bound"] = opt.minimax_metric_error
        ok = opt.minimax_metric_error >= res.asserted_floor - MT.EXACT_TOL
        payload["floor_holds"] = ok
        verdicts.append(MT.HOLDS if ok else MT.VIOLATED)
    return payload, verdicts, {"curve": res.curve}


def run_theorem3(cfg):
    if cfg.model_kind != M.NONLINEAR:
        raise ValueError("model_kind: theorem3 uses scalar_nonlinear_gaussian")
    space = space_for(cfg)
    fam = family_for(cfg)
    guess = np.zeros(len(cfg.basis))
    sched = ID.plug_in_identifier(ID.least_squares_identifier(), guess)
    res = MT.theorem3_pipeline(
        space, fam, controller_for(cfg), sched, cfg.horizon, cfg.rate_power, cfg.trials, cfg.base_seed, cfg.workers
    )
    return res.to_dict(), [MT.HOLDS if res.holds else MT.VIOLATED], {}


def run_identify(cfg):
    pk = packing_for(cfg)
    ctrl = controller_for(cfg)
    ident = identifier_for(cfg, pk)
    if _is_tabular(cfg):
        rep = ID.exact_tabular_report(pk, ctrl, ident, cfg.horizon)
        opt = ID.exhaustive_optimal_error(pk, ctrl, cfg.horizon)
        payload = {"report": rep.to_dict(), "optimal": opt.to_dict(), "exact": True}
    else:
        rep = ID.empirical_id_report(pk, ctrl, ident, cfg.horizon, cfg.trials, cfg.base_seed, cfg.workers)
        payload = {"report": rep.to_dict(), "exact": False}
    payload["packing"] = _packing_payload(pk)
    return payload, [], {}


def run_control_regret(cfg):
    sc = scenario_for(cfg)
    curves = [C.regret_curve(sc, i, cfg.horizons, cfg.trials, mix64(cfg.base_seed, i), cfg.workers) for i in range(len(sc))]
    return {"curves": [c.to_dict() for c in curves]}, [], {"regret_curves": curves}


def run_pe_check(cfg):
    sc = scenario_for(cfg)
    curves = [C.pe_curve(sc, i, cfg.horizons, cfg.trials, mix64(cfg.base_seed, i), cfg.workers) for i in range(len(sc))]
    return {"curves": [c.to_dict() for c in curves]}, [], {"pe_curves": curves}


def run_min_time(cfg):
    sc = scenario_for(cfg)
    n = cfg.dimension
    b_n = cfg.b_n if cfg.b_n is not None else C.packing_intercept(n)
    sweep = C.min_time_sweep(sc, cfg.epsilons, cfg.horizons, cfg.trials, cfg.base_seed, cfg.workers)
    bounds = [
        C.min_time_lower_bound(n, cfg.noise_variance, e, cfg.pe_constant, cfg.initial_second_moment, b_n)
        for e in sweep.epsilons
    ]
    consistent = [t is None or lb <= t for lb, t in zip(bounds, sweep.min_times)]
    payload = sweep.to_dict()
    payload.update({"b_n": b_n, "lower_bounds": bounds, "bound_consistent": consistent})
    return payload, [], {}


RUNNERS = {
    "packing": run_packing,
    "divergence": run_divergence,
    "fano": run_fano,
    "meta_verify": run_meta_verify,
    "theorem2": run_theorem2,
    "theorem3": run_theorem3,
    "identify": run_identify,
    "control_regret": run_control_regret,
    "pe_check": run_pe_check,
    "min_time": run_min_time,
}


def _now() -> str:
    return dt.datetime.now(dt.timezone.utc).isoformat(timespec="seconds")


def _write_csvs(cfg, extras) -> list:
    """CSV side files next to the JSON record; returns their paths."""
    if not cfg.output_path:
        return []
    stem, _ = os.path.splitext(cfg.output_path)
    written = []
    if "curve" in extras:
        path = stem + "_entropy.csv"
        extras["curve"].to_csv(path)
        written.append(path)
    for key, tag in (("regret_curves", "regret"), ("pe_curves", "pe")):
        for idx, c in enumerate(extras.get(key, [])):
            path = f"{stem}_{tag}_{idx}.csv"
            c.to_csv(path)
            written.append(path)
    return written


def run_experiment(config) -> RunRecord:
    """Run one experiment; writes the record to ``output_path`` when set."""
    cfg = config if isinstance(config, ExperimentConfig) else validate_config(config)
    cfg_dict = cfg.to_dict()
    started = _now()
    payload, verdicts, extras = RUNNERS[cfg.experiment](cfg)
    record = RunRecord(
        config=cfg_dict,
        config_hash=blob_hash(dumps(cfg_dict)),
        started_at=started,
        finished_at=_now(),
        version=fundlim.__version__,
        payload=payload,
        verdicts=verdicts,
        exit_code=exit_code_for(verdicts),
    )
    if cfg.output_path:
        with open(cfg.output_path, "w", encoding="utf-8") as fh:
            fh.write(dumps(record) + "\n")
        _write_csvs(cfg, extras)
    return record
