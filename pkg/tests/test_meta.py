import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from fundlim import entropy as E
from fundlim import identification as I
from fundlim import meta as MB
from fundlim.kernel import models as M
from fundlim.serialize import dumps

from scenarios import random_linear_packing, tabular_scenarios, theorem2_tabular_scenarios

LOG2 = math.log(2.0)


def linear_packing(values):
    fam = M.ModelFamily(M.LINEAR)
    pts = np.asarray(values, dtype=float).reshape(-1, 1, 1)
    pk = E.PackingSet(pts, 0.0, E.SPECTRAL).with_models(fam)
    sep = pk.min_pairwise_distance() if len(pts) > 1 else 1.0
    return E.PackingSet(pts, sep, E.SPECTRAL, False, pk.models)


def aux_kinds_for(pk, fam):
    ml = I.plug_in_identifier(I.maximum_likelihood_identifier(pk), 0)
    return [
        MB.mixture_aux(),
        MB.nominal_aux(pk.models[0]),
        MB.nominal_aux(fam.model(np.full(pk.points.shape[1], 0.5))),
        MB.uniform_aux(),
        MB.plug_in_aux(ml),
    ]


# -- Fano ----------------------------------------------------------------------------------------


def test_fano_examples():
    assert MB.fano_lower_bound(4, 0.0) == pytest.approx(0.5, abs=1e-15)
    assert MB.fano_lower_bound(2, 0.0) == 0.0
    assert MB.fano_lower_bound(16, LOG2) == pytest.approx(0.5, abs=1e-15)


def test_fano_rejects_small_n():
    with pytest.raises(ValueError):
        MB.fano_lower_bound(1, 0.0)


@settings(max_examples=200, deadline=None)
@given(st.integers(2, 1000), st.floats(0, 10), st.floats(0, 10))
def test_fano_monotone(N, a, b):
    lo, hi = sorted((a, b))
    assert MB.fano_lower_bound(N, hi) <= MB.fano_lower_bound(N, lo)
    if lo < math.log(N) - LOG2:
        assert MB.fano_lower_bound(N, lo) <= MB.fano_lower_bound(N + 1, lo)
    assert 0.0 <= MB.fano_lower_bound(N, lo) <= 1.0


# -- divergence sums -------------------------------------------------------------------------------


def test_identical_models_nominal_zero():
    m = M.linear_gaussian([[0.3]])
    pk = E.PackingSet(np.array([[[0.3]], [[0.3]]]), 0.0, E.SPECTRAL, False, (m, m))
    ds = MB.divergence_sum(pk, M.zero_controller(), MB.nominal_aux(m), 4, trials=200, seed=1)
    assert ds.total == 0.0 and ds.total_std_error == 0.0


def test_singleton_nominal_zero():
    pk = linear_packing([0.7])
    ds = MB.divergence_sum(pk, M.zero_controller(), MB.nominal_aux(pk.models[0]), 5, trials=200, seed=1)
    assert ds.total == 0.0


def test_fixed_gaussian_moment_oracle():
    pk = linear_packing([-0.5, 0.5])
    ds = MB.divergence_sum(pk, M.zero_controller(), MB.fixed_gaussian_aux(1.0), 2, trials=100_000, seed=3)
    # Y_1 = 0 gives no divergence at the first step; E (a Y_2)^2 / 2 = 0.25 / 2 at the second
    assert ds.per_step[0][0] == 0.0
    assert abs(ds.total - 0.125) <= 3 * ds.total_std_error
    assert not ds.exact


def gaussian_pair_mixture_information(a, b):
    """I(W; Y_3 | Y_2) for Y_3 ~ N(a_W y, 1), W uniform on {a, b}, y ~ N(0, 1)."""

    def pdf(z, m):
        return math.exp(-0.5 * (z - m) ** 2) / math.sqrt(2 * math.pi)

    def inner(y):
        def integrand(z, mean):
            p = pdf(z, mean)
            mix = 0.5 * (pdf(z, a * y) + pdf(z, b * y))
            return p * math.log(p / mix) if p > 0 else 0.0

        return 0.5 * sum(integrate.quad(integrand, m - 12, m + 12, args=(m,), epsabs=1e-12)[0] for m in (a * y, b * y))

    return integrate.quad(lambda y: pdf(y, 0.0) * inner(y), -10, 10, epsabs=1e-10)[0]


def test_gaussian_mixture_matches_quadrature_information():
    pk = linear_packing([-0.5, 0.5])
    ds = MB.divergence_sum(pk, M.zero_controller(), MB.mixture_aux(), 2, trials=40_000, seed=9)
    oracle = gaussian_pair_mixture_information(-0.5, 0.5)
    assert abs(ds.total - oracle) <= 3 * ds.total_std_error


def test_absolute_continuity_enforced_for_tabular():
    fam = M.ModelFamily(M.TABULAR)
    pk = E.PackingSet(np.array([[0.3, 0.6], [0.4, 0.5]]), 0.1, E.EUCLIDEAN, False,
                      (fam.model([0.3, 0.6]), fam.model([0.4, 0.5])))
    with pytest.raises(ValueError):
        MB.divergence_sum(pk, M.zero_controller(), MB.nominal_aux(M.binary_tabular([0.0, 0.0])), 2)


def test_frequency_plug_in_can_lose_support():
    # empirical frequencies hit 0 or 1 on short records, so the plug-in kernel
    # stops dominating the true one and the sum is refused rather than infinite
    fam = M.ModelFamily(M.TABULAR)
    pk = E.PackingSet(np.array([[0.2, 0.7], [0.6, 0.35]]), 0.5, E.EUCLIDEAN).with_models(fam)
    plug = I.plug_in_identifier(I.least_squares_identifier(), np.array([0.5, 0.5]))
    with pytest.raises(MB.AbsoluteContinuityError):
        MB.divergence_sum(pk, M.zero_controller(), MB.plug_in_aux(plug, fam), 3)


def test_divergence_sum_json_fields():
    pk = linear_packing([-0.5, 0.5])
    ds = MB.divergence_sum(pk, M.zero_controller(), MB.fixed_gaussian_aux(1.0), 3, trials=50, seed=0)
    doc = json.loads(dumps(ds.to_dict()))
    assert [r["t"] for r in doc["per_step"]] == [1, 2, 3]
    assert set(doc["per_step"][0]) == {"t", "estimate", "std_error"}


# -- mutual information -----------------------------------------------------------------------------


def test_mutual_information_identical_models():
    m = M.binary_tabular([0.3, 0.6])
    pk = E.PackingSet(np.zeros((3, 2)), 0.0, E.EUCLIDEAN, False, (m, m, m))
    assert MB.mutual_information_exact(pk, M.zero_controller(), 3) == 0.0


def test_mutual_information_disjoint_models():
    tables = [np.eye(3)[[k, k, k]] for k in range(3)]
    models = tuple(M.tabular(t, initial_probs=[1.0, 0.0, 0.0]) for t in tables)
    pk = E.PackingSet(np.eye(3), 1.0, E.EUCLIDEAN, False, models)
    assert MB.mutual_information_exact(pk, M.zero_controller(), 1) == pytest.approx(math.log(3), abs=1e-15)


def test_mutual_information_equals_mixture_sum():
    fam = M.ModelFamily(M.TABULAR)
    pk = E.PackingSet(np.array([[0.2, 0.7], [0.6, 0.35]]), 0.5, E.EUCLIDEAN).with_models(fam)
    mi = MB.mutual_information_exact(pk, M.zero_controller(), 2)
    ds = MB.divergence_sum(pk, M.zero_controller(), MB.mixture_aux(), 2)
    assert ds.exact
    assert abs(mi - ds.total) <= 1e-12


def brute_force_information(models, T):
    """I(W; Z^T) by summing over all binary output sequences with the zero input."""
    import itertools

    N = len(models)
    total = 0.0
    for ys in itertools.product((0, 1), repeat=T + 1):
        ps = []
        for m in models:
            p = m.initial_probs[ys[0]]
            for t in range(T):
                p *= m.transition_table[ys[t], 0, ys[t + 1]]
            ps.append(p)
        mix = sum(ps) / N
        total += sum(p * math.log(p / mix) for p in ps if p > 0) / N
    return total


def test_mutual_information_against_brute_force():
    for pk, fam, ctrl, T in tabular_scenarios(15, seed=5):
        if ctrl.kind != M.ZERO:
            continue
        assert MB.mutual_information_exact(pk, ctrl, T) == pytest.approx(brute_force_information(pk.models, T), abs=1e-12)


def test_every_aux_dominates_information():
    for pk, fam, ctrl, T in tabular_scenarios(20, seed=17):
        mi = MB.mutual_information_exact(pk, ctrl, T)
        for aux in aux_kinds_for(pk, fam):
            ds = MB.divergence_sum(pk, ctrl, aux, T)
            assert ds.total >= mi - 1e-12, aux.kind
            if aux.kind == MB.MIXTURE:
                assert abs(ds.total - mi) <= 1e-12


def test_optimal_error_above_fano():
    for pk, fam, ctrl, T in tabular_scenarios(30, seed=23):
        mi = MB.mutual_information_exact(pk, ctrl, T)
        opt = I.exhaustive_optimal_error(pk, ctrl, T)
        assert opt.bayes_error_prob >= MB.fano_lower_bound(len(pk), mi) - 1e-12


# -- meta-theorem verifier --------------------------------------------------------------------------


def test_verify_singleton_holds():
    pk = linear_packing([0.4])
    rep = MB.verify_meta_theorem(pk, M.zero_controller(), I.nearest_identifier(pk), MB.fixed_gaussian_aux(1.0), 3,
                                 trials=100, seed=0)
    assert rep.lhs == 0.0 and rep.verdict == MB.HOLDS


def test_verify_identical_pair_holds():
    m = M.binary_tabular([0.3, 0.6])
    pk = E.PackingSet(np.array([[0.0, 0.0], [1.0, 1.0]]), 1.0, E.EUCLIDEAN, False, (m, m))
    rep = MB.verify_meta_theorem(pk, M.zero_controller(), I.maximum_likelihood_identifier(pk), MB.mixture_aux(), 2)
    assert rep.lhs_components["min_success_prob"] <= 0.5
    assert rep.lhs <= 0.5 * LOG2 < LOG2 <= rep.rhs
    assert rep.verdict == MB.HOLDS


def test_verify_tabular_four_models_exact():
    fam = M.ModelFamily(M.TABULAR)
    pts = np.array([[0.1, 0.2], [0.8, 0.3], [0.3, 0.9], [0.75, 0.8]])
    pk = E.PackingSet(pts, 0.0, E.EUCLIDEAN).with_models(fam)
    rep = MB.verify_meta_theorem(pk, M.zero_controller(), I.maximum_likelihood_identifier(pk), MB.mixture_aux(), 2)
    assert rep.exact and rep.std_error == 0.0
    assert rep.slack == rep.rhs - rep.lhs
    assert rep.slack >= -1e-12 and rep.verdict == MB.HOLDS
    assert rep.lhs == pytest.approx(math.log(4) * rep.lhs_components["min_success_prob"], abs=0)


def test_verify_rejects_non_packing_identifier():
    pk = linear_packing([-0.5, 0.5])
    with pytest.raises(ValueError):
        MB.verify_meta_theorem(pk, M.zero_controller(), I.least_squares_identifier(), MB.fixed_gaussian_aux(1.0), 3,
                               trials=10)
    other = linear_packing([-0.5, 0.25])
    with pytest.raises(ValueError):
        MB.verify_meta_theorem(pk, M.zero_controller(), I.nearest_identifier(other), MB.fixed_gaussian_aux(1.0), 3,
                               trials=10)


def test_verdict_rules():
    assert MB.verdict_for(-1e-13, 0.0, True) == MB.HOLDS
    assert MB.verdict_for(-1e-11, 0.0, True) == MB.VIOLATED
    assert MB.verdict_for(0.0, 0.1, False) == MB.HOLDS
    assert MB.verdict_for(-0.29, 0.1, False) == MB.MARGINAL
    assert MB.verdict_for(-0.31, 0.1, False) == MB.VIOLATED


def test_bound_report_json():
    pk = linear_packing([-0.5, 0.5])
    rep = MB.verify_meta_theorem(pk, M.zero_controller(), I.nearest_identifier(pk), MB.fixed_gaussian_aux(1.0), 3,
                                 trials=200, seed=4)
    doc = json.loads(dumps(rep.to_dict()))
    for key in ("lhs", "rhs", "slack", "verdict", "per_step"):
        assert key in doc
    assert doc["verdict"] in (MB.HOLDS, MB.MARGINAL, MB.VIOLATED)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000))
def test_verify_exact_never_violated(seed):
    pk, fam, ctrl, T = tabular_scenarios(1, seed=seed)[0]
    for aux in aux_kinds_for(pk, fam):
        rep = MB.verify_meta_theorem(pk, ctrl, I.maximum_likelihood_identifier(pk), aux, T)
        assert rep.verdict == MB.HOLDS


def test_verify_monte_carlo_small():
    rng = np.random.default_rng(12)
    pk, fam = random_linear_packing(rng, 2, 4)
    rep = MB.verify_meta_theorem(pk, M.zero_controller(), I.nearest_identifier(pk), MB.fixed_gaussian_aux(1.0), 8,
                                 trials=2000, seed=5)
    assert rep.verdict != MB.VIOLATED


# -- critical-separation floor -----------------------------------------------------------------


def test_theorem2_zero_budget_instance():
    space, fam, ctrl, T = theorem2_tabular_scenarios()[-1]
    pk = MB.space_packing(space, fam)
    plug = I.plug_in_identifier(I.maximum_likelihood_identifier(pk), 4)
    res = MB.theorem2_pipeline(space, fam, ctrl, plug, T)
    assert res.exact and res.deltas == [0.0] * T and res.budget == 0.0
    assert res.critical.target == 2
    assert res.critical.exists
    # sigma is the largest separation with log-packing number >= 2
    eps = E.distinct_distances(space)
    ok = [e for e in eps if math.log(E.exact_packing_number(space, e)) >= 2]
    assert res.sigma_T == max(ok)
    assert res.asserted_floor == res.sigma_T / 4


def test_theorem2_singleton():
    space = E.vector_points(np.array([[0.4, 0.6]]))
    fam = M.ModelFamily(M.TABULAR)
    plug = I.plug_in_identifier(I.constant_identifier(0, MB.space_packing(space, fam)), 0)
    res = MB.theorem2_pipeline(space, fam, M.zero_controller(), plug, 3)
    assert res.deltas == [0.0, 0.0, 0.0]
    assert not res.critical.exists and res.asserted_floor is None


def test_theorem2_floor_below_exhaustive_minimax():
    checked = 0
    for space, fam, ctrl, T in theorem2_tabular_scenarios():
        pk = MB.space_packing(space, fam)
        for base in (I.maximum_likelihood_identifier(pk), I.nearest_identifier(pk)):
            plug = I.plug_in_identifier(base, len(pk) // 2)
            res = MB.theorem2_pipeline(space, fam, ctrl, plug, T)
            if not res.critical.exists:
                continue
            opt = I.exhaustive_optimal_error(pk, ctrl, T)
            assert opt.minimax_metric_error >= res.asserted_floor
            checked += 1
    assert checked > 0


def test_theorem2_gaussian_deltas_are_upper_estimates():
    pts = np.array([-0.5, 0.0, 0.5]).reshape(-1, 1, 1)
    space = E.MetricSpaceSpec(E.SPECTRAL, pts, 1)
    fam = M.ModelFamily(M.LINEAR)
    plug = I.plug_in_identifier(I.least_squares_identifier(I.ORDINARY), np.zeros((1, 1)))
    res = MB.theorem2_pipeline(space, fam, M.zero_controller(), plug, 4, trials=4000, seed=2)
    assert not res.exact
    assert all(d >= 0 for d in res.deltas)
    assert all(s > 0 for s in res.delta_std_errors[1:])
