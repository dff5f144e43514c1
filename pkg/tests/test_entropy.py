import csv
import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fundlim import entropy as E


def brute_force_packing_number(points, dist, eps):
    """Largest eps-separated subset by trying every subset, largest first."""
    m = len(points)
    D = np.array([[dist(points[i], points[j]) for j in range(m)] for i in range(m)])
    for size in range(m, 0, -1):
        for sub in itertools.combinations(range(m), size):
            if all(D[i, j] >= eps for i, j in itertools.combinations(sub, 2)):
                return size
    return 0


def abs_dist(a, b):
    return abs(float(a) - float(b))


# -- greedy packing --------------------------------------------------------------------------


def test_interval_grid_half_separation():
    space = E.interval_grid(0.0, 1.0, 11)
    pk = E.greedy_packing(space, 0.5)
    assert len(pk) == 3 and pk.maximal and pk.is_separated()
    assert brute_force_packing_number(space.candidates, abs_dist, 0.5) == 3


def test_separation_above_diameter_gives_single_point():
    space = E.vector_points(np.random.default_rng(0).normal(size=(12, 3)))
    assert len(E.greedy_packing(space, space.diameter() + 1e-9)) == 1


def test_singleton_candidates():
    space = E.scalar_points([0.3])
    for eps in (1e-6, 1.0, 1e6):
        assert len(E.greedy_packing(space, eps)) == 1


def test_nonpositive_separation_rejected():
    with pytest.raises(ValueError):
        E.greedy_packing(E.interval_grid(0, 1, 5), 0.0)
    with pytest.raises(ValueError):
        E.greedy_packing(E.interval_grid(0, 1, 5), -1.0)


def test_empty_candidates_rejected():
    with pytest.raises(ValueError):
        E.greedy_packing(E.scalar_points([]), 0.5)


def test_maximal_flag_verified_by_scan():
    space = E.spectral_ball_grid(2, 1.0, 0.5)
    pk = E.greedy_packing(space, 0.6, seed=3)
    assert pk.maximal and pk.is_separated()
    for c in space.candidates:
        assert E.distances(E.SPECTRAL, c, pk.points).min() < 0.6


@settings(max_examples=25, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=1, max_size=12), st.floats(0.05, 2.0))
def test_greedy_reaches_brute_force_for_some_seed(values, eps):
    space = E.scalar_points(values)
    best = brute_force_packing_number(space.candidates, abs_dist, eps)
    sizes = [len(E.greedy_packing(space, eps, seed=s)) for s in range(20)]
    assert max(sizes) <= best
    assert best in sizes


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.2, 1.5))
def test_greedy_in_plane_against_brute_force(seed, eps):
    pts = np.random.default_rng(seed).uniform(-1, 1, size=(10, 2))
    space = E.vector_points(pts)
    dist = lambda a, b: float(np.linalg.norm(a - b))
    best = brute_force_packing_number(pts, dist, eps)
    sizes = [len(E.greedy_packing(space, eps, seed=s)) for s in range(20)]
    assert max(sizes) <= best and best in sizes
    assert E.exact_packing_number(space, eps) == best


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from([E.EUCLIDEAN, E.SPECTRAL, E.ABSOLUTE]))
def test_distance_axioms(seed, kind):
    rng = np.random.default_rng(seed)
    shape = {E.EUCLIDEAN: (3, 4), E.SPECTRAL: (3, 2, 2), E.ABSOLUTE: (3,)}[kind]
    a, b, c = rng.normal(size=shape)
    d = lambda x, y: E.distance(kind, x, y)
    assert d(a, a) == 0.0
    assert d(a, b) >= 0 and abs(d(a, b) - d(b, a)) <= 1e-12
    assert d(a, c) <= d(a, b) + d(b, c) + 1e-12


def test_closed_form_spectral_norm_matches_svd():
    mats = np.random.default_rng(5).normal(size=(500, 2, 2))
    assert np.allclose(E.spectral_norms(mats), np.linalg.norm(mats, 2, axis=(1, 2)), rtol=1e-12, atol=0)


# -- entropy curves ---------------------------------------------------------------------------


def test_curve_zero_when_every_packing_is_a_point():
    space = E.interval_grid(0.0, 1.0, 5)
    curve = E.entropy_curve(space, [1.5, 2.0, 3.0])
    assert np.all(curve.entropy == 0.0)


def test_unit_ball_n1_half_separation():
    space = E.spectral_ball_grid(1, 1.0, 0.25)
    curve = E.entropy_curve(space, [0.5])
    pts = space.candidates.reshape(-1)
    assert len(pts) == 9
    best = brute_force_packing_number(pts, abs_dist, 0.5)
    assert best == 5
    assert curve.entropy[0] == pytest.approx(math.log(best), abs=1e-15)


def test_two_by_two_ball_fit_matches_lstsq_oracle():
    space = E.spectral_ball_grid(2, 1.0, 0.25)
    eps = np.geomspace(0.3, 1.0, 6)
    curve = E.entropy_curve(space, eps)
    assert curve.is_nonincreasing()
    fit = E.fit_entropy_curve(curve, slope=4.0)
    x = np.log(1.0 / eps)
    intercept = np.mean(curve.entropy - 4.0 * x)
    assert fit.intercept == pytest.approx(intercept, abs=1e-12)
    resid = math.sqrt(np.mean((curve.entropy - intercept - 4.0 * x) ** 2))
    assert fit.residual == pytest.approx(resid, abs=1e-12)
    free = E.fit_entropy_curve(curve)
    slope, icpt = np.polyfit(x, curve.entropy, 1)
    assert free.slope == pytest.approx(slope, abs=1e-9) and free.intercept == pytest.approx(icpt, abs=1e-9)


def test_curve_keeps_raw_values_and_is_monotone():
    pts = np.random.default_rng(3).uniform(-1, 1, size=(60, 2))
    space = E.vector_points(pts)
    eps = np.linspace(0.05, 1.5, 30)
    curve = E.entropy_curve(space, eps, seed=7)
    assert curve.is_nonincreasing()
    assert np.all(curve.entropy >= curve.raw_entropy)
    assert len(curve.raw_entropy) == len(eps)


def test_unsorted_epsilons_rejected():
    with pytest.raises(ValueError):
        E.entropy_curve(E.interval_grid(0, 1, 5), [0.5, 0.2])


def test_nested_grids_refine_monotonically():
    eps = [0.3, 0.5, 0.8, 1.2]
    coarse = E.entropy_curve(E.spectral_ball_grid(1, 1.0, 0.5), eps)
    fine = E.entropy_curve(E.spectral_ball_grid(1, 1.0, 0.25), eps)
    finer = E.entropy_curve(E.spectral_ball_grid(1, 1.0, 0.125), eps)
    assert np.all(coarse.entropy <= fine.entropy) and np.all(fine.entropy <= finer.entropy)
    c2 = E.entropy_curve(E.spectral_ball_grid(2, 1.0, 0.5), eps)
    f2 = E.entropy_curve(E.spectral_ball_grid(2, 1.0, 0.25), eps)
    assert np.all(c2.entropy <= f2.entropy)


def test_csv_export(tmp_path):
    curve = E.entropy_curve(E.interval_grid(0, 1, 5), [0.25, 0.5])
    path = tmp_path / "curve.csv"
    curve.to_csv(path)
    rows = list(csv.reader(open(path)))
    assert rows[0] == ["epsilon", "entropy_nats", "packing_size"]
    assert [int(r[2]) for r in rows[1:]] == [5, 3]
    assert float(rows[2][1]) == math.log(3)


# -- critical separation -----------------------------------------------------------------------


def test_critical_separation_inverts_log():
    curve = E.EntropyCurve.analytic(lambda e: math.log(1.0 / e))
    res = E.critical_separation(curve, 0.0)
    assert res.exists and res.target == 2
    assert res.sigma == pytest.approx(math.exp(-2.0), rel=1e-13)


def test_critical_separation_target_four():
    curve = E.EntropyCurve.analytic(lambda e: 4.0 * math.log(1.0 / e))
    res = E.critical_separation(curve, 1.0)
    assert res.target == 4
    assert res.sigma == pytest.approx(math.exp(-1.0), rel=1e-13)


def test_critical_separation_staircase_matches_linear_scan():
    space = E.spectral_ball_grid(1, 1.0, 0.125)
    eps = np.linspace(0.05, 2.0, 40)
    curve = E.entropy_curve(space, eps)
    res = E.critical_separation(curve, 0.0)
    target = math.ceil(2 * math.log(2))
    scan = [i for i, h in enumerate(curve.entropy) if h >= target]
    assert res.exists
    k = max(scan)
    assert res.sigma == eps[k]
    assert res.bracket == (eps[k], eps[k + 1])
    assert curve.entropy[k + 1] < target


def test_no_separation_when_target_too_high():
    curve = E.entropy_curve(E.interval_grid(0, 1, 4), [0.1, 0.5])
    res = E.critical_separation(curve, 5.0)
    assert not res.exists and res.sigma is None
    assert "no separation" in res.reason


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.0, 2.0))
def test_critical_separation_property(seed, budget):
    pts = np.random.default_rng(seed).uniform(-2, 2, size=(40, 2))
    eps = np.linspace(0.02, 3.0, 25)
    curve = E.entropy_curve(E.vector_points(pts), eps)
    res = E.critical_separation(curve, budget)
    if res.exists:
        assert curve(res.sigma) >= res.target
        i = int(np.searchsorted(eps, res.sigma))
        if i + 1 < len(eps):
            assert curve.entropy[i + 1] < res.target
    else:
        assert curve.entropy.max() < res.target


def test_exact_curve_on_finite_set():
    space = E.scalar_points([0.0, 0.1, 0.3, 0.6, 1.0])
    curve = E.exact_entropy_curve(space)
    for e, n in zip(curve.epsilons, curve.packing_sizes):
        assert n == brute_force_packing_number(space.candidates, abs_dist, e)


# -- entropy cap ---------------------------------------------------------------------------------


def test_cap_unit_rates():
    assert E.entropy_cap_from_rates(1.0, 1.0, [1.0, 1.0], 1) == (4, 5.0)


def test_cap_without_divergence():
    cap, _ = E.entropy_cap_from_rates(0.0, 1.0, [0.5, 0.4, 0.3, 0.2], 3)
    assert cap == 2


def test_cap_harmonic_rates():
    betas = [1.0 / (t + 1) for t in range(4)]
    cap, scale = E.entropy_cap_from_rates(1.0, 2.0, betas, 3)
    assert cap == math.ceil(2 * (1 + 1 / 2 + 1 / 3 + math.log(2))) == 6
    # scale = 5 * beta_T^(1/k) with beta_3 = 1/4
    assert scale == pytest.approx(5.0 * 0.25**0.5, rel=1e-15)


def test_cap_errors():
    with pytest.raises(ValueError):
        E.entropy_cap_from_rates(1.0, 1.0, [], 0)
    with pytest.raises(ValueError):
        E.entropy_cap_from_rates(1.0, 1.0, [0.1, 0.2], 1)
    with pytest.raises(ValueError):
        E.entropy_cap_from_rates(1.0, 1.0, [0.3, 0.2], 3)
