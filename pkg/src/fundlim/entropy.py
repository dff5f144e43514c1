"""Packing sets, Kolmogorov entropy curves and the critical separation.

Entropies are in nats.  Continuous uncertainty sets are represented by
finite candidate grids; greedy packings of a grid give lower bounds on the
packing numbers of the underlying set.
"""
from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.optimize import brentq

EUCLIDEAN = "euclidean_vector"
SPECTRAL = "spectral_norm_matrix"
ABSOLUTE = "absolute_scalar"
DISTANCES = (EUCLIDEAN, SPECTRAL, ABSOLUTE)


def distances(kind: str, point, points) -> np.ndarray:
    """Distances from ``point`` to every row of ``points``."""
    diff = np.asarray(points, dtype=float) - np.asarray(point, dtype=float)
    if kind == ABSOLUTE:
        return np.abs(diff).reshape(len(diff))
    if kind == EUCLIDEAN:
        return np.sqrt((diff.reshape(len(diff), -1) ** 2).sum(-1))
    if kind == SPECTRAL:
        if diff.ndim != 3:
            raise ValueError("spectral distance needs points of shape (M, n, n)")
        return spectral_norms(diff)
    raise ValueError(f"unknown distance {kind!r}")


def spectral_norms(mats: np.ndarray) -> np.ndarray:
    """Largest singular value of each matrix in a (M, n, n) stack."""
    n = mats.shape[-1]
    if n == 1:
        return np.abs(mats[:, 0, 0])
    if n == 2:
        a, b, c, d = mats[:, 0, 0], mats[:, 0, 1], mats[:, 1, 0], mats[:, 1, 1]
        fro = a * a + b * b + c * c + d * d
        det = a * d - b * c
        disc = np.sqrt(np.maximum(fro * fro - 4.0 * det * det, 0.0))
        return np.sqrt(0.5 * (fro + disc))
    return np.linalg.norm(mats, 2, axis=(1, 2))


def distance(kind: str, a, b) -> float:
    return float(distances(kind, a, np.asarray(b, dtype=float)[None])[0])


def pairwise_distances(kind: str, points) -> np.ndarray:
    points = np.asarray(points, dtype=float)
    return np.stack([distances(kind, p, points) for p in points]) if len(points) else np.zeros((0, 0))


@dataclass(frozen=True, eq=False)
class MetricSpaceSpec:
    distance: str
    candidates: np.ndarray
    ambient_dim: int

    def __post_init__(self):
        if self.distance not in DISTANCES:
            raise ValueError(f"unknown distance {self.distance!r}")
        cand = np.array(self.candidates, dtype=float)
        if self.distance == ABSOLUTE:
            cand = cand.reshape(-1)
        cand.setflags(write=False)
        object.__setattr__(self, "candidates", cand)

    def __len__(self) -> int:
        return len(self.candidates)

    def diameter(self) -> float:
        if len(self) < 2:
            return 0.0
        return float(pairwise_distances(self.distance, self.candidates).max())


def interval_grid(lo: float, hi: float, num: int) -> MetricSpaceSpec:
    return MetricSpaceSpec(ABSOLUTE, np.linspace(lo, hi, num), 1)


def scalar_points(points: Sequence[float]) -> MetricSpaceSpec:
    return MetricSpaceSpec(ABSOLUTE, np.asarray(points, dtype=float), 1)


def vector_points(points) -> MetricSpaceSpec:
    points = np.asarray(points, dtype=float)
    return MetricSpaceSpec(EUCLIDEAN, points, points.shape[1])


def _axis(radius: float, resolution: float) -> np.ndarray:
    k = int(math.floor(radius / resolution + 1e-9))
    return resolution * np.arange(-k, k + 1)


def spectral_ball_grid(n: int, radius: float = 1.0, resolution: float = 0.25) -> MetricSpaceSpec:
    """Matrices with entries on a ``resolution`` lattice and spectral norm <= radius."""
    axis = _axis(radius, resolution)
    entries = np.array(list(itertools.product(axis, repeat=n * n)))
    mats = entries.reshape(-1, n, n)
    keep = spectral_norms(mats) <= radius * (1 + 1e-12)
    return MetricSpaceSpec(SPECTRAL, mats[keep], n * n)


def euclidean_ball_grid(dim: int, radius: float = 1.0, resolution: float = 0.25) -> MetricSpaceSpec:
    axis = _axis(radius, resolution)
    pts = np.array(list(itertools.product(axis, repeat=dim)))
    keep = np.sqrt((pts**2).sum(-1)) <= radius * (1 + 1e-12)
    return MetricSpaceSpec(EUCLIDEAN, pts[keep], dim)


@dataclass(frozen=True, eq=False)
class PackingSet:
    points: np.ndarray
    separation: float
    distance: str
    maximal: bool = False
    models: Optional[tuple] = None

    def __len__(self) -> int:
        return len(self.points)

    @property
    def entropy(self) -> float:
        return math.log(len(self.points))

    def min_pairwise_distance(self) -> float:
        if len(self) < 2:
            return math.inf
        d = pairwise_distances(self.distance, self.points)
        return float(d[~np.eye(len(d), dtype=bool)].min())

    def is_separated(self) -> bool:
        return self.min_pairwise_distance() >= self.separation

    def with_models(self, family) -> "PackingSet":
        return PackingSet(self.points, self.separation, self.distance, self.maximal, family.models(self.points))


def packing_from_models(models, points, distance_kind: str, separation: Optional[float] = None) -> PackingSet:
    """Wrap explicit models and their parameter points as a packing set.

    The separation defaults to the minimum pairwise distance; identical
    points give separation 0 (allowed only for degenerate test instances).
    """
    points = np.asarray(points, dtype=float)
    pk = PackingSet(points, 0.0, distance_kind, False, tuple(models))
    sep = pk.min_pairwise_distance() if separation is None else separation
    return PackingSet(points, sep, distance_kind, False, tuple(models))


def _order(m: int, seed: int) -> np.ndarray:
    # seed 0 keeps the lexicographic candidate order
    if seed == 0:
        return np.arange(m)
    return np.random.default_rng(seed).permutation(m)


def greedy_packing(space: MetricSpaceSpec, separation: float, seed: int = 0) -> PackingSet:
    """Maximal ``separation``-separated subset of the candidates, built greedily."""
    if not separation > 0:
        raise ValueError("separation must be positive")
    cand = space.candidates
    m = len(cand)
    if m == 0:
        raise ValueError("candidate set is empty")
    # the first still-unblocked candidate in insertion order is always the next pick
    remaining = _order(m, seed)
    chosen = []
    while len(remaining):
        idx = remaining[0]
        chosen.append(idx)
        remaining = remaining[distances(space.distance, cand[idx], cand[remaining]) >= separation]
    points = cand[np.array(chosen)]
    # verification pass: nothing left that could be added
    open_idx = np.arange(m)
    for p in points:
        open_idx = open_idx[distances(space.distance, p, cand[open_idx]) >= separation]
        if not len(open_idx):
            break
    return PackingSet(points, float(separation), space.distance, not len(open_idx))


def exact_packing_number(space: MetricSpaceSpec, separation: float) -> int:
    """Largest separated subset by branch and bound (small candidate sets only)."""
    cand = space.candidates
    m = len(cand)
    if m > 40:
        raise ValueError("exact packing is limited to 40 candidates")
    conflict = pairwise_distances(space.distance, cand) < separation
    np.fill_diagonal(conflict, False)
    best = 0

    def grow(size, allowed):
        nonlocal best
        if size + len(allowed) <= best:
            return
        if not allowed:
            best = size
            return
        v = allowed[0]
        grow(size + 1, [w for w in allowed[1:] if not conflict[v, w]])
        grow(size, allowed[1:])

    grow(0, list(range(m)))
    return best


@dataclass(frozen=True, eq=False)
class EntropyCurve:
    """Sampled (epsilon, H(epsilon)) pairs, or an analytic H on an interval."""

    epsilons: np.ndarray
    entropy: np.ndarray
    source: str = "empirical_greedy"
    packing_sizes: Optional[np.ndarray] = None
    raw_entropy: Optional[np.ndarray] = None
    formula: Optional[Callable[[float], float]] = field(default=None, repr=False)

    @classmethod
    def analytic(cls, formula: Callable[[float], float], eps_min: float = 1e-12, eps_max: float = 1e6):
        eps = np.array([eps_min, eps_max])
        return cls(eps, np.array([formula(eps_min), formula(eps_max)]), "analytic_formula", formula=formula)

    def __call__(self, eps: float) -> float:
        if self.formula is not None:
            return float(self.formula(eps))
        i = np.searchsorted(self.epsilons, eps, side="right") - 1
        if i < 0:
            raise ValueError("epsilon below the sampled range")
        return float(self.entropy[i])

    def is_nonincreasing(self) -> bool:
        return bool(np.all(np.diff(self.entropy) <= 0))

    def rows(self):
        sizes = self.packing_sizes if self.packing_sizes is not None else np.exp(self.entropy)
        return [(float(e), float(h), int(round(n))) for e, h, n in zip(self.epsilons, self.entropy, sizes)]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["epsilon", "entropy_nats", "packing_size"])
            for e, h, n in self.rows():
                w.writerow([repr(e), repr(h), n])


def entropy_curve(space: MetricSpaceSpec, epsilons: Sequence[float], seed: int = 0) -> EntropyCurve:
    eps = np.asarray(epsilons, dtype=float)
    if np.any(np.diff(eps) < 0):
        raise ValueError("epsilons must be sorted ascending")
    sizes = np.array([len(greedy_packing(space, e, seed)) for e in eps])
    # an eps'-packing with eps' > eps is also an eps-packing: suffix maxima
    fixed = np.maximum.accumulate(sizes[::-1])[::-1]
    return EntropyCurve(eps, np.log(fixed), "empirical_greedy", fixed, np.log(sizes))


def exact_entropy_curve(space: MetricSpaceSpec, epsilons: Optional[Sequence[float]] = None) -> EntropyCurve:
    """Curve from exact packing numbers; by default sampled at every distinct
    pairwise distance, where the staircase of a finite set changes value."""
    eps = distinct_distances(space) if epsilons is None else np.asarray(epsilons, dtype=float)
    if len(eps) == 0:
        eps = np.array([1.0])
    sizes = np.array([exact_packing_number(space, e) for e in eps])
    return EntropyCurve(eps, np.log(sizes), "exact_packing", sizes, np.log(sizes))


def distinct_distances(space: MetricSpaceSpec) -> np.ndarray:
    d = pairwise_distances(space.distance, space.candidates)
    return np.unique(d[np.triu_indices(len(d), 1)])


@dataclass(frozen=True)
class EntropyFit:
    intercept: float
    slope: float
    residual: float
    eps_range: tuple


def fit_entropy_curve(curve: EntropyCurve, slope: Optional[float] = None, eps_max: Optional[float] = None) -> EntropyFit:
    """Affine fit H(eps) ~ intercept + slope * log(1/eps) over eps <= eps_max.

    With ``slope`` given only the intercept is fitted.  ``residual`` is the
    root-mean-square misfit.
    """
    eps, H = curve.epsilons, curve.entropy
    keep = np.ones(len(eps), dtype=bool) if eps_max is None else eps <= eps_max
    x, h = np.log(1.0 / eps[keep]), H[keep]
    if slope is None:
        X = np.column_stack([np.ones_like(x), x])
        (a, s), *_ = np.linalg.lstsq(X, h, rcond=None)
    else:
        s = float(slope)
        a = float(np.mean(h - s * x))
    res = float(np.sqrt(np.mean((h - a - s * x) ** 2)))
    return EntropyFit(float(a), float(s), res, (float(eps[keep].min()), float(eps[keep].max())))


def critical_target(divergence_budget: float) -> int:
    """The entropy level ceil(2 (sum delta_t + log 2)) in nats."""
    if divergence_budget < 0:
        raise ValueError("divergence budget must be nonnegative")
    return int(math.ceil(2.0 * (divergence_budget + math.log(2.0))))


@dataclass(frozen=True)
class CriticalSeparation:
    exists: bool
    target: float
    sigma: Optional[float] = None
    bracket: Optional[tuple] = None
    reason: str = ""


def critical_separation(curve: EntropyCurve, divergence_budget: float) -> CriticalSeparation:
    """Largest epsilon on the curve whose entropy reaches the critical target."""
    if not np.isfinite(divergence_budget):
        return CriticalSeparation(False, math.inf, reason="divergence budget is infinite")
    target = critical_target(divergence_budget)
    if curve.formula is not None:
        lo, hi = float(curve.epsilons[0]), float(curve.epsilons[-1])
        f = lambda e: curve.formula(e) - target
        if f(lo) < 0:
            return CriticalSeparation(False, target, reason="no separation exists at this budget")
        if f(hi) >= 0:
            return CriticalSeparation(True, target, hi, (hi, hi))
        sigma = brentq(f, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
        return CriticalSeparation(True, target, float(sigma), (float(sigma), float(sigma)))
    if not curve.is_nonincreasing():
        raise ValueError("entropy curve must be nonincreasing")
    eps, H = curve.epsilons, curve.entropy
    # H is nonincreasing, so -H is sorted ascending; count samples with H >= target
    k = int(np.searchsorted(-H, -target, side="right")) - 1
    if k < 0:
        return CriticalSeparation(False, target, reason="no separation exists at this budget")
    upper = float(eps[k + 1]) if k + 1 < len(eps) else float(eps[k])
    return CriticalSeparation(True, target, float(eps[k]), (float(eps[k]), upper))


def entropy_cap_from_rates(K: float, k: float, betas: Sequence[float], horizon: int):
    """Entropy cap implied by identification rates.

    Returns ``(cap, scale)`` for the bound H(scale) <= cap with
    cap = ceil(2 (K sum_{t=1}^T beta_{t-1} + log 2)) and scale = 5 beta_T^{1/k}.
    ``betas`` must hold beta_0..beta_T.
    """
    betas = np.asarray(betas, dtype=float)
    if len(betas) == 0:
        raise ValueError("betas is empty")
    if K < 0 or k < 1:
        raise ValueError("need K >= 0 and k >= 1")
    if np.any(betas <= 0) or np.any(np.diff(betas) > 0):
        raise ValueError("betas must be positive and nonincreasing")
    if len(betas) < horizon + 1:
        raise ValueError("betas must hold beta_0..beta_T")
    cap = critical_target(K * float(np.sum(betas[:horizon])))
    scale = 5.0 * betas[horizon] ** (1.0 / k)
    return cap, float(scale)
