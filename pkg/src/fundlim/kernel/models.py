"""System models, model families and controller policies.

Three kernel families are supported:

* ``linear_gaussian``:  Y_{t+1} = A Y_t + U_t + V_{t+1},  V ~ N(0, s2 I)
* ``scalar_nonlinear_gaussian``:  Y_{t+1} = theta . g(Y_t) + U_t + V_{t+1}
* ``tabular_finite``:  P(Y_{t+1} = j | Y_t = i, U_t = u) = table[i, u, j]

All objects are immutable; array fields are stored read-only.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

LINEAR = "linear_gaussian"
NONLINEAR = "scalar_nonlinear_gaussian"
TABULAR = "tabular_finite"
MODEL_KINDS = (LINEAR, NONLINEAR, TABULAR)

ROW_TOL = 1e-12

BASIS_FUNCTIONS = {
    "tanh": np.tanh,
    "sin": np.sin,
    "cos": np.cos,
}
# sup_y g(y)^2 for each bounded basis function
BASIS_SUP_SQ = {"tanh": 1.0, "sin": 1.0, "cos": 1.0}


class DimensionError(ValueError):
    pass


def _frozen(a, dtype=float) -> np.ndarray:
    arr = np.array(a, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


def spectral_norm(a: np.ndarray) -> float:
    return float(np.linalg.norm(np.atleast_2d(a), 2))


@dataclass(frozen=True, eq=False)
class SystemModel:
    kind: str
    A: Optional[np.ndarray] = None
    noise_variance: float = 1.0
    theta: Optional[np.ndarray] = None
    basis: tuple = ()
    transition_table: Optional[np.ndarray] = None
    initial_probs: Optional[np.ndarray] = None
    initial_variance: float = 0.0

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}")
        if self.kind in (LINEAR, NONLINEAR):
            if not self.noise_variance > 0:
                raise ValueError("noise_variance must be positive")
            if self.initial_variance < 0:
                raise ValueError("initial_variance must be nonnegative")
        if self.kind == LINEAR:
            A = np.atleast_2d(np.asarray(self.A, dtype=float))
            if A.ndim != 2 or A.shape[0] != A.shape[1]:
                raise DimensionError(f"A must be square, got shape {A.shape}")
            object.__setattr__(self, "A", _frozen(A))
        elif self.kind == NONLINEAR:
            theta = np.atleast_1d(np.asarray(self.theta, dtype=float))
            basis = tuple(self.basis) or ("tanh",) * len(theta)
            if len(basis) != len(theta):
                raise DimensionError("theta and basis lengths differ")
            for name in basis:
                if name not in BASIS_FUNCTIONS:
                    raise ValueError(f"unknown basis function {name!r}")
            object.__setattr__(self, "theta", _frozen(theta))
            object.__setattr__(self, "basis", basis)
        else:
            table = np.asarray(self.transition_table, dtype=float)
            if table.ndim != 3 or table.shape[0] != table.shape[2]:
                raise DimensionError("transition_table must have shape (S, U, S)")
            if np.any(table < 0) or np.any(np.abs(table.sum(-1) - 1) > ROW_TOL):
                raise ValueError("tabular rows must be nonnegative and sum to 1")
            S = table.shape[0]
            init = (
                np.full(S, 1.0 / S)
                if self.initial_probs is None
                else np.asarray(self.initial_probs, dtype=float)
            )
            if init.shape != (S,) or np.any(init < 0) or abs(init.sum() - 1) > ROW_TOL:
                raise ValueError("initial_probs must be a probability vector over the alphabet")
            object.__setattr__(self, "transition_table", _frozen(table))
            object.__setattr__(self, "initial_probs", _frozen(init))

    @property
    def is_gaussian(self) -> bool:
        return self.kind != TABULAR

    @property
    def output_dim(self) -> int:
        if self.kind == LINEAR:
            return self.A.shape[0]
        if self.kind == NONLINEAR:
            return 1
        return 1

    @property
    def alphabet_size(self) -> int:
        if self.kind != TABULAR:
            raise TypeError("only tabular models have an alphabet")
        return self.transition_table.shape[0]

    @property
    def input_alphabet_size(self) -> int:
        if self.kind != TABULAR:
            raise TypeError("only tabular models have an input alphabet")
        return self.transition_table.shape[1]

    @property
    def parameter(self) -> np.ndarray:
        """The parameter point the model was built from (for metric errors)."""
        if self.kind == LINEAR:
            return self.A
        if self.kind == NONLINEAR:
            return self.theta
        return self.transition_table

    def in_uncertainty_set(self) -> bool:
        """Membership in the spectral unit ball (linear models only)."""
        if self.kind != LINEAR:
            raise TypeError("membership is defined for linear models only")
        return spectral_norm(self.A) <= 1.0 + 1e-12

    def features(self, y: np.ndarray) -> np.ndarray:
        """Basis features g(y) for the nonlinear family; y has shape (..., 1)."""
        y = np.asarray(y, dtype=float)[..., 0]
        return np.stack([BASIS_FUNCTIONS[b](y) for b in self.basis], axis=-1)

    def next_mean(self, y: np.ndarray, u: np.ndarray) -> np.ndarray:
        """Conditional mean of the next output for Gaussian kinds, batched over rows."""
        y = np.asarray(y, dtype=float)
        u = np.asarray(u, dtype=float)
        if self.kind == LINEAR:
            return matvec(self.A, y) + u
        if self.kind == NONLINEAR:
            return (self.features(y) * self.theta).sum(-1, keepdims=True) + u
        raise TypeError("tabular models have no conditional mean")

    def smoothness_constant(self) -> float:
        """K with E D(P_theta || P_theta') <= K |theta - theta'|^2 (nonlinear family)."""
        if self.kind != NONLINEAR:
            raise TypeError("smoothness constant is defined for the nonlinear family")
        return sum(BASIS_SUP_SQ[b] for b in self.basis) / (2.0 * self.noise_variance)


def matvec(A: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Row-wise A @ y for y of shape (..., n) or A of shape (..., n, n).

    Written as a broadcast multiply plus a reduction over the last (short) axis
    so each row's result does not depend on how many rows are in the batch.
    """
    return (np.asarray(A)[..., :, :] * np.asarray(y)[..., None, :]).sum(-1)


def linear_gaussian(A, noise_variance: float = 1.0, initial_variance: float = 0.0) -> SystemModel:
    return SystemModel(LINEAR, A=A, noise_variance=noise_variance, initial_variance=initial_variance)


def scalar_nonlinear(
    theta, basis: Sequence[str] = (), noise_variance: float = 1.0, initial_variance: float = 0.0
) -> SystemModel:
    return SystemModel(
        NONLINEAR,
        theta=theta,
        basis=tuple(basis),
        noise_variance=noise_variance,
        initial_variance=initial_variance,
    )


def tabular(table, initial_probs=None) -> SystemModel:
    """Tabular model from a (S, U, S) table, or a (S, S) table when inputs are ignored."""
    table = np.asarray(table, dtype=float)
    if table.ndim == 2:
        table = table[:, None, :]
    return SystemModel(TABULAR, transition_table=table, initial_probs=initial_probs)


def memoryless_tabular(row, alphabet_size: Optional[int] = None, initial_probs=None) -> SystemModel:
    """Tabular model whose next-output law is ``row`` whatever the history."""
    row = np.asarray(row, dtype=float)
    S = alphabet_size or len(row)
    return tabular(np.tile(row, (S, 1)), initial_probs=initial_probs)


def binary_tabular(params, n_inputs: int = 1, initial_probs=None) -> SystemModel:
    """Two-symbol chain with P(Y'=1 | y, u) = params[y * n_inputs + u]."""
    p = np.asarray(params, dtype=float).reshape(2, n_inputs)
    table = np.stack([1.0 - p, p], axis=-1)
    return tabular(table, initial_probs=initial_probs)


@dataclass(frozen=True)
class ModelFamily:
    """Map from parameter points to system models sharing everything else."""

    kind: str
    noise_variance: float = 1.0
    initial_variance: float = 0.0
    basis: tuple = ()
    n_inputs: int = 1
    initial_probs: Optional[tuple] = None

    def model(self, point) -> SystemModel:
        if self.kind == LINEAR:
            return linear_gaussian(point, self.noise_variance, self.initial_variance)
        if self.kind == NONLINEAR:
            return scalar_nonlinear(point, self.basis, self.noise_variance, self.initial_variance)
        if self.kind == TABULAR:
            return binary_tabular(point, self.n_inputs, self.initial_probs)
        raise ValueError(f"unknown model kind {self.kind!r}")

    def models(self, points) -> tuple:
        return tuple(self.model(p) for p in points)


# -- controllers ---------------------------------------------------------------

ZERO = "zero"
OPEN_LOOP = "open_loop_sequence"
LINEAR_FEEDBACK = "linear_feedback"
CERTAINTY_EQUIVALENCE = "certainty_equivalence"
TABULAR_POLICY = "tabular_policy"
ORACLE = "oracle"
CONTROLLER_KINDS = (ZERO, OPEN_LOOP, LINEAR_FEEDBACK, CERTAINTY_EQUIVALENCE, TABULAR_POLICY, ORACLE)


@dataclass(frozen=True, eq=False)
class ControllerPolicy:
    """A causal input-generation rule.

    ``oracle`` applies U_t = -A Y_t with the *true* A.  It is not an admissible
    controller (it reads the parameter) and exists only as a reference point.
    """

    kind: str = ZERO
    gain: Optional[np.ndarray] = None
    input_sequence: Optional[np.ndarray] = None
    policy_table: Optional[np.ndarray] = None
    update_period: int = 1
    dither_amplitude: float = 0.0
    dither_seed: int = 0
    project: bool = True

    def __post_init__(self):
        if self.kind not in CONTROLLER_KINDS:
            raise ValueError(f"unknown controller kind {self.kind!r}")
        if self.gain is not None:
            object.__setattr__(self, "gain", _frozen(self.gain))
        if self.input_sequence is not None:
            seq = np.asarray(self.input_sequence)
            object.__setattr__(self, "input_sequence", _frozen(seq, seq.dtype))
        if self.policy_table is not None:
            tab = np.asarray(self.policy_table, dtype=float)
            if tab.ndim != 2 or np.any(tab < 0) or np.any(np.abs(tab.sum(-1) - 1) > ROW_TOL):
                raise ValueError("policy_table rows must be probability vectors")
            object.__setattr__(self, "policy_table", _frozen(tab))
        if self.update_period < 1:
            raise ValueError("update_period must be >= 1")
        if self.dither_amplitude < 0:
            raise ValueError("dither_amplitude must be nonnegative")

    @property
    def records_gains(self) -> bool:
        return self.kind in (ZERO, LINEAR_FEEDBACK, CERTAINTY_EQUIVALENCE, ORACLE)

    def dither(self, horizon: int, n: int) -> np.ndarray:
        """Deterministic excitation d_1..d_T; prefixes agree across horizons."""
        if self.dither_amplitude == 0:
            return np.zeros((horizon, n))
        rng = np.random.default_rng(self.dither_seed)
        return self.dither_amplitude * rng.standard_normal((horizon, n))


def zero_controller() -> ControllerPolicy:
    return ControllerPolicy(ZERO)


def open_loop(inputs) -> ControllerPolicy:
    return ControllerPolicy(OPEN_LOOP, input_sequence=inputs)


def linear_feedback(gain) -> ControllerPolicy:
    """U_t = -F Y_t with a fixed (n, n) gain, or a (T, n, n) schedule F_1..F_T."""
    return ControllerPolicy(LINEAR_FEEDBACK, gain=np.asarray(gain, dtype=float))


def oracle_controller() -> ControllerPolicy:
    return ControllerPolicy(ORACLE)


def tabular_policy(table) -> ControllerPolicy:
    """Input law given the last output: table[y, u] = P(U_t = u | Y_t = y)."""
    return ControllerPolicy(TABULAR_POLICY, policy_table=table)


def certainty_equivalence_controller(
    update_period: int = 1, dither_amplitude: float = 0.0, dither_seed: int = 0, project: bool = True
) -> ControllerPolicy:
    """Certainty-equivalence control with deterministic dither.

    The running least-squares estimate of A is refreshed every
    ``update_period`` steps (optionally projected onto the spectral unit
    ball) and U_t = -A_hat Y_t + d_t is applied; d_t is skipped when Y_t = 0
    so the effective gain F_t with U_t = -F_t Y_t always exists.
    """
    return ControllerPolicy(
        CERTAINTY_EQUIVALENCE,
        update_period=update_period,
        dither_amplitude=dither_amplitude,
        dither_seed=dither_seed,
        project=project,
    )
