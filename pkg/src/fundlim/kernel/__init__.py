"""System models, controllers, the interconnection sampler and kernel divergences."""
from fundlim.kernel.divergence import (
    AbsoluteContinuityError,
    categorical_kl,
    conditional_log_density,
    expected_divergence,
    gaussian_kl,
    kernel_divergence,
    next_output_law,
    step_divergences,
)
from fundlim.kernel.models import (
    LINEAR,
    NONLINEAR,
    TABULAR,
    ControllerPolicy,
    DimensionError,
    ModelFamily,
    SystemModel,
    binary_tabular,
    certainty_equivalence_controller,
    linear_feedback,
    linear_gaussian,
    matvec,
    memoryless_tabular,
    open_loop,
    oracle_controller,
    scalar_nonlinear,
    spectral_norm,
    tabular,
    tabular_policy,
    zero_controller,
)
from fundlim.kernel.sampling import (
    IncompatibleControllerError,
    Trajectory,
    TrajectoryBatch,
    sample_trajectory,
    simulate,
)
