"""kirchhoffsim: spectral simulation and asymptotics verification for the
dissipative Kirchhoff-type system eps u'' + |A^(1/2)u|^(2 gamma) A u + u' = 0.

The operator is carried modally by its eigenvalue frequencies; a
stiffness-robust exponential stepper integrates to very long horizons, and
the diagnostics/asymptotics layers measure the decay constants the model
predicts in closed form.
"""

from .errors import (
    AllZeroInitialData,
    BlowupDetected,
    ConfigError,
    DegenerateTrace,
    DimensionMismatch,
    InsufficientTail,
    InvalidBand,
    KirchhoffError,
    NonPositiveEigenvalue,
    NonPositiveGamma,
    StepUnderflow,
    ToleranceNotMet,
)
from .spectrum import (
    BandDecomposition,
    Problem,
    Spectrum,
    build_problem,
    decompose,
    laplacian_interval_spectrum,
    weighted_norm_sq,
)
from .coefficients import (
    LinearCoefficient,
    constant_coefficient,
    power_coefficient,
)
from .stepper import (
    SamplingPolicy,
    StepController,
    SystemState,
    accel,
    evolve,
    evolve_linear,
    initial_state,
    step,
)
from .reference import limit_ode_solution, reference_solve, reference_solve_linear
from .trace import Trace
from .logspace import WeightedValue
from .diagnostics import (
    BetaValues,
    EnergyRecord,
    Theorem1Values,
    b_of,
    beta_functionals,
    comparison_lemma_check,
    corrector,
    energies,
    h2_constants,
    theorem1_functionals,
)
from .asymptotics import (
    Claim,
    LimitEstimate,
    VerificationReport,
    estimate_limit,
    verify_propositions,
    verify_theorem_1,
    verify_theorem_2,
    verify_theorem_A,
)
from ._kernels import USING_NUMBA

__version__ = "0.1.0"

__all__ = [
    "AllZeroInitialData", "BlowupDetected", "ConfigError", "DegenerateTrace",
    "DimensionMismatch", "InsufficientTail", "InvalidBand", "KirchhoffError",
    "NonPositiveEigenvalue", "NonPositiveGamma", "StepUnderflow",
    "ToleranceNotMet",
    "BandDecomposition", "Problem", "Spectrum", "build_problem", "decompose",
    "laplacian_interval_spectrum", "weighted_norm_sq",
    "LinearCoefficient", "constant_coefficient", "power_coefficient",
    "SamplingPolicy", "StepController", "SystemState", "accel", "evolve",
    "evolve_linear", "initial_state", "step",
    "limit_ode_solution", "reference_solve", "reference_solve_linear",
    "Trace", "WeightedValue",
    "BetaValues", "EnergyRecord", "Theorem1Values", "b_of",
    "beta_functionals", "comparison_lemma_check", "corrector", "energies",
    "h2_constants", "theorem1_functionals",
    "Claim", "LimitEstimate", "VerificationReport", "estimate_limit",
    "verify_propositions", "verify_theorem_1", "verify_theorem_2",
    "verify_theorem_A",
    "USING_NUMBA", "__version__",
]
