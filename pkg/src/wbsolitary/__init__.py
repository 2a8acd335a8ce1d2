"""Solitary waves of Whitham-Boussinesq systems by constrained energy minimization.

The public API re-exports the main building blocks; see the submodules for
the full set of diagnostics.
"""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    AdmissibilityError,
    AmplitudeError,
    BoundaryMinimizerError,
    ConfigurationError,
    ContractViolation,
    DomainError,
    InvalidSymbolError,
    NonConvergenceError,
    NonWaveMultiplierError,
    SupportError,
    WBError,
)
from .symbols import Symbol, builtin_symbol, taylor_data, validate_symbol  # noqa: E402
from .spectral import MultiplierOperator, PeriodicGrid, WaveField, apply_K, sobolev_norm  # noqa: E402
from .functionals import (  # noqa: E402
    Nonlinearity,
    Penalization,
    ScalarFunctional,
    WBFunctional,
    constraint_I,
    psi,
)
from .minimizer import MinimizationConfig, MinimizerResult, continuation_run, minimize  # noqa: E402
from .longwave import (  # noqa: E402
    exponents,
    ground_state,
    longwave_grid,
    longwave_identity_check,
    minimizer_distance_report,
    scale_lw,
)
from .waves import SolitaryWave, constant_branch, reconstruct, regularity_report  # noqa: E402
from .scalar import ScalarProblem, default_problem, solve_scalar  # noqa: E402

__all__ = [
    "AdmissibilityError",
    "AmplitudeError",
    "BoundaryMinimizerError",
    "ConfigurationError",
    "ContractViolation",
    "DomainError",
    "InvalidSymbolError",
    "MinimizationConfig",
    "MinimizerResult",
    "MultiplierOperator",
    "NonConvergenceError",
    "NonWaveMultiplierError",
    "Nonlinearity",
    "Penalization",
    "PeriodicGrid",
    "ScalarFunctional",
    "ScalarProblem",
    "SolitaryWave",
    "SupportError",
    "Symbol",
    "WBError",
    "WBFunctional",
    "WaveField",
    "apply_K",
    "builtin_symbol",
    "constant_branch",
    "constraint_I",
    "continuation_run",
    "default_problem",
    "exponents",
    "ground_state",
    "longwave_grid",
    "longwave_identity_check",
    "minimize",
    "minimizer_distance_report",
    "psi",
    "reconstruct",
    "regularity_report",
    "scale_lw",
    "sobolev_norm",
    "solve_scalar",
    "taylor_data",
    "validate_symbol",
]
