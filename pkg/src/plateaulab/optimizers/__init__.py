from .base import (
    DegenerateSimplexError,
    FunctionOracle,
    NumericFailure,
    OptimizerTrace,
    TerminalStatus,
    TraceStep,
    ZerothOrderOracle,
)
from .cobyla import cobyla, fit_hyperplane
from .gradient_descent import gradient_descent
from .nelder_mead import Simplex, nelder_mead, nm_contract, nm_expand, nm_reflect, nm_shrink
from .powell import brent_line_minimize, parabolic_step, powell

OPTIMIZERS = ("nelder_mead", "powell", "cobyla", "gradient_descent")

__all__ = [
    "DegenerateSimplexError", "FunctionOracle", "NumericFailure", "OptimizerTrace", "TerminalStatus",
    "TraceStep", "ZerothOrderOracle", "Simplex", "cobyla", "fit_hyperplane", "gradient_descent",
    "nelder_mead", "nm_contract", "nm_expand", "nm_reflect", "nm_shrink", "brent_line_minimize",
    "parabolic_step", "powell", "OPTIMIZERS",
]
