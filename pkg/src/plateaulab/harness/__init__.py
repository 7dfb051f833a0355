from .config import ConfigError, SweepConfig, dump_config, load_config
from .output import emit_outputs, load_result
from .sweep import (
    CellSummary,
    OptimalN,
    RunRecord,
    SweepResult,
    derive_seed,
    full_sweep,
    lower_median,
    run_cell,
    run_single,
    select_optimal_N,
    summarize,
)

__all__ = [
    "ConfigError", "SweepConfig", "dump_config", "load_config", "emit_outputs", "load_result",
    "CellSummary", "OptimalN", "RunRecord", "SweepResult", "derive_seed", "full_sweep", "lower_median",
    "run_cell", "run_single", "select_optimal_N", "summarize",
]
