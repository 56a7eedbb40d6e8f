from .config import (
    EQUALIZER_KINDS,
    ExperimentConfig,
    config_from_pairs,
    load_config,
    parse_config_text,
)
from .scenario import (
    EvalTable,
    IdentityAligner,
    Scenario,
    build_eval_table,
    build_scenario,
    evaluate,
    fit_equalizer,
    frame_size_for,
)
from .sweeps import SweepReport, SweepRow, emit_csv, run_pilot_sweep, run_snr_sweep

__all__ = [
    "EQUALIZER_KINDS",
    "EvalTable",
    "ExperimentConfig",
    "IdentityAligner",
    "Scenario",
    "SweepReport",
    "SweepRow",
    "build_eval_table",
    "build_scenario",
    "config_from_pairs",
    "emit_csv",
    "evaluate",
    "fit_equalizer",
    "frame_size_for",
    "load_config",
    "parse_config_text",
    "run_pilot_sweep",
    "run_snr_sweep",
]
