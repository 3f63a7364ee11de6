"""Trigger detection for scalar field time series via percentile statistics.

The pipeline: rank-partitioned field snapshots (fields) feed exact or sampled
percentile computation (quantiles), which drives per-timestep indicators
(indicators); a threshold trigger over the indicator series decides when an
event is imminent (triggers). A synthetic ensemble generator with a known
acceptable trigger window (synth) and an experiment harness (harness) support
sweeps over thresholds and sample counts at desk scale.
"""

from .errors import IndicatorUndefined, ValidationError
from .fields import FieldSeries, FieldSnapshot, load_series, write_series
from .harness import (
    WHOLE_FIELD,
    RealizationReport,
    SweepRow,
    SweepTable,
    WorkflowTrace,
    adaptive_loop,
    run_realizations,
    summarize_reports,
    sweep_samples,
    sweep_tau,
    write_sweep_csv,
    write_sweep_summary,
    write_workflow_csv,
)
from .indicators import (
    IndicatorConfig,
    IndicatorSeries,
    c_indicator,
    indicator_series,
    indicator_value,
    p_indicator,
    percentile_grid_for,
    read_indicator_csv,
    write_indicator_csv,
)
from .quantiles import (
    PercentileGrid,
    PercentileVector,
    Sample,
    Sampling,
    draw_sample,
    estimate_percentile,
    exact_percentile,
    exact_percentile_vector,
    required_sample_size,
)
from .synth import (
    GroundTruth,
    SynthConfig,
    generate_ensemble,
    generate_snapshot,
    ground_truth_for,
    load_synth_config,
    top_spread_at,
)
from .triggers import (
    GroundTruthWindow,
    TriggerConfig,
    TriggerResult,
    classify,
    detect_crossing,
    trigger_report,
)

__version__ = "0.1.0"

__all__ = [
    "FieldSeries",
    "FieldSnapshot",
    "GroundTruth",
    "GroundTruthWindow",
    "IndicatorConfig",
    "IndicatorSeries",
    "IndicatorUndefined",
    "PercentileGrid",
    "PercentileVector",
    "RealizationReport",
    "Sample",
    "Sampling",
    "SweepRow",
    "SweepTable",
    "SynthConfig",
    "TriggerConfig",
    "TriggerResult",
    "ValidationError",
    "WHOLE_FIELD",
    "WorkflowTrace",
    "adaptive_loop",
    "c_indicator",
    "classify",
    "detect_crossing",
    "draw_sample",
    "estimate_percentile",
    "exact_percentile",
    "exact_percentile_vector",
    "generate_ensemble",
    "generate_snapshot",
    "ground_truth_for",
    "indicator_series",
    "indicator_value",
    "load_series",
    "load_synth_config",
    "p_indicator",
    "percentile_grid_for",
    "read_indicator_csv",
    "required_sample_size",
    "run_realizations",
    "summarize_reports",
    "sweep_samples",
    "sweep_tau",
    "top_spread_at",
    "trigger_report",
    "write_indicator_csv",
    "write_series",
    "write_sweep_csv",
    "write_sweep_summary",
    "write_workflow_csv",
]
