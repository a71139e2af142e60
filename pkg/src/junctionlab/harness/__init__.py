from .cli import main
from .reports import (
    discover_runs,
    final_window_stats,
    outcome_series,
    read_training_log,
    write_eval_report,
    write_tables,
    write_training_curves,
    write_training_log,
)
from .scene import frames_from_trace, render_frame
from .traces import TRACE_SCHEMA, read_trace, write_trace

__all__ = [
    "main",
    "discover_runs", "final_window_stats", "outcome_series",
    "read_training_log", "write_eval_report", "write_tables",
    "write_training_curves", "write_training_log",
    "frames_from_trace", "render_frame",
    "TRACE_SCHEMA", "read_trace", "write_trace",
]
