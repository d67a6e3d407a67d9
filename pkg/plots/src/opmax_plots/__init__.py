"""Figure generation from simulator trace/sweep/snapshot output files."""

from .figures import (
    FigureResult,
    plot_belief_simplex,
    plot_centrality_box,
    plot_total_opinion,
)
from .io import (
    EmptyInputError,
    PlotsError,
    SchemaError,
    SweepTable,
    TraceSet,
    UnsupportedError,
    read_sidecar,
    read_sweep_csv,
    read_trace_dir,
)

__version__ = "0.1.0"

__all__ = [
    "FigureResult",
    "plot_belief_simplex",
    "plot_centrality_box",
    "plot_total_opinion",
    "PlotsError",
    "SchemaError",
    "EmptyInputError",
    "UnsupportedError",
    "TraceSet",
    "SweepTable",
    "read_trace_dir",
    "read_sidecar",
    "read_sweep_csv",
    "__version__",
]
