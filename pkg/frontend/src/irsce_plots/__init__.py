"""Figure rendering for channel-estimation sweep CSV logs."""

from .plots import PlotSpec, SchemaError, collect_series, plot_nmse

__version__ = "0.1.0"
