"""Log-log convergence figures for study CSVs."""

from .render import PlotError, StudySeries, fit_slope, read_study_csv, render

__version__ = "0.1.0"

__all__ = ["PlotError", "StudySeries", "fit_slope", "read_study_csv", "render"]
