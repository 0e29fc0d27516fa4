"""Figure rendering for adaptlin simulation outputs."""

__version__ = "0.1.0"

from .render import FIGURES, PlotSpec, build_figure, render
from .schema import SchemaError

__all__ = ["FIGURES", "PlotSpec", "SchemaError", "build_figure", "render"]
