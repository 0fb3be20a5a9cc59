"""Figure rendering for pinchsim CSV and density-matrix exports."""

__version__ = "0.1.0"

from .figures import PlotJob, render
from .io import SchemaError

__all__ = ["PlotJob", "render", "SchemaError", "__version__"]
