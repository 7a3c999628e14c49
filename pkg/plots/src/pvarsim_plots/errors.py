class PlotError(Exception):
    """Base error for the plotting component."""


class SchemaError(PlotError):
    """Input CSV does not match the documented schema."""
