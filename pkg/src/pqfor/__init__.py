"""PQ flexibility aggregation at the HV/MV interconnection."""

__version__ = "0.1.0"
