"""Hybrid Pedestrian Simulator - Run Outputs

Rendering lives in src.io.render and pulls in matplotlib on import.
"""

from .schemas import load_schema, validate_run_dir
from .writers import RunWriter

__all__ = ["RunWriter", "load_schema", "validate_run_dir"]
