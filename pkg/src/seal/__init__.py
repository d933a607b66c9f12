"""Spatially bounded agent-based economy simulator and experiment harness."""

__version__ = "0.1.0"

from .params import Params  # noqa: F401
