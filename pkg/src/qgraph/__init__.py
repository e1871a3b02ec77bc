"""Negative spectrum and scattering for matrix Schroedinger operators on star graphs."""

from .errors import CrossCheckError, InputError, QGraphError, SingularityError
from .graph import MetricGraph, SpectralPoint, build_line_with_deltas, build_star, validate
from .potential import EdgePotential

__all__ = ["CrossCheckError", "EdgePotential", "InputError", "MetricGraph", "QGraphError", "SingularityError",
           "SpectralPoint", "build_line_with_deltas", "build_star", "validate"]
