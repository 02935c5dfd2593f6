"""Discrete-time (r, s)-immunization on graphs: simulation, exact solving, pathwidth bounds,
and width-2 constructions for subdivided trees."""

from .engine import ModelParams, Protocol, run, clears
from .graphs import Graph

__version__ = "0.1.0"

__all__ = ["Graph", "ModelParams", "Protocol", "run", "clears", "__version__"]
