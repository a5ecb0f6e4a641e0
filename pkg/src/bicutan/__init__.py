"""Microsimulation of the Bicutan Roundabout with a traffic-scheme catalog
and a replicated-experiment statistics pipeline."""

__version__ = "0.1.0"

from ._jit import NUMBA_ENABLED

__all__ = ["NUMBA_ENABLED", "__version__"]
