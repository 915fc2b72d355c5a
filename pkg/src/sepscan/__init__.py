"""Separability probabilities of random bipartite quantum states as functions
of the subsystem Bloch radii: exact closed forms and Monte Carlo estimation."""

__version__ = "0.1.0"

from .exceptions import SepscanError, ValidationError  # noqa: E402
from .histogram import JointRadialHistogram, SeparabilityHistogram  # noqa: E402
from .measures import MeasureSpec, Sampler  # noqa: E402
from .qstate import DensityMatrix, XStateParams, validate  # noqa: E402
from .radii import BlochRadiiTransformer  # noqa: E402

__all__ = [
    "__version__",
    "SepscanError",
    "ValidationError",
    "DensityMatrix",
    "XStateParams",
    "validate",
    "MeasureSpec",
    "Sampler",
    "JointRadialHistogram",
    "SeparabilityHistogram",
    "BlochRadiiTransformer",
]
