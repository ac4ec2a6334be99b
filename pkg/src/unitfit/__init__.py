"""Median-based unit Rayleigh (MBUR) distribution toolkit.

Distribution functions live in :mod:`unitfit.mbur`, estimators in
:mod:`unitfit.estimation`, benchmark families in :mod:`unitfit.competitors`,
goodness-of-fit tools in :mod:`unitfit.gof`, simulation studies in
:mod:`unitfit.simulation` and the embedded datasets in
:mod:`unitfit.datasets`.
"""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ConvergenceError,
    DataError,
    DegenerateSampleError,
    DomainError,
    UnitfitError,
)
from .sample import Sample  # noqa: E402

__all__ = [
    "__version__",
    "ConvergenceError",
    "DataError",
    "DegenerateSampleError",
    "DomainError",
    "UnitfitError",
    "Sample",
]
