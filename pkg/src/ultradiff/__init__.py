"""Numerical toolkit for ultradifferentiable regularity analysis.

Subpackages cover weight-sequence calculus, FBI-type transforms with
elliptic generating polynomials, a catalog of test distributions,
wavefront-set estimation by decay fitting, truncated-Taylor almost-
analytic extensions with dbar-bound verification, and polynomial symbol
calculus (characteristic sets, bicharacteristics, brackets, finite type).
"""

from .errors import (
    DivergentLimit,
    SymbolParseError,
    TrajectoryBlowup,
    TruncationExhausted,
    UltradiffError,
    UnderResolvedGrid,
)

__version__ = "0.1.0"
