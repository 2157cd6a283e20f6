"""Exact computation with adic towers over F_p[[x1..xn]].

Complete modules are represented level-by-level as compatible families
of finite-dimensional modules over the artinian quotients A_k; torsion
and local cohomology live as directed systems with explicit stage
budgets.  Every verdict that depends on the precision window carries an
explicit stamp.
"""

from .ring import (ConfigMismatch, PrecisionError, RingConfig, SeriesMatrix,
                   TruncatedSeries)

__version__ = "0.1.0"

__all__ = [
    "RingConfig",
    "TruncatedSeries",
    "SeriesMatrix",
    "PrecisionError",
    "ConfigMismatch",
]
