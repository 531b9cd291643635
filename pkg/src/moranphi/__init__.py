"""Dimensions of random Moran sets and the measures they carry.

A finite random model draws, at every level of the construction, one atom
of a finite parameter space: an IFS of ``K`` similarities together with a
probability vector on the children.  This package computes

* ``D``, the almost-sure Hausdorff dimension of the random set;
* the almost-sure upper and lower (large-Φ) dimensions of the random
  measure, by bisection on a monotone predicate and by exhaustive search
  over selectors;
* weights realising prescribed dimensions, and the gap that appears when
  weights are independent of the scales;
* an exact minimisation of the upper dimension over single weights for
  ``K = 2``;
* Monte Carlo paths that corroborate all of the above.
"""

from .dims import DimensionReport, dim_report, fixed_point_residual, hausdorff_d, lowdim, updim
from .errors import (
    ConsistencyError,
    EnumerationCapError,
    ModelValidationError,
    MoranError,
    PreconditionError,
    SchemaError,
)
from .gcore import Selector, argmax_index, argmin_index, g_lower, g_upper, h_of_selector
from .model import (
    IfsAtom,
    K2Spec,
    MoranModel,
    WeightAtom,
    dumps_model,
    load_k2,
    load_model,
    read_model,
    to_k2,
    validate_model,
)

__version__ = "0.1.0"

__all__ = [
    "ConsistencyError",
    "DimensionReport",
    "EnumerationCapError",
    "IfsAtom",
    "K2Spec",
    "ModelValidationError",
    "MoranError",
    "MoranModel",
    "PreconditionError",
    "SchemaError",
    "Selector",
    "WeightAtom",
    "argmax_index",
    "argmin_index",
    "dim_report",
    "dumps_model",
    "fixed_point_residual",
    "g_lower",
    "g_upper",
    "h_of_selector",
    "hausdorff_d",
    "load_k2",
    "load_model",
    "lowdim",
    "read_model",
    "to_k2",
    "updim",
    "validate_model",
]
