"""Dynamics of homogeneous polynomials on classical sequence spaces.

High-precision orbit iteration in log-polar arithmetic, certified
Julia/Fatou classification, and the constructive cyclicity witnesses
(d-dense projections, transitivity and Gamma witnesses, periodic
points, greedy disk-supercyclic schedules).
"""

from .precision import PrecisionConfig, DEFAULT_PRECISION
from .logcomplex import LogComplex, lc_mul, lc_ipow, root_to_one
from .seqspace import SpaceTag, TailModel, SeqVector

__version__ = "0.1.0"

__all__ = [
    "PrecisionConfig", "DEFAULT_PRECISION",
    "LogComplex", "lc_mul", "lc_ipow", "root_to_one",
    "SpaceTag", "TailModel", "SeqVector",
    "__version__",
]
