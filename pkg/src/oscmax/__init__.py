"""Maximal operators and weight classes adapted to the harmonic oscillator.

Geometry of the shrinking dyadic grid, the rescaled Mehler heat kernel
with its peak-time analysis, discretized maximal operators, Muckenhoupt
type weight sweeps, and a seeded verification harness.
"""

from .backend import BACKEND, get_backend
from .errors import (
    DomainError, NegativeValueError, NoInteriorMaxError, NonIntegrableError,
    OscmaxError, OutOfDomainError, TruncatedGridError, UsageError,
)
from .geometry import Box, GCube, Grid, GridConfig, Region
from .kernels import (
    alpha, critical_radius, kernel_extremum, log_heat_kernel,
    log_hermite_kernel, log_unrescaled_kernel, psi_theta, t_max,
)
from .operators import (
    GridFunction, TimeGrid, far_adapted_maximal, heat_maximal, ingest,
    maximal_classical, maximal_generic, maximal_local, maximal_theta,
)
from .weights import (
    WeightSpec, ap_constant, ap_ratio, ap_theta_constant, extend_weight,
    far_pair_bound,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "Box",
    "DomainError",
    "GCube",
    "Grid",
    "GridConfig",
    "GridFunction",
    "NegativeValueError",
    "NoInteriorMaxError",
    "NonIntegrableError",
    "OscmaxError",
    "OutOfDomainError",
    "Region",
    "TimeGrid",
    "TruncatedGridError",
    "UsageError",
    "WeightSpec",
    "alpha",
    "ap_constant",
    "ap_ratio",
    "ap_theta_constant",
    "critical_radius",
    "extend_weight",
    "far_adapted_maximal",
    "far_pair_bound",
    "get_backend",
    "heat_maximal",
    "ingest",
    "kernel_extremum",
    "log_heat_kernel",
    "log_hermite_kernel",
    "log_unrescaled_kernel",
    "maximal_classical",
    "maximal_generic",
    "maximal_local",
    "maximal_theta",
    "psi_theta",
    "t_max",
]
