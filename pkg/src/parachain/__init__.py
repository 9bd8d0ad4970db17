"""Parametrically driven trapped-ion chains: response, topology, steady states,
dynamics and force sensing."""

__version__ = "0.1.0"

from .errors import (
    ConfigError,
    ConsistencyError,
    GaplessPointError,
    NumericalError,
    ParachainError,
    SingularProbeError,
    UnstableSystemError,
)
from .model import (
    ChainParams,
    DynamicalMatrix,
    PhysicalParams,
    build_bloch_matrix,
    build_dynamical_matrix,
    build_ring_dynamical_matrix,
)
from .response import greens_function, steady_response, svd_of_inverse_propagator
from .steadystate import lyapunov_steady_state, phonon_numbers, stability
from .topology import phase_diagram, symmetry_class, winding_number
from .dynamics import DriveSpec, integrate_coherences, integrate_correlations, relaxation_time
from .sensing import SensorConfig, sensing_report, sensing_table

__all__ = [
    "ChainParams", "ConfigError", "ConsistencyError", "DriveSpec", "DynamicalMatrix",
    "GaplessPointError", "NumericalError", "ParachainError", "PhysicalParams", "SensorConfig",
    "SingularProbeError", "UnstableSystemError", "build_bloch_matrix", "build_dynamical_matrix",
    "build_ring_dynamical_matrix", "greens_function", "integrate_coherences",
    "integrate_correlations", "lyapunov_steady_state", "phase_diagram", "phonon_numbers",
    "relaxation_time", "sensing_report", "sensing_table", "stability", "steady_response",
    "svd_of_inverse_propagator", "symmetry_class", "winding_number",
]
