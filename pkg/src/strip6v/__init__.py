"""Stochastic six-vertex model on a strip with two open boundaries.

Simulation, exact finite-N stationary measures, the matrix product ansatz and
Askey-Wilson asymptotics of the mean density.
"""

from .askey_wilson import (AWMeasure, PhaseReport, aw_expectation, aw_measure, log_partition_Z,
                           mean_density, partition_Z, phase_limit, phase_sweep, qpochhammer)
from .dynamics import evolve, evolve_coupled, evolve_ensemble, sample_vertex
from .exact import (ReducibleChainError, asep_generator, scaling_limit_check, stationary_exact,
                    transition_matrix, verify_tilting)
from .lattice import (DownRightPath, LocalMove, PathError, apply_local_move, build_path,
                      decompose_translation, parse_path)
from .mpa import (NormalForm, SingularCaseError, bernoulli_special, dehp_value, mpa_measure,
                  parity_bernoulli, partition_mpa, qvolume_measure)
from .params import DerivedParams, ParameterError, StripParams, derive_params, kappa

__version__ = "0.1.0"

__all__ = [
    "AWMeasure", "DerivedParams", "DownRightPath", "LocalMove", "NormalForm", "ParameterError",
    "PathError", "PhaseReport", "ReducibleChainError", "SingularCaseError", "StripParams",
    "apply_local_move", "asep_generator", "aw_expectation", "aw_measure", "bernoulli_special",
    "build_path", "decompose_translation", "dehp_value", "derive_params", "evolve", "evolve_coupled",
    "evolve_ensemble", "kappa", "log_partition_Z", "mean_density", "mpa_measure", "parity_bernoulli",
    "parse_path", "partition_Z", "partition_mpa", "phase_limit", "phase_sweep", "qpochhammer",
    "qvolume_measure", "sample_vertex", "scaling_limit_check", "stationary_exact", "transition_matrix",
    "verify_tilting",
]
