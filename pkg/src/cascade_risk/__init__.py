"""Value-at-risk of cascading collisions in noisy, delayed platoons.

The pipeline: build a communication graph, check every Laplacian mode
against the delay stability region, assemble the steady-state covariance
of inter-vehicle distances, condition on observed failures, and read
off the three-branch collision risk. A Monte Carlo integrator provides
an independent check of the covariance, and complete graphs get a
closed-form fast path.
"""
import os

# Best-effort thread cap: BLAS libraries read these at import time, so
# set them before numpy loads anywhere in this process.
_threads = os.environ.get("CASCADE_RISK_THREADS")
if _threads and _threads.isdigit():
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS",
                 "MKL_NUM_THREADS", "NUMEXPR_NUM_THREADS"):
        os.environ.setdefault(_var, _threads)
del os

__version__ = "0.1.0"

from .closed_form import (AdjacencyCase, TridiagInverse, case_stats,
                          classify, complete_profile, tridiag_inverse)
from .covariance import (CovarianceMatrix, NoiseParams, PlatoonParams,
                         complete_graph_covariance, complete_graph_sigma_c,
                         f_integral, steady_state_covariance)
from .errors import (CascadeRiskError, ConfigError, DivergenceError,
                     IllConditionedScenarioError, InvalidParameterError,
                     InvalidQueryError, InvalidSizeError, NearBoundaryError,
                     NumericalError, UnstablePlatoonError)
from .graph import (LaplacianSpectrum, WeightedGraph, add_pair_edges,
                    build_complete, build_custom, build_path, build_pcycle,
                    laplacian, pair_difference_matrix, spectrum)
from .risk import (ConditionalDistribution, FailureScenario, ProfileEntry,
                   RiskQuery, RiskResult, condition, iota, naive_risk,
                   partition_blocks, risk_profile, var_risk)
from .simulate import (EmpiricalCovariance, SimConfig, SimState,
                       delay_steps, initial_state, run, step)
from .stability import (ModeStability, StabilityReport, check_platoon,
                        in_region_S, region_bound, solve_a)

__all__ = [
    "AdjacencyCase", "CascadeRiskError", "ConditionalDistribution",
    "ConfigError", "CovarianceMatrix", "DivergenceError",
    "EmpiricalCovariance", "FailureScenario", "IllConditionedScenarioError",
    "InvalidParameterError", "InvalidQueryError", "InvalidSizeError",
    "LaplacianSpectrum", "ModeStability", "NearBoundaryError", "NoiseParams",
    "NumericalError", "PlatoonParams", "ProfileEntry", "RiskQuery",
    "RiskResult", "SimConfig", "SimState", "StabilityReport", "TridiagInverse",
    "UnstablePlatoonError", "WeightedGraph", "add_pair_edges",
    "build_complete", "build_custom", "build_path", "build_pcycle",
    "case_stats", "check_platoon", "classify", "complete_graph_covariance",
    "complete_graph_sigma_c", "complete_profile", "condition", "delay_steps",
    "f_integral",
    "initial_state", "in_region_S", "iota", "laplacian", "naive_risk",
    "pair_difference_matrix", "partition_blocks", "region_bound",
    "risk_profile", "run", "spectrum", "solve_a", "step",
    "steady_state_covariance", "var_risk",
]
