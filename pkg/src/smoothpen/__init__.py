"""Smooth exact penalty functions and empirical exact-penalty-parameter estimation."""

from .benchmarks import BenchmarkInstance, benchmark_registry, get_benchmark
from .errors import (ConfigError, DomainError, EvaluationError, InputError, SmoothPenError,
                     SolverError, UnsupportedError)
from .lab import (ExactnessReport, Relation, Target, demonstrate_nonexactness,
                  estimate_exact_parameter, is_exact_at, verify_beta_reduction,
                  verify_l1_bounds, verify_square_relation, verify_transform_bounds,
                  verify_w_bounds)
from .penalty import (Family, PenaltyConfig, distance, distance_penalty, l1, l1_penalty,
                      minimize_eps, reduced_form, reduced_penalty, smooth, smooth_penalty_eval,
                      smooth_penalty_grad)
from .problem import Problem, feasibility_residual
from .solver import SolveReport, SolveSettings, grid_oracle, minimize_family, minimize_penalized
from .transforms import (Transform, custom, identity, linear, parse_transform, power,
                         rational_barrier, sqrt_double)
from ._kernels import BACKEND

__version__ = "0.1.0"
