"""Nearest-point sets under finite increasing families of norms on R^d."""

from .norms import (
    Lp, WeightedLp, TruncSeminorm, Sum, MaxPrefix, NormFamily, NotIncreasingError,
    eval_norm, is_norm, sum_norm, make_increasing, certify_increasing, certify_pair,
    frechet_metric, build_l2plus_family, spec_to_json, spec_from_json,
    family_to_json, family_from_json,
)
from .geometry import (
    Ball, Polytope, PointCloud, BudgetExceeded, contains, contains_many,
    discretize, convexity_probe, set_to_json, set_from_json,
)
from .projection import (
    NearestPointResult, ChainResult, NotExteriorError, SolverAccuracyError,
    NestingViolation, nearest_point_set, common_nearest_two, common_nearest_family,
    uniqueness_check,
)
from .convexity import ModulusEstimate, modulus_of_convexity, uc_verdict, verify_pair
from .oracle import OracleReport, grid_argmin, compare, hausdorff
from .instances import Instance, SchemaError, load_instance, parse_instance

__version__ = "0.1.0"
