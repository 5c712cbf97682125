"""kuokit: empirical verification of Kuo-type jet-sufficiency criteria.

The package evaluates, for polynomial map germs f: (R^n, 0) -> (R^p, 0) and a
closed set Sigma containing 0, the matrix functionals (Kuo distance, Rabier's
function, minor ratios, Gram determinants) and the inequality conditions that
characterize V-sufficiency of relative jets: sampling radial shells near 0,
filtering horn-neighbourhoods, estimating Lojasiewicz-type exponents by
log-log regression, and grading each condition as holds / fails /
inconclusive with witnesses.
"""

from .version import __version__
from .errors import (ApproximationError, CapabilityError, ConfigError, EstimationError,
                     InputError, KuokitError, SamplingError)
from .polynomials import Poly, parse_poly
from .germs import (PerturbationFamily, PolyMap, eval_map, jacobian,
                    make_perturbation_family, truncate_jet)
from .functionals import (dual_apply, eta, eta_tilde, gram_det, jacobian_minor_sum,
                          kuo_distance, rabier_nu)
from .sigma import SigmaSet, distance_to_sigma, project_to_sigma
from .sampling import (ArcProbe, Shell, ShellSample, arc_orders, horn_filter,
                       sample_shells)
from .conditions import (ConditionVerdict, ExponentEstimate, Thresholds,
                         check_certificate, check_dual4, check_gram3, check_K,
                         check_K_delta, check_K_tilde, check_K_tilde_delta, check_KZ,
                         check_singular_containment, estimate_exponent)
from .config import ProblemConfig, load_config
from .report import AnalysisReport, emit_report, run_analysis

__all__ = [
    "__version__",
    "KuokitError", "InputError", "CapabilityError", "ApproximationError",
    "SamplingError", "EstimationError", "ConfigError",
    "Poly", "parse_poly",
    "PolyMap", "PerturbationFamily", "eval_map", "jacobian", "truncate_jet",
    "make_perturbation_family",
    "kuo_distance", "rabier_nu", "eta", "eta_tilde", "gram_det",
    "jacobian_minor_sum", "dual_apply",
    "SigmaSet", "distance_to_sigma", "project_to_sigma",
    "Shell", "ShellSample", "ArcProbe", "sample_shells", "horn_filter", "arc_orders",
    "Thresholds", "ExponentEstimate", "ConditionVerdict", "estimate_exponent",
    "check_K", "check_K_tilde", "check_gram3", "check_dual4",
    "check_K_delta", "check_K_tilde_delta", "check_KZ", "check_certificate",
    "check_singular_containment",
    "ProblemConfig", "load_config",
    "AnalysisReport", "run_analysis", "emit_report",
]
