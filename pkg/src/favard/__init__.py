"""Favard length of rational product Cantor sets: cyclotomic analysis,
fibering, SLV certificates, projections and Riesz products."""

__version__ = "0.1.0"

from .cantor import (CantorConfig, CantorIterate, DirectionParam, FavardEstimate, cantor_iterate,
                     direction_from_t, exponent_calculator, favard_estimate, max_counting,
                     multiplicity_report, projection_profile, stacking_parameters, verify_l2_bound)
from .exceptions import (BudgetExceeded, ConfigError, FavardError, ResolutionTooLow, SearchBudgetExceeded,
                         SearchFailed, UnitCircleAmbiguous, VerificationFailed)
from .fibering import (AssignmentFunction, check_theorem_hypotheses, fib_value, find_fibered_subset,
                       is_fibered, min_fib)
from .intervals import IntervalSet, PiecewiseLinear, StepFunction
from .mask_poly import (DigitSet, MaskPolynomial, cyclotomic, cyclotomic_divisors,
                        cyclotomic_factorization, mask_polynomial, weight_vector)
from .riesz import PhiFunction, PhiProduct, RieszSpec, phi_eval, plancherel_check, psi_function, \
    riesz_integral, ssv_detect
from .slv import (cluster_partition, gamma_intersect_translated, gamma_single, multiscale_slv,
                  sigma_set, witness_function)
