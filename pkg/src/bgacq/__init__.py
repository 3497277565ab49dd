"""Convolution quadrature built on block generalized Adams schemes."""
from .errors import (AssumptionViolation, BGACQError, ConditioningError, FitError,
                     KernelDomainError, NearDefectiveError, OracleError, SingularityError,
                     UnsupportedKernelError)
from .kernels import (Kernel, bessel_kernel, custom_kernel, difference_kernel,
                      exponential_kernel, fractional_kernel, identity_kernel,
                      parse_kernel, periodic_sum_kernel)
from .quadrature import (WeightTable, baseline_lmcq_weights, bga_ode_step_sweep,
                         compute_weights, corrected_apply, correction_weights,
                         forward_apply, load_weights, sample, solve_convolution_equation)
from .scheme import BlockTableau, Grid, SchemeParams, assemble_tableau, tableau
from .stability import (certify_assumption, dissipation_expansion, min_block_size,
                        stability_at_infinity, stability_boundary, stability_function)

__version__ = "0.1.0"
