"""Wavelet-sieve profile estimation for single-index regression.

The package fits E[Y|X] = f(X' theta) with an unknown scalar link f
expanded in a compactly supported orthonormal wavelet dictionary and a
unit direction theta on the positive half-sphere, via alternating
maximization with grid-search initialization.  Profile inference
(Wilks statistics, Fisher-expansion residuals, confidence sets), a
projection-pursuit extension, and a Monte Carlo harness sit on top.
"""

from .errors import (ConfigurationError, DataError, DegenerateDataError,
                     DiagnosticError, InitializationError,
                     RankDeficiencyError, ResourceError, WavesieveError)
from .estimator import (AlternatingTrace, EstimatorConfig, SieveEstimate,
                        alternate, eta_step, fit, grid_init, profiled_loglik,
                        theta_step)
from .inference import (ConfidenceSet, FisherExpansion, ProfileQuantities,
                        confidence_set, estimate_sigma2, fisher_expansion,
                        fisher_residual, profile_blocks, profile_score,
                        wilks_stat)
from .likelihood import (FullParam, LikelihoodBlocks, hessian_blocks,
                         link_deriv, link_eval, link_second_deriv, loglik,
                         score)
from .model import (Dataset, LinkSpec, ModelSpec, child_seed, simulate,
                    truncate)
from .pursuit import PursuitComponent, PursuitModel, fit_pursuit, predict
from .sphere import (SphereAngles, SphereGrid, angles_of, embed, grad_embed,
                     hess_embed, make_grid)
from .wavelet import (Basis, BasisIndex, WaveletTable, admissible_sizes,
                      basis_deriv_vector, basis_matrix, basis_vector,
                      build_table, enumerate_levels, eval_basis,
                      eval_basis_deriv, gram_matrix, make_basis,
                      overlap_count, support)

__version__ = "0.1.0"
