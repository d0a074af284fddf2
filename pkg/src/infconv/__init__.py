"""Numerical laboratory for the Hopf-Lax inf-convolution semigroup and
the deficits of the sharp hypercontractivity and log-Sobolev
inequalities it governs, with stability-rate experiments around the
extremizer families."""

from .funcrep import (GAUSSIAN, LEBESGUE, DivergenceError, GridFunction,
                      Measure, RadialProfile, TailDecay, entropy, grad_norm_p,
                      load_function, log_norm_alpha, make_radial_grid,
                      radial_integral, save_function, schwarz_rearrange)
from .hopflax import (HopfLaxParams, hj_derivative_check,
                      inf_convolve_bruteforce, inf_convolve_fast,
                      radial_inf_convolve)
from .deficits import (DeficitReport, HCParams, NegativeDeficitError,
                       ghc_deficit, ghc_glsi_limit, glsi_deficit, hc_deficit,
                       hc_lsi_limit, hc_optimal_constant, lsi_deficit,
                       lsi_optimal_constant, y_value)
from .extremizer import (ExtremizerParams, fit_translation, ghc_params,
                         hc_params, l1_model_distance, lsi_params)
from .families import Family, analytic_values, parse_family, sample
from .pl import (PLTriple, build_gaussian_triple, build_hc_triple,
                 check_pl_hypothesis, pl_conclusion_distances, pl_epsilon)

__version__ = "0.1.0"
