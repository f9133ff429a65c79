"""Pseudo-variograms: validity checks, Schoenberg-type transforms, multivariate
Gneiting space-time models, and simulation of the corresponding random fields."""

from .models import (AffineBernstein, BoundedExpBernstein, BoxStieltjes, Composed,
                     ConstantFunction, DelayedLMC, ExpCM, ExponentialCovariance,
                     InversePowerCM, LMCFactor, LogBernstein, MatrixFunction, NoisyCommon,
                     PowerBernstein, PowerVariogram, PseudoVariogramModel, Shift, Tabulated,
                     eval_pseudo_variogram, eval_scalar, sample_laplace_measure)
from .definiteness import (DefinitenessReport, SymmetryError, Verdict, assemble_gamma_block,
                           brute_force_qf_search, check_almost_nd, check_cnd,
                           check_intersection_triviality, check_pd, check_psd_matrix,
                           check_pseudo_variogram, check_sqrt_inequality)
from .transforms import (bernstein_compose, build_ck_kernel, general_laplace_map,
                         inverse_schoenberg_residual, laplace_map, schoenberg_map)
from .gneiting import (MultivariateExtendedGneiting, OffsetFunction, OriginalGneiting,
                       StieltjesGneiting, assemble_spacetime_cov, eval_gneiting)
from .simulate import (FieldSample, SimulationPlan, run_simulation, sample_gaussian_pseudo,
                       simulate_spectral_replicate)
from .estimate import (compare_report, empirical_cross_covariance,
                       empirical_pseudo_variogram)

__version__ = "0.1.0"
