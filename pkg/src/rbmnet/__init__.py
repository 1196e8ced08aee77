"""rbmnet: learning RBMs through their induced two-layer networks.

Core objects: ``Rbm`` / ``SupervisedRbm`` models, ``SpinDataset`` samples,
``SparsePolynomial`` predictors and MRF potentials.  The pipeline modules
are ``structure`` (neighborhood recovery), ``distlearn`` (distribution
recovery), ``supervised`` (label prediction) and ``experiments`` (drivers).
"""

from ._kernels import IMPL as kernel_impl
from .dataset import SpinDataset
from .polynomial import SparsePolynomial, coefficient_l1_distance
from .rbm import (Rbm, NormBounds, conditional_mean, conditional_mean_oracle,
                  exact_visible_pmf, f_beta, gibbs_sample, load_model,
                  min_marginal_bound, norm_bounds, rbm_from_tanh_network,
                  save_model)
from .approx import (IntervalSpec, MonomialBasis, Polynomial1D,
                     approx_error_bound, best_poly_approx, choose_degree,
                     l1_budget, monomial_features)
from .logistic import (RegressionConfig, excess_loss_bound, fit_l1_logistic,
                       learn_network_predictor, logistic_grad, logistic_loss)
from .structure import (NeighborhoodMap, StructureConfig, recover_structure,
                        test_two_hop)
from .distlearn import (ClipSpec, MrfPotential, distribution_from_predictors,
                        distribution_from_structure,
                        empirical_conditional_table, fourier_from_predictor,
                        skl_divergence, tv_distance_exact)
from .supervised import (LabelPredictor, SupervisedConfig, SupervisedRbm,
                         avg_conditional_covariance, fit_bias,
                         fit_conditional_mrfs, learn_supervised_nbhd,
                         predict_label, tau_threshold)
from .generators import GeneratorSpec, generate_model
from .experiments import ExperimentReport, run_experiment

__version__ = "0.1.0"
