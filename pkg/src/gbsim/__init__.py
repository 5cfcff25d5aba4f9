"""Phase-space Monte Carlo simulation of Gaussian boson sampling networks.

Squeezed or thermalized inputs are sampled in normally ordered
(doubled-variable) or sigma-ordered classical phase spaces, transmitted
through lossy linear networks, and reduced to measurable quantities:
grouped click-count distributions, quadrature correlations, and
multipartite entanglement witnesses.  Exact oracles (Gaussian determinant
formulas and a small-system Fock brute force) plus chi-squared machinery
validate every estimator and compare simulations with measured count
records.
"""

from .phase_space import (OrderingParam, POSITIVE_P, WIGNER, Q_FUNCTION,
                          PhaseSpaceEnsemble, SqueezerSpec, derive_moments,
                          sample_positive_p, sample_sigma_ordered)
from .network import (TransmissionMatrix, decoherence_matrix_sqrt, haar_unitary,
                      read_transmission_file, scale_transmission,
                      transform_positive_p, transform_sigma_ordered,
                      write_transmission_file)
from .clicks import (GroupPartition, GroupedDistribution,
                     bin_experimental_patterns, click_weights, glauber_moment,
                     grouped_probability, marginal_click_probability)
from .quadrature import (QuadratureSpec, WitnessReport, build_entanglement_unitary,
                         epr_chain_input_spec, evaluate_witness,
                         quadrature_combination_variance, quadrature_correlation)
from .validation import BinnedComparison, chi_square, subensemble_stats, z_scores
from .oracles import (GaussianMoments, analytic_iid_distribution,
                      exact_pattern_distribution, exact_total_count_distribution,
                      fock_truncation_oracle, input_gaussian_moments,
                      output_gaussian_moments, quadrature_covariance,
                      sample_click_patterns, torontonian_probability,
                      vacuum_probability)
from .pipeline import stream_grouped, stream_witness

__version__ = "0.1.0"
