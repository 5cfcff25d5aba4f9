"""Click statistics: weights, grouped estimator, pattern ingestion."""

import io

import numpy as np
import pytest

from gbsim import (GroupPartition, SqueezerSpec, WIGNER,
                   analytic_iid_distribution, bin_experimental_patterns,
                   click_weights, exact_total_count_distribution,
                   glauber_moment, grouped_probability, haar_unitary,
                   marginal_click_probability, output_gaussian_moments,
                   sample_positive_p, sample_sigma_ordered, stream_grouped,
                   transform_positive_p, BinnedComparison, chi_square)

CLICK_R1 = 0.35194572633611454      # 1 - 1/cosh(1)
THERMAL_P = 0.5800256583859739      # n/(1+n) at n = sinh(1)^2
SINH2_1 = 1.3810978455418155

THERMAL_UNIT = SqueezerSpec([1.0], decoherence_fraction=1.0)


def squeezed_ensemble(r=1.0, count=1000, size=1000, seed=7):
    return sample_positive_p(SqueezerSpec([r]), seed=seed,
                             subensemble_count=count, subensemble_size=size)


class TestClickWeights:
    def test_vacuum_mode(self):
        ens = sample_positive_p(SqueezerSpec([0.0]), seed=1,
                                subensemble_count=2, subensemble_size=10)
        w0, w1 = click_weights(ens)
        assert np.all(w0 == 1.0)
        assert np.all(w1 == 0.0)

    def test_weights_sum_to_one_per_sample(self):
        ens = squeezed_ensemble(count=10, size=200)
        w0, w1 = click_weights(ens)
        assert np.abs(w0 + w1 - 1.0).max() <= 4 * np.finfo(float).eps

    def test_rejects_sigma_ordered(self):
        ens = sample_sigma_ordered(SqueezerSpec([1.0]), WIGNER, seed=1,
                                   subensemble_count=1, subensemble_size=10)
        with pytest.raises(ValueError):
            click_weights(ens)


class TestMarginalClickProbability:
    def test_vacuum_exactly_zero(self):
        ens = sample_positive_p(SqueezerSpec([0.0]), seed=2,
                                subensemble_count=3, subensemble_size=10)
        est, err = marginal_click_probability(ens, 0)
        assert est == 0.0 and err == 0.0

    def test_squeezed_mode(self):
        est, err = marginal_click_probability(squeezed_ensemble(), 0)
        assert abs(est - CLICK_R1) < 5 * err

    def test_thermal_mode(self):
        ens = sample_positive_p(THERMAL_UNIT, seed=8, subensemble_count=1000,
                                subensemble_size=1000)
        est, err = marginal_click_probability(ens, 0)
        assert abs(est - THERMAL_P) < 5 * err

    def test_index_out_of_range(self):
        with pytest.raises(ValueError):
            marginal_click_probability(squeezed_ensemble(count=1, size=10), 1)


class TestGlauberMoment:
    def test_vacuum_first_moment_zero(self):
        ens = sample_positive_p(SqueezerSpec([0.0]), seed=3,
                                subensemble_count=2, subensemble_size=10)
        est, err_re, err_im = glauber_moment(ens, [1])
        assert est == 0.0

    def test_first_moment_matches_photon_number(self):
        est, err_re, _ = glauber_moment(squeezed_ensemble(), [1])
        assert abs(est.real - SINH2_1) < 5 * err_re

    def test_thermal_second_factorial_moment(self):
        # <:n^2:> = 2 n^2 for a thermal mode; n = 1 at r = asinh(1)
        spec = SqueezerSpec([float(np.arcsinh(1.0))], decoherence_fraction=1.0)
        ens = sample_positive_p(spec, seed=4, subensemble_count=1000,
                                subensemble_size=1000)
        est, err_re, _ = glauber_moment(ens, [2])
        assert abs(est.real - 2.0) < 5 * err_re

    def test_zero_exponents_rejected(self):
        with pytest.raises(ValueError):
            glauber_moment(squeezed_ensemble(count=1, size=10), [0])


class TestGroupPartition:
    def test_from_sizes(self):
        part = GroupPartition.from_sizes([2, 3])
        assert part.groups == ((0, 1), (2, 3, 4))
        assert part.sizes == (2, 3)
        assert part.tensor_shape() == (3, 4)

    def test_overlap_rejected(self):
        with pytest.raises(ValueError):
            GroupPartition([[0, 1], [1, 2]])

    def test_empty_group_rejected(self):
        with pytest.raises(ValueError):
            GroupPartition([[0], []])

    def test_out_of_range_detected(self):
        part = GroupPartition([[0, 5]])
        with pytest.raises(ValueError):
            part.validate_for(4)


class TestGroupedProbability:
    def test_vacuum_is_point_mass(self):
        ens = sample_positive_p(SqueezerSpec([0.0] * 5), seed=5,
                                subensemble_count=2, subensemble_size=10)
        dist = grouped_probability(ens, GroupPartition.from_sizes([3, 2]))
        assert dist.probabilities[0, 0] == pytest.approx(1.0, abs=1e-14)
        rest = dist.probabilities.copy()
        rest[0, 0] = 0.0
        assert np.abs(rest).max() <= 1e-14

    def test_normalization_exact_at_single_sample(self):
        spec = SqueezerSpec.uniform(6, 1.0, squeezed_modes=3)
        ens = sample_positive_p(spec, seed=6, subensemble_count=1,
                                subensemble_size=1)
        out = transform_positive_p(ens, haar_unitary(6, seed=7))
        dist = grouped_probability(out, GroupPartition.from_sizes([6]))
        assert abs(dist.total() - 1.0) <= 1e-10

    def test_normalization_exact_generic(self):
        spec = SqueezerSpec.uniform(6, 1.0, squeezed_modes=3,
                                    decoherence_fraction=0.2)
        ens = sample_positive_p(spec, seed=8, subensemble_count=20,
                                subensemble_size=100)
        out = transform_positive_p(ens, haar_unitary(6, seed=9))
        dist = grouped_probability(out, GroupPartition.from_sizes([2, 2, 2]))
        assert abs(dist.total() - 1.0) <= 1e-10

    def test_marginal_consistency(self):
        spec = SqueezerSpec.uniform(7, 0.9, squeezed_modes=4)
        ens = sample_positive_p(spec, seed=10, subensemble_count=10,
                                subensemble_size=200)
        out = transform_positive_p(ens, haar_unitary(7, seed=11))
        joint = grouped_probability(out, GroupPartition([[0, 1, 2], [3, 4]]))
        single = grouped_probability(out, GroupPartition([[0, 1, 2]]))
        summed = joint.probabilities.sum(axis=1)
        assert np.abs(summed - single.probabilities).max() <= 1e-10

    def test_permutation_equivariance_exact(self):
        spec = SqueezerSpec.uniform(6, 0.8, squeezed_modes=3)
        ens = sample_positive_p(spec, seed=12, subensemble_count=5,
                                subensemble_size=100)
        out = transform_positive_p(ens, haar_unitary(6, seed=13))
        base = grouped_probability(out, GroupPartition([[0, 1, 2], [3, 4, 5]]))
        # relabel modes via a permutation and permute the partition's ordered
        # groups the same way: the tensor must come back bit-identical
        perm = np.array([4, 2, 0, 5, 1, 3])
        from gbsim.phase_space import PhaseSpaceEnsemble, POSITIVE_P
        relabeled = PhaseSpaceEnsemble(
            POSITIVE_P, out.alpha[:, perm], out.beta[:, perm],
            out.subensemble_count, out.subensemble_size, out.seed)
        inverse = np.argsort(perm)
        permuted_partition = GroupPartition(
            [[int(inverse[i]) for i in g] for g in [[0, 1, 2], [3, 4, 5]]])
        other = grouped_probability(relabeled, permuted_partition)
        assert np.array_equal(base.probabilities, other.probabilities)
        assert np.array_equal(base.std_errors, other.std_errors)

    def test_imaginary_part_within_error(self):
        spec = SqueezerSpec.uniform(6, 1.0, squeezed_modes=3)
        ens = sample_positive_p(spec, seed=14, subensemble_count=200,
                                subensemble_size=500)
        out = transform_positive_p(ens, haar_unitary(6, seed=15))
        dist = grouped_probability(out, GroupPartition.from_sizes([6]))
        bound = 5 * np.maximum(dist.imag_std_errors, 1e-15)
        assert np.all(np.abs(dist.imag_part) <= bound)

    def test_memory_cap(self):
        ens = sample_positive_p(SqueezerSpec.uniform(40, 0.5), seed=16,
                                subensemble_count=1, subensemble_size=5)
        part = GroupPartition([[i] for i in range(40)])
        with pytest.raises(ValueError, match="cap"):
            grouped_probability(ens, part)

    def test_matches_torontonian_oracle_small(self):
        spec = SqueezerSpec.uniform(6, 1.0, squeezed_modes=3)
        T = haar_unitary(6, seed=42)
        dist = stream_grouped(spec, T, GroupPartition.from_sizes([6]), seed=9,
                              subensemble_count=200, subensemble_size=1000)
        exact = exact_total_count_distribution(output_gaussian_moments(spec, T))
        cmp = BinnedComparison(dist.probabilities, dist.std_errors,
                               exact, np.zeros_like(exact),
                               min_probability=1e-5)
        _, k, ratio = chi_square(cmp)
        assert ratio <= 2.0
        assert k >= 5

    def test_thermal_group_matches_binomial(self):
        spec = SqueezerSpec.uniform(8, 1.0, decoherence_fraction=1.0)
        T = haar_unitary(8, seed=21)
        dist = stream_grouped(spec, T, GroupPartition.from_sizes([4, 4]),
                              seed=22, subensemble_count=200,
                              subensemble_size=1000)
        ref = analytic_iid_distribution(THERMAL_P, [4, 4])
        cmp = BinnedComparison.from_grouped(dist, ref, min_probability=1e-6)
        _, k, ratio = chi_square(cmp)
        assert ratio <= 2.0
        assert k >= 15

    def test_streamed_equals_materialized_bitwise(self):
        spec = SqueezerSpec.uniform(5, 0.9, squeezed_modes=3)
        T = haar_unitary(5, seed=23)
        part = GroupPartition.from_sizes([3, 2])
        streamed = stream_grouped(spec, T, part, seed=24,
                                  subensemble_count=8, subensemble_size=125)
        ens = sample_positive_p(spec, seed=24, subensemble_count=8,
                                subensemble_size=125)
        materialized = grouped_probability(transform_positive_p(ens, T), part)
        assert np.array_equal(streamed.probabilities, materialized.probabilities)
        assert np.array_equal(streamed.std_errors, materialized.std_errors)


class TestBinExperimentalPatterns:
    def test_all_zero_patterns(self):
        dist = bin_experimental_patterns(["000", "000"],
                                         GroupPartition.from_sizes([3]))
        assert dist.probabilities[0] == 1.0
        assert dist.counts[0] == 2

    def test_documented_counting_example(self):
        pats = ["1100", "1100", "0011", "1111"]
        dist = bin_experimental_patterns(pats, GroupPartition.from_sizes([2, 2]))
        assert dist.probabilities[2, 0] == 0.5
        assert dist.probabilities[0, 2] == 0.25
        assert dist.probabilities[2, 2] == 0.25
        assert dist.total() == 1.0

    def test_poisson_errors(self):
        pats = ["10"] * 9 + ["01"] * 16
        dist = bin_experimental_patterns(pats, GroupPartition([[0], [1]]))
        assert dist.std_errors[1, 0] == pytest.approx(3 / 25)
        assert dist.std_errors[0, 1] == pytest.approx(4 / 25)

    def test_malformed_line_reports_number(self):
        stream = io.StringIO("0101\n01x1\n")
        with pytest.raises(ValueError, match="line 2"):
            bin_experimental_patterns(stream, GroupPartition.from_sizes([4]),
                                      mode_count=4)

    def test_wrong_length_rejected(self):
        with pytest.raises(ValueError, match="line 2"):
            bin_experimental_patterns(["0101", "011"],
                                      GroupPartition.from_sizes([4]),
                                      mode_count=4)
