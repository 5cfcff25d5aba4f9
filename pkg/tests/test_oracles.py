"""Exact references: moments, determinant formulas, Fock brute force."""

import itertools

import numpy as np
import pytest

from gbsim import (GaussianMoments, SqueezerSpec, TransmissionMatrix,
                   analytic_iid_distribution, exact_pattern_distribution,
                   exact_total_count_distribution, fock_truncation_oracle,
                   haar_unitary, input_gaussian_moments, output_gaussian_moments,
                   quadrature_covariance, sample_click_patterns,
                   torontonian_probability, vacuum_probability)

SINH2_1 = 1.3810978455418155
SINHCOSH_1 = 1.8134302039235093
VAC_SQUEEZED_R1 = 0.6480542736638852   # 1 / cosh(1)
THERMAL_N1 = SqueezerSpec([1.0], decoherence_fraction=1.0)

BS = TransmissionMatrix(np.array([[1, 1], [1, -1]]) / np.sqrt(2),
                        is_unitary=True)


class TestGaussianMoments:
    def test_validation(self):
        with pytest.raises(ValueError):
            GaussianMoments(np.array([[0.0, 1.0], [0.0, 0.0]]), np.zeros((2, 2)))
        with pytest.raises(ValueError):
            GaussianMoments(np.zeros((2, 2)), np.array([[0.0, 1.0], [0.0, 0.0]]))
        with pytest.raises(ValueError):  # coherence beyond physical bound
            GaussianMoments(np.array([[0.1]]), np.array([[2.0]]))

    def test_vacuum_moments(self):
        gm = output_gaussian_moments(SqueezerSpec([0.0, 0.0]),
                                     haar_unitary(2, seed=1))
        assert np.abs(gm.number).max() == 0.0
        assert np.abs(gm.pair).max() == 0.0

    def test_single_mode_passthrough(self):
        gm = output_gaussian_moments(SqueezerSpec([1.0]),
                                     TransmissionMatrix.identity(1))
        assert gm.number[0, 0].real == pytest.approx(SINH2_1, abs=1e-12)
        assert gm.pair[0, 0].real == pytest.approx(SINHCOSH_1, abs=1e-12)

    def test_thermal_unitary_invariance(self):
        spec = SqueezerSpec.uniform(5, 0.8, decoherence_fraction=1.0)
        gm = output_gaussian_moments(spec, haar_unitary(5, seed=2))
        n = np.sinh(0.8) ** 2
        assert np.abs(gm.number - n * np.eye(5)).max() <= 1e-12
        assert np.abs(gm.pair).max() <= 1e-12


class TestVacuumProbability:
    def test_vacuum_state(self):
        gm = input_gaussian_moments(SqueezerSpec([0.0, 0.0]))
        assert vacuum_probability(gm, [0]) == pytest.approx(1.0)
        assert vacuum_probability(gm, [0, 1]) == pytest.approx(1.0)

    def test_thermal_mode(self):
        gm = input_gaussian_moments(THERMAL_N1)
        assert vacuum_probability(gm, [0]) == pytest.approx(1 / (1 + SINH2_1),
                                                            rel=1e-12)

    def test_squeezed_mode(self):
        gm = input_gaussian_moments(SqueezerSpec([1.0]))
        assert vacuum_probability(gm, [0]) == pytest.approx(VAC_SQUEEZED_R1,
                                                            rel=1e-12)

    def test_empty_subset_is_one(self):
        gm = input_gaussian_moments(SqueezerSpec([1.0]))
        assert vacuum_probability(gm, []) == 1.0

    def test_index_checks(self):
        gm = input_gaussian_moments(SqueezerSpec([1.0]))
        with pytest.raises(ValueError):
            vacuum_probability(gm, [1])
        with pytest.raises(ValueError):
            vacuum_probability(gm, [0, 0])


class TestTorontonian:
    def test_no_clicks_equals_full_vacuum(self):
        spec = SqueezerSpec.uniform(4, 0.9, squeezed_modes=2)
        gm = output_gaussian_moments(spec, haar_unitary(4, seed=3))
        assert torontonian_probability(gm, [], range(4)) == pytest.approx(
            vacuum_probability(gm, range(4)), rel=1e-12)

    def test_single_mode_click(self):
        gm = input_gaussian_moments(SqueezerSpec([1.0]))
        assert torontonian_probability(gm, [0], [0]) == pytest.approx(
            1 - VAC_SQUEEZED_R1, rel=1e-12)

    def test_pattern_table_matches_per_pattern_values(self):
        spec = SqueezerSpec.uniform(5, 1.0, squeezed_modes=3,
                                    decoherence_fraction=0.15)
        gm = output_gaussian_moments(spec, haar_unitary(5, seed=4))
        table = exact_pattern_distribution(gm)
        for mask in range(32):
            clicks = [j for j in range(5) if (mask >> j) & 1]
            direct = torontonian_probability(gm, clicks, range(5))
            assert table[mask] == pytest.approx(direct, abs=1e-10)

    def test_completeness(self):
        for M, seed in ((8, 5), (10, 6)):
            spec = SqueezerSpec.uniform(M, 1.0, squeezed_modes=M // 2)
            gm = output_gaussian_moments(spec, haar_unitary(M, seed=seed))
            assert exact_pattern_distribution(gm).sum() == pytest.approx(
                1.0, abs=1e-8)

    def test_click_set_limit(self):
        spec = SqueezerSpec.uniform(4, 0.5)
        gm = output_gaussian_moments(spec, haar_unitary(4, seed=7))
        with pytest.raises(ValueError):
            torontonian_probability(gm, range(4), range(3))


class TestTotalCountDistribution:
    def test_vacuum_point_mass(self):
        gm = input_gaussian_moments(SqueezerSpec([0.0] * 3))
        dist = exact_total_count_distribution(gm)
        assert dist[0] == pytest.approx(1.0, abs=1e-12)
        assert np.abs(dist[1:]).max() <= 1e-12

    def test_two_thermal_modes_binomial(self):
        gm = input_gaussian_moments(SqueezerSpec([1.0, 1.0],
                                                 decoherence_fraction=1.0))
        dist = exact_total_count_distribution(gm)
        p = SINH2_1 / (1 + SINH2_1)
        assert dist[0] == pytest.approx((1 - p) ** 2, rel=1e-10)
        assert dist[1] == pytest.approx(2 * p * (1 - p), rel=1e-10)
        assert dist[2] == pytest.approx(p ** 2, rel=1e-10)

    def test_matches_brute_force_pattern_sum(self):
        spec = SqueezerSpec.uniform(6, 1.0, squeezed_modes=3)
        gm = output_gaussian_moments(spec, haar_unitary(6, seed=8))
        dist = exact_total_count_distribution(gm)
        brute = np.zeros(7)
        for clicks in itertools.chain.from_iterable(
                itertools.combinations(range(6), m) for m in range(7)):
            brute[len(clicks)] += torontonian_probability(gm, clicks, range(6))
        assert np.abs(dist - brute).max() <= 1e-10

    def test_factorial_moment_identities(self):
        # E[m] and E[m(m-1)/2] from one- and two-mode vacuum probabilities
        spec = SqueezerSpec.uniform(12, 1.0, squeezed_modes=6)
        gm = output_gaussian_moments(spec, haar_unitary(12, seed=9))
        dist = exact_total_count_distribution(gm)
        counts = np.arange(13)
        mean_direct = sum(1 - vacuum_probability(gm, [j]) for j in range(12))
        assert (counts * dist).sum() == pytest.approx(mean_direct, abs=1e-10)
        pairs_direct = sum(
            1 - vacuum_probability(gm, [i]) - vacuum_probability(gm, [j])
            + vacuum_probability(gm, [i, j])
            for i, j in itertools.combinations(range(12), 2))
        assert (counts * (counts - 1) / 2 * dist).sum() == pytest.approx(
            pairs_direct, abs=1e-10)


class TestFockOracle:
    def test_vacuum_never_clicks(self):
        probs = fock_truncation_oracle(SqueezerSpec([0.0]),
                                       TransmissionMatrix.identity(1), 10)
        assert probs[0] == pytest.approx(1.0, abs=1e-12)

    def test_single_mode_click_probability(self):
        probs = fock_truncation_oracle(SqueezerSpec([1.0]),
                                       TransmissionMatrix.identity(1), 80)
        assert abs(probs[1] - (1 - VAC_SQUEEZED_R1)) < 1e-8

    def test_insufficient_cutoff_reports_deficit(self):
        with pytest.raises(ValueError, match="deficit"):
            fock_truncation_oracle(SqueezerSpec([1.0]),
                                   TransmissionMatrix.identity(1), 12)

    def test_two_squeezed_modes_through_splitter(self):
        spec = SqueezerSpec([1.0, -0.6])
        probs = fock_truncation_oracle(spec, BS, 72)
        table = exact_pattern_distribution(output_gaussian_moments(spec, BS))
        assert np.abs(probs - table).max() < 1e-6

    def test_thermalized_modes(self):
        spec = SqueezerSpec([0.8, 0.5], decoherence_fraction=0.4)
        probs = fock_truncation_oracle(spec, BS, 42)
        table = exact_pattern_distribution(output_gaussian_moments(spec, BS))
        assert np.abs(probs - table).max() < 1e-6

    def test_lossy_network(self):
        spec = SqueezerSpec([0.6, 0.0])
        lossy = TransmissionMatrix(0.85 * BS.matrix)
        probs = fock_truncation_oracle(spec, lossy, 30)
        table = exact_pattern_distribution(output_gaussian_moments(spec, lossy))
        assert np.abs(probs - table).max() < 1e-6

    def test_three_modes_with_single_lossy_input(self):
        U = haar_unitary(3, seed=10).matrix
        lossy = TransmissionMatrix(U @ np.diag([0.9, 1.0, 1.0]))
        spec = SqueezerSpec([0.6, -0.4, 0.0], decoherence_fraction=0.2)
        probs = fock_truncation_oracle(spec, lossy, 26)
        table = exact_pattern_distribution(output_gaussian_moments(spec, lossy))
        assert np.abs(probs - table).max() < 1e-6

    def test_mode_limit(self):
        with pytest.raises(ValueError):
            fock_truncation_oracle(SqueezerSpec([0.1] * 4),
                                   haar_unitary(4, seed=1), 10)


class TestAnalyticIid:
    def test_zero_click_probability(self):
        dist = analytic_iid_distribution(0.0, [3])
        assert dist.probabilities[0] == 1.0
        assert dist.probabilities[1:].max() == 0.0

    def test_symmetric_half(self):
        dist = analytic_iid_distribution(0.5, [2])
        assert np.allclose(dist.probabilities, [0.25, 0.5, 0.25])

    def test_product_structure(self):
        p = 0.5800256583859739
        dist = analytic_iid_distribution(p, [3, 2])
        assert dist.probabilities.shape == (4, 3)
        assert dist.total() == pytest.approx(1.0, rel=1e-12)
        marg = dist.probabilities.sum(axis=1)
        single = analytic_iid_distribution(p, [3]).probabilities
        assert np.allclose(marg, single, atol=1e-14)

    def test_probability_range(self):
        with pytest.raises(ValueError):
            analytic_iid_distribution(1.2, [2])


class TestQuadratureCovariance:
    def test_single_squeezed_mode(self):
        gm = input_gaussian_moments(SqueezerSpec([1.0]))
        xx, pp, xp = quadrature_covariance(gm)
        assert xx[0, 0] == pytest.approx(np.e ** 2, rel=1e-12)
        assert pp[0, 0] == pytest.approx(np.e ** -2, rel=1e-12)
        assert abs(xp[0, 0]) <= 1e-12

    def test_vacuum_is_identity(self):
        gm = input_gaussian_moments(SqueezerSpec([0.0, 0.0]))
        xx, pp, xp = quadrature_covariance(gm)
        assert np.allclose(xx, np.eye(2), atol=1e-14)
        assert np.allclose(pp, np.eye(2), atol=1e-14)
        assert np.abs(xp).max() <= 1e-14


class TestPatternSampling:
    def test_deterministic(self):
        spec = SqueezerSpec.uniform(4, 1.0, squeezed_modes=2)
        gm = output_gaussian_moments(spec, haar_unitary(4, seed=11))
        a = sample_click_patterns(gm, 100, seed=5)
        b = sample_click_patterns(gm, 100, seed=5)
        assert a == b
        assert all(len(p) == 4 and set(p) <= {"0", "1"} for p in a)

    def test_matches_exact_distribution(self):
        spec = SqueezerSpec.uniform(4, 1.0, squeezed_modes=2)
        gm = output_gaussian_moments(spec, haar_unitary(4, seed=11))
        table = exact_pattern_distribution(gm)
        draws = sample_click_patterns(gm, 200_000, seed=6)
        idx = [int(p[::-1], 2) for p in draws]
        freq = np.bincount(idx, minlength=16) / len(draws)
        err = np.sqrt(np.maximum(table, 1e-9) / len(draws))
        assert np.abs(freq - table).max() <= 6 * err.max()
