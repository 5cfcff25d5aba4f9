"""Sub-ensemble statistics, z-scores, and the chi-squared machinery."""

import numpy as np
import pytest

from gbsim import BinnedComparison, chi_square, subensemble_stats, z_scores


class TestSubensembleStats:
    def test_identical_means_have_zero_error(self):
        mean, err = subensemble_stats([2.0, 2.0, 2.0])
        assert mean == 2.0 and err == 0.0

    def test_documented_example(self):
        mean, err = subensemble_stats([1.0, 2.0, 3.0, 4.0])
        assert mean == pytest.approx(2.5)
        assert err == pytest.approx(0.6454972243679028)

    def test_too_few_subensembles(self):
        with pytest.raises(ValueError):
            subensemble_stats([1.0])

    def test_count_mismatch(self):
        with pytest.raises(ValueError):
            subensemble_stats([1.0, 2.0], count=3)


def simple_cmp(theory, terr, ref, rerr, **kw):
    return BinnedComparison(np.asarray(theory, float), np.asarray(terr, float),
                            np.asarray(ref, float), np.asarray(rerr, float), **kw)


class TestZScores:
    def test_identical_distributions(self):
        cmp = simple_cmp([0.5, 0.5], [0.01, 0.01], [0.5, 0.5], [0.0, 0.0])
        assert np.all(z_scores(cmp) == 0.0)

    def test_documented_value(self):
        cmp = simple_cmp([0.012], [1e-3], [0.010], [1e-3])
        assert z_scores(cmp)[0] == pytest.approx(1.4142135623730951, rel=1e-12)

    def test_zero_sigma_with_difference_raises(self):
        cmp = simple_cmp([0.1, 0.2], [0.0, 0.1], [0.2, 0.2], [0.0, 0.0])
        with pytest.raises(ValueError, match="zero combined error"):
            z_scores(cmp)

    def test_excluded_bins_are_nan(self):
        cmp = simple_cmp([0.1, 0.2], [0.01, 0.01], [0.1, 0.2], [0.0, 0.0],
                         counts=np.array([100, 3]), min_count=10)
        z = z_scores(cmp)
        assert np.isnan(z[1]) and z[0] == 0.0


class TestChiSquare:
    def test_identical_gives_zero(self):
        cmp = simple_cmp([0.3, 0.7], [0.01, 0.01], [0.3, 0.7], [0.01, 0.01])
        chi2, k, ratio = chi_square(cmp)
        assert chi2 == 0.0 and k == 2 and ratio == 0.0

    def test_reordering_invariance_exact(self):
        rng = np.random.default_rng(3)
        theory = rng.uniform(0, 1, 20)
        ref = theory + rng.normal(0, 0.01, 20)
        terr = np.full(20, 0.01)
        rerr = np.full(20, 0.005)
        chi_a = chi_square(simple_cmp(theory, terr, ref, rerr))
        perm = rng.permutation(20)
        chi_b = chi_square(simple_cmp(theory[perm], terr[perm],
                                      ref[perm], rerr[perm]))
        assert chi_a[0] == chi_b[0]
        assert chi_a[1] == chi_b[1]

    def test_count_cutoff_monotone(self):
        rng = np.random.default_rng(4)
        counts = rng.integers(0, 40, 30)
        theory = rng.uniform(0, 1, 30)
        previous = 30
        for fmin in (0, 5, 10, 20, 41):
            if (counts >= fmin).sum() == 0:
                with pytest.raises(ValueError):
                    simple_cmp(theory, np.full(30, 0.01), theory,
                               np.full(30, 0.01), counts=counts, min_count=fmin)
                continue
            cmp = simple_cmp(theory, np.full(30, 0.01), theory,
                             np.full(30, 0.01), counts=counts, min_count=fmin)
            assert cmp.retained_bins <= previous
            previous = cmp.retained_bins

    def test_probability_floor(self):
        cmp = simple_cmp([0.5, 1e-9], [0.01, 0.01], [0.5, 1e-8], [0.0, 0.0],
                         min_probability=1e-7)
        assert cmp.retained_bins == 1
        assert cmp.excluded_bins() == [1]

    def test_no_retained_bins_raises(self):
        with pytest.raises(ValueError, match="no bins retained"):
            simple_cmp([0.5], [0.01], [0.5], [0.0],
                       counts=np.array([1]), min_count=10)

    def test_negative_errors_rejected(self):
        with pytest.raises(ValueError):
            simple_cmp([0.5], [-0.01], [0.5], [0.0])


class TestFromGrouped:
    def test_shape_mismatch(self):
        from gbsim import GroupPartition
        from gbsim.clicks import GroupedDistribution
        part2 = GroupPartition.from_sizes([2])
        part3 = GroupPartition.from_sizes([3])
        a = GroupedDistribution(np.zeros(3), np.zeros(3), part2, 10)
        b = GroupedDistribution(np.zeros(4), np.zeros(4), part3, 10)
        with pytest.raises(ValueError):
            BinnedComparison.from_grouped(a, b)

    def test_counts_flow_through(self):
        from gbsim import GroupPartition, bin_experimental_patterns
        part = GroupPartition.from_sizes([2])
        measured = bin_experimental_patterns(["11"] * 50 + ["00"] * 3, part)
        theory = bin_experimental_patterns(["11"] * 50 + ["00"] * 3, part)
        theory.counts = None
        cmp = BinnedComparison.from_grouped(theory, measured, min_count=10)
        assert cmp.retained_bins == 1  # the m=2 bin; m=0 has 3 counts, m=1 zero
