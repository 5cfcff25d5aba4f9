"""Sub-ensemble error estimation and chi-squared model comparison.

Every estimated quantity in this package carries a standard error derived
from the spread of sub-ensemble means.  Comparisons against measured (or
exact) distributions use normalized deviations
z_i = (theory_i - reference_i) / sqrt(err_theory_i^2 + err_reference_i^2)
and the summed statistic chi2 = sum z_i^2 over the retained bins; a ratio
chi2 / k of order one indicates agreement.  Bins backed by fewer than
``min_count`` raw counts are excluded (small-count bins are far from
Gaussian), as are bins below an optional reference-probability floor used
when comparing against exact references.  No p-value is attached: only the
ratio is reported.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .clicks import GroupedDistribution

__all__ = [
    "BinnedComparison",
    "subensemble_stats",
    "z_scores",
    "chi_square",
    "DEFAULT_MIN_COUNT",
]

DEFAULT_MIN_COUNT = 10


def subensemble_stats(per_subensemble_means, count: int | None = None):
    """Grand mean and standard error of the mean from sub-ensemble means."""
    means = np.asarray(per_subensemble_means, dtype=float)
    if means.ndim != 1:
        raise ValueError("per-sub-ensemble means must be a 1-D array")
    if count is None:
        count = means.size
    if count != means.size:
        raise ValueError("count does not match the number of means")
    if count < 2:
        raise ValueError("at least two sub-ensembles are needed for an error bar")
    mean = float(means.mean())
    err = float(means.std(ddof=1) / np.sqrt(count))
    return mean, err


@dataclass
class BinnedComparison:
    """Paired theory/reference probabilities over flattened bins.

    ``counts`` holds raw reference counts when the reference came from
    measured patterns; bins with fewer than ``min_count`` counts are
    excluded from the statistic.  ``min_probability``, when set, excludes
    bins whose reference probability falls below it (used against exact
    references, where there are no counts).
    """

    theory: np.ndarray
    theory_err: np.ndarray
    reference: np.ndarray
    reference_err: np.ndarray
    counts: np.ndarray | None = None
    min_count: int = DEFAULT_MIN_COUNT
    min_probability: float | None = None
    bin_labels: list[tuple[int, ...]] | None = None
    _included: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.theory = np.asarray(self.theory, dtype=float).ravel()
        self.theory_err = np.asarray(self.theory_err, dtype=float).ravel()
        self.reference = np.asarray(self.reference, dtype=float).ravel()
        self.reference_err = np.asarray(self.reference_err, dtype=float).ravel()
        sizes = {self.theory.size, self.theory_err.size,
                 self.reference.size, self.reference_err.size}
        if len(sizes) != 1:
            raise ValueError("all comparison arrays must have the same length")
        if np.any(self.theory_err < 0) or np.any(self.reference_err < 0):
            raise ValueError("standard errors must be nonnegative")
        included = np.ones(self.theory.size, dtype=bool)
        if self.counts is not None:
            self.counts = np.asarray(self.counts).ravel()
            if self.counts.size != self.theory.size:
                raise ValueError("counts must match the number of bins")
            included &= self.counts >= self.min_count
        if self.min_probability is not None:
            included &= self.reference >= self.min_probability
        if not included.any():
            raise ValueError("no bins retained after cutoffs")
        self._included = included

    @classmethod
    def from_grouped(cls, theory: GroupedDistribution,
                     reference: GroupedDistribution,
                     min_count: int = DEFAULT_MIN_COUNT,
                     min_probability: float | None = None) -> "BinnedComparison":
        """Compare two grouped distributions bin by bin."""
        if theory.probabilities.shape != reference.probabilities.shape:
            raise ValueError("distributions have different tensor shapes")
        labels = [tuple(idx) for idx in np.ndindex(theory.probabilities.shape)]
        return cls(
            theory=theory.probabilities,
            theory_err=theory.std_errors,
            reference=reference.probabilities,
            reference_err=reference.std_errors,
            counts=None if reference.counts is None else reference.counts,
            min_count=min_count,
            min_probability=min_probability,
            bin_labels=labels,
        )

    @property
    def included(self) -> np.ndarray:
        return self._included

    @property
    def retained_bins(self) -> int:
        return int(self._included.sum())

    def excluded_bins(self) -> list[int]:
        return [int(i) for i in np.nonzero(~self._included)[0]]


def z_scores(cmp: BinnedComparison) -> np.ndarray:
    """Normalized deviations over retained bins (NaN where excluded)."""
    sigma = np.sqrt(cmp.theory_err ** 2 + cmp.reference_err ** 2)
    diff = cmp.theory - cmp.reference
    z = np.full(diff.size, np.nan)
    inc = cmp.included
    bad = inc & (sigma == 0) & (diff != 0)
    if bad.any():
        raise ValueError(
            f"bin {int(np.nonzero(bad)[0][0])} has zero combined error but a "
            "nonzero difference")
    safe = inc & (sigma > 0)
    z[safe] = diff[safe] / sigma[safe]
    z[inc & (sigma == 0)] = 0.0
    return z


def chi_square(cmp: BinnedComparison) -> tuple[float, int, float]:
    """(chi2, retained bin count, chi2 per bin) over the retained bins.

    The squared deviations are summed in sorted order, so the statistic is
    bit-for-bit invariant under bin reordering.
    """
    z = z_scores(cmp)
    inc = cmp.included
    chi2 = float(np.sort(z[inc] ** 2).sum())
    k = cmp.retained_bins
    return chi2, k, chi2 / k
