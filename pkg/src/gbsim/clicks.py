"""Saturating-detector click statistics from doubled-representation ensembles.

Each output mode carries a per-sample complex weight pair
(w0, w1) = (exp(-n), 1 - exp(-n)) with n = alpha * beta; w0 + w1 = 1
exactly, sample by sample.  Grouped count probabilities over disjoint
detector sets are estimated through a Fourier observable: for group j of
size Mj, the polynomial prod_i (w0_i + w1_i z) evaluated at the (Mj + 1)-th
roots of unity has coefficients equal to the total-count weights, so one
inverse DFT per axis recovers the full d-dimensional count tensor.  The
k = 0 value of the observable is exactly 1 for every sample, which makes
the estimated tensor sum to 1 at any sample count.

Accumulation runs sub-ensemble by sub-ensemble in index order, giving
bit-reproducible results and per-bin standard errors from the spread of
sub-ensemble means.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .phase_space import PhaseSpaceEnsemble

__all__ = [
    "GroupPartition",
    "GroupedDistribution",
    "click_weights",
    "grouped_probability",
    "marginal_click_probability",
    "glauber_moment",
    "bin_experimental_patterns",
    "GroupedAccumulator",
]

DEFAULT_MEMORY_CAP = 10 ** 8


class GroupPartition:
    """Disjoint, ordered groups of detector indices.

    Groups are kept as ordered tuples: per-sample weights are multiplied in
    the listed order, so a permuted ensemble with a correspondingly
    permuted partition reproduces the identical tensor bit-for-bit.
    """

    def __init__(self, groups):
        cleaned = []
        seen: set[int] = set()
        for g in groups:
            idx = tuple(int(i) for i in g)
            if len(idx) == 0:
                raise ValueError("every group must contain at least one mode")
            for i in idx:
                if i < 0:
                    raise ValueError(f"negative mode index {i}")
                if i in seen:
                    raise ValueError(f"mode {i} appears in more than one group")
                seen.add(i)
            cleaned.append(idx)
        if not cleaned:
            raise ValueError("partition needs at least one group")
        self.groups = tuple(cleaned)

    @classmethod
    def from_sizes(cls, sizes) -> "GroupPartition":
        """Sequential groups of the given sizes: first size modes, next, ..."""
        groups = []
        start = 0
        for s in sizes:
            s = int(s)
            groups.append(range(start, start + s))
            start += s
        return cls(groups)

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(len(g) for g in self.groups)

    @property
    def dimension(self) -> int:
        return len(self.groups)

    @property
    def mode_total(self) -> int:
        return sum(self.sizes)

    def max_index(self) -> int:
        return max(max(g) for g in self.groups)

    def tensor_shape(self) -> tuple[int, ...]:
        return tuple(s + 1 for s in self.sizes)

    def validate_for(self, mode_count: int) -> None:
        if self.max_index() >= mode_count:
            raise ValueError(
                f"partition refers to mode {self.max_index()} but the ensemble "
                f"has {mode_count} modes")

    def __repr__(self) -> str:
        return f"GroupPartition(sizes={self.sizes})"


@dataclass
class GroupedDistribution:
    """Estimated d-dimensional count tensor with per-bin standard errors.

    ``probabilities`` is the real part of the estimator and is deliberately
    not clipped: bins may go slightly negative within their reported error.
    ``imag_part``/``imag_std_errors`` are diagnostics (the imaginary part
    should vanish within error).  ``counts`` is set when the distribution
    came from measured click patterns.
    """

    probabilities: np.ndarray
    std_errors: np.ndarray
    partition: GroupPartition
    sample_count: int
    imag_part: np.ndarray | None = None
    imag_std_errors: np.ndarray | None = None
    counts: np.ndarray | None = None

    def total(self) -> float:
        return float(self.probabilities.sum())


def click_weights(ens: PhaseSpaceEnsemble) -> tuple[np.ndarray, np.ndarray]:
    """Per-sample, per-mode no-click and click weights (complex).

    Only valid for the doubled representation, where the weights are the
    exact normally ordered projector values; w0 + w1 = 1 holds exactly for
    every sample.
    """
    if not ens.representation.is_doubled:
        raise ValueError("click weights require a sigma = 0 ensemble")
    w0 = np.exp(-ens.alpha * ens.beta)
    return w0, 1.0 - w0


def _block_click_weights(alpha: np.ndarray, beta: np.ndarray):
    w0 = np.exp(-alpha * beta)
    return w0, 1.0 - w0


class GroupedAccumulator:
    """Streaming accumulator for grouped count estimates.

    Feed one sub-ensemble of click weights at a time; the per-sub-ensemble
    Fourier tensor is inverted immediately and folded into running first
    and second moments, so memory stays at a few tensors regardless of the
    total sample count.
    """

    def __init__(self, partition: GroupPartition, memory_cap: int = DEFAULT_MEMORY_CAP):
        shape = partition.tensor_shape()
        entries = 1
        for s in shape:
            entries *= s
        if entries > memory_cap:
            raise ValueError(
                f"grouped tensor needs {entries} entries, above the cap of "
                f"{memory_cap}; choose a coarser partition or raise the cap")
        self.partition = partition
        self.shape = shape
        # roots of unity z_k = exp(-i k theta), theta = 2 pi / (Mj + 1)
        self._roots = [np.exp(-2j * np.pi * np.arange(s + 1) / (s + 1))
                       for s in partition.sizes]
        self._sum = np.zeros(shape, dtype=np.complex128)
        self._sum_re2 = np.zeros(shape)
        self._sum_im2 = np.zeros(shape)
        self.subensembles = 0
        self.samples = 0

    def _group_vectors(self, w0: np.ndarray, w1: np.ndarray) -> list[np.ndarray]:
        """For each group, the per-sample polynomial values at its roots."""
        vectors = []
        for g, roots in zip(self.partition.groups, self._roots):
            vec = np.ones((w0.shape[0], roots.size), dtype=np.complex128)
            for i in g:
                vec *= w0[:, i, None] + w1[:, i, None] * roots
            vectors.append(vec)
        return vectors

    def add_subensemble(self, w0: np.ndarray, w1: np.ndarray) -> None:
        size = w0.shape[0]
        vectors = self._group_vectors(w0, w1)
        d = len(vectors)
        if d == 1:
            fourier = vectors[0].mean(axis=0)
        else:
            # split groups into two Khatri-Rao halves and contract with one
            # matrix product; cheaper than a d-way einsum for d >= 2
            half = d // 2
            left = vectors[0]
            for v in vectors[1:half]:
                left = (left[:, :, None] * v[:, None, :]).reshape(size, -1)
            right = vectors[half]
            for v in vectors[half + 1:]:
                right = (right[:, :, None] * v[:, None, :]).reshape(size, -1)
            fourier = (left.T @ right) / size
        fourier = fourier.reshape(self.shape)
        block = np.fft.ifftn(fourier)
        self._sum += block
        self._sum_re2 += block.real ** 2
        self._sum_im2 += block.imag ** 2
        self.subensembles += 1
        self.samples += size

    def finalize(self) -> GroupedDistribution:
        ns = self.subensembles
        if ns < 1:
            raise ValueError("no sub-ensembles accumulated")
        mean = self._sum / ns
        if ns > 1:
            var_re = np.clip(self._sum_re2 / ns - mean.real ** 2, 0.0, None)
            var_im = np.clip(self._sum_im2 / ns - mean.imag ** 2, 0.0, None)
            # sample std of the sub-ensemble means over sqrt(ns)
            err_re = np.sqrt(var_re * ns / (ns - 1) / ns)
            err_im = np.sqrt(var_im * ns / (ns - 1) / ns)
        else:
            err_re = np.zeros(self.shape)
            err_im = np.zeros(self.shape)
        return GroupedDistribution(
            probabilities=mean.real,
            std_errors=err_re,
            partition=self.partition,
            sample_count=self.samples,
            imag_part=mean.imag,
            imag_std_errors=err_im,
        )


def grouped_probability(ens: PhaseSpaceEnsemble, partition: GroupPartition,
                        memory_cap: int = DEFAULT_MEMORY_CAP) -> GroupedDistribution:
    """Estimate the grouped count distribution of an ensemble."""
    if not ens.representation.is_doubled:
        raise ValueError("grouped probabilities require a sigma = 0 ensemble")
    partition.validate_for(ens.mode_count)
    acc = GroupedAccumulator(partition, memory_cap)
    for i in range(ens.subensemble_count):
        a, b = ens.block(i)
        w0, w1 = _block_click_weights(a, b)
        acc.add_subensemble(w0, w1)
    return acc.finalize()


def _subensemble_mean_error(values: np.ndarray, count: int, size: int):
    """Mean and standard error from per-sample complex values."""
    per_sub = values.reshape(count, size).mean(axis=1)
    mean = per_sub.mean()
    if count > 1:
        err_re = per_sub.real.std(ddof=1) / np.sqrt(count)
        err_im = per_sub.imag.std(ddof=1) / np.sqrt(count)
    else:
        err_re = err_im = 0.0
    return mean, float(err_re), float(err_im)


def marginal_click_probability(ens: PhaseSpaceEnsemble, mode: int) -> tuple[float, float]:
    """Click probability of a single output channel with its standard error."""
    if not ens.representation.is_doubled:
        raise ValueError("marginal click probability requires a sigma = 0 ensemble")
    if not (0 <= mode < ens.mode_count):
        raise ValueError(f"mode index {mode} out of range for {ens.mode_count} modes")
    values = 1.0 - np.exp(-ens.alpha[:, mode] * ens.beta[:, mode])
    mean, err_re, _ = _subensemble_mean_error(
        values, ens.subensemble_count, ens.subensemble_size)
    return float(mean.real), err_re


def glauber_moment(ens: PhaseSpaceEnsemble, exponents) -> tuple[complex, float, float]:
    """Normally ordered photon-number moment <prod_j n_j^(c_j)>.

    Returns the complex estimate plus standard errors of its real and
    imaginary parts; the imaginary part should be zero within error.
    """
    if not ens.representation.is_doubled:
        raise ValueError("Glauber moments require a sigma = 0 ensemble")
    exponents = np.asarray(exponents, dtype=int)
    if exponents.shape != (ens.mode_count,):
        raise ValueError("exponent vector length must equal the mode count")
    if np.any(exponents < 0):
        raise ValueError("exponents must be nonnegative")
    if exponents.sum() < 1:
        raise ValueError("at least one exponent must be positive")
    values = np.ones(ens.sample_count, dtype=np.complex128)
    number = ens.alpha * ens.beta
    for j in np.nonzero(exponents)[0]:
        values *= number[:, j] ** exponents[j]
    mean, err_re, err_im = _subensemble_mean_error(
        values, ens.subensemble_count, ens.subensemble_size)
    return complex(mean), err_re, err_im


def bin_experimental_patterns(patterns, partition: GroupPartition,
                              mode_count: int | None = None) -> GroupedDistribution:
    """Histogram measured click patterns into a grouped count tensor.

    ``patterns`` is an iterable of M-character '0'/'1' strings (position j
    is detector j).  Per-bin errors are the Poisson estimate
    sqrt(count) / total.
    """
    shape = partition.tensor_shape()
    counts = np.zeros(shape, dtype=np.int64)
    groups = partition.groups
    if mode_count is not None:
        partition.validate_for(mode_count)
    total = 0
    for lineno, raw in enumerate(patterns, start=1):
        pat = raw.strip()
        if not pat:
            continue
        if mode_count is None:
            mode_count = len(pat)
            partition.validate_for(mode_count)
        if len(pat) != mode_count or any(c not in "01" for c in pat):
            raise ValueError(
                f"pattern line {lineno}: expected {mode_count} characters of 0/1, "
                f"got {raw.strip()!r}")
        idx = tuple(sum(pat[i] == "1" for i in g) for g in groups)
        counts[idx] += 1
        total += 1
    if total == 0:
        raise ValueError("no patterns supplied")
    probs = counts / total
    errors = np.sqrt(counts) / total
    return GroupedDistribution(
        probabilities=probs,
        std_errors=errors,
        partition=partition,
        sample_count=total,
        imag_part=np.zeros(shape),
        imag_std_errors=np.zeros(shape),
        counts=counts,
    )
