"""Exact and analytic references used to validate the stochastic estimators.

Three independent routes are provided:

* Gaussian second-moment propagation plus determinant formulas: the vacuum
  probability of any mode subset is one over the square root of the
  determinant of the antinormally ordered covariance block, and click
  pattern probabilities follow by inclusion-exclusion over the clicked
  subset (exponential in the number of clicks, exact).
* A Fock-space brute force for up to three modes: the input is expanded as
  a mixture of squeezed number states, evolved through the (unitarily
  dilated) network with a sparse number-conserving generator, and the
  click projectors are applied directly.  It shares nothing with the
  determinant route and pins down the covariance block convention.
* Closed-form product-binomial distributions for independent, identical
  thermal modes.

The covariance block convention (conjugated moments in the upper-left
block) is the one that reproduces 1/(1+n) for a thermal mode and
1/cosh(r) for a squeezed mode, and is cross-checked against the Fock
route in the test suite.
"""

from __future__ import annotations

import itertools
import math

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
from scipy.sparse.linalg import expm_multiply

from ._rng import STREAM_SYNTH, substream
from .clicks import GroupedDistribution, GroupPartition
from .network import TransmissionMatrix
from .phase_space import SqueezerSpec, derive_moments

__all__ = [
    "GaussianMoments",
    "output_gaussian_moments",
    "vacuum_probability",
    "torontonian_probability",
    "exact_pattern_distribution",
    "exact_total_count_distribution",
    "fock_truncation_oracle",
    "analytic_iid_distribution",
    "quadrature_covariance",
    "sample_click_patterns",
]

HERMITICITY_TOL = 1e-12
PATTERN_MODE_LIMIT = 16
CLICK_SET_LIMIT = 20
FOCK_MODE_LIMIT = 3


class GaussianMoments:
    """Second moments of a zero-mean Gaussian state.

    ``number[i, j] = <adag_i a_j>`` (Hermitian) and
    ``pair[i, j] = <a_i a_j>`` (symmetric).
    """

    def __init__(self, number: np.ndarray, pair: np.ndarray):
        number = np.atleast_2d(np.asarray(number, dtype=np.complex128))
        pair = np.atleast_2d(np.asarray(pair, dtype=np.complex128))
        if number.shape != pair.shape or number.shape[0] != number.shape[1]:
            raise ValueError("number and pair must be equal square matrices")
        if np.abs(number - number.conj().T).max() > HERMITICITY_TOL:
            raise ValueError("number moment matrix is not Hermitian")
        if np.abs(pair - pair.T).max() > HERMITICITY_TOL:
            raise ValueError("pair moment matrix is not symmetric")
        self.number = number
        self.pair = pair
        self.number.setflags(write=False)
        self.pair.setflags(write=False)
        minval = float(np.linalg.eigvalsh(self.husimi_covariance()).min())
        if minval <= 0:
            raise ValueError(
                f"unphysical moments: antinormal covariance eigenvalue {minval:.3e}")

    @property
    def mode_count(self) -> int:
        return self.number.shape[0]

    def husimi_covariance(self) -> np.ndarray:
        """Antinormally ordered covariance in the (alpha, conj alpha) basis."""
        m = self.mode_count
        eye = np.eye(m)
        return np.block([[np.conj(self.number) + eye, self.pair],
                         [np.conj(self.pair), self.number + eye]])


def output_gaussian_moments(spec: SqueezerSpec, T: TransmissionMatrix) -> GaussianMoments:
    """Moments of the network output for a given input spec.

    number' = conj(T) diag(n) T^T per element, pair' = T diag(m) T^T; lossy
    matrices are fine (the vacuum part adds nothing to normally ordered
    moments).  Inputs beyond the spec's modes are vacuum.
    """
    n, m = derive_moments(spec)
    if spec.mode_count > T.input_count:
        raise ValueError(
            f"spec has {spec.mode_count} modes but the matrix accepts "
            f"{T.input_count} inputs")
    if spec.mode_count < T.input_count:
        pad = T.input_count - spec.mode_count
        n = np.concatenate([n, np.zeros(pad)])
        m = np.concatenate([m, np.zeros(pad)])
    mat = T.matrix
    number = np.conj(mat) @ np.diag(n) @ mat.T
    pair = mat @ np.diag(m) @ mat.T
    # symmetrize away rounding so the constructor's checks stay meaningful
    number = (number + number.conj().T) / 2
    pair = (pair + pair.T) / 2
    return GaussianMoments(number, pair)


def input_gaussian_moments(spec: SqueezerSpec) -> GaussianMoments:
    """Moments of the bare input state (identity network)."""
    n, m = derive_moments(spec)
    return GaussianMoments(np.diag(n), np.diag(m))


def vacuum_probability(gm: GaussianMoments, subset) -> float:
    """Probability that every detector in ``subset`` sees vacuum."""
    idx = sorted(int(i) for i in subset)
    if len(idx) == 0:
        return 1.0
    if len(set(idx)) != len(idx):
        raise ValueError("subset contains repeated modes")
    if idx[0] < 0 or idx[-1] >= gm.mode_count:
        raise ValueError("subset index out of range")
    sigma = gm.husimi_covariance()
    m = gm.mode_count
    sel = np.concatenate([idx, [i + m for i in idx]])
    det = np.linalg.det(sigma[np.ix_(sel, sel)])
    det = float(det.real)
    if det <= 0:
        raise ValueError("antinormal covariance block is not positive definite")
    return 1.0 / math.sqrt(det)


def torontonian_probability(gm: GaussianMoments, clicks, measured) -> float:
    """Exact probability of a click pattern on the measured subset.

    ``clicks`` lists the modes that fire; ``measured`` the modes observed
    at all (unmeasured modes are traced out).  Cost grows as 2^len(clicks).
    """
    clicks = sorted(int(i) for i in clicks)
    measured = sorted(int(i) for i in measured)
    if not set(clicks) <= set(measured):
        raise ValueError("clicks must be a subset of the measured modes")
    if len(clicks) > CLICK_SET_LIMIT:
        raise ValueError(
            f"{len(clicks)} clicked modes exceeds the 2^k inclusion-exclusion "
            f"limit of {CLICK_SET_LIMIT}")
    silent = [i for i in measured if i not in clicks]
    total = 0.0
    for r in range(len(clicks) + 1):
        for sub in itertools.combinations(clicks, r):
            total += (-1) ** r * vacuum_probability(gm, list(sub) + silent)
    return total


def _subset_vacuum_table(gm: GaussianMoments) -> np.ndarray:
    """Vacuum probabilities of every mode subset, indexed by bitmask.

    Determinants are evaluated in batches per subset size.
    """
    m = gm.mode_count
    if m > PATTERN_MODE_LIMIT:
        raise ValueError(f"subset table limited to {PATTERN_MODE_LIMIT} modes")
    sigma = gm.husimi_covariance()
    table = np.empty(2 ** m)
    table[0] = 1.0
    for size in range(1, m + 1):
        subsets = list(itertools.combinations(range(m), size))
        blocks = np.empty((len(subsets), 2 * size, 2 * size), dtype=np.complex128)
        masks = np.empty(len(subsets), dtype=np.int64)
        for pos, sub in enumerate(subsets):
            sel = np.concatenate([sub, [i + m for i in sub]])
            blocks[pos] = sigma[np.ix_(sel, sel)]
            masks[pos] = sum(1 << i for i in sub)
        dets = np.linalg.det(blocks).real
        if np.any(dets <= 0):
            raise ValueError("antinormal covariance block is not positive definite")
        table[masks] = 1.0 / np.sqrt(dets)
    return table


def exact_pattern_distribution(gm: GaussianMoments) -> np.ndarray:
    """Exact probabilities of all 2^M click patterns (bit j = mode j fires).

    Computed by a signed subset (Moebius) transform of the vacuum
    probability table; algebraically identical to running the
    inclusion-exclusion sum pattern by pattern.
    """
    m = gm.mode_count
    table = _subset_vacuum_table(gm)
    full = 2 ** m - 1
    # g[pattern] = vacuum probability of the non-clicked modes
    g = table[full ^ np.arange(2 ** m)]
    work = g.reshape((2,) * m)
    for axis in range(m):
        upper = [slice(None)] * m
        lower = [slice(None)] * m
        upper[axis] = 1
        lower[axis] = 0
        work[tuple(upper)] -= work[tuple(lower)]
    return work.reshape(-1)


def exact_total_count_distribution(gm: GaussianMoments) -> np.ndarray:
    """Exact distribution of the total click count over all modes (M <= 16)."""
    m = gm.mode_count
    patterns = exact_pattern_distribution(gm)
    popcount = np.array([bin(i).count("1") for i in range(2 ** m)])
    dist = np.bincount(popcount, weights=patterns, minlength=m + 1)
    if abs(dist.sum() - 1.0) > 1e-8:
        raise ValueError(f"pattern distribution sums to {dist.sum()!r}, not 1")
    return dist


def sample_click_patterns(gm: GaussianMoments, count: int, seed: int) -> list[str]:
    """Draw synthetic click-pattern strings from the exact distribution."""
    m = gm.mode_count
    probs = np.clip(exact_pattern_distribution(gm), 0.0, None)
    probs = probs / probs.sum()
    rng = substream(seed, STREAM_SYNTH, 0)
    draws = rng.choice(probs.size, size=count, p=probs)
    return ["".join("1" if (d >> j) & 1 else "0" for j in range(m)) for d in draws]


# ---------------------------------------------------------------------------
# Fock-space brute force
# ---------------------------------------------------------------------------

def _squeeze_thermal_parameters(n: float, m: float) -> tuple[float, float]:
    """Squeeze parameter and thermal occupation matching moments (n, m)."""
    mu = math.sqrt((2 * n + 1) ** 2 - 4 * m * m)
    nu = (mu - 1.0) / 2.0
    s = -0.5 * math.asinh(2 * m / mu)
    return s, nu


def _squeeze_columns(s: float, dim: int) -> np.ndarray:
    """Matrix whose column k holds the Fock amplitudes of a squeezed |k>."""
    a = np.diag(np.sqrt(np.arange(1, dim)), 1)
    gen = 0.5 * (s * (a @ a) - s * (a.T @ a.T))
    return sla.expm(gen)


def _unitary_dilation(T: TransmissionMatrix) -> np.ndarray:
    """Square unitary acting on system plus one ancilla per lossy direction."""
    mat = T.matrix
    if mat.shape[0] != mat.shape[1]:
        raise ValueError("the Fock oracle needs a square transmission matrix")
    w, sv, vh = np.linalg.svd(mat)
    deficit = 1.0 - sv ** 2
    lossy = [i for i in range(sv.size) if deficit[i] > 1e-13]
    if not lossy:
        return np.asarray(mat, dtype=np.complex128)
    pick = np.zeros((sv.size, len(lossy)))
    for col, i in enumerate(lossy):
        pick[i, col] = 1.0
    root = np.diag(np.sqrt(np.clip(deficit, 0.0, None)))
    dil = np.block([[mat, w @ root @ pick],
                    [pick.T @ root @ vh, -pick.T @ np.diag(sv) @ pick]])
    if np.abs(dil @ dil.conj().T - np.eye(dil.shape[0])).max() > 1e-10:
        raise ValueError("unitary dilation failed; matrix may be ill-conditioned")
    return dil


def _simplex_states(modes: int, cutoff: int) -> np.ndarray:
    """All occupation tuples with total photon number <= cutoff."""
    states = []

    def rec(prefix, remaining, left):
        if left == 0:
            states.append(tuple(prefix))
            return
        for k in range(remaining + 1):
            prefix.append(k)
            rec(prefix, remaining - k, left - 1)
            prefix.pop()

    rec([], cutoff, modes)
    return np.asarray(states, dtype=np.int64)


def _number_conserving_generator(h: np.ndarray, states: np.ndarray) -> sp.csr_matrix:
    """Sparse matrix of sum_ij h_ij adag_i a_j on the simplex basis."""
    modes = h.shape[0]
    cutoff = int(states.sum(axis=1).max())
    radix = (cutoff + 1) ** np.arange(modes)
    keys = states @ radix
    order = np.argsort(keys)
    sorted_keys = keys[order]
    rows, cols, vals = [], [], []
    col_idx = np.arange(states.shape[0])
    for j in range(modes):
        has = states[:, j] > 0
        src = col_idx[has]
        kj = states[has, j]
        for i in range(modes):
            if abs(h[i, j]) < 1e-16:
                continue
            if i == j:
                rows.append(src)
                cols.append(src)
                vals.append(h[i, j] * kj)
                continue
            tgt_keys = keys[has] + radix[i] - radix[j]
            pos = np.searchsorted(sorted_keys, tgt_keys)
            tgt = order[pos]
            rows.append(tgt)
            cols.append(src)
            vals.append(h[i, j] * np.sqrt(kj * (states[has, i] + 1)))
    if not rows:
        return sp.csr_matrix((states.shape[0],) * 2, dtype=np.complex128)
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    vals = np.concatenate(vals)
    return sp.csr_matrix((vals, (rows, cols)), shape=(states.shape[0],) * 2)


def fock_truncation_oracle(spec: SqueezerSpec, T: TransmissionMatrix,
                           photon_cutoff: int,
                           max_deficit: float = 1e-8) -> np.ndarray:
    """Click-pattern probabilities from an explicit Fock-space simulation.

    Limited to three modes.  Thermalized inputs become mixtures of squeezed
    number states reproducing the blended moments (photon number kept,
    coherence scaled); lossy matrices are dilated with vacuum ancillas.
    The basis keeps every state with total photon number up to the cutoff;
    because the dilated network conserves total photon number and the
    click projectors are diagonal in the Fock basis, the result differs
    from the exact answer by at most the reported truncation deficit.

    Returns probabilities for all 2^M patterns, bit j = click in mode j.
    Raises if the achievable deficit exceeds ``max_deficit``.
    """
    modes = spec.mode_count
    if modes > FOCK_MODE_LIMIT:
        raise ValueError(f"Fock oracle limited to {FOCK_MODE_LIMIT} modes")
    if T.input_count != modes or T.output_count != modes:
        raise ValueError("transmission matrix must be square and match the spec")
    if photon_cutoff < 2:
        raise ValueError("photon_cutoff must be at least 2")
    n, m = derive_moments(spec)
    dilated = _unitary_dilation(T)
    total_modes = dilated.shape[0]
    log = sla.logm(dilated)
    h = 1j * log
    h = (h + h.conj().T) / 2

    states = _simplex_states(total_modes, photon_cutoff)
    dim = states.shape[0]

    # per-mode mixture components: squeezed |k> columns and thermal weights
    tail_target = max_deficit / (4.0 * modes)
    big = photon_cutoff + 41
    component_weights: list[list[float]] = []
    component_columns: list[np.ndarray] = []
    for j in range(modes):
        s, nu = _squeeze_thermal_parameters(float(n[j]), float(m[j]))
        cols = _squeeze_columns(s, big)
        if nu < 1e-14:
            ks, ws = [0], [1.0]
        else:
            ratio = nu / (1.0 + nu)
            kmax = max(2, int(math.ceil(math.log(tail_target) / math.log(ratio))) + 1)
            ks = list(range(kmax + 1))
            ws = [nu ** k / (1 + nu) ** (k + 1) for k in ks]
        component_weights.append(ws)
        component_columns.append(cols[:, ks])

    combos = list(itertools.product(*[range(len(w)) for w in component_weights]))
    if len(combos) > 20000:
        raise ValueError(
            f"{len(combos)} mixture components required; reduce the thermal "
            "occupation or the deficit target")
    weights = np.array([
        math.prod(component_weights[j][c[j]] for j in range(modes)) for c in combos])
    keep = weights > 1e-16
    combos = [c for c, k in zip(combos, keep) if k]
    weights = weights[keep]

    # input vectors on the simplex basis (ancilla modes in vacuum)
    vectors = np.ones((dim, len(combos)), dtype=np.complex128)
    for j in range(modes):
        occ = states[:, j]
        for ci, combo in enumerate(combos):
            vectors[:, ci] *= component_columns[j][occ, combo[j]]
    for j in range(modes, total_modes):
        vectors *= (states[:, j] == 0)[:, None]

    kept = (np.abs(vectors) ** 2).sum(axis=0)
    deficit = float((1.0 - weights.sum()) + np.dot(weights, 1.0 - kept))
    if deficit > max_deficit:
        raise ValueError(
            f"truncation deficit {deficit:.3e} exceeds {max_deficit:.1e}; "
            "raise photon_cutoff")

    generator = _number_conserving_generator(h, states)
    evolved = expm_multiply(-1j * generator, vectors)
    density = (np.abs(evolved) ** 2) @ weights

    bits = (states[:, :modes] > 0).astype(np.int64)
    pattern_index = bits @ (1 << np.arange(modes))
    return np.bincount(pattern_index, weights=density, minlength=2 ** modes)


def analytic_iid_distribution(p_click: float, sizes) -> GroupedDistribution:
    """Product of Binomial(size_j, p) laws for independent identical modes."""
    p = float(p_click)
    if not (0.0 <= p <= 1.0):
        raise ValueError(f"click probability must lie in [0, 1], got {p}")
    partition = GroupPartition.from_sizes(sizes)
    tensor = np.ones((1,))
    for size in partition.sizes:
        pmf = np.array([math.comb(size, k) * p ** k * (1 - p) ** (size - k)
                        for k in range(size + 1)])
        tensor = np.multiply.outer(tensor, pmf)
    tensor = tensor.reshape(partition.tensor_shape())
    zeros = np.zeros_like(tensor)
    return GroupedDistribution(
        probabilities=tensor,
        std_errors=zeros,
        partition=partition,
        sample_count=0,
        imag_part=zeros.copy(),
        imag_std_errors=zeros.copy(),
    )


def quadrature_covariance(gm: GaussianMoments) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Symmetrically ordered quadrature covariances (xx, pp, xp).

    Quadratures are normalized to unit vacuum variance (x = a + adag).
    """
    a = gm.number
    c = gm.pair
    eye = np.eye(gm.mode_count)
    sym = a + a.T
    xx = 2 * np.real(c) + np.real(sym) + eye
    pp = -2 * np.real(c) + np.real(sym) + eye
    xp = 2 * np.imag(c) + 2 * np.imag(a)
    return xx, pp, xp
