"""Quadrature correlations and multipartite entanglement witnesses.

Quadratures are normalized to unit vacuum variance, x_theta = a e^{-i theta}
+ adag e^{i theta}.  The symmetric (sigma = 1/2) representation needs no
ordering correction; other representations are corrected for moments up to
second order by adding (1 - 2 sigma) per unit of squared weight, which is
all the entanglement criteria require.

The beam-splitter chain that spreads two orthogonally squeezed inputs over
M modes is built explicitly as an M x M real unitary; its outputs violate
the M-partite variance criteria (product below 2/(M-1), sum below
4/(M-1)) whenever squeezing and losses allow.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .network import TransmissionMatrix
from .phase_space import PhaseSpaceEnsemble, SqueezerSpec

__all__ = [
    "QuadratureSpec",
    "WitnessReport",
    "quadrature_correlation",
    "quadrature_combination_variance",
    "build_entanglement_unitary",
    "epr_chain_input_spec",
    "evaluate_witness",
]


@dataclass(frozen=True)
class QuadratureSpec:
    """Per-mode measurement angles (radians) and moment powers."""

    angles: tuple[float, ...]
    powers: tuple[int, ...]

    def __post_init__(self):
        if len(self.angles) != len(self.powers):
            raise ValueError("angles and powers must have equal length")
        if any(p < 0 for p in self.powers):
            raise ValueError("powers must be nonnegative")
        if sum(self.powers) < 1:
            raise ValueError("at least one power must be positive")

    @property
    def order(self) -> int:
        return int(sum(self.powers))


def _sampled_quadratures(ens: PhaseSpaceEnsemble, angles: np.ndarray,
                         modes: np.ndarray) -> np.ndarray:
    phase = np.exp(-1j * angles)
    alpha = ens.alpha[:, modes]
    beta = ens.beta[:, modes]
    return alpha * phase + beta * np.conj(phase)


def quadrature_correlation(ens: PhaseSpaceEnsemble, spec: QuadratureSpec) -> tuple[float, float]:
    """Estimate <prod_j (x_j^theta)^(m_j)> with its standard error.

    In non-symmetric representations only moments up to second order are
    supported; the same-mode second moment gets the (1 - 2 sigma)
    correction that maps it to symmetric ordering.
    """
    if len(spec.angles) != ens.mode_count:
        raise ValueError("quadrature spec length must equal the mode count")
    sigma = ens.representation.sigma
    if sigma != 0.5 and spec.order > 2:
        raise ValueError(
            "orders above 2 require the symmetric (sigma = 1/2) representation")
    modes = np.nonzero(np.asarray(spec.powers))[0]
    angles = np.asarray(spec.angles)[modes]
    quads = _sampled_quadratures(ens, angles, modes)
    values = np.ones(ens.sample_count, dtype=np.complex128)
    for col, j in enumerate(modes):
        values *= quads[:, col] ** spec.powers[j]
    per_sub = values.reshape(ens.subensemble_count, ens.subensemble_size).mean(axis=1)
    estimate = float(per_sub.mean().real)
    if sigma != 0.5 and spec.order == 2 and modes.size == 1:
        estimate += (1.0 - 2.0 * sigma)
    if ens.subensemble_count > 1:
        err = float(per_sub.real.std(ddof=1) / np.sqrt(ens.subensemble_count))
    else:
        err = 0.0
    return estimate, err


def quadrature_combination_variance(ens: PhaseSpaceEnsemble, weights,
                                    angles) -> tuple[float, float]:
    """Variance of q = sum_i w_i x_i^theta_i with its standard error.

    Computed per sub-ensemble as the (ddof = 1) second central moment of
    the sampled combination; representations other than sigma = 1/2 are
    mapped to symmetric ordering by adding (1 - 2 sigma) sum_i w_i^2.
    """
    weights = np.asarray(weights, dtype=float)
    angles = np.asarray(angles, dtype=float)
    if weights.shape != (ens.mode_count,) or angles.shape != (ens.mode_count,):
        raise ValueError("weights and angles must have one entry per mode")
    modes = np.nonzero(weights)[0]
    quads = _sampled_quadratures(ens, angles[modes], modes)
    q = quads @ weights[modes].astype(np.complex128)
    q = q.reshape(ens.subensemble_count, ens.subensemble_size)
    size = ens.subensemble_size
    mean_q = q.mean(axis=1)
    mean_q2 = (q * q).mean(axis=1)
    factor = size / (size - 1) if size > 1 else 1.0
    per_sub = ((mean_q2 - mean_q ** 2) * factor).real
    sigma = ens.representation.sigma
    if sigma != 0.5:
        per_sub = per_sub + (1.0 - 2.0 * sigma) * float(np.sum(weights ** 2))
    variance = float(per_sub.mean())
    if ens.subensemble_count > 1:
        err = float(per_sub.std(ddof=1) / np.sqrt(ens.subensemble_count))
    else:
        err = 0.0
    return variance, err


def build_entanglement_unitary(mode_count: int) -> TransmissionMatrix:
    """Beam-splitter chain spreading two squeezed inputs over all modes.

    Reflection amplitudes are 1/sqrt(2) for the first splitter and
    1/sqrt(M - j + 1) for the j-th, with the boundary values R_0 = -1 and
    R_M = 1; the resulting real matrix is unitary for every M >= 2.
    """
    M = int(mode_count)
    if M < 2:
        raise ValueError("the entanglement chain needs at least two modes")
    refl = np.empty(M + 1)
    refl[0] = -1.0
    refl[1] = np.sqrt(0.5)
    for j in range(2, M + 1):
        refl[j] = np.sqrt(1.0 / (M - j + 1))
    trans = np.sqrt(1.0 - refl[1:M + 1] ** 2)  # trans[k-1] = T_k
    U = np.zeros((M, M))
    for k in range(1, M + 1):
        if k < M:
            U[k - 1, k] = trans[k - 1]
        running = 1.0
        for j in range(k, 0, -1):
            U[k - 1, j - 1] = -refl[k] * running * refl[j - 1]
            if j >= 2:
                running *= trans[j - 2]
    return TransmissionMatrix(U, is_unitary=True)


def epr_chain_input_spec(mode_count: int, r: float) -> SqueezerSpec:
    """Inputs for the chain: mode 1 p-squeezed, mode 2 x-squeezed, rest vacuum."""
    if mode_count < 2:
        raise ValueError("the chain input needs at least two modes")
    vec = np.zeros(mode_count)
    vec[0] = r
    vec[1] = -r
    return SqueezerSpec(vec, decoherence_fraction=0.0)


@dataclass
class WitnessReport:
    """Variances of the collective EPR combinations and the pass verdicts.

    ``product`` is sqrt(var_u) * sqrt(var_v) (the uncertainty product) and
    ``variance_sum`` is var_u + var_v; entanglement of all modes is
    certified when product < 2/(M-1) or variance_sum < 4/(M-1).
    """

    mode_count: int
    var_u: float
    var_u_err: float
    var_v: float
    var_v_err: float
    product: float
    product_err: float
    variance_sum: float
    variance_sum_err: float
    threshold_product: float
    threshold_sum: float
    pass_product: bool
    pass_sum: bool
    sample_count: int


def witness_weights(mode_count: int) -> tuple[np.ndarray, np.ndarray]:
    """Weight vectors of the u (x-type) and v (p-type) combinations."""
    c = 1.0 / np.sqrt(mode_count - 1)
    wu = np.full(mode_count, -c)
    wu[0] = 1.0
    wv = np.full(mode_count, c)
    wv[0] = 1.0
    return wu, wv


def _report_from_variances(mode_count, var_u, err_u, var_v, err_v, samples):
    var_u_pos = max(var_u, 0.0)
    var_v_pos = max(var_v, 0.0)
    product = float(np.sqrt(var_u_pos) * np.sqrt(var_v_pos))
    if product > 0:
        product_err = 0.5 * product * float(
            np.hypot(err_u / var_u_pos, err_v / var_v_pos))
    else:
        product_err = 0.0
    total = var_u + var_v
    total_err = float(np.hypot(err_u, err_v))
    thr_p = 2.0 / (mode_count - 1)
    thr_s = 4.0 / (mode_count - 1)
    return WitnessReport(
        mode_count=mode_count,
        var_u=var_u, var_u_err=err_u,
        var_v=var_v, var_v_err=err_v,
        product=product, product_err=product_err,
        variance_sum=total, variance_sum_err=total_err,
        threshold_product=thr_p, threshold_sum=thr_s,
        pass_product=product < thr_p,
        pass_sum=total < thr_s,
        sample_count=samples,
    )


def evaluate_witness(ens: PhaseSpaceEnsemble, mode_count: int | None = None,
                     exchange_quadratures: bool = False) -> WitnessReport:
    """Evaluate the M-partite witness on a transformed ensemble.

    ``mode_count``, if given, must match the ensemble.  With
    ``exchange_quadratures`` the roles of x and p are swapped (the u
    combination is taken on p and v on x), which matches inputs prepared
    with the opposite squeezing sign convention.
    """
    M = ens.mode_count
    if mode_count is not None and mode_count != M:
        raise ValueError(f"witness over {mode_count} modes but the ensemble "
                         f"has {M}")
    if M < 2:
        raise ValueError("the witness needs at least two modes")
    wu, wv = witness_weights(M)
    theta_x = np.zeros(M)
    theta_p = np.full(M, np.pi / 2.0)
    if exchange_quadratures:
        theta_x, theta_p = theta_p, theta_x
    var_u, err_u = quadrature_combination_variance(ens, wu, theta_x)
    var_v, err_v = quadrature_combination_variance(ens, wv, theta_p)
    return _report_from_variances(M, var_u, err_u, var_v, err_v, ens.sample_count)
