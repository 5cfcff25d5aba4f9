"""Streamed estimation pipelines for large runs.

These walk the sub-ensembles one at a time (sample, transform, accumulate)
so memory stays bounded by one sub-ensemble regardless of the total sample
count.  Each stage reuses the exact per-block kernels of the materialized
path with the same per-sub-ensemble RNG streams, so a streamed run and a
materialized run with identical arguments produce identical results
bit-for-bit.
"""

from __future__ import annotations

import numpy as np

from ._rng import STREAM_INPUT, STREAM_NETWORK, substream
from .clicks import (DEFAULT_MEMORY_CAP, GroupedAccumulator, GroupedDistribution,
                     GroupPartition, _block_click_weights)
from .network import TransmissionMatrix, _apply, _output_noise_sqrt
from .phase_space import (OrderingParam, SqueezerSpec, WIGNER,
                          _doubled_block, _doubled_coefficients, _sigma_block,
                          derive_moments, sigma_coefficients)
from .quadrature import (WitnessReport, _report_from_variances, witness_weights)

__all__ = ["stream_grouped", "stream_witness"]


def _check_spec_matrix(spec: SqueezerSpec, T: TransmissionMatrix) -> None:
    if spec.mode_count > T.input_count:
        raise ValueError(
            f"spec has {spec.mode_count} modes but the matrix accepts "
            f"{T.input_count} inputs")


def stream_grouped(spec: SqueezerSpec, T: TransmissionMatrix,
                   partition: GroupPartition, seed: int,
                   subensemble_count: int, subensemble_size: int,
                   memory_cap: int = DEFAULT_MEMORY_CAP) -> GroupedDistribution:
    """Grouped count estimate without materializing the full ensemble."""
    _check_spec_matrix(spec, T)
    partition.validate_for(T.output_count)
    n, m = derive_moments(spec)
    if not (np.all(np.isfinite(n)) and np.all(np.isfinite(m))):
        raise ValueError("derived moments are not finite")
    c1, c2 = _doubled_coefficients(n, m)
    acc = GroupedAccumulator(partition, memory_cap)
    for i in range(subensemble_count):
        rng = substream(seed, STREAM_INPUT, i)
        alpha, beta = _doubled_block(c1, c2, rng, subensemble_size, spec.mode_count)
        out_a = _apply(alpha, T, conjugate=False)
        out_b = _apply(beta, T, conjugate=True)
        w0, w1 = _block_click_weights(out_a, out_b)
        acc.add_subensemble(w0, w1)
    return acc.finalize()


def stream_witness(mode_count: int, spec: SqueezerSpec, T: TransmissionMatrix,
                   seed: int, subensemble_count: int, subensemble_size: int,
                   ordering: OrderingParam = WIGNER) -> WitnessReport:
    """Witness variances via streamed sampling in any representation.

    ``T`` is the full network (chain times any input loss); for
    sigma-ordered representations, vacuum noise for lossy matrices is
    injected per block exactly as the materialized transform does.
    Representations other than sigma = 1/2 get the second-order ordering
    correction (and correspondingly larger sampling errors).
    """
    _check_spec_matrix(spec, T)
    if T.output_count != mode_count:
        raise ValueError("matrix output count must equal the witness mode count")
    doubled = ordering.is_doubled
    if doubled:
        n, m = derive_moments(spec)
        c1, c2 = _doubled_coefficients(n, m)
        noise_sqrt = None
    else:
        d_plus, d_minus = sigma_coefficients(spec, ordering)
        noise_sqrt = None if T.is_unitary else _output_noise_sqrt(T)
    amp = np.sqrt(ordering.sigma / 2.0)
    wu, wv = witness_weights(mode_count)
    wu_c = wu.astype(np.complex128)
    wv_c = wv.astype(np.complex128)
    correction = 0.0
    if ordering.sigma != 0.5:
        correction = (1.0 - 2.0 * ordering.sigma) * float(np.sum(wu ** 2))
    size = subensemble_size
    factor = size / (size - 1) if size > 1 else 1.0
    var_u = np.empty(subensemble_count)
    var_v = np.empty(subensemble_count)
    for i in range(subensemble_count):
        rng = substream(seed, STREAM_INPUT, i)
        if doubled:
            alpha, beta = _doubled_block(c1, c2, rng, size, spec.mode_count)
            out_a = _apply(alpha, T, conjugate=False)
            out_b = _apply(beta, T, conjugate=True)
        else:
            alpha = _sigma_block(d_plus, d_minus, rng, size, spec.mode_count)
            out_a = _apply(alpha, T, conjugate=False)
            if noise_sqrt is not None:
                nrng = substream(seed, STREAM_NETWORK, i)
                u = nrng.standard_normal((size, mode_count))
                v = nrng.standard_normal((size, mode_count))
                out_a = out_a + amp * ((u + 1j * v) @ noise_sqrt.T)
            out_b = np.conj(out_a)
        x = out_a + out_b           # theta = 0 quadratures
        p = -1j * (out_a - out_b)   # theta = pi/2 quadratures
        qu = x @ wu_c
        qv = p @ wv_c
        var_u[i] = ((qu * qu).mean() - qu.mean() ** 2).real * factor + correction
        var_v[i] = ((qv * qv).mean() - qv.mean() ** 2).real * factor + correction
    count = subensemble_count
    vu = float(var_u.mean())
    vv = float(var_v.mean())
    if count > 1:
        eu = float(var_u.std(ddof=1) / np.sqrt(count))
        ev = float(var_v.std(ddof=1) / np.sqrt(count))
    else:
        eu = ev = 0.0
    return _report_from_variances(mode_count, vu, eu, vv, ev,
                                  count * subensemble_size)
