"""Deterministic release-health battery behind the ``selftest`` subcommand.

Each check prints one PASS/FAIL line.  Sizes are kept small so the whole
battery runs in well under a minute; statistical checks use 10-sigma
bounds so a healthy build never trips them.
"""

from __future__ import annotations

import numpy as np

from .clicks import GroupPartition, grouped_probability
from .network import (TransmissionMatrix, decoherence_matrix_sqrt, haar_unitary,
                      transform_positive_p, transform_sigma_ordered)
from .oracles import (exact_pattern_distribution, fock_truncation_oracle,
                      input_gaussian_moments, output_gaussian_moments,
                      torontonian_probability)
from .phase_space import (SqueezerSpec, WIGNER, derive_moments,
                          sample_positive_p, sample_sigma_ordered)
from .quadrature import build_entanglement_unitary

_CHECKS = []


def _check(name):
    def deco(fn):
        _CHECKS.append((name, fn))
        return fn
    return deco


@_check("derived moments match closed forms")
def _moments():
    spec = SqueezerSpec([1.0, -0.5, 0.0], decoherence_fraction=0.25)
    n, m = derive_moments(spec)
    assert abs(n[0] - np.sinh(1.0) ** 2) < 1e-14
    assert abs(m[0] - 0.75 * np.sinh(1.0) * np.cosh(1.0)) < 1e-14
    assert n[2] == 0.0 and m[2] == 0.0


@_check("doubled sampler reproduces input moments")
def _sampler_moments():
    spec = SqueezerSpec([1.0], decoherence_fraction=0.0)
    ens = sample_positive_p(spec, seed=11, subensemble_count=100,
                            subensemble_size=1000)
    n, m = derive_moments(spec)
    est = (ens.alpha * ens.beta).mean()
    se = (ens.alpha * ens.beta).real.std() / np.sqrt(ens.sample_count)
    assert abs(est.real - n[0]) < 10 * se


@_check("sigma > 0 ensembles satisfy beta = conj(alpha) exactly")
def _conjugacy():
    spec = SqueezerSpec([0.8, -0.3])
    ens = sample_sigma_ordered(spec, WIGNER, seed=3, subensemble_count=5,
                               subensemble_size=100)
    assert np.array_equal(ens.beta, np.conj(ens.alpha))


@_check("vacuum inputs sample to exact zeros")
def _vacuum_zero():
    ens = sample_positive_p(SqueezerSpec([0.0, 0.0]), seed=1,
                            subensemble_count=2, subensemble_size=50)
    assert np.all(ens.alpha == 0) and np.all(ens.beta == 0)


@_check("unitary transmission conserves per-sample flux")
def _flux():
    spec = SqueezerSpec.uniform(6, 0.9, squeezed_modes=3)
    ens = sample_positive_p(spec, seed=5, subensemble_count=4,
                            subensemble_size=200)
    out = transform_positive_p(ens, haar_unitary(6, seed=8))
    before = (ens.alpha * ens.beta).sum(axis=1)
    after = (out.alpha * out.beta).sum(axis=1)
    assert np.abs(after - before).max() <= 1e-10 * np.abs(before).max()


@_check("vacuum is a fixed point of lossy sigma-ordered transmission")
def _vacuum_fixed_point():
    M = 4
    ens = sample_sigma_ordered(SqueezerSpec([0.0] * M), WIGNER, seed=7,
                               subensemble_count=100, subensemble_size=1000)
    lossy = TransmissionMatrix(0.6 * haar_unitary(M, seed=9).matrix)
    out = transform_sigma_ordered(ens, lossy, seed=13)
    second = np.abs(out.alpha) ** 2
    se = second.std() / np.sqrt(out.sample_count)
    assert np.abs(second.mean(axis=0) - 0.5).max() < 10 * se * np.sqrt(M)


@_check("grouped tensor sums to one at any sample count")
def _normalization():
    spec = SqueezerSpec.uniform(8, 1.0, squeezed_modes=4)
    ens = sample_positive_p(spec, seed=2, subensemble_count=1,
                            subensemble_size=1)
    out = transform_positive_p(ens, haar_unitary(8, seed=4))
    dist = grouped_probability(out, GroupPartition.from_sizes([4, 4]))
    assert abs(dist.total() - 1.0) <= 1e-10


@_check("decoherence square root reconstructs the deficit")
def _deficit_sqrt():
    T = TransmissionMatrix(0.8 * haar_unitary(5, seed=21).matrix)
    B = decoherence_matrix_sqrt(T)
    D = np.eye(5) - T.matrix.conj().T @ T.matrix
    assert np.abs(B @ B - D).max() <= 1e-8


@_check("entanglement chain is unitary")
def _chain():
    for M in (2, 3, 25):
        U = build_entanglement_unitary(M)
        res = np.abs(U.matrix @ U.matrix.conj().T - np.eye(M)).max()
        assert res <= 1e-10


@_check("pattern probabilities sum to one (M = 6)")
def _completeness():
    spec = SqueezerSpec.uniform(6, 0.8, squeezed_modes=3)
    gm = output_gaussian_moments(spec, haar_unitary(6, seed=17))
    pats = exact_pattern_distribution(gm)
    assert abs(pats.sum() - 1.0) <= 1e-8


@_check("Fock brute force agrees with the determinant oracle")
def _fock_vs_toronto():
    spec = SqueezerSpec([0.9])
    T = TransmissionMatrix.identity(1)
    fock = fock_truncation_oracle(spec, T, photon_cutoff=70)
    gm = input_gaussian_moments(spec)
    exact = torontonian_probability(gm, clicks=[0], measured=[0])
    assert abs(fock[1] - exact) < 1e-7


def run_all() -> tuple[bool, list[str]]:
    lines = []
    ok = True
    for name, fn in _CHECKS:
        try:
            fn()
            lines.append(f"PASS {name}")
        except Exception as exc:  # noqa: BLE001 - report any failure mode
            ok = False
            lines.append(f"FAIL {name}: {exc}")
    return ok, lines
