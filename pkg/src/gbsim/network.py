"""Linear-network transmission of phase-space ensembles.

A transmission matrix maps input to output mode amplitudes.  In the doubled
(normally ordered) representation a lossy matrix can be applied directly
with no extra noise.  In sigma-ordered representations, loss removes vacuum
noise that must be re-injected: the injected term is scaled by the
Hermitian square root of the output-side deficit I - T T^dagger, which
keeps a vacuum ensemble exactly invariant for any non-amplifying matrix
(for square matrices with T^dagger T = T T^dagger this coincides with the
input-side deficit I - T^dagger T).
"""

from __future__ import annotations

import numpy as np

from ._rng import STREAM_HAAR, STREAM_NETWORK, substream
from .phase_space import PhaseSpaceEnsemble

__all__ = [
    "TransmissionMatrix",
    "transform_positive_p",
    "transform_sigma_ordered",
    "decoherence_matrix_sqrt",
    "scale_transmission",
    "haar_unitary",
    "read_transmission_file",
    "write_transmission_file",
]

SINGULAR_VALUE_TOL = 1e-10
UNITARY_TOL = 1e-10
EIGENVALUE_CLAMP = 1e-12


class TransmissionMatrix:
    """Complex (outputs x inputs) linear map, verified non-amplifying."""

    def __init__(self, matrix, is_unitary: bool | None = None):
        matrix = np.atleast_2d(np.asarray(matrix, dtype=np.complex128))
        if matrix.ndim != 2:
            raise ValueError("transmission matrix must be 2-D")
        if not np.all(np.isfinite(matrix)):
            raise ValueError("transmission matrix entries must be finite")
        smax = float(np.linalg.norm(matrix, 2))
        if smax > 1.0 + SINGULAR_VALUE_TOL:
            raise ValueError(
                f"amplifying transmission matrix: largest singular value {smax!r} > 1")
        unitary_residual = None
        if matrix.shape[0] == matrix.shape[1]:
            gram = matrix.conj().T @ matrix
            unitary_residual = float(
                np.abs(gram - np.eye(matrix.shape[0])).max())
        if is_unitary is None:
            is_unitary = unitary_residual is not None and unitary_residual <= UNITARY_TOL
        elif is_unitary:
            if unitary_residual is None:
                raise ValueError("a non-square matrix cannot be unitary")
            if unitary_residual > UNITARY_TOL:
                raise ValueError(
                    f"matrix declared unitary but residual {unitary_residual:.3e} "
                    f"exceeds {UNITARY_TOL}")
        self.matrix = matrix
        self.matrix.setflags(write=False)
        self.is_unitary = bool(is_unitary)

    @property
    def output_count(self) -> int:
        return self.matrix.shape[0]

    @property
    def input_count(self) -> int:
        return self.matrix.shape[1]

    @classmethod
    def identity(cls, modes: int) -> "TransmissionMatrix":
        return cls(np.eye(modes), is_unitary=True)

    def __repr__(self) -> str:
        return (f"TransmissionMatrix({self.output_count}x{self.input_count}, "
                f"unitary={self.is_unitary})")


def _padded_alpha_width(ens: PhaseSpaceEnsemble, T: TransmissionMatrix) -> None:
    if ens.mode_count > T.input_count:
        raise ValueError(
            f"ensemble has {ens.mode_count} modes but the matrix accepts "
            f"{T.input_count} inputs")


def _apply(block: np.ndarray, T: TransmissionMatrix, conjugate: bool) -> np.ndarray:
    mat = np.conj(T.matrix) if conjugate else T.matrix
    modes = block.shape[1]
    # missing input modes are vacuum: only the used columns contribute
    return block @ mat[:, :modes].T


def transform_positive_p(ens: PhaseSpaceEnsemble, T: TransmissionMatrix) -> PhaseSpaceEnsemble:
    """Deterministic amplitude map alpha' = T alpha, beta' = conj(T) beta.

    Valid only in the doubled representation, where losses need no
    compensating noise.  Ensembles with fewer modes than matrix inputs are
    zero-padded (extra inputs are vacuum).
    """
    if not ens.representation.is_doubled:
        raise ValueError("transform_positive_p requires a sigma = 0 ensemble")
    _padded_alpha_width(ens, T)
    size = ens.subensemble_size
    out_a = np.empty((ens.sample_count, T.output_count), dtype=np.complex128)
    out_b = np.empty_like(out_a)
    for i in range(ens.subensemble_count):
        a, b = ens.block(i)
        lo = i * size
        out_a[lo:lo + size] = _apply(a, T, conjugate=False)
        out_b[lo:lo + size] = _apply(b, T, conjugate=True)
    return PhaseSpaceEnsemble(ens.representation, out_a, out_b,
                              ens.subensemble_count, size, ens.seed)


def _psd_sqrt(deficit: np.ndarray) -> np.ndarray:
    """Hermitian PSD square root of a deficit matrix, clamping tiny negatives.

    Eigenvalues in [-EIGENVALUE_CLAMP, 0) are rounding noise and become 0;
    anything more negative means the matrix amplifies.
    """
    vals, vecs = np.linalg.eigh((deficit + deficit.conj().T) / 2.0)
    if vals.min() < -EIGENVALUE_CLAMP:
        raise ValueError(
            f"deficit matrix has eigenvalue {vals.min():.3e} < -{EIGENVALUE_CLAMP}; "
            "the transmission matrix is amplifying or invalid")
    vals = np.clip(vals, 0.0, None)
    return (vecs * np.sqrt(vals)) @ vecs.conj().T


def decoherence_matrix_sqrt(T: TransmissionMatrix) -> np.ndarray:
    """Hermitian square root B of the input-side deficit I - T^dagger T."""
    deficit = np.eye(T.input_count) - T.matrix.conj().T @ T.matrix
    return _psd_sqrt(deficit)


def _output_noise_sqrt(T: TransmissionMatrix) -> np.ndarray:
    """Hermitian square root of the output-side deficit I - T T^dagger."""
    deficit = np.eye(T.output_count) - T.matrix @ T.matrix.conj().T
    return _psd_sqrt(deficit)


def transform_sigma_ordered(ens: PhaseSpaceEnsemble, T: TransmissionMatrix,
                            seed: int) -> PhaseSpaceEnsemble:
    """Transmit a sigma > 0 ensemble, re-injecting lost vacuum noise.

    alpha' = T alpha + sqrt(sigma/2) B (u + i v) with u, v unit Gaussians
    per sample and B the output-side deficit square root, so a vacuum
    ensemble keeps second moments sigma * delta_ij through any valid
    matrix.  Unitary matrices add no noise (and draw none).
    """
    sigma = ens.representation.sigma
    if sigma <= 0.0:
        raise ValueError("transform_sigma_ordered requires a sigma > 0 ensemble")
    _padded_alpha_width(ens, T)
    size = ens.subensemble_size
    out_a = np.empty((ens.sample_count, T.output_count), dtype=np.complex128)
    noise_sqrt = None if T.is_unitary else _output_noise_sqrt(T)
    amp = np.sqrt(sigma / 2.0)
    for i in range(ens.subensemble_count):
        a, _ = ens.block(i)
        lo = i * size
        out = _apply(a, T, conjugate=False)
        if noise_sqrt is not None:
            rng = substream(seed, STREAM_NETWORK, i)
            u = rng.standard_normal((size, T.output_count))
            v = rng.standard_normal((size, T.output_count))
            out = out + amp * ((u + 1j * v) @ noise_sqrt.T)
        out_a[lo:lo + size] = out
    return PhaseSpaceEnsemble(ens.representation, out_a, None,
                              ens.subensemble_count, size, ens.seed)


def scale_transmission(T: TransmissionMatrix, factor: float) -> TransmissionMatrix:
    """Multiply every entry by a positive factor (a global recalibration)."""
    factor = float(factor)
    if factor <= 0:
        raise ValueError("scale factor must be positive")
    return TransmissionMatrix(factor * T.matrix)


def haar_unitary(modes: int, seed: int) -> TransmissionMatrix:
    """Seeded Haar-distributed unitary via QR with the diagonal-phase fix."""
    if modes < 1:
        raise ValueError("modes must be >= 1")
    rng = substream(seed, STREAM_HAAR, 0)
    z = (rng.standard_normal((modes, modes))
         + 1j * rng.standard_normal((modes, modes))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    phases = np.diag(r) / np.abs(np.diag(r))
    return TransmissionMatrix(q * phases, is_unitary=True)


def read_transmission_file(path) -> TransmissionMatrix:
    """Parse the text matrix format: 'rows cols' then rows lines of re/im pairs."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise ValueError(f"{path}: first line must be 'rows cols'")
        rows, cols = int(header[0]), int(header[1])
        matrix = np.zeros((rows, cols), dtype=np.complex128)
        for i in range(rows):
            parts = fh.readline().split()
            if len(parts) != 2 * cols:
                raise ValueError(
                    f"{path}: line {i + 2} has {len(parts)} numbers, expected {2 * cols}")
            row = np.asarray(parts, dtype=float).reshape(cols, 2)
            matrix[i] = row[:, 0] + 1j * row[:, 1]
    return TransmissionMatrix(matrix)


def write_transmission_file(path, T: TransmissionMatrix) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{T.output_count} {T.input_count}\n")
        for row in T.matrix:
            fh.write(" ".join(f"{z.real:.17g} {z.imag:.17g}" for z in row))
            fh.write("\n")
