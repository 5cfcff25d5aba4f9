"""Phase-space input sampling for squeezed, thermalized and thermal modes.

A network input is described by a :class:`SqueezerSpec`: a vector of signed
squeezing parameters (zero entries are vacuum modes) plus a decoherence
fraction that scales down the pair coherence while leaving the mean photon
number untouched.  Stochastic samples are drawn either in the doubled
(normally ordered) representation, where the two amplitude arrays are
independent, or in a sigma-ordered classical representation (sigma = 1/2 is
the symmetric/Wigner case, sigma = 1 the antinormal/Q case), where the
second array is the complex conjugate of the first.

Sign convention: squeezing > 0 reduces the p-quadrature variance
(Var p = exp(-2 r), Var x = exp(+2 r)); a negative entry squeezes x
instead.  Quadratures are normalized so a vacuum mode has unit variance.

Sampling is deterministic: a master seed plus the sub-ensemble index fix
every noise draw (see :mod:`gbsim._rng`), so identical arguments reproduce
identical arrays bit-for-bit no matter how sub-ensembles are scheduled.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._rng import STREAM_INPUT, substream

__all__ = [
    "OrderingParam",
    "POSITIVE_P",
    "WIGNER",
    "Q_FUNCTION",
    "SqueezerSpec",
    "PhaseSpaceEnsemble",
    "derive_moments",
    "sample_positive_p",
    "sample_sigma_ordered",
]

_ALLOWED_SIGMAS = (0.0, 0.5, 1.0)


@dataclass(frozen=True)
class OrderingParam:
    """Vacuum-noise fraction selecting the phase-space representation.

    sigma = 0 is the normally ordered (doubled-variable) representation,
    sigma = 1/2 the Wigner representation and sigma = 1 the Q function.
    For sigma > 0 the conjugate amplitude is pinned to conj(alpha).
    """

    sigma: float

    def __post_init__(self) -> None:
        if self.sigma not in _ALLOWED_SIGMAS:
            raise ValueError(
                f"ordering sigma must be one of {_ALLOWED_SIGMAS}, got {self.sigma}"
            )

    @property
    def is_doubled(self) -> bool:
        return self.sigma == 0.0


POSITIVE_P = OrderingParam(0.0)
WIGNER = OrderingParam(0.5)
Q_FUNCTION = OrderingParam(1.0)


class SqueezerSpec:
    """Input description: signed squeezing per mode plus decoherence fraction."""

    def __init__(self, squeezing, decoherence_fraction: float = 0.0):
        squeezing = np.atleast_1d(np.asarray(squeezing, dtype=float))
        if squeezing.ndim != 1 or squeezing.size < 1:
            raise ValueError("squeezing must be a non-empty 1-D vector")
        if not np.all(np.isfinite(squeezing)):
            raise ValueError("squeezing entries must be finite")
        eps = float(decoherence_fraction)
        if not (0.0 <= eps <= 1.0):
            raise ValueError(f"decoherence_fraction must be in [0, 1], got {eps}")
        self.squeezing = squeezing
        self.squeezing.setflags(write=False)
        self.decoherence_fraction = eps

    @property
    def mode_count(self) -> int:
        return self.squeezing.size

    @classmethod
    def uniform(cls, mode_count: int, r: float, squeezed_modes: int | None = None,
                decoherence_fraction: float = 0.0) -> "SqueezerSpec":
        """Spec with ``squeezed_modes`` leading entries at ``r``, rest vacuum."""
        if mode_count < 1:
            raise ValueError("mode_count must be >= 1")
        n_sq = mode_count if squeezed_modes is None else int(squeezed_modes)
        if not (0 <= n_sq <= mode_count):
            raise ValueError("squeezed_modes must lie in [0, mode_count]")
        vec = np.zeros(mode_count)
        vec[:n_sq] = r
        return cls(vec, decoherence_fraction)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, SqueezerSpec)
            and np.array_equal(self.squeezing, other.squeezing)
            and self.decoherence_fraction == other.decoherence_fraction
        )

    def __repr__(self) -> str:
        return (f"SqueezerSpec(modes={self.mode_count}, "
                f"decoherence_fraction={self.decoherence_fraction})")


def derive_moments(spec: SqueezerSpec) -> tuple[np.ndarray, np.ndarray]:
    """Per-mode mean photon number and (decoherence-scaled) pair coherence.

    Returns ``(n, m)`` with ``n_j = sinh^2(r_j)`` and
    ``m_j = (1 - eps) * sinh(r_j) * cosh(r_j)``.  The photon number is
    independent of the decoherence fraction; only the coherence shrinks.
    """
    r = spec.squeezing
    with np.errstate(over="ignore"):
        n = np.sinh(r) ** 2
        m = (1.0 - spec.decoherence_fraction) * np.sinh(r) * np.cosh(r)
    return n, m


class PhaseSpaceEnsemble:
    """Immutable block of phase-space samples with sub-ensemble structure.

    ``alpha`` has shape (samples, modes) with
    ``samples = subensemble_count * subensemble_size``; row blocks of
    ``subensemble_size`` consecutive samples belong to one sub-ensemble and
    share one RNG stream.  For sigma > 0, ``beta`` is exactly
    ``conj(alpha)``; for the doubled representation it is stored separately.
    """

    def __init__(self, representation: OrderingParam, alpha: np.ndarray,
                 beta: np.ndarray | None, subensemble_count: int,
                 subensemble_size: int, seed: int):
        alpha = np.ascontiguousarray(alpha, dtype=np.complex128)
        if alpha.ndim != 2:
            raise ValueError("alpha must be a 2-D (samples, modes) array")
        if subensemble_count < 1 or subensemble_size < 1:
            raise ValueError("subensemble_count and subensemble_size must be >= 1")
        if alpha.shape[0] != subensemble_count * subensemble_size:
            raise ValueError("samples must equal subensemble_count * subensemble_size")
        if representation.is_doubled:
            if beta is None:
                raise ValueError("doubled representation requires an explicit beta")
            beta = np.ascontiguousarray(beta, dtype=np.complex128)
            if beta.shape != alpha.shape:
                raise ValueError("beta must match alpha's shape")
        elif beta is not None:
            raise ValueError("sigma > 0 ensembles derive beta as conj(alpha)")
        self.representation = representation
        self.alpha = alpha
        self.alpha.setflags(write=False)
        self._beta = beta
        if beta is not None:
            self._beta.setflags(write=False)
        self.subensemble_count = int(subensemble_count)
        self.subensemble_size = int(subensemble_size)
        self.seed = int(seed)

    @property
    def sample_count(self) -> int:
        return self.alpha.shape[0]

    @property
    def mode_count(self) -> int:
        return self.alpha.shape[1]

    @property
    def beta(self) -> np.ndarray:
        if self._beta is not None:
            return self._beta
        return np.conj(self.alpha)

    def block(self, index: int) -> tuple[np.ndarray, np.ndarray]:
        """(alpha, beta) views/arrays for one sub-ensemble."""
        lo = index * self.subensemble_size
        hi = lo + self.subensemble_size
        a = self.alpha[lo:hi]
        b = self._beta[lo:hi] if self._beta is not None else np.conj(a)
        return a, b


def _doubled_coefficients(n: np.ndarray, m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Noise coefficients (c1, c2) so alpha = c1 w1 + c2 w2, beta = c1 w1 - c2 w2.

    c1 is the principal square root of (n + m)/2 and c2 = i * sqrt((n - m)/2);
    the branches are written out explicitly so that real-valued cases stay
    exactly real in floating point.
    """
    half_plus = (n + m) / 2.0
    half_minus = (n - m) / 2.0
    c1 = np.where(half_plus >= 0,
                  np.sqrt(np.abs(half_plus)) + 0j,
                  1j * np.sqrt(np.abs(half_plus)))
    c2 = np.where(half_minus >= 0,
                  1j * np.sqrt(np.abs(half_minus)),
                  -np.sqrt(np.abs(half_minus)) + 0j)
    return c1.astype(np.complex128), c2.astype(np.complex128)


def _doubled_block(c1, c2, rng, size, modes):
    w1 = rng.standard_normal((size, modes))
    w2 = rng.standard_normal((size, modes))
    alpha = c1 * w1 + c2 * w2
    beta = c1 * w1 - c2 * w2
    return alpha, beta


def _sigma_block(d_plus, d_minus, rng, size, modes):
    w1 = rng.standard_normal((size, modes))
    w2 = rng.standard_normal((size, modes))
    return d_plus * w1 + 1j * (d_minus * w2)


def sample_positive_p(spec: SqueezerSpec, seed: int, subensemble_count: int,
                      subensemble_size: int) -> PhaseSpaceEnsemble:
    """Draw doubled-representation samples for the given input spec.

    Each mode uses two independent unit Gaussians; the coefficients are
    fixed by the moments so that ``<alpha beta> -> n`` and
    ``<alpha^2> -> m``.  For ``n < m`` (pure squeezing with r > 0) both
    coefficients are real and so are all samples.
    """
    n, m = derive_moments(spec)
    if not (np.all(np.isfinite(n)) and np.all(np.isfinite(m))):
        raise ValueError("derived moments are not finite; check the squeezing vector")
    c1, c2 = _doubled_coefficients(n, m)
    modes = spec.mode_count
    alpha = np.empty((subensemble_count * subensemble_size, modes), dtype=np.complex128)
    beta = np.empty_like(alpha)
    for i in range(subensemble_count):
        rng = substream(seed, STREAM_INPUT, i)
        lo = i * subensemble_size
        a, b = _doubled_block(c1, c2, rng, subensemble_size, modes)
        alpha[lo:lo + subensemble_size] = a
        beta[lo:lo + subensemble_size] = b
    return PhaseSpaceEnsemble(POSITIVE_P, alpha, beta, subensemble_count,
                              subensemble_size, seed)


def sigma_coefficients(spec: SqueezerSpec, ordering: OrderingParam,
                       tol: float = 1e-12) -> tuple[np.ndarray, np.ndarray]:
    """Real noise coefficients (d_plus, d_minus) for a sigma-ordered sampler."""
    if ordering.sigma <= 0.0:
        raise ValueError("sigma-ordered sampling requires sigma > 0; "
                         "use sample_positive_p for the doubled representation")
    n, m = derive_moments(spec)
    if not (np.all(np.isfinite(n)) and np.all(np.isfinite(m))):
        raise ValueError("derived moments are not finite; check the squeezing vector")
    lo = n + ordering.sigma - np.abs(m)
    if np.any(lo < -tol):
        raise ValueError("n + sigma - |m| is negative: inputs are unphysical "
                         "for this ordering")
    d_plus = np.sqrt(np.clip((n + ordering.sigma + m) / 2.0, 0.0, None))
    d_minus = np.sqrt(np.clip((n + ordering.sigma - m) / 2.0, 0.0, None))
    return d_plus, d_minus


def sample_sigma_ordered(spec: SqueezerSpec, ordering: OrderingParam, seed: int,
                         subensemble_count: int, subensemble_size: int) -> PhaseSpaceEnsemble:
    """Draw sigma-ordered classical samples (beta is conj(alpha) exactly)."""
    d_plus, d_minus = sigma_coefficients(spec, ordering)
    modes = spec.mode_count
    alpha = np.empty((subensemble_count * subensemble_size, modes), dtype=np.complex128)
    for i in range(subensemble_count):
        rng = substream(seed, STREAM_INPUT, i)
        lo = i * subensemble_size
        alpha[lo:lo + subensemble_size] = _sigma_block(
            d_plus, d_minus, rng, subensemble_size, modes)
    return PhaseSpaceEnsemble(ordering, alpha, None, subensemble_count,
                              subensemble_size, seed)
