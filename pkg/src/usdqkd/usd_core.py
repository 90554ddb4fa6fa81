"""Unambiguous discrimination of the four BB84 signal states.

Two source descriptions are supported. A pure coherent pulse |alpha> with
mean photon number ``mu = |alpha|^2`` gives one set of four symmetric states.
Without a phase reference the same pulse is a Poissonian mixture of Fock
states; discrimination then decomposes into a photon-number measurement
followed by optimal USD on the conditional n-photon states.

All coefficient quartets hold squared magnitudes ``|c_j|^2``.
"""

from __future__ import annotations

import enum
import math

import numpy as np

from .errors import DomainError, StructureError

__all__ = [
    "SourceModel",
    "coherent_coefficients",
    "fock_conditional_coefficients",
    "usd_probability_n",
    "usd_probability",
    "usd_failure_log",
    "usd_probability_series",
    "symmetric_usd_from_overlaps",
    "coherent_overlap_matrix",
]

_A = 1.0 / math.sqrt(2.0)

# cos and sin of k*pi/4 for k = 0..7, exact where the value is 0 or +-1
_EIGHTH_TURNS = (
    (1.0, 0.0),
    (_A, _A),
    (0.0, 1.0),
    (-_A, _A),
    (-1.0, 0.0),
    (-_A, -_A),
    (0.0, -1.0),
    (_A, -_A),
)

CIRCULANT_RTOL = 1e-9


class SourceModel(enum.Enum):
    COHERENT = "coherent"
    FOCK = "fock"


def _check_mu(mu: float) -> float:
    mu = float(mu)
    if not math.isfinite(mu) or mu < 0.0:
        raise DomainError(f"mean photon number must be finite and >= 0, got {mu!r}")
    return mu


def _check_n(n: int) -> int:
    if isinstance(n, bool) or int(n) != n or n < 0:
        raise DomainError(f"photon number must be a non-negative integer, got {n!r}")
    return int(n)


def _hyperbolic_minus_circular(h: float, first: int) -> float:
    """cosh h - cos h (first=2) or sinh h - sin h (first=3), cancellation-free."""
    if h >= 1.0:
        if first == 2:
            return math.cosh(h) - math.cos(h)
        return math.sinh(h) - math.sin(h)
    # 2 * sum_k h^(4k+first) / (4k+first)!
    term = h**first / math.factorial(first)
    total = 0.0
    k = first
    while term > 1e-18 * total or total == 0.0:
        total += term
        term *= h**4 / ((k + 1) * (k + 2) * (k + 3) * (k + 4))
        k += 4
        if term == 0.0:
            break
    return 2.0 * total


def coherent_coefficients(mu: float) -> np.ndarray:
    """Squared canonical weights ``|c_j|^2`` of the four coherent BB84 states.

    Evaluated as ``e^{-mu/2}`` times hyperbolic/circular combinations, in a
    form that neither overflows for large ``mu`` nor cancels for small ``mu``.
    """
    mu = _check_mu(mu)
    h = 0.5 * mu
    decay = math.exp(-h)
    if h < 1.0:
        c2 = 0.5 * decay * _hyperbolic_minus_circular(h, 2)
        c3 = 0.5 * decay * _hyperbolic_minus_circular(h, 3)
    else:
        c2 = 0.5 * (0.5 * (1.0 + math.exp(-mu)) - decay * math.cos(h))
        c3 = 0.5 * (-0.5 * math.expm1(-mu) - decay * math.sin(h))
    c0 = 0.5 * (0.5 * (1.0 + math.exp(-mu)) + decay * math.cos(h))
    c1 = 0.5 * (-0.5 * math.expm1(-mu) + decay * math.sin(h))
    return np.array([c0, c1, c2, c3])


def fock_conditional_coefficients(n: int) -> np.ndarray:
    """Squared weights of the four conditional states with exactly ``n`` photons.

    The vacuum subspace holds a single state, so ``n = 0`` returns (1, 0, 0, 0).
    """
    n = _check_n(n)
    if n == 0:
        return np.array([1.0, 0.0, 0.0, 0.0])
    amp = 2.0 ** -(1.0 + 0.5 * n)
    cos_t, sin_t = _EIGHTH_TURNS[n % 8]
    return np.array(
        [0.25 + amp * cos_t, 0.25 + amp * sin_t, 0.25 - amp * cos_t, 0.25 - amp * sin_t]
    )


def usd_probability_n(n: int) -> float:
    """Optimal USD success probability on the n-photon subspace."""
    n = _check_n(n)
    if n <= 2:
        return 0.0
    if n % 2 == 0:
        return 1.0 - 2.0 ** (1.0 - 0.5 * n)
    return 1.0 - 2.0 ** (0.5 * (1.0 - n))


def _coherent_failure_terms(mu: float) -> list[float]:
    # 1 - 4|c_j|^2 for j = 0..3, each written without a leading 1 - (...)
    h = 0.5 * mu
    decay = math.exp(-h)
    e_mu = math.exp(-mu)
    return [
        -e_mu - 2.0 * decay * math.cos(h),
        e_mu - 2.0 * decay * math.sin(h),
        -e_mu + 2.0 * decay * math.cos(h),
        e_mu + 2.0 * decay * math.sin(h),
    ]


def _fock_probability(mu: float) -> float:
    if mu <= 1.0:
        # e^{-mu} [e^mu + 1 - (1+a) e^{a mu} - (1-a) e^{-a mu}], expm1 keeps mu^3 onset
        inner = (
            math.expm1(mu)
            - (1.0 + _A) * math.expm1(_A * mu)
            - (1.0 - _A) * math.expm1(-_A * mu)
        )
        return math.exp(-mu) * inner
    return 1.0 - math.exp(usd_failure_log(mu, SourceModel.FOCK))


def usd_probability(mu: float, model: SourceModel = SourceModel.FOCK) -> float:
    """Maximum USD success probability for mean photon number ``mu``.

    ``COHERENT`` treats the signals as pure coherent states (four times the
    smallest canonical weight). ``FOCK`` treats them as phase-averaged
    Poissonian mixtures and uses the closed-form photon-number sum.
    """
    mu = _check_mu(mu)
    model = SourceModel(model)
    if model is SourceModel.COHERENT:
        return float(4.0 * coherent_coefficients(mu).min())
    return _fock_probability(mu)


def usd_failure_log(mu: float, model: SourceModel = SourceModel.FOCK) -> float:
    """Natural log of the USD failure probability ``1 - P_D(mu)``.

    Stays finite for any finite ``mu``; the direct form ``log(1 - P_D)``
    underflows to ``-inf`` once ``P_D`` rounds to one.
    """
    mu = _check_mu(mu)
    model = SourceModel(model)
    if model is SourceModel.COHERENT:
        if mu <= 2.0:
            return math.log1p(-usd_probability(mu, model))
        h = 0.5 * mu
        scaled = [t * math.exp(h) for t in _coherent_failure_terms(mu)]
        return -h + math.log(max(scaled))
    if mu <= 1.0:
        return math.log1p(-_fock_probability(mu))
    # (1+a) e^{-mu(1-a)} + (1-a) e^{-mu(1+a)} - e^{-mu}, factored by e^{-mu(1-a)}
    bracket = (1.0 + _A) + (1.0 - _A) * math.exp(-2.0 * _A * mu) - math.exp(-_A * mu)
    return -mu * (1.0 - _A) + math.log(bracket)


def usd_probability_series(mu: float, tol: float = 1e-14) -> float:
    """Photon-number sum of the Fock-mixture USD probability.

    Adds Poisson-weighted subspace probabilities until the accumulated weight
    exceeds ``1 - tol``. Since every subspace probability is at most one the
    truncation error is bounded by ``tol``.
    """
    mu = _check_mu(mu)
    if not 0.0 < tol < 1.0:
        raise DomainError(f"tol must lie in (0, 1), got {tol!r}")
    if mu == 0.0:
        return 0.0
    log_mu = math.log(mu)
    weight_sum = 0.0
    total = 0.0
    n = 0
    while True:
        w = math.exp(-mu + n * log_mu - math.lgamma(n + 1))
        weight_sum += w
        total += w * usd_probability_n(n)
        if 1.0 - weight_sum < tol:
            break
        # accumulated rounding can stall weight_sum just below 1 - tol
        if n > mu and w < tol * 1e-3:
            break
        n += 1
    return total


def coherent_overlap_matrix(mu: float) -> np.ndarray:
    """Gram matrix <Psi_k|Psi_l> of the four coherent BB84 signals."""
    mu = _check_mu(mu)
    phases = np.array([1, 1j, -1, -1j])
    # the first polarization mode is common to all four states
    diff = np.conj(phases)[:, None] * phases[None, :]
    return np.exp(-0.5 * mu + 0.5 * mu * diff)


def symmetric_usd_from_overlaps(overlaps) -> float:
    """USD success probability for a symmetric state set given its Gram matrix.

    The Gram matrix of states ``|Psi_k> = sum_j c_j e^{2 pi i jk/N} |phi_j>`` is
    circulant, and the discrete Fourier transform of its first row returns
    the squared weights ``|c_j|^2``.
    """
    g = np.asarray(overlaps, dtype=complex)
    if g.ndim != 2 or g.shape[0] != g.shape[1] or g.shape[0] == 0:
        raise StructureError(f"overlap matrix must be square, got shape {g.shape}")
    n = g.shape[0]
    scale = max(1.0, float(np.abs(g).max()))
    atol = CIRCULANT_RTOL * scale
    if not np.allclose(g, g.conj().T, rtol=0.0, atol=atol):
        raise StructureError("overlap matrix is not Hermitian")
    if not np.allclose(np.diag(g), 1.0, rtol=0.0, atol=atol):
        raise StructureError("overlap matrix must have unit diagonal")
    row = g[0]
    idx = (np.arange(n)[None, :] - np.arange(n)[:, None]) % n
    if not np.allclose(g, row[idx], rtol=0.0, atol=atol):
        raise StructureError("overlap matrix is not circulant")
    weights = np.fft.fft(row) / n
    if np.abs(weights.imag).max() > atol or weights.real.min() < -atol:
        raise StructureError("overlap matrix is not a valid Gram matrix")
    c_sq = np.clip(weights.real, 0.0, None)
    return float(min(1.0, n * c_sq.min()))
