"""Bob's click statistics with and without an intercept-resend eavesdropper.

Observables are pairs ``(p_single, p_double)``: the probability of a click
when Alice and Bob share a basis, and the probability that both detectors
fire when the bases differ. ``eta_l`` is the channel transmittance that Eve
can bypass; ``eta_b`` collects every loss she cannot touch, detector
efficiency included.
"""

from __future__ import annotations

import math
from collections.abc import Mapping
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import gammaln, xlog1py, xlogy

from .errors import DomainError

__all__ = [
    "ClickPoint",
    "ResendDistribution",
    "working_point",
    "number_state_point",
    "number_state_points",
    "joint_click_matrix",
    "mixture_point",
    "kappa",
    "n_curve_y",
    "working_curve_y",
]

WEIGHT_ATOL = 1e-12


class ClickPoint(NamedTuple):
    p_single: float
    p_double: float


def _check_unit(name: str, value: float, *, open_low: bool = False) -> float:
    value = float(value)
    low_ok = value > 0.0 if open_low else value >= 0.0
    if not (math.isfinite(value) and low_ok and value <= 1.0):
        bound = "(0, 1]" if open_low else "[0, 1]"
        raise DomainError(f"{name} must lie in {bound}, got {value!r}")
    return value


def check_eta_l(eta_l: float) -> float:
    return _check_unit("eta_l", eta_l)


def check_eta_b(eta_b: float) -> float:
    return _check_unit("eta_b", eta_b, open_low=True)


def check_probability(name: str, p: float) -> float:
    return _check_unit(name, p)


def _check_photons(n: int) -> int:
    if isinstance(n, bool) or int(n) != n or n < 0:
        raise DomainError(f"photon number must be a non-negative integer, got {n!r}")
    return int(n)


def _one_minus_pow(loss: float, n) -> np.ndarray:
    """1 - (1 - loss)**n, accurate for small ``loss``."""
    n = np.asarray(n, dtype=float)
    if loss >= 1.0:
        return np.where(n > 0, 1.0, 0.0)
    return -np.expm1(n * math.log1p(-loss))


@dataclass(frozen=True)
class ResendDistribution:
    """Photon-number law of the pulses Eve sends after a successful USD.

    ``weights`` maps photon number to probability and must sum to one.
    """

    weights: Mapping[int, float]

    def __post_init__(self):
        clean = {}
        for n, w in self.weights.items():
            n = _check_photons(n)
            w = float(w)
            if not math.isfinite(w) or w < 0.0:
                raise DomainError(f"resend weight for N={n} must be >= 0, got {w!r}")
            if w > 0.0:
                clean[n] = clean.get(n, 0.0) + w
        if not clean or abs(math.fsum(clean.values()) - 1.0) > WEIGHT_ATOL:
            raise DomainError("resend weights must sum to 1")
        object.__setattr__(self, "weights", dict(sorted(clean.items())))

    @classmethod
    def point_mass(cls, n: int) -> "ResendDistribution":
        return cls({n: 1.0})

    @classmethod
    def poisson(cls, mean: float, tail: float = 1e-12) -> "ResendDistribution":
        """Poisson law truncated once the remaining mass drops below ``tail``.

        The discarded tail is added to the largest retained photon number.
        """
        mean = float(mean)
        if not math.isfinite(mean) or mean < 0.0:
            raise DomainError(f"Poisson mean must be >= 0, got {mean!r}")
        if mean == 0.0:
            return cls.point_mass(0)
        weights = {}
        acc = 0.0
        n = 0
        while True:
            w = math.exp(-mean + n * math.log(mean) - math.lgamma(n + 1))
            weights[n] = w
            acc += w
            if 1.0 - acc < tail and n > mean:
                break
            n += 1
        weights[n] += 1.0 - math.fsum(weights.values())
        return cls(weights)

    @property
    def support(self) -> np.ndarray:
        return np.fromiter(self.weights.keys(), dtype=np.int64)

    @property
    def probabilities(self) -> np.ndarray:
        p = np.fromiter(self.weights.values(), dtype=float)
        return p / p.sum()


def working_point(mu: float, eta_l: float, eta_b: float) -> ClickPoint:
    """Expected click pair of the undisturbed link."""
    if not math.isfinite(mu) or mu < 0.0:
        raise DomainError(f"mean photon number must be finite and >= 0, got {mu!r}")
    t = check_eta_l(eta_l) * check_eta_b(eta_b) * mu
    return ClickPoint(-math.expm1(-t), math.expm1(-0.5 * t) ** 2)


def number_state_points(n, eta_b: float, p_d: float) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised :func:`number_state_point` over an array of photon numbers."""
    eta_b = check_eta_b(eta_b)
    p_d = check_probability("p_d", p_d)
    n = np.asarray(n)
    lost_one = _one_minus_pow(eta_b, n)
    lost_half = _one_minus_pow(0.5 * eta_b, n)
    single = p_d * lost_one
    # 1 - 2(1-eta/2)^N + (1-eta)^N == 2 [1-(1-eta/2)^N] - [1-(1-eta)^N]
    double = p_d * np.clip(2.0 * lost_half - lost_one, 0.0, None)
    double = np.where(n < 2, 0.0, double)
    return single, double


def number_state_point(n: int, eta_b: float, p_d: float) -> ClickPoint:
    """Click pair when Eve resends an ``n``-photon Fock state on every success."""
    n = _check_photons(n)
    single, double = number_state_points(n, eta_b, p_d)
    return ClickPoint(float(single), float(double))


def _binomial_pmf(n: int, p: float) -> np.ndarray:
    k = np.arange(n + 1)
    log_c = gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)
    return np.exp(log_c + xlogy(k, p) + xlog1py(n - k, -p))


def joint_click_matrix(n: int, eta_b: float, p_d: float) -> np.ndarray:
    """Joint law of detected photon counts on Bob's two detectors.

    Entry ``[k, l]`` is the probability that ``k`` photons are registered by
    the first detector and ``l`` by the second when ``n`` photons arrive in
    the conjugate basis, scaled by the USD success probability ``p_d``.
    """
    n = _check_photons(n)
    eta_b = check_eta_b(eta_b)
    p_d = check_probability("p_d", p_d)
    split = _binomial_pmf(n, 0.5)
    out = np.zeros((n + 1, n + 1))
    for m in range(n + 1):
        first = _binomial_pmf(m, eta_b)
        second = _binomial_pmf(n - m, eta_b)
        out[: m + 1, : n - m + 1] += split[m] * np.outer(first, second)
    return p_d * out


def mixture_point(dist, eta_b: float, p_d: float) -> ClickPoint:
    """Click pair for a resend photon-number mixture (a convex combination)."""
    if not isinstance(dist, ResendDistribution):
        dist = ResendDistribution(dist)
    single, double = number_state_points(dist.support, eta_b, p_d)
    w = dist.probabilities
    return ClickPoint(float(np.dot(w, single)), float(np.dot(w, double)))


def kappa(eta_b: float) -> float:
    """Exponent of the continuous number-state curve; zero at ``eta_b = 1``."""
    eta_b = check_eta_b(eta_b)
    if eta_b == 1.0:
        return 0.0
    return math.log1p(-0.5 * eta_b) / math.log1p(-eta_b)


def n_curve_y(x: float, eta_b: float, p_d: float) -> float:
    """Double-click coordinate of the number-state curve at single-click ``x``.

    The photon number is continued to real values through ``x``. At
    ``x = p_d`` the curve saturates at ``y = p_d`` (the infinite-N limit).
    For ``eta_b = 1`` the exponent vanishes and the limit form ``y = -x`` is
    returned below saturation.
    """
    p_d = check_probability("p_d", p_d)
    x = float(x)
    if not (0.0 <= x <= p_d):
        raise DomainError(f"x must lie in [0, p_d={p_d}], got {x!r}")
    if p_d == 0.0:
        return 0.0
    k = kappa(eta_b)
    frac = x / p_d
    rest = 1.0 - frac
    if rest == 0.0:
        return p_d
    # 2 - 2 r^k - x/P  ==  2(1 - r^k) - (1 - r)
    return p_d * (-2.0 * math.expm1(k * math.log(rest)) - frac)


def working_curve_y(x: float) -> float:
    """Double-click coordinate of the honest working-point curve."""
    x = float(x)
    if not (0.0 <= x <= 1.0):
        raise DomainError(f"x must lie in [0, 1], got {x!r}")
    # 1 - sqrt(1-x) == x / (1 + sqrt(1-x))
    return (x / (1.0 + math.sqrt(1.0 - x))) ** 2
