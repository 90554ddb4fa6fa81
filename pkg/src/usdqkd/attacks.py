"""Beamsplitting attack figures of merit and comparison with the USD attack."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .click_model import check_eta_b, check_eta_l, check_probability
from .errors import DomainError
from .security_region import CriteriaMode, SecurityVerdict, Verdict, classify
from .usd_core import SourceModel, usd_probability

__all__ = [
    "BENNETT_USD_CUBIC_COEFF",
    "BeamsplitReport",
    "AttackComparison",
    "beamsplit_report",
    "two_photon_split",
    "compare_attacks",
]

# Leading-order coefficient of mu^3 for the passive beam-splitter USD setup.
# Only this constant is known; it is not used in any computation.
BENNETT_USD_CUBIC_COEFF = 1.0 / 32.0

CROSSOVER_TOL = 1e-6


@dataclass(frozen=True)
class BeamsplitReport:
    """Beamsplitting attack on a lossless line with transmission ``eta``.

    ``p_exp`` is Bob's detection probability, ``p_split`` the probability that
    Eve also holds a photon of the same pulse, and ``g_bs`` the sifted gain of
    bits unknown to her.
    """

    mu: float
    eta: float
    p_exp: float
    p_split: float
    g_bs: float


def beamsplit_report(mu: float, eta: float) -> BeamsplitReport:
    if not math.isfinite(mu) or mu < 0.0:
        raise DomainError(f"mean photon number must be finite and >= 0, got {mu!r}")
    eta = check_probability("eta", eta)
    p_exp = -math.expm1(-eta * mu)
    kept = math.exp(-(1.0 - eta) * mu)
    p_split = p_exp * -math.expm1(-(1.0 - eta) * mu)
    return BeamsplitReport(mu, eta, p_exp, p_split, 0.5 * kept * p_exp)


def two_photon_split(eta: float) -> tuple[float, float, float]:
    """Probabilities that 0, 1 or 2 photons of a two-photon pulse reach Bob."""
    eta = check_probability("eta", eta)
    return ((1.0 - eta) ** 2, 2.0 * eta * (1.0 - eta), eta**2)


@dataclass(frozen=True)
class AttackComparison:
    beamsplit: BeamsplitReport
    usd_verdict: SecurityVerdict
    usd_p_d: float
    # largest eta_l still insecure at fixed (mu, eta_b); None if the link is
    # USD-secure or stays insecure up to eta_l = 1
    crossover_eta: float | None


def _insecure(mu: float, eta_l: float, eta_b: float) -> bool:
    return classify(mu, eta_l, eta_b, CriteriaMode.GEOMETRIC).verdict is Verdict.INSECURE


def compare_attacks(mu: float, eta_l: float, eta_b: float) -> AttackComparison:
    """Evaluate both attacks on one link.

    The beamsplitter sees the total transmission ``eta_l * eta_b``. When the
    USD attack succeeds, bisection on ``eta_l`` locates where the link turns
    secure.
    """
    eta_l = check_eta_l(eta_l)
    eta_b = check_eta_b(eta_b)
    report = beamsplit_report(mu, eta_l * eta_b)
    verdict = classify(mu, eta_l, eta_b, CriteriaMode.GEOMETRIC)

    crossover = None
    if verdict.verdict is Verdict.INSECURE and not _insecure(mu, 1.0, eta_b):
        lo, hi = eta_l, 1.0
        while hi - lo > CROSSOVER_TOL:
            mid = 0.5 * (lo + hi)
            if _insecure(mu, mid, eta_b):
                lo = mid
            else:
                hi = mid
        crossover = lo
    return AttackComparison(
        beamsplit=report,
        usd_verdict=verdict,
        usd_p_d=usd_probability(mu, SourceModel.FOCK),
        crossover_eta=crossover,
    )
