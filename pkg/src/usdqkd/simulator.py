"""Monte Carlo model of the weak-pulse BB84 link, with optional USD attack.

Each trial draws Alice's polarization and a Poissonian photon number. Eve,
when active, performs USD conditional on the photon number and on success
injects a fresh pulse right in front of Bob's detectors; on failure she
sends vacuum. Otherwise photons are thinned by the channel. Bob picks a
basis, photons are routed to his two yes/no detectors and each is detected
with probability ``eta_b``.

Random streams are keyed on ``(seed, block index)`` with fixed-size blocks,
so a report depends only on the configuration, never on the worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .click_model import (
    ClickPoint,
    ResendDistribution,
    check_eta_b,
    check_eta_l,
    mixture_point,
    working_point,
)
from .errors import DomainError
from .usd_core import SourceModel, usd_probability, usd_probability_n, usd_probability_series

__all__ = [
    "UsdAttack",
    "SimConfig",
    "SimReport",
    "predicted_point",
    "run_simulation",
    "BLOCK_SIZE",
]

BLOCK_SIZE = 1 << 16
Z95 = 1.959963984540054

_COUNTERS = (
    "n_same_basis",
    "n_diff_basis",
    "single_clicks_same_basis",
    "double_clicks_same_basis",
    "single_clicks_diff_basis",
    "double_clicks_diff_basis",
    "eve_attacks",
    "eve_successes",
)


@dataclass(frozen=True)
class UsdAttack:
    """Eve's USD strategy; she intercepts each pulse with probability ``attack_fraction``."""

    resend: ResendDistribution
    attack_fraction: float = 1.0

    def __post_init__(self):
        if not isinstance(self.resend, ResendDistribution):
            object.__setattr__(self, "resend", ResendDistribution(self.resend))
        f = float(self.attack_fraction)
        if not (math.isfinite(f) and 0.0 <= f <= 1.0):
            raise DomainError(f"attack_fraction must lie in [0, 1], got {f!r}")
        object.__setattr__(self, "attack_fraction", f)


@dataclass(frozen=True)
class SimConfig:
    mu: float
    eta_l: float
    eta_b: float
    eve: UsdAttack | None = None
    trials: int = 1_000_000
    seed: int = 0

    def __post_init__(self):
        if not math.isfinite(self.mu) or self.mu < 0.0:
            raise DomainError(f"mean photon number must be finite and >= 0, got {self.mu!r}")
        check_eta_l(self.eta_l)
        check_eta_b(self.eta_b)
        if isinstance(self.trials, bool) or int(self.trials) != self.trials or self.trials < 1:
            raise DomainError(f"trials must be a positive integer, got {self.trials!r}")
        if int(self.seed) != self.seed or not 0 <= self.seed < 2**64:
            raise DomainError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")


@dataclass(frozen=True)
class SimReport:
    config: SimConfig
    n_same_basis: int
    n_diff_basis: int
    single_clicks_same_basis: int
    double_clicks_same_basis: int
    single_clicks_diff_basis: int
    double_clicks_diff_basis: int
    eve_attacks: int
    eve_successes: int
    est: ClickPoint
    ci95: tuple[float, float]
    predicted: ClickPoint
    z_scores: tuple[float, float]
    # empirical USD success rate among attacked trials against the Poisson sum
    usd_success_rate: float
    usd_success_z: float


def predicted_point(config: SimConfig) -> ClickPoint:
    """Analytic click pair: attack point and working point mixed by the attack fraction."""
    honest = working_point(config.mu, config.eta_l, config.eta_b)
    if config.eve is None:
        return honest
    f = config.eve.attack_fraction
    p_d = usd_probability(config.mu, SourceModel.FOCK)
    attacked = mixture_point(config.eve.resend, config.eta_b, p_d)
    return ClickPoint(
        f * attacked.p_single + (1.0 - f) * honest.p_single,
        f * attacked.p_double + (1.0 - f) * honest.p_double,
    )


def _block_rng(seed: int, block: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(block,))
    return np.random.Generator(np.random.Philox(ss))


def _usd_table(n_max: int) -> np.ndarray:
    return np.array([usd_probability_n(n) for n in range(n_max + 1)])


def _simulate_block(config: SimConfig, block: int, size: int, table: np.ndarray) -> np.ndarray:
    rng = _block_rng(config.seed, block)
    # draw order is part of the reproducibility contract
    state = rng.integers(0, 4, size)
    bob_basis = rng.integers(0, 2, size)
    photons = rng.poisson(config.mu, size)
    u_attack = rng.random(size)
    u_success = rng.random(size)
    if config.eve is not None:
        resend = config.eve.resend
        injected = rng.choice(resend.support, size=size, p=resend.probabilities)
        f = config.eve.attack_fraction
    else:
        injected = np.zeros(size, dtype=np.int64)
        f = 0.0
    transmitted = rng.binomial(photons, config.eta_l)

    attacked = u_attack < f
    if photons.max(initial=0) >= table.size:
        table = _usd_table(int(photons.max()))
    success = attacked & (u_success < table[photons])
    arriving = np.where(attacked, np.where(success, injected, 0), transmitted)

    same = (state // 2) == bob_basis
    to_first = rng.binomial(arriving, 0.5)
    first = np.where(same, arriving, to_first)
    second = arriving - first
    fires_first = rng.binomial(first, config.eta_b) > 0
    fires_second = rng.binomial(second, config.eta_b) > 0

    any_click = fires_first | fires_second
    both = fires_first & fires_second
    diff = ~same
    return np.array(
        [
            np.count_nonzero(same),
            np.count_nonzero(diff),
            np.count_nonzero(same & any_click),
            np.count_nonzero(same & both),
            np.count_nonzero(diff & any_click & ~both),
            np.count_nonzero(diff & both),
            np.count_nonzero(attacked),
            np.count_nonzero(success),
        ],
        dtype=np.int64,
    )


def _z(est: float, pred: float, n: int) -> float:
    if n == 0:
        return math.nan
    se = math.sqrt(pred * (1.0 - pred) / n)
    if se == 0.0:
        return 0.0 if est == pred else math.copysign(math.inf, est - pred)
    return (est - pred) / se


def _half_width(p: float, n: int) -> float:
    return Z95 * math.sqrt(p * (1.0 - p) / n) if n else math.nan


def run_simulation(config: SimConfig, workers: int = 1) -> SimReport:
    """Run ``config.trials`` trials and compare the tallies with the analytic point."""
    if not isinstance(config, SimConfig):
        raise DomainError("run_simulation expects a SimConfig")
    trials = int(config.trials)
    sizes = [min(BLOCK_SIZE, trials - start) for start in range(0, trials, BLOCK_SIZE)]
    table = _usd_table(max(64, int(config.mu + 20.0 * math.sqrt(config.mu) + 20)))

    def job(block: int) -> np.ndarray:
        return _simulate_block(config, block, sizes[block], table)

    if workers > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(job, range(len(sizes))))
    else:
        parts = [job(b) for b in range(len(sizes))]
    totals = dict(zip(_COUNTERS, (int(c) for c in np.sum(parts, axis=0))))

    n_same = totals["n_same_basis"]
    n_diff = totals["n_diff_basis"]
    est = ClickPoint(
        totals["single_clicks_same_basis"] / n_same if n_same else math.nan,
        totals["double_clicks_diff_basis"] / n_diff if n_diff else math.nan,
    )
    pred = predicted_point(config)

    attacks = totals["eve_attacks"]
    rate = totals["eve_successes"] / attacks if attacks else math.nan
    marginal = usd_probability_series(config.mu) if config.mu > 0 else 0.0
    return SimReport(
        config=config,
        **totals,
        est=est,
        ci95=(_half_width(est.p_single, n_same), _half_width(est.p_double, n_diff)),
        predicted=pred,
        z_scores=(
            _z(est.p_single, pred.p_single, n_same),
            _z(est.p_double, pred.p_double, n_diff),
        ),
        usd_success_rate=rate,
        usd_success_z=_z(rate, marginal, attacks),
    )
