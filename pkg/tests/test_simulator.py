import pytest

from usdqkd import DomainError
from usdqkd.click_model import ResendDistribution, number_state_point, working_point
from usdqkd.simulator import SimConfig, UsdAttack, predicted_point, run_simulation
from usdqkd.usd_core import usd_probability


def attack(n, fraction=1.0):
    return UsdAttack(ResendDistribution.point_mass(n), fraction)


def test_prediction_without_eve():
    cfg = SimConfig(1.3, 0.2, 0.6, None, 10)
    assert predicted_point(cfg) == working_point(1.3, 0.2, 0.6)


def test_prediction_attack_fraction_zero():
    cfg = SimConfig(1.3, 0.2, 0.6, attack(2, 0.0), 10)
    assert predicted_point(cfg) == pytest.approx(working_point(1.3, 0.2, 0.6), abs=1e-15)


def test_prediction_full_attack():
    cfg = SimConfig(2.0, 0.2, 0.6, attack(2), 10)
    assert predicted_point(cfg) == pytest.approx(number_state_point(2, 0.6, usd_probability(2.0)), abs=1e-15)


def test_prediction_half_attack():
    cfg = SimConfig(2.07, 0.1, 0.5, attack(2, 0.5), 10)
    mid = (0.5 * (0.098324 + 0.139973), 0.5 * (0.0025436 + 0.023329))
    assert predicted_point(cfg) == pytest.approx(mid, abs=2e-6)


@pytest.mark.parametrize("eve", [None, attack(2), attack(5, 0.3)])
def test_vacuum_source_never_clicks(eve):
    r = run_simulation(SimConfig(0.0, 0.5, 0.5, eve, 100_000, 3))
    assert r.single_clicks_same_basis == 0
    assert r.double_clicks_diff_basis == 0
    assert r.single_clicks_diff_basis == 0
    assert r.n_same_basis + r.n_diff_basis == 100_000


def test_no_eve_single_click_rate():
    r = run_simulation(SimConfig(1.0, 0.1, 0.5, None, 1_000_000, 11))
    se = (0.048771 * (1 - 0.048771) / r.n_same_basis) ** 0.5
    assert abs(r.est.p_single - 0.048771) <= 4 * se
    assert r.eve_attacks == 0


def test_full_attack_two_photon_resend():
    r = run_simulation(SimConfig(4.0, 0.1, 0.5, attack(2), 1_000_000, 12))
    target = usd_probability(4.0) * 0.75
    assert target == pytest.approx(0.36676, abs=1e-5)
    se = (target * (1 - target) / r.n_same_basis) ** 0.5
    assert abs(r.est.p_single - target) <= 4 * se
    assert r.double_clicks_same_basis == 0


def test_marginal_usd_success_matches_series():
    r = run_simulation(SimConfig(3.0, 0.5, 0.5, attack(1), 500_000, 5))
    assert r.eve_attacks == 500_000
    assert abs(r.usd_success_z) <= 4


def test_partial_attack_participation():
    r = run_simulation(SimConfig(2.0, 0.5, 0.5, attack(2, 0.25), 400_000, 8))
    p = 0.25
    se = (p * (1 - p) / 400_000) ** 0.5
    assert abs(r.eve_attacks / 400_000 - p) <= 4 * se


@pytest.mark.parametrize("workers", [2, 3, 8])
def test_result_independent_of_workers(workers):
    cfg = SimConfig(2.0, 0.3, 0.7, attack(3, 0.6), 300_001, 2**63 + 5)
    assert run_simulation(cfg, workers=workers) == run_simulation(cfg, workers=1)


def test_different_seeds_differ():
    a = run_simulation(SimConfig(2.0, 0.3, 0.7, None, 100_000, 1))
    b = run_simulation(SimConfig(2.0, 0.3, 0.7, None, 100_000, 2))
    assert a.single_clicks_same_basis != b.single_clicks_same_basis


def test_report_consistency():
    r = run_simulation(SimConfig(3.0, 0.4, 0.6, attack(4, 0.5), 200_000, 9))
    assert r.single_clicks_same_basis <= r.n_same_basis
    assert r.single_clicks_diff_basis + r.double_clicks_diff_basis <= r.n_diff_basis
    assert r.eve_successes <= r.eve_attacks
    assert 0.0 <= r.est.p_single <= 1.0 and 0.0 <= r.est.p_double <= 1.0
    assert r.ci95[0] > 0 and r.ci95[1] > 0


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(trials=0),
        dict(trials=-5),
        dict(mu=-1.0),
        dict(eta_l=1.5),
        dict(eta_b=0.0),
        dict(seed=-1),
        dict(seed=2**64),
    ],
)
def test_config_validation(kwargs):
    base = dict(mu=1.0, eta_l=0.5, eta_b=0.5, eve=None, trials=10, seed=0)
    base.update(kwargs)
    with pytest.raises(DomainError):
        SimConfig(**base)


def test_attack_fraction_validation():
    with pytest.raises(DomainError):
        UsdAttack(ResendDistribution.point_mass(2), 1.5)
    assert UsdAttack({2: 1.0}).resend == ResendDistribution.point_mass(2)
