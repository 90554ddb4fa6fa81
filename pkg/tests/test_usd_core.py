import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from usdqkd import DomainError, StructureError
from usdqkd.usd_core import (
    SourceModel,
    coherent_coefficients,
    coherent_overlap_matrix,
    fock_conditional_coefficients,
    symmetric_usd_from_overlaps,
    usd_failure_log,
    usd_probability,
    usd_probability_n,
    usd_probability_series,
)

from . import oracles

FOCK = SourceModel.FOCK
COHERENT = SourceModel.COHERENT
MU_GRID = np.linspace(0.0, 20.0, 81)


def test_coherent_vacuum():
    assert coherent_coefficients(0.0).tolist() == [1.0, 0.0, 0.0, 0.0]


def test_coherent_mu_one():
    c = coherent_coefficients(1.0)
    np.testing.assert_allclose(c, [0.608101, 0.303423, 0.075827, 0.012637], atol=1e-5)
    assert abs(c.sum() - 1.0) <= 1e-12


@pytest.mark.parametrize("mu", [1e-4, 1e-2, 0.3, 1.0, 1.99, 2.01, 7.5, 40.0])
def test_coherent_matches_high_precision(mu):
    expected = [float(v) for v in oracles.coherent_c_sq(mu)]
    np.testing.assert_allclose(coherent_coefficients(mu), expected, rtol=1e-11, atol=1e-300)


def test_coherent_large_mu_does_not_overflow():
    c = coherent_coefficients(2000.0)
    np.testing.assert_allclose(c, 0.25, atol=1e-12)


@pytest.mark.parametrize(
    "n, expected",
    [(1, [0.5, 0.5, 0.0, 0.0]), (3, [0.125, 0.375, 0.375, 0.125])],
)
def test_fock_conditional_examples(n, expected):
    np.testing.assert_allclose(fock_conditional_coefficients(n), expected, atol=1e-15)


def test_fock_vacuum_convention():
    assert fock_conditional_coefficients(0).tolist() == [1.0, 0.0, 0.0, 0.0]


def test_normalization_grid():
    for mu in MU_GRID:
        c = coherent_coefficients(mu)
        assert abs(c.sum() - 1.0) <= 1e-12
        assert np.all((c >= 0.0) & (c <= 1.0))
    for n in range(1, 61):
        c = fock_conditional_coefficients(n)
        assert abs(c.sum() - 1.0) <= 1e-12
        assert np.all(c >= 0.0)


@given(st.floats(min_value=0.0, max_value=500.0))
def test_coherent_quartet_is_a_distribution(mu):
    c = coherent_coefficients(mu)
    assert abs(c.sum() - 1.0) <= 1e-12
    assert np.all(c >= -1e-15) and np.all(c <= 1.0)


@pytest.mark.parametrize("n, expected", [(0, 0.0), (1, 0.0), (2, 0.0), (3, 0.5), (4, 0.5), (5, 0.75)])
def test_usd_probability_n_examples(n, expected):
    assert usd_probability_n(n) == pytest.approx(expected, abs=1e-15)


def test_subspace_probability_is_four_times_min_weight():
    for n in range(1, 61):
        assert usd_probability_n(n) == pytest.approx(4 * fock_conditional_coefficients(n).min(), abs=1e-14)


def test_subspace_probability_non_decreasing():
    values = [usd_probability_n(n) for n in range(80)]
    assert all(b >= a for a, b in zip(values, values[1:]))


@pytest.mark.parametrize("bad", [-1, 2.5, True])
def test_photon_number_domain(bad):
    with pytest.raises(DomainError):
        usd_probability_n(bad)


def test_usd_probability_examples():
    assert usd_probability(0.0, FOCK) == 0.0
    assert usd_probability(0.0, COHERENT) == 0.0
    assert usd_probability(1.0, FOCK) == pytest.approx(0.041076, abs=1e-5)
    assert usd_probability(1.0, COHERENT) == pytest.approx(0.050548, abs=1e-5)
    assert usd_probability(2.07, FOCK) == pytest.approx(0.18663, abs=1e-4)


@pytest.mark.parametrize("mu", [1e-3, 0.05, 0.7, 1.0, 1.5, 4.0, 12.0, 60.0])
def test_fock_probability_matches_high_precision(mu):
    expected = float(oracles.pd_fock_closed(mu))
    assert usd_probability(mu, FOCK) == pytest.approx(expected, rel=1e-9)


@pytest.mark.parametrize("mu", [1e-2, 0.5, 2.0, 3.3, 9.0])
def test_coherent_probability_matches_high_precision(mu):
    assert usd_probability(mu, COHERENT) == pytest.approx(float(oracles.pd_coherent(mu)), rel=1e-9)


@pytest.mark.parametrize("bad", [-0.1, math.nan, math.inf])
def test_mu_domain(bad):
    with pytest.raises(DomainError):
        usd_probability(bad)
    with pytest.raises(DomainError):
        coherent_coefficients(bad)


def test_model_accepts_string_names():
    assert usd_probability(1.0, "coherent") == usd_probability(1.0, COHERENT)


def test_series_examples():
    assert usd_probability_series(0.0, 1e-14) == 0.0
    assert usd_probability_series(1.0, 1e-14) == pytest.approx(0.041076, abs=1e-6)
    assert usd_probability_series(10.0, 1e-14) == pytest.approx(usd_probability(10.0, FOCK), abs=1e-10)


def test_series_tolerance_bounds_error():
    exact = usd_probability(3.0, FOCK)
    for tol in (1e-2, 1e-4, 1e-8):
        approx = usd_probability_series(3.0, tol)
        assert 0.0 <= exact - approx <= tol


@pytest.mark.parametrize("tol", [0.0, 1.0, -1e-3])
def test_series_tol_domain(tol):
    with pytest.raises(DomainError):
        usd_probability_series(1.0, tol)


def test_oracle_equivalence_grid():
    for mu in np.linspace(0.0, 10.0, 101):
        assert abs(usd_probability(mu, FOCK) - usd_probability_series(mu, 1e-14)) <= 1e-10


def test_coherent_dominates_fock():
    for mu in MU_GRID[1:]:
        assert usd_probability(mu, COHERENT) >= usd_probability(mu, FOCK)


@pytest.mark.parametrize("model", [FOCK, COHERENT])
def test_cubic_onset(model):
    mu = 1e-2
    assert usd_probability(mu, model) / mu**3 == pytest.approx(1 / 12, rel=0.02)


def test_fock_probability_monotone():
    values = [usd_probability(mu, FOCK) for mu in MU_GRID]
    assert all(b >= a for a, b in zip(values, values[1:]))


def test_fock_probability_large_mu():
    assert usd_probability(800.0, FOCK) == 1.0
    # log failure keeps the exponentially small remainder
    a = 1 / math.sqrt(2)
    expected = -700 * (1 - a) + math.log(1 + a)
    assert usd_failure_log(700.0, FOCK) == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("model", [FOCK, COHERENT])
@pytest.mark.parametrize("mu", [0.2, 1.0, 2.5, 5.0])
def test_failure_log_consistent(model, mu):
    assert math.exp(usd_failure_log(mu, model)) == pytest.approx(1 - usd_probability(mu, model), rel=1e-12)


def test_overlaps_orthogonal_states():
    assert symmetric_usd_from_overlaps(np.eye(4)) == pytest.approx(1.0, abs=1e-12)


def test_overlaps_identical_states():
    assert symmetric_usd_from_overlaps(np.ones((4, 4))) == pytest.approx(0.0, abs=1e-12)


def test_overlaps_reproduce_coherent_probability():
    g = coherent_overlap_matrix(1.0)
    assert symmetric_usd_from_overlaps(g) == pytest.approx(0.050548, abs=1e-5)
    for mu in (0.3, 2.0, 6.0):
        assert symmetric_usd_from_overlaps(coherent_overlap_matrix(mu)) == pytest.approx(
            usd_probability(mu, COHERENT), abs=1e-12
        )


def test_overlaps_two_state_set():
    # two states with overlap s: optimal USD succeeds with 1 - s
    s = 0.3
    assert symmetric_usd_from_overlaps([[1, s], [s, 1]]) == pytest.approx(1 - s, abs=1e-12)


@pytest.mark.parametrize(
    "matrix",
    [
        [[1, 0.2, 0.1, 0.2], [0.3, 1, 0.2, 0.1], [0.1, 0.2, 1, 0.2], [0.2, 0.1, 0.2, 1]],
        [[1, 0.2, 0.1, 0.2], [0.2, 1, 0.3, 0.1], [0.1, 0.3, 1, 0.2], [0.2, 0.1, 0.2, 1]],
        [[2, 0.2], [0.2, 2]],
        [[1, 0.5, 0.5]],
    ],
    ids=["non-hermitian", "non-circulant", "diagonal", "non-square"],
)
def test_overlaps_structure_errors(matrix):
    with pytest.raises(StructureError):
        symmetric_usd_from_overlaps(matrix)
