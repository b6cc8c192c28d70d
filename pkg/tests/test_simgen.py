import numpy as np
import pytest

from peer.linalg import InvalidInputError
from peer.simgen import (
    SimScenario,
    apply_missingness,
    gen_design,
    gen_response,
    gen_truth,
    implied_covariance,
    rng_for,
    simulate,
    singular_values,
    unif_intervals,
)


def test_singular_values_r3():
    np.testing.assert_array_equal(singular_values(3), [20.0, 15.0, 10.0])


def test_study1_truth_layout():
    truth = gen_truth(SimScenario(), rng_for(0, 0, "truth"))
    u2 = truth.U[:, 1]
    np.testing.assert_array_equal(np.flatnonzero(u2), [4, 5, 6, 7])
    np.testing.assert_allclose(np.abs(u2[4:8]), 0.5)
    assert np.abs(truth.V.T @ truth.V - np.eye(3)).max() < 1e-10
    np.testing.assert_allclose(np.linalg.norm(truth.U, axis=0), 1.0, atol=1e-12)
    np.testing.assert_array_equal(truth.U.T @ truth.U, np.eye(3))
    np.testing.assert_array_equal(truth.C, (truth.U * truth.d) @ truth.V.T)


def test_study1_right_factor_draws_in_range():
    rng = rng_for(3, 0, "truth")
    vals = unif_intervals(rng, ((-1.0, -0.3), (0.3, 1.0)), 5000)
    assert np.all((np.abs(vals) >= 0.3) & (np.abs(vals) <= 1.0))
    assert 0.4 < np.mean(vals > 0) < 0.6


def test_study2_truth_is_sparse_and_unnormalized():
    scn = SimScenario(study=2, n=200, p=200, q=100)
    truth = gen_truth(scn, rng_for(1, 0, "truth"))
    for k in range(3):
        np.testing.assert_array_equal(np.flatnonzero(truth.V[:, k]), np.arange(5 * k, 5 * k + 5))
        np.testing.assert_array_equal(np.flatnonzero(truth.U[:, k]), np.arange(4 * k, 4 * k + 4))
    assert not np.allclose(np.linalg.norm(truth.V, axis=0), 1.0)
    normed = gen_truth(SimScenario(study=2, normalize_v=True), rng_for(1, 0, "truth"))
    np.testing.assert_allclose(np.linalg.norm(normed.V, axis=0), 1.0)


def test_scenario_validation():
    with pytest.raises(InvalidInputError):
        SimScenario(p=10, s=4)
    with pytest.raises(InvalidInputError):
        SimScenario(study=2, q=10, s_v=5)
    with pytest.raises(InvalidInputError):
        SimScenario(missing_rate=1.0)
    with pytest.raises(InvalidInputError):
        SimScenario(snr=0)
    with pytest.raises(InvalidInputError):
        SimScenario(study=3)
    with pytest.raises(InvalidInputError):
        SimScenario.from_dict({"n": 10, "bogus": 1})


def test_scenario_dict_round_trip():
    scn = SimScenario(study=2, p=300, snr=1.0, seed=2**63)
    assert SimScenario.from_dict(scn.to_dict()) == scn


def test_population_covariance():
    scn = SimScenario(n=10, p=8, q=5, r_star=2, s=2)
    truth = gen_truth(scn, rng_for(0, 0, "truth"))
    X = gen_design(truth, 200_000, np.random.default_rng(0))
    S = np.cov(X, rowvar=False)
    assert np.abs(S - implied_covariance(truth)).max() < 0.02


def test_latent_block_is_standard_normal():
    scn = SimScenario(n=10, p=30, q=5)
    truth = gen_truth(scn, rng_for(0, 0, "truth"))
    X = gen_design(truth, 10_000, np.random.default_rng(1))
    assert np.abs(np.cov(X @ truth.U, rowvar=False) - np.eye(3)).max() < 0.05


def test_design_without_complement():
    scn = SimScenario(n=5, p=3, q=5, r_star=3, s=1)
    truth = gen_truth(scn, rng_for(0, 0, "truth"))
    X = gen_design(truth, 50, np.random.default_rng(2))
    assert X.shape == (50, 3)
    assert np.all(np.isfinite(X))


def test_snr_calibration():
    d = simulate(SimScenario(n=50, p=30, q=20, snr=0.7))
    t = d.truth
    signal = t.d[-1] * np.outer(d.X @ t.U[:, -1], t.V[:, -1])
    noise = d.Y_full - d.X @ t.C
    assert np.linalg.norm(signal) / np.linalg.norm(noise) == pytest.approx(0.7, rel=1e-12)


def test_doubling_snr_halves_sigma():
    scn = SimScenario(n=50, p=30, q=20)
    truth = gen_truth(scn, rng_for(0, 0, "truth"))
    X = gen_design(truth, 50, rng_for(0, 0, "design"))
    _, s1 = gen_response(X, truth, 0.5, rng_for(0, 0, "noise"))
    _, s2 = gen_response(X, truth, 1.0, rng_for(0, 0, "noise"))
    assert s2 == pytest.approx(s1 / 2, rel=1e-14)
    Y, s3 = gen_response(X, truth, 1e12, rng_for(0, 0, "noise"))
    assert s3 < 1e-10
    np.testing.assert_allclose(Y, X @ truth.C, atol=1e-8)


def test_zero_signal_rejected():
    scn = SimScenario(n=10, p=20, q=5)
    truth = gen_truth(scn, rng_for(0, 0, "truth"))
    with pytest.raises(InvalidInputError):
        gen_response(np.zeros((10, 20)), truth, 1.0, np.random.default_rng(0))


def test_missingness_counts():
    Y = np.zeros((100, 100))
    assert apply_missingness(Y, 0.0, np.random.default_rng(0)).fully_observed
    obs = apply_missingness(Y, 0.1, np.random.default_rng(0))
    assert obs.mask.size - obs.m == 1000
    again = apply_missingness(Y, 0.1, np.random.default_rng(0))
    np.testing.assert_array_equal(obs.mask, again.mask)
    with pytest.raises(InvalidInputError):
        apply_missingness(Y, 1.0, np.random.default_rng(0))


def test_replays_are_bit_identical():
    scn = SimScenario(n=40, p=30, q=20, seed=99, replicate_id=4)
    a, b = simulate(scn), simulate(scn)
    np.testing.assert_array_equal(a.X, b.X)
    np.testing.assert_array_equal(a.Y_full, b.Y_full)
    np.testing.assert_array_equal(a.obs.mask, b.obs.mask)
    np.testing.assert_array_equal(a.obs.values[a.obs.mask], a.Y_full[a.obs.mask])
    other = simulate(SimScenario(n=40, p=30, q=20, seed=99, replicate_id=5))
    assert not np.array_equal(a.X, other.X)


def test_default_scenario_matches_study1():
    scn = SimScenario()
    assert (scn.r_star, scn.s, scn.q, scn.n) == (3, 4, 100, 100)
    assert scn.Q_u == (1.0, -1.0)
    assert scn.Q_v == ((-1.0, -0.3), (0.3, 1.0))
