"""Estimator accounting identities and the analytic Gaussian oracle."""

import numpy as np
import pytest
from scipy import integrate, special

from threshdet import probability
from threshdet.noise import GAUSSIAN, SPHERE, NoiseModel
from threshdet.probability import (DetectionStats, DomainTooSmall, estimate,
                                   marcum_q1, no_detection_prob, q1_bounds,
                                   single_detection_probs)

SQRT2 = np.sqrt(2.0)


def _q1_quadrature(a, b):
    # Independent oracle: integrate the Rician density tail directly, using
    # the exponentially scaled Bessel function for stability.
    val, _ = integrate.quad(
        lambda x: x * np.exp(-0.5 * (x - a) ** 2) * special.i0e(a * x),
        b, np.inf, limit=200)
    return val


def test_marcum_against_quadrature_grid():
    for a in (0.1, 0.5, 1.0, 2.0, 4.0):
        for b in (0.2, 1.0, 2.5, 5.0):
            assert marcum_q1(a, b) == pytest.approx(_q1_quadrature(a, b),
                                                    abs=1e-10)


def test_marcum_limits():
    assert marcum_q1(3.0, 0.0) == 1.0
    assert marcum_q1(0.0, 2.0) == pytest.approx(np.exp(-2.0), abs=1e-15)
    with pytest.raises(ValueError):
        marcum_q1(-1.0, 1.0)


def test_stats_outcome_accounting():
    stats = DetectionStats(counts=[30, 20], no_detection=40,
                           multiple_detections=10, trials=100)
    assert stats.n_detected == 50
    assert stats.detection_fraction == 0.5
    assert stats.p_hat == pytest.approx([0.6, 0.4])
    assert stats.P_hat == pytest.approx([0.3, 0.2])
    assert stats.P0_hat == 0.4 and stats.Pinf_hat == 0.1
    with pytest.raises(ValueError):
        DetectionStats(counts=[1, 1], no_detection=0,
                       multiple_detections=0, trials=5)


def test_stats_mean_requires_eigenvalues():
    stats = DetectionStats(counts=[3, 1], no_detection=0,
                           multiple_detections=0, trials=4,
                           eigenvalues=[1.0, -1.0])
    assert stats.mean == pytest.approx(0.5)
    assert stats.mean_stderr == pytest.approx(0.5)
    bare = DetectionStats(counts=[1, 0], no_detection=0,
                          multiple_detections=0, trials=1)
    with pytest.raises(ValueError):
        bare.mean


def test_no_detections_yields_nan_frequencies():
    stats = DetectionStats(counts=[0, 0], no_detection=10,
                           multiple_detections=0, trials=10)
    assert np.all(np.isnan(stats.p_hat))
    assert stats.mean_stderr == np.inf


def test_estimate_counts_sum_to_trials():
    model = NoiseModel(GAUSSIAN, 1.0, 2)
    stats = estimate(np.array([0.6, 0.8]), 1.0, model, 3.0,
                     trials=200_000, seed=77)
    assert stats.counts.sum() + stats.no_detection \
        + stats.multiple_detections == 200_000


def test_estimate_worker_invariance():
    model = NoiseModel(SPHERE, 1.0, 2)
    kw = dict(gamma=1.0, trials=3 * (1 << 16) + 123, seed=5)
    alpha = np.array([1.0, 0.0])
    one = estimate(alpha, SQRT2 - 1.0, model, workers=1, **kw)
    four = estimate(alpha, SQRT2 - 1.0, model, workers=4, **kw)
    assert np.array_equal(one.counts, four.counts)
    assert one.no_detection == four.no_detection


def test_oracle_matches_monte_carlo():
    alpha = np.array([0.8, 0.6])
    model = NoiseModel(GAUSSIAN, 1.0, 2)
    trials = 2_000_000
    stats = estimate(alpha, 1.0, model, 3.0, trials=trials, seed=13)
    pred = single_detection_probs(alpha, 1.0, 1.0, 3.0)
    se = np.sqrt(pred * (1 - pred) / trials)
    assert np.all(np.abs(stats.P_hat - pred) < 5 * se)
    pred0 = no_detection_prob(alpha, 1.0, 1.0, 3.0)
    se0 = np.sqrt(pred0 * (1 - pred0) / trials)
    assert abs(stats.P0_hat - pred0) < 5 * se0


def test_oracle_zero_signal_closed_form():
    # At s = 0 every component is symmetric and
    # P_n = exp(-(gamma/sigma)^2) * (1 - exp(-(gamma/sigma)^2))^(N-1).
    sigma, gamma = 1.0, 1.5
    r = np.exp(-((gamma / sigma) ** 2))
    for dim in (2, 3, 4):
        alpha = np.zeros(dim)
        alpha[0] = 1.0
        probs = single_detection_probs(alpha, 0.0, sigma, gamma)
        expected = r * (1 - r) ** (dim - 1)
        assert probs == pytest.approx(np.full(dim, expected), rel=1e-12)
        assert no_detection_prob(alpha, 0.0, sigma, gamma) == \
            pytest.approx((1 - r) ** dim, rel=1e-12)


def test_oracle_born_asymptotic_regime():
    # Equal-magnitude states with Gaussian noise: the conditional share of
    # each nonzero component climbs monotonically toward 1/K as the
    # threshold grows, while the zero components die off.
    alpha = np.array([1.0, 1.0, 0.0, 0.0]) / SQRT2
    shares = []
    for g in (2.0, 3.0, 4.0):
        p = single_detection_probs(alpha, 1.0, 1.0, g)
        cond = p / p.sum()
        assert cond[0] == pytest.approx(cond[1], rel=1e-12)
        shares.append(cond[0])
    assert shares[0] < shares[1] < shares[2]
    assert shares[2] == pytest.approx(0.5, abs=0.02)


def test_oracle_ratio_decay_with_threshold():
    # Smaller-amplitude component loses ground monotonically as gamma grows
    # (ratio P_small / P_large strictly decreasing toward zero).
    alpha = np.array([0.6, 0.8])
    s, sigma = 1.0, 1.0
    ratios = []
    for g in (1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 5.0, 6.0):
        assert g > s * sigma
        p = single_detection_probs(alpha, s, sigma, g)
        ratios.append(p[0] / p[1])
    assert all(r2 < r1 for r1, r2 in zip(ratios, ratios[1:]))
    assert ratios[-1] < 0.15


def test_q1_bounds_bracket_true_value():
    for a, b in [(1.0, 6.0), (1.0, 10.0), (2.0, 7.0), (0.5, 4.0)]:
        lo, hi = q1_bounds(a, b)
        q = marcum_q1(a, b)
        assert lo < q < hi


def test_q1_bounds_domain():
    with pytest.raises(DomainTooSmall):
        q1_bounds(2.0, 1.0)
    with pytest.raises(ValueError):
        q1_bounds(0.0, 1.0)


def test_oracle_input_validation():
    with pytest.raises(ValueError):
        single_detection_probs(np.array([1.0, 0.0]), 1.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        single_detection_probs(np.array([1.0, 0.0]), 1.0, 1.0, -1.0)
    with pytest.raises(ValueError):
        estimate(np.array([1.0, 0.0]), 1.0, NoiseModel(GAUSSIAN, 1.0, 2),
                 1.0, trials=0, seed=0)
