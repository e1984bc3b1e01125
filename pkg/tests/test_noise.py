"""Noise family distributions, reproducibility, and realization replay."""

import numpy as np
import pytest
from scipy import integrate

from threshdet import linalg, noise
from threshdet.noise import (ANTICORRELATED_PHASE, BLOCH_UNIFORM, GAUSSIAN,
                             SINGLE_PHASE, SPHERE, InvalidModel, NoiseModel,
                             RngStream, UnnormalizedState, draw_noise,
                             draw_noise_block, inject, realize, realize_block)

SQRT2 = np.sqrt(2.0)


def test_invalid_kind_rejected():
    with pytest.raises(InvalidModel):
        NoiseModel("white", 1.0, 2)


def test_negative_sigma_rejected():
    with pytest.raises(InvalidModel):
        NoiseModel(GAUSSIAN, -0.5, 2)


def test_scripted_models_require_dim_two():
    for kind in (SINGLE_PHASE, ANTICORRELATED_PHASE, BLOCH_UNIFORM):
        with pytest.raises(InvalidModel):
            NoiseModel(kind, 1.0, 4)


def test_sphere_norm_is_sigma_exactly():
    model = NoiseModel(SPHERE, 0.7, 4)
    w = draw_noise_block(model, seed=1, start=0, count=500)
    assert np.allclose(np.linalg.norm(w, axis=1), 0.7, atol=1e-12)


def test_gaussian_component_moments():
    # E[|w_n|^2] = sigma^2 for every component.
    model = NoiseModel(GAUSSIAN, 1.3, 3)
    w = draw_noise_block(model, seed=2, start=0, count=10**6)
    second = (np.abs(w) ** 2).mean(axis=0)
    assert np.allclose(second, 1.3**2, rtol=0.01)
    assert np.abs(w.mean(axis=0)).max() < 0.01


def test_bloch_uniform_polar_moment():
    # quadrature oracle: integral of cos^2(t)*sin(2t) over [0, pi/2] = 1/2
    oracle, _ = integrate.quad(
        lambda t: np.cos(t) ** 2 * np.sin(2 * t), 0.0, np.pi / 2)
    model = NoiseModel(BLOCH_UNIFORM, 1.0, 2)
    w = draw_noise_block(model, seed=3, start=0, count=10**6)
    cos2 = np.abs(w[:, 0]) ** 2
    assert cos2.mean() == pytest.approx(oracle, abs=0.005)
    assert oracle == pytest.approx(0.5, abs=1e-12)


def test_single_phase_structure():
    model = NoiseModel(SINGLE_PHASE, 2.0, 2)
    w = draw_noise_block(model, seed=4, start=0, count=100)
    assert np.all(w[:, 0] == 0)
    assert np.allclose(np.abs(w[:, 1]), 2.0, atol=1e-12)


def test_anticorrelated_phase_structure():
    model = NoiseModel(ANTICORRELATED_PHASE, 1.0, 2)
    w = draw_noise_block(model, seed=5, start=0, count=100)
    assert np.allclose(w[:, 0], -w[:, 1], atol=1e-15)
    assert np.allclose(np.abs(w[:, 0]), 1.0 / SQRT2, atol=1e-12)


def test_per_trial_reproducibility_is_order_independent():
    model = NoiseModel(SPHERE, 1.0, 4)
    block = draw_noise_block(model, seed=11, start=0, count=200000)
    # Single-trial lookups and oddly-aligned blocks see identical values.
    for trial in (0, 1, 70000, 131071, 131072, 199999):
        single = draw_noise(model, RngStream(seed=11, trial=trial))
        assert np.array_equal(single, block[trial])
    shifted = draw_noise_block(model, seed=11, start=65530, count=12)
    assert np.array_equal(shifted, block[65530:65542])


def test_streams_are_independent():
    model = NoiseModel(GAUSSIAN, 1.0, 2)
    a = draw_noise_block(model, seed=11, start=0, count=10, stream=0)
    b = draw_noise_block(model, seed=11, start=0, count=10, stream=1)
    assert not np.allclose(a, b)


@pytest.mark.parametrize("kind,expected", [(GAUSSIAN, 1.0), (SPHERE, 0.5)])
def test_unitary_invariance_of_noise(kind, expected):
    # Uw has the same per-component second moments as w.
    model = NoiseModel(kind, 1.0, 2)
    n = 10**5
    w = draw_noise_block(model, seed=6, start=0, count=n)
    for u in (linalg.H, linalg.V, linalg.W_PLUS):
        uw = w @ u.T
        for vecs in (w, uw):
            m2 = np.abs(vecs) ** 2
            se = m2.std(axis=0) / np.sqrt(n)
            assert np.all(np.abs(m2.mean(axis=0) - expected) < 5 * se)


def test_realize_zero_noise():
    model = NoiseModel(GAUSSIAN, 0.0, 2)
    a = realize(np.array([1.0, 0.0]), 1.0, model, RngStream(seed=0))
    assert np.allclose(a, [1.0, 0.0], atol=1e-15)


def test_realize_rejects_unnormalized_state():
    model = NoiseModel(GAUSSIAN, 1.0, 2)
    with pytest.raises(UnnormalizedState):
        realize(np.array([1.0, 1.0]), 1.0, model, RngStream(seed=0))


def test_inject_reproduces_printed_magnitudes():
    w = np.array([0.2197 - 0.7169j, -0.5290 + 0.3974j])
    a = inject(np.array([1.0, 0.0]), SQRT2 - 1.0, w)
    assert np.abs(a[0]) == pytest.approx(0.9570, abs=5e-5)
    assert np.abs(a[1]) == pytest.approx(0.6616, abs=5e-5)


def test_inject_reproduces_bell_state_realization():
    w_plus_signal = np.array([-0.165 + 0.2046j, 0.8316 + 0.6696j,
                              0.5690 - 0.2230j, 0.2321 - 0.1111j])
    alpha = np.array([0, 1, 1, 0]) / SQRT2
    # The printed vector already includes the signal: subtracting it must
    # leave a noise vector on the sigma-sphere.
    w = w_plus_signal - (SQRT2 - 1.0) * alpha
    assert np.linalg.norm(w) == pytest.approx(1.0, abs=5e-4)
    assert np.allclose(inject(alpha, SQRT2 - 1.0, w), w_plus_signal)


def test_load_vector(tmp_path):
    path = tmp_path / "vec.txt"
    path.write_text("# comment\n0.5,-0.25\n1.0,0.0\n")
    v = noise.load_vector(path)
    assert np.array_equal(v, [0.5 - 0.25j, 1.0 + 0.0j])


def test_realize_block_matches_single_draws():
    model = NoiseModel(SPHERE, 1.0, 2)
    alpha = np.array([1.0, 0.0])
    block = realize_block(alpha, 0.5, model, seed=9, start=5, count=3)
    for k in range(3):
        single = realize(alpha, 0.5, model, RngStream(seed=9, trial=5 + k))
        assert np.array_equal(single, block[k])
