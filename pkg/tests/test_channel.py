import math

import numpy as np
import pytest
from scipy import stats

from hnoma_sim import channel
from hnoma_sim.errors import ConfigurationError, InvariantError


def test_complex_normal_moments():
    rng = np.random.default_rng(0)
    z = channel.complex_normal(rng, 2.5, 200_000)
    assert np.mean(np.abs(z) ** 2) == pytest.approx(2.5, rel=0.01)
    assert np.var(z.real) == pytest.approx(1.25, rel=0.02)
    assert abs(np.mean(z.real * z.imag)) < 0.01
    assert isinstance(channel.complex_normal(rng, 1.0), complex)


def test_fading_is_rayleigh():
    rng = np.random.default_rng(1)
    h = channel.sample_fading(rng, 1.0, 100_000)
    assert np.mean(np.abs(h) ** 2) == pytest.approx(1.0, abs=0.01)
    assert stats.kstest(np.abs(h), stats.rayleigh(scale=math.sqrt(0.5)).cdf).pvalue > 0.01
    with pytest.raises(ConfigurationError):
        channel.sample_fading(rng, 0.0, 3)


def test_csi_error_variance_values():
    assert channel.csi_error_variance(1.0, 1.0, 9.0) == pytest.approx(0.1)
    assert channel.csi_error_variance(2.0, 0.5, 2.0) == pytest.approx(1.0)
    assert channel.csi_error_variance(1.0, math.inf, 10.0) == 0.0
    for bad in (0.0, -1.0, math.nan):
        with pytest.raises(ConfigurationError):
            channel.csi_error_variance(1.0, bad, 10.0)
    with pytest.raises(ConfigurationError):
        channel.csi_error_variance(1.0, 1.0, 0.0)


def test_apply_csi_error_statistics():
    rng = np.random.default_rng(2)
    h = channel.sample_fading(rng, 1.0, 200_000)
    he, v = channel.apply_csi_error(h, 1.0, 9.0, 1.0, rng)
    e = h - he
    assert v == pytest.approx(0.1)
    assert np.mean(np.abs(e) ** 2) == pytest.approx(0.1, rel=0.02)
    assert abs(np.mean(e * np.conj(h))) < 0.005  # independent of h


def test_apply_csi_error_perfect_is_copy():
    rng = np.random.default_rng(3)
    h = channel.sample_fading(rng, 1.0, 5)
    he, v = channel.apply_csi_error(h, math.inf, 10.0, 1.0, rng)
    assert v == 0.0 and np.array_equal(he, h) and he is not h


def test_awgn_variance_and_zero_noise():
    rng = np.random.default_rng(4)
    y = np.ones(100_000, complex)
    out = channel.add_awgn(y, 0.3, rng)
    assert np.mean(np.abs(out - y) ** 2) == pytest.approx(0.3, rel=0.02)
    assert np.array_equal(channel.add_awgn(y, 0.0, rng), y)
    with pytest.raises(ConfigurationError):
        channel.add_awgn(y, -1.0, rng)


def test_draw_realization_shapes_and_variances():
    rng = np.random.default_rng(5)
    ch = channel.draw_realization(rng, (6, 6), 1.0, (math.inf, 1.0), 9.0, batch=(50_000,))
    assert ch.h[0].shape == (50_000, 6)
    assert ch.sigma_e2 == (0.0, pytest.approx(0.1))
    assert np.array_equal(ch.h[0], ch.h_est[0])
    assert np.mean(np.abs(ch.error[1]) ** 2) == pytest.approx(0.1, rel=0.02)
    with pytest.raises(ConfigurationError):
        channel.draw_realization(rng, (6, 6), 1.0, (1.0,), 9.0)


def test_draw_realization_common_random_numbers():
    # only rho differs: the fading must be identical
    a = channel.draw_realization(np.random.default_rng(6), (6, 6), 1.0, math.inf, 10.0, (4,))
    b = channel.draw_realization(np.random.default_rng(6), (6, 6), 1.0, 1.0, 10.0, (4,))
    for k in range(2):
        assert np.array_equal(a.h[k], b.h[k])
        assert not np.array_equal(b.h[k], b.h_est[k])


def test_realization_shape_check():
    with pytest.raises(InvariantError):
        channel.ChannelRealization((np.ones(3),), (np.ones(4),), (0.0,))
    ch = channel.ChannelRealization.perfect((np.ones(3), np.ones(3)))
    assert ch.sigma_e2 == (0.0, 0.0)
