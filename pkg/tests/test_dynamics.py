import numpy as np
import pytest

from isingnet.dynamics import (DeviceParams, KuramotoParams, TemperatureSchedule, em_step, phases_from_spins,
                               quantize, quantize_phases)
from isingnet.errors import NumericalError, UsageError
from isingnet.rng import NoiseStream, initial_spins


def test_em_step_moments():
    rng = np.random.default_rng(0)
    n, dt, beta = 200_000, 1e-3, 4.0
    x = np.zeros(n)
    out = em_step(x, np.full(n, 0.5), beta, dt, rng.standard_normal(n), clamp=False)
    assert out.mean() == pytest.approx(0.5 * dt, abs=4 * np.sqrt(2 * dt / beta / n))
    assert out.var() == pytest.approx(2 * dt / beta, rel=0.02)


def test_em_step_clamps_and_rejects_nan():
    out = em_step(np.array([0.99, -0.99]), np.array([100.0, -100.0]), 10.0, 1e-3, np.zeros(2))
    assert list(out) == [1.0, -1.0]
    with pytest.raises(NumericalError):
        em_step(np.zeros(2), np.array([np.nan, 0.0]), 1.0, 1e-3, np.zeros(2))
    with pytest.raises(UsageError):
        em_step(np.zeros(2), np.zeros(2), 1.0, 0.0, np.zeros(2))


def test_schedules():
    s = TemperatureSchedule("geometric", 1.0, 100.0, 2.0)
    assert s.beta(0.0) == 1.0 and s.beta(1.0) == pytest.approx(10.0) and s.beta(5.0) == 100.0
    lin = TemperatureSchedule("linear", 1.0, 3.0, 1.0)
    assert lin.beta(0.5) == pytest.approx(2.0)
    t = np.array([0.0, 0.25, 3.0])
    assert np.allclose(s.beta_array(t), [s.beta(v) for v in t])
    assert np.allclose(s.noise_coefs(2, 3, 0.5), np.sqrt(2 * 0.5 / s.beta_array(np.array([1.0, 1.5, 2.0]))))
    with pytest.raises(UsageError):
        TemperatureSchedule("linear", 1.0)


def test_device_rc():
    assert DeviceParams().rc == pytest.approx(15.5e-9)
    with pytest.raises(UsageError):
        DeviceParams(r=-1)


def test_quantizers():
    assert list(quantize(np.array([-0.2, 0.0, 0.3]))) == [-1.0, 1.0, 1.0]
    th = phases_from_spins(np.array([1, -1]))
    assert np.allclose(np.cos(th), [1, -1])
    assert np.array_equal(quantize_phases(np.array([0.1, 3.0, -3.0])), [1.0, -1.0, -1.0])


def test_kuramoto_knots():
    kp = KuramotoParams(kj=[(0, 0.0), (1, 2.0)], ks=0.5)
    assert kp.k_j(0.5) == 1.0 and kp.k_s(7) == 0.5
    with pytest.raises(UsageError):
        KuramotoParams(kj=[(1, 0.0), (0, 1.0)])


def test_noise_stream_block_invariance():
    a = NoiseStream(5, [0, 3, 4], 7, block=3)
    b = NoiseStream(5, [3], 7, block=50)
    xa = np.stack([a.next()[1].copy() for _ in range(20)])
    xb = np.stack([b.next()[0].copy() for _ in range(20)])
    assert np.array_equal(xa, xb)


def test_noise_stream_take_counts():
    s = NoiseStream(0, [0], 2, block=4)
    counts = []
    while s.step < 10:
        _, off, cnt = s.take(3)
        counts.append((off, cnt))
    assert counts == [(0, 3), (3, 1), (0, 3), (3, 1), (0, 3)]


def test_initial_spins_per_trial():
    a = initial_spins(1, [0, 1, 2], 10)
    b = initial_spins(1, [2], 10)
    assert np.array_equal(a[2], b[0])
    assert set(np.unique(a)) <= {-1.0, 1.0}
