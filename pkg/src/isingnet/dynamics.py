"""Overdamped Langevin models of analog Ising machines.

Two models are supported: the linear (capacitor voltage) machine, whose
state lives in ``[-1, 1]^n``, and Kuramoto oscillators with sub-harmonic
injection locking. Drifts are always the negative gradient of the model
Hamiltonian. Every function accepts a single state of shape ``(n,)`` or a
batch of shape ``(n, trials)`` (spins along axis 0).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import NumericalError, UsageError
from .partition import SplitCouplings

Drift = Callable[[np.ndarray, np.ndarray, float], np.ndarray]

DEFAULT_R = 310e3
DEFAULT_C = 50e-15
DEFAULT_DT = 1e-12


@dataclass(frozen=True)
class DeviceParams:
    r: float = DEFAULT_R
    c: float = DEFAULT_C

    def __post_init__(self):
        if self.r <= 0 or self.c <= 0:
            raise UsageError("device resistance and capacitance must be positive")

    @property
    def rc(self) -> float:
        return self.r * self.c


SCHEDULE_KINDS = ("constant", "linear", "geometric")


@dataclass(frozen=True)
class TemperatureSchedule:
    """Inverse temperature ``beta(t)``, clamped to the endpoints outside ``[0, duration]``."""

    kind: str = "constant"
    beta_start: float = 10.0
    beta_end: float | None = None
    duration: float = 1.0

    def __post_init__(self):
        if self.kind not in SCHEDULE_KINDS:
            raise UsageError(f"unknown schedule kind {self.kind!r}")
        if self.beta_start <= 0:
            raise UsageError("beta_start must be positive")
        if self.kind != "constant":
            if self.beta_end is None or self.beta_end <= 0:
                raise UsageError("beta_end must be positive for a non-constant schedule")
            if self.duration <= 0:
                raise UsageError("schedule duration must be positive")

    def beta(self, t: float) -> float:
        if self.kind == "constant":
            return self.beta_start
        u = min(max(t / self.duration, 0.0), 1.0)
        if self.kind == "linear":
            return self.beta_start + u * (self.beta_end - self.beta_start)
        return self.beta_start * (self.beta_end / self.beta_start) ** u

    def beta_array(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=np.float64)
        if self.kind == "constant":
            return np.full(t.shape, float(self.beta_start))
        u = np.clip(t / self.duration, 0.0, 1.0)
        if self.kind == "linear":
            return self.beta_start + u * (self.beta_end - self.beta_start)
        return self.beta_start * (self.beta_end / self.beta_start) ** u

    def noise_coefs(self, step0: int, k: int, dt: float) -> np.ndarray:
        """``sqrt(2 dt / beta(t))`` for steps ``step0 .. step0 + k - 1``."""
        return np.sqrt(2.0 * dt / self.beta_array((step0 + np.arange(k)) * dt))


def _knots(v) -> tuple[np.ndarray, np.ndarray]:
    if np.isscalar(v):
        return np.array([0.0]), np.array([float(v)])
    arr = np.asarray(v, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise UsageError("schedule knots must be (time, value) pairs")
    return arr[:, 0], arr[:, 1]


@dataclass(frozen=True)
class KuramotoParams:
    """Piecewise-linear coupling ``K_J(t)`` and SHIL ``K_S(t)`` schedules.

    Each is a scalar or a list of ``(time, value)`` knots.
    """

    kj: object = 1.0
    ks: object = 0.0
    _kj: tuple = field(init=False, repr=False, compare=False)
    _ks: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_kj", _knots(self.kj))
        object.__setattr__(self, "_ks", _knots(self.ks))
        for t, v in (self._kj, self._ks):
            if not np.all(np.isfinite(v)) or not np.all(np.diff(t) >= 0):
                raise UsageError("Kuramoto schedules must be finite with sorted knots")

    def k_j(self, t: float) -> float:
        return float(np.interp(t, *self._kj))

    def k_s(self, t: float) -> float:
        return float(np.interp(t, *self._ks))


def _check_dim(v: np.ndarray, n: int, what: str):
    if v.shape[0] != n:
        raise UsageError(f"{what} has {v.shape[0]} spins, couplings have {n}")


def linear_drift(s: SplitCouplings, dev: DeviceParams) -> Drift:
    """Drift ``(J_int x + J_ext x0) / RC`` of the partitioned linear machine."""
    rc = dev.rc
    n = s.j_int.shape[0]
    has_ext = s.j_ext.nnz > 0

    def drift(x, x0, t=0.0):
        x = np.asarray(x, dtype=np.float64)
        _check_dim(x, n, "state")
        d = s.j_int @ x
        if has_ext:
            x0 = np.asarray(x0, dtype=np.float64)
            _check_dim(x0, n, "latent state")
            d = d + s.j_ext @ x0
        return d / rc

    return drift


def linear_hamiltonian(J, dev: DeviceParams, v: np.ndarray) -> float:
    """``-(1/2RC) v^T J v`` for a single state."""
    v = np.asarray(v, dtype=np.float64)
    return float(-0.5 * v @ (J @ v) / dev.rc)


def _sin_coupling(J, th_i: np.ndarray, th_j: np.ndarray) -> np.ndarray:
    # sum_j J_ij sin(th_i - th_j) = sin(th_i) (J cos th_j) - cos(th_i) (J sin th_j)
    return np.sin(th_i) * (J @ np.cos(th_j)) - np.cos(th_i) * (J @ np.sin(th_j))


def kuramoto_drift(s: SplitCouplings, kp: KuramotoParams) -> Drift:
    """``-K_J sum_j J_ij sin(th_i - th_j) + K_S sin(2 th_i)``.

    Internal couplings see live phases, external couplings the latent ones.
    """
    n = s.j_int.shape[0]
    has_ext = s.j_ext.nnz > 0

    def drift(theta, theta0, t=0.0):
        th = np.asarray(theta, dtype=np.float64)
        _check_dim(th, n, "phase vector")
        c = _sin_coupling(s.j_int, th, th)
        if has_ext:
            th0 = np.asarray(theta0, dtype=np.float64)
            _check_dim(th0, n, "latent phase vector")
            c = c + (np.sin(th) * (s.j_ext @ np.cos(th0)) - np.cos(th) * (s.j_ext @ np.sin(th0)))
        return -kp.k_j(t) * c + kp.k_s(t) * np.sin(2.0 * th)

    return drift


def kuramoto_hamiltonian(J, kp: KuramotoParams, theta: np.ndarray, t: float = 0.0) -> float:
    """Potential whose negative gradient is the Kuramoto drift.

    ``-(K_J/2) sum_{i!=j} J_ij cos(th_i - th_j) + (K_S/2) sum_i cos(2 th_i)``
    """
    th = np.asarray(theta, dtype=np.float64)
    c, s_ = np.cos(th), np.sin(th)
    pair = c @ (J @ c) + s_ @ (J @ s_)
    return float(-0.5 * kp.k_j(t) * pair + 0.5 * kp.k_s(t) * np.cos(2.0 * th).sum())


def em_step(x, drift, beta: float, dt: float, noise, clamp: bool = True, step: int | None = None):
    """One Euler-Maruyama step ``x + drift dt + sqrt(2 dt / beta) noise``.

    Linear-model states are projected back onto ``[-1, 1]`` when ``clamp``.
    """
    if dt <= 0:
        raise UsageError("dt must be positive")
    drift = np.asarray(drift, dtype=np.float64)
    noise = np.asarray(noise, dtype=np.float64)
    if not (np.all(np.isfinite(drift)) and np.all(np.isfinite(noise))):
        raise NumericalError("non-finite drift or noise", step=step)
    out = x + drift * dt + np.sqrt(2.0 * dt / beta) * noise
    if clamp:
        np.clip(out, -1.0, 1.0, out=out)
    return out


def quantize(x) -> np.ndarray:
    """Nearest hypercube vertex; exact zeros map to +1."""
    return np.where(np.asarray(x) >= 0, 1, -1).astype(np.int8)


def quantize_phases(theta) -> np.ndarray:
    """Spin readout ``sign(cos theta)`` with ties to +1."""
    return quantize(np.cos(np.asarray(theta)))


def phases_from_spins(s) -> np.ndarray:
    """Phase 0 for +1 and pi for -1."""
    return np.where(np.asarray(s) > 0, 0.0, np.pi)


def wrap_phases(theta) -> np.ndarray:
    return (np.asarray(theta) + np.pi) % (2 * np.pi) - np.pi
