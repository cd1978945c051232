"""Monolithic, serial and concurrent execution of a partitioned Ising machine.

States of a batch are ``(trials, n)`` arrays. Per-trial results never
depend on how trials are grouped into batches or workers: the noise comes
from per-trial streams and the compiled kernels integrate each trial on its
own.
"""

from __future__ import annotations

import logging
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg  # noqa: F401

from . import kernels, rng
from .dynamics import (
    DEFAULT_DT,
    DeviceParams,
    KuramotoParams,
    TemperatureSchedule,
    phases_from_spins,
    quantize,
    quantize_phases,
)
from .errors import NumericalError, UsageError
from .model import ProblemInstance, total_weight
from .partition import Partition, SplitCouplings, make_contiguous_partition, spectral_radius, split

log = logging.getLogger(__name__)

MODES = ("monolithic", "serial", "concurrent")
STABILITY_LIMIT = 0.1
# Spin histories are kept only below this many stored entries (epochs * trials * n).
SPIN_HISTORY_BUDGET = 20_000_000


@dataclass(frozen=True)
class ExecMode:
    """Execution model and synchronization epoch ``tau`` (seconds)."""

    tag: str = "concurrent"
    tau: float | None = None
    quantize_sync: bool = True
    order: str = "fixed"

    def __post_init__(self):
        if self.tag not in MODES:
            raise UsageError(f"unknown execution mode {self.tag!r}")
        if self.tag != "monolithic" and (self.tau is None or self.tau <= 0):
            raise UsageError(f"{self.tag} mode needs tau > 0")
        if self.order not in ("fixed", "random"):
            raise UsageError(f"unknown serial order {self.order!r}")

    def epoch_steps(self, dt: float) -> int:
        return max(1, int(round(self.tau / dt)))


def epoch_plan(tau: float, t_total: float, dt: float) -> tuple[int, int, float]:
    """(steps per epoch, number of epochs, tau rounded to a multiple of dt)."""
    if dt <= 0:
        raise UsageError("dt must be positive")
    spe = max(1, int(round(tau / dt)))
    tau_eff = spe * dt
    n_epochs = int(math.floor(t_total / tau_eff * (1 + 1e-9)))
    if n_epochs < 1:
        raise UsageError(f"t_total={t_total:g} is shorter than one epoch tau={tau_eff:g}")
    return spe, n_epochs, tau_eff


# --- models -----------------------------------------------------------------

class _KuramotoModel:
    clamp = False

    def __init__(self, s: SplitCouplings, kp: KuramotoParams):
        self.j_int, self.j_ext = s.j_int, s.j_ext
        self.has_ext = s.j_ext.nnz > 0
        self.kp = kp

    def ext_terms(self, th):
        if not self.has_ext:
            return None
        return self.j_ext @ np.cos(th), self.j_ext @ np.sin(th)

    def _coupling(self, th, ext):
        c, s_ = np.cos(th), np.sin(th)
        out = s_ * (self.j_int @ c) - c * (self.j_int @ s_)
        if ext is not None:
            out = out + (s_ * ext[0] - c * ext[1])
        return out

    def drift(self, th, ext, t):
        return -self.kp.k_j(t) * self._coupling(th, ext) + self.kp.k_s(t) * np.sin(2.0 * th)

    def ext_grad(self, th, ext, t):
        return -self.kp.k_j(t) * (np.sin(th) * ext[0] - np.cos(th) * ext[1])

    def full_grad(self, th, live, t):
        return self.drift(th, live, t)

    def readout(self, th):
        return quantize_phases(th)

    def exchange(self, th, one_bit: bool):
        return phases_from_spins(quantize_phases(th)) if one_bit else th.copy()

    def init_state(self, spins):
        return phases_from_spins(spins)


def _colsum(a: np.ndarray) -> np.ndarray:
    # per-trial sums over a contiguous row so rounding does not depend on batch width
    return np.ascontiguousarray(a.T).sum(axis=1)


def _advance(x, d, dt, beta, noise, clamp, step, trials):
    if not np.isfinite(d.sum()):
        bad = np.flatnonzero(~np.isfinite(d).all(axis=0))
        raise NumericalError("non-finite drift", step=step, trial=int(trials[bad[0]]))
    out = x + d * dt + math.sqrt(2.0 * dt / beta) * noise
    if clamp:
        np.clip(out, -1.0, 1.0, out=out)
    return out


def _csr(M):
    return M.indptr, M.indices, M.data


def _rows_dot(M, x):
    return kernels.csr_rows_dot(*_csr(M), x)


def _energies(inst: ProblemInstance, q: np.ndarray) -> np.ndarray:
    """Energies of the ``(trials, n)`` configurations ``q``."""
    return kernels.quadratic_energy(*_csr(inst.couplings), inst.field, np.ascontiguousarray(q, dtype=np.float64))


def _l1(a: np.ndarray) -> np.ndarray:
    return np.abs(a).sum(axis=1)


def _raise_bad(status, step0, trials):
    j, k = status
    if j != kernels.OK:
        raise NumericalError("non-finite drift", step=int(step0 + k), trial=int(trials[j]))


def _fast_radius(J: sp.csr_matrix) -> float:
    if J.nnz == 0:
        return 0.0
    if J.shape[0] <= 64:
        return spectral_radius(J)
    v0 = np.ones(J.shape[0])
    w = sp.linalg.eigsh(J, k=1, which="LM", tol=1e-3, v0=v0, return_eigenvectors=False)
    return float(abs(w[0]))


def stability_ratio(inst: ProblemInstance, dev: DeviceParams, dt: float) -> float:
    return dt * _fast_radius(inst.couplings) / dev.rc


def check_stability(inst: ProblemInstance, dev: DeviceParams, dt: float):
    r = stability_ratio(inst, dev, dt)
    if r > STABILITY_LIMIT:
        warnings.warn(f"dt * rho(J) / RC = {r:.3g} exceeds {STABILITY_LIMIT}; integration may be inaccurate",
                      RuntimeWarning, stacklevel=3)


# --- results ----------------------------------------------------------------

@dataclass
class EpochLog:
    """Per-boundary records of a single trial."""

    trial: int
    t: np.ndarray
    epoch: np.ndarray
    energy: np.ndarray
    cut: np.ndarray
    grad_err_sq: np.ndarray
    ext_grad_l1: np.ndarray
    pair_grad_l1: np.ndarray
    spins: np.ndarray | None = None


@dataclass
class RunResult:
    """Boundary records of a whole run; arrays are ``(boundaries, trials)``."""

    mode: str
    tau: float | None
    dt: float
    n_blocks: int
    trials: np.ndarray
    t: np.ndarray
    epoch: np.ndarray
    energy: np.ndarray
    cut: np.ndarray
    grad_err_sq: np.ndarray
    ext_grad_l1: np.ndarray
    pair_grad_l1: np.ndarray
    best_spins: np.ndarray
    best_energy: np.ndarray
    best_t: np.ndarray
    final_spins: np.ndarray
    spins: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    @property
    def n_trials(self) -> int:
        return len(self.trials)

    def logs(self) -> list[EpochLog]:
        out = []
        for k, tr in enumerate(self.trials):
            out.append(EpochLog(
                trial=int(tr), t=self.t, epoch=self.epoch, energy=self.energy[:, k],
                cut=self.cut[:, k], grad_err_sq=self.grad_err_sq[:, k],
                ext_grad_l1=self.ext_grad_l1[:, k], pair_grad_l1=self.pair_grad_l1[:, k],
                spins=None if self.spins is None else self.spins[:, k, :],
            ))
        return out

    def final_energy(self) -> np.ndarray:
        return self.energy[-1]

    def final_cut(self) -> np.ndarray:
        return self.cut[-1]


_PER_TRIAL = ("energy", "cut", "grad_err_sq", "ext_grad_l1", "pair_grad_l1")


def _merge(parts: list[RunResult]) -> RunResult:
    if len(parts) == 1:
        return parts[0]
    first = parts[0]
    kw = {k: np.concatenate([getattr(p, k) for p in parts], axis=1) for k in _PER_TRIAL}
    order = np.argsort(np.concatenate([p.trials for p in parts]), kind="stable")
    kw = {k: v[:, order] for k, v in kw.items()}
    trials = np.concatenate([p.trials for p in parts])[order]
    spins = None
    if all(p.spins is not None for p in parts):
        spins = np.concatenate([p.spins for p in parts], axis=1)[:, order]
    return RunResult(
        mode=first.mode, tau=first.tau, dt=first.dt, n_blocks=first.n_blocks, trials=trials,
        t=first.t, epoch=first.epoch, spins=spins, meta=first.meta,
        best_spins=np.concatenate([p.best_spins for p in parts])[order],
        best_energy=np.concatenate([p.best_energy for p in parts])[order],
        best_t=np.concatenate([p.best_t for p in parts])[order],
        final_spins=np.concatenate([p.final_spins for p in parts])[order],
        **kw,
    )


class _Recorder:
    def __init__(self, inst, n_records, trials, keep_spins):
        T = len(trials)
        self.inst = inst
        self.maxcut = not inst.has_field
        self.wtot = total_weight(inst) if self.maxcut else float("nan")
        self.t = np.zeros(n_records)
        self.epoch = np.zeros(n_records, dtype=np.int64)
        self.cols = {k: np.full((n_records, T), np.nan) for k in _PER_TRIAL}
        self.spins = np.zeros((n_records, T, inst.n), dtype=np.int8) if keep_spins else None
        self.best_energy = np.full(T, np.inf)
        self.best_spins = np.zeros((T, inst.n), dtype=np.int8)
        self.best_t = np.zeros(T)
        self.final = np.zeros((T, inst.n), dtype=np.int8)
        self.k = 0

    def record(self, t, epoch, q, grad_err_sq, ext_l1, pair_l1=None):
        k = self.k
        e = _energies(self.inst, q)
        self.t[k] = t
        self.epoch[k] = epoch
        c = self.cols
        c["energy"][k] = e
        c["cut"][k] = 0.5 * (self.wtot - e) if self.maxcut else np.nan
        c["grad_err_sq"][k] = grad_err_sq
        c["ext_grad_l1"][k] = ext_l1
        if pair_l1 is not None:
            c["pair_grad_l1"][k] = pair_l1
        if self.spins is not None:
            self.spins[k] = q
        better = e < self.best_energy
        self.best_energy[better] = e[better]
        self.best_spins[better] = q[better]
        self.best_t[better] = t
        self.final = q.copy()
        self.k += 1

    def result(self, mode, tau, dt, n_blocks, trials, meta) -> RunResult:
        meta = {**meta, "wtot": self.wtot}
        return RunResult(
            mode=mode, tau=tau, dt=dt, n_blocks=n_blocks, trials=np.asarray(trials),
            t=self.t, epoch=self.epoch, spins=self.spins, best_spins=self.best_spins,
            best_energy=self.best_energy, best_t=self.best_t, final_spins=self.final,
            meta=meta, **self.cols,
        )


def _keep_spins(record_spins, n_records, n_trials, n) -> bool:
    if record_spins is None:
        return n_records * n_trials * n <= SPIN_HISTORY_BUDGET
    return bool(record_spins)


def _batches(n_trials: int, batch_size: int | None, workers: int = 1) -> list[np.ndarray]:
    trials = np.arange(n_trials)
    if not batch_size and workers > 1:
        batch_size = -(-n_trials // workers)
    if not batch_size or batch_size >= n_trials:
        return [trials]
    return [trials[i:i + batch_size] for i in range(0, n_trials, batch_size)]


def _dispatch(fn, args_list, workers: int):
    if workers and workers > 1 and len(args_list) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(fn, *zip(*args_list)))
    return [fn(*a) for a in args_list]


# --- concurrent / monolithic ------------------------------------------------

def _linear_concurrent(inst, s, spe, n_epochs, dev, schedule, dt, seed, trials, quantize_sync,
                       track, rec):
    rc = dev.rc
    T, n = len(trials), inst.n
    ip, ii, idat = _csr(s.j_int)
    ep_, ei, ed = _csr(s.j_ext)
    has_ext = s.j_ext.nnz > 0
    track = track and has_ext
    cols = np.arange(n)
    x = rng.initial_spins(seed, trials, n)
    noise = rng.NoiseStream(seed, trials, n)

    def latent(x):
        x0 = quantize(x).astype(np.float64) if quantize_sync else x.copy()
        return _rows_dot(s.j_ext, x0) if has_ext else np.zeros((T, n))

    f = latent(x)
    step = 0
    for ep in range(n_epochs):
        g2 = np.zeros(T)
        end = step + spe
        while step < end:
            buf, off, k = noise.take(end - step)
            coef = schedule.noise_coefs(step, k, dt)
            if track:
                st = kernels.advance_tracked(ip, ii, idat, ep_, ei, ed, x, f, buf, off, k, dt, coef, rc, g2)
            else:
                st = kernels.advance(ip, ii, idat, x, f, has_ext, buf, off, cols, k, dt, coef, rc)
            _raise_bad(st, step, trials)
            step += k
        ext_l1 = _l1(f - _rows_dot(s.j_ext, x)) / rc if has_ext else np.zeros(T)
        rec.record(step * dt, ep + 1, quantize(x), g2, ext_l1)
        f = latent(x)


def _kuramoto_concurrent(inst, s, spe, n_epochs, kp, schedule, dt, seed, trials, quantize_sync,
                         track, rec):
    # numpy path on (n, trials) phases
    m = _KuramotoModel(s, kp or KuramotoParams())
    T = len(trials)
    x = m.init_state(rng.initial_spins(seed, trials, inst.n).T)
    noise = rng.NoiseStream(seed, trials, inst.n)
    lat = m.ext_terms(m.exchange(x, quantize_sync))
    track = track and m.has_ext
    step = 0
    for ep in range(n_epochs):
        g2 = np.zeros(T)
        for _ in range(spe):
            t = step * dt
            if track:
                diff = m.ext_grad(x, m.ext_terms(x), t) - m.ext_grad(x, lat, t)
                g2 += _colsum(diff * diff) * dt
            d = m.drift(x, lat, t)
            x = _advance(x, d, dt, schedule.beta(t), noise.next().T, False, step, trials)
            step += 1
        t = step * dt
        if m.has_ext:
            ext_l1 = _colsum(np.abs(m.ext_grad(x, lat, t) - m.ext_grad(x, m.ext_terms(x), t)))
        else:
            ext_l1 = np.zeros(T)
        rec.record(t, ep + 1, m.readout(x).T, g2, ext_l1)
        lat = m.ext_terms(m.exchange(x, quantize_sync))


def _concurrent_batch(inst, s, mode, dev, schedule, dt, t_total, seed, trials, model, kp,
                      track_error, record_spins):
    tau = mode.tau if mode.tau is not None else t_total
    spe, n_epochs, tau_eff = epoch_plan(tau, t_total, dt)
    rec = _Recorder(inst, n_epochs, trials, _keep_spins(record_spins, n_epochs, len(trials), inst.n))
    if model == "linear":
        _linear_concurrent(inst, s, spe, n_epochs, dev, schedule, dt, seed, trials, mode.quantize_sync,
                           track_error, rec)
    elif model == "kuramoto":
        _kuramoto_concurrent(inst, s, spe, n_epochs, kp, schedule, dt, seed, trials, mode.quantize_sync,
                             track_error, rec)
    else:
        raise UsageError(f"unknown model {model!r}")
    meta = {"steps_per_epoch": spe, "epochs": n_epochs, "model": model}
    return rec.result(mode.tag, tau_eff if mode.tau is not None else None, dt, s.partition.n_blocks,
                      trials, meta)


def run_concurrent(inst: ProblemInstance, partition: Partition, mode: ExecMode, dev: DeviceParams,
                   schedule: TemperatureSchedule, t_total: float, seed: int, n_trials: int,
                   dt: float = DEFAULT_DT, model: str = "linear", kuramoto: KuramotoParams | None = None,
                   track_error: bool = True, record_spins: bool | None = None,
                   batch_size: int | None = None, workers: int = 1) -> RunResult:
    """All blocks advance together against latent copies refreshed every ``tau``.

    One record per synchronization boundary, ``floor(t_total / tau)`` in all.
    """
    if mode.tag not in ("concurrent", "monolithic"):
        raise UsageError("run_concurrent needs a concurrent (or monolithic) mode")
    if t_total <= 0 or n_trials < 1:
        raise UsageError("t_total and n_trials must be positive")
    if model == "linear":
        check_stability(inst, dev, dt)
    s = split(inst, partition)
    args = [(inst, s, mode, dev, schedule, dt, t_total, seed, b, model, kuramoto, track_error, record_spins)
            for b in _batches(n_trials, batch_size, workers)]
    return _merge(_dispatch(_concurrent_batch, args, workers))


def run_monolithic(inst: ProblemInstance, dev: DeviceParams, schedule: TemperatureSchedule,
                   t_total: float, seed: int, n_trials: int, dt: float = DEFAULT_DT,
                   log_interval: float | None = None, **kw) -> RunResult:
    """Single-chip machine with instantaneous interactions.

    Records every ``log_interval`` seconds, or once at ``t_total``.
    """
    mode = ExecMode("monolithic", tau=log_interval)
    p = make_contiguous_partition(inst.n, 1)
    return run_concurrent(inst, p, mode, dev, schedule, t_total, seed, n_trials, dt=dt, **kw)


# --- serial -----------------------------------------------------------------

def _serial_batch(inst, partition, mode, dev, schedule, dt, t_total, seed, trials, record_spins):
    spe, n_epochs, tau_eff = epoch_plan(mode.tau, t_total, dt)
    J = inst.couplings
    B = partition.n_blocks
    T = len(trials)
    rc = dev.rc
    if B == 1:
        subs = [(np.arange(inst.n), J, None, None)]
    else:
        subs = []
        for idx in partition.blocks:
            rest = np.setdiff1d(np.arange(inst.n), idx)
            Jr = J[idx]
            Jpp, Jpr = Jr[:, idx].tocsr(), Jr[:, rest].tocsr()
            Jpp.sort_indices()
            Jpr.sort_indices()
            subs.append((idx, Jpp, Jpr, rest))
    x = rng.initial_spins(seed, trials, inst.n)
    noise = rng.NoiseStream(seed, trials, inst.n)
    order_rng = np.random.default_rng([int(seed), 7919])
    rec = _Recorder(inst, n_epochs, trials, _keep_spins(record_spins, n_epochs, T, inst.n))
    sweep = list(range(B))
    step = 0
    for ep in range(n_epochs):
        if ep % B == 0 and mode.order == "random":
            sweep = list(order_rng.permutation(B))
        idx, Jpp, Jpr, rest = subs[sweep[ep % B]]
        xp = x if B == 1 else np.ascontiguousarray(x[:, idx])
        use_f = Jpr is not None and Jpr.nnz > 0
        f = _rows_dot(Jpr, np.ascontiguousarray(x[:, rest])) if use_f else np.zeros((T, len(idx)))
        end = step + spe
        while step < end:
            buf, off, k = noise.take(end - step)
            coef = schedule.noise_coefs(step, k, dt)
            st = kernels.advance(*_csr(Jpp), xp, f, use_f, buf, off, idx, k, dt, coef, rc)
            _raise_bad(st, step, trials)
            step += k
        if B > 1:
            x[:, idx] = quantize(xp) if mode.quantize_sync else xp
        rec.record(step * dt, ep + 1, quantize(x), np.zeros(T), np.zeros(T))
    meta = {"steps_per_epoch": spe, "epochs": n_epochs, "model": "linear"}
    return rec.result("serial", tau_eff, dt, B, trials, meta)


def run_serial(inst: ProblemInstance, partition: Partition, mode: ExecMode, dev: DeviceParams,
               schedule: TemperatureSchedule, t_total: float, seed: int, n_trials: int,
               dt: float = DEFAULT_DT, record_spins: bool | None = None,
               batch_size: int | None = None, workers: int = 1) -> RunResult:
    """Round-robin block updates; inactive blocks stay frozen without noise.

    ``t_total`` is the total annealing time, so each block is active for
    ``t_total / B``. With more than one block the active block is binarized
    at the end of its epoch when ``mode.quantize_sync`` is set.
    """
    if mode.tag != "serial":
        raise UsageError("run_serial needs a serial mode")
    if partition.n != inst.n:
        raise UsageError("partition does not match instance")
    check_stability(inst, dev, dt)
    args = [(inst, partition, mode, dev, schedule, dt, t_total, seed, b, record_spins)
            for b in _batches(n_trials, batch_size, workers)]
    return _merge(_dispatch(_serial_batch, args, workers))


def run(inst: ProblemInstance, partition: Partition, mode: ExecMode, dev: DeviceParams,
        schedule: TemperatureSchedule, t_total: float, seed: int, n_trials: int, **kw) -> RunResult:
    if mode.tag == "serial":
        kw = {k: v for k, v in kw.items() if k in ("dt", "record_spins", "batch_size", "workers")}
        return run_serial(inst, partition, mode, dev, schedule, t_total, seed, n_trials, **kw)
    return run_concurrent(inst, partition, mode, dev, schedule, t_total, seed, n_trials, **kw)


# --- synchronously coupled ideal / concurrent pair --------------------------

@dataclass
class CoupledLog:
    """Checkpoint records of ideal (``Y``) and concurrent (``X``) trajectories.

    Arrays are ``(checkpoints, trials)``; spin arrays add a trailing spin axis.
    The ``*_int_l1`` columns are l1 norms of time-integrated gradient
    differences over the current epoch; ``*_grad_l1`` are instantaneous.
    """

    times: np.ndarray
    trials: np.ndarray
    tau: float
    n_blocks: int
    ideal_spins: np.ndarray
    approx_spins: np.ndarray
    ideal_energy: np.ndarray
    approx_energy: np.ndarray
    pair_grad_l1: np.ndarray
    ext_grad_l1: np.ndarray
    grad_err_sq: np.ndarray
    pair_int_l1: np.ndarray
    ext_int_l1: np.ndarray
    state_l1: np.ndarray

    _COLS = ("ideal_energy", "approx_energy", "pair_grad_l1", "ext_grad_l1", "grad_err_sq",
             "pair_int_l1", "ext_int_l1", "state_l1", "ideal_spins", "approx_spins")


def _coupled_batch(inst, s, tau, dev, schedule, dt, steps, seed, trials, quantize_sync):
    rc = dev.rc
    spe = max(1, int(round(tau / dt)))
    T, n, C = len(trials), inst.n, len(steps)
    ic, ec = _csr(s.j_int), _csr(s.j_ext)
    y = rng.initial_spins(seed, trials, n)
    x = y.copy()
    noise = rng.NoiseStream(seed, trials, n)
    f = _rows_dot(s.j_ext, x)
    out = {k: np.zeros((C, T)) for k in CoupledLog._COLS[:8]}
    out["ideal_spins"] = np.zeros((C, T, n), dtype=np.int8)
    out["approx_spins"] = np.zeros((C, T, n), dtype=np.int8)
    pair_int = np.zeros((T, n))
    ext_int = np.zeros((T, n))
    g2 = np.zeros(T)

    def record(c):
        qx, qy = quantize(x), quantize(y)
        out["ideal_spins"][c] = qy
        out["approx_spins"][c] = qx
        out["ideal_energy"][c] = _energies(inst, qy)
        out["approx_energy"][c] = _energies(inst, qx)
        lx = _rows_dot(s.j_ext, x)
        full_y = _rows_dot(s.j_int, y) + _rows_dot(s.j_ext, y)
        full_x = _rows_dot(s.j_int, x) + lx
        out["pair_grad_l1"][c] = _l1(full_y - full_x) / rc
        out["ext_grad_l1"][c] = _l1(f - lx) / rc
        out["grad_err_sq"][c] = g2
        out["pair_int_l1"][c] = _l1(pair_int)
        out["ext_int_l1"][c] = _l1(ext_int)
        out["state_l1"][c] = _l1(x - y)

    total = int(steps[-1])
    c = 0
    step = 0
    while c < C and steps[c] == 0:
        record(c)
        c += 1
    while step < total:
        target = min(total, (step // spe + 1) * spe, int(steps[c]))
        buf, off, k = noise.take(target - step)
        coef = schedule.noise_coefs(step, k, dt)
        st = kernels.advance_coupled(*ic, *ec, x, y, f, buf, off, k, dt, coef, rc, g2, ext_int, pair_int)
        _raise_bad(st, step, trials)
        step += k
        while c < C and steps[c] == step:
            record(c)
            c += 1
        if step % spe == 0:
            x0 = quantize(x).astype(np.float64) if quantize_sync else x.copy()
            f = _rows_dot(s.j_ext, x0)
            pair_int[:] = 0.0
            ext_int[:] = 0.0
            g2[:] = 0.0
    return out


def run_coupled(inst: ProblemInstance, partition: Partition, tau: float, dev: DeviceParams,
                schedule: TemperatureSchedule, t_total: float, seed: int, n_trials: int,
                dt: float = DEFAULT_DT, checkpoints=None, n_checkpoints: int = 20,
                quantize_sync: bool = True, batch_size: int | None = None,
                workers: int = 1) -> CoupledLog:
    """Ideal and concurrent linear machines driven by the same Brownian path.

    Both start from the same random vertex. The ideal process uses live
    states for every coupling; the concurrent one sees external blocks
    through latent copies refreshed every ``tau``. Records are taken at
    ``checkpoints`` (seconds; default: log-spaced up to ``t_total``).
    """
    if checkpoints is None:
        checkpoints = log_checkpoints(dt, t_total, n_checkpoints)
    steps = np.unique(np.round(np.asarray(checkpoints, dtype=np.float64) / dt).astype(np.int64))
    if steps.size == 0 or steps[0] < 0:
        raise UsageError("checkpoints must be nonnegative")
    check_stability(inst, dev, dt)
    s = split(inst, partition)
    args = [(inst, s, tau, dev, schedule, dt, steps, seed, b, quantize_sync)
            for b in _batches(n_trials, batch_size, workers)]
    parts = _dispatch(_coupled_batch, args, workers)
    merged = {k: np.concatenate([p[k] for p in parts], axis=1) for k in CoupledLog._COLS}
    return CoupledLog(times=steps * dt, trials=np.arange(n_trials), tau=max(1, round(tau / dt)) * dt,
                      n_blocks=partition.n_blocks, **merged)


def log_checkpoints(t_min: float, t_max: float, n: int) -> np.ndarray:
    return np.geomspace(t_min, t_max, n)


# --- summaries --------------------------------------------------------------

def best_state(result: RunResult) -> tuple[np.ndarray, float, float]:
    """Lowest-energy quantized configuration over all boundaries and trials.

    Ties go to the earliest time, then the lowest trial index.
    """
    if result.n_trials == 0 or result.energy.size == 0:
        raise UsageError("no records to choose from")
    e = result.best_energy
    emin = e.min()
    cand = np.flatnonzero(e == emin)
    k = cand[np.argmin(result.best_t[cand])]
    spins = result.best_spins[k].copy()
    wtot = result.meta.get("wtot", float("nan"))
    return spins, float(emin), float(0.5 * (wtot - emin))
