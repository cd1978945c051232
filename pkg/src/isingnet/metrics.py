"""Distribution distances, bound functionals and optimization metrics."""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, UsageError
from .model import GibbsTable, spins_to_index

# POT probes every installed array backend on import; only numpy is needed.
for _b in ("PYTORCH", "TENSORFLOW", "JAX", "CUPY"):
    os.environ.setdefault(f"POT_BACKEND_DISABLE_{_b}", "1")
import ot  # noqa: E402

MAX_SUPPORT = 1 << 16
MASS_TOL = 1e-12
EMD_MAX_ITER = 10_000_000


@dataclass(frozen=True)
class Marker:
    """Non-numeric metric outcome (unreachable target, invalid bound, ...)."""

    reason: str

    def __str__(self) -> str:
        return self.reason


UNREACHABLE = Marker("unreachable")
INVALID_TL = Marker("invalid: tL >= 1")


def is_marker(v) -> bool:
    return isinstance(v, Marker)


# --- empirical distributions -------------------------------------------------

@dataclass(frozen=True)
class EmpiricalDistribution:
    """Sparse law over configuration indices (bit i set means spin i = +1)."""

    n_spins: int
    index: np.ndarray
    mass: np.ndarray
    sample_count: int = 0

    def __post_init__(self):
        idx = np.asarray(self.index, dtype=np.int64)
        m = np.asarray(self.mass, dtype=np.float64)
        if idx.shape != m.shape or idx.ndim != 1:
            raise UsageError("index and mass must be matching 1-d arrays")
        if np.any(m <= 0):
            raise UsageError("masses must be positive")
        if abs(m.sum() - 1.0) > MASS_TOL * max(1, m.size):
            raise UsageError(f"masses sum to {m.sum()!r}, not 1")
        if idx.size and (idx.min() < 0 or idx.max() >= (1 << self.n_spins)):
            raise UsageError("configuration index out of range")
        if np.unique(idx).size != idx.size:
            raise UsageError("duplicate configuration indices")
        order = np.argsort(idx)
        object.__setattr__(self, "index", idx[order])
        object.__setattr__(self, "mass", m[order])

    @classmethod
    def from_indices(cls, n_spins: int, idx) -> "EmpiricalDistribution":
        idx = np.asarray(idx, dtype=np.int64)
        if idx.size == 0:
            raise UsageError("no samples")
        u, c = np.unique(idx, return_counts=True)
        return cls(n_spins, u, c / idx.size, int(idx.size))

    @classmethod
    def from_spins(cls, spins) -> "EmpiricalDistribution":
        """From a ``(samples, n)`` array of +-1 spins."""
        s = np.atleast_2d(np.asarray(spins))
        return cls.from_indices(s.shape[1], spins_to_index(s))

    @classmethod
    def from_dense(cls, probs, n_spins: int | None = None, tail: float = 0.0) -> "EmpiricalDistribution":
        """From a length-``2^n`` probability vector.

        ``tail`` drops the lightest states whose total mass is at most
        ``tail`` and renormalizes; the W1 change is at most ``n * tail``.
        """
        p = np.asarray(probs, dtype=np.float64)
        n = n_spins if n_spins is not None else int(round(math.log2(p.size)))
        if p.size != 1 << n:
            raise UsageError("dense distribution length must be 2^n")
        keep = p > 0
        if tail > 0:
            order = np.argsort(p, kind="stable")
            dropped = np.cumsum(p[order]) <= tail
            keep[order[dropped]] = False
        idx = np.flatnonzero(keep)
        m = p[idx]
        return cls(n, idx, m / m.sum())

    @classmethod
    def from_gibbs(cls, g: GibbsTable, tail: float = 0.0) -> "EmpiricalDistribution":
        return cls.from_dense(g.probs, g.n, tail)

    @property
    def support_size(self) -> int:
        return int(self.index.size)

    def dense(self) -> np.ndarray:
        out = np.zeros(1 << self.n_spins)
        out[self.index] = self.mass
        return out


def _as_dist(d, n_spins=None) -> EmpiricalDistribution:
    if isinstance(d, EmpiricalDistribution):
        return d
    if isinstance(d, GibbsTable):
        return EmpiricalDistribution.from_gibbs(d)
    return EmpiricalDistribution.from_dense(d, n_spins)


def kl_divergence(mu: EmpiricalDistribution, nu) -> float:
    """``sum mu log(mu / nu)``; ``inf`` when ``mu`` is not absolutely continuous."""
    nu = _as_dist(nu, mu.n_spins)
    if nu.n_spins != mu.n_spins:
        raise UsageError(f"dimension mismatch: {mu.n_spins} vs {nu.n_spins} spins")
    pos = np.searchsorted(nu.index, mu.index)
    pos_c = np.minimum(pos, max(nu.index.size - 1, 0))
    found = (pos < nu.index.size) & (nu.index[pos_c] == mu.index)
    if not found.all():
        return math.inf
    q = nu.mass[pos_c]
    return float(max(0.0, np.sum(mu.mass * np.log(mu.mass / q))))


def hamming_matrix(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pairwise Hamming distances between configuration indices."""
    x = np.bitwise_xor(np.asarray(a, dtype=np.uint64)[:, None], np.asarray(b, dtype=np.uint64)[None, :])
    return np.bitwise_count(x).astype(np.float64)


def w1_hamming(mu: EmpiricalDistribution, nu: EmpiricalDistribution, max_support: int = MAX_SUPPORT) -> float:
    """Exact 1-Wasserstein distance under the Hamming metric (network simplex)."""
    mu, nu = _as_dist(mu), _as_dist(nu, mu.n_spins if isinstance(mu, EmpiricalDistribution) else None)
    if mu.n_spins != nu.n_spins:
        raise UsageError(f"dimension mismatch: {mu.n_spins} vs {nu.n_spins} spins")
    combined = np.union1d(mu.index, nu.index).size
    if combined > max_support:
        raise CapacityError(f"combined support {combined} exceeds {max_support} states")
    if mu.support_size == 1 and nu.support_size == 1:
        return float(hamming_matrix(mu.index, nu.index)[0, 0])
    M = hamming_matrix(mu.index, nu.index)
    a = mu.mass / mu.mass.sum()
    b = nu.mass / nu.mass.sum()
    val, log = ot.emd2(a, b, M, numItermax=EMD_MAX_ITER, log=True)
    if log.get("result_code", 1) != 1:
        raise CapacityError(f"transport solver did not converge: {log.get('warning')}")
    return float(val)


@dataclass(frozen=True)
class BootstrapStat:
    value: float
    mean: float
    lo: float
    hi: float
    se: float


def _boot(stat, n: int, n_boot: int, seed: int, value: float) -> BootstrapStat:
    rng = np.random.default_rng(seed)
    vals = np.array([stat(rng.integers(0, n, size=n)) for _ in range(n_boot)])
    lo, hi = np.percentile(vals, [2.5, 97.5])
    return BootstrapStat(value, float(vals.mean()), float(lo), float(hi), float(vals.std(ddof=1)))


def bootstrap_w1_target(spins, target: EmpiricalDistribution, n_boot: int = 200, seed: int = 0) -> BootstrapStat:
    """W1 between the samples' empirical law and a fixed target, resampling trials."""
    idx = spins_to_index(np.asarray(spins))
    n = target.n_spins
    value = w1_hamming(EmpiricalDistribution.from_indices(n, idx), target)
    return _boot(lambda r: w1_hamming(EmpiricalDistribution.from_indices(n, idx[r]), target),
                 idx.size, n_boot, seed, value)


def bootstrap_w1_paired(spins_a, spins_b, n_boot: int = 200, seed: int = 0) -> BootstrapStat:
    """W1 between two paired sample sets, resampling trial pairs jointly."""
    ia = spins_to_index(np.asarray(spins_a))
    ib = spins_to_index(np.asarray(spins_b))
    n = np.asarray(spins_a).shape[1]
    value = w1_hamming(EmpiricalDistribution.from_indices(n, ia), EmpiricalDistribution.from_indices(n, ib))
    return _boot(lambda r: w1_hamming(EmpiricalDistribution.from_indices(n, ia[r]),
                                      EmpiricalDistribution.from_indices(n, ib[r])),
                 ia.size, n_boot, seed, value)


# --- bound functionals -------------------------------------------------------

@dataclass(frozen=True)
class BoundInputs:
    """Expectations collected at one coupled-run checkpoint.

    The l1 terms are in the units of the transport distance being bounded.
    """

    t: float
    lipschitz_l: float | None = None
    mean_pair_grad_l1: float | None = None
    mean_ext_grad_l1: float | None = None
    mean_grad_err_sq_integral: float = 0.0
    contraction_c: float | None = None
    w1_start: float | None = None

    def __post_init__(self):
        for name in ("mean_pair_grad_l1", "mean_ext_grad_l1", "mean_grad_err_sq_integral"):
            v = getattr(self, name)
            if v is not None and not v >= 0:
                raise UsageError(f"{name} must be nonnegative")
        if self.t < 0:
            raise UsageError("t must be nonnegative")


def kl_lower_bound(inp: BoundInputs, beta: float) -> float:
    """``(beta / 4) E int |grad U_ext(x0) - grad U_ext(x_t)|^2 dt``."""
    if beta <= 0:
        raise UsageError("beta must be positive")
    return beta / 4.0 * inp.mean_grad_err_sq_integral


def tv_bound(inp: BoundInputs, beta: float) -> float:
    """Pinsker bound ``sqrt(KL / 2)`` on total variation."""
    return math.sqrt(kl_lower_bound(inp, beta) / 2.0)


def bound_one(inp: BoundInputs) -> float:
    if inp.mean_pair_grad_l1 is None or inp.mean_ext_grad_l1 is None:
        raise UsageError("bound one needs both pair and external gradient terms")
    return inp.mean_pair_grad_l1 + inp.mean_ext_grad_l1


def bound_two(inp: BoundInputs):
    """External term over ``1 - tL``, or ``INVALID_TL`` when ``tL >= 1``."""
    if inp.mean_ext_grad_l1 is None or inp.lipschitz_l is None:
        raise UsageError("bound two needs the external term and a Lipschitz constant")
    tl = inp.t * inp.lipschitz_l
    if tl >= 1:
        return INVALID_TL
    return inp.mean_ext_grad_l1 / (1.0 - tl)


def linear_lipschitz(rho: float, rc: float) -> float:
    """Smoothness constant ``rho(J) / RC`` of the linear drift."""
    return rho / rc


GUARANTEED, NOT_GUARANTEED, INCONCLUSIVE = "guaranteed", "not_guaranteed", "inconclusive"


def contraction_check(bound_value, inp: BoundInputs) -> str:
    """Whether ``bound / (1 - C) < W1(start, pi)`` certifies contraction."""
    c, w0 = inp.contraction_c, inp.w1_start
    if is_marker(bound_value) or c is None or w0 is None or not 0 < c < 1:
        return INCONCLUSIVE
    return GUARANTEED if bound_value / (1.0 - c) < w0 else NOT_GUARANTEED


def estimate_contraction(w1_t: float, w1_0: float) -> float:
    """``W1(nu_t, pi) / W1(nu_0, pi)`` from the ideal process; may fall outside (0, 1)."""
    if w1_0 <= 0:
        return math.nan
    return w1_t / w1_0


# --- optimization metrics ----------------------------------------------------

@dataclass(frozen=True)
class PerformanceRecord:
    trials: int
    success_count: int
    mean_metric: float
    target_ratio: float = 0.98
    bks: float | None = None

    def __post_init__(self):
        if self.trials <= 0:
            raise UsageError("trials must be positive")
        if not 0 <= self.success_count <= self.trials:
            raise UsageError("success_count must lie in [0, trials]")
        if not 0 < self.target_ratio <= 1:
            raise UsageError("target_ratio must lie in (0, 1]")

    @property
    def p_success(self) -> float:
        return self.success_count / self.trials


def attempts_99(p: float) -> float:
    """Attempts needed for 99% success probability, at least one."""
    if p <= 0:
        return math.inf
    if p >= 1:
        return 1.0
    return max(1.0, math.log(0.01) / math.log1p(-p))


def mtt(rec: PerformanceRecord):
    """Metric-to-target; ``UNREACHABLE`` when no trial succeeded."""
    p = rec.p_success
    if p == 0:
        return UNREACHABLE
    return rec.mean_metric * attempts_99(p)


def n_syncs(t_anneal: float, tau: float) -> int:
    if t_anneal <= 0 or tau <= 0:
        raise UsageError("t_anneal and tau must be positive")
    return int(math.floor(t_anneal / tau * (1 + 1e-12)))


def sync_energy(n: int, e_bit: float, t_anneal: float, tau: float) -> float:
    """Communication energy of one anneal: ``n`` bits per synchronization."""
    if n <= 0 or e_bit <= 0:
        raise UsageError("n and e_bit must be positive")
    return (n * n_syncs(t_anneal, tau)) * e_bit


def cut_error(cut: float, bks: float) -> float:
    if bks <= 0:
        raise UsageError("bks must be positive")
    return 1.0 - cut / bks


def performance_record(cuts, bks: float, metric: float, target_ratio: float = 0.98) -> PerformanceRecord:
    """Successes are trials whose best cut reaches ``target_ratio * bks``."""
    cuts = np.asarray(cuts, dtype=np.float64)
    ok = int(np.sum(cuts >= target_ratio * bks - 1e-9))
    return PerformanceRecord(int(cuts.size), ok, float(metric), target_ratio, bks)
