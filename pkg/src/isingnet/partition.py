"""Block partitions of an instance, the internal/external coupling split and
the spectral statistics behind the synchronization-period heuristic."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import UndefinedHeuristicError, UsageError
from .model import ProblemInstance

DENSE_EIG_LIMIT = 4096
EIG_RTOL = 1e-8


@dataclass(frozen=True)
class Partition:
    n: int
    blocks: tuple[np.ndarray, ...]
    block_of: np.ndarray

    def __post_init__(self):
        if len(self.blocks) < 1:
            raise UsageError("partition needs at least one block")
        if any(len(b) == 0 for b in self.blocks):
            raise UsageError("partition blocks must be nonempty")
        allidx = np.concatenate(self.blocks)
        if allidx.size != self.n or not np.array_equal(np.sort(allidx), np.arange(self.n)):
            raise UsageError("partition blocks must be disjoint and cover all spins")

    @classmethod
    def from_blocks(cls, n: int, blocks) -> "Partition":
        blocks = tuple(np.asarray(sorted(b), dtype=np.int64) for b in blocks)
        block_of = np.full(n, -1, dtype=np.int64)
        for k, b in enumerate(blocks):
            if b.size and (b.min() < 0 or b.max() >= n):
                raise UsageError("partition index out of range")
            block_of[b] = k
        return cls(n=n, blocks=blocks, block_of=block_of)

    @property
    def n_blocks(self) -> int:
        return len(self.blocks)

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(len(b) for b in self.blocks)


def make_contiguous_partition(n: int, b: int) -> Partition:
    """Contiguous index ranges; the first ``n % b`` blocks get one extra spin."""
    if not 1 <= b <= n:
        raise UsageError(f"need 1 <= b <= n, got b={b}, n={n}")
    return Partition.from_blocks(n, np.array_split(np.arange(n), b))


def make_random_partition(n: int, b: int, seed: int) -> Partition:
    """Near-equal blocks over a random permutation of the spins."""
    if not 1 <= b <= n:
        raise UsageError(f"need 1 <= b <= n, got b={b}, n={n}")
    perm = np.random.default_rng(seed).permutation(n)
    return Partition.from_blocks(n, np.array_split(perm, b))


def make_partition(n: int, b: int, scheme: str = "contiguous", seed: int = 0) -> Partition:
    if scheme == "contiguous":
        return make_contiguous_partition(n, b)
    if scheme == "random":
        return make_random_partition(n, b, seed)
    raise UsageError(f"unknown partition scheme {scheme!r}")


@dataclass(frozen=True)
class SplitCouplings:
    j_int: sp.csr_matrix
    j_ext: sp.csr_matrix
    partition: Partition


def _masked(J: sp.csr_matrix, keep: np.ndarray) -> sp.csr_matrix:
    C = J.tocoo()
    k = keep(C.row, C.col)
    M = sp.csr_matrix((C.data[k], (C.row[k], C.col[k])), shape=J.shape)
    M.sort_indices()
    return M


def split(inst: ProblemInstance, p: Partition) -> SplitCouplings:
    """Exact additive split ``J = J_int + J_ext`` along the partition.

    For a single block ``J_int`` is a copy of ``J`` with identical storage
    order, so products with it are bitwise equal to products with ``J``.
    """
    if p.n != inst.n:
        raise UsageError(f"partition covers {p.n} spins, instance has {inst.n}")
    J = inst.couplings
    if p.n_blocks == 1:
        return SplitCouplings(J.copy(), sp.csr_matrix(J.shape), p)
    b = p.block_of
    j_int = _masked(J, lambda r, c: b[r] == b[c])
    j_ext = _masked(J, lambda r, c: b[r] != b[c])
    return SplitCouplings(j_int, j_ext, p)


# --- spectra ----------------------------------------------------------------

@dataclass(frozen=True)
class SpectrumReport:
    rho_int: float
    rho_ext: float
    rho_full: float
    mean_abs_lambda: float
    dominant_sign: int
    method: str = "dense"

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)


def _check_symmetric(M: sp.spmatrix, what: str):
    if M.shape[0] != M.shape[1]:
        raise UsageError(f"{what} is not square")
    if M.nnz and abs(M - M.T).max() > 0:
        raise UsageError(f"{what} is not symmetric")


def _extremes(M: sp.csr_matrix) -> tuple[float, float]:
    """(most negative, most positive) eigenvalue."""
    n = M.shape[0]
    if M.nnz == 0:
        return 0.0, 0.0
    if n <= DENSE_EIG_LIMIT:
        w = np.linalg.eigvalsh(M.toarray())
        return float(w[0]), float(w[-1])
    v0 = np.ones(n) / np.sqrt(n)
    hi = spla.eigsh(M, k=1, which="LA", tol=EIG_RTOL, v0=v0, return_eigenvectors=False)[0]
    lo = spla.eigsh(M, k=1, which="SA", tol=EIG_RTOL, v0=v0, return_eigenvectors=False)[0]
    return float(lo), float(hi)


def spectral_radius(M) -> float:
    lo, hi = _extremes(sp.csr_matrix(M))
    return max(abs(lo), abs(hi))


def mean_abs_eigenvalue_slq(M: sp.csr_matrix, probes: int = 30, steps: int = 80, seed: int = 0) -> float:
    """Stochastic Lanczos quadrature estimate of ``tr|M| / n``.

    Used above the dense limit. Rademacher probes, full
    reorthogonalization; accuracy is a few percent for large sparse M.
    """
    n = M.shape[0]
    rng = np.random.default_rng(seed)
    steps = min(steps, n)
    acc = 0.0
    for _ in range(probes):
        v = rng.choice([-1.0, 1.0], size=n) / np.sqrt(n)
        Q = np.zeros((steps, n))
        alpha, beta = [], []
        q, q_prev, b_prev = v, np.zeros(n), 0.0
        for k in range(steps):
            Q[k] = q
            w = M @ q - b_prev * q_prev
            a = q @ w
            w -= a * q
            w -= Q[: k + 1].T @ (Q[: k + 1] @ w)
            alpha.append(a)
            b = np.linalg.norm(w)
            if b < 1e-12 or k == steps - 1:
                break
            beta.append(b)
            q_prev, q, b_prev = q, w / b, b
        T = np.diag(alpha) + np.diag(beta[: len(alpha) - 1], 1) + np.diag(beta[: len(alpha) - 1], -1)
        theta, U = np.linalg.eigh(T)
        acc += float((U[0] ** 2 * np.abs(theta)).sum())
    return acc / probes


def spectrum(inst: ProblemInstance, s: SplitCouplings) -> SpectrumReport:
    """Spectral radii of ``J``, ``J_int``, ``J_ext`` and mean ``|lambda(J)|``."""
    J = inst.couplings
    for M, what in ((J, "J"), (s.j_int, "J_int"), (s.j_ext, "J_ext")):
        _check_symmetric(M, what)
    if inst.n <= DENSE_EIG_LIMIT:
        w = np.linalg.eigvalsh(J.toarray())
        rho = float(np.abs(w).max()) if w.size else 0.0
        mean_abs = float(np.abs(w).mean())
        lo, hi = float(w[0]), float(w[-1])
        method = "dense"
    else:
        lo, hi = _extremes(J)
        rho = max(abs(lo), abs(hi))
        mean_abs = min(mean_abs_eigenvalue_slq(J), rho)
        method = "lanczos"
    sign = 0 if rho == 0 else (1 if hi >= abs(lo) else -1)
    return SpectrumReport(
        rho_int=spectral_radius(s.j_int),
        rho_ext=spectral_radius(s.j_ext),
        rho_full=rho,
        mean_abs_lambda=mean_abs,
        dominant_sign=sign,
        method=method,
    )


def tau_flip(spec: SpectrumReport, rc: float, mode: str = "radius") -> float:
    """Spin-flip time heuristic ``RC / stat(J)`` in seconds.

    ``mode="radius"`` uses the spectral radius (conservative),
    ``mode="mean_abs"`` the mean eigenvalue magnitude.
    """
    if rc <= 0:
        raise UsageError("rc must be positive")
    if mode == "radius":
        stat = spec.rho_full
    elif mode == "mean_abs":
        stat = spec.mean_abs_lambda
    else:
        raise UsageError(f"unknown tau_flip mode {mode!r}")
    if stat <= 0:
        raise UndefinedHeuristicError("spectral statistic is zero; no couplings to flip against")
    return rc / stat


def sync_frequency(spec: SpectrumReport, rc: float, mode: str = "radius") -> float:
    """Synchronization frequency ``1 / tau_flip`` in Hz."""
    return 1.0 / tau_flip(spec, rc, mode)
