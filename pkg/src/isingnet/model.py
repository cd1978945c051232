"""Ising problem instances: construction, parsing, energy/cut evaluation and
exact enumeration of small Gibbs distributions.

Energy convention used everywhere in the package::

    H(s) = -1/2 s^T J s - h^T s

Configurations are numbered so that bit ``i`` of the index is set iff
spin ``i`` is ``+1``.
"""

from __future__ import annotations

import hashlib
import io
import json
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np
import scipy.sparse as sp

from .errors import CapacityError, ParseError, UsageError

KINDS = ("gset", "sk", "lattice", "custom")
MAX_ENUMERATION_SPINS = 24


@dataclass(frozen=True)
class ProblemInstance:
    """Symmetric coupling matrix ``J`` (CSR, zero diagonal) plus field ``h``."""

    n: int
    couplings: sp.csr_matrix
    field: np.ndarray
    kind: str = "custom"
    name: str = ""
    seed: int | None = None
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.n < 1:
            raise UsageError(f"instance needs n >= 1, got {self.n}")
        if self.kind not in KINDS:
            raise UsageError(f"unknown instance kind {self.kind!r}")
        J = self.couplings
        if J.shape != (self.n, self.n):
            raise UsageError(f"coupling matrix shape {J.shape} does not match n={self.n}")
        if J.diagonal().any():
            raise UsageError("coupling matrix has nonzero diagonal entries")
        if abs(J - J.T).max() != 0:
            raise UsageError("coupling matrix is not symmetric")
        if self.field.shape != (self.n,):
            raise UsageError(f"field has shape {self.field.shape}, expected ({self.n},)")

    @classmethod
    def from_couplings(cls, J, h=None, **kwargs) -> "ProblemInstance":
        """Build from any dense/sparse matrix. Explicit zeros are dropped."""
        J = sp.csr_matrix(J, dtype=np.float64)
        J.eliminate_zeros()
        J.sort_indices()
        n = J.shape[0]
        h = np.zeros(n) if h is None else np.asarray(h, dtype=np.float64)
        return cls(n=n, couplings=J, field=h, **kwargs)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int, float]], **kwargs) -> "ProblemInstance":
        """Couplings from an undirected edge list ``(i, j, J_ij)``."""
        rows, cols, vals = [], [], []
        for i, j, w in edges:
            rows += [i, j]
            cols += [j, i]
            vals += [w, w]
        J = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
        return cls.from_couplings(J, **kwargs)

    @property
    def n_edges(self) -> int:
        return sp.triu(self.couplings, k=1).nnz

    @property
    def has_field(self) -> bool:
        return bool(np.any(self.field))

    def edges(self) -> list[tuple[int, int, float]]:
        """Upper-triangle edges ``(i, j, J_ij)`` with ``i < j``, sorted."""
        U = sp.triu(self.couplings, k=1).tocoo()
        order = np.lexsort((U.col, U.row))
        return [(int(U.row[k]), int(U.col[k]), float(U.data[k])) for k in order]

    def content_hash(self) -> str:
        """Stable digest of the numerical content (couplings and field)."""
        h = hashlib.sha256()
        h.update(str(self.n).encode())
        for i, j, w in self.edges():
            h.update(f"{i} {j} {w!r}\n".encode())
        h.update(np.ascontiguousarray(self.field, dtype="<f8").tobytes())
        return h.hexdigest()

    def metadata(self) -> dict:
        return {
            "name": self.name,
            "kind": self.kind,
            "n": self.n,
            "edges": self.n_edges,
            "seed": self.seed,
            "hash": self.content_hash(),
            **self.meta,
        }


def instance_metadata_json(inst: ProblemInstance) -> str:
    return json.dumps(inst.metadata(), indent=2, sort_keys=True)


# --- configuration encoding -------------------------------------------------

def spins_to_index(spins) -> np.ndarray | int:
    """Map +-1 configurations (last axis = spins) to integer indices."""
    s = np.asarray(spins)
    n = s.shape[-1]
    if n > 62:
        raise CapacityError(f"cannot index configurations of {n} spins")
    weights = np.left_shift(np.int64(1), np.arange(n, dtype=np.int64))
    idx = ((s > 0).astype(np.int64) * weights).sum(axis=-1)
    return int(idx) if np.ndim(idx) == 0 else idx


def index_to_spins(index, n: int) -> np.ndarray:
    """Inverse of :func:`spins_to_index`; returns int8 +-1 arrays."""
    k = np.asarray(index, dtype=np.int64)
    bits = (k[..., None] >> np.arange(n, dtype=np.int64)) & 1
    return (2 * bits - 1).astype(np.int8)


# --- energies ---------------------------------------------------------------

def _as_configs(inst: ProblemInstance, s) -> np.ndarray:
    s = np.asarray(s, dtype=np.float64)
    if s.shape[-1] != inst.n:
        raise UsageError(f"configuration length {s.shape[-1]} does not match n={inst.n}")
    return s


def energy(inst: ProblemInstance, s):
    """Ising energy ``-1/2 s^T J s - h^T s``.

    ``s`` may be a single configuration or a stack of them (rows); the
    return value is a float or an array accordingly. Continuous states
    are accepted as well.
    """
    x = _as_configs(inst, s)
    X = np.atleast_2d(x)
    Jx = (inst.couplings @ X.T).T
    e = -0.5 * np.einsum("ij,ij->i", X, Jx) - X @ inst.field
    return float(e[0]) if x.ndim == 1 else e


def total_weight(inst: ProblemInstance) -> float:
    """Sum of MaxCut edge weights, with ``W = -J``."""
    return -0.5 * float(inst.couplings.sum())


def cut_value(inst: ProblemInstance, s):
    """Weight of the cut induced by ``s`` for a MaxCut encoding ``J = -W``."""
    if inst.has_field:
        raise UsageError("cut value is undefined for instances with a nonzero field")
    return 0.5 * (total_weight(inst) - energy(inst, s))


# --- GSet I/O ---------------------------------------------------------------

def parse_gset(text, name: str = "") -> ProblemInstance:
    """Parse a GSet MaxCut file (1-based ``u v w`` lines after an ``n m`` header).

    The stored couplings are ``J = -W``.
    """
    if isinstance(text, (bytes, bytearray)):
        text = text.decode("ascii")
    lines = [(k + 1, ln.split()) for k, ln in enumerate(io.StringIO(text).read().splitlines())]
    lines = [(k, tok) for k, tok in lines if tok]
    if not lines:
        raise ParseError("empty GSet input", 1)
    lineno, head = lines[0]
    if len(head) != 2:
        raise ParseError("header must be 'n m'", lineno)
    try:
        n, m = int(head[0]), int(head[1])
    except ValueError:
        raise ParseError("header must contain two integers", lineno) from None
    if n < 1 or m < 0:
        raise ParseError("header counts out of range", lineno)
    body = lines[1:]
    if len(body) != m:
        last = body[-1][0] if body else lineno
        raise ParseError(f"header declares {m} edges, found {len(body)}", last)
    seen = set()
    edges = []
    for lineno, tok in body:
        if len(tok) != 3:
            raise ParseError("edge line must be 'u v w'", lineno)
        try:
            u, v, w = (int(t) for t in tok)
        except ValueError:
            raise ParseError("edge fields must be integers", lineno) from None
        if not (1 <= u <= n and 1 <= v <= n):
            raise ParseError(f"node index out of range [1, {n}]", lineno)
        if u == v:
            raise ParseError("self-loop", lineno)
        key = (min(u, v), max(u, v))
        if key in seen:
            raise ParseError(f"duplicate edge {key}", lineno)
        seen.add(key)
        edges.append((u - 1, v - 1, -float(w)))
    return ProblemInstance.from_edges(n, edges, kind="gset", name=name)


def load_gset(path) -> ProblemInstance:
    from pathlib import Path

    p = Path(path)
    return parse_gset(p.read_bytes(), name=p.stem)


def _fmt_weight(w: float) -> str:
    return str(int(w)) if float(w).is_integer() else repr(float(w))


def serialize_gset(inst: ProblemInstance) -> str:
    """GSet text for a MaxCut instance (weights ``W = -J``, 1-based)."""
    edges = inst.edges()
    out = [f"{inst.n} {len(edges)}"]
    out += [f"{i + 1} {j + 1} {_fmt_weight(-w)}" for i, j, w in edges]
    return "\n".join(out) + "\n"


# --- generators -------------------------------------------------------------

def gen_sk(n: int, seed: int) -> ProblemInstance:
    """Sherrington-Kirkpatrick couplings, ``J_ij ~ Normal(0, 1/n)`` for ``i < j``."""
    if n < 2:
        raise UsageError(f"SK instance needs n >= 2, got {n}")
    rng = np.random.default_rng(seed)
    iu, ju = np.triu_indices(n, k=1)
    w = rng.normal(0.0, 1.0 / np.sqrt(n), size=iu.size)
    J = sp.coo_matrix((np.r_[w, w], (np.r_[iu, ju], np.r_[ju, iu])), shape=(n, n))
    return ProblemInstance.from_couplings(J, kind="sk", name=f"sk{n}_s{seed}", seed=seed)


def lattice_edges(rows: int, cols: int, periodic: bool) -> list[tuple[int, int]]:
    """Nearest-neighbour pairs ``(i, j)``, ``i < j``, on a rows x cols grid.

    Node ``(r, c)`` has index ``r * cols + c``. Wrap edges that coincide
    with an existing edge are merged.
    """
    edges = set()
    for r in range(rows):
        for c in range(cols):
            a = r * cols + c
            for dr, dc in ((0, 1), (1, 0)):
                rr, cc = r + dr, c + dc
                if periodic:
                    rr, cc = rr % rows, cc % cols
                elif rr >= rows or cc >= cols:
                    continue
                b = rr * cols + cc
                if a != b:
                    edges.add((min(a, b), max(a, b)))
    return sorted(edges)


def gen_lattice(rows: int, cols: int, periodic: bool = True, coupling: float = 1.0) -> ProblemInstance:
    if rows < 2 or cols < 2:
        raise UsageError("lattice needs rows >= 2 and cols >= 2")
    edges = [(i, j, coupling) for i, j in lattice_edges(rows, cols, periodic)]
    tag = "torus" if periodic else "grid"
    return ProblemInstance.from_edges(
        rows * cols, edges, kind="lattice", name=f"{tag}{rows}x{cols}",
        meta={"rows": rows, "cols": cols, "periodic": periodic, "coupling": coupling},
    )


def _bimodal(rng: np.random.Generator, k: int) -> np.ndarray:
    return rng.choice(np.array([-1.0, 1.0]), size=k)


def gen_er_maxcut(n: int, n_edges: int, seed: int, bimodal: bool = True) -> ProblemInstance:
    """Erdos-Renyi G(n, m) MaxCut graph with +-1 (or unit) weights, ``J = -W``."""
    import networkx as nx

    g = nx.gnm_random_graph(n, n_edges, seed=seed)
    rng = np.random.default_rng(seed)
    pairs = sorted((min(u, v), max(u, v)) for u, v in g.edges())
    w = _bimodal(rng, len(pairs)) if bimodal else np.ones(len(pairs))
    edges = [(i, j, -wk) for (i, j), wk in zip(pairs, w)]
    return ProblemInstance.from_edges(n, edges, kind="custom", name=f"er{n}_s{seed}", seed=seed,
                                      meta={"graph": "er"})


def gen_ba_maxcut(n: int, attach: int, seed: int, bimodal: bool = True) -> ProblemInstance:
    """Barabasi-Albert MaxCut graph with +-1 (or unit) weights, ``J = -W``."""
    import networkx as nx

    g = nx.barabasi_albert_graph(n, attach, seed=seed)
    rng = np.random.default_rng(seed)
    pairs = sorted((min(u, v), max(u, v)) for u, v in g.edges())
    w = _bimodal(rng, len(pairs)) if bimodal else np.ones(len(pairs))
    edges = [(i, j, -wk) for (i, j), wk in zip(pairs, w)]
    return ProblemInstance.from_edges(n, edges, kind="custom", name=f"ba{n}_s{seed}", seed=seed,
                                      meta={"graph": "ba"})


# --- exact enumeration ------------------------------------------------------

@dataclass(frozen=True)
class GibbsTable:
    """Exact Gibbs distribution ``exp(-beta H) / Z`` over all ``2**n`` configurations."""

    n: int
    beta: float
    energies: np.ndarray
    probs: np.ndarray
    log_z: float

    def argmax_configs(self, rtol: float = 1e-9) -> np.ndarray:
        """Indices whose probability equals the maximum (up to ``rtol``)."""
        pmax = self.probs.max()
        return np.flatnonzero(self.probs >= pmax * (1 - rtol))


def all_energies(inst: ProblemInstance, chunk: int = 1 << 16) -> np.ndarray:
    """Energy of every configuration, indexed by :func:`spins_to_index`."""
    n = inst.n
    if n > MAX_ENUMERATION_SPINS:
        raise CapacityError(f"enumeration limited to n <= {MAX_ENUMERATION_SPINS}, got {n}")
    total = 1 << n
    out = np.empty(total)
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total), dtype=np.int64)
        out[start:start + idx.size] = energy(inst, index_to_spins(idx, n).astype(np.float64))
    return out


def enumerate_gibbs(inst: ProblemInstance, beta: float) -> GibbsTable:
    if beta < 0:
        raise UsageError(f"beta must be nonnegative, got {beta}")
    E = all_energies(inst)
    a = -beta * E
    amax = a.max()
    w = np.exp(a - amax)
    z = w.sum()
    return GibbsTable(n=inst.n, beta=float(beta), energies=E, probs=w / z,
                      log_z=float(amax + np.log(z)))


def brute_force_ground(inst: ProblemInstance) -> tuple[float, np.ndarray]:
    """Minimum energy and all minimizing configuration indices."""
    E = all_energies(inst)
    emin = E.min()
    return float(emin), np.flatnonzero(np.isclose(E, emin, rtol=0, atol=1e-9))
