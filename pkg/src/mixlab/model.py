"""Ferromagnetic Ising model representation and single-configuration primitives.

A model is a weighted graph with nonnegative couplings plus an optional
external field. Spin configurations are dense length-n numpy vectors with
entries exactly +1 or -1 (dtype int8), ordered coordinatewise: sigma <= tau
iff sigma(v) <= tau(v) for every v.

Configuration <-> integer index convention used everywhere in this package:
bit b of the index is 1 iff spins[b] == +1, vertices in input order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

__all__ = [
    "IsingModel",
    "all_minus",
    "all_plus",
    "config_leq",
    "heat_bath_probability",
    "index_of_spins",
    "local_field",
    "log_unnormalized_weight",
    "spins_from_index",
    "sum_of_spins",
    "unnormalized_weight",
    "validate_spins",
]


@dataclass(frozen=True)
class IsingModel:
    """Vertex count, edge list (u, v, J_uv) with J_uv >= 0, external field.

    Immutable after construction; the adjacency is precomputed in CSR form
    (``adj_indptr``, ``adj_indices``, ``adj_weights``) for fast local-field
    sums. All arrays are marked read-only.
    """

    n: int
    edges: tuple[tuple[int, int, float], ...]
    field: np.ndarray = None  # type: ignore[assignment]
    adj_indptr: np.ndarray = dc_field(init=False, repr=False, compare=False, default=None)
    adj_indices: np.ndarray = dc_field(init=False, repr=False, compare=False, default=None)
    adj_weights: np.ndarray = dc_field(init=False, repr=False, compare=False, default=None)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"need at least one vertex, got n={self.n}")
        norm_edges = []
        seen = set()
        for u, v, j in self.edges:
            u, v, j = int(u), int(v), float(j)
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ValueError(f"edge ({u},{v}) out of range for n={self.n}")
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            if j < 0:
                raise ValueError(
                    f"coupling J={j} on edge ({u},{v}) is negative; "
                    "only ferromagnetic (J >= 0) couplings are supported"
                )
            if not math.isfinite(j):
                raise ValueError(f"coupling on edge ({u},{v}) is not finite")
            if u > v:
                u, v = v, u
            if (u, v) in seen:
                raise ValueError(f"duplicate edge ({u},{v})")
            seen.add((u, v))
            norm_edges.append((u, v, j))
        object.__setattr__(self, "edges", tuple(norm_edges))

        if self.field is None:
            h = np.zeros(self.n)
        else:
            h = np.asarray(self.field, dtype=np.float64).copy()
            if h.shape != (self.n,):
                raise ValueError(f"field must have length {self.n}, got {h.shape}")
            if not np.all(np.isfinite(h)):
                raise ValueError("field entries must be finite")
        h.flags.writeable = False
        object.__setattr__(self, "field", h)

        # CSR adjacency, neighbors of each vertex in ascending order.
        neighbors = [[] for _ in range(self.n)]
        for u, v, j in self.edges:
            neighbors[u].append((v, j))
            neighbors[v].append((u, j))
        indptr = np.zeros(self.n + 1, dtype=np.int64)
        idx, wts = [], []
        for v in range(self.n):
            neighbors[v].sort()
            indptr[v + 1] = indptr[v] + len(neighbors[v])
            for u, j in neighbors[v]:
                idx.append(u)
                wts.append(j)
        indices = np.asarray(idx, dtype=np.int64)
        weights = np.asarray(wts, dtype=np.float64)
        for a in (indptr, indices, weights):
            a.flags.writeable = False
        object.__setattr__(self, "adj_indptr", indptr)
        object.__setattr__(self, "adj_indices", indices)
        object.__setattr__(self, "adj_weights", weights)

    @property
    def has_field(self) -> bool:
        return bool(np.any(self.field != 0.0))

    def with_field(self, h) -> "IsingModel":
        """Same graph and couplings, replacement external field."""
        return IsingModel(self.n, self.edges, np.asarray(h, dtype=np.float64))

    def coupling_matrix(self) -> np.ndarray:
        """Dense symmetric n x n coupling matrix (zeros off the edge set)."""
        J = np.zeros((self.n, self.n))
        for u, v, j in self.edges:
            J[u, v] = j
            J[v, u] = j
        return J


def validate_spins(spins, n: int) -> np.ndarray:
    """Coerce to an int8 vector of +-1 entries of length n."""
    s = np.asarray(spins)
    if s.shape != (n,):
        raise ValueError(f"configuration must have length {n}, got shape {s.shape}")
    s = s.astype(np.int8, copy=True)
    if not np.all(np.abs(s) == 1):
        raise ValueError("spins must be exactly +1 or -1")
    return s


def all_plus(n: int) -> np.ndarray:
    return np.ones(n, dtype=np.int8)


def all_minus(n: int) -> np.ndarray:
    return -np.ones(n, dtype=np.int8)


def spins_from_index(index: int, n: int) -> np.ndarray:
    """Inverse of index_of_spins: bit b set means spin b is +1."""
    if not 0 <= index < (1 << n):
        raise ValueError(f"index {index} out of range for n={n}")
    bits = (index >> np.arange(n)) & 1
    return (2 * bits - 1).astype(np.int8)


def index_of_spins(spins) -> int:
    s = np.asarray(spins)
    bits = (s > 0).astype(np.int64)
    return int(bits @ (1 << np.arange(len(s), dtype=np.int64)))


def log_unnormalized_weight(model: IsingModel, spins) -> float:
    """Energy exponent: sum_e J_uv s_u s_v + sum_v H_v s_v."""
    s = np.asarray(spins, dtype=np.float64)
    if s.shape != (model.n,):
        raise ValueError(f"configuration must have length {model.n}")
    e = 0.0
    for u, v, j in model.edges:
        e += j * s[u] * s[v]
    return float(e + model.field @ s)


def unnormalized_weight(model: IsingModel, spins) -> float:
    """Gibbs weight exp(sum_e J_uv s_u s_v + sum_v H_v s_v); strictly positive."""
    return math.exp(log_unnormalized_weight(model, spins))


def local_field(model: IsingModel, spins, v: int) -> float:
    """sum_{u ~ v} J_uv s_u + H_v. Does not depend on spins[v]."""
    if not 0 <= v < model.n:
        raise IndexError(f"vertex {v} out of range")
    s = np.asarray(spins)
    lo, hi = model.adj_indptr[v], model.adj_indptr[v + 1]
    m = float(model.field[v])
    for k in range(lo, hi):
        m += model.adj_weights[k] * float(s[model.adj_indices[k]])
    return m


def heat_bath_probability(model: IsingModel, spins, v: int) -> float:
    """P(spin at v resamples to +1 | all other spins), via 1/(1 + e^{-2m}).

    The two-branch form keeps the exponential argument nonpositive, so the
    result never overflows for large |m|.
    """
    m = local_field(model, spins, v)
    if m >= 0.0:
        return 1.0 / (1.0 + math.exp(-2.0 * m))
    e = math.exp(2.0 * m)
    return e / (1.0 + e)


def sum_of_spins(spins) -> int:
    """Total magnetization; an integer in [-n, n] with the parity of n."""
    return int(np.asarray(spins, dtype=np.int64).sum())


def config_leq(a, b) -> bool:
    """Coordinatewise partial order: a(v) <= b(v) for every v."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape} vs {b.shape}")
    return bool(np.all(a <= b))
