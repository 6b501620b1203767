"""Exact computations by full enumeration of the 2^n configuration space.

Dense transition matrices and spectra are limited to ``matrix_limit`` sites
(default 12, i.e. 4096 states). Pure table operations (Gibbs tables, TV
curves, marginals, single-site distribution updates) work matrix-free up to
the hard cap of 20 sites, never materializing a 2^n x 2^n matrix.

All reductions run in a fixed order (fixed chunk size, fixed site order), so
repeated runs produce bit-identical tables regardless of worker count.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh
from scipy.special import logsumexp

from .errors import CapacityError
from .model import IsingModel, index_of_spins, validate_spins

__all__ = [
    "DistributionTable",
    "SpectralData",
    "TransitionMatrix",
    "apply_glauber_to_distribution",
    "conditional_magnetization",
    "dirichlet_form",
    "exact_mixing_time",
    "exact_tv_curve",
    "ghs_second_derivative",
    "gibbs_distribution",
    "glauber_transition_matrix",
    "moments",
    "point_mass",
    "project_distribution",
    "second_eigenfunction_report",
    "sequence_law",
    "single_site_update_operator",
    "spectral_data",
    "spin_sum_values",
    "spins_matrix",
    "statistic_exceedance",
    "tv_distance",
]

HARD_TABLE_CAP = 20
DEFAULT_ENUM_LIMIT = 12
DEFAULT_MATRIX_LIMIT = 12
DENSE_EIG_LIMIT = 4096
_CHUNK = 1 << 16


@dataclass(frozen=True)
class DistributionTable:
    """Explicit probability vector over all 2^n configurations.

    ``probs[i]`` is the mass of the configuration whose index is i under the
    bit convention of :mod:`mixlab.model`. ``log_z`` is the log normalizing
    constant when the table came from a Gibbs weight, else None.
    """

    n: int
    probs: np.ndarray
    log_z: float | None = None

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=np.float64)
        if p.shape != (1 << self.n,):
            raise ValueError(f"need 2^{self.n} probabilities, got {p.shape}")
        if np.any(p < -1e-15):
            raise ValueError("negative probability entry")
        s = float(p.sum())
        if abs(s - 1.0) > 1e-12:
            raise ValueError(f"probabilities sum to {s!r}, not 1 within 1e-12")
        p = p.copy()
        p.flags.writeable = False
        object.__setattr__(self, "probs", p)


@dataclass(frozen=True)
class TransitionMatrix:
    """Row-stochastic single-site heat-bath kernel with its target table."""

    n: int
    matrix: np.ndarray
    pi: DistributionTable
    reversible: bool
    balance_residual: float

    @property
    def dim(self) -> int:
        return 1 << self.n


@dataclass(frozen=True)
class SpectralData:
    """Eigenvalues (descending), gap = 1 - lambda_2, second eigenfunction.

    ``partial`` is True when only the top two eigenvalues were computed (power
    iteration path above the dense solver limit). ``multiplicity`` counts the
    eigenvalues matching lambda_2 within 1e-9; when it exceeds 1 the returned
    eigenfunction is one arbitrary member of the eigenspace.
    """

    eigenvalues: np.ndarray
    gap: float
    second_eigenfunction: np.ndarray
    multiplicity: int
    partial: bool = False


def spins_matrix(n: int, dtype=np.int8) -> np.ndarray:
    """(2^n, n) matrix whose row i is the configuration with index i."""
    idx = np.arange(1 << n, dtype=np.int64)
    bits = (idx[:, None] >> np.arange(n)) & 1
    return (2 * bits - 1).astype(dtype)


def spin_sum_values(n: int) -> np.ndarray:
    """Total spin sum of every configuration, indexed canonically."""
    idx = np.arange(1 << n, dtype=np.int64)
    pop = np.zeros(1 << n, dtype=np.int64)
    for b in range(n):
        pop += (idx >> b) & 1
    return 2 * pop - n


def _check_capacity(n: int, limit: int, what: str):
    limit = min(limit, HARD_TABLE_CAP)
    if n > limit:
        raise CapacityError(f"{what} needs 2^{n} states; limit is n <= {limit}")


def _log_weights(model: IsingModel) -> np.ndarray:
    S = spins_matrix(model.n, dtype=np.float64)
    e = S @ model.field
    for u, v, j in model.edges:
        e += j * (S[:, u] * S[:, v])
    return e


def gibbs_distribution(model: IsingModel, limit: int = DEFAULT_ENUM_LIMIT) -> DistributionTable:
    """Exact Gibbs table: probs[i] proportional to the weight of config i."""
    _check_capacity(model.n, limit, "gibbs_distribution")
    logw = _log_weights(model)
    log_z = float(logsumexp(logw))
    probs = np.exp(logw - log_z)
    probs /= probs.sum()
    return DistributionTable(model.n, probs, log_z=log_z)


def point_mass(n: int, index: int) -> DistributionTable:
    p = np.zeros(1 << n)
    p[index] = 1.0
    return DistributionTable(n, p)


def moments(dist: DistributionTable) -> tuple[np.ndarray, np.ndarray]:
    """Per-site magnetizations and the spin covariance matrix.

    C[u, v] = E[s_u s_v] - m_u m_v; the diagonal is 1 - m_v^2 because spins
    square to one.
    """
    n = dist.n
    N = 1 << n
    m = np.zeros(n)
    second = np.zeros((n, n))
    for lo in range(0, N, _CHUNK):
        hi = min(lo + _CHUNK, N)
        idx = np.arange(lo, hi, dtype=np.int64)
        S = ((idx[:, None] >> np.arange(n)) & 1).astype(np.float64) * 2.0 - 1.0
        w = dist.probs[lo:hi]
        m += w @ S
        second += (S * w[:, None]).T @ S
    return m, second - np.outer(m, m)


def conditional_magnetization(
    model: IsingModel, u: int, clamped, limit: int = HARD_TABLE_CAP
) -> float:
    """E[s_u] under the Gibbs measure conditioned on the clamped spins.

    ``clamped`` is an iterable of (vertex, spin) pairs with spin +-1, none of
    them u. All weights are positive, so the conditional support is never
    empty. Implemented by restricted enumeration.
    """
    _check_capacity(model.n, limit, "conditional_magnetization")
    clamps = [(int(v), int(s)) for v, s in clamped]
    for v, s in clamps:
        if v == u:
            raise ValueError("target vertex is clamped")
        if not 0 <= v < model.n:
            raise IndexError(f"clamped vertex {v} out of range")
        if s not in (-1, 1):
            raise ValueError(f"clamped spin must be +-1, got {s}")
    if len({v for v, _ in clamps}) != len(clamps):
        raise ValueError("duplicate clamped vertex")

    idx = np.arange(1 << model.n, dtype=np.int64)
    keep = np.ones(idx.shape, dtype=bool)
    for v, s in clamps:
        bit = (idx >> v) & 1
        keep &= bit == (1 if s == 1 else 0)
    sel = idx[keep]
    S = ((sel[:, None] >> np.arange(model.n)) & 1).astype(np.float64) * 2.0 - 1.0
    e = S @ model.field
    for a, b, j in model.edges:
        e += j * (S[:, a] * S[:, b])
    e -= e.max()
    w = np.exp(e)
    return float((w @ S[:, u]) / w.sum())


def ghs_second_derivative(
    model: IsingModel, v: int, u: int, w: int, h: float = 1e-3,
    limit: int = DEFAULT_ENUM_LIMIT,
) -> float:
    """Central finite difference of the magnetization m_v with respect to the
    external field components at u and w (u == w gives the pure second
    partial). Steps below 1e-6 are rejected: second-difference cancellation
    would drown the value in rounding noise."""
    if h <= 0:
        raise ValueError("step must be positive")
    if h < 1e-6:
        raise ValueError("step below 1e-6 rejected (cancellation)")
    if np.any(model.field < 0):
        raise ValueError("concavity probe expects a nonnegative field")

    def mag(shift_u: float, shift_w: float) -> float:
        f = model.field.copy()
        f[u] += shift_u
        f[w] += shift_w
        dist = gibbs_distribution(model.with_field(f), limit=limit)
        m, _ = moments(dist)
        return float(m[v])

    if u == w:
        return (mag(h, 0.0) - 2.0 * mag(0.0, 0.0) + mag(-h, 0.0)) / (h * h)
    return (mag(h, h) - mag(h, -h) - mag(-h, h) + mag(-h, -h)) / (4.0 * h * h)


def _plus_probabilities(model: IsingModel) -> np.ndarray:
    """(n, 2^n) array: row v holds P(update at v lands on +1 | config)."""
    n = model.n
    S = spins_matrix(n, dtype=np.float64)
    J = model.coupling_matrix()
    out = np.empty((n, 1 << n))
    for v in range(n):
        m = S @ J[:, v] + model.field[v]
        m -= J[v, v] * S[:, v]  # J[v,v] is 0; kept for clarity of the exclusion
        pos = m >= 0
        p = np.empty_like(m)
        p[pos] = 1.0 / (1.0 + np.exp(-2.0 * m[pos]))
        e = np.exp(2.0 * m[~pos])
        p[~pos] = e / (1.0 + e)
        out[v] = p
    return out


def glauber_transition_matrix(
    model: IsingModel, limit: int = DEFAULT_MATRIX_LIMIT
) -> TransitionMatrix:
    """Dense single-site heat-bath kernel: pick a uniform vertex, resample it.

    The no-change mass sits on the diagonal. Verified row-stochastic and in
    detailed balance with the exact Gibbs table.
    """
    _check_capacity(model.n, limit, "glauber_transition_matrix")
    n = model.n
    N = 1 << n
    pi = gibbs_distribution(model, limit=limit)
    plus = _plus_probabilities(model)
    P = np.zeros((N, N))
    idx = np.arange(N, dtype=np.int64)
    for v in range(n):
        bit = 1 << v
        up = idx | bit
        down = idx & ~bit
        p = plus[v]
        P[idx, up] += p / n
        P[idx, down] += (1.0 - p) / n
    rows = P.sum(axis=1)
    if np.max(np.abs(rows - 1.0)) > 1e-12:
        raise AssertionError("kernel rows do not sum to 1")
    flow = pi.probs[:, None] * P
    residual = float(np.max(np.abs(flow - flow.T)))
    return TransitionMatrix(n, P, pi, reversible=residual < 1e-10, balance_residual=residual)


def _symmetrized(tm: TransitionMatrix) -> tuple[np.ndarray, np.ndarray]:
    s = np.sqrt(tm.pi.probs)
    A = (s[:, None] * tm.matrix) / s[None, :]
    return 0.5 * (A + A.T), s


def spectral_data(tm: TransitionMatrix, dense_limit: int = DENSE_EIG_LIMIT) -> SpectralData:
    """Full spectrum of the kernel via its symmetrization.

    Reversibility makes D^{1/2} P D^{-1/2} symmetric, so a symmetric dense
    solver returns a guaranteed-real spectrum. Above ``dense_limit`` states
    only (lambda_1, lambda_2) are extracted by deflated power iteration and
    the result is flagged partial. Heat-bath kernels are averages of
    conditional-expectation projections, hence positive semidefinite; a
    second eigenvalue below -1e-9 is rejected as an inconsistency.
    """
    if not tm.reversible:
        raise ValueError(
            f"kernel not reversible (balance residual {tm.balance_residual:.3e})"
        )
    A, s = _symmetrized(tm)
    N = A.shape[0]
    if N <= dense_limit:
        w, V = eigh(A)
        order = np.argsort(w)[::-1]
        w = w[order]
        V = V[:, order]
        if abs(w[0] - 1.0) > 1e-9:
            raise AssertionError(f"top eigenvalue {w[0]!r} differs from 1")
        if w[-1] < -1e-9:
            raise AssertionError(f"negative eigenvalue {w[-1]!r} for a heat-bath kernel")
        lam2 = float(w[1]) if N > 1 else 0.0
        f = V[:, 1] / s if N > 1 else np.zeros(1)
        multiplicity = int(np.sum(np.abs(w[1:] - lam2) <= 1e-9)) if N > 1 else 0
        partial = False
        eigs = w
    else:
        lam2, psi = _second_eigen_power(A, s)
        f = psi / s
        multiplicity = 1
        partial = True
        eigs = np.array([1.0, lam2])
    peak = np.argmax(np.abs(f))
    if f[peak] < 0:
        f = -f
    scale = np.abs(f[peak])
    if scale > 0:
        f = f / scale
    return SpectralData(
        eigenvalues=np.asarray(eigs, dtype=np.float64),
        gap=float(1.0 - lam2),
        second_eigenfunction=f,
        multiplicity=multiplicity,
        partial=partial,
    )


def _second_eigen_power(A, s, tol=1e-13, max_iter=200000):
    # top eigenvector of the symmetrized kernel is sqrt(pi) with eigenvalue 1
    v1 = s / np.linalg.norm(s)
    x = np.arange(A.shape[0], dtype=np.float64)
    x -= x.mean()
    x -= (v1 @ x) * v1
    x /= np.linalg.norm(x)
    lam = 0.0
    for _ in range(max_iter):
        y = A @ x
        y -= (v1 @ y) * v1
        norm = np.linalg.norm(y)
        if norm == 0.0:
            return 0.0, x
        y /= norm
        new_lam = float(y @ (A @ y))
        done = abs(new_lam - lam) < tol
        x, lam = y, new_lam
        if done:
            break
    return lam, x


def second_eigenfunction_report(sd: SpectralData, n: int, tol: float = 1e-9) -> dict:
    """Coordinatewise-monotonicity report for the second eigenfunction.

    With an eigenvalue multiplicity above one the returned vector is an
    arbitrary basis member, so no monotonicity verdict is offered; the
    eigenspace dimension is reported instead.
    """
    if sd.multiplicity > 1:
        return {"verdict": "degenerate", "eigenspace_dim": sd.multiplicity}
    f = sd.second_eigenfunction
    idx = np.arange(f.shape[0], dtype=np.int64)
    top = int(f.shape[0] - 1)
    if f[top] < f[0] - tol:
        f = -f
    violations = 0
    for v in range(n):
        bit = 1 << v
        base = idx[(idx & bit) == 0]
        violations += int(np.sum(f[base] > f[base | bit] + tol))
    return {
        "verdict": "increasing" if violations == 0 else "not_increasing",
        "violations": violations,
        "eigenspace_dim": 1,
    }


def dirichlet_form(tm: TransitionMatrix, f) -> float:
    """(1/2) sum_{x,y} (f(x)-f(y))^2 pi(x) P(x,y); nonnegative, zero only for
    constants on this irreducible kernel."""
    f = np.asarray(f, dtype=np.float64)
    if f.shape != (tm.dim,):
        raise ValueError("function table has the wrong length")
    pi = tm.pi.probs
    Pf = tm.matrix @ f
    Pf2 = tm.matrix @ (f * f)
    return float(0.5 * (pi @ (f * f) + pi @ Pf2 - 2.0 * pi @ (f * Pf)))


def tv_distance(p: DistributionTable, q: DistributionTable) -> float:
    if p.n != q.n:
        raise ValueError(f"dimension mismatch: {p.n} vs {q.n}")
    return 0.5 * float(np.abs(p.probs - q.probs).sum())


def apply_glauber_to_distribution(
    model: IsingModel, probs: np.ndarray, plus: np.ndarray | None = None
) -> np.ndarray:
    """One full-kernel step on a distribution, matrix-free: average over sites
    of the exact single-site update."""
    n = model.n
    if plus is None:
        plus = _plus_probabilities(model)
    out = np.zeros_like(probs)
    idx = np.arange(1 << n, dtype=np.int64)
    for v in range(n):
        bit = 1 << v
        base = idx[(idx & bit) == 0]
        top = base | bit
        pair = probs[base] + probs[top]
        p = plus[v][base]
        out[top] += pair * p / n
        out[base] += pair * (1.0 - p) / n
    return out


def single_site_update_operator(
    model: IsingModel, v: int, dist: DistributionTable, limit: int = HARD_TABLE_CAP
) -> DistributionTable:
    """Exact law after one heat-bath update at v; linear and stochastic, with
    the Gibbs table as a fixed point. Idempotent per site."""
    _check_capacity(model.n, limit, "single_site_update_operator")
    if not 0 <= v < model.n:
        raise IndexError(f"vertex {v} out of range")
    n = model.n
    plus = _plus_probabilities(model)
    idx = np.arange(1 << n, dtype=np.int64)
    bit = 1 << v
    base = idx[(idx & bit) == 0]
    top = base | bit
    out = np.zeros_like(dist.probs)
    pair = dist.probs[base] + dist.probs[top]
    p = plus[v][base]
    out[top] = pair * p
    out[base] = pair * (1.0 - p)
    return DistributionTable(n, out)


def sequence_law(
    model: IsingModel, sites, start, limit: int = HARD_TABLE_CAP
) -> DistributionTable:
    """Exact law after deterministically updating the given site sequence in
    order, starting from a point configuration."""
    _check_capacity(model.n, limit, "sequence_law")
    s = validate_spins(start, model.n)
    plus = _plus_probabilities(model)
    idx = np.arange(1 << model.n, dtype=np.int64)
    probs = np.zeros(1 << model.n)
    probs[index_of_spins(s)] = 1.0
    for v in sites:
        v = int(v)
        if not 0 <= v < model.n:
            raise IndexError(f"vertex {v} out of range")
        bit = 1 << v
        base = idx[(idx & bit) == 0]
        top = base | bit
        pair = probs[base] + probs[top]
        p = plus[v][base]
        out = np.zeros_like(probs)
        out[top] = pair * p
        out[base] = pair * (1.0 - p)
        probs = out
    return DistributionTable(model.n, probs)


def exact_tv_curve(
    model: IsingModel, start, T: int, limit: int = HARD_TABLE_CAP
) -> np.ndarray:
    """TV distance to the Gibbs table after t = 0..T kernel steps from a point
    start, by row-vector iteration (no matrix is materialized)."""
    _check_capacity(model.n, limit, "exact_tv_curve")
    if T < 0:
        raise ValueError("horizon must be nonnegative")
    s = validate_spins(start, model.n)
    pi = gibbs_distribution(model, limit=limit)
    plus = _plus_probabilities(model)
    probs = np.zeros(1 << model.n)
    probs[index_of_spins(s)] = 1.0
    curve = np.empty(T + 1)
    curve[0] = 0.5 * float(np.abs(probs - pi.probs).sum())
    for t in range(1, T + 1):
        probs = apply_glauber_to_distribution(model, probs, plus)
        curve[t] = 0.5 * float(np.abs(probs - pi.probs).sum())
    return curve


def exact_mixing_time(
    model: IsingModel,
    start,
    threshold: float = 0.25,
    matrix_limit: int = DEFAULT_MATRIX_LIMIT,
) -> int:
    """Least t with ||law(X_t) - pi||_TV <= threshold from the given start.

    Strong couplings make t_mix astronomically large, so stepping the curve
    is hopeless; instead the TV at any single t is evaluated through the
    eigendecomposition of the symmetrized kernel, and the answer is bracketed
    by doubling and then bisected (TV from a point start is nonincreasing).
    """
    if not 0 < threshold < 1:
        raise ValueError("threshold must be in (0, 1)")
    s = validate_spins(start, model.n)
    x = index_of_spins(s)
    tm = glauber_transition_matrix(model, limit=matrix_limit)
    A, sq = _symmetrized(tm)
    w, V = eigh(A)
    w = np.clip(w, 0.0, 1.0)  # heat-bath spectrum is in [0, 1]; clip fp noise
    pi = tm.pi.probs
    # P^t = D^{-1/2} (V diag(w^t) V^T) D^{1/2}, so row x of P^t is
    # row[y] = sum_j V[x,j] w_j^t V[y,j] * sq[y] / sq[x].
    a = V[x, :] / sq[x]
    # exact-boundary cases (TV(t) equal to the threshold, common at J = 0)
    # must not be pushed a step later by reconstruction round-off
    threshold = threshold + 1e-12

    def tv_at(t: int) -> float:
        lam_t = np.power(w, t) if t > 0 else np.ones_like(w)
        row = (V @ (lam_t * a)) * sq
        return 0.5 * float(np.abs(row - pi).sum())

    if tv_at(0) <= threshold:
        return 0
    hi = 1
    for _ in range(400):
        if tv_at(hi) <= threshold:
            break
        hi *= 2
    else:
        raise AssertionError("mixing time bracket exceeded 2^400 steps")
    lo = hi // 2  # tv(lo) > threshold, tv(hi) <= threshold
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if tv_at(mid) <= threshold:
            hi = mid
        else:
            lo = mid
    return hi


def project_distribution(dist: DistributionTable, subset) -> DistributionTable:
    """Marginal law on a nonempty vertex subset, indexed by the subset's own
    sorted order under the same bit convention."""
    F = sorted(int(v) for v in subset)
    if not F:
        raise ValueError("subset must be nonempty")
    if len(set(F)) != len(F) or F[0] < 0 or F[-1] >= dist.n:
        raise ValueError("subset must be distinct vertices of the model")
    idx = np.arange(1 << dist.n, dtype=np.int64)
    proj = np.zeros_like(idx)
    for j, v in enumerate(F):
        proj |= ((idx >> v) & 1) << j
    out = np.bincount(proj, weights=dist.probs, minlength=1 << len(F))
    return DistributionTable(len(F), out)


def statistic_exceedance(dist: DistributionTable, r: float) -> float:
    """P(sum of spins > r) under the table."""
    return float(dist.probs[spin_sum_values(dist.n) > r].sum())
