"""Stochastic domination between laws on the configuration hypercube.

A law p dominates q when p(U) >= q(U) for every increasing event U. For
n <= 5 every increasing event is enumerated (there are 7581 of them at
n = 5, Dedekind's count), giving an exact verdict. Up to n = 12 a sampled
family of increasing events is tested instead: a failed margin is a genuine
counterexample, but a pass is only partial evidence and is flagged as such.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import CapacityError
from .exact import DistributionTable, spin_sum_values, spins_matrix
from .rng import RngStream

__all__ = [
    "DominanceResult",
    "EXACT_EVENT_LIMIT",
    "SAMPLED_EVENT_LIMIT",
    "increasing_event_tables",
    "stochastically_dominates",
]

EXACT_EVENT_LIMIT = 5
SAMPLED_EVENT_LIMIT = 12

# number of monotone 0/1 functions on k variables, used as a self-check
_DEDEKIND = {0: 2, 1: 3, 2: 6, 3: 20, 4: 168, 5: 7581}


@dataclass(frozen=True)
class DominanceResult:
    dominates: bool
    margin: float
    exact: bool
    events_checked: int
    worst_event: tuple[int, ...]   # config indices of the minimizing event


@lru_cache(maxsize=None)
def increasing_event_tables(n: int) -> np.ndarray:
    """All indicators of increasing events on n spins, one per row.

    Row order is deterministic. Built by the half-cube recursion: an
    indicator is monotone iff both halves (last spin down / up) are monotone
    and the lower half is pointwise <= the upper half.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n > EXACT_EVENT_LIMIT:
        raise CapacityError(
            f"exhaustive increasing-event enumeration is limited to n <= {EXACT_EVENT_LIMIT}"
        )
    if n == 0:
        out = np.array([[False], [True]])
    else:
        prev = increasing_event_tables(n - 1)
        c = prev.shape[0]
        le = np.ones((c, c), dtype=bool)
        for j in range(prev.shape[1]):
            le &= ~prev[:, None, j] | prev[None, :, j]
        lo, hi = np.nonzero(le)
        out = np.concatenate([prev[lo], prev[hi]], axis=1)
    assert out.shape[0] == _DEDEKIND[n]
    out = out.copy()
    out.flags.writeable = False
    return out


def _event_margins(p: np.ndarray, q: np.ndarray, events: np.ndarray) -> np.ndarray:
    return events @ p - events @ q


def stochastically_dominates(
    p: DistributionTable,
    q: DistributionTable,
    tol: float = 1e-12,
    n_events: int = 512,
    rng: RngStream | None = None,
) -> DominanceResult:
    """Decide whether p dominates q; exact for n <= 5, sampled for n <= 12.

    The sampled family consists of every spin-sum level event plus random
    nonnegative-weighted halfspace events, all increasing by construction.
    """
    if p.n != q.n:
        raise ValueError(f"dimension mismatch: {p.n} vs {q.n}")
    n = p.n
    if n <= EXACT_EVENT_LIMIT:
        events = increasing_event_tables(n)
        margins = _event_margins(p.probs, q.probs, np.asarray(events, dtype=np.float64))
        worst = int(np.argmin(margins))
        margin = float(margins[worst])
        members = tuple(int(i) for i in np.nonzero(events[worst])[0])
        return DominanceResult(
            dominates=margin >= -tol,
            margin=margin,
            exact=True,
            events_checked=int(events.shape[0]),
            worst_event=members,
        )
    if n > SAMPLED_EVENT_LIMIT:
        raise CapacityError(
            f"stochastic-domination test is limited to n <= {SAMPLED_EVENT_LIMIT}"
        )
    if rng is None:
        rng = RngStream(0).named_child("dominance-events")
    gen = rng.generator()
    S = spins_matrix(n, dtype=np.float64)
    sums = spin_sum_values(n)
    events = []
    for r in range(-n, n + 1, 2):
        events.append(sums >= r)
    for _ in range(n_events):
        w = gen.exponential(1.0, size=n)
        vals = S @ w
        tau = gen.uniform(vals.min(), vals.max())
        events.append(vals >= tau)
    ev = np.asarray(events, dtype=np.float64)
    margins = _event_margins(p.probs, q.probs, ev)
    worst = int(np.argmin(margins))
    margin = float(margins[worst])
    members = tuple(int(i) for i in np.nonzero(ev[worst])[0][:64])
    return DominanceResult(
        dominates=margin >= -tol,
        margin=margin,
        exact=False,
        events_checked=int(ev.shape[0]),
        worst_event=members,
    )
