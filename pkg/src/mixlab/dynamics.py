"""Seeded Monte-Carlo simulation of the spin chains.

Three chain variants share one driver:

- ``plain``: single-site heat bath on all vertices.
- ``accelerated``: a uniform vertex v is drawn each step; outside the
  tracked set it gets a plain update, inside it the block made of v plus
  every untracked vertex is resampled jointly from its conditional law.
- ``z_chain``: the tracked-set view of the accelerated chain on its block
  steps only — one tracked site is resampled per step from the conditional
  law with the untracked set integrated out.

Every trajectory is a deterministic function of (spec, start, T, rng): the
driver pre-draws (site, uniform) pairs in fixed-size chunks and feeds them
to the selected kernel backend. Exact block sampling enumerates the 2^B
block configurations (B = 1 + #untracked); blocks too large for that fall
back to nested single-site sweeps inside the block, which is approximate
and flagged on the spec.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import CapacityError
from .exact import DistributionTable, statistic_exceedance
from .model import IsingModel, validate_spins
from .rng import RngStream

__all__ = [
    "ChainSpec",
    "CoupledTrajectory",
    "MAX_EXACT_BLOCK",
    "StatisticBound",
    "Trajectory",
    "block_tables",
    "psi_discrepancy",
    "run_chain",
    "run_coupled",
    "statistic_tv_lower_bound",
    "tracked_restriction",
]

MAX_EXACT_BLOCK = 20
DRAW_CHUNK = 1 << 20
VARIANTS = ("plain", "accelerated", "z_chain")


@dataclass(frozen=True)
class ChainSpec:
    """Which chain to run: model, tracked vertex subset, variant, and how
    blocks are sampled (``auto`` picks exact enumeration whenever the block
    fits, nested single-site sweeps otherwise)."""

    model: IsingModel
    tracked: tuple[int, ...] = ()
    variant: str = "plain"
    block_mode: str = "auto"
    inner_steps: int | None = None

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if self.block_mode not in ("auto", "exact", "nested"):
            raise ValueError(f"unknown block mode {self.block_mode!r}")
        tracked = tuple(sorted(int(v) for v in self.tracked)) or tuple(range(self.model.n))
        if len(set(tracked)) != len(tracked):
            raise ValueError("tracked set has repeated vertices")
        if tracked[0] < 0 or tracked[-1] >= self.model.n:
            raise ValueError("tracked set out of vertex range")
        object.__setattr__(self, "tracked", tracked)
        if self.inner_steps is not None and self.inner_steps < 1:
            raise ValueError("inner step count must be positive")

    @property
    def k(self) -> int:
        return len(self.tracked)

    @property
    def block_size(self) -> int:
        return 1 + self.model.n - self.k

    @property
    def resolved_mode(self) -> str:
        """'exact' or 'nested' after resolving 'auto'; plain chains have no
        block and always report 'exact'."""
        if self.variant == "plain":
            return "exact"
        if self.block_mode == "auto":
            return "exact" if self.block_size <= MAX_EXACT_BLOCK else "nested"
        if self.block_mode == "exact" and self.block_size > MAX_EXACT_BLOCK:
            raise CapacityError(
                f"exact block sampling needs 2^{self.block_size} weights; "
                f"limit is block size <= {MAX_EXACT_BLOCK}"
            )
        return self.block_mode

    @property
    def resolved_inner_steps(self) -> int:
        if self.inner_steps is not None:
            return self.inner_steps
        b = self.block_size
        return max(1, math.ceil(20.0 * b * math.log(max(b, 2))))

    @property
    def is_exact(self) -> bool:
        return self.resolved_mode == "exact"


@dataclass(frozen=True)
class Trajectory:
    """One simulated path: per-step statistic sums (index 0 is the start),
    the block-step times for accelerated runs, and the final state."""

    variant: str
    tracked: tuple[int, ...]
    sums: np.ndarray
    final_tracked: np.ndarray
    final_full: np.ndarray | None = None
    block_steps: np.ndarray | None = None
    configs: np.ndarray | None = None
    sites: np.ndarray | None = None
    uniforms: np.ndarray | None = None

    @property
    def T(self) -> int:
        return self.sums.shape[0] - 1


@dataclass(frozen=True)
class CoupledTrajectory:
    """A monotone-coupled pair: Hamming distance and both statistic sums per
    step, plus the count of anti-ordered fresh draws (0 for ordered starts)."""

    variant: str
    tracked: tuple[int, ...]
    dist: np.ndarray
    sums_hi: np.ndarray
    sums_lo: np.ndarray
    order_violations: int
    final_hi: np.ndarray
    final_lo: np.ndarray


@dataclass(frozen=True)
class BlockTables:
    """Flattened per-tracked-site block structure for the kernels.

    For tracked position j, the block is [tracked[j]] + untracked (position
    0 is the tracked site). ``cross_*`` edges couple a block position to a
    tracked vertex outside the block, addressed both by tracked position
    (`cross_tpos`, for tracked-state kernels) and by global vertex id
    (`cross_global`, for full-state kernels).
    """

    block_size: int
    fields: np.ndarray
    intra_ptr: np.ndarray
    intra_a: np.ndarray
    intra_b: np.ndarray
    intra_w: np.ndarray
    cross_ptr: np.ndarray
    cross_a: np.ndarray
    cross_tpos: np.ndarray
    cross_global: np.ndarray
    cross_w: np.ndarray
    members: np.ndarray

    def marginal_args(self):
        return (self.block_size, self.fields, self.intra_ptr, self.intra_a,
                self.intra_b, self.intra_w, self.cross_ptr, self.cross_a,
                self.cross_tpos, self.cross_w)

    def full_args(self):
        return (self.block_size, self.fields, self.intra_ptr, self.intra_a,
                self.intra_b, self.intra_w, self.cross_ptr, self.cross_a,
                self.cross_global, self.cross_w, self.members)

    def scratch(self) -> np.ndarray:
        return np.empty(1 << self.block_size)


def block_tables(spec: ChainSpec) -> BlockTables:
    """Build the flattened block tables for every tracked site."""
    model = spec.model
    if spec.resolved_mode == "exact" and spec.block_size > MAX_EXACT_BLOCK:
        raise CapacityError(
            f"block size {spec.block_size} exceeds the exact limit {MAX_EXACT_BLOCK}"
        )
    tracked = list(spec.tracked)
    k = len(tracked)
    untracked = sorted(set(range(model.n)) - set(tracked))
    B = 1 + len(untracked)
    tpos = {v: j for j, v in enumerate(tracked)}

    fields = np.empty((k, B))
    members = np.empty((k, B), dtype=np.int64)
    ia_ptr = np.zeros(k + 1, dtype=np.int64)
    cr_ptr = np.zeros(k + 1, dtype=np.int64)
    ia_a, ia_b, ia_w = [], [], []
    cr_a, cr_t, cr_glob, cr_w = [], [], [], []

    for j, v in enumerate(tracked):
        block = [v] + untracked
        members[j] = block
        fields[j] = model.field[block]
        pos = {g: a for a, g in enumerate(block)}
        for (x, y, w) in model.edges:
            in_x, in_y = x in pos, y in pos
            if in_x and in_y:
                ia_a.append(pos[x])
                ia_b.append(pos[y])
                ia_w.append(w)
            elif in_x or in_y:
                inner, outer = (x, y) if in_x else (y, x)
                if outer in tpos:  # other end is a tracked vertex != v
                    cr_a.append(pos[inner])
                    cr_t.append(tpos[outer])
                    cr_glob.append(outer)
                    cr_w.append(w)
                else:  # unreachable: outside the block means tracked
                    raise AssertionError("edge endpoint neither in block nor tracked")
        ia_ptr[j + 1] = len(ia_a)
        cr_ptr[j + 1] = len(cr_a)

    def arr(x, dt):
        return np.asarray(x, dtype=dt)

    return BlockTables(
        block_size=B,
        fields=np.ascontiguousarray(fields),
        intra_ptr=ia_ptr,
        intra_a=arr(ia_a, np.int64), intra_b=arr(ia_b, np.int64),
        intra_w=arr(ia_w, np.float64),
        cross_ptr=cr_ptr,
        cross_a=arr(cr_a, np.int64), cross_tpos=arr(cr_t, np.int64),
        cross_global=arr(cr_glob, np.int64), cross_w=arr(cr_w, np.float64),
        members=members,
    )


def tracked_restriction(spins: np.ndarray, tracked) -> np.ndarray:
    return np.ascontiguousarray(spins[np.asarray(tracked, dtype=np.int64)])


def _tracked_mask(n: int, tracked) -> np.ndarray:
    mask = np.zeros(n, dtype=np.int8)
    mask[np.asarray(tracked, dtype=np.int64)] = 1
    return mask


def _coerce_state(spec: ChainSpec, start, want: str) -> np.ndarray:
    """Accept a full configuration or (for tracked-state chains) a tracked
    vector; return the representation ``want`` ('full' or 'tracked')."""
    a = np.asarray(start, dtype=np.int8)
    if want == "full":
        return validate_spins(a, spec.model.n).copy()
    if a.shape == (spec.model.n,):
        return tracked_restriction(validate_spins(a, spec.model.n), spec.tracked).copy()
    if a.shape != (spec.k,):
        raise ValueError(
            f"start must have length {spec.model.n} or {spec.k}, got {a.shape}"
        )
    if not np.all(np.abs(a) == 1):
        raise ValueError("spins must be +-1")
    return a.copy()


def _empty_i64(T: int) -> np.ndarray:
    return np.zeros(max(T, 1), dtype=np.int64)


def _chunks(T: int, draws, gen, m: int):
    """Yield (offset, sites, uniforms) either from provided draw arrays or
    freshly drawn in fixed-size chunks (sites first, then uniforms)."""
    if draws is not None:
        sites, uniforms = draws
        sites = np.ascontiguousarray(sites, dtype=np.int64)
        uniforms = np.ascontiguousarray(uniforms, dtype=np.float64)
        if sites.shape != (T,) or uniforms.shape != (T,):
            raise ValueError("draw arrays must both have length T")
        if sites.size and (sites.min() < 0 or sites.max() >= m):
            raise ValueError("draw sites out of range")
        yield 0, sites, uniforms
        return
    off = 0
    while off < T:
        c = min(DRAW_CHUNK, T - off)
        sites = gen.integers(0, m, size=c, dtype=np.int64)
        uniforms = gen.random(c)
        yield off, sites, uniforms
        off += c


def run_chain(
    spec: ChainSpec,
    start,
    T: int,
    rng: RngStream,
    record_sums: bool = True,
    record_configs: bool = False,
    record_updates: bool = False,
    draws: tuple[np.ndarray, np.ndarray] | None = None,
) -> Trajectory:
    """Simulate T steps; deterministic given (spec, start, T, rng).

    ``draws`` replays explicit (sites, uniforms) arrays instead of drawing
    from ``rng`` (unsupported for nested block sampling, whose inner sweeps
    consume extra draws).
    """
    if T < 0:
        raise ValueError("T must be nonnegative")
    mode = spec.resolved_mode
    if (record_updates or draws is not None) and mode == "nested":
        raise ValueError("update capture/replay requires exact block sampling")
    gen = rng.generator()
    model = spec.model
    fmask = _tracked_mask(model.n, spec.tracked)
    sums = np.zeros(T + 1, dtype=np.int64)
    configs = None
    kept_sites = [] if record_updates else None
    kept_unis = [] if record_updates else None

    if spec.variant == "plain":
        state = _coerce_state(spec, start, "full")
        sums[0] = int(state[list(spec.tracked)].sum())
        if record_configs:
            configs = np.empty((T + 1, model.n), dtype=np.int8)
            configs[0] = state
        for off, sites, unis in _chunks(T, draws, gen, model.n):
            if kept_sites is not None:
                kept_sites.append(sites)
                kept_unis.append(unis)
            if record_configs:
                for i in range(sites.shape[0]):
                    _kernels.run_glauber(
                        state, model.adj_indptr, model.adj_indices,
                        model.adj_weights, model.field, fmask,
                        sites[i:i + 1], unis[i:i + 1],
                        sums[off + 1 + i: off + 2 + i], True)
                    configs[off + 1 + i] = state
            else:
                _kernels.run_glauber(
                    state, model.adj_indptr, model.adj_indices,
                    model.adj_weights, model.field, fmask, sites, unis,
                    sums[off + 1: off + 1 + sites.shape[0]], record_sums)
        if not record_sums:
            sums = sums[:1]
        return Trajectory(
            variant=spec.variant, tracked=spec.tracked, sums=sums,
            final_tracked=tracked_restriction(state, spec.tracked),
            final_full=state, configs=configs,
            sites=np.concatenate(kept_sites) if kept_sites else None,
            uniforms=np.concatenate(kept_unis) if kept_unis else None,
        )

    if spec.variant == "z_chain":
        if mode == "exact":
            tables = block_tables(spec)
            scratch = tables.scratch()
            z = _coerce_state(spec, start, "tracked")
            sums[0] = int(z.sum())
            if record_configs:
                configs = np.empty((T + 1, spec.k), dtype=np.int8)
                configs[0] = z
            for off, sites, unis in _chunks(T, draws, gen, spec.k):
                if kept_sites is not None:
                    kept_sites.append(sites)
                    kept_unis.append(unis)
                if record_configs:
                    for i in range(sites.shape[0]):
                        _kernels.run_block_marginal(
                            z, *tables.marginal_args(), sites[i:i + 1],
                            unis[i:i + 1], scratch,
                            sums[off + 1 + i: off + 2 + i], True)
                        configs[off + 1 + i] = z
                else:
                    _kernels.run_block_marginal(
                        z, *tables.marginal_args(), sites, unis, scratch,
                        sums[off + 1: off + 1 + sites.shape[0]], record_sums)
            if not record_sums:
                sums = sums[:1]
            return Trajectory(
                variant=spec.variant, tracked=spec.tracked, sums=sums,
                final_tracked=z, configs=configs,
                sites=np.concatenate(kept_sites) if kept_sites else None,
                uniforms=np.concatenate(kept_unis) if kept_unis else None,
            )
        # nested: keep the full state, approximate each block resample by
        # inner single-site sweeps over the block with the boundary frozen
        state = _coerce_state(spec, start, "full")
        return _run_nested(spec, state, T, gen, sums, record_configs,
                           all_block=True)

    # accelerated
    state = _coerce_state(spec, start, "full")
    sums[0] = int(state[list(spec.tracked)].sum())
    in_tracked = np.zeros(model.n, dtype=bool)
    in_tracked[list(spec.tracked)] = True
    pos_of = np.full(model.n, -1, dtype=np.int64)
    pos_of[list(spec.tracked)] = np.arange(spec.k, dtype=np.int64)
    block_hits: list[np.ndarray] = []
    if record_configs and mode == "exact":
        raise ValueError("config recording is not supported for accelerated runs")
    if mode == "nested":
        return _run_nested(spec, state, T, gen, sums, record_configs,
                           all_block=False)
    tables = block_tables(spec)
    scratch = tables.scratch()
    for off, sites, unis in _chunks(T, draws, gen, model.n):
        if kept_sites is not None:
            kept_sites.append(sites)
            kept_unis.append(unis)
        mask = in_tracked[sites]
        hits = np.flatnonzero(mask)
        block_hits.append(hits + off + 1)
        prev = 0
        for h in hits:
            h = int(h)
            if h > prev:  # plain segment before this block step
                _kernels.run_glauber(
                    state, model.adj_indptr, model.adj_indices,
                    model.adj_weights, model.field, fmask,
                    sites[prev:h], unis[prev:h],
                    sums[off + 1 + prev: off + 1 + h], record_sums)
            j = pos_of[sites[h]]
            _kernels.run_block_full(
                state, *tables.full_args(), fmask,
                np.array([j], dtype=np.int64), unis[h:h + 1], scratch,
                sums[off + 1 + h: off + 2 + h], record_sums)
            prev = h + 1
        if prev < sites.shape[0]:
            _kernels.run_glauber(
                state, model.adj_indptr, model.adj_indices,
                model.adj_weights, model.field, fmask,
                sites[prev:], unis[prev:],
                sums[off + 1 + prev: off + 1 + sites.shape[0]], record_sums)
    if not record_sums:
        sums = sums[:1]
    return Trajectory(
        variant=spec.variant, tracked=spec.tracked, sums=sums,
        final_tracked=tracked_restriction(state, spec.tracked),
        final_full=state,
        block_steps=(np.concatenate(block_hits) if block_hits
                     else np.empty(0, dtype=np.int64)),
        sites=np.concatenate(kept_sites) if kept_sites else None,
        uniforms=np.concatenate(kept_unis) if kept_unis else None,
    )


def _run_nested(spec: ChainSpec, state: np.ndarray, T: int, gen, sums,
                record_configs: bool, all_block: bool) -> Trajectory:
    """Nested block sampling: every block step runs inner single-site sweeps
    over the block's vertices with the rest of the configuration frozen.
    One (site, uniform) pair is consumed per outer step to keep the outer
    draw pattern aligned with exact mode; inner sweeps draw extra."""
    model = spec.model
    fmask = _tracked_mask(model.n, spec.tracked)
    tables = block_tables(spec)  # members list; 2^B never enumerated here
    inner = spec.resolved_inner_steps
    in_tracked = np.zeros(model.n, dtype=bool)
    in_tracked[list(spec.tracked)] = True
    pos_of = np.full(model.n, -1, dtype=np.int64)
    pos_of[list(spec.tracked)] = np.arange(spec.k, dtype=np.int64)
    configs = None
    if record_configs:
        configs = np.empty((T + 1, model.n), dtype=np.int8)
        configs[0] = state
    block_hits = []
    sums[0] = int(state[list(spec.tracked)].sum())
    dummy = np.zeros(1, dtype=np.int64)
    for t in range(T):
        if all_block:
            j = int(gen.integers(0, spec.k))
            gen.random()  # outer uniform, unused in nested mode
            is_block = True
        else:
            v = int(gen.integers(0, model.n))
            u = gen.random()
            is_block = bool(in_tracked[v])
            if not is_block:
                s = _kernels.run_glauber(
                    state, model.adj_indptr, model.adj_indices,
                    model.adj_weights, model.field, fmask,
                    np.array([v], dtype=np.int64), np.array([u]), dummy, False)
                sums[t + 1] = s
                if record_configs:
                    configs[t + 1] = state
                continue
            j = int(pos_of[v])
        block = tables.members[j]
        inner_sites = block[gen.integers(0, block.shape[0], size=inner)]
        inner_unis = gen.random(inner)
        s = _kernels.run_glauber(
            state, model.adj_indptr, model.adj_indices, model.adj_weights,
            model.field, fmask, np.ascontiguousarray(inner_sites),
            inner_unis, dummy, False)
        sums[t + 1] = s
        block_hits.append(t + 1)
        if record_configs:
            configs[t + 1] = state
    return Trajectory(
        variant=spec.variant, tracked=spec.tracked, sums=sums,
        final_tracked=tracked_restriction(state, spec.tracked),
        final_full=state, configs=configs,
        block_steps=np.asarray(block_hits, dtype=np.int64),
    )


def _run_nested_coupled(spec: ChainSpec, start_hi, start_lo, T: int, gen,
                        dist, sums_hi, sums_lo, violations: int,
                        record: bool) -> CoupledTrajectory:
    """Coupling of two nested tracked-set chains: both see the same tracked
    site and the same inner-sweep draws. Each inner update is a
    shared-uniform single-site step, so coordinatewise order is preserved
    just as in exact mode. Distance and sums are reported on the tracked
    set; starts must be full configurations (the frozen untracked spins are
    part of the nested chain's state)."""
    model = spec.model
    tables = block_tables(spec)
    inner = spec.resolved_inner_steps
    fmask = _tracked_mask(model.n, spec.tracked)
    tr = np.asarray(spec.tracked, dtype=np.int64)
    hi = _coerce_state(spec, start_hi, "full")
    lo = _coerce_state(spec, start_lo, "full")
    dist[0] = int(np.sum(hi[tr] != lo[tr]))
    sums_hi[0] = int(hi[tr].sum())
    sums_lo[0] = int(lo[tr].sum())
    dummy = np.zeros(1, dtype=np.int64)
    for t in range(T):
        j = int(gen.integers(0, spec.k))
        gen.random()  # outer uniform, kept for draw-pattern alignment
        block = tables.members[j]
        inner_sites = np.ascontiguousarray(
            block[gen.integers(0, block.shape[0], size=inner)])
        inner_unis = gen.random(inner)
        _, viol = _kernels.run_glauber_coupled(
            hi, lo, model.adj_indptr, model.adj_indices, model.adj_weights,
            model.field, fmask, inner_sites, inner_unis,
            dummy, dummy, dummy, False)
        violations += viol
        if record:
            dist[t + 1] = int(np.sum(hi[tr] != lo[tr]))
            sums_hi[t + 1] = int(hi[tr].sum())
            sums_lo[t + 1] = int(lo[tr].sum())
    if not record:
        dist, sums_hi, sums_lo = dist[:1], sums_hi[:1], sums_lo[:1]
    return CoupledTrajectory(spec.variant, spec.tracked, dist, sums_hi,
                             sums_lo, violations,
                             tracked_restriction(hi, spec.tracked),
                             tracked_restriction(lo, spec.tracked))


def run_coupled(
    spec: ChainSpec,
    start_hi,
    start_lo,
    T: int,
    rng: RngStream,
    record: bool = True,
    draws: tuple[np.ndarray, np.ndarray] | None = None,
) -> CoupledTrajectory:
    """Monotone coupling: both chains see the same site and uniform each
    step. Supported for plain chains and tracked-set chains (exact block
    marginals, or nested inner sweeps above the enumeration limit)."""
    if T < 0:
        raise ValueError("T must be nonnegative")
    gen = rng.generator()
    model = spec.model
    dist = np.zeros(T + 1, dtype=np.int64)
    sums_hi = np.zeros(T + 1, dtype=np.int64)
    sums_lo = np.zeros(T + 1, dtype=np.int64)
    violations = 0

    if spec.variant == "plain":
        hi = _coerce_state(spec, start_hi, "full")
        lo = _coerce_state(spec, start_lo, "full")
        fmask = _tracked_mask(model.n, spec.tracked)
        tr = list(spec.tracked)
        dist[0] = int(np.sum(hi != lo))
        sums_hi[0] = int(hi[tr].sum())
        sums_lo[0] = int(lo[tr].sum())
        for off, sites, unis in _chunks(T, draws, gen, model.n):
            c = sites.shape[0]
            _, viol = _kernels.run_glauber_coupled(
                hi, lo, model.adj_indptr, model.adj_indices,
                model.adj_weights, model.field, fmask, sites, unis,
                dist[off + 1: off + 1 + c], sums_hi[off + 1: off + 1 + c],
                sums_lo[off + 1: off + 1 + c], record)
            violations += viol
        if not record:
            dist, sums_hi, sums_lo = dist[:1], sums_hi[:1], sums_lo[:1]
        return CoupledTrajectory(spec.variant, spec.tracked, dist, sums_hi,
                                 sums_lo, violations, hi, lo)

    if spec.variant != "z_chain":
        raise ValueError(
            "coupling is implemented for plain chains and tracked-set chains"
        )
    if spec.resolved_mode == "nested":
        return _run_nested_coupled(spec, start_hi, start_lo, T, gen, dist,
                                   sums_hi, sums_lo, violations, record)
    tables = block_tables(spec)
    scratch = tables.scratch()
    z_hi = _coerce_state(spec, start_hi, "tracked")
    z_lo = _coerce_state(spec, start_lo, "tracked")
    dist[0] = int(np.sum(z_hi != z_lo))
    sums_hi[0] = int(z_hi.sum())
    sums_lo[0] = int(z_lo.sum())
    for off, sites, unis in _chunks(T, draws, gen, spec.k):
        c = sites.shape[0]
        _, viol = _kernels.run_block_marginal_coupled(
            z_hi, z_lo, *tables.marginal_args(), sites, unis, scratch,
            dist[off + 1: off + 1 + c], sums_hi[off + 1: off + 1 + c],
            sums_lo[off + 1: off + 1 + c], record)
        violations += viol
    if not record:
        dist, sums_hi, sums_lo = dist[:1], sums_hi[:1], sums_lo[:1]
    return CoupledTrajectory(spec.variant, spec.tracked, dist, sums_hi,
                             sums_lo, violations, z_hi, z_lo)


def psi_discrepancy(model: IsingModel, tracked, u: int, eta_hi, eta_lo) -> float:
    """Sensitivity of one tracked site's conditional magnetization to a
    single boundary spin: the two boundaries must differ at exactly one
    tracked vertex v != u, with the first input at +1 there. The untracked
    set is integrated out exactly. Nonnegative for ferromagnetic couplings,
    and at most 2."""
    tracked = tuple(sorted(int(x) for x in tracked))
    if u not in tracked:
        raise ValueError("target vertex must belong to the tracked set")
    k = len(tracked)
    a = np.asarray(eta_hi, dtype=np.int8)
    b = np.asarray(eta_lo, dtype=np.int8)
    if a.shape != (k,) or b.shape != (k,):
        raise ValueError(f"boundaries must be tracked vectors of length {k}")
    if not (np.all(np.abs(a) == 1) and np.all(np.abs(b) == 1)):
        raise ValueError("spins must be +-1")
    diff = np.flatnonzero(a != b)
    j_u = tracked.index(u)
    if diff.shape != (1,) or diff[0] == j_u:
        raise ValueError(
            "boundaries must differ at exactly one tracked vertex other than the target"
        )
    if a[diff[0]] != 1:
        raise ValueError("first boundary must hold +1 at the differing vertex")

    spec = ChainSpec(model=model, tracked=tracked, variant="z_chain",
                     block_mode="exact")
    tables = block_tables(spec)
    B = tables.block_size
    lo_ptr, hi_ptr = tables.intra_ptr[j_u], tables.intra_ptr[j_u + 1]
    clo, chi = tables.cross_ptr[j_u], tables.cross_ptr[j_u + 1]
    bits = ((np.arange(1 << B, dtype=np.int64)[:, None] >> np.arange(B)) & 1)
    S = bits.astype(np.float64) * 2.0 - 1.0

    def magnetization(bnd: np.ndarray) -> float:
        e = S @ tables.fields[j_u]
        for kk in range(lo_ptr, hi_ptr):
            e = e + tables.intra_w[kk] * S[:, tables.intra_a[kk]] * S[:, tables.intra_b[kk]]
        for kk in range(clo, chi):
            e = e + tables.cross_w[kk] * S[:, tables.cross_a[kk]] * float(bnd[tables.cross_tpos[kk]])
        w = np.exp(e - e.max())
        return float((w @ S[:, 0]) / w.sum())

    return magnetization(a) - magnetization(b)


@dataclass(frozen=True)
class StatisticBound:
    """Certified TV lower bound from a scalar statistic: point estimate of
    P_plus(S > r) - P_star(S > r), a one-sided confidence radius, and the
    resulting bound max(0, point - radius)."""

    point: float
    radius: float
    lower: float
    confidence: float
    threshold: float
    n_plus: int
    n_star: int
    star_exact: bool


def statistic_tv_lower_bound(
    plus_samples, star, r: float, confidence: float = 0.99
) -> StatisticBound:
    """Lower-bound the TV distance between the time-T law and the target law
    through the exceedance event {S > r}.

    ``star`` is either an array of samples or an exact statistic law — a
    DistributionTable (spin-sum exceedance computed exactly) or a
    (values, probs) pair. Confidence uses one-sided Hoeffding bounds, split
    across the two sample sets when both are empirical.
    """
    if not 0.5 < confidence < 1.0:
        raise ValueError("confidence must be in (0.5, 1)")
    plus = np.asarray(plus_samples, dtype=np.float64)
    if plus.size == 0:
        raise ValueError("need at least one sample of the evolved statistic")
    delta = 1.0 - confidence
    p_plus = float(np.mean(plus > r))

    if isinstance(star, DistributionTable):
        p_star, n_star, exact = statistic_exceedance(star, r), 0, True
    elif isinstance(star, tuple) and len(star) == 2:
        vals = np.asarray(star[0], dtype=np.float64)
        probs = np.asarray(star[1], dtype=np.float64)
        if vals.shape != probs.shape:
            raise ValueError("values and probabilities must align")
        p_star, n_star, exact = float(probs[vals > r].sum()), 0, True
    else:
        s = np.asarray(star, dtype=np.float64)
        if s.size == 0:
            raise ValueError("need at least one stationary sample")
        p_star, n_star, exact = float(np.mean(s > r)), int(s.size), False

    if exact:
        radius = math.sqrt(math.log(1.0 / delta) / (2.0 * plus.size))
    else:
        d = delta / 2.0
        radius = (math.sqrt(math.log(1.0 / d) / (2.0 * plus.size))
                  + math.sqrt(math.log(1.0 / d) / (2.0 * n_star)))
    point = p_plus - p_star
    return StatisticBound(
        point=point, radius=radius, lower=max(0.0, point - radius),
        confidence=confidence, threshold=float(r),
        n_plus=int(plus.size), n_star=n_star, star_exact=exact,
    )
