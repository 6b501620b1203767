"""Acceptance criteria.

Ten end-to-end properties, one test each, printed as a single PASS/FAIL
line (run pytest with -s, the repo default). Each criterion carries a
runtime ceiling that is asserted, not just hoped for. Monte-Carlo criteria
use fixed seeds, so every line is deterministic.
"""

import itertools
import math
import time

import numpy as np
import pytest

from mixlab.checks import (
    CheckParams,
    check_censoring,
    check_magnetization_concavity,
    check_subadditivity,
    select_low_cov_subset,
)
from mixlab.cli import main as cli_main
from mixlab.dynamics import ChainSpec, run_coupled
from mixlab.exact import (
    dirichlet_form,
    exact_mixing_time,
    gibbs_distribution,
    glauber_transition_matrix,
    moments,
    spectral_data,
    spin_sum_values,
)
from mixlab.model import IsingModel, all_minus, all_plus
from mixlab.pipeline import PipelineParams, lower_bound_pipeline, pipeline_sanity_bound
from mixlab.rng import RngStream

from oracles import free_spin_mixing_time


def _report(num: int, ok: bool, detail: str) -> None:
    print(f"[criterion {num:2d}] {'PASS' if ok else 'FAIL'} — {detail}",
          flush=True)


def _random_model(gen, n_max: int, j_max: float = 2.0,
                  with_field: bool = False) -> IsingModel:
    n = int(gen.integers(2, n_max + 1))
    edges = [(u, v, float(gen.uniform(0.0, j_max)))
             for u in range(n) for v in range(u + 1, n) if gen.random() < 0.6]
    field = gen.uniform(0.0, 1.0, size=n) if with_field and gen.random() < 0.5 else None
    return IsingModel(n, edges, field)


# --------------------------------------------------------------------------


def test_criterion_1_exact_engine():
    t0 = time.perf_counter()
    gen = np.random.default_rng(1001)
    worst_norm = worst_balance = 0.0
    for _ in range(100):
        m = _random_model(gen, 8, with_field=True)
        dist = gibbs_distribution(m)
        worst_norm = max(worst_norm, abs(float(dist.probs.sum()) - 1.0))
        tm = glauber_transition_matrix(m)
        worst_balance = max(worst_balance, tm.balance_residual)
    worst_cov = 0.0
    for j in (0.1, 0.5, 1.0):
        _, cov = moments(gibbs_distribution(IsingModel(2, [(0, 1, j)])))
        worst_cov = max(worst_cov, abs(cov[0, 1] - math.tanh(j)))
    elapsed = time.perf_counter() - t0
    ok = worst_norm < 1e-12 and worst_balance < 1e-10 and worst_cov < 1e-12
    _report(1, ok, f"norm dev {worst_norm:.2e}, balance {worst_balance:.2e}, "
                   f"edge-cov dev {worst_cov:.2e}, {elapsed:.1f}s")
    assert worst_norm < 1e-12
    assert worst_balance < 1e-10
    assert worst_cov < 1e-12
    assert elapsed < 10.0


def test_criterion_2_free_spectrum():
    t0 = time.perf_counter()
    worst_gap = worst_resid = 0.0
    for n in range(2, 11):
        tm = glauber_transition_matrix(IsingModel(n, []))
        sd = spectral_data(tm)
        worst_gap = max(worst_gap, abs(sd.gap - 1.0 / n))
        f = sd.second_eigenfunction
        resid = float(np.max(np.abs(tm.matrix @ f - (1.0 - 1.0 / n) * f)))
        worst_resid = max(worst_resid, resid)
    elapsed = time.perf_counter() - t0
    ok = worst_gap < 1e-9 and worst_resid < 1e-8
    _report(2, ok, f"gap dev {worst_gap:.2e}, eigenfunction residual "
                   f"{worst_resid:.2e} over n=2..10, {elapsed:.1f}s")
    assert worst_gap < 1e-9
    assert worst_resid < 1e-8
    assert elapsed < 30.0


def _criterion_corpus():
    gen = np.random.default_rng(1003)
    return [_random_model(gen, 5) for _ in range(50)]


def test_criterion_3_relaxation_lower_bound():
    t0 = time.perf_counter()
    worst_margin = math.inf
    asym = 0
    for m in _criterion_corpus():
        sd = spectral_data(glauber_transition_matrix(m))
        bound = math.log(2.0) * (1.0 / sd.gap - 1.0)
        t_plus = exact_mixing_time(m, all_plus(m.n))
        t_minus = exact_mixing_time(m, all_minus(m.n))
        worst_margin = min(worst_margin, t_plus - bound)
        asym += int(t_plus != t_minus)
    elapsed = time.perf_counter() - t0
    ok = worst_margin >= 0.0 and asym == 0
    _report(3, ok, f"min(t_mix - spectral bound) {worst_margin:.3f}, "
                   f"start-symmetry violations {asym}/50, {elapsed:.1f}s")
    assert worst_margin >= 0.0
    assert asym == 0
    assert elapsed < 60.0


def test_criterion_4_variance_energy_bound():
    t0 = time.perf_counter()
    worst_var = worst_energy = -math.inf
    for m in _criterion_corpus():
        tm = glauber_transition_matrix(m)
        sd = spectral_data(tm)
        _, cov = moments(tm.pi)
        var_s = float(cov.sum())
        energy = dirichlet_form(tm, spin_sum_values(m.n).astype(np.float64))
        worst_var = max(worst_var, var_s - energy / sd.gap)
        worst_energy = max(worst_energy, energy)
    # equality witness: no couplings, n = 4
    tm = glauber_transition_matrix(IsingModel(4, []))
    sd = spectral_data(tm)
    _, cov = moments(tm.pi)
    witness = (abs(float(cov.sum()) - 4.0), abs(dirichlet_form(
        tm, spin_sum_values(4).astype(np.float64)) - 1.0),
        abs(1.0 / sd.gap - 4.0))
    elapsed = time.perf_counter() - t0
    ok = (worst_var <= 1e-9 and worst_energy <= 2.0 + 1e-12
          and max(witness) < 1e-9)
    _report(4, ok, f"max(Var - E/gap) {worst_var:.2e}, max E(S) "
                   f"{worst_energy:.6f} <= 2, witness devs "
                   f"{max(witness):.2e}, {elapsed:.1f}s")
    assert worst_var <= 1e-9
    assert worst_energy <= 2.0 + 1e-12
    assert max(witness) < 1e-9
    assert elapsed < 60.0


def test_criterion_5_subset_selection():
    t0 = time.perf_counter()
    gen = np.random.default_rng(1005)
    checked = 0
    worst = -math.inf
    for trial in range(100):
        n = int(gen.integers(2, 11))
        raw = gen.uniform(0.0, 1.0, size=(n, n))
        C = (raw + raw.T) / 2.0
        np.fill_diagonal(C, 0.0)
        for k in range(1, n + 1):
            subset, info = select_low_cov_subset(C, k, RngStream(trial * 32 + k))
            assert len(subset) == k == len(set(subset))
            worst = max(worst, info["subset_sum"] - info["bound"])
            checked += 1
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-9
    _report(5, ok, f"{checked} (matrix, k) selections verified, max "
                   f"overshoot {worst:.2e}, {elapsed:.1f}s")
    assert worst <= 1e-9
    assert elapsed < 5.0


def _connected_graphs(n: int):
    """All connected labeled graphs on n vertices, as edge-pair tuples."""
    pairs = list(itertools.combinations(range(n), 2))
    out = []
    for bits in range(1 << len(pairs)):
        chosen = [pairs[i] for i in range(len(pairs)) if bits >> i & 1]
        adj = {v: set() for v in range(n)}
        for u, v in chosen:
            adj[u].add(v)
            adj[v].add(u)
        seen, stack = {0}, [0]
        while stack:
            for w in adj[stack.pop()]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        if len(seen) == n:
            out.append(tuple(chosen))
    return out


def test_criterion_6_concavity_and_subadditivity():
    t0 = time.perf_counter()
    gen = np.random.default_rng(1006)
    # concavity of every site magnetization over random nonnegative fields
    concavity_worst = -math.inf
    concavity_bad = 0
    for trial in range(12):
        m = _random_model(gen, 4)
        grid = [gen.uniform(0.0, 1.0, size=m.n) for _ in range(3)]
        rep = check_magnetization_concavity(m, CheckParams(), RngStream(trial),
                                            grid=grid)
        concavity_worst = max(concavity_worst, rep.details["largest_estimate"])
        concavity_bad += int(rep.verdict != "pass")
    # conditioning on several plus-vertices is subadditive, exhaustively
    sub_checked = 0
    sub_bad = 0
    for n in (2, 3, 4):
        for edge_pairs in _connected_graphs(n):
            edges = [(u, v, float(gen.uniform(0.0, 2.0))) for u, v in edge_pairs]
            m = IsingModel(n, edges)
            for u in range(n):
                others = [v for v in range(n) if v != u]
                for size in range(1, min(3, len(others)) + 1):
                    for targets in itertools.combinations(others, size):
                        rep = check_subadditivity(m, CheckParams(),
                                                  RngStream(sub_checked),
                                                  u=u, targets=targets)
                        sub_bad += int(rep.verdict != "pass")
                        sub_checked += 1
    elapsed = time.perf_counter() - t0
    ok = (concavity_bad == 0 and concavity_worst <= 1e-6 and sub_bad == 0)
    _report(6, ok, f"concavity worst FD estimate {concavity_worst:.2e} over 12 "
                   f"models, subadditivity {sub_checked} cases "
                   f"({sub_bad} bad), {elapsed:.1f}s")
    assert concavity_bad == 0
    assert concavity_worst <= 1e-6
    assert sub_bad == 0
    assert elapsed < 300.0


def test_criterion_7_censoring_exhaustive():
    t0 = time.perf_counter()
    expected_pairs = sum(3 ** L * 2 ** L for L in range(5))
    results = []
    for edges in ([(0, 1), (1, 2)], [(0, 1), (1, 2), (0, 2)]):
        for j in (0.3, 1.0):
            m = IsingModel(3, [(u, v, j) for u, v in edges])
            rep = check_censoring(m, CheckParams(censoring_len=4), RngStream(0))
            results.append(rep)
            assert rep.details["pairs_checked"] == expected_pairs
    bad = sum(r.verdict != "pass" for r in results)
    worst = min(min(r.details["domination_margin"] for r in results),
                min(r.details["tv_ordering_margin"] for r in results))
    elapsed = time.perf_counter() - t0
    # margins are exact-arithmetic zeros on equality cases (subsequence ==
    # sequence), so "holds exactly" means within float round-off
    ok = bad == 0 and worst >= -1e-10
    _report(7, ok, f"4 instances x {expected_pairs} sequence/subsequence "
                   f"pairs, min margin {worst:.2e} (exact up to round-off), "
                   f"{elapsed:.1f}s")
    assert bad == 0
    assert worst >= -1e-10
    assert elapsed < 120.0


def test_criterion_8_coupled_chain_statistics():
    t0 = time.perf_counter()
    n, T, N = 64, 1000, 10_000
    spec = ChainSpec(model=IsingModel(n, []), tracked=tuple(range(n)),
                     variant="z_chain")
    stream = RngStream(2024).named_child("coupling-criterion")
    bound = n * (1.0 - 1.0 / n) ** np.arange(T + 1)
    sums_sum = np.zeros(T + 1)
    sums_sq = np.zeros(T + 1)
    dev_sum = dev_sq = 0.0
    dec_sum = p_sum = pq_sum = 0.0
    violations = 0
    for i in range(N):
        ct = run_coupled(spec, all_plus(n), all_minus(n), T, stream.child(i))
        violations += ct.order_violations
        d = ct.dist.astype(np.float64)
        s = ct.sums_hi.astype(np.float64)
        sums_sum += s
        sums_sq += s * s
        # one scalar per replica: time-averaged deviation from the decay
        # bound (replicas are independent, so this pools the whole curve
        # into a single valid z-statistic)
        dev = float((s - bound).mean())
        dev_sum += dev
        dev_sq += dev * dev
        dec = d[:-1] - d[1:]
        p = d[:-1] / n
        dec_sum += dec.sum()
        p_sum += p.sum()
        pq_sum += (p * (1.0 - p)).sum()
    # per-step contraction factor: every step coalesces a disagreeing site
    # with probability dist/n, so pooled decrements are a sum of Bernoullis
    # with known means; |z| <= 3 pins the factor inside 1 - 1/n +- 3 sigma
    z_factor = (dec_sum - p_sum) / math.sqrt(pq_sum)
    mean_s = sums_sum / N
    var_s = (sums_sq - N * mean_s ** 2) / (N - 1)
    se = np.sqrt(var_s / N)
    # mean decay at the 3-sigma level, stated simultaneously over the whole
    # curve: (a) the pooled per-replica deviation z must clear -3; (b) each
    # of the T pointwise means must clear the Bonferroni-adjusted band that
    # makes "every t" a single 3-sigma statement (a raw 3*SE band at 1000
    # correlated points is expected to be crossed by pure noise even when
    # the mean identity holds exactly, as it does here)
    dev_mean = dev_sum / N
    dev_var = (dev_sq - N * dev_mean ** 2) / (N - 1)
    z_decay = dev_mean / math.sqrt(dev_var / N)
    from scipy.stats import norm
    z_simul = float(norm.isf(norm.sf(3.0) / T))
    with np.errstate(invalid="ignore"):
        z_t = (mean_s - bound) / se
    z_t_min = float(np.nanmin(z_t[1:]))
    start_exact = mean_s[0] == float(n)  # t = 0: all-plus, zero variance
    max_var = float(var_s.max())
    elapsed = time.perf_counter() - t0
    ok = (violations == 0 and abs(z_factor) <= 3.0 and z_decay >= -3.0
          and z_t_min >= -z_simul and start_exact and max_var <= 16.0 * n)
    _report(8, ok, f"{N} replicas x {T} steps: order violations {violations} "
                   f"of {N * T:.0e} coupled steps, contraction z "
                   f"{z_factor:+.2f}, decay z {z_decay:+.2f} (pointwise min "
                   f"{z_t_min:+.2f} vs simultaneous band {-z_simul:.2f}), "
                   f"max Var(S) {max_var:.1f} <= {16 * n}, {elapsed:.1f}s")
    assert violations == 0
    assert abs(z_factor) <= 3.0
    assert z_decay >= -3.0
    assert z_t_min >= -z_simul
    assert start_exact
    assert max_var <= 16.0 * n
    assert elapsed < 300.0


def test_criterion_9_pipeline_quantitative_probe():
    t0 = time.perf_counter()
    # quantitative probe: free chain on 256 sites, tracking every site
    n = 256
    target = int(0.15 * n * math.log(n))
    res = lower_bound_pipeline(IsingModel(n, []), PipelineParams(k=n),
                               seed=2024)
    truth = free_spin_mixing_time(n)
    probe_ok = (res.branch == "statistic" and res.strict
                and res.confidence == 0.99
                and res.certified_lower_bound == float(target)
                and res.tv_bound is not None and res.tv_bound >= 0.25
                and res.certified_lower_bound <= truth)
    # certificates never exceed the exact mixing time on enumerable models
    gen = np.random.default_rng(1009)
    bad = 0
    cases = 0
    for trial in range(12):
        m = _random_model(gen, 10, j_max=1.5)
        if m.n < 4:
            continue
        k = max(2, m.n // 3)
        r = lower_bound_pipeline(m, PipelineParams(k=k, replicas=400),
                                 seed=3000 + trial)
        san = pipeline_sanity_bound(m, r)
        bad += int(not san["consistent"])
        cases += 1
    elapsed = time.perf_counter() - t0
    ok = probe_ok and bad == 0
    _report(9, ok, f"free chain n={n}: certified t_mix > "
                   f"{res.certified_lower_bound:.0f} (truth {truth}, TV bound "
                   f"{res.tv_bound:.3f}); {cases} random models consistent "
                   f"({bad} bad), {elapsed:.1f}s")
    assert probe_ok
    assert bad == 0
    assert elapsed < 600.0


def test_criterion_10_byte_reproducibility(tmp_path):
    t0 = time.perf_counter()
    check_args = ["check", "--model", "gen:cycle:n=4,J=0.8",
                  "--suite", "all", "--seed", "7", "--replicas", "150"]
    pipe_args = ["pipeline", "--model", "gen:cycle:n=10,J=0.1", "--k", "5",
                 "--seed", "7", "--replicas", "300", "--matrix-limit", "8"]
    blobs = []
    for tag, extra in [("a", ["--workers", "1"]), ("b", ["--workers", "4"]),
                       ("c", ["--workers", "1"])]:
        out = tmp_path / f"check_{tag}.json"
        assert cli_main([*check_args, "--out", str(out), *extra]) == 0
        blobs.append(out.read_bytes())
    pipes = []
    for tag in ("a", "b"):
        out = tmp_path / f"pipe_{tag}.json"
        assert cli_main([*pipe_args, "--out", str(out)]) == 0
        pipes.append(out.read_bytes())
    elapsed = time.perf_counter() - t0
    ok = blobs[0] == blobs[1] == blobs[2] and pipes[0] == pipes[1]
    _report(10, ok, f"check report {len(blobs[0])} bytes identical across "
                    f"workers 1/4 and rerun; pipeline report "
                    f"{len(pipes[0])} bytes identical on rerun, {elapsed:.1f}s")
    assert blobs[0] == blobs[1]
    assert blobs[0] == blobs[2]
    assert pipes[0] == pipes[1]
