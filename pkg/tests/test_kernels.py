"""Backend parity: the compiled kernels and the pure-Python reference must
produce bit-identical trajectories from identical pre-drawn randomness."""

import json
import math
import os
import subprocess
import sys

import numpy as np
import pytest

from mixlab._kernels import BACKEND, _ref
from mixlab.dynamics import ChainSpec, block_tables
from mixlab.model import IsingModel
from mixlab.rng import RngStream

try:
    from mixlab._kernels import _core
except ImportError:  # pragma: no cover - compiled extension always built in CI
    _core = None

needs_compiled = pytest.mark.skipif(_core is None, reason="compiled backend not built")


def _model():
    rng = np.random.default_rng(7)
    n = 6
    edges = []
    for u in range(n):
        for v in range(u + 1, n):
            if rng.random() < 0.5:
                edges.append((u, v, float(rng.uniform(0.0, 1.5))))
    field = rng.uniform(0.0, 0.5, size=n)
    return IsingModel(n, edges, field=field)


def _draws(T, m, seed):
    gen = np.random.default_rng(seed)
    return (gen.integers(0, m, size=T, dtype=np.int64),
            gen.random(T, dtype=np.float64))


def test_reference_heat_bath_probability():
    for m in (-3.0, -0.4, 0.0, 0.7, 2.5):
        assert _ref._heat_bath_p(m) == pytest.approx(
            1.0 / (1.0 + math.exp(-2.0 * m)), abs=1e-15
        )


def test_reference_sums_beyond_int8_range():
    # running sums over >127 tracked sites must not wrap: a += with an int8
    # element would silently promote the Python accumulator to int8
    n = 256
    model = IsingModel(n, [])
    sites, unis = _draws(4000, n, 21)
    fmask = np.ones(n, dtype=np.int8)
    spins = np.ones(n, dtype=np.int8)
    sums = np.zeros(4000, dtype=np.int64)
    final = _ref.run_glauber(spins, model.adj_indptr, model.adj_indices,
                             model.adj_weights, model.field, fmask,
                             sites, unis, sums, True)
    assert int(final) == int(spins.astype(np.int64).sum())
    assert sums[0] in (n, n - 2)
    assert sums.max() <= n
    # replaying the draws reproduces every recorded prefix sum exactly
    replay = np.ones(n, dtype=np.int64)
    for t in range(4000):
        state = replay.copy()
        v = int(sites[t])
        p = _ref._heat_bath_p(float(model.field[v]))
        replay[v] = 1 if unis[t] < p else -1
        del state
        assert replay.sum() == sums[t]


@needs_compiled
def test_large_sum_parity():
    n = 256
    model = IsingModel(n, [])
    sites, unis = _draws(3000, n, 22)
    fmask = np.ones(n, dtype=np.int8)
    outs = []
    for impl in (_ref, _core):
        spins = np.ones(n, dtype=np.int8)
        sums = np.zeros(3000, dtype=np.int64)
        final = impl.run_glauber(spins, model.adj_indptr, model.adj_indices,
                                 model.adj_weights, model.field, fmask,
                                 sites, unis, sums, True)
        outs.append((int(final), spins.copy(), sums.copy()))
    assert outs[0][0] == outs[1][0]
    assert np.array_equal(outs[0][1], outs[1][1])
    assert np.array_equal(outs[0][2], outs[1][2])


@needs_compiled
def test_single_site_kernel_parity():
    model = _model()
    T = 5000
    sites, unis = _draws(T, model.n, 11)
    fmask = np.ones(model.n, dtype=np.int8)
    outs = []
    for impl in (_ref, _core):
        spins = np.ones(model.n, dtype=np.int8)
        sums = np.zeros(T, dtype=np.int64)
        final = impl.run_glauber(
            spins, model.adj_indptr, model.adj_indices, model.adj_weights,
            model.field, fmask, sites, unis, sums, True)
        outs.append((int(final), spins.copy(), sums.copy()))
    assert outs[0][0] == outs[1][0]
    assert np.array_equal(outs[0][1], outs[1][1])
    assert np.array_equal(outs[0][2], outs[1][2])


@needs_compiled
def test_coupled_kernel_parity_and_order():
    model = _model()
    T = 4000
    sites, unis = _draws(T, model.n, 12)
    fmask = np.ones(model.n, dtype=np.int8)
    outs = []
    for impl in (_ref, _core):
        hi = np.ones(model.n, dtype=np.int8)
        lo = -np.ones(model.n, dtype=np.int8)
        dist = np.zeros(T, dtype=np.int64)
        sh = np.zeros(T, dtype=np.int64)
        sl = np.zeros(T, dtype=np.int64)
        d, viol = impl.run_glauber_coupled(
            hi, lo, model.adj_indptr, model.adj_indices, model.adj_weights,
            model.field, fmask, sites, unis, dist, sh, sl, True)
        assert viol == 0  # ordered start stays ordered under the coupling
        outs.append((int(d), hi.copy(), lo.copy(), dist.copy(), sh.copy(), sl.copy()))
    for a, b in zip(outs[0], outs[1]):
        assert np.array_equal(a, b)
    # ordered coupling: hi sum never below lo sum
    assert np.all(outs[0][4] >= outs[0][5])


@needs_compiled
def test_block_marginal_kernel_parity():
    model = _model()
    spec = ChainSpec(model, tracked=(0, 2, 4), variant="z_chain", block_mode="exact")
    tables = block_tables(spec)
    T = 1500
    sites, unis = _draws(T, spec.k, 13)
    outs = []
    for impl in (_ref, _core):
        z = np.ones(spec.k, dtype=np.int8)
        sums = np.zeros(T, dtype=np.int64)
        final = impl.run_block_marginal(
            z, *tables.marginal_args(), sites, unis, tables.scratch(), sums, True)
        outs.append((int(final), z.copy(), sums.copy()))
    assert outs[0][0] == outs[1][0]
    assert np.array_equal(outs[0][1], outs[1][1])
    assert np.array_equal(outs[0][2], outs[1][2])


@needs_compiled
def test_block_marginal_coupled_kernel_parity():
    model = _model()
    spec = ChainSpec(model, tracked=(1, 3, 5), variant="z_chain", block_mode="exact")
    tables = block_tables(spec)
    T = 1500
    sites, unis = _draws(T, spec.k, 14)
    outs = []
    for impl in (_ref, _core):
        z_hi = np.ones(spec.k, dtype=np.int8)
        z_lo = -np.ones(spec.k, dtype=np.int8)
        dist = np.zeros(T, dtype=np.int64)
        sh = np.zeros(T, dtype=np.int64)
        sl = np.zeros(T, dtype=np.int64)
        d, viol = impl.run_block_marginal_coupled(
            z_hi, z_lo, *tables.marginal_args(), sites, unis,
            tables.scratch(), dist, sh, sl, True)
        assert viol == 0
        outs.append((int(d), z_hi.copy(), z_lo.copy(), dist.copy(), sh.copy(), sl.copy()))
    for a, b in zip(outs[0], outs[1]):
        assert np.array_equal(a, b)


@needs_compiled
def test_block_full_kernel_parity():
    model = _model()
    spec = ChainSpec(model, tracked=(0, 3), variant="accelerated", block_mode="exact")
    tables = block_tables(spec)
    T = 800
    sites, unis = _draws(T, spec.k, 15)
    fmask = np.zeros(model.n, dtype=np.int8)
    fmask[list(spec.tracked)] = 1
    outs = []
    for impl in (_ref, _core):
        spins = np.ones(model.n, dtype=np.int8)
        sums = np.zeros(T, dtype=np.int64)
        final = impl.run_block_full(
            spins, *tables.full_args(), fmask, sites, unis,
            tables.scratch(), sums, True)
        outs.append((int(final), spins.copy(), sums.copy()))
    assert outs[0][0] == outs[1][0]
    assert np.array_equal(outs[0][1], outs[1][1])
    assert np.array_equal(outs[0][2], outs[1][2])


_SUBPROC_SCRIPT = r"""
import json
import numpy as np
from mixlab._kernels import BACKEND
from mixlab.dynamics import ChainSpec, run_chain
from mixlab.model import IsingModel, all_plus
from mixlab.rng import RngStream

m = IsingModel(6, [(0, 1, 0.7), (1, 2, 0.4), (2, 3, 1.1), (3, 4, 0.2),
                   (4, 5, 0.9), (0, 5, 0.5), (1, 4, 0.3)],
               field=np.array([0.1, 0.0, 0.2, 0.0, 0.05, 0.0]))
out = {"backend": BACKEND}
for variant, tracked in (("plain", ()), ("accelerated", (0, 2, 4)),
                         ("z_chain", (0, 2, 4))):
    spec = ChainSpec(m, tracked=tracked, variant=variant)
    traj = run_chain(spec, all_plus(6), 4000, RngStream(99).named_child(variant))
    out[variant] = {
        "sums": int(traj.sums.sum()),
        "last": int(traj.sums[-1]),
        "final": [int(x) for x in traj.final_tracked],
    }
print(json.dumps(out))
"""


@needs_compiled
def test_full_driver_parity_across_backends():
    """Whole driver (chunking, block tables, rng) gives identical paths under
    both backends for every chain variant."""
    results = {}
    for backend in ("compiled", "python"):
        env = dict(os.environ, MIXLAB_BACKEND=backend)
        proc = subprocess.run(
            [sys.executable, "-c", _SUBPROC_SCRIPT], env=env,
            capture_output=True, text=True, check=True)
        results[backend] = json.loads(proc.stdout)
    assert results["compiled"]["backend"] == "compiled"
    assert results["python"]["backend"] == "python"
    for variant in ("plain", "accelerated", "z_chain"):
        assert results["compiled"][variant] == results["python"][variant]


def test_backend_env_rejects_unknown():
    env = dict(os.environ, MIXLAB_BACKEND="fortran")
    proc = subprocess.run(
        [sys.executable, "-c", "import mixlab._kernels"],
        env=env, capture_output=True, text=True)
    assert proc.returncode != 0
    assert "MIXLAB_BACKEND" in proc.stderr


def test_active_backend_exported():
    assert BACKEND in ("compiled", "python")
