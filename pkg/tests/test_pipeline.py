"""End-to-end lower-bound pipeline: branch selection, certificates, and
consistency of every certificate against the exact mixing time where the
state space is enumerable."""

import math

import numpy as np
import pytest
from scipy.stats import binom

from mixlab.exact import exact_mixing_time
from mixlab.model import IsingModel, all_plus
from mixlab.pipeline import (
    PipelineParams,
    PipelineResult,
    _binomial_budget,
    lower_bound_pipeline,
    pipeline_sanity_bound,
)

from oracles import free_spin_mixing_time


def complete_graph(n: int, j: float) -> IsingModel:
    return IsingModel(n, [(u, v, j) for u in range(n) for v in range(u + 1, n)])


def ring(n: int, j: float) -> IsingModel:
    return IsingModel(n, [(v, (v + 1) % n, j) for v in range(n)])


# ------------------------------------------------------------- gap branch --


@pytest.mark.parametrize("n,expected_cert,expected_tmix", [
    (8, 290.6893, 304),
    (9, 456.3219, 474),
    (10, 703.9895, 725),
])
def test_gap_branch_complete_graph(n, expected_cert, expected_tmix):
    # strong uniform coupling: relaxation time far above n ln n, so the
    # spectral certificate fires and sits below the exact mixing time
    m = complete_graph(n, 2.0 / n)
    res = lower_bound_pipeline(m, PipelineParams(), seed=5)
    assert res.branch == "gap"
    assert res.strict is False
    assert res.confidence == 1.0
    assert res.certified_lower_bound == pytest.approx(expected_cert, abs=1e-3)
    assert res.details["inv_gap"] >= n * math.log(n)
    san = pipeline_sanity_bound(m, res)
    assert san["consistent"] is True
    assert san["exact_t_mix_plus"] == expected_tmix


def test_gap_branch_certificate_formula():
    m = complete_graph(8, 0.25)
    res = lower_bound_pipeline(m, PipelineParams(), seed=5)
    inv_gap = res.details["inv_gap"]
    assert res.certified_lower_bound == pytest.approx(
        math.log(2.0) * (inv_gap - 1.0), rel=1e-12)


# ------------------------------------------------------- statistic branch --


def test_statistic_branch_free_spins_exact_sides():
    # no couplings: exact covariance and exact projected stationary law;
    # the certificate is deterministic given the seed
    m = IsingModel(12, [])
    res = lower_bound_pipeline(
        m, PipelineParams(k=6, replicas=600, matrix_limit=8), seed=7)
    assert res.branch == "statistic"
    assert res.details["gap_branch_skipped"] == "state space exceeds matrix limit"
    assert res.details["covariance_exact"] is True
    assert res.details["stationary_exact"] is True
    assert res.strict is True
    assert res.inconclusive is False
    assert res.certified_lower_bound == 4.0
    assert res.constants["T"] == 4
    assert res.constants["T0"] == 5
    assert res.constants["t_star"] == 4
    assert res.constants["binomial_tail"] == 0.0
    assert res.tv_bound == pytest.approx(0.4119746371707178, rel=1e-9)
    # certificate sits strictly below the exact mixing time (birth-death)
    assert res.certified_lower_bound < free_spin_mixing_time(12)
    # replica split and recorded calibration series
    assert res.details["calibration_replicas"] == 300
    assert res.details["certification_replicas"] == 300
    rows = res.series["s_calibration_mean"]["rows"]
    assert len(rows) == res.constants["t_star"] + 1
    assert rows[0][1] == pytest.approx(6.0)  # all-plus start on 6 tracked sites


def test_statistic_branch_weak_ring():
    m = ring(12, 0.1)
    res = lower_bound_pipeline(
        m, PipelineParams(k=6, replicas=600, matrix_limit=8), seed=8)
    assert res.branch == "statistic"
    assert res.strict is True
    assert res.certified_lower_bound == 4.0
    assert res.tv_bound == pytest.approx(0.43678786285213883, rel=1e-9)
    assert res.covariance_sum == res.details["selection"]["subset_sum"]


def test_statistic_branch_sanity_against_exact():
    # n small enough to evaluate the gap branch and the exact mixing time;
    # weak coupling keeps the relaxation time below n ln n, so the pipeline
    # falls through to the statistic branch
    m = ring(10, 0.1)
    res = lower_bound_pipeline(m, PipelineParams(k=5, replicas=600), seed=9)
    assert res.branch == "statistic"
    assert "gap" in res.details and res.details["inv_gap"] < 10 * math.log(10)
    assert res.strict is True
    assert res.certified_lower_bound == 3.0
    san = pipeline_sanity_bound(m, res)
    assert san["consistent"] is True
    assert san["exact_t_mix_plus"] == 19


def test_target_time_override():
    m = ring(12, 0.1)
    res = lower_bound_pipeline(
        m, PipelineParams(k=6, replicas=600, matrix_limit=8, target_time=2),
        seed=8)
    assert res.constants["T"] == 2
    assert res.constants["T0"] == 3
    assert res.certified_lower_bound == 2.0
    assert res.strict is True
    assert res.tv_bound == pytest.approx(0.5868752979986638, rel=1e-9)


def test_statistic_branch_sampled_sides_large_free_chain():
    # beyond the enumeration limit everything is sampled: covariance,
    # subset, and the stationary side (burned-in chains, conservatively
    # biased); with all sites tracked the block chain is the full chain
    m = IsingModel(256, [])
    res = lower_bound_pipeline(
        m, PipelineParams(k=256, replicas=600, stationary_samples=400),
        seed=12)
    assert res.branch == "statistic"
    assert res.details["covariance_exact"] is False
    assert res.details["stationary_exact"] is False
    assert res.k == 256 and len(res.subset) == 256
    # tracked fraction 1 makes the hit-count budget exact: T0 = T + 1
    assert res.constants["T"] == int(0.15 * 256 * math.log(256))
    assert res.constants["T"] == 212
    assert res.constants["T0"] == 213
    assert res.constants["binomial_tail"] == 0.0
    assert res.strict is True
    assert res.certified_lower_bound == 212.0
    assert res.tv_bound == pytest.approx(0.7909387352164463, rel=1e-9)
    # the certificate is far below the true mixing time of the free chain
    assert free_spin_mixing_time(256) > 600


# ------------------------------------------------------- degenerate paths --


def test_single_vertex_degenerate():
    res = lower_bound_pipeline(IsingModel(1, [], field=[0.3]),
                               PipelineParams(), seed=10)
    assert res.degenerate is True
    assert res.certified_lower_bound == 0.0
    assert res.k == 1 and res.subset == (0,)
    assert res.details["reason"] == "single-vertex model"


def test_default_subset_size_too_small_is_degenerate():
    # floor(sqrt(8)/ln 8) = 1: too small for a two-sided statistic
    res = lower_bound_pipeline(IsingModel(8, []), PipelineParams(), seed=9)
    assert res.degenerate is True
    assert res.k == 1
    assert "below 2" in res.details["reason"]


def test_subset_size_exceeding_n_raises():
    with pytest.raises(ValueError, match="exceeds"):
        lower_bound_pipeline(IsingModel(4, []), PipelineParams(k=9), seed=0)


def test_asymptotic_constants_inconclusive_at_desk_scale():
    m = IsingModel(12, [])
    res = lower_bound_pipeline(
        m, PipelineParams(k=6, use_asymptotic_constants=True, matrix_limit=8),
        seed=11)
    assert res.inconclusive is True
    assert res.certified_lower_bound == 0.0
    assert res.constants == {"T": -470, "T0": -115, "asymptotic_c1": 40.0,
                             "asymptotic_c0": 20.0, "asymptotic_constants": True}
    assert res.details["reason"] == (
        "asymptotic constants nonpositive at this size")


# ------------------------------------------------------------ hit budget --


def test_binomial_budget_properties():
    for T, p in [(20, 0.5), (100, 0.25), (7, 0.9)]:
        T0, tail = _binomial_budget(T, p, 1e-4)
        assert tail <= 1e-4
        assert tail == pytest.approx(float(binom.sf(T0 - 1, T, p)), rel=1e-12)
        if T0 > 0:
            assert float(binom.sf(T0 - 2, T, p)) > 1e-4


def test_binomial_budget_certain_hits():
    T0, tail = _binomial_budget(10, 1.0, 1e-4)
    assert T0 == 11
    assert tail == 0.0


def test_result_determinism():
    m = ring(12, 0.1)
    p = PipelineParams(k=6, replicas=400, matrix_limit=8)
    a = lower_bound_pipeline(m, p, seed=21)
    b = lower_bound_pipeline(m, p, seed=21)
    assert a == b
    c = lower_bound_pipeline(m, p, seed=22)
    assert c.tv_bound != a.tv_bound
