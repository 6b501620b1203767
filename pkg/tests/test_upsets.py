"""Increasing-event enumeration and stochastic domination."""

import numpy as np
import pytest

from mixlab.errors import CapacityError
from mixlab.exact import (
    DistributionTable,
    gibbs_distribution,
    point_mass,
    sequence_law,
)
from mixlab.model import IsingModel, all_plus
from mixlab.upsets import increasing_event_tables, stochastically_dominates

from oracles import DEDEKIND


def test_increasing_event_counts_match_dedekind():
    for n in range(6):
        ev = increasing_event_tables(n)
        assert ev.shape == (DEDEKIND[n], 1 << n)


def test_events_are_increasing():
    n = 4
    ev = increasing_event_tables(n)
    idx = np.arange(1 << n)
    for v in range(n):
        bit = 1 << v
        base = idx[(idx & bit) == 0]
        # membership never drops when a spin flips up
        assert not np.any(ev[:, base] & ~ev[:, base | bit])


def test_enumeration_capacity():
    with pytest.raises(CapacityError):
        increasing_event_tables(6)


def test_point_masses_dominate_by_order():
    n = 3
    top = point_mass(n, (1 << n) - 1)
    bottom = point_mass(n, 0)
    r = stochastically_dominates(top, bottom)
    assert r.dominates and r.exact
    r2 = stochastically_dominates(bottom, top)
    assert not r2.dominates
    assert r2.margin < -0.9  # the full-cube minus the empty event separates them
    assert r2.worst_event  # a genuine counterexample event is reported


def test_self_domination_margin_zero():
    dist = gibbs_distribution(IsingModel(3, [(0, 1, 1.0)]))
    r = stochastically_dominates(dist, dist)
    assert r.dominates
    assert abs(r.margin) < 1e-15


def test_plus_biased_law_dominates_uniform():
    # one heat-bath sweep from all-plus is plus-biased versus stationary
    m = IsingModel(3, [(0, 1, 0.8), (1, 2, 0.8)])
    law = sequence_law(m, [0, 1, 2], all_plus(3))
    pi = gibbs_distribution(m)
    assert stochastically_dominates(law, pi).dominates
    assert not stochastically_dominates(pi, law).dominates


def test_sampled_regime_flags_inexact():
    n = 6
    probs = np.full(1 << n, 1.0 / (1 << n))
    uni = DistributionTable(n, probs)
    tilted = np.where(np.arange(1 << n) == (1 << n) - 1, 2.0, 1.0)
    tilted = DistributionTable(n, tilted / tilted.sum())
    r = stochastically_dominates(tilted, uni)
    assert r.dominates
    assert not r.exact
    assert r.events_checked > n
    # a pass in the sampled regime is evidence, a fail is a proof:
    r2 = stochastically_dominates(uni, tilted)
    assert not r2.dominates


def test_domination_capacity_and_mismatch():
    a = DistributionTable(13, np.full(1 << 13, 1.0 / (1 << 13)))
    with pytest.raises(CapacityError):
        stochastically_dominates(a, a)
    with pytest.raises(ValueError):
        stochastically_dominates(point_mass(2, 0), point_mass(3, 0))
