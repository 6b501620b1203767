"""Model construction, validation, and adjacency bookkeeping."""

import numpy as np
import pytest

from mixlab.model import IsingModel, all_minus, all_plus


def test_basic_construction_and_csr():
    m = IsingModel(4, [(0, 1, 0.5), (2, 1, 1.0), (2, 3, 2.0)])
    assert m.n == 4
    # edges normalised to u < v, input order preserved
    assert m.edges == ((0, 1, 0.5), (1, 2, 1.0), (2, 3, 2.0))
    # CSR: neighbours of 1 are 0 and 2 with the right couplings
    lo, hi = m.adj_indptr[1], m.adj_indptr[2]
    nbrs = list(m.adj_indices[lo:hi])
    ws = list(m.adj_weights[lo:hi])
    assert nbrs == [0, 2]
    assert ws == [0.5, 1.0]
    # arrays are frozen
    with pytest.raises(ValueError):
        m.adj_weights[0] = 9.0


def test_degree_and_isolated_vertices():
    m = IsingModel(5, [(0, 4, 1.0)])
    degs = np.diff(m.adj_indptr)
    assert list(degs) == [1, 0, 0, 0, 1]


@pytest.mark.parametrize(
    "n,edges",
    [
        (3, [(0, 0, 1.0)]),            # self loop
        (3, [(0, 1, 1.0), (1, 0, 2.0)]),  # duplicate edge
        (3, [(0, 1, -0.5)]),           # antiferromagnetic
        (3, [(0, 3, 1.0)]),            # endpoint out of range
        (3, [(0, 1, float("nan"))]),   # non-finite coupling
        (0, []),                       # empty vertex set
    ],
)
def test_invalid_models_rejected(n, edges):
    with pytest.raises(ValueError):
        IsingModel(n, edges)


def test_field_validation_and_with_field():
    m = IsingModel(3, [(0, 1, 1.0)])
    assert not m.has_field
    assert np.all(m.field == 0.0)
    m2 = m.with_field(np.array([0.1, -0.2, 0.0]))
    assert m2.has_field
    assert m2.field[1] == -0.2
    # original untouched
    assert not m.has_field
    with pytest.raises(ValueError):
        m.with_field(np.array([1.0, 2.0]))  # wrong length
    with pytest.raises(ValueError):
        m.with_field(np.array([np.inf, 0.0, 0.0]))


def test_field_array_read_only():
    m = IsingModel(2, [], field=np.array([0.5, 0.5]))
    with pytest.raises(ValueError):
        m.field[0] = 1.0


def test_coupling_matrix_symmetric():
    m = IsingModel(3, [(0, 1, 0.5), (1, 2, 2.0)])
    J = m.coupling_matrix()
    assert J.shape == (3, 3)
    assert J[0, 1] == J[1, 0] == 0.5
    assert J[1, 2] == J[2, 1] == 2.0
    assert J[0, 2] == 0.0
    assert np.all(np.diag(J) == 0.0)


def test_start_configurations():
    from mixlab.model import index_of_spins, spins_from_index

    assert index_of_spins(all_plus(3)) == 0b111
    assert index_of_spins(all_minus(3)) == 0
    assert list(spins_from_index(0b101, 3)) == [1, -1, 1]
    assert index_of_spins(spins_from_index(6, 3)) == 6
