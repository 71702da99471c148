import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from symcon.errors import SearchBudgetExceeded
from symcon.netmodel import ControlledNetwork
from symcon.symmetry import (
    OrbitalPartition,
    equitable_refinement,
    indicator_matrix,
    is_automorphism,
    orbital_partition,
    verify_partition,
)

from helpers import brute_force_orbits, planted_network

FRUCHT = [(0, 1), (0, 6), (0, 7), (1, 2), (1, 7), (2, 3), (2, 8), (3, 4), (3, 9), (4, 5), (4, 9),
          (5, 6), (5, 10), (6, 10), (7, 11), (8, 9), (8, 11), (10, 11)]
PETERSEN = [(0, 1), (0, 4), (0, 5), (1, 2), (1, 6), (2, 3), (2, 7), (3, 4), (3, 8), (4, 9), (5, 7),
            (5, 8), (6, 8), (6, 9), (7, 9)]


def graph(n, edges, inputs=None):
    A = np.zeros((n, n))
    for i, j in edges:
        A[i, j] = A[j, i] = 1.0
    B = np.zeros((n, 0)) if inputs is None else np.asarray(inputs, dtype=float).reshape(n, -1)
    return ControlledNetwork(A, B)


def test_eight_node_orbits_match_exhaustive_search(net8):
    p = orbital_partition(net8)
    assert p.clusters == ((0, 1, 2, 3), (4, 5), (6, 7))
    assert list(p.clusters) == brute_force_orbits(net8)
    assert verify_partition(net8, p).ok


def test_generators_are_automorphisms(net48):
    p = orbital_partition(net48)
    assert p.generators
    assert all(is_automorphism(net48, g) for g in p.generators)


def test_regular_graph_without_symmetry_gives_singletons():
    # cubic, so refinement alone never splits it; only the search can
    net = graph(12, FRUCHT)
    assert np.unique(equitable_refinement(net)).size == 1
    assert orbital_partition(net).n_clusters == 12


def test_vertex_transitive_graph_gives_one_orbit():
    assert orbital_partition(graph(10, PETERSEN)).clusters == (tuple(range(10)),)
    cycle = [(i, (i + 1) % 9) for i in range(9)]
    assert orbital_partition(graph(9, cycle)).n_clusters == 1


def test_inputs_break_symmetry():
    cycle = [(i, (i + 1) % 6) for i in range(6)]
    p = orbital_partition(graph(6, cycle, inputs=[1, 0, 0, 0, 0, 0]))
    # reflection through node 1 survives
    assert p.clusters == ((0,), (1, 5), (2, 4), (3,))


def test_ignoring_inputs_coarsens_the_partition(net8):
    with_b = orbital_partition(net8)
    without_b = orbital_partition(net8, use_inputs=False)
    lab = without_b.cluster_of
    assert all(len({lab[i] for i in c}) == 1 for c in with_b.clusters)
    assert without_b.n_clusters <= with_b.n_clusters


def test_search_budget_is_enforced(net48):
    with pytest.raises(SearchBudgetExceeded):
        orbital_partition(net48, max_backtrack=0)


def test_verify_partition_witnesses(net8):
    coarse = OrbitalPartition(((0, 1, 2, 3), (4, 5, 6, 7)), 8)
    chk = verify_partition(net8, coarse)
    assert not chk.ok
    assert not is_automorphism(net8, chk.witness)
    fine = OrbitalPartition(((0, 1), (2, 3), (4, 5), (6, 7)), 8)
    chk = verify_partition(net8, fine)
    assert not chk and is_automorphism(net8, chk.witness)
    cof = fine.cluster_of
    assert any(cof[i] != cof[chk.witness[i]] for i in range(8))


def test_verify_rejects_bogus_generator(net8):
    p = OrbitalPartition(((0, 1, 2, 3), (4, 5), (6, 7)), 8, generators=[[1, 0, 2, 3, 4, 5, 7, 6]])
    assert not verify_partition(net8, p).ok


def test_partition_validation_and_json():
    with pytest.raises(ValueError):
        OrbitalPartition(((0, 1), (1, 2)), 3)
    with pytest.raises(ValueError):
        OrbitalPartition(((0,),), 2)
    p = OrbitalPartition(((2, 0), (1,)), 3)
    assert p.clusters == ((0, 2), (1,))
    assert p.to_json_dict() == {"clusters": [[1, 3], [2]]}
    np.testing.assert_array_equal(indicator_matrix(p), [[1, 0], [0, 1], [1, 0]])


@settings(max_examples=40)
@given(st.integers(0, 100_000), st.integers(2, 7), st.booleans())
def test_orbits_match_exhaustive_search_on_random_networks(seed, n, weighted):
    net, _ = planted_network(np.random.default_rng(seed), n, weighted=weighted)
    assert list(orbital_partition(net).clusters) == brute_force_orbits(net)


@given(st.integers(0, 100_000), st.integers(2, 16), st.booleans())
def test_planted_symmetry_is_respected(seed, n, weighted):
    net, sigma = planted_network(np.random.default_rng(seed), n, weighted=weighted)
    assert is_automorphism(net, sigma)
    p = orbital_partition(net)
    cof = p.cluster_of
    assert all(cof[i] == cof[sigma[i]] for i in range(n))
    assert verify_partition(net, p).ok


@given(st.integers(0, 100_000), st.integers(2, 16))
def test_orbits_refine_equitable_colouring(seed, n):
    net, _ = planted_network(np.random.default_rng(seed), n, weighted=True)
    colours = equitable_refinement(net)
    for c in orbital_partition(net).clusters:
        assert len({int(colours[i]) for i in c}) == 1
