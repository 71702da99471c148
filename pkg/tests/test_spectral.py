import numpy as np
import pytest
from hypothesis import given, strategies as st

from symcon.irr import build_decomposition
from symcon.spectral import (
    EigenGroup,
    cluster_split,
    group_eigenvalues,
    principal_cosines,
    same_subspace,
    transverse_spectrum,
)
from symcon.symmetry import orbital_partition

from helpers import planted_network

S2 = np.sqrt(2.0)


def spectrum_of(net):
    d = build_decomposition(net, orbital_partition(net))
    return d, transverse_spectrum(d)


def test_group_eigenvalues_runs():
    w = np.array([-1.0, 0.0, 1e-9, 2e-9, 1.0])
    runs = group_eigenvalues(w, 1e-6)
    assert [(r.start, r.stop) for r in runs] == [(0, 1), (1, 4), (4, 5)]
    assert group_eigenvalues(np.zeros(0), 1e-6) == []


def test_principal_cosines():
    U = np.eye(3)[:, :2]
    V = np.eye(3)[:, [1]]
    np.testing.assert_allclose(principal_cosines(U, V), [1.0])
    assert same_subspace(U, U[:, ::-1])
    assert not same_subspace(U, np.eye(3)[:, 1:])


def test_eight_node_groups(net8):
    _, s = spectrum_of(net8)
    lams = [g.lam for g in s.groups]
    np.testing.assert_allclose(lams, [-S2, 0, S2], atol=1e-12)
    assert [g.mu for g in s.groups] == [1, 3, 1]
    assert [s.groups[i].lam for i in s.lambda_perp] == pytest.approx([0, S2], abs=1e-12)
    zero, root2 = s.groups[1], s.groups[2]
    assert zero.cluster_dims(3) == [2, 0, 1] and zero.residual_dim == 0
    assert root2.cluster_dims(3) == [0, 0, 0] and root2.residual_dim == 1
    # the intertwined eigenvector is, up to sign, (-1,-1,1,1)/(2 sqrt 2) on C1 and (-1,1)/2 on C2
    v = root2.omega_basis[:, 0] * np.sign(root2.omega_basis[4, 0]) * -1
    np.testing.assert_allclose(v, [-S2 / 4, -S2 / 4, S2 / 4, S2 / 4, -0.5, 0.5, 0, 0], atol=1e-12)


def test_cluster_parts_have_exact_support(net48):
    _, s = spectrum_of(net48)
    for g in s.groups:
        for j, Q in g.cluster_parts.items():
            off = np.setdiff1d(np.arange(48), s.clusters[j])
            assert np.abs(Q[off]).max(initial=0.0) == 0.0
            np.testing.assert_allclose(Q.T @ Q, np.eye(Q.shape[1]), atol=1e-12)
            # still inside the eigenspace
            U = g.omega_basis
            assert np.linalg.norm(Q - U @ (U.T @ Q), 2) < 1e-7
        total = sum(g.cluster_dims(3)) + g.residual_dim
        assert total == g.mu


def test_stable_basis_and_report(net8):
    _, s = spectrum_of(net8)
    assert s.stable_basis().shape == (5, 1)
    rep = s.report()
    assert rep["sum_mu_lambda_perp"] == 4
    assert [g["non_stable"] for g in rep["groups"]] == [False, True, True]


def test_no_transverse_dimension():
    from symcon.netmodel import ControlledNetwork

    d, s = spectrum_of(ControlledNetwork([[0.0, 1.0], [1.0, 0.0]], [[1.0], [0.0]]))
    assert d.a_perp.shape == (0, 0)
    assert s.groups == () and s.lambda_perp == ()


def test_split_of_group_supported_on_one_cluster():
    U = np.zeros((4, 1))
    U[0, 0], U[1, 0] = 1 / S2, -1 / S2
    g = cluster_split(EigenGroup(0.0, 1, np.ones((1, 1)), U), ((0, 1), (2, 3)))
    assert g.cluster_dims(2) == [1, 0] and g.residual_dim == 0


@given(st.integers(0, 100_000), st.integers(2, 18), st.booleans())
def test_groups_reassemble_the_transverse_block(seed, n, weighted):
    net, _ = planted_network(np.random.default_rng(seed), n, weighted=weighted)
    d, s = spectrum_of(net)
    if not s.groups:
        return
    V = np.hstack([g.perp_basis for g in s.groups])
    L = np.repeat([g.lam for g in s.groups], [g.mu for g in s.groups])
    np.testing.assert_allclose(V @ np.diag(L) @ V.T, d.a_perp, atol=1e-8 * max(1, np.abs(d.a_perp).max()))
    for g in s.groups:
        assert sum(g.cluster_dims(len(s.clusters))) + g.residual_dim == g.mu
        assert np.abs(d.t_parallel @ g.omega_basis).max() < 1e-12
