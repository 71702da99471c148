import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm

from symcon.control import ControlPlan, ModalInput, gramian, min_energy_input, place_poles
from symcon.errors import PlacementFailed, SingularGramian
from symcon.irr import build_decomposition
from symcon.sim import rk4
from symcon.spectral import transverse_spectrum
from symcon.symmetry import orbital_partition

from helpers import least_norm_energy, simpson


def gramian_by_quadrature(A, B, tf, panels=10_000):
    return simpson(lambda s: expm(A * s) @ B @ B.T @ expm(A.T * s), 0.0, tf, panels)


def test_gramian_matches_quadrature_on_quotient(net8):
    d = build_decomposition(net8, orbital_partition(net8))
    W = gramian(d.a_parallel, d.b_parallel, 0.0, 5.0)
    Wq = gramian_by_quadrature(d.a_parallel, d.b_parallel, 5.0)
    assert np.abs(W - Wq).max() / np.abs(Wq).max() <= 1e-8
    assert np.abs(W - W.T).max() <= 1e-12


def test_gramian_trivial_cases():
    np.testing.assert_allclose(gramian(np.zeros((1, 1)), np.ones((1, 1)), 0.0, 3.0), [[3.0]])
    np.testing.assert_allclose(gramian([[1.0]], [[1.0]], 1.0, 2.0), [[(np.e ** 2 - 1) / 2]])
    with pytest.raises(SingularGramian):
        gramian(np.eye(2), np.zeros((2, 1)), 0.0, 1.0)
    with pytest.raises(SingularGramian):
        # two identical decoupled modes cannot be steered independently by one input
        gramian(np.eye(2), np.ones((2, 1)), 0.0, 1.0)


def test_scalar_minimum_energy_input_is_analytic():
    u = min_energy_input([[1.0]], [[1.0]], [0.0], [1.0], 1.0)
    W = (np.e ** 2 - 1) / 2
    ts = np.linspace(0, 1, 11)
    np.testing.assert_allclose(u(ts)[:, 0], np.exp(1 - ts) / W, rtol=1e-14)
    # x(1) = int_0^1 e^(1-s) u(s) ds = (e^2 - 1) / (2 W) = 1
    np.testing.assert_allclose(u.energy(), 1 / W, rtol=1e-14)


def test_zero_transfer_gives_zero_input(net8):
    d = build_decomposition(net8, orbital_partition(net8))
    u = min_energy_input(d.a_parallel, d.b_parallel, np.zeros(3), np.zeros(3), 5.0)
    assert np.all(u.coefficients == 0)


def test_rates_are_quotient_eigenvalues(net8):
    d = build_decomposition(net8, orbital_partition(net8))
    u = min_energy_input(d.a_parallel, d.b_parallel, np.zeros(3), [2, 2 * np.sqrt(2), 3 * np.sqrt(2)], 5.0)
    np.testing.assert_allclose(u.rates, [-np.sqrt(6), 0, np.sqrt(6)], atol=1e-12)


@pytest.mark.parametrize("fixture, tf", [("run8", 5.0), ("run48", 1.0)])
def test_transfer_is_exact(request, fixture, tf):
    res = request.getfixturevalue(fixture)
    d, plan = res.decomposition, res.plan
    z0 = d.t_parallel @ plan.x0
    _, Z = rk4(lambda t, z: d.a_parallel @ z + d.b_parallel @ plan.u(t), z0, tf, int(round(tf / 1e-4)))
    zf = plan.target_parallel
    assert np.abs(Z[-1] - zf).max() / np.abs(zf).max() <= 1e-4


@settings(max_examples=20)
@given(st.integers(0, 100_000), st.integers(1, 3))
def test_minimum_energy_beats_discretized_least_norm(seed, K):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((K, K))
    A = 0.5 * (A + A.T)
    B = rng.standard_normal((K, 1))
    z0, zf = rng.standard_normal(K), rng.standard_normal(K)
    try:
        u = min_energy_input(A, B, z0, zf, 1.0)
    except SingularGramian:
        return
    e_opt = u.energy()
    e_disc = least_norm_energy(A, B, z0, zf, 1.0)
    assert e_opt <= e_disc * (1 + 1e-9)
    assert e_disc <= e_opt * 1.005


def test_modal_input_round_trip():
    u = ModalInput(np.array([[1.0, -2.0]]), np.array([-1.0, 0.5]), 2.0)
    v = ModalInput.from_modes(u.modes(), 2.0)
    np.testing.assert_array_equal(v.coefficients, u.coefficients)
    np.testing.assert_allclose(u(0.5), [np.exp(-1.5) - 2 * np.exp(0.75)])


def test_scalar_placement():
    from symcon.spectral import EigenGroup, TransverseSpectrum

    g = EigenGroup(1.0, 1, np.ones((1, 1)), np.ones((1, 1)))
    s = TransverseSpectrum((g,), (0,), 1e-6, ((0,),), 1)
    G = place_poles(np.eye(1), np.eye(1), -2.0, s)
    np.testing.assert_allclose(G, [[3.0]], atol=1e-12)


def test_eight_node_placement(run8):
    d, pl = run8.decomposition, run8.placement
    d_perp = d.t_perp @ run8.selection.d_matrix
    ev = np.linalg.eigvals(d.a_perp - d_perp @ pl.gain)
    np.testing.assert_allclose(np.sort(ev.real), [-2, -2, -2, -2, -np.sqrt(2)], atol=1e-6)
    assert np.abs(ev.imag).max() <= 1e-6
    assert pl.schur_residual <= 1e-12
    U, S = pl.schur_basis, pl.schur_form
    np.testing.assert_allclose(U.T @ U, np.eye(5), atol=1e-12)
    assert np.abs(np.tril(S, -1)).max() == 0.0


def test_placement_keeps_stable_eigenvectors(run48):
    d, s, pl = run48.decomposition, run48.spectrum, run48.placement
    Vs = s.stable_basis()
    np.testing.assert_allclose(pl.gain @ Vs, 0.0, atol=1e-9)
    n_moved = sum(g.mu for g in s.non_stable)
    stable = [g.lam for g in s.groups if g not in s.non_stable for _ in range(g.mu)]
    expected = np.sort(np.r_[np.full(n_moved, -10.0), stable])
    np.testing.assert_allclose(np.sort(pl.certified_spectrum), expected, atol=1e-6)


def test_feedback_has_zero_cluster_sums(run48, rng):
    d, plan = run48.decomposition, run48.plan
    x = rng.standard_normal((48, 5))
    fb = plan.d_matrix @ plan.gain @ d.t_perp @ x
    assert np.abs(d.t_parallel @ fb).max() <= 1e-9 * np.abs(fb).max()


def test_placement_rejects_bad_targets(net8):
    d = build_decomposition(net8, orbital_partition(net8))
    s = transverse_spectrum(d)
    D = np.zeros((8, 1))
    D[0], D[1] = 1, -1
    with pytest.raises(PlacementFailed):
        place_poles(d.a_perp, d.t_perp @ D, 1.0, s)
    with pytest.raises(PlacementFailed):
        place_poles(d.a_perp, d.t_perp @ D, {s.lambda_perp[0]: -2.0}, s)
    with pytest.raises(PlacementFailed):
        place_poles(d.a_perp, d.t_perp @ D, -2.0, s)


def test_distinct_targets_per_group(run8):
    d, s = run8.decomposition, run8.spectrum
    d_perp = d.t_perp @ run8.selection.d_matrix
    zero, root2 = s.lambda_perp
    pl = place_poles(d.a_perp, d_perp, {zero: -3.0, root2: -5.0}, s, full_output=True)
    ev = np.sort(np.linalg.eigvals(d.a_perp - d_perp @ pl.gain).real)
    np.testing.assert_allclose(ev, [-5, -3, -3, -3, -np.sqrt(2)], atol=1e-6)


def test_plan_json_round_trip(run8):
    plan = run8.plan
    back = ControlPlan.from_json(plan.to_json())
    assert back.clusters == plan.clusters
    np.testing.assert_array_equal(back.gain, plan.gain)
    np.testing.assert_array_equal(back.d_matrix, plan.d_matrix)
    np.testing.assert_array_equal(back.u.coefficients, plan.u.coefficients)
    np.testing.assert_array_equal(back.x0, plan.x0)
    assert back.tf == plan.tf
