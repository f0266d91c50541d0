import warnings

import numpy as np
import numpy.testing as npt
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ldg import directors as D
from ldg import jets as J
from ldg import model
from ldg import residuals as RS
from ldg import tensor as qt
from ldg.hedgehog import solve_hedgehog


def _random_fields(seed, n=300):
    rng = np.random.default_rng(seed)
    pts = rng.uniform(-1, 1, (n, 3))
    s = J.TrigField.random(rng, 3, 0.4, 1.1, offset=1.0).jet(pts)
    f = J.TrigField.random(rng, 3, 0.8, 0.9, offset=0.7).jet(pts)
    g = J.TrigField.random(rng, 3, 0.8, 0.9).jet(pts)
    return pts, s, f, g


def _random_qjet(seed, n=200):
    rng = np.random.default_rng(seed)
    pts = rng.uniform(-1, 1, (n, 3))
    comps = [J.TrigField.random(rng, 3, 0.6, 1.3).jet(pts) for _ in range(5)]
    return J.QJet(np.stack([c.value for c in comps], -1), np.stack([c.grad for c in comps], -2),
                  np.stack([c.hess for c in comps], -3))


def test_constant_uniaxial_field_is_critical():
    t = 0.4
    pts = np.zeros((4, 3))
    q = J.qjet_from_uniaxial(J.ScalarJet.constant(model.s_plus(t), (4,)),
                             D.constant_director_jet(pts, [0.0, 0.6, 0.8]))
    assert np.max(np.abs(RS.el_residual_isotropic(q, t))) < 1e-12
    assert np.max(np.abs(RS.el_residual_anisotropic(q, t, 2.0))) < 1e-12


@given(st.integers(0, 10**6), st.floats(-2, 1.1))
def test_basis_and_tensor_forms_agree(seed, t):
    q = _random_qjet(seed, 40)
    npt.assert_allclose(RS.el_residual_basis(q, t), RS.el_residual_isotropic(q, t), atol=1e-12)


def test_anisotropic_rejects_degenerate_elastic_factor():
    with pytest.raises(ValueError):
        RS.el_residual_anisotropic(_random_qjet(0, 3), 0.0, -1.5)


@given(st.integers(0, 10**6))
def test_m_decomposition_identity(seed):
    _, s, f, g = _random_fields(seed, 100)
    n = J.director_from_angles(f, g)
    md = RS.m_decomposition(s, n, 0.5)
    assert md.max_cross_cosine() < 1e-12
    q = J.qjet_from_uniaxial(s, n)
    full = qt.to_matrix(RS.el_residual_isotropic(q, 0.5))
    assert np.max(np.abs(md.total - full)) < 1e-10


def test_sn_residual_n_component_vanishes_for_hedgehog():
    prof = solve_hedgehog(0.0, N=801)
    pts = np.random.default_rng(2).normal(size=(50, 3))
    pts *= (np.random.default_rng(3).uniform(1, 5, 50) / np.linalg.norm(pts, axis=1))[:, None]
    r = np.linalg.norm(pts, axis=1)
    sp = prof.spline()
    s = J.radial_jet(pts, sp(r), sp(r, 1), sp(r, 2))
    n = D.radial_director_jet(pts)
    res = RS.sn_residual(s, n, 0.0)
    assert np.max(np.abs(np.einsum("ni,ni->n", res.vector, n.value))) < 1e-12


def test_sn_residual_rejects_non_unit():
    pts = np.ones((2, 3))
    n = D.constant_director_jet(pts, [0.0, 0.0, 1.0])
    n.value = 2 * n.value
    with pytest.raises(RS.NotUnitDirector):
        RS.sn_residual(J.ScalarJet.constant(1.0, (2,)), n, 0.0)


def test_extra_equation_frozen_values():
    rng = np.random.default_rng(7)
    pts = rng.uniform(0.2, 2, (200, 3))
    for family, bound in (("radial", 1e-10), ("escape", 1e-8), ("constant", 0.0)):
        n = D.director_jets(family, pts)[0]
        assert np.max(np.linalg.norm(RS.extra_equation_residual(n), axis=(-2, -1))) <= bound
    # helical, unit pitch: 2 p p + n n - I = p p - e_z e_z, Frobenius norm sqrt(2)
    n = D.director_jets("helical", pts)[0]
    norms = np.linalg.norm(RS.extra_equation_residual(n), axis=(-2, -1))
    npt.assert_allclose(norms, np.sqrt(2), atol=1e-12)


def test_extra_equation_sign_matters():
    pts = np.random.default_rng(8).uniform(0.2, 2, (100, 3))
    n = D.director_jets("radial", pts)[0]
    wrong = RS.extra_equation_residual(n, flip_sign=True)
    assert np.min(np.linalg.norm(wrong, axis=(-2, -1))) > 0.1


def test_sfg_constraint_for_doubled_azimuth():
    pts = np.random.default_rng(9).uniform(0.3, 1.5, (100, 3))
    f, g = D.hedgehog_angle_jets(pts)
    s = J.ScalarJet.constant(0.8, (100,))
    res = RS.sfg_residual(s, f, g.scale(2.0), 0.0)
    r2 = np.sum(pts**2, axis=1)
    npt.assert_allclose(res[:, 4], 0.8 * (1 - 4) / r2, rtol=1e-10)
    npt.assert_allclose(res[:, 3], 0.0, atol=1e-12)


def test_sfg_zero_order_parameter_is_trivial_solution():
    pts = np.random.default_rng(10).uniform(0.3, 1.5, (50, 3))
    f, g = D.hedgehog_angle_jets(pts)
    assert np.max(np.abs(RS.sfg_residual(J.ScalarJet.constant(0.0, (50,)), f, g, 0.3))) == 0


def test_sfg_rejects_axis_nodes():
    pts = np.array([[0.0, 0.0, 1.0], [1.0, 0.0, 0.0]])
    f, g = D.constant_angle_jets(pts)
    with pytest.raises(ValueError, match="polar axis"):
        RS.sfg_residual(J.ScalarJet.constant(1.0, (2,)), f, g, 0.0, points=pts)


def test_sb_residual_reduces_to_sn_and_warns():
    pts, s, f, g = _random_fields(11, 50)
    frame = J.frame_jets_from_angles(f, g)
    zero = J.ScalarJet.constant(0.0, (50,))
    with pytest.warns(RuntimeWarning, match="extra equation"):
        sb = RS.sb_residual(s, zero, frame, 0.2)
    npt.assert_allclose(sb.s, RS.sn_residual(s, frame[0], 0.2).scalar, atol=1e-12)
    assert np.all(sb.beta == 0)


def test_sb_residual_trivial_state():
    t = 0.3
    pts = np.zeros((3, 3))
    f, g = D.constant_angle_jets(pts)
    frame = J.frame_jets_from_angles(f, g)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        sb = RS.sb_residual(J.ScalarJet.constant(model.s_plus(t), (3,)),
                            J.ScalarJet.constant(0.0, (3,)), frame, t)
    assert np.max(np.abs(sb.s)) < 1e-12 and np.max(np.abs(sb.beta)) == 0


@given(st.integers(0, 10**6))
def test_beta_squared_identity(seed):
    rng = np.random.default_rng(seed)
    pts, s, f, g = _random_fields(seed, 60)
    beta = J.TrigField.random(rng, 3, 0.5, 1.2).jet(pts)
    d = RS.beta_squared_identity_defect(s, beta, J.frame_jets_from_angles(f, g), 0.5)
    assert np.max(np.abs(d)) < 1e-8


@given(st.integers(0, 10**6))
def test_projection_reassembles(seed):
    rng = np.random.default_rng(seed)
    _, _, f, g = _random_fields(seed, 40)
    n, m, p = J.frame_jets_from_angles(f, g)
    T = qt.to_matrix(rng.normal(size=(40, 5)))
    pc = RS.project_v123(T, n.value, m.value, p.value)
    assert np.max(np.abs(pc.reassemble() - T)) < 1e-13
    total = pc.part(1) + pc.part(2) + pc.part(3)
    assert np.max(np.abs(total - T)) < 1e-13
    # the three pieces are mutually orthogonal
    for a, b in ((1, 2), (1, 3), (2, 3)):
        assert abs(np.sum(pc.part(a) * pc.part(b))) < 1e-11


def test_anisotropic_closed_form_matches_direct():
    _, s, f, g = _random_fields(12, 100)
    n = J.director_from_angles(f, g)
    closed = RS.anisotropic_st_term(s, n)
    npt.assert_allclose(closed.total, RS.anisotropic_st_direct(s, n), atol=1e-10)
    assert np.max(np.abs(np.einsum("ni,ni->n", closed.J, n.value))) < 1e-10


@pytest.mark.parametrize("L2", [-0.9, 0.0, 1.0, 3.0])
def test_separated_coefficients_radial(L2):
    dirs = qt.random_unit_vectors(np.random.default_rng(13), 12)
    sc = RS.separated_coefficients(D.hedgehog_angle_jets, L2, dirs)
    assert np.max(np.abs(sc.A[1:])) < 1e-10
    npt.assert_allclose(sc.A[0], model.elastic_factor(L2), atol=1e-8)


def test_separated_coefficients_tilted_break_structure():
    dirs = qt.random_unit_vectors(np.random.default_rng(14), 12)
    sc = RS.separated_coefficients(D.tilted_angle_jets, 1.0, dirs)
    assert np.max(np.abs(sc.A[1:])) > 1e-3


def test_residual_report_round_trip(tmp_path):
    res = np.arange(12.0).reshape(3, 4)
    rep = RS.residual_report("demo", res)
    RS.write_report(tmp_path / "r.json", [rep])
    assert (tmp_path / "r.json").read_text().count("demo") == 1
