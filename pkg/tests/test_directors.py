import numpy as np
import numpy.testing as npt
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ldg import directors as D
from ldg import jets as J
from ldg.grids import AngleField


def test_frame_of_spherical_angles():
    phi, theta = 0.7, 2.1
    fr = D.frame_from_angles(AngleField(np.array([phi]), np.array([theta])))
    e_r = [np.sin(phi) * np.cos(theta), np.sin(phi) * np.sin(theta), np.cos(phi)]
    e_phi = [np.cos(phi) * np.cos(theta), np.cos(phi) * np.sin(theta), -np.sin(phi)]
    e_theta = [-np.sin(theta), np.cos(theta), 0.0]
    npt.assert_allclose(fr.n[0], e_r)
    npt.assert_allclose(fr.m[0], e_phi)
    npt.assert_allclose(fr.p[0], e_theta, atol=1e-15)
    assert fr.orthonormality_defect() < 1e-15


def test_angle_field_validation():
    with pytest.raises(ValueError):
        AngleField(np.zeros(3), np.zeros(4))
    with pytest.raises(ValueError):
        AngleField(np.array([np.nan]), np.zeros(1))


def test_escape_profile_matches_closed_form():
    prof = D.solve_escape_profile()
    rho = np.linspace(prof.rho_min, 1, 500)
    npt.assert_allclose(prof(rho), D.escape_profile_closed_form(rho), atol=1e-9)
    assert prof.derivatives(np.array([1.0]))[1][0] == pytest.approx(1.0, abs=1e-8)
    assert prof.ode_residual() < 1e-8


@given(st.floats(-1.2, 1.2))
def test_closed_form_solves_ode(psi0):
    rho = np.linspace(0.05, 1, 50)
    h = 1e-6
    psi = D.escape_profile_closed_form(rho, psi0)
    d = (D.escape_profile_closed_form(rho + h, psi0)
         - D.escape_profile_closed_form(rho - h, psi0)) / (2 * h)
    npt.assert_allclose(rho * d, np.cos(psi), atol=1e-7)
    assert D.escape_profile_closed_form(1.0, psi0) == pytest.approx(psi0)


@pytest.mark.parametrize("family", ["radial", "escape", "constant", "helical", "tilted"])
def test_director_jets_are_unit_with_consistent_derivatives(family):
    rng = np.random.default_rng(3)
    pts = rng.uniform(0.3, 0.9, (20, 3))
    n = D.director_jets(family, pts)[0]
    npt.assert_allclose(np.linalg.norm(n.value, axis=1), 1.0, atol=1e-13)
    h = 1e-6
    for k in range(3):
        e = np.eye(3)[k] * h
        fd = (D.director_jets(family, pts + e)[0].value
              - D.director_jets(family, pts - e)[0].value) / (2 * h)
        npt.assert_allclose(n.jac[..., k], fd, atol=1e-7)


def test_radial_director_jet_matches_angle_path():
    pts = np.random.default_rng(5).normal(size=(30, 3))
    a = D.radial_director_jet(pts)
    f, g = D.hedgehog_angle_jets(pts)
    b = J.director_from_angles(f, g)
    npt.assert_allclose(a.value, b.value, atol=1e-13)
    npt.assert_allclose(a.hess, b.hess, atol=1e-10)


def test_unknown_family():
    with pytest.raises(ValueError, match="unknown director family"):
        D.director_jets("vortex", np.zeros((1, 3)))
