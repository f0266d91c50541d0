import warnings

import numpy as np
import numpy.testing as npt
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ldg import jets as J
from ldg import model
from ldg import tensor as qt
from ldg.directors import radial_director_jet


def test_nondimensionalize_unit_case():
    red, xi = model.nondimensionalize(model.MaterialParams(1, 1, 1, 1 + 1 / 27, 1, 1))
    assert red.t == pytest.approx(1.0)
    assert xi == pytest.approx(np.sqrt(27.0))


def test_nondimensionalize_mixed_case():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        red, xi = model.nondimensionalize(model.MaterialParams(1, 2, 3, 2.0, 1.0, 1))
    assert red.t == pytest.approx(81 / 4)
    assert xi == pytest.approx(9 / 2)


def test_reduced_params_validation():
    with pytest.raises(ValueError):
        model.ReducedParams(0.0, L2=-1.5)
    with pytest.warns(UserWarning):
        assert not model.ReducedParams(1.05).nematic


@pytest.mark.parametrize("t, expected", [(1.0, 1.224745), (0.0, 1.837117), (9 / 8, 0.918559)])
def test_s_plus_values(t, expected):
    assert model.s_plus(t) == pytest.approx(expected, abs=1e-6)


def test_s_plus_domain():
    with pytest.raises(ValueError):
        model.s_plus(1.2)


@pytest.mark.parametrize("t", [-2.0, 0.0, 1.0])
def test_psi_vanishes_at_s_plus(t):
    assert abs(model.psi(model.s_plus(t), t)) < 1e-12


def test_psi_frozen_value():
    assert model.psi(1.0, 0.0) == pytest.approx(-np.sqrt(6) + 4 / 3)


def test_coexistence_at_t_one():
    q = qt.uniaxial_compose(model.s_plus(1.0), qt.E_Z)
    assert model.bulk_energy_density(q, 1.0) == pytest.approx(0.0, abs=1e-14)


@pytest.mark.parametrize("t", [1.0, 0.5])
def test_uniaxial_minimum_beats_biaxial(rng, t):
    q = qt.uniaxial_compose(model.s_plus(t), qt.E_Z)
    f0 = model.bulk_energy_density(q, t)
    assert f0 <= 1e-14 if t == 1.0 else f0 < 0
    raw = rng.normal(size=(1000, 5))
    raw *= (qt.norm(q) / np.linalg.norm(raw, axis=1))[:, None]
    biax = raw[qt.biaxiality_measure(raw) > 1e-6]
    assert np.all(model.bulk_energy_density(biax, t) > f0)


@given(st.floats(-3, 3), st.floats(-2, 1.1))
def test_bulk_gradient_on_uniaxial(s, t):
    n = np.array([0.6, 0.0, 0.8])
    expect = qt.project(model.psi(s, t) * (np.outer(n, n) - np.eye(3) / 3))
    npt.assert_allclose(model.bulk_gradient(qt.uniaxial_compose(s, n), t), expect, atol=1e-10)


def test_bulk_gradient_finite_differences(rng):
    h = 1e-5
    for _ in range(100):
        q, t = rng.normal(size=5), rng.uniform(-5, 1.125)
        grad = model.bulk_gradient(q, t)
        fd = np.array([(model.bulk_energy_density(q + h * e, t)
                        - model.bulk_energy_density(q - h * e, t)) / (2 * h) for e in np.eye(5)])
        assert np.linalg.norm(fd - grad) < 1e-7 * np.linalg.norm(grad)


@pytest.mark.parametrize("L2", [0.0, 1.0, -0.5])
def test_hedgehog_elastic_density(L2):
    # s (x x / r^2 - I/3) with constant s at r = 1: |grad Q|^2 / 2 = 2 s^2, |div Q|^2 = 4 s^2
    s = 1.3
    pts = np.array([[1.0, 0.0, 0.0], [0.0, 0.6, 0.8]])
    q = J.qjet_from_uniaxial(J.ScalarJet.constant(s, (2,)), radial_director_jet(pts))
    npt.assert_allclose(model.elastic_energy_density(q.grad, L2), 2 * s**2 * (1 + L2))


def test_restricted_density_reduces_to_bulk():
    t, s = 0.3, model.s_plus(0.3)
    q = qt.uniaxial_compose(s, qt.E_Z)
    assert model.restricted_bulk_density(s, 0.0, t) == pytest.approx(
        model.bulk_energy_density(q, t))
