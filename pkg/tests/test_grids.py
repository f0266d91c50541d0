import json

import numpy as np
import numpy.testing as npt
import pytest

from ldg import directors as D
from ldg import model
from ldg.grids import (CartesianGrid, SphericalGrid, angle_jets, fornberg_weights,
                       grid_from_descriptor, read_field_csv, write_field_csv, write_manifest)


def test_fornberg_weights_second_derivative():
    w = fornberg_weights(0.0, np.array([-1.0, 0.0, 1.0]), 2)
    npt.assert_allclose(w[2], [1, -2, 1], atol=1e-14)


@pytest.mark.parametrize("order", [2, 4])
def test_spherical_laplacian_of_r_squared(order):
    g = SphericalGrid(np.linspace(1, 2, 12), 10, 12, order=order)
    lap = g.laplacian(g.R**2)
    npt.assert_allclose(lap[g.interior], 6.0, atol=1e-10)


def test_spherical_operators_fourth_order_away_from_poles():
    errs = []
    for n in (16, 32):
        g = SphericalGrid(np.linspace(1, 2, n), n, n, order=4)
        x, y, z = g.points.T
        u = x * y + z**2
        m = g.interior.reshape(-1) & (np.abs(np.cos(g.PHI.reshape(-1))) < 0.9)
        L = g.laplacian_operator(polar="edge")
        G = g.gradient_operators(polar="edge")
        errs.append([np.max(np.abs(L @ u - 2)[m]), np.max(np.abs(G[2] @ u - 2 * z)[m])])
    orders = np.log2(np.array(errs[0]) / np.array(errs[1]))
    assert np.all(orders > 3.5)


def test_cartesian_second_order_convergence():
    errs = []
    for n in (12, 24):
        g = CartesianGrid([0, 0, 0], [1, 1, 1], (n, n, n), order=2)
        x, y, z = g.points.T
        u = np.sin(x) * np.cos(y) * np.exp(z)
        lap = g.laplacian(u.reshape(g.shape)).reshape(-1)
        errs.append(np.max(np.abs(lap - (-u))[g.interior.reshape(-1)]))
    assert 1.8 < np.log2(errs[0] / errs[1]) < 2.4


def test_descriptor_round_trip():
    for g in (SphericalGrid(np.geomspace(0.5, 10, 9), 6, 8, order=4),
              CartesianGrid([-1, -1, -1], [1, 2, 3], (7, 8, 9), order=4)):
        h = grid_from_descriptor(json.loads(json.dumps(g.descriptor())))
        npt.assert_allclose(h.points, g.points, atol=1e-14)
        assert h.shape == g.shape


def test_unknown_descriptor_kind():
    with pytest.raises(ValueError):
        grid_from_descriptor({"kind": "torus"})


def test_hedgehog_q_is_smooth_across_seam():
    g = SphericalGrid(np.linspace(0.5, 2, 6), 8, 16)
    s = g.R**2 / (1 + g.R**2) * model.s_plus(0.0)
    q = D.qfield_from_uniaxial(s, D.radial_hedgehog_angles(g))
    # continuity of q across theta = 0: the extrapolated seam value matches the first column
    dtheta = 2 * np.pi / g.n_theta
    last, first = q[:, :, -1], q[:, :, 0]
    again = D.qfield_from_uniaxial(s[:, :, :1], D.AngleField(g.PHI[:, :, :1],
                                                             g.THETA[:, :, -1:] + dtheta))
    npt.assert_allclose(again[:, :, 0], first, atol=1e-12)
    assert np.all(np.isfinite(last))


def test_angle_jets_unwrap_winding():
    g = SphericalGrid(np.linspace(1, 2, 12), 12, 16, order=4)
    f, gg = angle_jets(g, D.radial_hedgehog_angles(g))
    m = g.interior.reshape(-1)
    # grad g = e_theta / (r sin phi)
    rho = np.hypot(g.points[:, 0], g.points[:, 1])
    npt.assert_allclose(np.linalg.norm(gg.grad[m], axis=1), 1 / rho[m], rtol=1e-10)


def test_field_csv_round_trip(tmp_path):
    g = CartesianGrid([0, 0, 0], [1, 1, 1], (6, 6, 6))
    q = np.random.default_rng(0).normal(size=g.shape + (5,))
    write_field_csv(tmp_path / "q.csv", g, {"q": q, "s": q[..., 0]})
    write_manifest(tmp_path / "m.json", g, {"q": "q.csv"})
    cols = read_field_csv(tmp_path / "q.csv")
    npt.assert_array_equal(cols["q_3"], q[..., 2].reshape(-1))
    npt.assert_array_equal(cols["s"], q[..., 0].reshape(-1))
    assert json.loads((tmp_path / "m.json").read_text())["fields"] == {"q": "q.csv"}
