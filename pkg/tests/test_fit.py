import warnings

import numpy as np
import numpy.testing as npt
import pytest

from ldg import directors as D
from ldg import jets as J
from ldg import model
from ldg.fit import fit_order_parameter
from ldg.grids import AngleField, CartesianGrid, SphericalGrid
from ldg.hedgehog import solve_hedgehog


def test_constant_director_recovers_s_plus():
    t = 0.2
    grid = CartesianGrid([-1, -1, -1], [1, 1, 1], (10, 10, 10), order=4)
    f, g = D.constant_angle_jets(grid.points)
    sp_ = model.s_plus(t)
    start = np.full(grid.shape, 1.5)
    start[~grid.interior] = sp_
    res = fit_order_parameter(J.director_from_angles(f, g), t, grid,
                              boundary=np.full(grid.shape, sp_), initial=start)
    assert res.residual < 1e-8
    npt.assert_allclose(res.s, sp_, atol=1e-8)


def test_free_boundary_fit_is_well_posed_numerically():
    # every node free: nodes outside the interior enter no equation, yet the solve must not break
    grid = CartesianGrid([-1, -1, -1], [1, 1, 1], (10, 10, 10), order=4)
    f, g = D.constant_angle_jets(grid.points)
    res = fit_order_parameter(J.director_from_angles(f, g), 0.2, grid,
                              initial=np.full(grid.shape, 1.0))
    assert res.converged and np.all(np.isfinite(res.s))
    assert res.residual < 1e-8


def test_radial_director_matches_ode():
    t = 0.0
    prof = solve_hedgehog(t, N=2001)
    grid = SphericalGrid(np.linspace(1, 6, 32), 6, 8, order=4)
    ref = prof(grid.R)
    res = fit_order_parameter(D.radial_director_jet(grid.points), t, grid, boundary=ref,
                              initial=np.full(grid.shape, model.s_plus(t)))
    assert res.converged
    assert np.max(np.abs(res.s - ref) / ref) < 1e-3


def test_escape_director_leaves_a_floor():
    grid = SphericalGrid(np.linspace(0.2, 1, 16), 10, 8, order=4)
    f, g = D.escape_angle_jets(grid.points)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        res = fit_order_parameter(J.director_from_angles(f, g), 0.0, grid,
                                  boundary=np.full(grid.shape, model.s_plus(0.0)))
    assert res.nontrivial_floor(model.s_plus(0.0)) > 0.01


def test_rejects_wrong_shapes_and_types():
    grid = CartesianGrid([0, 0, 0], [1, 1, 1], (6, 6, 6))
    with pytest.raises(ValueError):
        fit_order_parameter(D.radial_director_jet(np.ones((5, 3))), 0.0, grid)
    with pytest.raises(TypeError):
        fit_order_parameter(np.zeros((216, 3)), 0.0, grid)


def test_angle_field_input():
    grid = SphericalGrid(np.linspace(1, 3, 16), 8, 8, order=4)
    angles = D.radial_hedgehog_angles(grid)
    prof = solve_hedgehog(0.0, N=2001)
    res = fit_order_parameter(angles, 0.0, grid, boundary=prof(grid.R))
    assert res.residual < 1e-2
