import numpy as np
import pytest

from ldg import model
from ldg import tensor as qt
from ldg.flow import (DescentFailure, ShellProblem, minimize_gradient_flow, radial_shell_setup,
                      shell_oracle)


def test_energy_gradient_matches_finite_differences():
    grid, q0 = radial_shell_setup(0.0, (8, 6, 8), 0.5, 2.0)
    prob = ShellProblem(grid, 0.0, L2=0.5)
    rng = np.random.default_rng(0)
    q = q0 + 0.05 * rng.normal(size=q0.shape)
    d = rng.normal(size=q0.shape)
    g = prob.energy_gradient(q).reshape(q.shape)
    h = 1e-6
    fd = (prob.energy(q + h * d) - prob.energy(q - h * d)) / (2 * h)
    assert np.sum(g * d) == pytest.approx(fd, rel=1e-6)


def test_descent_is_monotone():
    t = 0.0
    grid, q0 = radial_shell_setup(t, (16, 8, 16), 0.5, 4.0)
    with pytest.warns(RuntimeWarning, match="gradient flow stopped"):
        state = minimize_gradient_flow(q0, grid, t, tol=1e-12, max_steps=15)
    assert state.monotone and not state.converged
    assert state.energies[-1] < state.energies[0]
    assert len(state.energies) == state.iterations + 1


def test_coarse_grid_stalls_at_its_floor():
    t = 0.0
    grid, q0 = radial_shell_setup(t, (16, 8, 16), 0.5, 4.0)
    with pytest.warns(RuntimeWarning, match="no descent direction"):
        state = minimize_gradient_flow(q0, grid, t, tol=1e-12, max_steps=500)
    assert state.stalled and state.monotone
    assert state.residual < state.residuals[0]


def test_l2_metric_descends():
    t = 0.0
    grid, q0 = radial_shell_setup(t, (12, 8, 12), 0.5, 3.0)
    with pytest.warns(RuntimeWarning):
        state = minimize_gradient_flow(q0, grid, t, tol=1e-12, max_steps=10, metric="l2")
    assert state.monotone and state.energies[-1] < state.energies[0]


def test_bad_arguments():
    grid, q0 = radial_shell_setup(0.0, (8, 6, 8), 0.5, 2.0)
    with pytest.raises(ValueError):
        minimize_gradient_flow(q0, grid, 0.0, dt=0.0)
    with pytest.raises(ValueError):
        minimize_gradient_flow(q0, grid, 0.0, metric="newton")


def test_constant_data_is_already_critical():
    t = 0.3
    grid, q0 = radial_shell_setup(t, (8, 6, 8), 0.5, 2.0)
    q = np.broadcast_to(qt.uniaxial_compose(model.s_plus(t), qt.E_Z), q0.shape).copy()
    state = minimize_gradient_flow(q, grid, t, tol=1e-8, max_steps=5)
    assert state.converged and state.iterations == 0


def test_shell_oracle_boundary_values():
    prof = shell_oracle(0.0, 0.5, 10.0, nodes=801)
    assert prof(0.5) == pytest.approx(model.s_plus(0.0))
    assert prof(10.0) == pytest.approx(model.s_plus(0.0))


def test_invalid_elastic_factor():
    grid, _ = radial_shell_setup(0.0, (8, 6, 8), 0.5, 2.0)
    with pytest.raises(ValueError):
        ShellProblem(grid, 0.0, L2=-2.0)


def test_descent_failure_is_an_error_type():
    assert issubclass(DescentFailure, RuntimeError)
