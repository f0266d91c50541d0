import json
import warnings

import numpy as np
import numpy.testing as npt
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ldg import hedgehog as H
from ldg import model
from ldg.euler import euler_ode_exponents


@pytest.fixture(scope="module")
def base():
    return H.solve_hedgehog(1.0)


def test_isotropic_battery(base):
    assert base.converged and base.iterations < 15
    assert abs(base.s[-1] - np.sqrt(1.5)) < 1e-9
    assert abs(H.near_origin_exponent(base) - 2.0) < 0.05
    assert H.quadratic_coefficient(base) > 0
    assert np.all(base.s[1:] > 0)


def test_refinement_order():
    o = H.refinement_order(1.0, 0.0)
    assert abs(o["order"] - 2.0) < 0.2


@pytest.mark.parametrize("L2", [-0.9, 3.0])
def test_rescaling_law(L2):
    assert H.scaling_defect(0.0, L2) < 1e-5


def test_shell_variant_holds_inner_value():
    p = H.solve_hedgehog(0.0, r_inner=0.5, R=10.0, N=300, s_inner=model.s_plus(0.0),
                         check_domain=False)
    assert p.converged
    assert p.s[0] == model.s_plus(0.0) and p.s[-1] == model.s_plus(0.0)


def test_ode_residual_is_small_in_interior(base):
    res = base.ode_residual(4)
    assert np.max(np.abs(res[5:-5])) < 1e-3


def test_reconstructed_el_residual_rejects_off_node_radii(base):
    with pytest.raises(ValueError):
        H.reconstructed_el_residual(base, [0.123456])


@pytest.mark.parametrize("kw", [dict(L2=-1.5), dict(R=5.0), dict(N=100), dict(r_inner=30.0)])
def test_invalid_arguments(kw):
    with pytest.raises(ValueError):
        H.solve_hedgehog(0.0, **kw)


def test_nonconvergence_warns_and_returns_best():
    with pytest.warns(RuntimeWarning, match="did not converge"):
        p = H.solve_hedgehog(0.0, max_iter=1)
    assert not p.converged
    assert p.residual == min(h["residual"] for h in p.history)


def test_outputs(tmp_path, base):
    H.write_profile_csv(tmp_path / "p.csv", base)
    H.write_convergence_log(tmp_path / "log.jsonl", base.history)
    data = np.loadtxt(tmp_path / "p.csv", delimiter=",", skiprows=1)
    assert data.shape == (400, 4)
    assert (tmp_path / "p.csv").read_text().splitlines()[0] == "r,s,ds_dr,ode_residual"
    recs = [json.loads(l) for l in (tmp_path / "log.jsonl").read_text().splitlines()]
    assert [r["iteration"] for r in recs] == list(range(1, base.iterations + 1))


def test_euler_frozen_exponents():
    form = euler_ode_exponents(1, 2, -6)
    assert form.kind == "distinct"
    assert set(form.exponents) == {2.0, -3.0}
    assert euler_ode_exponents(1, 1, 0).kind == "repeated"
    assert euler_ode_exponents(1, 1, 4).kind == "complex"
    with pytest.raises(ValueError):
        euler_ode_exponents(0, 1, 1)


@given(st.floats(0.2, 5), st.floats(-5, 5), st.floats(-10, 10))
def test_euler_basis_solves_equation(A, B, C):
    form = euler_ode_exponents(A, B, C)
    assert form.verify(np.linspace(0.5, 3, 7)) < 1e-9
