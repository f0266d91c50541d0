"""
Radial hedgehog profiles.

Solves k (s'' + 2 s'/r - 6 s/r^2) = psi(s) with k = 1 + 2 L2/3 on a
uniform radial grid by Newton's method on the three-point discretisation.
On a full ball the first node sits at r = 0 with s = 0; the three-point
stencil is exact on s = a r^2, so the regular indicial branch (exponent 2)
is built in and the singular branch r^-3 is excluded.  A shell variant
fixes s at an inner radius instead.
"""
import json
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.linalg import solve_banded

from . import model
from .directors import radial_director_jet
from .grids import _nonperiodic_ops
from .jets import qjet_from_uniaxial, radial_jet
from .residuals import el_residual_anisotropic


@dataclass
class HedgehogProfile:
    """Solution of the hedgehog ODE on nodes ``r``.

    Attributes
    ----------
    r, s : ndarray
        Nodes and values, boundary nodes included.
    t, L2 : float
        Reduced temperature and anisotropy.
    residual : float
        Max-norm of the discrete equations at interior nodes.
    iterations : int
        Newton iterations taken.
    last_step : float
        Max-norm of the final Newton update.
    converged : bool
    history : list of dict
        One record per iteration: iteration, residual, step.
    """
    r: np.ndarray
    s: np.ndarray
    t: float
    L2: float
    residual: float
    iterations: int
    last_step: float
    converged: bool
    history: list = field(default_factory=list)

    @property
    def h(self):
        return float(self.r[1] - self.r[0])

    def derivatives(self, order=4):
        """s' and s'' at the nodes from finite differences of the given order.

        On a full ball the profile is extended evenly through r = 0, which
        is exact for the smooth solution (a series in r^2).
        """
        half = order // 2
        r, s = self.r, self.s
        if r[0] == 0.0:
            r = np.concatenate([-r[half:0:-1], r])
            s = np.concatenate([s[half:0:-1], s])
        d1, d2 = _nonperiodic_ops(r, order)
        k = len(r) - len(self.r)
        return (d1 @ s)[k:], (d2 @ s)[k:]

    def ode_residual(self, order=4):
        """Pointwise continuum ODE residual using high-order derivatives of the table."""
        ds, d2s = self.derivatives(order)
        r = self.r
        out = np.zeros_like(r)
        m = r > 0
        k = model.elastic_factor(self.L2)
        out[m] = (k * (d2s[m] + 2 * ds[m] / r[m] - 6 * self.s[m] / r[m]**2)
                  - model.psi(self.s[m], self.t))
        return out

    def spline(self):
        return CubicSpline(self.r, self.s)

    def __call__(self, r):
        return self.spline()(np.asarray(r, dtype=float))


def discrete_residual(s, r, t, L2=0.0):
    """Interior equations of the three-point scheme for the full node vector s."""
    s = np.asarray(s, dtype=float)
    h = r[1] - r[0]
    ri = r[1:-1]
    k = model.elastic_factor(L2)
    lap = ((s[2:] - 2 * s[1:-1] + s[:-2]) / h**2 + (s[2:] - s[:-2]) / (h * ri)
           - 6 * s[1:-1] / ri**2)
    return k * lap - model.psi(s[1:-1], t)


def _jacobian_bands(s, r, t, L2):
    h = r[1] - r[0]
    ri = r[1:-1]
    k = model.elastic_factor(L2)
    lower = k * (1 / h**2 - 1 / (h * ri))
    upper = k * (1 / h**2 + 1 / (h * ri))
    diag = k * (-2 / h**2 - 6 / ri**2) - model.psi_prime(s[1:-1], t)
    ab = np.zeros((3, len(ri)))
    ab[0, 1:] = upper[:-1]
    ab[1] = diag
    ab[2, :-1] = lower[1:]
    return ab


def solve_hedgehog(t, L2=0.0, R=20.0, N=400, r_inner=0.0, s_inner=0.0, s_outer=None,
                   tol=1e-11, max_iter=50, guess=None, check_domain=True):
    """Newton solve of the hedgehog boundary-value problem.

    Parameters
    ----------
    t, L2 : float
        Reduced temperature and anisotropy; requires 1 + 2 L2/3 > 0.
    R : float
        Outer radius, where s = s_outer (default s_+(t)).
    N : int
        Number of nodes including both ends.
    r_inner, s_inner : float
        Inner radius and value there.  The default is the full ball with
        s(0) = 0.
    guess : ndarray, optional
        Initial iterate on the nodes; default s_+ r^2 / (r^2 + 1) blended
        to match the boundary values.
    check_domain : bool
        Enforce R - r_inner >= 10 and N >= 200.
    tol : float
        Target max-norm of the discrete equations, raised to the roundoff
        level of the scheme when N is large.

    Returns
    -------
    HedgehogProfile
        If Newton fails the best iterate is returned with
        ``converged=False`` and a RuntimeWarning.
    """
    if model.elastic_factor(L2) <= 0:
        raise ValueError("1 + 2 L2/3 must be positive")
    if r_inner < 0 or R <= r_inner:
        raise ValueError("need 0 <= r_inner < R")
    if check_domain and (R - r_inner < 10 or N < 200):
        raise ValueError("need R - r_inner >= 10 and N >= 200")
    if N < 4:
        raise ValueError("need at least 4 nodes")
    sp_ = model.s_plus(t)
    s_out = sp_ if s_outer is None else float(s_outer)
    r = np.linspace(r_inner, R, N)
    if guess is None:
        base = sp_ * r**2 / (r**2 + 1)
        w = (R - r) / (R - r_inner)
        s = base + (s_inner - base[0]) * w + (s_out - base[-1]) * (1 - w)
    else:
        s = np.array(guess, dtype=float)
    s[0], s[-1] = s_inner, s_out

    # the scheme's roundoff level grows like 1/h^2; never ask for less than that
    h = r[1] - r[0]
    scale = model.elastic_factor(L2) * max(sp_, abs(s_inner))
    tol = max(tol, 32 * np.finfo(float).eps * scale / h**2)
    history = []
    F = discrete_residual(s, r, t, L2)
    fn = float(np.max(np.abs(F)))
    best = (fn, s.copy())
    step = np.inf
    it = 0
    for it in range(1, max_iter + 1):
        delta = solve_banded((1, 1), _jacobian_bands(s, r, t, L2), -F)
        lam = 1.0
        while True:
            trial = s.copy()
            trial[1:-1] += lam * delta
            Ft = discrete_residual(trial, r, t, L2)
            ft = float(np.max(np.abs(Ft)))
            if ft < fn or lam < 1e-4:
                break
            lam *= 0.5
        s, F, fn = trial, Ft, ft
        step = float(lam * np.max(np.abs(delta)))
        history.append({"iteration": it, "residual": fn, "step": step})
        if fn < best[0]:
            best = (fn, s.copy())
        if fn < tol or step < 1e-15:
            break
    converged = best[0] < tol
    if not converged:
        warnings.warn(f"hedgehog Newton did not converge: residual {best[0]:.3e}",
                      RuntimeWarning, stacklevel=2)
    return HedgehogProfile(r, best[1], float(t), float(L2), best[0], it, step, converged, history)


def near_origin_exponent(profile: HedgehogProfile, nodes=5):
    """Slope of log s against log r over the first nodes after r = 0."""
    r, s = profile.r[1:nodes + 1], profile.s[1:nodes + 1]
    return float(np.polyfit(np.log(r), np.log(s), 1)[0])


def quadratic_coefficient(profile: HedgehogProfile, nodes=5):
    """Least-squares a in s ~ a r^2 + b r^4 over the first nodes."""
    r, s = profile.r[1:nodes + 1], profile.s[1:nodes + 1]
    X = np.stack([r**2, r**4], axis=-1)
    return float(np.linalg.lstsq(X, s, rcond=None)[0][0])


_DIRECTIONS = np.array([[0.48, 0.6, 0.64], [-0.8, 0.36, 0.48], [0.0, -0.6, 0.8],
                        [0.6, 0.0, -0.8]])


def reconstructed_el_residual(profile: HedgehogProfile, r_eval=None, directions=_DIRECTIONS):
    """Max-norm of the full 5-component EL residual of s(r)(n n - I/3), n = x/|x|.

    The field is rebuilt along several rays at the radii ``r_eval`` (by
    default every interior node) with s', s'' from fourth-order
    differences, so the residual measures the ODE discretisation error.
    """
    ds, d2s = profile.derivatives(4)
    idx = np.arange(1, len(profile.r) - 1)
    if r_eval is not None:
        idx = np.searchsorted(profile.r, r_eval)
        if not np.allclose(profile.r[idx], r_eval, rtol=0, atol=1e-9 * profile.r[-1]):
            raise ValueError("r_eval must be a subset of the profile nodes")
    r = profile.r[idx]
    pts = r[:, None, None] * directions[None, :, :]
    ones = np.ones(len(directions))
    sj = radial_jet(pts, profile.s[idx][:, None] * ones, ds[idx][:, None] * ones,
                    d2s[idx][:, None] * ones)
    q = qjet_from_uniaxial(sj, radial_director_jet(pts))
    return float(np.max(np.abs(el_residual_anisotropic(q, profile.t, profile.L2))))


def refinement_order(t, L2=0.0, R=20.0, N=400, r_min=1.0):
    """Observed order of the reconstructed EL residual between N and 2N - 1 nodes.

    Both residuals are measured on the coarse nodes with r >= r_min and at
    least two nodes from the outer boundary.
    """
    coarse = solve_hedgehog(t, L2, R, N)
    fine = solve_hedgehog(t, L2, R, 2 * N - 1)
    rc = coarse.r[(coarse.r >= r_min) & (coarse.r <= R - 2 * coarse.h)]
    ec = reconstructed_el_residual(coarse, rc)
    ef = reconstructed_el_residual(fine, rc)
    return {"coarse": ec, "fine": ef, "ratio": ec / ef, "order": float(np.log2(ec / ef)),
            "newton_iterations": [coarse.iterations, fine.iterations]}


def scaling_defect(t, L2, R=20.0, N=400):
    """Max |s_L2(sqrt(k) r) - s_0(r)| with the outer radius scaled alongside.

    The anisotropic problem on [0, sqrt(k) R] is the isotropic one on
    [0, R] after r -> r / sqrt(k); using the same node count makes the
    comparison points coincide with nodes of both solutions.
    """
    k = model.elastic_factor(L2)
    base = solve_hedgehog(t, 0.0, R, N, check_domain=False)
    aniso = solve_hedgehog(t, L2, R * np.sqrt(k), N, check_domain=False)
    return float(np.max(np.abs(aniso(np.sqrt(k) * base.r) - base.s)))


def write_profile_csv(path, profile: HedgehogProfile):
    ds, _ = profile.derivatives(4)
    res = profile.ode_residual(4)
    data = np.column_stack([profile.r, profile.s, ds, res])
    np.savetxt(path, data, delimiter=",", header="r,s,ds_dr,ode_residual", comments="",
               fmt="%.16e")


def write_convergence_log(path, history):
    with open(path, "w") as fh:
        for rec in history:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
