"""
Least-squares recovery of an order parameter for a fixed director.

Given n, the uniaxial equations are four scalar equations per node in a
single unknown s: the scalar equation Delta s - 3 |grad n|^2 s - psi(s) = 0
and the three components of s Delta n + 2 (grad s . grad) n + s |grad n|^2 n = 0.
A director that admits a nontrivial solution lets the residual reach
discretisation level; an incompatible one leaves a floor that no
nontrivial s can remove.
"""
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import spsolve

from . import model
from .grids import AngleField, SphericalGrid, angle_jets
from .jets import VectorJet, director_from_angles


@dataclass
class FitResult:
    """Outcome of :func:`fit_order_parameter`.

    Attributes
    ----------
    s : ndarray
        Best iterate, shape ``grid.shape``.
    residual : float
        Normalised residual of ``s``: RMS equation residual over interior
        nodes divided by max(RMS(s), floor_fraction * s_+).
    iterations : int
    converged : bool
        Whether the Gauss-Newton update stalled below tolerance.
    history : list of dict
        Per iterate: iteration, residual (normalised), residual_rms, s_rms.
    """
    s: np.ndarray
    residual: float
    iterations: int
    converged: bool
    history: list = field(default_factory=list)

    def nontrivial_floor(self, s_scale, fraction=0.01):
        """Smallest normalised residual among iterates with RMS(s) > fraction * s_scale."""
        vals = [h["residual"] for h in self.history if h["s_rms"] > fraction * s_scale]
        return min(vals) if vals else np.nan


def _director_jet(grid, director):
    if isinstance(director, AngleField):
        f, g = angle_jets(grid, director)
        return director_from_angles(f, g)
    if isinstance(director, VectorJet):
        if director.value.shape != (grid.size, 3):
            raise ValueError("director jet must be given at the flat grid nodes")
        return director
    raise TypeError("director must be an AngleField or a VectorJet at the grid nodes")


class _Equations:
    def __init__(self, grid, n: VectorJet, t):
        err = np.max(np.abs(np.sum(n.value**2, axis=-1) - 1))
        if err > 1e-8:
            raise ValueError(f"director deviates from unit length by {err:.2e}")
        kw = {"polar": "edge"} if isinstance(grid, SphericalGrid) else {}
        self.L = grid.laplacian_operator(**kw)
        self.L.eliminate_zeros()
        self.G = grid.gradient_operators(**kw)
        self.t = t
        self.g2 = n.grad_sq
        self.n = n
        self.lin = n.laplacian + self.g2[:, None] * n.value      # coefficient of s in r2

    def residual(self, s):
        r1 = self.L @ s - 3 * self.g2 * s - model.psi(s, self.t)
        gs = np.stack([Gk @ s for Gk in self.G], axis=-1)
        r2 = self.lin * s[:, None] + 2 * np.einsum("nck,nk->nc", self.n.jac, gs)
        return np.concatenate([r1[:, None], r2], axis=1)       # (N, 4)

    def jacobian_blocks(self, s):
        d = sp.diags
        J1 = self.L - d(3 * self.g2 + model.psi_prime(s, self.t))
        J2 = [d(self.lin[:, c]) + 2 * sum(d(self.n.jac[:, c, k]) @ self.G[k] for k in range(3))
              for c in range(3)]
        return [J1] + J2


def fit_order_parameter(director, t, grid, boundary=None, initial=None, max_iter=30,
                        tol=1e-10, floor_fraction=0.01):
    """Gauss-Newton fit of s to the uniaxial equations for a fixed director.

    Parameters
    ----------
    director : AngleField or VectorJet
        Angle fields on the grid (differentiated numerically) or an exact
        director jet at the flat grid nodes.
    boundary : ndarray, optional
        Values of s, shape ``grid.shape``.  If given, s is held fixed on
        every node outside ``grid.interior``; otherwise all nodes are free.
    initial : ndarray, optional
        Starting iterate; defaults to ``boundary`` or s_+(t) everywhere.
    tol : float
        Stop once the update's max-norm falls below ``tol`` (relative to
        max(|s|, 1)).

    Returns
    -------
    FitResult
        The best iterate seen.  Stagnation is reported with a warning and
        ``converged=False``.
    """
    n = _director_jet(grid, director)
    eqs = _Equations(grid, n, t)
    inner = grid.interior.reshape(-1)
    free = inner.copy() if boundary is not None else np.ones(grid.size, dtype=bool)
    if initial is not None:
        s = np.array(initial, dtype=float).reshape(-1)
    elif boundary is not None:
        s = np.array(boundary, dtype=float).reshape(-1)
    else:
        s = np.full(grid.size, model.s_plus(t))
    if boundary is not None:
        b = np.asarray(boundary, dtype=float).reshape(-1)
        s[~free] = b[~free]
    floor = floor_fraction * abs(model.s_plus(t)) if t <= 9 / 8 else floor_fraction

    def measure(s):
        F = eqs.residual(s)[inner]
        rms = float(np.sqrt(np.mean(np.sum(F**2, axis=1))))
        s_rms = float(np.sqrt(np.mean(s[inner]**2)))
        return F, rms, s_rms, rms / max(s_rms, floor)

    history = []
    F, rms, s_rms, norm = measure(s)
    history.append({"iteration": 0, "residual": norm, "residual_rms": rms, "s_rms": s_rms})
    best = (norm, s.copy())
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        blocks = eqs.jacobian_blocks(s)
        Jm = sp.vstack([blk.tocsr()[inner][:, free] for blk in blocks]).tocsr()
        rhs = -F.T.reshape(-1)
        A = (Jm.T @ Jm).tocsr()
        # nodes that enter no equation (free boundary nodes of a one-sided
        # stencil) make A singular; a tiny Levenberg shift leaves them in place
        mu = 1e-12 * float(A.diagonal().max())
        delta = spsolve((A + mu * sp.identity(A.shape[0])).tocsc(), Jm.T @ rhs)
        lam = 1.0
        while True:
            trial = s.copy()
            trial[free] += lam * delta
            Ft, rms_t, s_rms_t, norm_t = measure(trial)
            if rms_t <= rms or lam < 1e-3:
                break
            lam *= 0.5
        s, F, rms, s_rms, norm = trial, Ft, rms_t, s_rms_t, norm_t
        history.append({"iteration": it, "residual": norm, "residual_rms": rms, "s_rms": s_rms})
        if norm < best[0]:
            best = (norm, s.copy())
        step = lam * float(np.max(np.abs(delta)))
        if step < tol * max(1.0, float(np.max(np.abs(s)))):
            converged = True
            break
    if not converged:
        warnings.warn(f"Gauss-Newton stopped after {it} iterations without stalling "
                      f"(normalised residual {norm:.3e})", RuntimeWarning, stacklevel=2)
    return FitResult(best[1].reshape(grid.shape), best[0], it, converged, history)
