"""
Residuals of the Euler-Lagrange systems and of their reduced forms.

Every function takes jets (value, gradient, Hessian) so the same code
serves exact analytic fields and finite-difference fields on a grid.
Array shapes carry an arbitrary leading batch shape ``...``; matrices
are returned as ``(..., 3, 3)`` and basis coefficients as ``(..., 5)``.
"""
import json
import warnings
from dataclasses import dataclass

import numpy as np

from . import model
from . import tensor as qt
from .jets import QJet, ScalarJet, VectorJet, qjet_from_uniaxial, radial_jet

SQRT6 = qt.SQRT6
I3 = np.eye(3)


class NotUnitDirector(ValueError):
    """Raised when a director jet is not of unit length."""


class StructureViolation(ValueError):
    """Raised when a separated-variable fit leaves a residual above tolerance."""


def _check_director(n: VectorJet, tol=1e-8):
    err = np.max(np.abs(np.sum(n.value**2, axis=-1) - 1.0)) if n.value.size else 0.0
    if err > tol:
        raise NotUnitDirector(f"director deviates from unit length by {err:.2e}")


def _outer(u, v):
    return np.einsum("...i,...j->...ij", u, v)


def _dot(u, v):
    return np.einsum("...i,...i->...", u, v)


# --------------------------------------------------------------------------- full Q systems

def el_residual_isotropic(q: QJet, t):
    """Delta Q - (t Q - 3 sqrt6 ST(Q^2) + 2 Q tr Q^2), basis coefficients."""
    return q.laplacian - model.bulk_gradient(q.value, t)


def el_residual_basis(q: QJet, t):
    """The same residual written out component by component in the q_i.

    Kept separate from :func:`el_residual_isotropic` as an independent
    check of the basis algebra.
    """
    q1, q2, q3, q4, q5 = np.moveaxis(q.value, -1, 0)
    S = np.sum(q.value**2, axis=-1)
    r3 = np.sqrt(3.0)
    rhs = np.stack([
        (t - 6 * q1 + 2 * S) * q1 + 3 * S - 4.5 * (q4**2 + q5**2),
        (t + 6 * q1 + 2 * S) * q2 - 1.5 * r3 * (q4**2 - q5**2),
        (t + 6 * q1 + 2 * S) * q3 - 3 * r3 * q4 * q5,
        (t - 3 * q1 - 3 * r3 * q2 + 2 * S) * q4 - 3 * r3 * q3 * q5,
        (t - 3 * q1 + 3 * r3 * q2 + 2 * S) * q5 - 3 * r3 * q3 * q4,
    ], axis=-1)
    return q.laplacian - rhs


def divdiv_matrix(q: QJet):
    """D_ij = sum_k d_k d_j Q_ik as a matrix (not symmetrised)."""
    return np.einsum("...ikjk->...ij", q.matrix_hess())


def anisotropic_term(q: QJet):
    """ST(D) with D_ij = Q_ik,kj, basis coefficients."""
    return qt.project(qt.sym_traceless_part(divdiv_matrix(q)))


def el_residual_anisotropic(q: QJet, t, L2):
    """Delta Q + L2 ST(Q_ik,kj) - bulk gradient, basis coefficients."""
    if model.elastic_factor(L2) <= 0:
        raise ValueError("1 + 2 L2/3 must be positive")
    return el_residual_isotropic(q, t) + L2 * anisotropic_term(q)


# --------------------------------------------------------------------------- (s, n) system

@dataclass
class SNResidual:
    scalar: np.ndarray      # Delta s - 3 |grad n|^2 s - psi(s)
    vector: np.ndarray      # s Delta n + 2 (grad s . grad) n + s |grad n|^2 n

    def max(self):
        return float(max(np.max(np.abs(self.scalar), initial=0.0),
                         np.max(np.abs(self.vector), initial=0.0)))


def _directional(n: VectorJet, s: ScalarJet):
    """(grad s . grad) n, i.e. sum_k d_k s d_k n."""
    return np.einsum("...ik,...k->...i", n.jac, s.grad)


def sn_residual(s: ScalarJet, n: VectorJet, t):
    """Residuals of the scalar and director equations for Q = s (n n - I/3)."""
    _check_director(n)
    g2 = n.grad_sq
    scalar = s.laplacian - 3 * g2 * s.value - model.psi(s.value, t)
    sv = s.value[..., None]
    vector = sv * n.laplacian + 2 * _directional(n, s) + (sv * g2[..., None]) * n.value
    return SNResidual(scalar, vector)


def extra_equation_residual(n: VectorJet, flip_sign=False):
    """2 sum_k d_k n ⊗ d_k n + |grad n|^2 (n n - I).

    A uniaxial solution with s != 0 must make this vanish.  ``flip_sign``
    evaluates the variant with the opposite sign on the second term; it
    exists only so tests can confirm that variant fails on known solutions.
    """
    _check_director(n)
    G = np.einsum("...ik,...jk->...ij", n.jac, n.jac)
    sign = -1.0 if flip_sign else 1.0
    return 2 * G + sign * n.grad_sq[..., None, None] * (_outer(n.value, n.value) - I3)


@dataclass
class MDecomposition:
    """Split of Delta Q - bulk(Q) for Q = s(n n - I/3) into three orthogonal parts."""
    M1: np.ndarray
    M2: np.ndarray
    M3: np.ndarray

    @property
    def total(self):
        return self.M1 + self.M2 + self.M3

    def max_cross_cosine(self, floor=1e-12):
        """Largest |<Mi, Mj>| / (|Mi| |Mj|) over pairs and points with both norms above floor."""
        parts = (self.M1, self.M2, self.M3)
        worst = 0.0
        for a in range(3):
            for b in range(a + 1, 3):
                ip = np.einsum("...ij,...ij->...", parts[a], parts[b])
                na = np.linalg.norm(parts[a], axis=(-2, -1))
                nb = np.linalg.norm(parts[b], axis=(-2, -1))
                ok = (na > floor) & (nb > floor)
                if np.any(ok):
                    worst = max(worst, float(np.max(np.abs(ip[ok]) / (na[ok] * nb[ok]))))
        return worst


def m_decomposition(s: ScalarJet, n: VectorJet, t):
    _check_director(n)
    sn = sn_residual(s, n, t)
    P = _outer(n.value, n.value)
    M1 = sn.scalar[..., None, None] * (P - I3 / 3)
    M2 = 2 * qt.sym_outer(n.value, sn.vector)
    M3 = s.value[..., None, None] * extra_equation_residual(n)
    return MDecomposition(M1, M2, M3)


# --------------------------------------------------------------------------- angle form

def sfg_residual(s: ScalarJet, f: ScalarJet, g: ScalarJet, t, points=None, sin_tol=1e-6):
    """Residuals of the (s, f, g) system, stacked as (..., 5).

    Components, in order: the scalar equation, the f equation, the g
    equation, s grad f . grad g, and s (|grad f|^2 - |grad g|^2 sin^2 f).

    When the evaluation ``points`` are given, nodes with polar sine below
    ``sin_tol`` raise ValueError: spherical angle fields are singular on
    the axis.
    """
    if points is not None:
        pts = np.asarray(points, dtype=float)
        r = np.linalg.norm(pts, axis=-1)
        sin_phi = np.hypot(pts[..., 0], pts[..., 1]) / np.where(r > 0, r, 1.0)
        if np.any(sin_phi < sin_tol):
            raise ValueError(f"{int(np.sum(sin_phi < sin_tol))} evaluation nodes lie within "
                             f"sin(phi) < {sin_tol:g} of the polar axis")
    sf, cf = np.sin(f.value), np.cos(f.value)
    df2 = _dot(f.grad, f.grad)
    dg2 = _dot(g.grad, g.grad)
    sv = s.value
    r = [
        s.laplacian - 3 * (df2 + dg2 * sf**2) * sv - model.psi(sv, t),
        sv * (f.laplacian - dg2 * sf * cf) + 2 * _dot(s.grad, f.grad),
        sv * g.laplacian + 2 * _dot(s.grad, g.grad),
        sv * _dot(f.grad, g.grad),
        sv * (df2 - dg2 * sf**2),
    ]
    return np.stack(r, axis=-1)


# --------------------------------------------------------------------------- (s, beta) system

@dataclass
class SBResidual:
    s: np.ndarray
    beta: np.ndarray
    coefficient: np.ndarray   # multiplier of beta in the beta equation
    extra: float              # max norm of the director's extra-equation residual


def beta_coefficient(s, grad_n_sq, grad_m_p_sq, t):
    """|grad n|^2 + 4 |(grad m)^T p|^2 + t + 2 sqrt6 s + 4 s^2 / 3."""
    return grad_n_sq + 4 * grad_m_p_sq + t + 2 * SQRT6 * s + 4.0 / 3.0 * s**2


def sb_residual(s: ScalarJet, beta: ScalarJet, frame, t, warn=True):
    """Residuals of the two-scalar system for Q = s(n n - I/3) + beta(m m - p p).

    ``frame`` is a triple (n, m, p) of VectorJets.  The director is
    expected to satisfy the extra equation; its residual is reported in
    ``extra`` and, above 1e-6, triggers a RuntimeWarning unless ``warn``
    is false.
    """
    n, m, p = frame
    _check_director(n)
    g2 = n.grad_sq
    mp = np.einsum("...ij,...i->...j", m.jac, p.value)
    coef = beta_coefficient(s.value, g2, _dot(mp, mp), t)
    b, sv = beta.value, s.value
    rs = s.laplacian - 3 * g2 * sv - model.psi(sv, t) - 4 * b**2 * sv - 3 * SQRT6 * b**2
    rb = beta.laplacian - coef * b - 4 * b**3
    extra = float(np.max(np.abs(extra_equation_residual(n)), initial=0.0))
    if warn and extra > 1e-6:
        warnings.warn(f"director violates the extra equation (max residual {extra:.2e}); "
                      "the two-scalar system does not describe a critical point",
                      RuntimeWarning, stacklevel=2)
    return SBResidual(rs, rb, coef, extra)


def beta_squared_rhs(beta: ScalarJet, coefficient):
    """2 (|grad beta|^2 + c beta^2 + 4 beta^4), non-negative whenever c is."""
    b = beta.value
    return 2 * (_dot(beta.grad, beta.grad) + coefficient * b**2 + 4 * b**4)


def beta_squared_identity_defect(s: ScalarJet, beta: ScalarJet, frame, t, laplacian_beta2=None):
    """Delta(beta^2) - 2(|grad beta|^2 + c beta^2 + 4 beta^4) - 2 beta r_beta.

    Zero identically; ``laplacian_beta2`` lets a caller supply an
    independently computed Delta(beta^2) (for instance from finite
    differences) instead of the product-rule jet.
    """
    res = sb_residual(s, beta, frame, t, warn=False)
    lap = (beta * beta).laplacian if laplacian_beta2 is None else laplacian_beta2
    return lap - beta_squared_rhs(beta, res.coefficient) - 2 * beta.value * res.beta


# --------------------------------------------------------------------------- projections

@dataclass
class ProjectionComponents:
    """Coordinates of a symmetric traceless matrix in the frame basis.

    ``K[..., i]`` multiplies, in order, n n - I/3, n ⊙ m, n ⊙ p, m m - p p
    and m ⊙ p.  The first spans V1, the next two V2, the last two V3.
    """
    K: np.ndarray
    basis: np.ndarray   # (..., 5, 3, 3)

    def part(self, k):
        sel = {1: [0], 2: [1, 2], 3: [3, 4]}[k]
        return np.einsum("...c,...cij->...ij", self.K[..., sel], self.basis[..., sel, :, :])

    def reassemble(self):
        return np.einsum("...c,...cij->...ij", self.K, self.basis)


def frame_basis(n, m, p):
    return np.stack([_outer(n, n) - I3 / 3, qt.sym_outer(n, m), qt.sym_outer(n, p),
                     _outer(m, m) - _outer(p, p), qt.sym_outer(m, p)], axis=-3)


_FRAME_NORMS = np.array([2 / 3, 0.5, 0.5, 2.0, 0.5])


def project_v123(T, n, m, p):
    """Decompose the symmetric traceless matrices T along the frame basis."""
    B = frame_basis(np.asarray(n, float), np.asarray(m, float), np.asarray(p, float))
    K = np.einsum("...ij,...cij->...c", np.asarray(T, float), B) / _FRAME_NORMS
    return ProjectionComponents(K, B)


# --------------------------------------------------------------------------- closed form of ST(D)

@dataclass
class AnisotropicPieces:
    """ST(Q_ik,kj) = a (n n - I/3) + n ⊙ J + R for Q = s(n n - I/3)."""
    a: np.ndarray
    J: np.ndarray
    R: np.ndarray
    n: np.ndarray

    @property
    def total(self):
        n = self.n
        return self.a[..., None, None] * (_outer(n, n) - I3 / 3) + qt.sym_outer(n, self.J) + self.R


def anisotropic_st_term(s: ScalarJet, n: VectorJet):
    """Closed form of ST(Q_ik,kj) for a uniaxial field, in terms of s and n.

    Conventions: (grad n)_ij = d_j n_i, (grad n grad n)_ij = n_i,k n_k,j
    and ((grad^2 n) n)_ij = n_i,jk n_k.
    """
    _check_director(n)
    nv, Dn, H = n.value, n.jac, s.hess
    gs, sv = s.grad, s.value
    div = n.div
    gdiv = n.grad_div
    Dnn = np.einsum("...ij,...j->...i", Dn, nv)           # (n . grad) n
    Hn = np.einsum("...ij,...j->...i", H, nv)
    nHn = _dot(nv, Hn)
    gs_n = _dot(gs, nv)
    gs_Dnn = _dot(gs, Dnn)
    gdiv_n = _dot(gdiv, nv)
    gs_perp = gs - gs_n[..., None] * nv

    a = div * gs_n + gs_Dnn + sv * gdiv_n + nHn
    Jv = ((Hn - nHn[..., None] * nv)
          + (np.einsum("...ji,...j->...i", Dn, gs) - gs_Dnn[..., None] * nv)
          + gs_n[..., None] * Dnn
          + div[..., None] * gs_perp
          + sv[..., None] * (gdiv - gdiv_n[..., None] * nv))
    ST = qt.sym_traceless_part
    DnDn = np.einsum("...ik,...kj->...ij", Dn, Dn)
    D2nn = np.einsum("...ijk,...k->...ij", n.hess, nv)
    R = (ST(qt.sym_outer(Dnn, gs_perp))
         + (gs_n + sv * div)[..., None, None] * ST(Dn)
         + sv[..., None, None] * ST(DnDn + D2nn)
         - (H - s.laplacian[..., None, None] * I3 / 3) / 3)
    return AnisotropicPieces(a, Jv, R, nv)


def anisotropic_st_direct(s: ScalarJet, n: VectorJet):
    """ST(Q_ik,kj) as a matrix, by differentiating Q = s(n n - I/3) directly."""
    return qt.sym_traceless_part(divdiv_matrix(qjet_from_uniaxial(s, n)))


# --------------------------------------------------------------------------- separated coefficients

@dataclass
class SeparatedCoefficients:
    """Fitted A, B, C with K_c = A s'' + B s'/r + C s/r^2 at each direction.

    Arrays are indexed ``[channel, direction]``; ``channels`` lists the
    frame-basis indices (1 to 5) fitted.
    """
    channels: tuple
    directions: np.ndarray
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    fit_residual: float


def separated_coefficients(angles_fn, L2, directions, channels=(1, 4, 5),
                           radii=(0.6, 1.0, 1.7), powers=(2, 3, 4), tol=1e-8):
    """Fit the radial structure of the projected elastic operator.

    For Q = s(r) (n n - I/3) with a director whose angles depend on the
    direction only, each frame component K_c of Delta Q + L2 ST(Q_ik,kj)
    has the form A s'' + B s'/r + C s/r^2 with A, B, C functions of the
    direction.  This samples s = r^p for several p and radii and solves
    for A, B, C by least squares.

    Parameters
    ----------
    angles_fn : callable
        ``angles_fn(points) -> (f, g)`` ScalarJets of the director angles.
    directions : array_like (M, 3)
        Unit vectors at which to fit.

    Raises
    ------
    StructureViolation
        If the relative least-squares residual exceeds ``tol``.
    """
    from .jets import frame_jets_from_angles
    dirs = np.asarray(directions, dtype=float)
    dirs = dirs / np.linalg.norm(dirs, axis=-1, keepdims=True)
    radii = np.asarray(radii, dtype=float)
    pts = radii[:, None, None] * dirs[None, :, :]                  # (nr, M, 3)
    f, g = angles_fn(pts)
    n, m, p = frame_jets_from_angles(f, g)
    _check_director(n)
    r = radii[:, None] * np.ones(len(dirs))
    rows, rhs = [], []
    for k in powers:
        sj = radial_jet(pts, r**k, k * r**(k - 1), k * (k - 1) * r**(k - 2.0))
        q = qjet_from_uniaxial(sj, n)
        L = q.laplacian + L2 * anisotropic_term(q)
        K = project_v123(qt.to_matrix(L), n.value, m.value, p.value).K  # (nr, M, 5)
        rows.append(np.stack([k * (k - 1) * r**(k - 2.0), k * r**(k - 2.0), r**(k - 2.0)], axis=-1))
        rhs.append(K)
    X = np.concatenate(rows, axis=0)                                # (P*nr, M, 3)
    Y = np.concatenate(rhs, axis=0)                                 # (P*nr, M, 5)
    chans = tuple(channels)
    out = np.empty((3, len(chans), len(dirs)))
    worst = 0.0
    for j in range(len(dirs)):
        for ci, c in enumerate(chans):
            y = Y[:, j, c - 1]
            coef, *_ = np.linalg.lstsq(X[:, j, :], y, rcond=None)
            out[:, ci, j] = coef
            scale = max(1.0, float(np.max(np.abs(y))))
            worst = max(worst, float(np.max(np.abs(X[:, j, :] @ coef - y))) / scale)
    if worst > tol:
        raise StructureViolation(f"separated form violated: relative residual {worst:.2e}")
    return SeparatedCoefficients(chans, dirs, out[0], out[1], out[2], worst)


def projected_leading_coefficients(L2, n, m, p, e_r):
    """Closed forms of the s'' coefficients in channels 1, 4 and 5."""
    ne, me, pe = _dot(n, e_r), _dot(m, e_r), _dot(p, e_r)
    A1 = 1 + L2 * (0.5 * ne**2 + 1.0 / 6.0)
    A4 = -(L2 / 6) * (me**2 - pe**2)
    A5 = -(2 * L2 / 3) * me * pe
    return A1, A4, A5


# --------------------------------------------------------------------------- reports

def residual_report(name, residual, mask=None, grid=None):
    """JSON-serialisable summary of a residual field (..., C)."""
    res = np.asarray(residual, dtype=float)
    if res.ndim == 1:
        res = res[:, None]
    res = res.reshape(-1, res.shape[-1]) if grid is None else res.reshape(grid.size, -1)
    if mask is not None:
        res = res[np.asarray(mask).reshape(-1)]
    out = {
        "operator": name,
        "points": int(res.shape[0]),
        "max_abs": float(np.max(np.abs(res))) if res.size else 0.0,
        "rms": float(np.sqrt(np.mean(res**2))) if res.size else 0.0,
        "per_component_max": [float(v) for v in np.max(np.abs(res), axis=0)] if res.size else [],
    }
    if grid is not None:
        out["grid"] = grid.descriptor()
    return out


def write_report(path, reports):
    with open(path, "w") as fh:
        json.dump(reports, fh, indent=2, sort_keys=True)
