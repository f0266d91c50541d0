"""
Exact second-order derivative bundles ("jets") of fields at points.

A jet carries a field's value, Cartesian gradient and Cartesian Hessian
at an array of points.  Closed-form fields (coordinate functions, random
trigonometric fields, directors built from angle fields) produce jets
exactly; grids produce them by finite differences.  Every residual in
:mod:`ldg.residuals` consumes jets, so the same formula is evaluated on
analytic and discrete inputs.

Index conventions: for a vector v, ``jac[..., i, j] = d_j v_i`` and
``hess[..., i, j, k] = d_j d_k v_i``.
"""
from dataclasses import dataclass

import numpy as np

from . import tensor as qt

I3 = np.eye(3)


@dataclass
class ScalarJet:
    value: np.ndarray
    grad: np.ndarray
    hess: np.ndarray

    @property
    def laplacian(self):
        return np.trace(self.hess, axis1=-2, axis2=-1)

    def __add__(self, other):
        if isinstance(other, ScalarJet):
            return ScalarJet(self.value + other.value, self.grad + other.grad,
                             self.hess + other.hess)
        return ScalarJet(self.value + other, self.grad, self.hess)

    def scale(self, c):
        return ScalarJet(c * self.value, c * self.grad, c * self.hess)

    def __mul__(self, other):
        if not isinstance(other, ScalarJet):
            return self.scale(other)
        u, v = self, other
        gg = np.einsum("...j,...k->...jk", u.grad, v.grad)
        return ScalarJet(
            u.value * v.value,
            u.value[..., None] * v.grad + v.value[..., None] * u.grad,
            (u.value[..., None, None] * v.hess + v.value[..., None, None] * u.hess
             + gg + np.swapaxes(gg, -1, -2)),
        )

    @classmethod
    def constant(cls, value, shape=()):
        value = np.broadcast_to(np.asarray(value, dtype=float), shape).copy()
        return cls(value, np.zeros(shape + (3,)), np.zeros(shape + (3, 3)))

    def apply(self, f, df, d2f):
        """Jet of F(u) given F, F', F'' already evaluated at u.value."""
        gg = np.einsum("...j,...k->...jk", self.grad, self.grad)
        return ScalarJet(f, df[..., None] * self.grad,
                         d2f[..., None, None] * gg + df[..., None, None] * self.hess)


@dataclass
class VectorJet:
    value: np.ndarray
    jac: np.ndarray
    hess: np.ndarray

    @property
    def grad_sq(self):
        """|grad v|^2 = sum_ij (d_j v_i)^2."""
        return np.sum(self.jac**2, axis=(-2, -1))

    @property
    def laplacian(self):
        return np.einsum("...ijj->...i", self.hess)

    @property
    def div(self):
        return np.trace(self.jac, axis1=-2, axis2=-1)

    @property
    def grad_div(self):
        return np.einsum("...iij->...j", self.hess)

    def component(self, i):
        return ScalarJet(self.value[..., i], self.jac[..., i, :], self.hess[..., i, :, :])


@dataclass
class QJet:
    """Basis-coefficient jet of a Q-tensor field: shapes (...,5), (...,5,3), (...,5,3,3)."""
    value: np.ndarray
    grad: np.ndarray
    hess: np.ndarray

    @property
    def laplacian(self):
        return np.trace(self.hess, axis1=-2, axis2=-1)

    @classmethod
    def from_matrix_jets(cls, M, dM, d2M):
        """From matrix value (...,3,3), gradient (...,3,3,j) and Hessian (...,3,3,j,k)."""
        return cls(qt.project(M),
                   np.einsum("...abj,cab->...cj", dM, qt.BASIS),
                   np.einsum("...abjk,cab->...cjk", d2M, qt.BASIS))

    def matrix_grad(self):
        return np.einsum("...cj,cab->...abj", self.grad, qt.BASIS)

    def matrix_hess(self):
        return np.einsum("...cjk,cab->...abjk", self.hess, qt.BASIS)


def _outer(u, v):
    return np.einsum("...j,...k->...jk", u, v)


def coordinate_jets(points):
    """Jets of the Cartesian coordinates x, y, z."""
    points = np.asarray(points, dtype=float)
    shape = points.shape[:-1]
    out = []
    for i in range(3):
        g = np.zeros(shape + (3,))
        g[..., i] = 1.0
        out.append(ScalarJet(points[..., i].copy(), g, np.zeros(shape + (3, 3))))
    return out


def radius_jet(points):
    x = np.asarray(points, dtype=float)
    r = np.linalg.norm(x, axis=-1)
    e = x / r[..., None]
    hess = (I3 - _outer(e, e)) / r[..., None, None]
    return ScalarJet(r, e, hess)


def cylindrical_radius_jet(points):
    x = np.asarray(points, dtype=float)
    rho = np.hypot(x[..., 0], x[..., 1])
    e = np.zeros_like(x)
    e[..., 0] = x[..., 0] / rho
    e[..., 1] = x[..., 1] / rho
    P = np.zeros(x.shape[:-1] + (3, 3))
    P[..., 0, 0] = P[..., 1, 1] = 1.0
    hess = (P - _outer(e, e)) / rho[..., None, None]
    return ScalarJet(rho, e, hess)


def azimuth_jet(points):
    """theta = atan2(y, x) in [0, 2 pi)."""
    x = np.asarray(points, dtype=float)
    X, Y = x[..., 0], x[..., 1]
    rho2 = X**2 + Y**2
    theta = np.mod(np.arctan2(Y, X), 2 * np.pi)
    grad = np.zeros_like(x)
    grad[..., 0] = -Y / rho2
    grad[..., 1] = X / rho2
    hess = np.zeros(x.shape[:-1] + (3, 3))
    hess[..., 0, 0] = 2 * X * Y / rho2**2
    hess[..., 1, 1] = -2 * X * Y / rho2**2
    hess[..., 0, 1] = hess[..., 1, 0] = (Y**2 - X**2) / rho2**2
    return ScalarJet(theta, grad, hess)


def chain2(F, Fa, Fb, Faa, Fab, Fbb, a: ScalarJet, b: ScalarJet):
    """Jet of F(a, b) from the partial derivatives of F evaluated at (a, b)."""
    ex = lambda c: c[..., None]
    ex2 = lambda c: c[..., None, None]
    ab = _outer(a.grad, b.grad)
    hess = (ex2(Faa) * _outer(a.grad, a.grad) + ex2(Fab) * (ab + np.swapaxes(ab, -1, -2))
            + ex2(Fbb) * _outer(b.grad, b.grad) + ex2(Fa) * a.hess + ex2(Fb) * b.hess)
    return ScalarJet(F, ex(Fa) * a.grad + ex(Fb) * b.grad, hess)


def polar_jet(points):
    """phi = atan2(rho, z) in (0, pi), the polar angle from +z."""
    x = np.asarray(points, dtype=float)
    rho = cylindrical_radius_jet(x)
    z = coordinate_jets(x)[2]
    r2 = rho.value**2 + z.value**2
    R, Z = rho.value, z.value
    return chain2(np.arctan2(R, Z), Z / r2, -R / r2,
                  -2 * R * Z / r2**2, (R**2 - Z**2) / r2**2, 2 * R * Z / r2**2, rho, z)


def spherical_coordinate_jets(points):
    """Jets of (r, phi, theta) at Cartesian points."""
    return radius_jet(points), polar_jet(points), azimuth_jet(points)


def radial_jet(points, s, ds, d2s):
    """Jet of a radial function s(|x|) from s, s', s'' sampled at the points."""
    r = radius_jet(points)
    return r.apply(np.asarray(s, float), np.asarray(ds, float), np.asarray(d2s, float))


def angular_jet(points, F, Fphi, Ftheta, Fpp, Fpt, Ftt):
    """Jet of F(phi, theta) from its partials evaluated at the points' angles."""
    _, phi, theta = spherical_coordinate_jets(points)
    return chain2(F, Fphi, Ftheta, Fpp, Fpt, Ftt, phi, theta)


def _vector_chain(V, Vf, Vg, Vff, Vfg, Vgg, f: ScalarJet, g: ScalarJet):
    """Vector jet of V(f, g) with partials given as (..., 3) arrays."""
    jac = np.einsum("...i,...j->...ij", Vf, f.grad) + np.einsum("...i,...j->...ij", Vg, g.grad)
    ff = _outer(f.grad, f.grad)
    fg = _outer(f.grad, g.grad)
    gg = _outer(g.grad, g.grad)
    hess = (np.einsum("...i,...jk->...ijk", Vff, ff)
            + np.einsum("...i,...jk->...ijk", Vfg, fg + np.swapaxes(fg, -1, -2))
            + np.einsum("...i,...jk->...ijk", Vgg, gg)
            + np.einsum("...i,...jk->...ijk", Vf, f.hess)
            + np.einsum("...i,...jk->...ijk", Vg, g.hess))
    return VectorJet(V, jac, hess)


def _stack(*comps):
    return np.stack(np.broadcast_arrays(*comps), axis=-1)


def frame_jets_from_angles(f: ScalarJet, g: ScalarJet):
    """Jets of n = (sf cg, sf sg, cf), m = dn/df and p = (-sg, cg, 0)."""
    sf, cf = np.sin(f.value), np.cos(f.value)
    sg, cg = np.sin(g.value), np.cos(g.value)
    zero = np.zeros_like(sf)
    n = _stack(sf * cg, sf * sg, cf)
    m = _stack(cf * cg, cf * sg, -sf)
    p = _stack(-sg, cg, zero)
    n_g = _stack(-sf * sg, sf * cg, zero)
    n_fg = _stack(-cf * sg, cf * cg, zero)
    n_gg = _stack(-sf * cg, -sf * sg, zero)
    m_g = _stack(-cf * sg, cf * cg, zero)
    m_fg = _stack(sf * sg, -sf * cg, zero)
    m_gg = _stack(-cf * cg, -cf * sg, zero)
    p_g = _stack(-cg, -sg, zero)
    zeros3 = np.zeros_like(n)
    nj = _vector_chain(n, m, n_g, -n, n_fg, n_gg, f, g)
    mj = _vector_chain(m, -n, m_g, -m, m_fg, m_gg, f, g)
    pj = _vector_chain(p, zeros3, p_g, zeros3, zeros3, -p, f, g)
    return nj, mj, pj


def director_from_angles(f: ScalarJet, g: ScalarJet):
    return frame_jets_from_angles(f, g)[0]


def qjet_from_uniaxial(s: ScalarJet, n: VectorJet):
    """Exact jet of Q = s (n ⊗ n - I/3) by the product rule."""
    nv, dn, d2n = n.value, n.jac, n.hess
    P = np.einsum("...a,...b->...ab", nv, nv)
    dP = np.einsum("...aj,...b->...abj", dn, nv)
    dP = dP + np.swapaxes(dP, -2, -3)
    t1 = np.einsum("...ajk,...b->...abjk", d2n, nv)
    t2 = np.einsum("...aj,...bk->...abjk", dn, dn)
    d2P = t1 + np.swapaxes(t1, -3, -4) + t2 + np.swapaxes(t2, -3, -4)
    A = P - I3 / 3
    sv = s.value[..., None, None]
    M = sv * A
    dM = np.einsum("...ab,...j->...abj", A, s.grad) + sv[..., None] * dP
    sdP = np.einsum("...j,...abk->...abjk", s.grad, dP)
    d2M = (np.einsum("...ab,...jk->...abjk", A, s.hess)
           + sdP + np.swapaxes(sdP, -1, -2)
           + sv[..., None, None] * d2P)
    return QJet.from_matrix_jets(M, dM, d2M)


class TrigField:
    """u(x) = c + sum_k a_k sin(w_k . x + phase_k), with exact derivatives."""

    def __init__(self, amps, waves, phases, offset=0.0):
        self.amps = np.asarray(amps, dtype=float)
        self.waves = np.asarray(waves, dtype=float).reshape(-1, 3)
        self.phases = np.asarray(phases, dtype=float)
        self.offset = float(offset)

    @classmethod
    def random(cls, rng, n_modes=4, amplitude=1.0, wavenumber=1.0, offset=0.0):
        return cls(amplitude * rng.uniform(-1, 1, n_modes) / np.sqrt(n_modes),
                   wavenumber * rng.normal(size=(n_modes, 3)),
                   rng.uniform(0, 2 * np.pi, n_modes), offset)

    def _arg(self, x):
        return np.einsum("...j,kj->...k", np.asarray(x, float), self.waves) + self.phases

    def __call__(self, x):
        return self.offset + np.sin(self._arg(x)) @ self.amps

    def jet(self, x):
        arg = self._arg(x)
        s, c = np.sin(arg) * self.amps, np.cos(arg) * self.amps
        return ScalarJet(self.offset + s.sum(-1),
                         c @ self.waves,
                         -np.einsum("...k,kj,kl->...jl", s, self.waves, self.waves))
