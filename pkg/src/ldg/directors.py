"""
Director families, frames and uniaxial fields.

Each family is available two ways: as angle fields (f, g) on a grid,
differentiated by finite differences, and as exact jets at arbitrary
points.  The exact path is what makes statements such as "this residual
vanishes identically" testable without discretisation noise.
"""
from dataclasses import dataclass

import numpy as np

from . import jets as J
from . import tensor as qt
from .grids import AngleField, SphericalGrid, fornberg_weights


class ConvergenceError(RuntimeError):
    """Raised when an iterative solve fails; carries the best residual reached."""

    def __init__(self, message, residual=np.nan):
        super().__init__(message)
        self.residual = residual


# --------------------------------------------------------------------------- frames

def frame_from_angles(angles: AngleField):
    """Pointwise frame n, m = dn/df, p = (-sin g, cos g, 0) from angle fields."""
    f, g = angles.f, angles.g
    sf, cf, sg, cg = np.sin(f), np.cos(f), np.sin(g), np.cos(g)
    n = np.stack([sf * cg, sf * sg, cf], axis=-1)
    m = np.stack([cf * cg, cf * sg, -sf], axis=-1)
    p = np.stack([-sg, cg, np.zeros_like(g)], axis=-1)
    return qt.Frame(n, m, p)


def radial_hedgehog_angles(grid: SphericalGrid):
    """f = phi, g = theta, so that n = x / |x|."""
    return AngleField(grid.PHI.copy(), grid.THETA.copy(), winding=1)


def qfield_from_uniaxial(s, angles: AngleField):
    """Coefficient field of s (n ⊗ n - I/3) with n built from the angles."""
    n = frame_from_angles(angles).n
    return qt.project(qt.uniaxial_matrix(np.asarray(s, dtype=float), n))


@dataclass
class UniaxialField:
    """Scalar order parameter with director angles on a common grid."""
    s: np.ndarray
    angles: AngleField

    def to_qfield(self):
        return qfield_from_uniaxial(self.s, self.angles)


# --------------------------------------------------------------------------- escape profile

_GAUSS3_C = np.array([0.5 - np.sqrt(15) / 10, 0.5, 0.5 + np.sqrt(15) / 10])
_GAUSS3_A = np.array([
    [5 / 36, 2 / 9 - np.sqrt(15) / 15, 5 / 36 - np.sqrt(15) / 30],
    [5 / 36 + np.sqrt(15) / 24, 2 / 9, 5 / 36 - np.sqrt(15) / 24],
    [5 / 36 + np.sqrt(15) / 30, 2 / 9 + np.sqrt(15) / 15, 5 / 36],
])
_GAUSS3_B = np.array([5 / 18, 4 / 9, 5 / 18])


def _collocation_step(y0, h, tol=1e-15, max_iter=30):
    """One 3-stage Gauss-Legendre step of dy/du = cos y (order 6)."""
    Y = np.full(3, y0) + h * _GAUSS3_C * np.cos(y0)
    for _ in range(max_iter):
        F = Y - y0 - h * _GAUSS3_A @ np.cos(Y)
        Jm = np.eye(3) + h * _GAUSS3_A * np.sin(Y)[None, :]
        dY = np.linalg.solve(Jm, -F)
        Y += dY
        if np.max(np.abs(dY)) < tol:
            break
    else:
        raise ConvergenceError("collocation Newton iteration did not converge",
                               float(np.max(np.abs(F))))
    return y0 + h * _GAUSS3_B @ np.cos(Y)


@dataclass
class EscapeProfile:
    """Tabulated solution of rho dPsi/drho = cos Psi on [rho_min, 1].

    Nodes are uniform in u = ln rho, where the equation becomes the
    autonomous dPsi/du = cos Psi.  Values between nodes are obtained by
    one collocation step from the nearest node, so interpolation carries
    the same accuracy as the table.
    """
    rho: np.ndarray
    psi: np.ndarray
    psi_boundary: float
    substeps: int = 4

    @property
    def rho_min(self):
        return float(self.rho[0])

    def __call__(self, rho):
        rho = np.asarray(rho, dtype=float)
        if np.any(rho < self.rho_min * (1 - 1e-12)) or np.any(rho > 1 + 1e-12):
            raise ValueError(f"rho outside the profile domain [{self.rho_min:g}, 1]")
        u = np.log(np.clip(rho, self.rho_min, 1.0))
        un = np.log(self.rho)
        du = un[1] - un[0]
        k = np.clip(np.rint((u - un[0]) / du).astype(int), 0, len(un) - 1)
        out = np.empty(u.shape)
        flat_u, flat_k, flat_o = u.reshape(-1), k.reshape(-1), out.reshape(-1)
        for i in range(flat_u.size):
            h = flat_u[i] - un[flat_k[i]]
            y = self.psi[flat_k[i]]
            flat_o[i] = y if h == 0 else _collocation_step(y, h)
        return out

    def derivatives(self, rho):
        """Psi, dPsi/drho and d2Psi/drho2, the latter two from the equation itself."""
        rho = np.asarray(rho, dtype=float)
        psi = self(rho)
        c, s = np.cos(psi), np.sin(psi)
        return psi, c / rho, -c * (s + 1) / rho**2

    def ode_residual(self, order=8):
        """Max of |rho dPsi/drho - cos Psi| at interior nodes, derivative by finite differences.

        Differentiation is in u = ln rho on the uniform node spacing with a
        centred stencil of the given order; the first and last order/2
        nodes are skipped.
        """
        u = np.log(self.rho)
        half = order // 2
        w = fornberg_weights(0.0, np.arange(-half, half + 1) * (u[1] - u[0]), 1)[1]
        idx = np.arange(half, len(u) - half)
        d = np.array([w @ self.psi[i - half:i + half + 1] for i in idx])
        return float(np.max(np.abs(d - np.cos(self.psi[idx]))))


def solve_escape_profile(nodes=257, psi_boundary=0.0, rho_min=1e-4, substeps=4):
    """March rho dPsi/drho = cos Psi inward from rho = 1 with Psi(1) = psi_boundary.

    Parameters
    ----------
    nodes : int
        Number of tabulated nodes, uniform in ln rho (at least 16).
    psi_boundary : float
        Boundary value, in (-pi/2, pi/2).
    rho_min : float
        Innermost node.  The singular point rho = 0 is never evaluated;
        Psi approaches -pi/2 there.

    Returns
    -------
    EscapeProfile

    Raises
    ------
    ConvergenceError
        If a step's Newton iteration fails.
    """
    if nodes < 16:
        raise ValueError("need at least 16 nodes")
    if not -np.pi / 2 < psi_boundary < np.pi / 2:
        raise ValueError("psi_boundary must lie in (-pi/2, pi/2)")
    if not 0 < rho_min < 1:
        raise ValueError("rho_min must lie in (0, 1)")
    u = np.linspace(np.log(rho_min), 0.0, nodes)
    psi = np.empty(nodes)
    psi[-1] = psi_boundary
    h = (u[0] - u[1]) / substeps
    for i in range(nodes - 1, 0, -1):
        y = psi[i]
        for _ in range(substeps):
            y = _collocation_step(y, h)
        psi[i - 1] = y
    prof = EscapeProfile(np.exp(u), psi, float(psi_boundary), substeps)
    prof.rho[-1] = 1.0
    return prof


def escape_profile_closed_form(rho, psi_boundary=0.0):
    """Psi = 2 arctan(k rho) - pi/2 with k = tan(Psi(1)/2 + pi/4)."""
    k = np.tan(psi_boundary / 2 + np.pi / 4)
    return 2 * np.arctan(k * np.asarray(rho, dtype=float)) - np.pi / 2


def escape_angles(grid: SphericalGrid, profile: EscapeProfile):
    """f = pi/2 - Psi(r sin phi), g = theta."""
    rho = grid.R * np.sin(grid.PHI)
    if rho.min() < profile.rho_min * (1 - 1e-12) or rho.max() > 1 + 1e-12:
        raise ValueError("grid reaches outside the escape profile domain 0 < r sin(phi) <= 1")
    return AngleField(np.pi / 2 - profile(rho), grid.THETA.copy(), winding=1)


# --------------------------------------------------------------------------- exact jets

def radial_director_jet(points):
    """Exact jet of n = x / |x|."""
    x = np.asarray(points, dtype=float)
    r = np.linalg.norm(x, axis=-1)
    n = x / r[..., None]
    I = np.eye(3)
    jac = (I - np.einsum("...i,...j->...ij", n, n)) / r[..., None, None]
    nnn = np.einsum("...i,...j,...k->...ijk", n, n, n)
    dn = (np.einsum("ij,...k->...ijk", I, n) + np.einsum("ik,...j->...ijk", I, n)
          + np.einsum("jk,...i->...ijk", I, n))
    hess = (3 * nnn - dn) / r[..., None, None, None]**2
    return J.VectorJet(n, jac, hess)


def constant_director_jet(points, n):
    n = qt._check_unit(n)
    shape = np.asarray(points).shape[:-1]
    return J.VectorJet(np.broadcast_to(n, shape + (3,)).copy(), np.zeros(shape + (3, 3)),
                       np.zeros(shape + (3, 3, 3)))


def hedgehog_angle_jets(points):
    """Exact jets of f = phi and g = theta."""
    _, phi, theta = J.spherical_coordinate_jets(points)
    return phi, theta


def tilted_angle_jets(points, tilt=0.3):
    """f = phi + tilt, g = theta: a director that is not radial."""
    phi, theta = hedgehog_angle_jets(points)
    return J.ScalarJet(phi.value + tilt, phi.grad, phi.hess), theta


def escape_angle_jets(points, profile=None, psi_boundary=0.0):
    """Exact jets of f = pi/2 - Psi(rho), g = theta.

    With ``profile=None`` the closed-form profile is used; otherwise the
    tabulated one, with Psi' and Psi'' taken from the equation.
    """
    rho = J.cylindrical_radius_jet(points)
    if profile is None:
        psi = escape_profile_closed_form(rho.value, psi_boundary)
        c, s = np.cos(psi), np.sin(psi)
        d1, d2 = c / rho.value, -c * (s + 1) / rho.value**2
    else:
        psi, d1, d2 = profile.derivatives(rho.value)
    f = rho.apply(np.pi / 2 - psi, -d1, -d2)
    return f, J.azimuth_jet(points)


def helical_angle_jets(points, pitch=1.0):
    """f = pi/2, g = pitch * z: n = (cos kz, sin kz, 0)."""
    z = J.coordinate_jets(points)[2]
    shape = z.value.shape
    return J.ScalarJet.constant(np.pi / 2, shape), z.scale(pitch)


def constant_angle_jets(points, f0=0.3, g0=0.7):
    shape = np.asarray(points).shape[:-1]
    return J.ScalarJet.constant(f0, shape), J.ScalarJet.constant(g0, shape)


ANGLE_FAMILIES = {
    "radial": hedgehog_angle_jets,
    "escape": escape_angle_jets,
    "constant": constant_angle_jets,
    "helical": helical_angle_jets,
    "tilted": tilted_angle_jets,
}


def director_jets(family, points, **kw):
    """Exact (n, m, p) jets of a named director family at Cartesian points."""
    try:
        fn = ANGLE_FAMILIES[family]
    except KeyError:
        raise ValueError(f"unknown director family {family!r}; "
                         f"choose from {sorted(ANGLE_FAMILIES)}") from None
    f, g = fn(points, **kw)
    return J.frame_jets_from_angles(f, g)
