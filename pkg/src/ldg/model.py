"""
Landau-de Gennes model: parameters, reduced units and energy densities.

Everything downstream works in reduced variables: lengths in units of
the coherence length xi, temperature through t.
"""
import warnings
from dataclasses import dataclass

import numpy as np

from . import tensor as qt
from .tensor import SQRT6


@dataclass(frozen=True)
class MaterialParams:
    alpha: float
    b2: float
    c2: float
    T: float
    T_star: float
    L: float
    L2_ratio: float = 0.0

    def __post_init__(self):
        for name in ("alpha", "b2", "c2", "L"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class ReducedParams:
    t: float
    L2: float = 0.0

    def __post_init__(self):
        if not np.isfinite(self.t) or not np.isfinite(self.L2):
            raise ValueError("parameters must be finite")
        if elastic_factor(self.L2) <= 0:
            raise ValueError(f"1 + 2 L2/3 must be positive (got L2={self.L2})")
        if self.t > 1:
            warnings.warn(f"t={self.t} is above the nematic-isotropic transition (t <= 1)",
                          stacklevel=2)

    @property
    def nematic(self):
        return self.t <= 1


def elastic_factor(L2):
    """Leading coefficient 1 + 2 L2 / 3 of the radial hedgehog equation."""
    return 1.0 + 2.0 * L2 / 3.0


def nondimensionalize(p: MaterialParams):
    """Reduced parameters and the coherence length xi."""
    b4 = p.b2**2
    t = 27.0 * p.alpha * (p.T - p.T_star) * p.c2 / b4
    xi = np.sqrt(27.0 * p.c2 * p.L / b4)
    return ReducedParams(t=t, L2=p.L2_ratio), xi


def s_plus(t):
    """Nonzero minimiser of the bulk potential over uniaxial tensors."""
    t = np.asarray(t, dtype=float)
    if np.any(t > 9.0 / 8.0):
        raise ValueError("s_plus requires t <= 9/8")
    out = np.sqrt(1.5) * (3.0 + np.sqrt(9.0 - 8.0 * t)) / 4.0
    return float(out) if out.ndim == 0 else out


def psi(s, t):
    return t * s - SQRT6 * s**2 + 4.0 / 3.0 * s**3


def psi_prime(s, t):
    return t - 2.0 * SQRT6 * s + 4.0 * s**2


def bulk_energy_density(q, t):
    """(t/2) tr Q^2 - sqrt6 tr Q^3 + (tr Q^2)^2 / 2 for coefficients (..., 5)."""
    q2 = qt.trace_q2(q)
    return 0.5 * t * q2 - SQRT6 * qt.trace_q3(q) + 0.5 * q2**2


def bulk_gradient(q, t):
    """t Q - 3 sqrt6 ST(Q^2) + 2 Q tr Q^2 in basis coefficients."""
    q = np.asarray(q, dtype=float)
    M = qt.to_matrix(q)
    q_sq = qt.project(M @ M)
    return (t + 2.0 * qt.trace_q2(q))[..., None] * q - 3.0 * SQRT6 * q_sq


def bulk_hessian_diag_bound(q, t):
    """Cheap upper bound on the bulk Hessian spectrum, used for step sizes."""
    return np.abs(t) + 6.0 * qt.trace_q2(q) + 6.0 * SQRT6 * qt.norm(q)


def divergence(grad_q):
    """(div Q)_i = sum_j d_j Q_ij from coefficient gradients (..., 5, 3)."""
    return np.einsum("aij,...aj->...i", qt.BASIS, grad_q)


def elastic_energy_density(grad_q, L2=0.0):
    """|grad Q|^2 / 2 + (L2/2) |div Q|^2 for coefficient gradients (..., 5, 3)."""
    grad_q = np.asarray(grad_q, dtype=float)
    dense = 0.5 * np.sum(grad_q**2, axis=(-2, -1))
    if L2 == 0.0:
        return dense
    div = divergence(grad_q)
    return dense + 0.5 * L2 * np.sum(div**2, axis=-1)


def restricted_bulk_density(s, beta, t):
    return (0.5 * t * (6.0 / 9.0 * s**2 + 2.0 * beta**2)
            + SQRT6 * (2.0 * beta**2 - 2.0 / 9.0 * s**2) * s
            + 2.0 / 9.0 * (s**2 + 3.0 * beta**2)**2)


def restricted_energy_density(s, beta, grad_s, grad_beta, frame_grads, t):
    """Energy density of Q = s(nn - I/3) + beta(mm - pp).

    ``frame_grads`` is a pair (grad_n, grad_m) of Jacobians
    ``[..., i, j] = d_j v_i`` together with the frame vector p, passed as
    ``(grad_n, grad_m, p)``.  The cross term s*beta vanishes only when n
    satisfies the extra equation; it is not included.
    """
    grad_n, grad_m, p = frame_grads
    grad_n_sq = np.sum(np.asarray(grad_n)**2, axis=(-2, -1))
    mtp = np.einsum("...ij,...i->...j", grad_m, p)
    mtp_sq = np.sum(mtp**2, axis=-1)
    elastic = (np.sum(np.asarray(grad_s)**2, axis=-1) / 3.0
               + np.sum(np.asarray(grad_beta)**2, axis=-1)
               + s**2 * grad_n_sq
               + beta**2 * (grad_n_sq + 4.0 * mtp_sq))
    return restricted_bulk_density(s, beta, t) + elastic
