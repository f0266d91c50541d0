"""
Symmetric traceless 3x3 tensor algebra.

A Q-tensor is stored as its five coefficients in the orthonormal basis
E1..E5 of the space of symmetric traceless matrices.  All routines
operate on numpy arrays of shape (..., 5) (coefficients) or (..., 3, 3)
(matrices) and broadcast over leading axes.
"""
from dataclasses import dataclass

import numpy as np

SQRT2 = np.sqrt(2.0)
SQRT3 = np.sqrt(3.0)
SQRT6 = np.sqrt(6.0)

IDENTITY = np.eye(3)
E_X, E_Y, E_Z = IDENTITY


def _basis():
    ex, ey, ez = np.eye(3)
    outer = np.outer
    return np.array([
        np.sqrt(1.5) * (outer(ez, ez) - np.eye(3) / 3),
        np.sqrt(0.5) * (outer(ex, ex) - outer(ey, ey)),
        np.sqrt(0.5) * (outer(ex, ey) + outer(ey, ex)),
        np.sqrt(0.5) * (outer(ex, ez) + outer(ez, ex)),
        np.sqrt(0.5) * (outer(ey, ez) + outer(ez, ey)),
    ])


BASIS = _basis()
BASIS.setflags(write=False)

DEFAULT_UNIAXIAL_TOL = 1e-10


class BiaxialInput(ValueError):
    """Raised when a tensor expected to be uniaxial is biaxial."""


@dataclass(frozen=True)
class UniaxialPair:
    """Scalar order parameter and director of a uniaxial tensor.

    ``isotropic`` flags the degenerate Q = 0 case, for which the director
    is undefined and set to e_z by convention.
    """
    s: np.ndarray
    n: np.ndarray
    isotropic: bool = False


@dataclass(frozen=True)
class Frame:
    """Orthonormal triple (n, m, p), each of shape (..., 3)."""
    n: np.ndarray
    m: np.ndarray
    p: np.ndarray

    def orthonormality_defect(self):
        """Max deviation of the triple from an orthonormal resolution of I."""
        vecs = (self.n, self.m, self.p)
        worst = 0.0
        for i in range(3):
            for j in range(3):
                d = np.einsum("...i,...i->...", vecs[i], vecs[j]) - (i == j)
                worst = max(worst, float(np.max(np.abs(d))))
        res = sum(np.einsum("...i,...j->...ij", v, v) for v in vecs) - IDENTITY
        return max(worst, float(np.max(np.abs(res))))


def to_matrix(q):
    """Coefficients (..., 5) -> matrices (..., 3, 3)."""
    return np.einsum("...a,aij->...ij", np.asarray(q, dtype=float), BASIS)


def project(M):
    """Frobenius projection of (..., 3, 3) onto the basis, no checks."""
    return np.einsum("...ij,aij->...a", np.asarray(M, dtype=float), BASIS)


def from_matrix(M, tol=1e-12):
    """Basis coefficients of a symmetric traceless matrix.

    Raises ValueError if M is not symmetric or not traceless relative to
    its Frobenius norm.
    """
    M = np.asarray(M, dtype=float)
    norm = np.linalg.norm(M, axis=(-2, -1))
    scale = tol * np.maximum(norm, 1.0)
    asym = np.linalg.norm(M - np.swapaxes(M, -1, -2), axis=(-2, -1))
    if np.any(asym > scale):
        raise ValueError("matrix is not symmetric")
    if np.any(np.abs(np.trace(M, axis1=-2, axis2=-1)) > scale):
        raise ValueError("matrix is not traceless")
    return project(M)


def sym_part(A):
    A = np.asarray(A, dtype=float)
    return 0.5 * (A + np.swapaxes(A, -1, -2))


def sym_traceless_part(A):
    """ST(A) = (A + A^T)/2 - tr(A) I/3, returned as a matrix."""
    S = sym_part(A)
    tr = np.trace(S, axis1=-2, axis2=-1)
    return S - tr[..., None, None] * IDENTITY / 3


def sym_outer(u, v):
    """(u ⊙ v)_ij = (u_i v_j + u_j v_i)/2."""
    uv = np.einsum("...i,...j->...ij", u, v)
    return 0.5 * (uv + np.swapaxes(uv, -1, -2))


def norm(q):
    return np.sqrt(trace_q2(q))


def trace_q2(q):
    q = np.asarray(q, dtype=float)
    return np.sum(q * q, axis=-1)


def trace_q3(q):
    """tr(Q^3) as a cubic polynomial in the basis coefficients."""
    q = np.asarray(q, dtype=float)
    q1, q2, q3, q4, q5 = np.moveaxis(q, -1, 0)
    return (SQRT6 / 6 * q1**3
            - SQRT6 / 2 * (q2**2 + q3**2) * q1
            + (SQRT6 / 4 * q1 + 3 * SQRT2 / 4 * q2) * q4**2
            + (SQRT6 / 4 * q1 - 3 * SQRT2 / 4 * q2) * q5**2
            + 3 * SQRT2 / 2 * q3 * q4 * q5)


def biaxiality_measure(q):
    """(tr Q^2)^3 - 6 (tr Q^3)^2; zero exactly for uniaxial or isotropic Q."""
    return trace_q2(q)**3 - 6.0 * trace_q3(q)**2


def is_uniaxial(q, tol=DEFAULT_UNIAXIAL_TOL):
    q = np.asarray(q, dtype=float)
    return biaxiality_measure(q) <= tol * np.maximum(trace_q2(q)**3, 1e-300)


def _check_unit(n, tol=1e-10):
    n = np.asarray(n, dtype=float)
    if np.any(np.abs(np.linalg.norm(n, axis=-1) - 1.0) > tol):
        raise ValueError("director must have unit length")
    return n


def uniaxial_matrix(s, n):
    """s (n ⊗ n - I/3) as a matrix, no unit-length check."""
    s = np.asarray(s, dtype=float)
    nn = np.einsum("...i,...j->...ij", n, n)
    return s[..., None, None] * (nn - IDENTITY / 3)


def uniaxial_compose(s, n):
    """Coefficients of s (n ⊗ n - I/3) for unit n."""
    n = _check_unit(n)
    return project(uniaxial_matrix(s, n))


def fix_sign(v, tol=1e-12):
    """Flip v so that its first component with |v_i| > tol is positive."""
    v = np.array(v, dtype=float)
    first = np.argmax(np.abs(v) > tol, axis=-1)
    lead = np.take_along_axis(v, first[..., None], axis=-1)
    return np.where(lead < 0, -v, v)


def uniaxial_decompose(q, tol=DEFAULT_UNIAXIAL_TOL):
    """Recover (s, n) from a single uniaxial tensor.

    The director is the eigenvector of the non-degenerate eigenvalue with
    its first nonzero component made positive.  Q = 0 (to ``tol``) returns
    s = 0, n = e_z with ``isotropic=True``.  Raises BiaxialInput when the
    biaxiality measure exceeds ``tol * |Q|^6``.
    """
    q = np.asarray(q, dtype=float)
    if q.shape != (5,):
        raise ValueError("uniaxial_decompose takes a single tensor; use decompose_field")
    qn = norm(q)
    if qn < tol:
        return UniaxialPair(0.0, E_Z.copy(), isotropic=True)
    if biaxiality_measure(q) > tol * qn**6:
        raise BiaxialInput(f"biaxiality measure {biaxiality_measure(q):.3e} exceeds tolerance")
    s, n = decompose_field(q)
    return UniaxialPair(float(s), n)


def decompose_field(q):
    """Vectorised (s, n) for tensors assumed uniaxial, shapes (...), (..., 3).

    Picks the eigenvalue farthest from the other two as the
    non-degenerate one; no biaxiality check.
    """
    w, v = np.linalg.eigh(to_matrix(q))
    upper = (w[..., 1] - w[..., 0]) < (w[..., 2] - w[..., 1])
    idx = np.where(upper, 2, 0)
    lam = np.take_along_axis(w, idx[..., None], axis=-1)[..., 0]
    n = np.take_along_axis(v, idx[..., None, None], axis=-1)[..., 0]
    return 1.5 * lam, fix_sign(n)


def leading_eigenvector(q):
    """Eigenvector of the largest-magnitude eigenvalue of Q.

    When the two extreme eigenvalues tie in magnitude (spectrum a, 0, -a)
    the eigenvector of the positive one is taken.
    """
    w, v = np.linalg.eigh(to_matrix(q))
    scale = np.maximum(np.abs(w).max(axis=-1), 1e-300)
    top_wins = np.abs(w[..., 2]) >= np.abs(w[..., 0]) - 1e-12 * scale
    idx = np.where(top_wins, 2, 0)
    lam = np.take_along_axis(w, idx[..., None], axis=-1)[..., 0]
    n = np.take_along_axis(v, idx[..., None, None], axis=-1)[..., 0]
    return lam, fix_sign(n)


def random_unit_vectors(rng, size):
    v = rng.normal(size=(size, 3))
    return v / np.linalg.norm(v, axis=-1, keepdims=True)
