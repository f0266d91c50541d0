"""
Structured grids and finite-difference derivative operators.

Both grids expose the same interface: ``points`` (N, 3) Cartesian node
coordinates in C order, ``jet(u)`` returning the Cartesian gradient and
Hessian of a nodal field as a :class:`~ldg.jets.ScalarJet` (or
:class:`~ldg.jets.QJet` for Q-tensor coefficient fields), and an
``interior`` mask of nodes whose stencils are centred.

Spherical grids use half-offset polar nodes so the poles are never
sampled.  A stencil that runs past a pole continues on the opposite
meridian: the point (r, -phi, theta) is (r, phi, theta + pi).  This is
exact for any field that is a function of position (scalars, Cartesian
components) and is the default; angle fields, which jump across the
poles, use one-sided stencils instead (``polar="edge"``).
"""
import json
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import jets as J


def fornberg_weights(x0, x, m):
    """Finite-difference weights for derivatives 0..m at x0 from nodes x.

    Returns an array ``w[k, j]`` so that ``sum_j w[k, j] f(x[j])``
    approximates the k-th derivative of f at x0.
    """
    x = np.asarray(x, dtype=float)
    n = len(x)
    c = np.zeros((m + 1, n))
    c1, c4 = 1.0, x[0] - x0
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, m)
        c2, c5 = 1.0, c4
        c4 = x[i] - x0
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[k, i] = c1 * (k * c[k - 1, i - 1] - c5 * c[k, i - 1]) / c2
                c[0, i] = -c1 * c5 * c[0, i - 1] / c2
            for k in range(mn, 0, -1):
                c[k, j] = (c4 * c[k, j] - k * c[k - 1, j]) / c3
            c[0, j] = c4 * c[0, j] / c3
        c1 = c2
    return c


def _nonperiodic_ops(x, order):
    """Sparse first and second derivative matrices on nodes x, shifted stencils at the ends."""
    n = len(x)
    width = order + 1
    if n < width:
        raise ValueError(f"need at least {width} nodes for order {order} stencils (got {n})")
    half = width // 2
    d1 = sp.lil_matrix((n, n))
    d2 = sp.lil_matrix((n, n))
    for i in range(n):
        lo = min(max(i - half, 0), n - width)
        idx = np.arange(lo, lo + width)
        d1[i, idx] = fornberg_weights(x[i], x[idx], 1)[1]
        if lo != i - half and n > width:
            # one-sided second derivatives need one extra node to keep the order
            lo = min(max(i - half, 0), n - width - 1)
            idx = np.arange(lo, lo + width + 1)
        d2[i, idx] = fornberg_weights(x[i], x[idx], 2)[2]
    return d1.tocsr(), d2.tocsr()


def _central_weights(order):
    offs = np.arange(-(order // 2), order // 2 + 1)
    w = fornberg_weights(0.0, offs.astype(float), 2)
    return offs, w[1], w[2]


def _periodic_ops(n, h, order):
    offs, w1, w2 = _central_weights(order)
    if n < len(offs):
        raise ValueError(f"need at least {len(offs)} periodic nodes for order {order}")
    rows = np.repeat(np.arange(n), len(offs))
    cols = (rows + np.tile(offs, n)) % n
    d1 = sp.csr_matrix((np.tile(w1, n) / h, (rows, cols)), shape=(n, n))
    d2 = sp.csr_matrix((np.tile(w2, n) / h**2, (rows, cols)), shape=(n, n))
    d1.sum_duplicates()
    d2.sum_duplicates()
    return d1, d2


def _polar_ops(n_phi, n_theta, order, mode):
    """Operators on the (phi, theta) index plane, flattened as phi * n_theta + theta."""
    h = np.pi / n_phi
    if mode == "edge":
        phi = (np.arange(n_phi) + 0.5) * h
        d1, d2 = _nonperiodic_ops(phi, order)
        eye = sp.identity(n_theta, format="csr")
        return sp.kron(d1, eye, format="csr"), sp.kron(d2, eye, format="csr")
    if mode != "reflect":
        raise ValueError(f"unknown polar mode {mode!r}")
    if n_theta % 2:
        raise ValueError("pole reflection needs an even number of azimuthal nodes")
    offs, w1, w2 = _central_weights(order)
    rows, cols, v1, v2 = [], [], [], []
    half = n_theta // 2
    for j in range(n_phi):
        for k in range(n_theta):
            row = j * n_theta + k
            for o, a, b in zip(offs, w1, w2):
                jj, kk = j + o, k
                if jj < 0:
                    jj, kk = -jj - 1, (k + half) % n_theta
                elif jj >= n_phi:
                    jj, kk = 2 * n_phi - 1 - jj, (k + half) % n_theta
                rows.append(row)
                cols.append(jj * n_theta + kk)
                v1.append(a / h)
                v2.append(b / h**2)
    shape = (n_phi * n_theta,) * 2
    d1 = sp.csr_matrix((v1, (rows, cols)), shape=shape)
    d2 = sp.csr_matrix((v2, (rows, cols)), shape=shape)
    d1.sum_duplicates()
    d2.sum_duplicates()
    return d1, d2


def _apply(op, u, n_nodes):
    """Apply a sparse (N, N) operator to a nodal field with optional trailing axes."""
    u = np.asarray(u, dtype=float)
    flat = u.reshape(n_nodes, -1)
    return np.asarray(op @ flat).reshape(u.shape)


def _chain_rule(first, second, coord_jets):
    """Cartesian gradient and Hessian from coordinate partials.

    ``first[a]`` and ``second[a][b]`` have shape (N, C); ``coord_jets`` are
    ScalarJets of the three coordinates at the nodes.
    """
    grads = np.stack([c.grad for c in coord_jets], axis=1)       # (N, a, j)
    hessians = np.stack([c.hess for c in coord_jets], axis=1)    # (N, a, j, k)
    U1 = np.stack(first, axis=-1)                                # (N, C, a)
    U2 = np.stack([np.stack(row, axis=-1) for row in second], axis=-2)  # (N, C, a, b)
    grad = np.einsum("nca,naj->ncj", U1, grads)
    hess = (np.einsum("ncab,naj,nbk->ncjk", U2, grads, grads)
            + np.einsum("nca,najk->ncjk", U1, hessians))
    return grad, hess


class _GridBase:
    shape: tuple
    points: np.ndarray

    @property
    def size(self):
        return int(np.prod(self.shape))

    def _split(self, u):
        u = np.asarray(u, dtype=float)
        if u.shape[:3] != self.shape:
            raise ValueError(f"field shape {u.shape} does not match grid {self.shape}")
        return u.reshape(self.size, -1), u.shape[3:]

    def jet(self, u, **kw):
        """Scalar jet (value, Cartesian gradient, Hessian) of a nodal field of grid shape."""
        flat, tail = self._split(u)
        if tail:
            raise ValueError("jet() takes a scalar field; use qjet() for coefficients")
        grad, hess = self._cartesian(flat, **kw)
        return J.ScalarJet(flat[:, 0], grad[:, 0], hess[:, 0])

    def qjet(self, q, **kw):
        """QJet of a coefficient field of shape grid.shape + (5,)."""
        flat, tail = self._split(q)
        if tail != (5,):
            raise ValueError("qjet() expects a trailing axis of length 5")
        grad, hess = self._cartesian(flat, **kw)
        return J.QJet(flat, grad, hess)

    def vector_jet(self, v, **kw):
        flat, tail = self._split(v)
        if tail != (3,):
            raise ValueError("vector_jet() expects a trailing axis of length 3")
        grad, hess = self._cartesian(flat, **kw)
        return J.VectorJet(flat, grad, hess)

    def grad(self, u):
        return self.jet(u).grad.reshape(self.shape + (3,))

    def hessian(self, u):
        return self.jet(u).hess.reshape(self.shape + (3, 3))

    def laplacian(self, u):
        """Laplacian of a nodal field; trailing component axes are allowed."""
        flat, tail = self._split(u)
        _, hess = self._cartesian(flat)
        return np.trace(hess, axis1=-2, axis2=-1).reshape(self.shape + tail)

    def interior_flat(self):
        return self.interior.reshape(-1)


@dataclass(frozen=True)
class _Ops:
    d1: tuple
    d2: dict


class SphericalGrid(_GridBase):
    """Tensor-product grid in (r, phi, theta).

    Parameters
    ----------
    r : array_like
        Strictly increasing radial nodes, ``r[0] > 0``.
    n_phi, n_theta : int
        Polar nodes ``(j + 1/2) pi / n_phi`` and azimuthal nodes
        ``2 pi k / n_theta``.
    order : {2, 4}
        Formal order of the finite-difference stencils.
    """

    def __init__(self, r, n_phi, n_theta, order=2):
        r = np.asarray(r, dtype=float)
        if r.ndim != 1 or np.any(np.diff(r) <= 0):
            raise ValueError("radial nodes must be strictly increasing")
        if r[0] <= 0:
            raise ValueError("spherical grids exclude the origin (r[0] > 0)")
        if min(len(r), n_phi, n_theta) < 4:
            raise ValueError("need at least 4 nodes per axis")
        if order not in (2, 4):
            raise ValueError("order must be 2 or 4")
        self.r = r
        self.n_phi, self.n_theta = int(n_phi), int(n_theta)
        self.order = order
        self.phi = (np.arange(self.n_phi) + 0.5) * np.pi / self.n_phi
        self.theta = 2 * np.pi * np.arange(self.n_theta) / self.n_theta
        self.shape = (len(r), self.n_phi, self.n_theta)
        R, P, T = np.meshgrid(r, self.phi, self.theta, indexing="ij")
        self.R, self.PHI, self.THETA = R, P, T
        self.points = np.stack([R * np.sin(P) * np.cos(T), R * np.sin(P) * np.sin(T),
                                R * np.cos(P)], axis=-1).reshape(-1, 3)
        b = order // 2
        self.interior = np.zeros(self.shape, dtype=bool)
        self.interior[b:len(r) - b] = True
        self._ops = {}
        self._coord = None

    def descriptor(self):
        return {"kind": "spherical", "r": [float(self.r[0]), float(self.r[-1])],
                "n_r": len(self.r), "n_phi": self.n_phi, "n_theta": self.n_theta,
                "order": self.order, "r_nodes": [float(v) for v in self.r]}

    def coordinate_jets(self):
        if self._coord is None:
            self._coord = J.spherical_coordinate_jets(self.points)
        return self._coord

    def operators(self, polar="reflect"):
        """Sparse partial-derivative matrices in (r, phi, theta) on the flat node index."""
        if polar in self._ops:
            return self._ops[polar]
        nr, npt = len(self.r), self.n_phi * self.n_theta
        dr1, dr2 = _nonperiodic_ops(self.r, self.order)
        dp1, dp2 = _polar_ops(self.n_phi, self.n_theta, self.order, polar)
        dt1, dt2 = _periodic_ops(self.n_theta, 2 * np.pi / self.n_theta, self.order)
        I_r = sp.identity(nr, format="csr")
        I_p = sp.identity(self.n_phi, format="csr")
        I_pt = sp.identity(npt, format="csr")
        Dr = sp.kron(dr1, I_pt, format="csr")
        Drr = sp.kron(dr2, I_pt, format="csr")
        Dp = sp.kron(I_r, dp1, format="csr")
        Dpp = sp.kron(I_r, dp2, format="csr")
        Dt = sp.kron(I_r, sp.kron(I_p, dt1), format="csr")
        Dtt = sp.kron(I_r, sp.kron(I_p, dt2), format="csr")
        ops = _Ops(d1=(Dr, Dp, Dt),
                   d2={(0, 0): Drr, (1, 1): Dpp, (2, 2): Dtt,
                       (0, 1): (Dr @ Dp).tocsr(), (0, 2): (Dr @ Dt).tocsr(),
                       (1, 2): (Dp @ Dt).tocsr()})
        self._ops[polar] = ops
        return ops

    def partials(self, flat, polar="reflect"):
        """First and second coordinate partials of (N, C) nodal data."""
        ops = self.operators(polar)
        first = [np.asarray(D @ flat) for D in ops.d1]
        second = [[None] * 3 for _ in range(3)]
        for (a, b), D in ops.d2.items():
            second[a][b] = second[b][a] = np.asarray(D @ flat)
        return first, second

    def _cartesian(self, flat, polar="reflect"):
        first, second = self.partials(flat, polar)
        return _chain_rule(first, second, self.coordinate_jets())

    def cartesian_gradient_operators(self, polar="reflect"):
        """Sparse matrices G_j with (G_j u) = d u / d x_j at every node."""
        ops = self.operators(polar)
        grads = [c.grad for c in self.coordinate_jets()]
        return [sum(sp.diags(grads[a][:, j]) @ ops.d1[a] for a in range(3)).tocsr()
                for j in range(3)]

    def gradient_operators(self, polar="reflect"):
        return self.cartesian_gradient_operators(polar)

    def laplacian_operator(self, polar="reflect"):
        """Sparse Laplacian assembled by the chain rule from coordinate partials."""
        ops = self.operators(polar)
        cj = self.coordinate_jets()
        L = sum(sp.diags(cj[a].laplacian) @ ops.d1[a] for a in range(3))
        for (a, b), D in ops.d2.items():
            c = np.einsum("nj,nj->n", cj[a].grad, cj[b].grad)
            L = L + sp.diags(c if a == b else 2 * c) @ D
        return L.tocsr()

    def volume_weights(self):
        """Quadrature weights r^2 sin(phi) dr dphi dtheta (trapezoid in r)."""
        wr = np.zeros(len(self.r))
        dr = np.diff(self.r)
        wr[:-1] += dr / 2
        wr[1:] += dr / 2
        w = (wr[:, None, None] * self.r[:, None, None]**2 * np.sin(self.phi)[None, :, None]
             * (np.pi / self.n_phi) * (2 * np.pi / self.n_theta))
        return np.broadcast_to(w, self.shape).copy()

    def ray_index(self, phi_index=None, theta_index=0):
        """Flat node indices along a radial ray (default: the ray closest to the equator)."""
        j = self.n_phi // 2 if phi_index is None else phi_index
        return np.ravel_multi_index((np.arange(len(self.r)), np.full(len(self.r), j),
                                     np.full(len(self.r), theta_index)), self.shape)


class CartesianGrid(_GridBase):
    """Uniform box grid with centred interior stencils and one-sided closures.

    Parameters
    ----------
    lo, hi : sequence of 3 floats
        Box corners.
    shape : sequence of 3 ints
        Node counts per axis (at least ``order + 2``).
    """

    def __init__(self, lo, hi, shape, order=2):
        self.lo = np.asarray(lo, dtype=float)
        self.hi = np.asarray(hi, dtype=float)
        self.shape = tuple(int(n) for n in shape)
        if np.any(self.hi <= self.lo):
            raise ValueError("box must have positive extent")
        if order not in (2, 4):
            raise ValueError("order must be 2 or 4")
        if min(self.shape) < order + 2:
            raise ValueError(f"need at least {order + 2} nodes per axis")
        self.order = order
        self.axes = [np.linspace(a, b, n) for a, b, n in zip(self.lo, self.hi, self.shape)]
        self.h = (self.hi - self.lo) / (np.asarray(self.shape) - 1)
        self.ghost = order // 2
        X = np.meshgrid(*self.axes, indexing="ij")
        self.points = np.stack(X, axis=-1).reshape(-1, 3)
        g = self.ghost
        self.interior = np.zeros(self.shape, dtype=bool)
        self.interior[g:-g, g:-g, g:-g] = True
        self._ops = None

    def descriptor(self):
        return {"kind": "cartesian", "lo": self.lo.tolist(), "hi": self.hi.tolist(),
                "shape": list(self.shape), "order": self.order}

    def operators(self):
        if self._ops is None:
            eyes = [sp.identity(n, format="csr") for n in self.shape]
            d1, d2 = [], []
            for ax in range(3):
                a1, a2 = _nonperiodic_ops(self.axes[ax], self.order)
                f1, f2 = [], []
                for mats, target in ((a1, f1), (a2, f2)):
                    parts = [eyes[0], eyes[1], eyes[2]]
                    parts[ax] = mats
                    target.append(sp.kron(sp.kron(parts[0], parts[1]), parts[2], format="csr"))
                d1.append(f1[0])
                d2.append(f2[0])
            second = {(a, a): d2[a] for a in range(3)}
            for a in range(3):
                for b in range(a + 1, 3):
                    second[(a, b)] = (d1[a] @ d1[b]).tocsr()
            self._ops = _Ops(d1=tuple(d1), d2=second)
        return self._ops

    def gradient_operators(self):
        return list(self.operators().d1)

    def laplacian_operator(self):
        d2 = self.operators().d2
        return (d2[(0, 0)] + d2[(1, 1)] + d2[(2, 2)]).tocsr()

    def _cartesian(self, flat):
        ops = self.operators()
        grad = np.stack([np.asarray(D @ flat) for D in ops.d1], axis=-1)
        hess = np.empty(flat.shape + (3, 3))
        for (a, b), D in ops.d2.items():
            hess[..., a, b] = hess[..., b, a] = np.asarray(D @ flat)
        return grad, hess


def grid_from_descriptor(desc):
    """Rebuild a grid from the dictionary produced by its ``descriptor()``."""
    kind = desc.get("kind")
    if kind == "spherical":
        r = desc.get("r_nodes")
        if r is None:
            r = np.linspace(desc["r"][0], desc["r"][1], desc["n_r"])
        return SphericalGrid(r, desc["n_phi"], desc["n_theta"], order=desc.get("order", 2))
    if kind == "cartesian":
        return CartesianGrid(desc["lo"], desc["hi"], desc["shape"], order=desc.get("order", 2))
    raise ValueError(f"unknown grid kind {kind!r}")


@dataclass
class AngleField:
    """Director angles f, g on a grid: n = (sin f cos g, sin f sin g, cos f).

    ``winding`` is the number of turns g makes around the azimuthal
    period, used to unwrap g before differencing.
    """
    f: np.ndarray
    g: np.ndarray
    winding: int = 0

    def __post_init__(self):
        self.f = np.asarray(self.f, dtype=float)
        self.g = np.asarray(self.g, dtype=float)
        if self.f.shape != self.g.shape:
            raise ValueError("f and g must share a shape")
        if not (np.all(np.isfinite(self.f)) and np.all(np.isfinite(self.g))):
            raise ValueError("angle fields must be finite")


def angle_jets(grid, angles: AngleField):
    """Finite-difference jets of f and g, unwrapping the 2 pi ambiguity.

    On spherical grids the polar direction uses one-sided stencils, since
    angle fields are not continuous across the poles.
    """
    f = np.unwrap(np.unwrap(angles.f, axis=0), axis=1)
    g = np.unwrap(np.unwrap(angles.g, axis=0), axis=1)
    kw = {}
    if isinstance(grid, SphericalGrid):
        kw["polar"] = "edge"
        # remove the azimuthal winding so g is periodic in theta, then add its slope back
        w = angles.winding
        gp = g - w * grid.THETA
        gp = gp - 2 * np.pi * np.round((gp - gp[..., :1]) / (2 * np.pi))
        flat = np.stack([f.reshape(-1), gp.reshape(-1)], axis=1)
        first, second = grid.partials(flat, polar="edge")
        first[2] = first[2] + np.array([0.0, w])
        grad, hess = _chain_rule(first, second, grid.coordinate_jets())
        return (J.ScalarJet(f.reshape(-1), grad[:, 0], hess[:, 0]),
                J.ScalarJet(g.reshape(-1), grad[:, 1], hess[:, 1]))
    return grid.jet(f, **kw), grid.jet(g, **kw)


def write_field_csv(path, grid, fields):
    """Write node coordinates and named nodal fields as CSV with a header row."""
    names = list(fields)
    cols = [grid.points[:, 0], grid.points[:, 1], grid.points[:, 2]]
    header = ["x", "y", "z"]
    for name in names:
        v = np.asarray(fields[name], dtype=float).reshape(grid.size, -1)
        if v.shape[1] == 1:
            header.append(name)
            cols.append(v[:, 0])
        else:
            for c in range(v.shape[1]):
                header.append(f"{name}_{c + 1}")
                cols.append(v[:, c])
    data = np.column_stack(cols)
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        np.savetxt(fh, data, delimiter=",", fmt="%.17g")


def read_field_csv(path):
    """Read a CSV written by :func:`write_field_csv` into a dict of columns."""
    with open(path) as fh:
        header = fh.readline().strip().split(",")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return {name: data[:, i] for i, name in enumerate(header)}


def write_manifest(path, grid, files):
    """JSON manifest tying a grid descriptor to field files."""
    with open(path, "w") as fh:
        json.dump({"grid": grid.descriptor(), "fields": files}, fh, indent=2, sort_keys=True)
        fh.write("\n")
