"""Bilinear quadrilateral plane-strain finite elements.

Units are mm and MPa throughout, with unit out-of-plane thickness, so forces
come out in N. Degrees of freedom are numbered ``2 * node + component``.
Gauss points are numbered ``4 * element + q`` with the 2x2 rule ordered like
the element nodes.
"""
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import DegenerateElementError, InconsistentStateError, UnderconstrainedError

# reference-element node coordinates, counter-clockwise
NODE_XI = np.array([[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]])
GAUSS_XI = NODE_XI / np.sqrt(3.0)
GAUSS_W = np.ones(4)


def shape_eval(xi):
    """Bilinear shape functions and their reference gradients at ``xi``.

    Returns
    -------
    values : ndarray, shape (4,)
    gradients : ndarray, shape (4, 2)
        ``gradients[n, a] = dN_n / dxi_a``.
    """
    x, y = xi
    values = 0.25 * (1.0 + NODE_XI[:, 0] * x) * (1.0 + NODE_XI[:, 1] * y)
    gradients = np.empty((4, 2))
    gradients[:, 0] = 0.25 * NODE_XI[:, 0] * (1.0 + NODE_XI[:, 1] * y)
    gradients[:, 1] = 0.25 * NODE_XI[:, 1] * (1.0 + NODE_XI[:, 0] * x)
    return values, gradients


def _fill_b(dndx):
    """Voigt-4 strain-displacement rows from physical gradients (4, 2)."""
    B = np.zeros((4, 8))
    B[0, 0::2] = dndx[:, 0]
    B[1, 1::2] = dndx[:, 1]
    B[3, 0::2] = dndx[:, 1]
    B[3, 1::2] = dndx[:, 0]
    return B


def strain_operator(xe, xi):
    """Strain-displacement matrix of one element at local point ``xi``.

    Parameters
    ----------
    xe : array_like, shape (4, 2)
        Element node coordinates.
    xi : array_like, shape (2,)

    Returns
    -------
    B : ndarray, shape (4, 8)
        Maps ``(ux0, uy0, ux1, ...)`` to ``(exx, eyy, ezz, 2exy)``; the ``ezz``
        row is zero (plane strain).
    detJ : float
    """
    _, dn = shape_eval(xi)
    J = dn.T @ np.asarray(xe, dtype=float)
    detJ = J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0]
    if not detJ > 0.0:
        raise DegenerateElementError(f"non-positive Jacobian determinant {detJ:.3e}")
    dndx = np.linalg.solve(J, dn.T).T
    return _fill_b(dndx), detJ


@dataclass(frozen=True)
class Material:
    """Isotropic elasticity with linear isotropic hardening (MPa)."""

    E: float
    nu: float
    sigma_y0: float
    H: float

    def __post_init__(self):
        if not self.E > 0:
            raise ValueError("Young modulus must be positive")
        if not 0.0 < self.nu < 0.5:
            raise ValueError("Poisson ratio must lie in (0, 0.5)")
        if not self.sigma_y0 > 0:
            raise ValueError("initial yield stress must be positive")
        if not self.H >= 0:
            raise ValueError("hardening modulus must be non-negative")

    @classmethod
    def from_gpa(cls, E_GPa, nu, sigma_y0_MPa, H_GPa):
        return cls(E=1e3 * E_GPa, nu=nu, sigma_y0=sigma_y0_MPa, H=1e3 * H_GPa)

    @classmethod
    def steel(cls):
        """Steel used in both reference cases."""
        return cls.from_gpa(210.0, 0.3, 205.0, 2.0)

    @property
    def G(self):
        return self.E / (2.0 * (1.0 + self.nu))

    @property
    def lam(self):
        return self.E * self.nu / ((1.0 + self.nu) * (1.0 - 2.0 * self.nu))

    @property
    def C(self):
        """Plane-strain elasticity in Voigt order (xx, yy, zz, xy)."""
        lam, G = self.lam, self.G
        C = np.zeros((4, 4))
        C[:3, :3] = lam
        C[[0, 1, 2], [0, 1, 2]] += 2.0 * G
        C[3, 3] = G
        return C


@dataclass
class DirichletSet:
    """Nodes with imposed displacement.

    ``mask`` selects the constrained components; ``direction`` is the value
    of the unit lifting on those components (the imposed displacement is
    ``direction * waveform(t)``).
    """

    name: str
    nodes: np.ndarray
    mask: tuple = (True, True)
    direction: tuple = (0.0, 0.0)


@dataclass
class Mesh:
    nodes: np.ndarray
    elements: np.ndarray
    dirichlet: list = field(default_factory=list)
    name: str = ""

    def __post_init__(self):
        self.nodes = np.asarray(self.nodes, dtype=float)
        self.elements = np.asarray(self.elements, dtype=np.int64)

    @property
    def n_nodes(self):
        return self.nodes.shape[0]

    @property
    def n_elements(self):
        return self.elements.shape[0]

    @property
    def n_dofs(self):
        return 2 * self.n_nodes

    @cached_property
    def boundary_edges(self):
        """Edges used by exactly one element, as sorted node pairs."""
        e = self.elements
        edges = np.stack([e, np.roll(e, -1, axis=1)], axis=-1).reshape(-1, 2)
        key = np.sort(edges, axis=1)
        uniq, counts = np.unique(key, axis=0, return_counts=True)
        return uniq[counts == 1]

    @cached_property
    def boundary_nodes(self):
        return np.unique(self.boundary_edges)

    @property
    def dirichlet_nodes(self):
        if not self.dirichlet:
            return np.zeros(0, dtype=np.int64)
        return np.unique(np.concatenate([d.nodes for d in self.dirichlet]))

    @property
    def neumann_nodes(self):
        return np.setdiff1d(self.boundary_nodes, self.dirichlet_nodes)

    @property
    def neumann_edges(self):
        """Boundary edges not lying entirely on the Dirichlet sets."""
        on_d = np.isin(self.boundary_edges, self.dirichlet_nodes).all(axis=1)
        return self.boundary_edges[~on_d]

    def dirichlet_set(self, name):
        for d in self.dirichlet:
            if d.name == name:
                return d
        raise KeyError(name)

    def to_csv(self, nodes_path, elements_path):
        np.savetxt(nodes_path, np.column_stack([np.arange(self.n_nodes), self.nodes]),
                   delimiter=",", header="node,x,y", comments="", fmt=["%d", "%.17g", "%.17g"])
        np.savetxt(elements_path, np.column_stack([np.arange(self.n_elements), self.elements]),
                   delimiter=",", header="element,n0,n1,n2,n3", comments="", fmt="%d")


def element_gradients(mesh):
    """Physical shape gradients and ``w * detJ`` at every Gauss point.

    Returns ``dndx`` of shape (n_elements, 4, 4, 2) indexed
    ``[element, gauss, node, axis]`` and ``wdet`` of shape (n_elements, 4).
    """
    xe = mesh.nodes[mesh.elements]
    dn = np.stack([shape_eval(xi)[1] for xi in GAUSS_XI])
    J = np.einsum("qna,enb->eqab", dn, xe)
    det = J[..., 0, 0] * J[..., 1, 1] - J[..., 0, 1] * J[..., 1, 0]
    if np.any(~(det > 0.0)):
        e = int(np.argwhere(~(det > 0.0))[0, 0])
        raise DegenerateElementError(f"element {e} has a non-positive Jacobian")
    inv = np.empty_like(J)
    inv[..., 0, 0] = J[..., 1, 1] / det
    inv[..., 1, 1] = J[..., 0, 0] / det
    inv[..., 0, 1] = -J[..., 0, 1] / det
    inv[..., 1, 0] = -J[..., 1, 0] / det
    dndx = np.einsum("eqab,qnb->eqna", inv, dn)
    return dndx, det * GAUSS_W[None, :]


def gauss_points(mesh):
    """Physical coordinates of all Gauss points, shape (n_elements * 4, 2)."""
    N = np.stack([shape_eval(xi)[0] for xi in GAUSS_XI])
    return np.einsum("qn,enb->eqb", N, mesh.nodes[mesh.elements]).reshape(-1, 2)


def strain_matrix(mesh):
    """Global sparse strain operator, rows ``4 * gauss + component``."""
    dndx, wdet = element_gradients(mesh)
    ne = mesh.n_elements
    conn = mesh.elements
    gp = np.arange(4 * ne).reshape(ne, 4)
    # per (element, gauss, node): xx, yy, and the two shear entries
    rows = np.concatenate([
        np.broadcast_to((4 * gp)[:, :, None], (ne, 4, 4)).ravel(),
        np.broadcast_to((4 * gp + 1)[:, :, None], (ne, 4, 4)).ravel(),
        np.broadcast_to((4 * gp + 3)[:, :, None], (ne, 4, 4)).ravel(),
        np.broadcast_to((4 * gp + 3)[:, :, None], (ne, 4, 4)).ravel(),
    ])
    cx = np.broadcast_to(2 * conn[:, None, :], (ne, 4, 4)).ravel()
    cy = cx + 1
    cols = np.concatenate([cx, cy, cx, cy])
    vals = np.concatenate([
        dndx[..., 0].ravel(), dndx[..., 1].ravel(), dndx[..., 1].ravel(), dndx[..., 0].ravel(),
    ])
    B = sp.csr_matrix((vals, (rows, cols)), shape=(16 * ne, mesh.n_dofs))
    return B, wdet.ravel()


class StiffnessSystem:
    """Assembled elastic system with Dirichlet dofs eliminated.

    Attributes
    ----------
    K : scipy.sparse.csc_matrix
        Stiffness over free dofs.
    K_full : scipy.sparse.csr_matrix
        Unconstrained stiffness.
    free_dofs, fixed_dofs : ndarray
    free_dof_map : ndarray
        Global dof -> row of ``K`` (-1 for constrained dofs).
    lift : ndarray
        Unit imposed displacement over all dofs.
    load : ndarray
        Free-dof right-hand side of a unit imposed displacement,
        ``-K_fc @ lift_c``.
    strain_op : scipy.sparse.csr_matrix
        All dofs -> Voigt strain at Gauss points (flattened).
    force_op : scipy.sparse.csr_matrix
        Flattened Gauss-point plastic strain -> free-dof plastic force.
    """

    def __init__(self, mesh, material):
        self.mesh = mesh
        self.material = material
        B, wdet = strain_matrix(mesh)
        self.strain_op = B
        self.gauss_weights = wdet
        self.gauss_xy = gauss_points(mesh)
        n_gp = wdet.size
        D = sp.kron(sp.diags(wdet), sp.csr_matrix(material.C), format="csr")
        DB = D @ B
        K_full = (B.T @ DB).tocsr()
        K_full = 0.5 * (K_full + K_full.T)
        K_full.sort_indices()
        self.K_full = K_full.tocsr()

        fixed_mask = np.zeros(mesh.n_dofs, dtype=bool)
        lift = np.zeros(mesh.n_dofs)
        for d in mesh.dirichlet:
            for c in (0, 1):
                if d.mask[c]:
                    fixed_mask[2 * d.nodes + c] = True
                    lift[2 * d.nodes + c] = d.direction[c]
        if not fixed_mask.any():
            raise UnderconstrainedError("no Dirichlet dofs: stiffness is singular")
        self.fixed_dofs = np.flatnonzero(fixed_mask)
        self.free_dofs = np.flatnonzero(~fixed_mask)
        self.free_dof_map = np.full(mesh.n_dofs, -1, dtype=np.int64)
        self.free_dof_map[self.free_dofs] = np.arange(self.free_dofs.size)
        self.lift = lift

        Kf = self.K_full[self.free_dofs]
        self.K = Kf[:, self.free_dofs].tocsc()
        self.load = -(Kf[:, self.fixed_dofs] @ lift[self.fixed_dofs])
        self.force_op = (DB.T.tocsr())[self.free_dofs]
        assert self.force_op.shape == (self.free_dofs.size, 4 * n_gp)
        self._factorize()

    def _factorize(self):
        try:
            lu = spla.splu(self.K)
        except RuntimeError as exc:
            raise UnderconstrainedError(str(exc)) from exc
        d = np.abs(lu.U.diagonal())
        if d.min() <= 1e-12 * d.max():
            raise UnderconstrainedError("stiffness is numerically singular after elimination")
        self._lu = lu

    @property
    def n_free(self):
        return self.free_dofs.size

    @property
    def n_gauss(self):
        return self.gauss_weights.size

    def solve(self, rhs):
        """Solve ``K x = rhs`` for one or several right-hand sides."""
        return self._lu.solve(np.asarray(rhs, dtype=float))

    def expand(self, u_free, g=0.0):
        """Full displacement from free values plus ``g`` times the lifting.

        Works on a single vector or on columns of a (n_free, n_t) array with
        ``g`` of length n_t.
        """
        u_free = np.asarray(u_free)
        g = np.asarray(g, dtype=float)
        if u_free.ndim == 1:
            u = self.lift * g
            u[self.free_dofs] = u_free
        else:
            u = np.outer(self.lift, g)
            u[self.free_dofs] = u_free
        return u

    def dump_csv(self, path):
        """Write the free-dof stiffness as ``row,col,value`` triplets."""
        K = self.K.tocoo()
        np.savetxt(path, np.column_stack([K.row, K.col, K.data]), delimiter=",",
                   header="row,col,value", comments="", fmt=["%d", "%d", "%.17g"])


def assemble_stiffness(mesh, material):
    return StiffnessSystem(mesh, material)


def internal_force_from_state(system, eps_p):
    """Free-dof plastic force ``int B^T C eps_p`` for one time instant.

    ``eps_p`` holds the plastic strain at every Gauss point, shape (n_gauss, 4).
    """
    eps_p = np.asarray(eps_p, dtype=float)
    if eps_p.shape != (system.n_gauss, 4):
        raise InconsistentStateError(
            f"expected plastic strain of shape {(system.n_gauss, 4)}, got {eps_p.shape}")
    return system.force_op @ eps_p.ravel()
