"""Classical incremental solver used to check the space-time results.

Each time step is solved by modified Newton iterations with the constant
elastic stiffness: the plastic force of the current trial state is moved to
the right-hand side and the elastic system is solved again until the
equilibrium residual is small. Plasticity is integrated by the same radial
return as the space-time solver.
"""
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ProbeError, StepFailureError
from .plasticity import PlasticState


@dataclass
class Solution:
    """Dense displacement history (n_dofs, n_t) and the matching plastic state."""

    displacement: np.ndarray
    state: PlasticState


@dataclass
class IncrementalSolution(Solution):
    iterations: np.ndarray = None
    residuals: np.ndarray = None


def solve_incremental(system, waveform, tol_eq=1e-8, max_iter=200, store_stress=True):
    """Step-by-step elasto-plastic solution.

    Parameters
    ----------
    system : StiffnessSystem
    waveform : LoadWaveform
    tol_eq : float
        Accept a step when ``||r|| <= tol_eq (||F_ext|| + ||F_p||)``.
    max_iter : int
        Iteration cap per step; exceeding it raises :class:`StepFailureError`.
    """
    mat = system.material
    g = np.asarray(getattr(waveform, "values", waveform), dtype=float)
    nt = g.size
    n_gp = system.n_gauss
    B = system.strain_op
    B_free = B[:, system.free_dofs].tocsr()
    eps_lift = B @ system.lift

    u_hist = np.zeros((system.n_free, nt))
    eps_p = np.zeros((n_gp, 4, nt))
    ebar = np.zeros((n_gp, nt))
    sigma = np.zeros((n_gp, 4, nt)) if store_stress else None
    iters = np.zeros(nt, dtype=np.int64)
    resid = np.zeros(nt)

    ep_old = np.zeros((n_gp, 4))
    eb_old = np.zeros(n_gp)
    u = np.zeros(system.n_free)
    for i in range(nt):
        f_ext = system.load * g[i]
        n_ext = np.linalg.norm(f_ext)
        k = 0
        while True:
            eps = (B_free @ u + eps_lift * g[i]).reshape(n_gp, 4)
            ep, eb, sig, _ = kernels.return_map(eps, ep_old, eb_old, mat.lam, mat.G, mat.H,
                                                mat.sigma_y0)
            f_p = system.force_op @ ep.ravel()
            r = f_ext + f_p - system.K @ u
            ref = n_ext + np.linalg.norm(f_p)
            rel = np.linalg.norm(r) / ref if ref > 0 else 0.0
            if rel <= tol_eq:
                break
            if k == max_iter:
                raise StepFailureError(i, rel)
            u = u + system.solve(r)
            k += 1
        iters[i] = k
        resid[i] = rel
        u_hist[:, i] = u
        eps_p[:, :, i] = ep
        ebar[:, i] = eb
        if store_stress:
            sigma[:, :, i] = sig
        ep_old, eb_old = ep, eb

    return IncrementalSolution(system.expand(u_hist, g), PlasticState(eps_p, ebar, sigma),
                               iters, resid)


QUANTITIES = ("ux", "uy", "sxx", "syy", "szz", "sxy", "exx", "eyy", "exy",
              "epxx", "epyy", "epzz", "epxy", "ebar")


def locate(system, point):
    """Element containing ``point``; raises :class:`ProbeError` if none does."""
    mesh = system.mesh
    p = np.asarray(point, dtype=float)
    xe = mesh.nodes[mesh.elements]
    edge = np.roll(xe, -1, axis=1) - xe
    rel = p[None, None, :] - xe
    cross = edge[..., 0] * rel[..., 1] - edge[..., 1] * rel[..., 0]
    scale = np.abs(edge).max(axis=(1, 2))
    inside = np.all(cross >= -1e-12 * scale[:, None] ** 2, axis=1)
    hits = np.flatnonzero(inside)
    if hits.size == 0:
        raise ProbeError(f"point {tuple(p)} lies outside the mesh")
    return int(hits[0])


def nearest_gauss_point(system, point):
    locate(system, point)
    d = np.linalg.norm(system.gauss_xy - np.asarray(point, dtype=float), axis=1)
    return int(np.argmin(d))


def nearest_node(system, point):
    locate(system, point)
    d = np.linalg.norm(system.mesh.nodes - np.asarray(point, dtype=float), axis=1)
    return int(np.argmin(d))


def probe(solution, system, point, quantity):
    """Time series of one quantity at the node or Gauss point nearest ``point``.

    Displacements come from the nearest node; stress, strain and plastic
    variables from the nearest Gauss point, with stress recomputed as
    ``C : (eps - eps_p)`` from the displacement history.
    """
    if quantity not in QUANTITIES:
        raise ValueError(f"unknown quantity {quantity!r}; choose from {QUANTITIES}")
    if quantity in ("ux", "uy"):
        n = nearest_node(system, point)
        return solution.displacement[2 * n + (quantity == "uy")].copy()
    gp = nearest_gauss_point(system, point)
    rows = system.strain_op[4 * gp: 4 * gp + 4]
    eps = rows @ solution.displacement
    if quantity == "ebar":
        return solution.state.ebar_p[gp].copy()
    ep = solution.state.eps_p[gp]
    if quantity.startswith("ep"):
        c = "xx yy zz xy".split().index(quantity[2:])
        return ep[c] * (0.5 if c == 3 else 1.0)
    if quantity.startswith("e"):
        c = {"exx": 0, "eyy": 1, "exy": 3}[quantity]
        return eps[c] * (0.5 if c == 3 else 1.0)
    sig = system.material.C @ (eps - ep)
    return sig["xx yy zz xy".split().index(quantity[1:])]
