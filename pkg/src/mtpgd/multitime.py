"""Micro/macro separation of time functions.

A signal ``h`` sampled on ``N_t = N_T * N_tau`` uniform nodes is reshaped
into an ``N_tau x N_T`` matrix (micro index fastest) and approximated by a
short sum of micro-mode / macro-mode products.
"""
from dataclasses import dataclass

import numpy as np

from .errors import GridError
from .lowrank import greedy_rank_one


@dataclass(frozen=True)
class MultiTimeGrid:
    n_tau: int
    n_T: int
    dtau: float
    dT: float

    @property
    def n_t(self):
        return self.n_tau * self.n_T

    def micro_times(self):
        """``tau_i`` on ``[0, dT)``."""
        return np.arange(self.n_tau) * self.dtau

    def macro_times(self):
        return np.arange(self.n_T) * self.dT


def make_grid(n_t, n_cycles, k=1, cycle_duration=1.0):
    """Macro step of ``k`` loading cycles.

    >>> g = make_grid(800, 10)
    >>> (g.n_T, g.n_tau)
    (10, 80)
    """
    if k < 1 or n_cycles < 1 or n_cycles % k:
        raise GridError(f"{n_cycles} cycles cannot be split into macro steps of {k} cycles")
    n_T = n_cycles // k
    if n_t % n_T:
        raise GridError(f"{n_t} time nodes do not split into {n_T} macro steps")
    n_tau = n_t // n_T
    dT = k * cycle_duration
    return MultiTimeGrid(n_tau=n_tau, n_T=n_T, dtau=dT / n_tau, dT=dT)


def grid_from_sizes(n_tau, n_T, dt=1.0):
    return MultiTimeGrid(n_tau=n_tau, n_T=n_T, dtau=dt, dT=n_tau * dt)


def to_matrix(h, grid):
    """``M[i, j] = h[j * n_tau + i]``."""
    h = np.asarray(h, dtype=float)
    if h.shape != (grid.n_t,):
        raise GridError(f"signal of length {h.size} does not match grid of {grid.n_t} nodes")
    return h.reshape(grid.n_T, grid.n_tau).T


def from_matrix(M, grid):
    return np.asarray(M).T.reshape(grid.n_t)


@dataclass
class MultiTimeModes:
    """Sub-modes of one signal.

    ``micro_modes`` (n_tau, m) have unit norm; ``macro_modes`` (n_T, m)
    carry the amplitude. ``residual_trace[j]`` is the relative residual after
    ``j + 1`` sub-modes.
    """

    micro_modes: np.ndarray
    macro_modes: np.ndarray
    residual: float
    residual_trace: np.ndarray

    @property
    def n_submodes(self):
        return self.micro_modes.shape[1]

    def storage(self):
        return self.n_submodes * (self.micro_modes.shape[0] + self.macro_modes.shape[0])


def decompose(h, grid, tol=1e-6, max_submodes=None):
    """Greedy micro/macro decomposition of a sampled signal.

    With ``tol=0`` the deflation runs to the rank bound ``min(n_tau, n_T)``.
    """
    M = to_matrix(h, grid)
    bound = min(grid.n_tau, grid.n_T)
    if max_submodes is None or max_submodes > bound:
        max_submodes = bound
    macro, micro, trace = greedy_rank_one(M.T, tol, max_submodes)
    residual = float(trace[-1]) if trace.size else 0.0
    return MultiTimeModes(micro, macro, residual, trace)


def reconstruct(modes, grid):
    if modes.micro_modes.shape[0] != grid.n_tau or modes.macro_modes.shape[0] != grid.n_T:
        raise GridError("sub-mode lengths do not match the grid")
    return from_matrix(modes.micro_modes @ modes.macro_modes.T, grid)


def decompose_field(field, grid, tol=1e-6, max_submodes=None):
    """Decompose every time mode of a separated field.

    ``field`` may be a :class:`~mtpgd.pgd.SpaceTimeField` or a bare
    (n_t, m) array of time modes; strain fields share their time modes with
    the displacement they derive from.
    """
    modes = getattr(field, "time_modes", field)
    return [decompose(modes[:, k], grid, tol, max_submodes) for k in range(modes.shape[1])]


def reconstruct_time_modes(mt_modes, grid):
    return np.column_stack([reconstruct(m, grid) for m in mt_modes])


def storage_count(mt_modes):
    """Scalars stored by the sub-mode representation of all time modes."""
    return int(sum(m.storage() for m in mt_modes))
