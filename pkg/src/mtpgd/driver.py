"""Outer linearization loop: space-time PGD solves with a frozen plastic force.

Iteration ``l`` integrates the plastic history from the strain of the
previous iterate over the whole time grid, assembles the space-time plastic
force and solves the linear space-time problem again. The loop stops when
the relative Frobenius change of the full displacement field drops below
``delta``.
"""
import logging
import time
from dataclasses import dataclass, field

import numpy as np

from .lowrank import separated_norm
from .pgd import SeparatedRhs, compress_rhs, pgd_solve
from .plasticity import history_sweep, plastic_rhs

log = logging.getLogger(__name__)


@dataclass
class SolveReport:
    iterations: int = 0
    errors_per_iter: list = field(default_factory=list)
    ranks_per_iter: list = field(default_factory=list)
    rhs_ranks: list = field(default_factory=list)
    converged: bool = False
    status: str = "running"
    wall_times: dict = field(default_factory=lambda: {"sweep": 0.0, "rhs": 0.0, "solve": 0.0})

    def to_csv(self, path):
        with open(path, "w") as fh:
            fh.write("iteration,error,rank,rhs_rank\n")
            for i, (e, m, r) in enumerate(zip(self.errors_per_iter, self.ranks_per_iter[1:],
                                              self.rhs_ranks), start=1):
                fh.write(f"{i},{e:.17g},{m},{r}\n")


class AndersonMixer:
    """Anderson acceleration of the fixed point ``x = G(x)``.

    ``update`` receives ``G(x_k)`` and returns ``x_{k+1}``. The first input
    is taken as is; later ones are mixed with up to ``depth`` previous
    differences by a least-squares fit of the fixed-point residuals.
    """

    def __init__(self, depth=5, beta=1.0):
        self.depth = depth
        self.beta = beta
        self.x = None
        self.f = None
        self.dX = []
        self.dF = []

    def update(self, gx):
        gx = np.asarray(gx, dtype=float)
        if self.x is None:
            self.x = gx
            return gx
        f = (gx - self.x).ravel()
        x = self.x.ravel()
        if self.f is not None and self.depth > 0:
            self.dF.append(f - self.f)
            self.dX.append(x - self._x_prev)
            del self.dF[:-self.depth], self.dX[:-self.depth]
        self.f, self._x_prev = f, x
        new = x + self.beta * f
        if self.dF:
            dF = np.column_stack(self.dF)
            gamma = np.linalg.lstsq(dF, f, rcond=None)[0]
            new = new - (np.column_stack(self.dX) + self.beta * dF) @ gamma
        self.x = new.reshape(gx.shape)
        return self.x


def strain_history(system, field_, waveform):
    """Total strain at every Gauss point and time node, shape (n_gauss, 4, n_t)."""
    g = np.asarray(getattr(waveform, "values", waveform), dtype=float)
    B = system.strain_op
    modes = B[:, system.free_dofs] @ field_.space_modes
    eps = modes @ field_.time_modes.T + np.outer(B @ system.lift, g)
    return eps.reshape(system.n_gauss, 4, g.size)


def full_field_norm(system, field_, waveform):
    g = np.asarray(getattr(waveform, "values", waveform), dtype=float)
    return float(np.hypot(field_.norm(), np.linalg.norm(system.lift) * np.linalg.norm(g)))


def relative_change(system, new, old, waveform):
    """``||U_new - U_old||_F / ||U_old||_F`` on the full field, in separated form.

    The lifting term is common to both fields and cancels in the numerator.
    """
    diff = separated_norm(np.hstack([new.space_modes, -old.space_modes]),
                          np.hstack([new.time_modes, old.time_modes]))
    return diff / full_field_norm(system, old, waveform)


def external_rhs(system, waveform):
    g = np.asarray(getattr(waveform, "values", waveform), dtype=float)
    return SeparatedRhs.rank_one(system.load, g)


def solve_elastic(system, waveform, eps_mode=1e-8, **pgd_kw):
    """Space-time elastic response to the imposed displacement."""
    return pgd_solve(system, external_rhs(system, waveform), eps_mode=eps_mode, **pgd_kw)


def run(system, waveform, delta=1e-4, max_iters=50, *, eps_mode=1e-8, rhs_tol=1e-10,
        relaxation=1.0, anderson_depth=5, max_modes=None, store_stress=True, callback=None):
    """Solve the elasto-plastic problem over the whole time grid.

    Parameters
    ----------
    system : StiffnessSystem
    waveform : LoadWaveform
    delta : float
        Stop when the relative change between iterates is below ``delta``.
    max_iters : int
    eps_mode, max_modes
        Passed to :func:`~mtpgd.pgd.pgd_solve`.
    rhs_tol : float
        Relative compression tolerance of the plastic force.
    relaxation : float
        Under-relaxation of the plastic force, in (0, 1].
    anderson_depth : int
        Number of previous iterates mixed by Anderson acceleration of the
        plastic force; 0 gives the plain fixed point.
    store_stress : bool
        Keep the stress history in the returned state.
    callback : callable, optional
        Called as ``callback(iteration, error, field)`` after each solve.

    Returns
    -------
    field : SpaceTimeField
    state : PlasticState
        History integrated from ``field`` itself.
    report : SolveReport
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    if not 0.0 < relaxation <= 1.0:
        raise ValueError("relaxation must lie in (0, 1]")
    if anderson_depth < 0:
        raise ValueError("anderson_depth must be non-negative")
    mat = system.material
    report = SolveReport()
    f_ext = external_rhs(system, waveform)
    solve_kw = dict(eps_mode=eps_mode, max_modes=max_modes)

    t0 = time.perf_counter()
    field_ = pgd_solve(system, f_ext, **solve_kw)
    report.wall_times["solve"] += time.perf_counter() - t0
    report.ranks_per_iter.append(field_.rank)

    mixer = AndersonMixer(anderson_depth, relaxation)
    e1 = None
    blowups = 0
    for it in range(1, max_iters + 1):
        t0 = time.perf_counter()
        state = history_sweep(strain_history(system, field_, waveform), mat, store_stress=False)
        t1 = time.perf_counter()
        fp = mixer.update(plastic_rhs(state, system))
        rhs = f_ext + compress_rhs(fp, rhs_tol) if np.any(fp) else f_ext
        t2 = time.perf_counter()
        new = pgd_solve(system, rhs, **solve_kw)
        t3 = time.perf_counter()
        report.wall_times["sweep"] += t1 - t0
        report.wall_times["rhs"] += t2 - t1
        report.wall_times["solve"] += t3 - t2

        err = relative_change(system, new, field_, waveform)
        field_ = new
        report.iterations = it
        report.errors_per_iter.append(err)
        report.ranks_per_iter.append(new.rank)
        report.rhs_ranks.append(rhs.rank - 1)
        log.info("iteration %d: e=%.3e rank=%d rhs rank=%d", it, err, new.rank, rhs.rank - 1)
        if callback is not None:
            callback(it, err, new)
        if err < delta:
            report.converged = True
            report.status = "converged"
            break
        if e1 is None:
            e1 = err
        blowups = blowups + 1 if err > 10.0 * e1 else 0
        if blowups >= 3:
            report.status = "diverged"
            log.warning("linearization diverging: e=%.3e against e_1=%.3e", err, e1)
            break
    else:
        report.status = "max_iters"

    state = history_sweep(strain_history(system, field_, waveform), mat, store_stress=store_stress)
    return field_, state, report
