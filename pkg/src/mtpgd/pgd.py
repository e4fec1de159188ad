"""Greedy space-time PGD for ``(K (x) I_t) U = F``.

The unknown is sought as ``U = sum_k w_k lambda_k^T`` with unit-norm space
modes ``w_k``. Each new mode is computed by an alternating-direction fixed
point on the current residual, which is kept in separated form
``R = S T^T`` and never densified.
"""
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import CompressionError, StagnationWarning, TruncationWarning
from .lowrank import greedy_rank_one, separated_norm


@dataclass
class SeparatedRhs:
    """``F ~ space_terms @ time_terms.T``."""

    space_terms: np.ndarray
    time_terms: np.ndarray
    residual: float = 0.0

    @property
    def rank(self):
        return self.space_terms.shape[1]

    def dense(self):
        return self.space_terms @ self.time_terms.T

    def norm(self):
        return separated_norm(self.space_terms, self.time_terms)

    @classmethod
    def rank_one(cls, space, time):
        return cls(np.asarray(space, dtype=float)[:, None], np.asarray(time, dtype=float)[:, None])

    def __add__(self, other):
        return SeparatedRhs(np.hstack([self.space_terms, other.space_terms]),
                            np.hstack([self.time_terms, other.time_terms]),
                            self.residual + other.residual)


@dataclass
class SpaceTimeField:
    """Rank-``m`` separated field over free dofs and time nodes."""

    space_modes: np.ndarray
    time_modes: np.ndarray
    stagnated: np.ndarray = None
    truncated: bool = False
    sweeps: list = field(default_factory=list)

    def __post_init__(self):
        if self.stagnated is None:
            self.stagnated = np.zeros(self.rank, dtype=bool)

    @property
    def rank(self):
        return self.space_modes.shape[1]

    def dense(self):
        return self.space_modes @ self.time_modes.T

    def norm(self):
        return separated_norm(self.space_modes, self.time_modes)

    def amplitudes(self):
        return np.linalg.norm(self.space_modes, axis=0) * np.linalg.norm(self.time_modes, axis=0)

    @classmethod
    def empty(cls, n_space, n_time):
        return cls(np.zeros((n_space, 0)), np.zeros((n_time, 0)))


class SPDOperator:
    """Minimal stand-in for a stiffness system: a sparse SPD matrix and its LU."""

    def __init__(self, K):
        self.K = sp.csc_matrix(K)
        self._lu = spla.splu(self.K)

    def solve(self, rhs):
        return self._lu.solve(np.asarray(rhs, dtype=float))


def compress_rhs(F, tol, max_terms=None):
    """Separated approximation of a dense right-hand side.

    Greedy rank-one deflation until ``||F - sum||_F <= tol ||F||_F``.
    Raises :class:`CompressionError` if ``max_terms`` terms do not suffice.
    """
    F = np.asarray(F, dtype=float)
    if not np.all(np.isfinite(F)):
        raise ValueError("right-hand side contains non-finite values")
    if not 0.0 < tol < 1.0:
        raise ValueError("tolerance must lie in (0, 1)")
    if max_terms is None:
        max_terms = min(F.shape)
    space, time, trace = greedy_rank_one(F, tol, max_terms)
    residual = float(trace[-1]) if trace.size else 0.0
    if residual > tol:
        raise CompressionError(
            f"relative residual {residual:.3e} above {tol:.1e} after {space.shape[1]} terms")
    return SeparatedRhs(space, time, residual)


def _matvec(sys, x):
    return sys.K @ x


def pgd_solve(sys, rhs, eps_mode=1e-8, max_modes=None, inner_tol=1e-8, max_inner=50):
    """Greedy rank-one enrichment with an alternating-direction fixed point.

    Parameters
    ----------
    sys
        Anything with a sparse/dense ``K`` and a ``solve`` method
        (:class:`~mtpgd.fem.StiffnessSystem`, :class:`SPDOperator`).
    rhs : SeparatedRhs
    eps_mode : float
        Enrichment stops when a new mode's norm falls below ``eps_mode``
        times the first mode's norm; that mode is discarded.
    max_modes : int, optional
        Defaults to ``min(n_space, n_time)``.
    inner_tol, max_inner
        Fixed-point stop: relative change of the time mode between sweeps.

    Returns
    -------
    SpaceTimeField
    """
    S = np.asarray(rhs.space_terms, dtype=float)
    T = np.asarray(rhs.time_terms, dtype=float)
    n, nt = S.shape[0], T.shape[0]
    if max_modes is None:
        max_modes = min(n, nt)
    field_ = SpaceTimeField.empty(n, nt)
    if rhs.rank == 0 or separated_norm(S, T) == 0.0:
        return field_

    # residual terms grow by one column per accepted mode
    cap = S.shape[1] + max_modes + 1
    RS = np.zeros((n, cap))
    RT = np.zeros((nt, cap))
    r = S.shape[1]
    RS[:, :r] = S
    RT[:, :r] = T
    W, L, stagnated, sweeps = [], [], [], []
    first = None
    truncated = False
    while True:
        Rs, Rt = RS[:, :r], RT[:, :r]
        term_norms = np.linalg.norm(Rs, axis=0) * np.linalg.norm(Rt, axis=0)
        lam = None
        for j in np.argsort(-term_norms, kind="stable"):
            if term_norms[j] == 0.0:
                break
            cand = Rt[:, j]
            if np.any(Rs @ (Rt.T @ cand)):
                lam = cand.copy()
                break
        if lam is None:
            break
        converged = False
        for it in range(max_inner):
            w = sys.solve(Rs @ (Rt.T @ lam)) / (lam @ lam)
            nw = np.linalg.norm(w)
            if nw == 0.0:
                break
            w /= nw
            Kw = _matvec(sys, w)
            lam_new = Rt @ (Rs.T @ w) / (w @ Kw)
            change = np.linalg.norm(lam_new - lam) / max(np.linalg.norm(lam_new), 1e-300)
            lam = lam_new
            if change < inner_tol:
                converged = True
                break
        if nw == 0.0:
            break
        amp = np.linalg.norm(lam)
        if first is None:
            first = amp
        elif amp < eps_mode * first:
            break
        if len(W) == max_modes:
            truncated = True
            break
        W.append(w)
        L.append(lam)
        stagnated.append(not converged)
        sweeps.append(it + 1)
        RS[:, r] = -Kw
        RT[:, r] = lam
        r += 1
        if amp == 0.0:
            break

    field_ = SpaceTimeField(np.column_stack(W), np.column_stack(L),
                            np.asarray(stagnated, dtype=bool), truncated, sweeps)
    if truncated:
        warnings.warn(f"PGD stopped at max_modes={max_modes} before eps_mode={eps_mode:g}",
                      TruncationWarning, stacklevel=2)
    if field_.stagnated.any():
        warnings.warn(f"{int(field_.stagnated.sum())} of {field_.rank} modes reached "
                      f"max_inner={max_inner} sweeps", StagnationWarning, stacklevel=2)
    return field_


def residual_norm(sys, rhs, field_):
    """Dense ``||F - (K (x) I) U||_F``; for checks on small systems."""
    K = sys.K.toarray() if sp.issparse(sys.K) else np.asarray(sys.K)
    return float(np.linalg.norm(rhs.dense() - K @ field_.dense()))


def evaluate_field(field_, system, waveform):
    """Dense displacement history over all dofs, lifting included."""
    g = np.asarray(getattr(waveform, "values", waveform), dtype=float)
    if field_.space_modes.shape[0] != system.n_free:
        raise ValueError(f"field has {field_.space_modes.shape[0]} space dofs, "
                         f"system has {system.n_free} free dofs")
    if field_.time_modes.shape[0] != g.size:
        raise ValueError(f"field has {field_.time_modes.shape[0]} time nodes, "
                         f"waveform has {g.size}")
    return system.expand(field_.dense(), g)
