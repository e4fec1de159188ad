"""J2 plasticity with linear isotropic hardening.

The return mapping is the implicit (backward Euler) radial return. With a
linear hardening law the consistency condition is linear in the plastic
multiplier increment, so it is solved in closed form.
"""
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from . import kernels
from .errors import InconsistentStateError, MtpgdError, NonFiniteStrainError

SQRT_3_2 = np.sqrt(1.5)


def deviator(sigma):
    """Deviatoric part of a Voigt-4 stress (shear entry untouched)."""
    sigma = np.asarray(sigma, dtype=float)
    s = sigma.copy()
    s[..., :3] -= sigma[..., :3].mean(axis=-1, keepdims=True)
    return s


def tensor_norm(s):
    """Frobenius norm of a symmetric tensor stored as Voigt-4 stress."""
    s = np.asarray(s)
    return np.sqrt(np.sum(s[..., :3] ** 2, axis=-1) + 2.0 * s[..., 3] ** 2)


def equivalent_stress(sigma):
    """Von Mises stress ``sqrt(3 J2)``."""
    return SQRT_3_2 * tensor_norm(deviator(sigma))


class YieldEval(NamedTuple):
    s: np.ndarray
    J2: float
    q: float
    Phi: float
    N_dir: np.ndarray
    dlambda: float


def yield_eval(sigma, ebar, mat):
    """Yield function data at a stress state.

    ``N_dir`` is the flow direction as a tensor in Voigt-4 stress layout
    (zero when the deviator vanishes); ``dlambda`` is the increment the
    radial return would take from this state if it were a trial state.
    """
    s = deviator(sigma)
    ns = float(tensor_norm(s))
    J2 = 0.5 * ns * ns
    q = np.sqrt(3.0 * J2)
    Phi = q - (mat.sigma_y0 + mat.H * ebar)
    N_dir = SQRT_3_2 * s / ns if ns > 0 else np.zeros(4)
    dlambda = max(Phi, 0.0) / (3.0 * mat.G + mat.H)
    return YieldEval(s, J2, q, Phi, N_dir, dlambda)


class ReturnResult(NamedTuple):
    eps_p: np.ndarray
    ebar: float
    sigma: np.ndarray
    dlambda: float


def elastic_stress(eps, eps_p, mat):
    """``C : (eps - eps_p)`` for Voigt-4 strains (engineering shear)."""
    return (np.asarray(eps, dtype=float) - np.asarray(eps_p, dtype=float)) @ mat.C.T


def trial_and_return(eps, eps_p_old, ebar_old, mat):
    """Elastic predictor and radial return at a single point.

    Parameters
    ----------
    eps : array_like, shape (4,)
        Total strain (xx, yy, zz, 2xy).
    eps_p_old : array_like, shape (4,)
        Plastic strain at the start of the step.
    ebar_old : float
        Accumulated plastic strain at the start of the step.
    mat : Material

    Returns
    -------
    ReturnResult
        Updated plastic strain, accumulated plastic strain, stress and the
        plastic multiplier increment (zero for an elastic step).
    """
    eps = np.asarray(eps, dtype=float)
    eps_p_old = np.asarray(eps_p_old, dtype=float)
    if not (np.all(np.isfinite(eps)) and np.all(np.isfinite(eps_p_old)) and np.isfinite(ebar_old)):
        raise NonFiniteStrainError(0, 0)
    if ebar_old < 0:
        raise ValueError("accumulated plastic strain cannot be negative")
    sig_trial = elastic_stress(eps, eps_p_old, mat)
    s = deviator(sig_trial)
    ns = float(tensor_norm(s))
    q = SQRT_3_2 * ns
    Phi = q - (mat.sigma_y0 + mat.H * ebar_old)
    if Phi <= 0.0:
        return ReturnResult(eps_p_old.copy(), float(ebar_old), sig_trial, 0.0)
    if ns == 0.0:
        raise MtpgdError("plastic demand with a vanishing deviator: corrupted state")
    dlam = Phi / (3.0 * mat.G + mat.H)
    N = SQRT_3_2 * s / ns
    eps_p = eps_p_old + dlam * N * np.array([1.0, 1.0, 1.0, 2.0])
    sigma = elastic_stress(eps, eps_p, mat)
    return ReturnResult(eps_p, float(ebar_old + dlam), sigma, float(dlam))


@dataclass
class PlasticState:
    """Plastic history at all Gauss points.

    ``eps_p`` has shape (n_gauss, 4, n_t), ``ebar_p`` (n_gauss, n_t) and the
    optional ``sigma`` (n_gauss, 4, n_t).
    """

    eps_p: np.ndarray
    ebar_p: np.ndarray
    sigma: Optional[np.ndarray] = None

    @property
    def n_gauss(self):
        return self.eps_p.shape[0]

    @property
    def n_times(self):
        return self.eps_p.shape[2]

    @classmethod
    def virgin(cls, n_gauss, n_times):
        return cls(np.zeros((n_gauss, 4, n_times)), np.zeros((n_gauss, n_times)))

    def increments(self):
        """Per-step plastic strain increments, first step measured from zero."""
        return np.diff(self.eps_p, axis=2, prepend=0.0)

    def dissipation(self):
        """``sigma : d eps_p`` per Gauss point and step (needs stored stress)."""
        if self.sigma is None:
            raise InconsistentStateError("stress history was not stored")
        return np.einsum("gct,gct->gt", self.sigma, self.increments())

    def dump_point_csv(self, path, gauss, times):
        """Time series of one Gauss point as CSV."""
        cols = [np.asarray(times), *self.eps_p[gauss], self.ebar_p[gauss]]
        header = "time,eps_p_xx,eps_p_yy,eps_p_zz,gamma_p_xy,ebar_p"
        if self.sigma is not None:
            cols += list(self.sigma[gauss])
            header += ",sigma_xx,sigma_yy,sigma_zz,sigma_xy"
        np.savetxt(path, np.column_stack(cols), delimiter=",", header=header,
                   comments="", fmt="%.17g")


def history_sweep(eps_history, mat, store_stress=True):
    """Integrate the constitutive law along the whole time grid.

    Parameters
    ----------
    eps_history : ndarray, shape (n_gauss, 4, n_t)
        Total strain at every Gauss point and time node.
    mat : Material
    store_stress : bool
        Keep the stress history (needed for dissipation checks and probes).

    Returns
    -------
    PlasticState
    """
    eps_history = np.asarray(eps_history, dtype=float)
    if eps_history.ndim != 3 or eps_history.shape[1] != 4:
        raise InconsistentStateError(f"bad strain history shape {eps_history.shape}")
    bad = ~np.isfinite(eps_history)
    if bad.any():
        idx = np.argwhere(bad)
        g, _, t = idx[np.argmin(idx[:, 2])]
        raise NonFiniteStrainError(g, t)
    eps_p, ebar, sigma = kernels.sweep(eps_history, mat.lam, mat.G, mat.H, mat.sigma_y0,
                                       store_stress)
    return PlasticState(eps_p, ebar, sigma)


def plastic_rhs(state, system):
    """Space-time plastic force, one free-dof column per time node."""
    if state.n_gauss != system.n_gauss:
        raise InconsistentStateError(
            f"state has {state.n_gauss} Gauss points, system has {system.n_gauss}")
    return system.force_op @ state.eps_p.reshape(4 * state.n_gauss, state.n_times)


def cycle_increments(series, steps_per_cycle, start=None):
    """Growth of a history variable over each complete loading loop.

    Loops run from one positive load peak to the next, so the first
    (virgin) quarter cycle is not counted. ``start`` defaults to the first
    peak of the triangle wave, a quarter cycle in.
    """
    series = np.asarray(series, dtype=float)
    if start is None:
        start = steps_per_cycle // 4
    return np.diff(series[start::steps_per_cycle])
