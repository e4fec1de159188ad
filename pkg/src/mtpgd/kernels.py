"""Hot loops of the constitutive update.

Two implementations of every kernel live here: a numba one and a vectorised
numpy one. The numba path is used whenever numba imports, unless the
environment variable ``MTPGD_DISABLE_NUMBA`` is set to a truthy value, in
which case the numpy path is used everywhere. Both are always importable so
they can be compared against each other (see ``benchmarks/``).

Strain vectors use the Voigt-4 layout ``(xx, yy, zz, 2xy)``; stress vectors
``(xx, yy, zz, xy)``.
"""
import os

import numpy as np

try:
    import numba
    from numba import prange
except ImportError:  # pragma: no cover - numba is a hard dependency in practice
    numba = None
    prange = range

_DISABLED = os.environ.get("MTPGD_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes", "on")
USE_NUMBA = numba is not None and not _DISABLED

BACKEND = "numba" if USE_NUMBA else "numpy"


# ---------------------------------------------------------------------------
# numpy implementations
# ---------------------------------------------------------------------------

def return_map_numpy(eps, eps_p_old, ebar_old, lam, mu, H, sy0):
    """Radial return for a batch of points.

    Parameters
    ----------
    eps, eps_p_old : ndarray, shape (n, 4)
        Total and previous plastic strain.
    ebar_old : ndarray, shape (n,)
        Previous accumulated plastic strain.
    lam, mu, H, sy0 : float
        Lame constants, hardening modulus and initial yield stress.

    Returns
    -------
    eps_p, ebar, sigma, dlambda : ndarray
    """
    ee = eps - eps_p_old
    tr = ee[:, 0] + ee[:, 1] + ee[:, 2]
    sig = np.empty_like(ee)
    sig[:, :3] = lam * tr[:, None] + 2.0 * mu * ee[:, :3]
    sig[:, 3] = mu * ee[:, 3]
    mean = (sig[:, 0] + sig[:, 1] + sig[:, 2]) / 3.0
    s = sig.copy()
    s[:, :3] -= mean[:, None]
    q = np.sqrt(1.5 * (s[:, 0] ** 2 + s[:, 1] ** 2 + s[:, 2] ** 2 + 2.0 * s[:, 3] ** 2))
    phi = q - (sy0 + H * ebar_old)
    plastic = phi > 0.0
    dlam = np.where(plastic, phi / (3.0 * mu + H), 0.0)
    q_safe = np.where(plastic, q, 1.0)
    coef = 1.5 * dlam / q_safe
    eps_p = eps_p_old.copy()
    eps_p[:, :3] += coef[:, None] * s[:, :3]
    eps_p[:, 3] += 2.0 * coef * s[:, 3]
    scale = 1.0 - 3.0 * mu * dlam / q_safe
    sig_new = s * scale[:, None]
    sig_new[:, :3] += mean[:, None]
    return eps_p, ebar_old + dlam, sig_new, dlam


def sweep_numpy(eps, lam, mu, H, sy0, store_stress=True):
    """History sweep, vectorised over points and sequential in time.

    ``eps`` has shape ``(n_points, 4, n_times)``. Every point starts virgin.
    Returns ``(eps_p, ebar, sigma)`` with ``sigma`` None unless requested.
    """
    n, _, nt = eps.shape
    eps_p = np.zeros((n, 4, nt))
    ebar = np.zeros((n, nt))
    sigma = np.zeros((n, 4, nt)) if store_stress else None
    ep = np.zeros((n, 4))
    eb = np.zeros(n)
    for t in range(nt):
        ep, eb, sig, _ = return_map_numpy(eps[:, :, t], ep, eb, lam, mu, H, sy0)
        eps_p[:, :, t] = ep
        ebar[:, t] = eb
        if store_stress:
            sigma[:, :, t] = sig
    return eps_p, ebar, sigma


# ---------------------------------------------------------------------------
# numba implementations
# ---------------------------------------------------------------------------

def _return_point(e0, e1, e2, e3, p0, p1, p2, p3, eb, lam, mu, H, sy0):
    a0 = e0 - p0
    a1 = e1 - p1
    a2 = e2 - p2
    tr = a0 + a1 + a2
    s0 = lam * tr + 2.0 * mu * a0
    s1 = lam * tr + 2.0 * mu * a1
    s2 = lam * tr + 2.0 * mu * a2
    s3 = mu * (e3 - p3)
    mean = (s0 + s1 + s2) / 3.0
    d0 = s0 - mean
    d1 = s1 - mean
    d2 = s2 - mean
    q = np.sqrt(1.5 * (d0 * d0 + d1 * d1 + d2 * d2 + 2.0 * s3 * s3))
    phi = q - (sy0 + H * eb)
    if phi > 0.0:
        dlam = phi / (3.0 * mu + H)
        coef = 1.5 * dlam / q
        p0 += coef * d0
        p1 += coef * d1
        p2 += coef * d2
        p3 += 2.0 * coef * s3
        eb += dlam
        scale = 1.0 - 3.0 * mu * dlam / q
        d0 *= scale
        d1 *= scale
        d2 *= scale
        s3 *= scale
    else:
        dlam = 0.0
    return p0, p1, p2, p3, eb, d0 + mean, d1 + mean, d2 + mean, s3, dlam


def _return_map_loop(eps, eps_p_old, ebar_old, lam, mu, H, sy0):
    n = eps.shape[0]
    eps_p = np.empty((n, 4))
    ebar = np.empty(n)
    sig = np.empty((n, 4))
    dlam = np.empty(n)
    for g in prange(n):
        r = _return_point(eps[g, 0], eps[g, 1], eps[g, 2], eps[g, 3],
                          eps_p_old[g, 0], eps_p_old[g, 1], eps_p_old[g, 2], eps_p_old[g, 3],
                          ebar_old[g], lam, mu, H, sy0)
        eps_p[g, 0] = r[0]
        eps_p[g, 1] = r[1]
        eps_p[g, 2] = r[2]
        eps_p[g, 3] = r[3]
        ebar[g] = r[4]
        sig[g, 0] = r[5]
        sig[g, 1] = r[6]
        sig[g, 2] = r[7]
        sig[g, 3] = r[8]
        dlam[g] = r[9]
    return eps_p, ebar, sig, dlam


def _sweep_loop(eps, lam, mu, H, sy0, eps_p, ebar, sigma, store_stress):
    n = eps.shape[0]
    nt = eps.shape[2]
    for g in prange(n):
        p0 = 0.0
        p1 = 0.0
        p2 = 0.0
        p3 = 0.0
        eb = 0.0
        for t in range(nt):
            r = _return_point(eps[g, 0, t], eps[g, 1, t], eps[g, 2, t], eps[g, 3, t],
                              p0, p1, p2, p3, eb, lam, mu, H, sy0)
            p0, p1, p2, p3, eb = r[0], r[1], r[2], r[3], r[4]
            eps_p[g, 0, t] = p0
            eps_p[g, 1, t] = p1
            eps_p[g, 2, t] = p2
            eps_p[g, 3, t] = p3
            ebar[g, t] = eb
            if store_stress:
                sigma[g, 0, t] = r[5]
                sigma[g, 1, t] = r[6]
                sigma[g, 2, t] = r[7]
                sigma[g, 3, t] = r[8]


if numba is not None:
    if "NUMBA_THREADING_LAYER_PRIORITY" not in os.environ:
        # skip the TBB probe, which warns on older system TBB builds
        numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]
    _jit = dict(cache=True, nogil=True)
    _return_point = numba.njit(inline="always", **_jit)(_return_point)
    _return_map_nb = numba.njit(parallel=True, **_jit)(_return_map_loop)
    _sweep_nb = numba.njit(parallel=True, **_jit)(_sweep_loop)


def return_map_numba(eps, eps_p_old, ebar_old, lam, mu, H, sy0):
    """Numba counterpart of :func:`return_map_numpy` (same signature)."""
    return _return_map_nb(np.ascontiguousarray(eps, dtype=np.float64),
                          np.ascontiguousarray(eps_p_old, dtype=np.float64),
                          np.ascontiguousarray(ebar_old, dtype=np.float64),
                          float(lam), float(mu), float(H), float(sy0))


def sweep_numba(eps, lam, mu, H, sy0, store_stress=True):
    """Numba counterpart of :func:`sweep_numpy` (same signature)."""
    eps = np.ascontiguousarray(eps, dtype=np.float64)
    n, _, nt = eps.shape
    eps_p = np.zeros((n, 4, nt))
    ebar = np.zeros((n, nt))
    # numba needs a typed array even when stress is not kept
    sigma = np.zeros((n, 4, nt)) if store_stress else np.zeros((1, 4, 1))
    _sweep_nb(eps, float(lam), float(mu), float(H), float(sy0), eps_p, ebar, sigma,
              bool(store_stress))
    return eps_p, ebar, (sigma if store_stress else None)


if USE_NUMBA:
    return_map = return_map_numba
    sweep = sweep_numba
else:
    return_map = return_map_numpy
    sweep = sweep_numpy
