"""Dense low-rank helpers shared by the space-time and multi-time code."""
import numpy as np


def greedy_rank_one(M, tol, max_terms=None, max_iter=300, iter_tol=1e-13):
    """Greedy rank-one deflation of a dense matrix by power iteration.

    Each term is found by power iteration on the current residual ``R``
    (started from its largest row) and removed as ``R -= (R v) v^T``. Because
    ``v`` always lies in the row space of ``R``, a matrix of rank ``r`` is
    exhausted after at most ``r`` terms even when individual power
    iterations are not fully converged.

    Parameters
    ----------
    M : ndarray, shape (p, q)
    tol : float
        Stop once ``||R||_F / ||M||_F <= tol``.
    max_terms : int, optional
        Defaults to ``min(p, q)``.

    Returns
    -------
    left : ndarray, shape (p, k)
        Columns ``R v``, carrying the amplitude.
    right : ndarray, shape (q, k)
        Unit-norm columns ``v``.
    trace : ndarray, shape (k,)
        Relative residual after each term.
    """
    M = np.asarray(M, dtype=float)
    p, q = M.shape
    if max_terms is None:
        max_terms = min(p, q)
    norm0 = np.linalg.norm(M)
    left, right, trace = [], [], []
    if norm0 == 0.0:
        return np.zeros((p, 0)), np.zeros((q, 0)), np.zeros(0)
    R = M.copy()
    while len(left) < max_terms:
        rows = np.einsum("ij,ij->i", R, R)
        i = int(np.argmax(rows))
        if rows[i] == 0.0:
            break
        v = R[i] / np.sqrt(rows[i])
        sigma_old = 0.0
        for _ in range(max_iter):
            w = R.T @ (R @ v)
            nw = np.linalg.norm(w)
            if nw == 0.0:
                break
            v = w / nw
            if abs(nw - sigma_old) <= iter_tol * nw:
                break
            sigma_old = nw
        u = R @ v
        R -= np.outer(u, v)
        left.append(u)
        right.append(v)
        res = np.linalg.norm(R) / norm0
        trace.append(res)
        if res <= tol:
            break
    return np.column_stack(left), np.column_stack(right), np.asarray(trace)


def separated_norm(A, B):
    """Frobenius norm of ``A @ B.T`` without forming it.

    Uses thin QR factors of both mode matrices, ``||A B^T|| = ||R_A R_B^T||``,
    which avoids the cancellation of the Gram-matrix formula when the field
    is a small difference of large terms.
    """
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if A.shape[1] == 0:
        return 0.0
    ra = np.linalg.qr(A, mode="r")
    rb = np.linalg.qr(B, mode="r")
    return float(np.linalg.norm(ra @ rb.T))
