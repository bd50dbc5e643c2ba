"""Compiled kernels for real symmetric tridiagonal matrices.

diag has length n, off is the constant off-diagonal.  Kernels follow the
LAPACK dstebz/dstein pattern: Sturm-count bisection for eigenvalues, then
inverse iteration with a pivoted tridiagonal LU for eigenvectors.
"""
import numpy as np
from numba import njit

EPS = np.finfo(float).eps
SAFMIN = np.finfo(float).tiny


@njit(cache=True)
def sturm_count(diag, off2, x, pivmin):
    """Number of eigenvalues strictly below x."""
    n = diag.shape[0]
    count = 0
    q = diag[0] - x
    if abs(q) < pivmin:
        q = -pivmin
    if q < 0.0:
        count += 1
    for i in range(1, n):
        q = diag[i] - x - off2 / q
        if abs(q) < pivmin:
            q = -pivmin
        if q < 0.0:
            count += 1
    return count


@njit(cache=True)
def bisect_lowest(diag, off, k):
    """The k lowest eigenvalues, ascending, to full working precision."""
    n = diag.shape[0]
    off2 = off * off
    r = 2.0 * abs(off)
    lo0 = diag.min() - r
    hi0 = diag.max() + r
    tnorm = max(abs(lo0), abs(hi0))
    pivmin = SAFMIN * max(1.0, off2)
    lo0 -= 2.0 * EPS * tnorm * n + 2.0 * pivmin
    hi0 += 2.0 * EPS * tnorm * n + 2.0 * pivmin
    out = np.empty(k)
    lo = lo0
    for i in range(k):
        # eigenvalue i lies in [lo, hi]; lo carries over from the previous root
        hi = hi0
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if mid <= lo or mid >= hi:
                break
            if hi - lo <= 2.0 * EPS * max(abs(lo), abs(hi)) + pivmin:
                break
            if sturm_count(diag, off2, mid, pivmin) > i:
                hi = mid
            else:
                lo = mid
        out[i] = 0.5 * (lo + hi)
        # next eigenvalue is >= this one; widen slightly for ties
        lo = out[i] - 4.0 * EPS * max(abs(out[i]), 1.0)
    return out


@njit(cache=True)
def _lu_solve_shifted(diag, off, shift, b, pivfloor):
    """Solve (T - shift I) x = b in place on a copy with partial pivoting."""
    n = diag.shape[0]
    d = diag - shift
    dl = np.full(n - 1, off)
    du = np.full(n - 1, off)
    du2 = np.zeros(max(n - 2, 1))
    piv = np.zeros(n - 1, dtype=np.bool_)
    for i in range(n - 1):
        if abs(d[i]) >= abs(dl[i]):
            if d[i] == 0.0:
                d[i] = pivfloor
            fact = dl[i] / d[i]
            dl[i] = fact
            d[i + 1] -= fact * du[i]
        else:
            fact = d[i] / dl[i]
            d[i] = dl[i]
            dl[i] = fact
            temp = du[i]
            du[i] = d[i + 1]
            d[i + 1] = temp - fact * d[i + 1]
            if i < n - 2:
                du2[i] = du[i + 1]
                du[i + 1] = -fact * du[i + 1]
            piv[i] = True
    if d[n - 1] == 0.0:
        d[n - 1] = pivfloor
    x = b.copy()
    for i in range(n - 1):
        if piv[i]:
            temp = x[i]
            x[i] = x[i + 1]
            x[i + 1] = temp - dl[i] * x[i]
        else:
            x[i + 1] -= dl[i] * x[i]
    x[n - 1] /= d[n - 1]
    if n > 1:
        x[n - 2] = (x[n - 2] - du[n - 2] * x[n - 1]) / d[n - 2]
    for i in range(n - 3, -1, -1):
        x[i] = (x[i] - du[i] * x[i + 1] - du2[i] * x[i + 2]) / d[i]
    return x


@njit(cache=True)
def residual_norm(diag, off, lam, x):
    n = diag.shape[0]
    s = 0.0
    for i in range(n):
        r = (diag[i] - lam) * x[i]
        if i > 0:
            r += off * x[i - 1]
        if i < n - 1:
            r += off * x[i + 1]
        s += r * r
    return np.sqrt(s)


@njit(cache=True)
def inverse_iteration(diag, off, evals, start, maxit, tol):
    """Eigenvectors (unit 2-norm columns) for the given eigenvalues.

    Vectors whose eigenvalues sit within a cluster are re-orthogonalised
    against each other at every sweep.  Returns (vectors, n_iterations),
    n_iterations[j] = -1 flags a vector that did not converge.
    """
    n = diag.shape[0]
    k = evals.shape[0]
    tnorm = max(abs(diag.min() - 2 * abs(off)), abs(diag.max() + 2 * abs(off)))
    pivfloor = EPS * tnorm
    cluster = 1e-3 * tnorm
    vecs = np.zeros((k, n))
    its = np.zeros(k, dtype=np.int64)
    for j in range(k):
        lam = evals[j]
        x = np.ascontiguousarray(start[:, j])
        x /= np.sqrt(np.dot(x, x))
        converged = False
        for it in range(maxit):
            y = _lu_solve_shifted(diag, off, lam, x, pivfloor)
            for m in range(j):
                if abs(evals[m] - lam) < cluster:
                    c = np.dot(vecs[m], y)
                    y -= c * vecs[m]
            nrm = np.sqrt(np.dot(y, y))
            x = y / nrm
            if residual_norm(diag, off, lam, x) <= tol * tnorm:
                converged = True
                its[j] = it + 1
                # one more solve after convergence
                y = _lu_solve_shifted(diag, off, lam, x, pivfloor)
                for m in range(j):
                    if abs(evals[m] - lam) < cluster:
                        c = np.dot(vecs[m], y)
                        y -= c * vecs[m]
                x = y / np.sqrt(np.dot(y, y))
                break
        if not converged:
            its[j] = -1
        vecs[j] = x
    return vecs.T, its
