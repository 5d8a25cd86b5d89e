"""Independent reference computations shared by the test modules."""

import numpy as np


def capped_grid_max(lam, n, step=0.05):
    """Brute-force max of sum(lam * a) over a on a step grid, 0 <= a <= 1, sum a = n."""
    lam = np.asarray(lam, dtype=float)
    k = int(round(1 / step))
    if lam.size == 0:
        return 0.0
    if lam.size == 1:
        return float(lam[0] * n) if n <= 1 else -np.inf
    axes = np.meshgrid(*([np.arange(k + 1)] * (lam.size - 1)), indexing="ij")
    free = np.stack([x.ravel() for x in axes], axis=1)
    last = n * k - free.sum(axis=1)
    ok = (last >= 0) & (last <= k)
    a = np.hstack([free[ok], last[ok, None]]) / k
    return float(np.max(a @ lam))


def random_rank_n_projector(rng, dim, n):
    q, _ = np.linalg.qr(rng.standard_normal((dim, n)))
    return q @ q.T


def entrywise_trace_norm(m):
    """Trace norm of a symmetric matrix from LAPACK eigenvalues."""
    return float(np.sum(np.abs(np.linalg.eigvalsh(0.5 * (m + m.T)))))
