"""Dense real linear algebra: SVD, symmetric eigendecomposition and norms.

The SVD is a cyclic one-sided Jacobi iteration (Hestenes). Factors are put
in a canonical form so that repeated calls are bit-identical:

* singular values are sorted nonincreasing, ties keep the Jacobi column order;
* in every left singular vector the entry of largest magnitude is
  nonnegative (first such row on ties) and the right vector follows it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a declared dependency
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f

__all__ = [
    "DEFAULT_RANK_TOL",
    "SvdFactors",
    "SymEig",
    "as_matrix",
    "svd",
    "sym_eig",
    "operator_norm",
    "schatten_norm",
    "hs_inner",
    "canonical_signs",
]

DEFAULT_RANK_TOL = 1e-10
DEFAULT_SYMMETRY_TOL = 1e-12
MAX_SWEEPS = 64

_EPS = np.finfo(float).eps


def _frozen(x, dtype=float):
    x = np.array(x, dtype=dtype)
    x.setflags(write=False)
    return x


def as_matrix(a, name="a"):
    """Return ``a`` as a finite 2-D float array, or raise ValidationError."""
    arr = np.asarray(a, dtype=float)
    if arr.ndim != 2:
        raise ValidationError(f"{name}: expected a 2-D matrix, got ndim={arr.ndim}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValidationError(f"{name}: empty matrix of shape {arr.shape}")
    bad = ~np.isfinite(arr)
    if bad.any():
        i, j = np.argwhere(bad)[0]
        raise ValidationError(f"{name}: non-finite entry {arr[i, j]!r} at index ({i}, {j})")
    return arr


@dataclass(frozen=True)
class SvdFactors:
    """Thin SVD ``a = u @ diag(sigma) @ v.T`` in canonical form."""

    u: np.ndarray
    sigma: np.ndarray
    v: np.ndarray
    rank_tol: float = DEFAULT_RANK_TOL

    @property
    def shape(self):
        return (self.u.shape[0], self.v.shape[0])

    @property
    def rank(self):
        """Numerical rank: number of sigma above ``rank_tol * sigma[0]``."""
        if self.sigma[0] == 0.0:
            return 0
        return int(np.count_nonzero(self.sigma > self.rank_tol * self.sigma[0]))

    def reconstruct(self):
        return (self.u * self.sigma) @ self.v.T


@dataclass(frozen=True)
class SymEig:
    """Eigenpairs of a symmetric matrix, values nonincreasing."""

    vectors: np.ndarray
    values: np.ndarray


@njit(cache=True)
def _jacobi_sweeps(a, v, tol, max_sweeps):
    # a: m x n work matrix (m >= n), columns are orthogonalised in place.
    # v: n x n accumulator of the right rotations.
    m, n = a.shape
    tiny = 1e-300
    for sweep in range(max_sweeps):
        rotated = False
        for i in range(n - 1):
            for j in range(i + 1, n):
                alpha = 0.0
                beta = 0.0
                gamma = 0.0
                for k in range(m):
                    alpha += a[k, i] * a[k, i]
                    beta += a[k, j] * a[k, j]
                    gamma += a[k, i] * a[k, j]
                if abs(gamma) <= tiny or abs(gamma) <= tol * np.sqrt(alpha * beta):
                    continue
                rotated = True
                zeta = (beta - alpha) / (2.0 * gamma)
                if zeta >= 0.0:
                    t = 1.0 / (zeta + np.sqrt(1.0 + zeta * zeta))
                else:
                    t = -1.0 / (-zeta + np.sqrt(1.0 + zeta * zeta))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = c * t
                for k in range(m):
                    x = a[k, i]
                    y = a[k, j]
                    a[k, i] = c * x - s * y
                    a[k, j] = s * x + c * y
                for k in range(n):
                    x = v[k, i]
                    y = v[k, j]
                    v[k, i] = c * x - s * y
                    v[k, j] = s * x + c * y
        if not rotated:
            return sweep + 1
    return max_sweeps + 1


def _complete_orthonormal(q, good):
    """Fill the columns of ``q`` not flagged in ``good`` with unit vectors
    orthogonal to everything already accepted, scanning e_1, e_2, ...
    """
    m, r = q.shape
    basis = [q[:, k] for k in range(r) if good[k]]
    fill = [k for k in range(r) if not good[k]]
    e = 0
    for k in fill:
        while True:
            w = np.zeros(m)
            w[e] = 1.0
            e += 1
            for _ in range(2):
                for b in basis:
                    w -= (b @ w) * b
            nrm = np.linalg.norm(w)
            if nrm > 0.5:
                w /= nrm
                break
        q[:, k] = w
        basis.append(w)
    return q


def canonical_signs(u, v=None):
    """Flip columns so the largest-magnitude entry of each ``u`` column is
    nonnegative (lowest row wins ties); ``v`` columns follow ``u``.
    """
    u = np.array(u, dtype=float)
    v = None if v is None else np.array(v, dtype=float)
    rows = np.argmax(np.abs(u), axis=0)
    flip = u[rows, np.arange(u.shape[1])] < 0
    u[:, flip] *= -1.0
    if v is not None:
        v[:, flip] *= -1.0
    return u, v


def svd(a, rank_tol=DEFAULT_RANK_TOL):
    """Thin singular value decomposition by one-sided Jacobi rotations.

    Parameters
    ----------
    a : array_like, shape (N, M)
        Finite real matrix.
    rank_tol : float
        Relative threshold used by :attr:`SvdFactors.rank`.

    Returns
    -------
    SvdFactors
        ``u`` is N x r, ``sigma`` has length r, ``v`` is M x r with
        r = min(N, M).
    """
    a = as_matrix(a)
    if rank_tol < 0:
        raise ValidationError(f"rank_tol must be nonnegative, got {rank_tol}")
    transposed = a.shape[0] < a.shape[1]
    work = np.array(a.T if transposed else a, dtype=float, order="C")
    m, n = work.shape
    right = np.eye(n)
    # unit max-entry scaling keeps the Gram products clear of under/overflow
    scale = float(np.max(np.abs(work)))
    if scale > 0.0:
        work /= scale
        _jacobi_sweeps(work, right, m * _EPS, MAX_SWEEPS)
    sigma = np.sqrt(np.einsum("ij,ij->j", work, work))
    order = np.argsort(-sigma, kind="stable")
    sigma = sigma[order]
    work = work[:, order]
    right = right[:, order]

    good = sigma > sigma[0] * m * _EPS if sigma[0] > 0 else np.zeros(n, dtype=bool)
    left = np.zeros((m, n))
    left[:, good] = work[:, good] / sigma[good]
    if not good.all():
        left = _complete_orthonormal(left, good)
    sigma = sigma * scale

    if transposed:
        left, right = right, left
    left, right = canonical_signs(left, right)
    return SvdFactors(_frozen(left), _frozen(sigma), _frozen(right), float(rank_tol))


def sym_eig(s, symmetry_tol=DEFAULT_SYMMETRY_TOL):
    """Eigendecomposition of a symmetric matrix, values sorted nonincreasing.

    Backed by LAPACK ``syevd`` (``numpy.linalg.eigh``), which keeps it
    independent of the Jacobi SVD it is used to cross-check. Eigenvectors
    get the same sign convention as singular vectors.
    """
    s = as_matrix(s, "s")
    if s.shape[0] != s.shape[1]:
        raise ValidationError(f"s: expected a square matrix, got shape {s.shape}")
    asym = np.max(np.abs(s - s.T))
    scale = max(1.0, float(np.max(np.abs(s))))
    if asym > symmetry_tol * scale:
        raise ValidationError(
            f"s: not symmetric, max |s - s.T| = {asym:.3e} exceeds {symmetry_tol:.1e} * {scale:.3e}"
        )
    w, q = np.linalg.eigh(0.5 * (s + s.T))
    order = np.argsort(-w, kind="stable")
    vectors, _ = canonical_signs(q[:, order])
    return SymEig(_frozen(vectors), _frozen(w[order]))


def operator_norm(a):
    """Spectral norm, the largest singular value (0 for the zero matrix)."""
    return float(svd(a).sigma[0])


def schatten_norm(a, p):
    """Schatten p-norm ``(sum sigma_i**p)**(1/p)``; ``p=inf`` gives sigma_1."""
    if not p >= 1:
        raise ValidationError(f"Schatten exponent must satisfy p >= 1, got {p}")
    sigma = svd(a).sigma
    if np.isinf(p):
        return float(sigma[0])
    if sigma[0] == 0.0:
        return 0.0
    # scale out sigma_1 to avoid overflow for large p
    return float(sigma[0] * np.sum((sigma / sigma[0]) ** p) ** (1.0 / p))


def hs_inner(a, b):
    """Hilbert-Schmidt inner product ``Tr(a.T @ b)``."""
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    if a.shape != b.shape:
        raise ValidationError(f"shape mismatch: {a.shape} vs {b.shape}")
    return float(np.trace(a.T @ b))
