"""Optimal rank-n truncation and the singular-value inequalities behind it.

Besides :func:`truncate`, this module exposes small utilities that make the
classical optimality arguments checkable: the linear maximisation over the
capped simplex, the von Neumann trace inequality and the energy bound for
orthonormal frames.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .linalg_core import SvdFactors, _frozen, as_matrix, svd

__all__ = [
    "RankNApprox",
    "CappedSimplexSolution",
    "truncate",
    "singular_value",
    "capped_simplex_max",
    "von_neumann_slack",
    "frame_energy",
    "DEFAULT_GAP_TOL",
]

DEFAULT_GAP_TOL = 1e-8


@dataclass(frozen=True)
class RankNApprox:
    n: int
    approx: np.ndarray
    factors: SvdFactors
    op_error: float
    frob_error: float
    gap_degenerate: bool


@dataclass(frozen=True)
class CappedSimplexSolution:
    weights: np.ndarray
    value: float


def _gap_degenerate(sigma, n, gap_tol):
    if n == 0 or sigma[0] == 0.0:
        return False
    nxt = sigma[n] if n < sigma.size else 0.0
    return bool(sigma[n - 1] - nxt <= gap_tol * sigma[0])


def truncate(f: SvdFactors, n: int, gap_tol: float = DEFAULT_GAP_TOL) -> RankNApprox:
    """Keep the leading ``n`` singular triplets of ``f``.

    The error fields come straight from the discarded singular values:
    ``op_error = sigma[n]`` and ``frob_error = sqrt(sum(sigma[n:]**2))``.
    When ``sigma[n-1]`` and ``sigma[n]`` coincide up to ``gap_tol``
    (relative to sigma_1) the approximant is still optimal but not unique,
    and ``gap_degenerate`` is set.
    """
    r = f.sigma.size
    if not 0 <= n <= r:
        raise ValidationError(f"rank n={n} out of range [0, {r}]")
    n = int(n)
    u, s, v = f.u[:, :n], f.sigma[:n], f.v[:, :n]
    approx = (u * s) @ v.T
    tail = f.sigma[n:]
    op_error = float(tail[0]) if tail.size else 0.0
    frob_error = float(np.sqrt(np.sum(tail**2)))
    factors = SvdFactors(_frozen(u), _frozen(s), _frozen(v), f.rank_tol)
    return RankNApprox(
        n=n,
        approx=_frozen(approx),
        factors=factors,
        op_error=op_error,
        frob_error=frob_error,
        gap_degenerate=_gap_degenerate(f.sigma, n, gap_tol),
    )


def singular_value(a, n: int) -> float:
    """The n-th singular value (1-based); zero past min(rows, cols)."""
    if n < 1:
        raise ValidationError(f"singular value index must be >= 1, got {n}")
    sigma = svd(a).sigma
    return float(sigma[n - 1]) if n <= sigma.size else 0.0


def capped_simplex_max(lam, n: int) -> CappedSimplexSolution:
    """Maximise ``sum(lam * a)`` over ``0 <= a_i <= 1, sum(a) = n``.

    For nonincreasing ``lam`` the top-n indicator is a maximiser. Unsorted
    input is rejected instead of sorted so the caller states the ordering.
    """
    lam = np.asarray(lam, dtype=float)
    if lam.ndim != 1 or not np.all(np.isfinite(lam)):
        raise ValidationError("lambda must be a finite 1-D vector")
    if np.any(np.diff(lam) > 0):
        k = int(np.argmax(np.diff(lam) > 0))
        raise ValidationError(f"lambda is not nonincreasing at index {k + 1}")
    if np.any(lam < 0):
        raise ValidationError("lambda must be nonnegative")
    if not 0 <= n <= lam.size:
        raise ValidationError(f"n={n} out of range [0, {lam.size}]")
    weights = np.zeros(lam.size)
    weights[:n] = 1.0
    return CappedSimplexSolution(_frozen(weights), float(np.sum(lam * weights)))


def von_neumann_slack(a, b) -> float:
    """``sum_i sigma_i(a) sigma_i(b) - Tr(a.T b)``, nonnegative up to round-off."""
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    if a.shape != b.shape:
        raise ValidationError(f"shape mismatch: {a.shape} vs {b.shape}")
    return float(svd(a).sigma @ svd(b).sigma - np.trace(a.T @ b))


def frame_energy(a, frame, tol: float = 1e-10) -> float:
    """Captured energy ``sum_i ||a @ w_i||**2`` of an orthonormal frame.

    ``frame`` holds the vectors as columns (M x n) or as a list of vectors.
    Bounded above by the sum of the n largest squared singular values.
    """
    a = as_matrix(a, "a")
    w = np.asarray(frame, dtype=float)
    if w.ndim == 1:
        w = w[:, None]
    elif isinstance(frame, (list, tuple)):
        w = w.T
    if w.shape[0] != a.shape[1]:
        raise ValidationError(f"frame vectors have length {w.shape[0]}, expected {a.shape[1]}")
    dev = np.max(np.abs(w.T @ w - np.eye(w.shape[1])))
    if dev > tol:
        raise ValidationError(f"frame is not orthonormal: max |W^T W - I| = {dev:.3e}")
    return float(np.sum((a @ w) ** 2))
