"""Finite-support random vectors and their proper orthogonal decomposition.

An :class:`Ensemble` is a random vector with finitely many atoms, so every
expectation is an exact weighted sum. That keeps the mean-square identities
of POD assertable at round-off tolerances.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .linalg_core import DEFAULT_RANK_TOL, _frozen, schatten_norm, sym_eig
from .lowrank import DEFAULT_GAP_TOL

__all__ = [
    "Ensemble",
    "CoupledEnsemble",
    "PodBasis",
    "covariance",
    "second_moment",
    "pod",
    "projection_error",
    "kkl_coefficients",
    "covariance_perturbation",
]

WEIGHT_TOL = 1e-12
CLAMP_TOL = 1e-12
PROJECTOR_TOL = 1e-10


def _check_points(points, name):
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] < 1:
        raise ValidationError(f"{name}: expected a non-empty K x N array, got shape {pts.shape}")
    bad = ~np.isfinite(pts)
    if bad.any():
        k, i = np.argwhere(bad)[0]
        raise ValidationError(f"{name}: non-finite coordinate at point {k}, component {i}")
    return pts


def _check_weights(weights, k):
    if weights is None:
        return np.full(k, 1.0 / k)
    w = np.asarray(weights, dtype=float)
    if w.shape != (k,):
        raise ValidationError(f"weights: expected {k} entries, got shape {w.shape}")
    if not np.all(np.isfinite(w)) or np.any(w < 0):
        raise ValidationError("weights must be finite and nonnegative")
    if abs(w.sum() - 1.0) > WEIGHT_TOL:
        raise ValidationError(f"weights sum to {w.sum()!r}, expected 1")
    return w


@dataclass(frozen=True, init=False)
class Ensemble:
    """Random vector in R^N taking value ``points[k]`` with probability ``weights[k]``.

    ``weights=None`` means uniform.
    """

    points: np.ndarray
    weights: np.ndarray

    def __init__(self, points, weights=None):
        pts = _check_points(points, "points")
        object.__setattr__(self, "points", _frozen(pts))
        object.__setattr__(self, "weights", _frozen(_check_weights(weights, pts.shape[0])))

    @property
    def dim(self):
        return self.points.shape[1]

    def expect(self, values):
        """Weighted sum of per-atom ``values`` (leading axis = atoms)."""
        return np.tensordot(self.weights, values, axes=1)


@dataclass(frozen=True, init=False)
class CoupledEnsemble:
    """Joint law of two random vectors (Z, Z') on a common finite sample space."""

    points: np.ndarray
    points_prime: np.ndarray
    weights: np.ndarray

    def __init__(self, points, points_prime, weights=None):
        z = _check_points(points, "points")
        zp = _check_points(points_prime, "points_prime")
        if z.shape != zp.shape:
            raise ValidationError(f"coupled samples differ in shape: {z.shape} vs {zp.shape}")
        object.__setattr__(self, "points", _frozen(z))
        object.__setattr__(self, "points_prime", _frozen(zp))
        object.__setattr__(self, "weights", _frozen(_check_weights(weights, z.shape[0])))

    @property
    def dim(self):
        return self.points.shape[1]

    def marginals(self):
        return Ensemble(self.points, self.weights), Ensemble(self.points_prime, self.weights)


@dataclass(frozen=True)
class PodBasis:
    n: int
    basis: np.ndarray
    eigenvalues: np.ndarray
    gap_degenerate: bool

    @property
    def tail_energy(self):
        """Optimal mean-square residual ``sum_{i>n} lambda_i``."""
        return float(np.sum(self.eigenvalues[self.n :]))

    @property
    def projector(self):
        return self.basis @ self.basis.T


def second_moment(e: Ensemble) -> float:
    """E||X||^2."""
    return float(e.expect(np.einsum("ki,ki->k", e.points, e.points)))


def covariance(e: Ensemble) -> np.ndarray:
    """Uncentered covariance ``sum_k w_k x_k x_k^T``, symmetrised."""
    c = (e.points * e.weights[:, None]).T @ e.points
    return 0.5 * (c + c.T)


def _clamped_eig(c):
    eig = sym_eig(c)
    values = np.array(eig.values)
    floor = -CLAMP_TOL * max(1.0, float(np.trace(c)))
    if values[-1] < floor:
        raise RuntimeError(f"covariance has eigenvalue {values[-1]:.3e}, beyond round-off")
    values[values < 0] = 0.0
    return eig.vectors, values


def pod(e: Ensemble, n: int, gap_tol: float = DEFAULT_GAP_TOL) -> PodBasis:
    """Top-n eigenvectors of the covariance (the POD basis).

    A vanishing gap ``lambda_n - lambda_{n+1} <= gap_tol * lambda_1`` still
    yields an optimal basis but sets ``gap_degenerate``.
    """
    if not 1 <= n <= e.dim:
        raise ValidationError(f"POD dimension n={n} out of range [1, {e.dim}]")
    vectors, values = _clamped_eig(covariance(e))
    nxt = values[n] if n < values.size else 0.0
    degenerate = bool(values[0] > 0 and values[n - 1] - nxt <= gap_tol * values[0])
    return PodBasis(int(n), _frozen(vectors[:, :n]), _frozen(values), degenerate)


def _check_projector(p, dim):
    p = np.asarray(p, dtype=float)
    if p.shape != (dim, dim):
        raise ValidationError(f"projector must be {dim} x {dim}, got shape {p.shape}")
    if not np.all(np.isfinite(p)):
        raise ValidationError("projector has non-finite entries")
    asym = np.max(np.abs(p - p.T))
    if asym > PROJECTOR_TOL:
        raise ValidationError(f"not an orthogonal projector: max |P - P^T| = {asym:.3e}")
    idem = np.max(np.abs(p @ p - p))
    if idem > PROJECTOR_TOL:
        raise ValidationError(f"not an orthogonal projector: max |P^2 - P| = {idem:.3e}")
    return p


def projection_error(e: Ensemble, p) -> float:
    """Mean-square projection residual E||X - PX||^2 for an orthoprojector P."""
    p = _check_projector(p, e.dim)
    r = e.points - e.points @ p.T
    return float(e.expect(np.einsum("ki,ki->k", r, r)))


def kkl_coefficients(e: Ensemble, b: PodBasis, rank_tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    """Scalar coefficients ``eta[k, i] = <x_k, v_i> / sqrt(lambda_i)``.

    They are orthonormal under the ensemble weights. Requests past the
    numerical rank raise instead of dividing by a vanishing eigenvalue.
    """
    if b.basis.shape[0] != e.dim:
        raise ValidationError(f"basis dimension {b.basis.shape[0]} != ensemble dimension {e.dim}")
    lam = b.eigenvalues[: b.n]
    cutoff = rank_tol * b.eigenvalues[0]
    for i, value in enumerate(lam):
        if not value > cutoff:
            raise ValidationError(
                f"eigenvalue {i + 1} = {value:.3e} is below the rank tolerance; "
                "KKL coefficient undefined"
            )
    return (e.points @ b.basis) / np.sqrt(lam)


def covariance_perturbation(ce: CoupledEnsemble) -> dict:
    """Both sides of the trace-norm bound between two covariances.

    ``lhs = ||B - B'||_1`` and
    ``rhs = E^{1/2}||Z - Z'||^2 * (E^{1/2}||Z||^2 + E^{1/2}||Z'||^2)``.
    """
    z, zp = ce.marginals()
    lhs = schatten_norm(covariance(z) - covariance(zp), 1)
    d = ce.points - ce.points_prime
    dist = np.sqrt(float(ce.weights @ np.einsum("ki,ki->k", d, d)))
    rhs = dist * (np.sqrt(second_moment(z)) + np.sqrt(second_moment(zp)))
    return {"lhs": float(lhs), "rhs": float(rhs)}
