"""Parameter-dependent matrices and ensembles, xi -> A_xi or xi -> X_xi.

Builtin analytic families
-------------------------
``diag2``     diag(xi, 1 - xi) on [0, 1]; singular values cross at xi = 0.5.
``rot2``      R(omega xi) diag(1 + xi, 1 - xi) R(omega xi)^T on [0.1, 1]; gap >= 0.2.
``heat3``     3x3 Dirichlet stiffness matrix with conductivities
              (1, 1 + xi, 1 + 2 xi^2, 1) on [0, 1]; eigenvalue gaps >= 1.4.
``constant``  a fixed matrix ``params["matrix"]`` on [0, 1].
``atoms2``    ensemble {e1 w.p. xi, e2 w.p. 1 - xi} on [0, 1]; branches at 0.5.
``kl3``       ensemble of 6 atoms +-sqrt(3 lambda_i) q_i(xi) with covariance
              Q(xi) diag(1 + xi/2, 0.5, 0.2) Q(xi)^T on [0, 1].

Every builtin accepts ``params["domain"] = [lo, hi]`` to narrow its range.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .linalg_core import _frozen, as_matrix
from .stochastic import Ensemble

__all__ = [
    "ParamFamily",
    "analytic_family",
    "grid_family",
    "eval_family",
    "BUILTINS",
    "cubic_objective",
    "CUBIC_XI_RANGE",
    "CUBIC_C_RANGE",
]

GRID_MATCH_TOL = 1e-12


def _rotation(theta):
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


def _diag2(xi, params):
    return np.array([[xi, 0.0], [0.0, 1.0 - xi]])


def _rot2(xi, params):
    r = _rotation(params.get("omega", 1.0) * xi)
    return r @ np.diag([1.0 + xi, 1.0 - xi]) @ r.T


def _heat3(xi, params):
    k0, k1, k2, k3 = 1.0, 1.0 + xi, 1.0 + 2.0 * xi * xi, 1.0
    return np.array(
        [
            [k0 + k1, -k1, 0.0],
            [-k1, k1 + k2, -k2],
            [0.0, -k2, k2 + k3],
        ]
    )


def _constant(xi, params):
    if "matrix" not in params:
        raise ValidationError("family 'constant' needs params['matrix']")
    return as_matrix(params["matrix"], "params['matrix']")


def _atoms2(xi, params):
    return Ensemble(np.eye(2), [xi, 1.0 - xi])


def _kl3_frame(xi):
    cz, sz = np.cos(xi), np.sin(xi)
    cx, sx = np.cos(0.5 * xi), np.sin(0.5 * xi)
    rz = np.array([[cz, -sz, 0.0], [sz, cz, 0.0], [0.0, 0.0, 1.0]])
    rx = np.array([[1.0, 0.0, 0.0], [0.0, cx, -sx], [0.0, sx, cx]])
    return rz @ rx


def _kl3(xi, params):
    q = _kl3_frame(xi)
    lam = np.array([1.0 + 0.5 * xi, 0.5, 0.2])
    atoms = (q * np.sqrt(3.0 * lam)).T
    return Ensemble(np.vstack([atoms, -atoms]))


@dataclass(frozen=True)
class _Builtin:
    build: object
    domain: tuple
    value_kind: str


BUILTINS = {
    "diag2": _Builtin(_diag2, (0.0, 1.0), "matrix"),
    "rot2": _Builtin(_rot2, (0.1, 1.0), "matrix"),
    "heat3": _Builtin(_heat3, (0.0, 1.0), "matrix"),
    "constant": _Builtin(_constant, (0.0, 1.0), "matrix"),
    "atoms2": _Builtin(_atoms2, (0.0, 1.0), "ensemble"),
    "kl3": _Builtin(_kl3, (0.0, 1.0), "ensemble"),
}

CUBIC_XI_RANGE = (1.0, 2.0)
CUBIC_C_RANGE = (-1.0, 1.0)


def cubic_objective(xi, c):
    """J(xi, c) = (xi c)^3 - xi c; its minimiser over [-1, 1] jumps at 2/sqrt(3)."""
    t = xi * np.asarray(c, dtype=float)
    return t**3 - t


@dataclass(frozen=True)
class ParamFamily:
    """A map from scalar parameter to matrix or ensemble.

    ``kind`` is ``"analytic"`` (builtin id + params) or ``"grid"`` (explicit
    values at sorted ``xi``). Grid families are only defined on their grid.
    """

    kind: str
    value_kind: str
    domain: tuple
    id: str = ""
    params: dict = field(default_factory=dict)
    xi: np.ndarray | None = None
    items: tuple = ()

    def __call__(self, xi):
        return eval_family(self, xi)


def analytic_family(id, params=None):
    if id not in BUILTINS:
        raise ValidationError(f"unknown builtin family {id!r}; choose from {sorted(BUILTINS)}")
    params = dict(params or {})
    entry = BUILTINS[id]
    lo, hi = entry.domain
    if "domain" in params:
        dlo, dhi = (float(x) for x in params["domain"])
        if not (lo <= dlo < dhi <= hi):
            raise ValidationError(f"domain [{dlo}, {dhi}] not inside [{lo}, {hi}] for {id!r}")
        lo, hi = dlo, dhi
    if id == "constant":
        _constant(lo, params)
    return ParamFamily("analytic", entry.value_kind, (lo, hi), id=id, params=params)


def grid_family(xi, items):
    xi = np.asarray(xi, dtype=float)
    if xi.ndim != 1 or xi.size < 1 or not np.all(np.isfinite(xi)):
        raise ValidationError("grid family needs a finite 1-D list of xi values")
    if np.any(np.diff(xi) <= 0):
        raise ValidationError("grid family xi values must be strictly increasing")
    if len(items) != xi.size:
        raise ValidationError(f"{xi.size} xi values but {len(items)} items")
    if all(isinstance(it, Ensemble) for it in items):
        value_kind = "ensemble"
        shapes = {it.dim for it in items}
    else:
        value_kind = "matrix"
        items = [_frozen(as_matrix(it, f"item {k}")) for k, it in enumerate(items)]
        shapes = {it.shape for it in items}
    if len(shapes) != 1:
        raise ValidationError(f"grid family items have inconsistent shapes: {sorted(shapes)}")
    return ParamFamily(
        "grid", value_kind, (float(xi[0]), float(xi[-1])), xi=_frozen(xi), items=tuple(items)
    )


def eval_family(f: ParamFamily, xi: float):
    """Member of ``f`` at ``xi``. Grid families do not interpolate."""
    xi = float(xi)
    lo, hi = f.domain
    tol = GRID_MATCH_TOL * max(1.0, abs(xi))
    if not (lo - tol <= xi <= hi + tol):
        raise ValidationError(f"xi={xi!r} outside family range [{lo}, {hi}]")
    if f.kind == "grid":
        k = int(np.argmin(np.abs(f.xi - xi)))
        if abs(f.xi[k] - xi) > tol:
            raise ValidationError(f"xi={xi!r} is not a grid point of this family")
        return f.items[k]
    return BUILTINS[f.id].build(xi, f.params)
