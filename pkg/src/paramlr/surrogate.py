"""Grid-trained surrogates for the optimal rank-n maps.

Two targets are supported:

``projector``
    xi -> P_xi, piecewise-linear in xi, symmetrised and retracted onto the
    rank-n orthogonal projectors via the top-n spectral projector.
``factors``
    xi -> (U_n, C_n, V_n) from an aligned SVD sweep, each factor linear in
    xi, with U and V pulled back to orthonormal frames by polar projection.

:func:`certify` measures the excess of the surrogate error over the
per-xi optimum on a test grid.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import BranchingError, ValidationError
from .families import ParamFamily, eval_family
from .linalg_core import _frozen, svd, sym_eig
from .parametric import SweepResult, projector_path
from .stochastic import covariance

__all__ = [
    "SurrogateModel",
    "CertReport",
    "fit_projector",
    "fit_factors",
    "eval_projector",
    "eval_factors",
    "certify",
    "retract_projector",
    "polar_frame",
]

DEFAULT_RETRACTION_TOL = 1e-10


@dataclass(frozen=True)
class SurrogateModel:
    target: str
    n: int
    train_grid: np.ndarray
    projectors: tuple = ()
    u: tuple = ()
    core: tuple = ()
    v: tuple = ()
    retraction_tol: float = DEFAULT_RETRACTION_TOL

    @property
    def domain(self):
        return float(self.train_grid[0]), float(self.train_grid[-1])

    @property
    def shape(self):
        if self.target == "projector":
            return self.projectors[0].shape
        return (self.u[0].shape[0], self.v[0].shape[0])

    def to_dict(self):
        out = {
            "target": self.target,
            "n": self.n,
            "train_grid": self.train_grid.tolist(),
            "retraction_tol": self.retraction_tol,
        }
        if self.target == "projector":
            out["projectors"] = [p.tolist() for p in self.projectors]
        else:
            out["u"] = [x.tolist() for x in self.u]
            out["core"] = [x.tolist() for x in self.core]
            out["v"] = [x.tolist() for x in self.v]
        return out

    @classmethod
    def from_dict(cls, d):
        try:
            target = d["target"]
            grid = np.asarray(d["train_grid"], dtype=float)
            kw = dict(
                target=target,
                n=int(d["n"]),
                train_grid=_frozen(grid),
                retraction_tol=float(d.get("retraction_tol", DEFAULT_RETRACTION_TOL)),
            )
            if target == "projector":
                kw["projectors"] = tuple(_frozen(p) for p in d["projectors"])
            elif target == "factors":
                kw["u"] = tuple(_frozen(x) for x in d["u"])
                kw["core"] = tuple(_frozen(x) for x in d["core"])
                kw["v"] = tuple(_frozen(x) for x in d["v"])
            else:
                raise ValidationError(f"unknown surrogate target {target!r}")
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed surrogate model: {exc}") from exc
        model = cls(**kw)
        _check_model(model)
        return model

    def dumps(self):
        return json.dumps(self.to_dict(), sort_keys=True)


@dataclass(frozen=True)
class CertReport:
    target: str
    n: int
    epsilon: float
    rows: list
    max_excess: float
    passed: bool
    integral: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "target": self.target,
            "n": self.n,
            "epsilon": self.epsilon,
            "max_excess": self.max_excess,
            "pass": self.passed,
            "integral": self.integral,
            "rows": self.rows,
        }


def _check_model(m: SurrogateModel):
    g = m.train_grid
    if g.ndim != 1 or g.size < 2 or np.any(np.diff(g) <= 0):
        raise ValidationError("training grid must be strictly increasing with >= 2 points")
    count = len(m.projectors) if m.target == "projector" else len(m.u)
    if count != g.size:
        raise ValidationError(f"{count} stored frames for {g.size} training points")


def _require_certified(s: SweepResult):
    if s.degenerate.any():
        xis = s.degenerate_xis
        raise BranchingError(
            f"n-th gap vanishes at xi = {xis}; no continuous optimal map to fit", xis
        )


def fit_projector(s: SweepResult, n: int | None = None, retraction_tol=DEFAULT_RETRACTION_TOL):
    """Store the certified projector path of ``s`` as a surrogate."""
    _require_certified(s)
    path = projector_path(s, n)
    model = SurrogateModel(
        target="projector",
        n=path.n,
        train_grid=s.grid,
        projectors=path.projectors,
        retraction_tol=retraction_tol,
    )
    _check_model(model)
    return model


def fit_factors(s: SweepResult, n: int | None = None, retraction_tol=DEFAULT_RETRACTION_TOL):
    """Store aligned rank-n SVD factors of ``s`` as a surrogate."""
    if s.kind != "svd":
        raise ValidationError("factor surrogates need an SVD sweep")
    if n is not None and n != s.n:
        raise ValidationError(f"sweep was computed for n={s.n}, not n={n}")
    _require_certified(s)
    if not s.aligned:
        raise ValidationError("frames are not aligned; run align_frames first")
    if s.alignment_skipped:
        raise ValidationError(f"alignment was skipped at xi = {list(s.alignment_skipped)}")
    model = SurrogateModel(
        target="factors",
        n=s.n,
        train_grid=s.grid,
        u=s.u_frames,
        core=s.cores,
        v=s.v_frames,
        retraction_tol=retraction_tol,
    )
    _check_model(model)
    return model


def _bracket(m: SurrogateModel, xi):
    g = m.train_grid
    lo, hi = m.domain
    if not lo <= xi <= hi:
        raise ValidationError(f"xi={xi!r} outside training range [{lo}, {hi}]; no extrapolation")
    k = int(np.searchsorted(g, xi, side="right")) - 1
    k = min(k, g.size - 2)
    t = (xi - g[k]) / (g[k + 1] - g[k])
    return k, t


def retract_projector(m_sym, n, tol=DEFAULT_RETRACTION_TOL, xi=None):
    """Top-n spectral projector of a symmetric matrix.

    Raises BranchingError when eigenvalues n and n+1 are within ``tol``.
    """
    eig = sym_eig(0.5 * (m_sym + m_sym.T))
    lam = eig.values
    nxt = lam[n] if n < lam.size else -np.inf
    if lam[n - 1] - nxt <= tol:
        where = "" if xi is None else f" at xi={xi!r}"
        raise BranchingError(f"retraction tie{where}: eigenvalues {n} and {n + 1} coincide", [xi])
    v = eig.vectors[:, :n]
    p = v @ v.T
    return 0.5 * (p + p.T)


def polar_frame(x):
    """Nearest matrix with orthonormal columns (orthogonal polar factor)."""
    fac = svd(x)
    return fac.u @ fac.v.T


def eval_projector(m: SurrogateModel, xi) -> np.ndarray:
    if m.target != "projector":
        raise ValidationError("eval_projector needs a projector surrogate")
    xi = float(xi)
    k, t = _bracket(m, xi)
    if t == 0.0:
        return np.array(m.projectors[k])
    if t == 1.0:
        return np.array(m.projectors[k + 1])
    mix = (1.0 - t) * m.projectors[k] + t * m.projectors[k + 1]
    return retract_projector(mix, m.n, m.retraction_tol, xi)


def eval_factors(m: SurrogateModel, xi):
    """Interpolated ``(U, C, V)`` with orthonormal U, V; ``A_n ~ U C V^T``."""
    if m.target != "factors":
        raise ValidationError("eval_factors needs a factor surrogate")
    xi = float(xi)
    k, t = _bracket(m, xi)
    if t == 0.0:
        return np.array(m.u[k]), np.array(m.core[k]), np.array(m.v[k])
    if t == 1.0:
        return np.array(m.u[k + 1]), np.array(m.core[k + 1]), np.array(m.v[k + 1])

    def lerp(seq):
        return (1.0 - t) * seq[k] + t * seq[k + 1]

    return polar_frame(lerp(m.u)), lerp(m.core), polar_frame(lerp(m.v))


def _matrix_approx(m: SurrogateModel, xi, a):
    if m.target == "projector":
        return a @ eval_projector(m, xi)
    u, c, v = eval_factors(m, xi)
    return u @ c @ v.T


def certify(m: SurrogateModel, f: ParamFamily, test_grid, epsilon: float) -> CertReport:
    """Compare surrogate errors to the per-xi optimum on ``test_grid``.

    Matrix families: operator and Hilbert-Schmidt errors of the surrogate
    approximant against sigma_{n+1} and the tail norm. For a projector
    model the approximant is ``A_xi P(xi)``. Ensemble families: root mean
    square residual against ``sqrt(sum_{i>n} lambda_i)``. The report passes
    when the largest excess is below ``epsilon``. ``integral`` carries the
    uniform-weight averages over the test grid.
    """
    test_grid = np.asarray(test_grid, dtype=float)
    if test_grid.ndim != 1 or test_grid.size < 1:
        raise ValidationError("test grid must be a non-empty 1-D sequence")
    n = m.n
    rows = []
    for xi in test_grid:
        xi = float(xi)
        item = eval_family(f, xi)
        if f.value_kind == "matrix":
            if item.shape != m.shape:
                raise ValidationError(f"family shape {item.shape} does not match model {m.shape}")
            sigma = svd(item).sigma
            resid = item - _matrix_approx(m, xi, item)
            achieved_op = float(svd(resid).sigma[0])
            achieved_hs = float(np.linalg.norm(resid))
            opt_op = float(sigma[n]) if n < sigma.size else 0.0
            opt_hs = float(np.sqrt(np.sum(sigma[n:] ** 2)))
            rows.append(
                {
                    "xi": xi,
                    "achieved_op": achieved_op,
                    "optimal_op": opt_op,
                    "achieved_hs": achieved_hs,
                    "optimal_hs": opt_hs,
                    "excess": max(achieved_op - opt_op, achieved_hs - opt_hs),
                }
            )
        else:
            if m.target != "projector":
                raise ValidationError("ensemble families need a projector surrogate")
            if (item.dim, item.dim) != m.shape:
                raise ValidationError(f"ensemble dimension {item.dim} does not match model {m.shape}")
            p = eval_projector(m, xi)
            r = item.points - item.points @ p.T
            mse = float(item.weights @ np.einsum("ki,ki->k", r, r))
            lam = np.clip(sym_eig(covariance(item)).values, 0.0, None)
            tail = float(np.sum(lam[n:]))
            rows.append(
                {
                    "xi": xi,
                    "achieved": float(np.sqrt(mse)),
                    "optimal": float(np.sqrt(tail)),
                    "mse": mse,
                    "tail": tail,
                    "excess": float(np.sqrt(mse) - np.sqrt(tail)),
                }
            )
    max_excess = float(max(r["excess"] for r in rows))
    if f.value_kind == "matrix":
        integral = {
            "achieved_op": float(np.mean([r["achieved_op"] for r in rows])),
            "optimal_op": float(np.mean([r["optimal_op"] for r in rows])),
        }
    else:
        integral = {
            "achieved": float(np.sqrt(np.mean([r["mse"] for r in rows]))),
            "optimal": float(np.sqrt(np.mean([r["tail"] for r in rows]))),
        }
    return CertReport(
        target=m.target,
        n=n,
        epsilon=float(epsilon),
        rows=rows,
        max_excess=max_excess,
        passed=bool(max_excess < epsilon),
        integral=integral,
    )
