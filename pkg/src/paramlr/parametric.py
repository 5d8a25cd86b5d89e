"""Parameter sweeps of optimal truncations, branching detection and paths.

A sweep factorises every member of a family on a grid. The singular values
(or covariance eigenvalues) are continuous in xi; the optimal subspaces are
only continuous where the n-th gap stays open, which :func:`gap_report` and
:func:`projector_path` make visible.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import ParamLRError, ValidationError
from .families import ParamFamily, eval_family
from .linalg_core import DEFAULT_RANK_TOL, _frozen, svd
from .lowrank import DEFAULT_GAP_TOL, truncate
from .stochastic import Ensemble, pod

__all__ = [
    "SweepResult",
    "ProjectorPath",
    "GapReport",
    "sweep_svd",
    "sweep_pod",
    "gap_report",
    "projector_path",
    "align_frames",
    "grid_argmin",
    "make_grid",
]

SYMMETRY_TOL = 1e-12
ALIGN_RANK_TOL = 1e-8
CROSSING_COSINE = 1.0 / np.sqrt(2.0)


@dataclass(frozen=True)
class SweepResult:
    """Per-xi optimal rank-n data along a grid.

    ``spectra[k]`` is the full singular (``kind="svd"``) or eigen
    (``kind="pod"``) spectrum at ``grid[k]``; ``gaps[k]`` is
    ``spectra[k, n-1] - spectra[k, n]``. ``v_frames``/``u_frames``/``cores``
    hold the rank-n factors with ``A_n = U C V^T``; the cores are diagonal
    until :func:`align_frames` rotates them.
    """

    kind: str
    n: int
    grid: np.ndarray
    items: tuple
    factors: tuple
    spectra: np.ndarray
    gaps: np.ndarray
    degenerate: np.ndarray
    v_frames: tuple
    u_frames: tuple | None
    cores: tuple | None
    gap_tol: float
    aligned: bool = False
    alignment_skipped: tuple = ()

    @property
    def degenerate_xis(self):
        return [float(x) for x in self.grid[self.degenerate]]

    def projectors(self):
        return [v @ v.T for v in self.v_frames]


@dataclass(frozen=True)
class ProjectorPath:
    n: int
    grid: np.ndarray
    projectors: tuple
    hs_increments: np.ndarray
    continuity_certified: bool
    degenerate_xis: tuple = ()


@dataclass(frozen=True)
class GapReport:
    """``rows`` has one dict per grid point; ``crossings`` lists grid
    intervals across which the tracked n-th gap changes sign.
    """

    n: int
    rows: list
    crossings: list

    def to_dict(self):
        return {"n": self.n, "rows": self.rows, "crossings": [list(c) for c in self.crossings]}


def make_grid(start, stop, count):
    if count < 2:
        raise ValidationError(f"grid count must be >= 2, got {count}")
    if not start < stop:
        raise ValidationError(f"grid start {start} must be below stop {stop}")
    return np.linspace(float(start), float(stop), int(count))


def _check_grid(grid):
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 1 or not np.all(np.isfinite(grid)):
        raise ValidationError("grid must be a non-empty finite 1-D sequence")
    if np.any(np.diff(grid) <= 0):
        raise ValidationError("grid must be strictly increasing")
    return grid


def _gap_flags(spectra, n, gap_tol):
    nxt = spectra[:, n] if n < spectra.shape[1] else np.zeros(spectra.shape[0])
    gaps = spectra[:, n - 1] - nxt
    degenerate = (gaps <= gap_tol * spectra[:, 0]) & (spectra[:, 0] > 0)
    degenerate |= spectra[:, 0] == 0
    return gaps, degenerate


def sweep_svd(f: ParamFamily, grid, n: int, gap_tol=DEFAULT_GAP_TOL, rank_tol=DEFAULT_RANK_TOL):
    """Deterministic SVD and rank-n truncation at every grid point."""
    if f.value_kind != "matrix":
        raise ValidationError("sweep_svd needs a matrix-valued family")
    grid = _check_grid(grid)
    if n < 1:
        raise ValidationError(f"rank n must be >= 1, got {n}")
    items, factors, spectra = [], [], []
    us, vs, cores = [], [], []
    for xi in grid:
        try:
            a = eval_family(f, xi)
            fac = svd(a, rank_tol=rank_tol)
            trunc = truncate(fac, n, gap_tol=gap_tol)
        except ParamLRError as exc:
            raise type(exc)(f"xi={xi!r}: {exc}") from exc
        items.append(a)
        factors.append(fac)
        spectra.append(fac.sigma)
        us.append(trunc.factors.u)
        vs.append(trunc.factors.v)
        cores.append(_frozen(np.diag(trunc.factors.sigma)))
    spectra = _frozen(np.vstack(spectra))
    gaps, degenerate = _gap_flags(spectra, n, gap_tol)
    return SweepResult(
        kind="svd",
        n=int(n),
        grid=_frozen(grid),
        items=tuple(items),
        factors=tuple(factors),
        spectra=spectra,
        gaps=_frozen(gaps),
        degenerate=_frozen(degenerate, bool),
        v_frames=tuple(vs),
        u_frames=tuple(us),
        cores=tuple(cores),
        gap_tol=gap_tol,
    )


def sweep_pod(f: ParamFamily, grid, n: int, gap_tol=DEFAULT_GAP_TOL):
    """POD basis and covariance spectrum at every grid point."""
    if f.value_kind != "ensemble":
        raise ValidationError("sweep_pod needs an ensemble-valued family")
    grid = _check_grid(grid)
    if n < 1:
        raise ValidationError(f"POD dimension n must be >= 1, got {n}")
    items, bases = [], []
    for xi in grid:
        try:
            e = eval_family(f, xi)
            b = pod(e, n, gap_tol=gap_tol)
        except ParamLRError as exc:
            raise type(exc)(f"xi={xi!r}: {exc}") from exc
        items.append(e)
        bases.append(b)
    spectra = _frozen(np.vstack([b.eigenvalues for b in bases]))
    gaps, degenerate = _gap_flags(spectra, n, gap_tol)
    return SweepResult(
        kind="pod",
        n=int(n),
        grid=_frozen(grid),
        items=tuple(items),
        factors=tuple(bases),
        spectra=spectra,
        gaps=_frozen(gaps),
        degenerate=_frozen(degenerate, bool),
        v_frames=tuple(b.basis for b in bases),
        u_frames=None,
        cores=None,
        gap_tol=gap_tol,
    )


def _min_cosine(v0, v1):
    return float(svd(v0.T @ v1).sigma[-1])


def gap_report(s: SweepResult, n: int | None = None, floor: float = np.finfo(float).tiny):
    """Relative n-th gap per grid point plus suspected crossings.

    The gap of sorted values never changes sign, so crossings are detected
    by tracking the top-n subspace: when the smallest principal cosine
    between consecutive subspaces drops below 1/sqrt(2), the tracked
    branches have swapped and the signed gap flips.
    """
    n = s.n if n is None else int(n)
    width = s.spectra.shape[1]
    if not 1 <= n <= width:
        raise ValidationError(f"n={n} out of range [1, {width}]")
    if n == s.n:
        frames = s.v_frames
    elif s.kind == "svd":
        frames = [fac.v[:, :n] for fac in s.factors]
    else:
        raise ValidationError("POD sweeps only keep n basis vectors; re-run sweep_pod with this n")
    gaps, degenerate = _gap_flags(s.spectra, n, s.gap_tol)
    rel = gaps / np.maximum(s.spectra[:, 0], floor)

    sign = 1.0
    rows, crossings = [], []
    for k, xi in enumerate(s.grid):
        if k > 0 and _min_cosine(frames[k - 1], frames[k]) < CROSSING_COSINE:
            sign = -sign
            crossings.append((float(s.grid[k - 1]), float(xi)))
        rows.append(
            {
                "xi": float(xi),
                "gap": float(rel[k]),
                "abs_gap": float(gaps[k]),
                "signed_gap": float(sign * rel[k]),
                "degenerate": bool(degenerate[k]),
            }
        )
    return GapReport(n, rows, crossings)


def projector_path(s: SweepResult, n: int | None = None) -> ProjectorPath:
    """Rank-n orthogonal projectors ``V V^T`` along the sweep.

    The path is certified continuous only if no grid point is degenerate.
    SVD sweeps must be of symmetric matrices so the projector is the
    spectral one.
    """
    if n is not None and n != s.n:
        raise ValidationError(f"sweep was computed for n={s.n}, not n={n}")
    if s.kind == "svd":
        for xi, a in zip(s.grid, s.items):
            if a.shape[0] != a.shape[1] or np.max(np.abs(a - a.T)) > SYMMETRY_TOL * max(
                1.0, float(np.max(np.abs(a)))
            ):
                raise ValidationError(f"xi={float(xi)!r}: projector path needs symmetric matrices")
    projectors = tuple(_frozen(p) for p in s.projectors())
    inc = np.array(
        [np.linalg.norm(projectors[k + 1] - projectors[k]) for k in range(len(projectors) - 1)]
    )
    return ProjectorPath(
        n=s.n,
        grid=s.grid,
        projectors=projectors,
        hs_increments=_frozen(inc),
        continuity_certified=not bool(s.degenerate.any()),
        degenerate_xis=tuple(s.degenerate_xis),
    )


def align_frames(s: SweepResult) -> SweepResult:
    """Rotate each frame onto its left neighbour by orthogonal Procrustes.

    Frame k+1 becomes ``V_{k+1} Q`` with ``Q = W Z^T`` from the SVD
    ``V_{k+1}^T V_k = W S Z^T``; SVD sweeps rotate U by the same Q and the
    core to ``Q^T C Q`` so ``A_n`` is unchanged. Steps whose cross-Gram is
    rank deficient are left as they are and listed in ``alignment_skipped``.
    """
    vs = [np.array(v) for v in s.v_frames]
    us = None if s.u_frames is None else [np.array(u) for u in s.u_frames]
    cores = None if s.cores is None else [np.array(c) for c in s.cores]
    skipped = []
    for k in range(len(vs) - 1):
        fac = svd(vs[k + 1].T @ vs[k])
        if fac.sigma[-1] <= ALIGN_RANK_TOL:
            skipped.append(float(s.grid[k + 1]))
            continue
        q = fac.u @ fac.v.T
        vs[k + 1] = vs[k + 1] @ q
        if us is not None:
            us[k + 1] = us[k + 1] @ q
            cores[k + 1] = q.T @ cores[k + 1] @ q
    return replace(
        s,
        v_frames=tuple(_frozen(v) for v in vs),
        u_frames=None if us is None else tuple(_frozen(u) for u in us),
        cores=None if cores is None else tuple(_frozen(c) for c in cores),
        aligned=True,
        alignment_skipped=tuple(skipped),
    )


def grid_argmin(objective, c_grid, xi, atol=0.0):
    """Minimise ``objective(xi, c)`` over a finite grid of candidates.

    Among candidates within ``atol`` of the minimum the lowest index wins,
    a deterministic selector.

    Returns
    -------
    dict
        ``c_star``, ``value`` and ``index`` of the selected candidate.
    """
    c_grid = np.asarray(c_grid, dtype=float)
    if c_grid.size == 0:
        raise ValidationError("empty candidate grid")
    values = np.array([objective(xi, c) for c in c_grid], dtype=float)
    if not np.all(np.isfinite(values)):
        k = int(np.argmax(~np.isfinite(values)))
        raise ValidationError(f"objective not finite at candidate index {k}")
    best = values.min()
    k = int(np.flatnonzero(values <= best + atol)[0])
    return {"c_star": float(c_grid[k]), "value": float(values[k]), "index": k}
