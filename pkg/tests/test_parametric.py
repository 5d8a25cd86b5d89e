from dataclasses import replace

import numpy as np
import pytest

from paramlr import (
    Ensemble,
    ValidationError,
    align_frames,
    analytic_family,
    eval_family,
    gap_report,
    grid_argmin,
    grid_family,
    projector_path,
    sweep_pod,
    sweep_svd,
)
from paramlr.families import cubic_objective
from paramlr.parametric import make_grid
from paramlr.stochastic import covariance

DIAG2 = analytic_family("diag2")
C_GRID = np.linspace(-1, 1, 2001)


def smooth_family(rng, count=41):
    """Q(xi) diag(d(xi)) Q(xi)^T with d_1 - d_2 >= 0.5 by construction."""
    xi = np.linspace(0, 1, count)
    k = rng.standard_normal((3, 3))
    k = k - k.T
    base = rng.uniform(0.3, 0.6, 3)
    items = []
    for x in xi:
        # Cayley transform of a skew matrix is orthogonal
        q = np.linalg.solve(np.eye(3) - 0.5 * x * k, np.eye(3) + 0.5 * x * k)
        d = np.array([2.0 + base[0] * np.sin(3 * x), 1.0 + base[1] * x, 0.2 * base[2]])
        items.append(q @ np.diag(d) @ q.T)
    return xi, items


def test_eval_family_examples():
    assert np.array_equal(eval_family(DIAG2, 0.3), [[0.3, 0.0], [0.0, 0.7]])
    assert np.array_equal(eval_family(DIAG2, 0.5), np.diag([0.5, 0.5]))
    g = grid_family([0.0, 1.0], [np.eye(2), 2 * np.eye(2)])
    assert np.array_equal(g(1.0), 2 * np.eye(2))
    with pytest.raises(ValidationError, match="not a grid point"):
        eval_family(g, 0.5)
    with pytest.raises(ValidationError, match="outside"):
        eval_family(DIAG2, 1.5)


def test_family_construction_errors():
    with pytest.raises(ValidationError, match="unknown builtin"):
        analytic_family("nope")
    with pytest.raises(ValidationError, match="increasing"):
        grid_family([1.0, 0.0], [np.eye(2), np.eye(2)])
    with pytest.raises(ValidationError, match="inconsistent"):
        grid_family([0.0, 1.0], [np.eye(2), np.eye(3)])
    with pytest.raises(ValidationError, match="domain"):
        analytic_family("diag2", {"domain": [0.5, 1.5]})


def test_builtin_gaps():
    for name, n in (("rot2", 1), ("heat3", 1)):
        f = analytic_family(name)
        s = sweep_svd(f, np.linspace(*f.domain, 201), n)
        assert s.gaps.min() >= 0.2


def test_sweep_diag2_paths():
    grid = np.linspace(0, 1, 11)
    s = sweep_svd(DIAG2, grid, 1)
    assert np.allclose(s.spectra[:, 0], np.maximum(grid, 1 - grid), atol=1e-15)
    assert np.allclose(s.spectra[:, 1], np.minimum(grid, 1 - grid), atol=1e-15)
    assert s.degenerate_xis == [0.5]


def test_sweep_constant_family(rng):
    a = rng.standard_normal((3, 2))
    s = sweep_svd(analytic_family("constant", {"matrix": a.tolist()}), np.linspace(0, 1, 5), 1)
    assert all(np.array_equal(row, s.spectra[0]) for row in s.spectra)
    path = projector_path(sweep_svd(analytic_family("constant", {"matrix": (a @ a.T).tolist()}), np.linspace(0, 1, 5), 1))
    assert np.all(path.hs_increments == 0.0)


def test_sweep_lipschitz_path():
    for name in ("rot2", "heat3"):
        f = analytic_family(name)
        s = sweep_svd(f, np.linspace(*f.domain, 31), 2)
        for k in range(30):
            step = np.linalg.norm(s.items[k + 1] - s.items[k], 2)
            assert np.max(np.abs(s.spectra[k + 1] - s.spectra[k])) <= step + 1e-10


def test_sweep_errors_name_xi():
    g = grid_family([0.0, 1.0], [np.eye(2), np.eye(2)])
    with pytest.raises(ValidationError, match="rank n"):
        sweep_svd(g, [0.0, 1.0], 0)
    with pytest.raises(ValidationError, match="xi=0.5"):
        sweep_svd(g, [0.0, 0.5], 1)
    with pytest.raises(ValidationError, match="matrix-valued"):
        sweep_svd(analytic_family("atoms2"), [0.1], 1)


def test_sweep_pod_examples():
    grid = np.linspace(0, 1, 11)
    s = sweep_pod(analytic_family("atoms2"), grid, 1)
    assert np.allclose(s.spectra[:, 0], np.maximum(grid, 1 - grid), atol=1e-15)
    assert np.allclose(s.spectra[:, 1], np.minimum(grid, 1 - grid), atol=1e-15)
    e = Ensemble([[1.0, 2.0], [0.0, 1.0]])
    c = sweep_pod(grid_family([0.0, 1.0, 2.0], [e, e, e]), [0.0, 1.0, 2.0], 1)
    assert np.all(c.spectra == c.spectra[0])


def test_sweep_pod_lipschitz():
    f = analytic_family("kl3")
    s = sweep_pod(f, np.linspace(0, 1, 41), 2)
    for k in range(40):
        dc = covariance(s.items[k + 1]) - covariance(s.items[k])
        assert np.max(np.abs(s.spectra[k + 1] - s.spectra[k])) <= np.linalg.norm(dc, 2) + 1e-10


def test_gap_report_diag2():
    rep = gap_report(sweep_svd(DIAG2, np.linspace(0, 1, 101), 1))
    flagged = [r["xi"] for r in rep.rows if r["degenerate"]]
    assert flagged == [0.5]
    assert len(rep.crossings) == 1
    lo, hi = rep.crossings[0]
    assert lo < 0.5 < hi or 0.5 in (lo, hi)
    signs = np.sign([r["signed_gap"] for r in rep.rows if not r["degenerate"]])
    assert signs[0] == 1 and signs[-1] == -1


def test_gap_report_constant():
    f = analytic_family("constant", {"matrix": [[3.0, 0.0], [0.0, 1.0]]})
    rep = gap_report(sweep_svd(f, np.linspace(0, 1, 5), 1))
    assert all(not r["degenerate"] for r in rep.rows)
    assert all(r["gap"] == pytest.approx(2 / 3, abs=1e-15) for r in rep.rows)
    assert rep.crossings == []
    assert set(rep.to_dict()) == {"n", "rows", "crossings"}


def test_gap_report_smooth_families(rng):
    for _ in range(20):
        xi, items = smooth_family(rng)
        oracle_gap = min(np.diff(np.linalg.eigvalsh(a))[-1] for a in items)
        assert oracle_gap >= 0.2
        rep = gap_report(sweep_svd(grid_family(xi, items), xi, 1))
        assert not any(r["degenerate"] for r in rep.rows)
        assert rep.crossings == []


def test_projector_path_examples():
    s = sweep_svd(analytic_family("diag2", {"domain": [0.0, 0.4]}), np.linspace(0, 0.4, 9), 1)
    path = projector_path(s)
    e2 = np.array([[0.0, 0.0], [0.0, 1.0]])
    assert all(np.array_equal(p, e2) for p in path.projectors)
    assert np.all(path.hs_increments == 0.0) and path.continuity_certified

    path = projector_path(sweep_svd(DIAG2, np.linspace(0, 1, 11), 1))
    assert not path.continuity_certified
    big = np.flatnonzero(path.hs_increments > 1e-12)
    # the degenerate point 0.5 itself takes the first-index vector e1
    assert big.size == 1 and path.hs_increments[big[0]] == pytest.approx(np.sqrt(2), abs=1e-12)
    assert path.degenerate_xis == (0.5,)


def test_projector_path_rejects_non_symmetric():
    g = grid_family([0.0, 1.0], [[[1.0, 2.0], [0.0, 1.0]]] * 2)
    with pytest.raises(ValidationError, match="symmetric"):
        projector_path(sweep_svd(g, [0.0, 1.0], 1))


def test_projector_norms():
    for name in ("rot2", "heat3"):
        f = analytic_family(name)
        for n in (1, 2):
            for p in projector_path(sweep_svd(f, np.linspace(*f.domain, 21), n)).projectors:
                assert abs(np.linalg.norm(p) - np.sqrt(n)) <= 1e-10
                assert np.abs(p @ p - p).max() <= 1e-10 and np.array_equal(p, p.T)


def test_refinement_and_discontinuity_witness():
    f = analytic_family("heat3")
    incs = [projector_path(sweep_svd(f, make_grid(0, 1, c), 1)).hs_increments.max() for c in (11, 21, 41)]
    assert incs[1] <= 0.75 * incs[0] and incs[2] <= 0.75 * incs[1]
    for count in (3, 11, 101, 1001):
        assert projector_path(sweep_svd(DIAG2, np.linspace(0, 1, count), 1)).hs_increments.max() >= 1.0


def test_align_sign_flips():
    s = sweep_svd(analytic_family("heat3"), np.linspace(0, 1, 5), 2)
    v = s.v_frames[0]
    twin = replace(s, grid=s.grid[:2], v_frames=(v, v * np.array([-1.0, 1.0])), u_frames=None, cores=None)
    al = align_frames(twin)
    assert np.abs(al.v_frames[1] - al.v_frames[0]).max() <= 1e-12

    flipped = tuple(f * np.array([1.0, -1.0]) if k % 2 else f for k, f in enumerate(s.v_frames))
    al = align_frames(replace(s, v_frames=flipped, u_frames=None, cores=None))
    for v0, v1 in zip(s.v_frames, al.v_frames):
        assert np.abs(v0 @ v0.T - v1 @ v1.T).max() <= 1e-12


def test_align_in_span_rotation():
    s = sweep_svd(analytic_family("heat3"), [0.0, 0.5], 2)
    r = np.array([[np.cos(0.7), -np.sin(0.7)], [np.sin(0.7), np.cos(0.7)]])
    v = s.v_frames[0]
    al = align_frames(replace(s, v_frames=(v, v @ r), u_frames=None, cores=None))
    assert np.abs(al.v_frames[1] - v).max() <= 1e-10
    assert al.alignment_skipped == ()


def test_align_preserves_spans_and_approximant():
    f = analytic_family("rot2")
    s = sweep_svd(f, np.linspace(*f.domain, 201), 1)
    al = align_frames(s)
    for v0, v1, u1, c1, fac in zip(s.v_frames, al.v_frames, al.u_frames, al.cores, s.factors):
        assert np.linalg.norm(v0 @ v0.T - v1 @ v1.T) <= 1e-12
        a1 = fac.sigma[0] * np.outer(fac.u[:, 0], fac.v[:, 0])
        assert np.abs(u1 @ c1 @ v1.T - a1).max() <= 1e-12
    dist = max(np.linalg.norm(al.v_frames[k + 1] - al.v_frames[k]) for k in range(200))
    assert dist <= 10 * projector_path(s).hs_increments.max()


def test_align_skips_orthogonal_step():
    s = sweep_svd(DIAG2, [0.4, 0.6], 1)
    al = align_frames(s)
    assert al.alignment_skipped == (0.6,)


def test_grid_argmin_examples():
    r = grid_argmin(cubic_objective, C_GRID, 1.0)
    assert abs(r["c_star"] - 1 / np.sqrt(3)) <= 1e-3
    assert grid_argmin(cubic_objective, C_GRID, 1.8)["c_star"] == -1.0
    xi = 2 / np.sqrt(3)
    vals = cubic_objective(xi, C_GRID)
    near = np.flatnonzero(vals <= vals.min() + 1e-3)
    assert C_GRID[near].min() == -1.0 and C_GRID[near].max() > 0.4
    assert grid_argmin(cubic_objective, C_GRID, xi, atol=1e-3)["index"] == near[0]


def test_grid_argmin_ties_and_errors():
    r = grid_argmin(lambda xi, c: (c * c - 1) ** 2, [-1.0, 0.0, 1.0], 0.0)
    assert r == {"c_star": -1.0, "value": 0.0, "index": 0}
    with pytest.raises(ValidationError, match="empty"):
        grid_argmin(cubic_objective, [], 1.0)
    with pytest.raises(ValidationError, match="index 1"):
        grid_argmin(lambda xi, c: np.inf if c == 0 else c, [1.0, 0.0], 1.0)
