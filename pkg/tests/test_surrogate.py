import json

import numpy as np
import pytest

from paramlr import (
    BranchingError,
    SurrogateModel,
    ValidationError,
    align_frames,
    analytic_family,
    certify,
    eval_projector,
    fit_factors,
    fit_projector,
    sweep_pod,
    sweep_svd,
)
from paramlr.surrogate import eval_factors, retract_projector

DIAG2_LOW = analytic_family("diag2", {"domain": [0.0, 0.4]})
HEAT3 = analytic_family("heat3")
ROT2 = analytic_family("rot2")


def factor_model(f, grid, n=1):
    return fit_factors(align_frames(sweep_svd(f, grid, n)))


def test_fit_projector_constant_path():
    m = fit_projector(sweep_svd(DIAG2_LOW, np.linspace(0, 0.4, 5), 1))
    e2 = np.diag([0.0, 1.0])
    assert all(np.array_equal(p, e2) for p in m.projectors)
    for xi in (0.0, 0.13, 0.399):
        assert np.array_equal(eval_projector(m, xi), e2)


def test_fit_projector_rejects_branching():
    with pytest.raises(BranchingError, match="0.5") as info:
        fit_projector(sweep_svd(analytic_family("diag2"), np.linspace(0, 1, 11), 1))
    assert info.value.xis == [0.5]


def test_fit_projector_heat3():
    m = fit_projector(sweep_svd(HEAT3, np.linspace(0, 1, 21), 1))
    for p in m.projectors:
        assert np.array_equal(p, p.T)
        assert np.abs(p @ p - p).max() <= 1e-10
        assert abs(np.linalg.norm(p) - 1.0) <= 1e-10


def test_eval_projector_endpoints_and_validity(rng):
    grid = np.linspace(0, 1, 11)
    m = fit_projector(sweep_svd(HEAT3, grid, 2))
    for xi, p in zip(grid, m.projectors):
        assert np.abs(eval_projector(m, xi) - p).max() <= 1e-12
    for xi in rng.uniform(0, 1, 50):
        p = eval_projector(m, xi)
        assert np.array_equal(p, p.T)
        assert np.abs(p @ p - p).max() <= 1e-10
        assert abs(np.linalg.norm(p) - np.sqrt(2)) <= 1e-10


def test_eval_projector_midpoint_triangle():
    grid = np.linspace(0, 1, 6)
    m = fit_projector(sweep_svd(HEAT3, grid, 1))
    for k in range(5):
        p0, p1 = m.projectors[k], m.projectors[k + 1]
        d = np.linalg.norm(p1 - p0)
        mid = eval_projector(m, 0.5 * (grid[k] + grid[k + 1]))
        assert np.linalg.norm(mid - p0) <= 2 * d + 1e-15
        assert np.linalg.norm(mid - p1) <= 2 * d + 1e-15


def test_eval_projector_errors():
    m = fit_projector(sweep_svd(HEAT3, np.linspace(0, 1, 3), 1))
    with pytest.raises(ValidationError, match="no extrapolation"):
        eval_projector(m, 1.2)
    with pytest.raises(BranchingError, match="xi=0.3"):
        retract_projector(np.eye(2), 1, xi=0.3)


def test_fit_factors_constant_family(rng):
    a = rng.standard_normal((4, 3))
    m = factor_model(analytic_family("constant", {"matrix": a.tolist()}), np.linspace(0, 1, 4), 2)
    s = np.linalg.svd(a)
    a2 = (s.U[:, :2] * s.S[:2]) @ s.Vh[:2]
    for xi in (0.0, 0.1, 0.5, 0.77, 1.0):
        u, c, v = eval_factors(m, xi)
        assert np.abs(u @ c @ v.T - a2).max() <= 1e-12


def test_fit_factors_rot2_off_grid(rng):
    m = factor_model(ROT2, np.linspace(0.1, 1.0, 91))
    for xi in rng.uniform(0.1, 1.0, 100):
        a = ROT2(xi)
        u, c, v = eval_factors(m, xi)
        s2 = np.linalg.svd(a, compute_uv=False)[1]
        assert np.linalg.norm(a - u @ c @ v.T, 2) <= s2 + 0.1


def test_fit_factors_contract():
    s = sweep_svd(HEAT3, np.linspace(0, 1, 5), 1)
    with pytest.raises(ValidationError, match="align"):
        fit_factors(s)
    with pytest.raises(ValidationError, match="skipped"):
        fit_factors(align_frames(sweep_svd(analytic_family("diag2"), [0.4, 0.6], 1)))
    with pytest.raises(BranchingError):
        fit_factors(align_frames(sweep_svd(analytic_family("diag2"), [0.4, 0.5, 0.6], 1)))
    with pytest.raises(ValidationError, match="SVD sweep"):
        fit_factors(sweep_pod(analytic_family("kl3"), [0.0, 1.0], 1))


def test_certify_on_training_grid():
    grid = np.linspace(0, 1, 11)
    for m in (fit_projector(sweep_svd(HEAT3, grid, 1)), factor_model(HEAT3, grid)):
        rep = certify(m, HEAT3, grid, 1e-9)
        assert rep.max_excess <= 1e-10 and rep.passed


def test_certify_diag2_exact():
    m = fit_projector(sweep_svd(DIAG2_LOW, np.linspace(0, 0.4, 3), 1))
    test = np.linspace(0, 0.4, 37)
    rep = certify(m, DIAG2_LOW, test, 1e-9)
    for r in rep.rows:
        assert r["achieved_op"] == pytest.approx(r["xi"], abs=1e-15)
        assert r["excess"] <= 1e-12
    assert rep.to_dict()["pass"] is True


def test_certify_refinement_monotone():
    test = np.linspace(0, 1, 200)
    prev = np.inf
    for h in (0.1, 0.05, 0.025):
        grid = np.linspace(0, 1, int(round(1 / h)) + 1)
        ex = certify(fit_projector(sweep_svd(HEAT3, grid, 1)), HEAT3, test, 0.1).max_excess
        assert ex <= prev + 1e-12
        prev = ex


def test_certify_ensemble_and_excess_sign():
    kl3 = analytic_family("kl3")
    m = fit_projector(sweep_pod(kl3, np.linspace(0, 1, 11), 1))
    rep = certify(m, kl3, np.linspace(0, 1, 57), 0.1)
    assert all(r["excess"] >= -1e-10 for r in rep.rows)
    assert rep.passed
    assert rep.integral["achieved"] >= rep.integral["optimal"] - 1e-10


def test_certify_shape_mismatch():
    m = fit_projector(sweep_svd(HEAT3, np.linspace(0, 1, 3), 1))
    with pytest.raises(ValidationError, match="shape"):
        certify(m, DIAG2_LOW, [0.1], 0.1)


def test_model_json_round_trip():
    for m in (fit_projector(sweep_svd(HEAT3, np.linspace(0, 1, 4), 1)), factor_model(ROT2, np.linspace(0.1, 1, 4))):
        back = SurrogateModel.from_dict(json.loads(m.dumps()))
        assert back.target == m.target and np.array_equal(back.train_grid, m.train_grid)
        for xi in (0.2, 0.55):
            a = HEAT3(xi) if m.target == "projector" else ROT2(xi)
            if m.target == "projector":
                assert np.array_equal(eval_projector(back, xi), eval_projector(m, xi))
            else:
                assert all(np.array_equal(x, y) for x, y in zip(eval_factors(back, xi), eval_factors(m, xi)))
    with pytest.raises(ValidationError):
        SurrogateModel.from_dict({"target": "projector", "n": 1, "train_grid": [0.0]})
    with pytest.raises(ValidationError, match="unknown"):
        SurrogateModel.from_dict({"target": "x", "n": 1, "train_grid": [0.0, 1.0]})
