"""Executable property suites for every module.

Each suite draws from one seeded generator, checks a family of instances
against an independent oracle and records the worst observed margin. The
suites are run in a fixed order so a seed pins the whole run.
"""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass

import numpy as np

from . import families, lowrank, parametric, stochastic, surrogate
from .linalg_core import hs_inner, operator_norm, schatten_norm, svd, sym_eig

__all__ = ["Check", "run_all", "SUITES", "exhaustive_capped_grid", "random_matrix"]


@dataclass
class Check:
    module: str
    name: str
    passed: bool
    cases: int
    worst: float
    limit: float

    def row(self):
        d = asdict(self)
        d.update(passed=bool(self.passed), cases=int(self.cases), worst=float(self.worst), limit=float(self.limit))
        return d


def random_matrix(rng, max_dim=8, shape=None):
    """Gaussian matrix with random shape, scale and occasional rank loss."""
    m, n = shape if shape is not None else rng.integers(1, max_dim + 1, size=2)
    a = rng.standard_normal((m, n)) * 10.0 ** rng.uniform(-2, 1)
    kind = rng.integers(0, 4)
    if kind == 0 and min(m, n) > 1:
        r = int(rng.integers(1, min(m, n)))
        a = rng.standard_normal((m, r)) @ rng.standard_normal((r, n))
    elif kind == 1:
        a = np.round(a, 1)
    return a


def random_ensemble(rng, max_dim=6, max_atoms=40):
    dim = int(rng.integers(1, max_dim + 1))
    k = int(rng.integers(1, max_atoms + 1))
    pts = rng.standard_normal((k, dim))
    if dim > 2 and rng.integers(0, 3) == 0:
        pts = pts[:, :2] @ rng.standard_normal((2, dim))
    w = rng.uniform(0.1, 1.0, k)
    return stochastic.Ensemble(pts, w / w.sum())


def random_projector(rng, dim, rank):
    q, _ = np.linalg.qr(rng.standard_normal((dim, rank)))
    p = q @ q.T
    return 0.5 * (p + p.T)


def exhaustive_capped_grid(length, n, steps=20):
    """Every a with a_i in {0, 1/steps, ..., 1} and sum(a) = n."""
    total = n * steps
    parts = np.zeros((1, 0), dtype=int)
    for i in range(length):
        slots_left = length - i - 1
        blocks = []
        for k in range(steps + 1):
            cand = np.hstack([parts, np.full((parts.shape[0], 1), k)])
            s = cand.sum(axis=1)
            ok = (s <= total) & (total - s <= steps * slots_left)
            blocks.append(cand[ok])
        parts = np.vstack(blocks)
    return parts / steps


def _grid_with_step(domain, h):
    lo, hi = domain
    return np.linspace(lo, hi, int(round((hi - lo) / h)) + 1)


# ---------------------------------------------------------------- linalg_core
def suite_linalg(rng, scale):
    out = []
    rec = orth = srt = eigdiff = mono = 0.0
    det_ok = True
    cases = 40 * scale
    for _ in range(cases):
        a = random_matrix(rng)
        f = svd(a)
        rec = max(rec, np.linalg.norm(a - f.reconstruct()) / max(1.0, np.linalg.norm(a)))
        orth = max(
            orth,
            np.abs(f.u.T @ f.u - np.eye(f.u.shape[1])).max(),
            np.abs(f.v.T @ f.v - np.eye(f.v.shape[1])).max(),
        )
        srt = max(srt, float(np.max(np.diff(f.sigma), initial=0.0)))
        g = svd(a)
        det_ok &= all(np.array_equal(x, y) for x, y in ((f.u, g.u), (f.sigma, g.sigma), (f.v, g.v)))
        if np.linalg.norm(a) <= 10:
            lam = sym_eig(a.T @ a).values[: f.sigma.size]
            eigdiff = max(eigdiff, np.abs(np.clip(lam, 0, None) - f.sigma**2).max())
        op, hs, tr = operator_norm(a), schatten_norm(a, 2), schatten_norm(a, 1)
        mono = max(mono, op - hs, hs - tr)
    out.append(Check("linalg_core", "svd_reconstruction", rec <= 1e-12, cases, rec, 1e-12))
    out.append(Check("linalg_core", "svd_orthonormality", orth <= 1e-12, cases, orth, 1e-12))
    out.append(Check("linalg_core", "sigma_nonincreasing", srt <= 0.0, cases, srt, 0.0))
    out.append(Check("linalg_core", "svd_bit_determinism", bool(det_ok), cases, 0.0, 0.0))
    out.append(Check("linalg_core", "sym_eig_matches_sigma_squared", eigdiff <= 1e-9, cases, eigdiff, 1e-9))
    out.append(Check("linalg_core", "schatten_monotonicity", mono <= 1e-12, cases, mono, 1e-12))
    hsd = 0.0
    for _ in range(cases):
        a = rng.standard_normal((4, 5))
        b = rng.standard_normal((4, 5))
        hsd = max(hsd, abs(hs_inner(a, b) - np.sum(a * b)) / max(1.0, abs(np.sum(a * b))))
    out.append(Check("linalg_core", "hs_inner_entrywise", hsd <= 1e-12, cases, hsd, 1e-12))
    return out


# ---------------------------------------------------------------- lowrank
def suite_lowrank(rng, scale):
    out = []
    cases = 40 * scale
    ey_op = ey_hs = 0.0
    for _ in range(cases):
        a = random_matrix(rng)
        f = svd(a)
        for n in range(f.sigma.size + 1):
            t = lowrank.truncate(f, n)
            r = a - t.approx
            ref = f.sigma[0] if f.sigma[0] > 0 else 1.0
            ey_op = max(ey_op, abs(np.linalg.norm(r, 2) - t.op_error) / ref)
            ey_hs = max(ey_hs, abs(np.sum(r**2) - t.frob_error**2) / ref**2)
    out.append(Check("lowrank", "eckart_young_operator", ey_op <= 1e-10, cases, ey_op, 1e-10))
    out.append(Check("lowrank", "eckart_young_hs", ey_hs <= 1e-10, cases, ey_hs, 1e-10))

    beat = -np.inf
    comp_cases = 5 * scale
    for _ in range(comp_cases):
        a = rng.standard_normal((6, 6))
        f = svd(a)
        for k in range(100):
            n = 1 + k % 5
            t = lowrank.truncate(f, n)
            x, y = rng.standard_normal((6, n)), rng.standard_normal((6, n))
            cand = a - x @ y.T
            beat = max(beat, t.op_error - np.linalg.norm(cand, 2), t.frob_error - np.linalg.norm(cand))
    out.append(Check("lowrank", "no_competitor_beats_truncation", beat <= 1e-12, comp_cases, beat, 1e-12))

    lip = -np.inf
    pairs = 200 * scale
    for _ in range(pairs):
        shape = tuple(rng.integers(1, 9, size=2))
        a = random_matrix(rng, shape=shape)
        b = a + random_matrix(rng, shape=shape) * rng.uniform(0, 1)
        sa, sb = svd(a).sigma, svd(b).sigma
        lip = max(lip, float(np.max(np.abs(sa - sb))) - svd(a - b).sigma[0])
    out.append(Check("lowrank", "singular_values_1_lipschitz", lip <= 1e-10, pairs, lip, 1e-10))

    uniq = 0.0
    for _ in range(cases):
        d = np.sort(rng.uniform(0, 3, 5))[::-1]
        n = int(rng.integers(1, 5))
        if d[n - 1] - d[n] < 0.1:
            d[: n] += 0.1
        q1, _ = np.linalg.qr(rng.standard_normal((5, 5)))
        q2, _ = np.linalg.qr(rng.standard_normal((5, 5)))
        a = q1 @ np.diag(d) @ q2.T
        f = svd(a)
        t = lowrank.truncate(f, n)
        best = np.linalg.norm(a - t.approx)
        us = f.u[:, :n] * f.sigma[:n]
        competitors = [rng.standard_normal((5, n)) @ rng.standard_normal((n, 5)) for _ in range(5)]
        for delta in (1e-9, 1e-8):
            competitors.append(
                (us + delta * rng.standard_normal(us.shape))
                @ (f.v[:, :n] + delta * rng.standard_normal((5, n))).T
            )
        for r in competitors:
            if np.linalg.norm(a - r) <= best + 1e-12:
                uniq = max(uniq, np.linalg.norm(r - t.approx))
    out.append(Check("lowrank", "hs_minimizer_unique_under_gap", uniq <= 1e-6, cases, uniq, 1e-6))

    simplex = -np.inf
    sim_cases = 10 * scale
    for _ in range(sim_cases):
        length = int(rng.integers(1, 7))
        lam = np.sort(rng.uniform(0, 5, length))[::-1]
        n = int(rng.integers(0, length + 1))
        sol = lowrank.capped_simplex_max(lam, n)
        brute = float(np.max(exhaustive_capped_grid(length, n) @ lam))
        bound = n * 0.05 * lam[0] if length else 0.0
        simplex = max(simplex, brute - sol.value, sol.value - brute - bound)
    out.append(Check("lowrank", "capped_simplex_matches_grid", simplex <= 1e-12, sim_cases, simplex, 1e-12))

    vn = np.inf
    for _ in range(cases):
        a, b = rng.standard_normal((4, 4)), rng.standard_normal((4, 4))
        vn = min(vn, lowrank.von_neumann_slack(a, b))
    out.append(Check("lowrank", "von_neumann_inequality", vn >= -1e-10, cases, -vn, 1e-10))

    fe = -np.inf
    a = rng.standard_normal((5, 5))
    top = float(np.sum(svd(a).sigma[:2] ** 2))
    for _ in range(cases):
        w, _ = np.linalg.qr(rng.standard_normal((5, 2)))
        fe = max(fe, lowrank.frame_energy(a, w) - top)
    out.append(Check("lowrank", "frame_energy_bound", fe <= 1e-10, cases, fe, 1e-10))
    return out


# ---------------------------------------------------------------- stochastic
def suite_stochastic(rng, scale):
    cases = 20 * scale
    tr = pid = res = kkl = comp = pert = 0.0
    for _ in range(cases):
        e = random_ensemble(rng)
        c = stochastic.covariance(e)
        m2 = float(np.sum(e.weights * np.sum(e.points**2, axis=1)))
        tr = max(tr, abs(np.trace(c) - m2) / max(m2, 1e-300))
        b = stochastic.pod(e, e.dim)
        lam, vecs = b.eigenvalues, b.basis
        for _ in range(5):
            rank = int(rng.integers(0, e.dim + 1))
            p = random_projector(rng, e.dim, rank) if rank else np.zeros((e.dim, e.dim))
            direct = stochastic.projection_error(e, p)
            ident = m2 - float(np.sum(lam * np.sum((p @ vecs) ** 2, axis=0)))
            pid = max(pid, abs(direct - ident) / max(m2, 1e-300))
        n = int(rng.integers(1, e.dim + 1))
        bn = stochastic.pod(e, n)
        r = stochastic.projection_error(e, bn.projector)
        res = max(res, abs(r - bn.tail_energy) / max(m2, 1e-300))
        for _ in range(5):
            p = random_projector(rng, e.dim, n)
            comp = max(comp, r - stochastic.projection_error(e, p))
        keep = int(np.count_nonzero(lam > 1e-10 * lam[0]))
        if keep:
            eta = stochastic.kkl_coefficients(e, stochastic.pod(e, keep))
            gram = eta.T @ (eta * e.weights[:, None])
            kkl = max(kkl, np.abs(gram - np.eye(keep)).max())
        z = rng.standard_normal((8, 3))
        zp = z + rng.uniform(0, 1) * rng.standard_normal((8, 3))
        w = rng.uniform(0.1, 1, 8)
        cp = stochastic.covariance_perturbation(stochastic.CoupledEnsemble(z, zp, w / w.sum()))
        pert = max(pert, (cp["lhs"] - cp["rhs"]) / (1 + cp["rhs"]))
    return [
        Check("stochastic", "trace_equals_second_moment", tr <= 1e-12, cases, tr, 1e-12),
        Check("stochastic", "projection_error_identity", pid <= 1e-10, cases, pid, 1e-10),
        Check("stochastic", "pod_residual_equals_tail", res <= 1e-10, cases, res, 1e-10),
        Check("stochastic", "pod_beats_random_projectors", comp <= 1e-10, cases, comp, 1e-10),
        Check("stochastic", "kkl_weighted_orthonormality", kkl <= 1e-10, cases, kkl, 1e-10),
        Check("stochastic", "covariance_perturbation_bound", pert <= 1e-10, cases, pert, 1e-10),
    ]


# ---------------------------------------------------------------- parametric
def suite_parametric(rng, scale):
    out = []
    diag2 = families.analytic_family("diag2")
    grid = np.linspace(0, 1, 101)
    s = parametric.sweep_svd(diag2, grid, 1)
    path_err = max(
        np.abs(s.spectra[:, 0] - np.maximum(grid, 1 - grid)).max(),
        np.abs(s.spectra[:, 1] - np.minimum(grid, 1 - grid)).max(),
    )
    flags_ok = s.degenerate_xis == [0.5]
    pp = parametric.projector_path(s)
    big = pp.hs_increments[pp.hs_increments > 1e-12]
    jump_ok = big.size == 1 and abs(big[0] - np.sqrt(2)) <= 1e-10
    out.append(Check("parametric", "diag2_branching", bool(path_err <= 1e-12 and flags_ok and jump_ok), 101, path_err, 1e-12))

    lip = -np.inf
    pnorm = 0.0
    for name in ("diag2", "rot2", "heat3"):
        fam = families.analytic_family(name)
        g = np.linspace(*fam.domain, 41)
        for n in (1, 2):
            sw = parametric.sweep_svd(fam, g, n)
            for k in range(g.size - 1):
                step = svd(sw.items[k + 1] - sw.items[k]).sigma[0]
                lip = max(lip, float(np.max(np.abs(sw.spectra[k + 1] - sw.spectra[k]))) - step)
            for p in parametric.projector_path(sw).projectors:
                pnorm = max(pnorm, abs(np.linalg.norm(p) - np.sqrt(n)))
    for name in ("atoms2", "kl3"):
        fam = families.analytic_family(name)
        g = np.linspace(*fam.domain, 41)
        sw = parametric.sweep_pod(fam, g, 1)
        for k in range(g.size - 1):
            dc = stochastic.covariance(sw.items[k + 1]) - stochastic.covariance(sw.items[k])
            lip = max(lip, float(np.max(np.abs(sw.spectra[k + 1] - sw.spectra[k]))) - svd(dc).sigma[0])
        for p in parametric.projector_path(sw).projectors:
            pnorm = max(pnorm, abs(np.linalg.norm(p) - 1.0))
    out.append(Check("parametric", "spectral_path_lipschitz", lip <= 1e-10, 5, lip, 1e-10))
    out.append(Check("parametric", "projector_hs_norm_sqrt_n", pnorm <= 1e-10, 5, pnorm, 1e-10))

    ratio = 0.0
    for name in ("heat3", "rot2"):
        fam = families.analytic_family(name)
        for h in (0.1, 0.05, 0.025):
            coarse = parametric.projector_path(parametric.sweep_svd(fam, _grid_with_step(fam.domain, h), 1))
            fine = parametric.projector_path(parametric.sweep_svd(fam, _grid_with_step(fam.domain, h / 2), 1))
            ratio = max(ratio, fine.hs_increments.max() / coarse.hs_increments.max())
    out.append(Check("parametric", "grid_refinement_continuity", ratio <= 0.75, 6, ratio, 0.75))

    witness = np.inf
    for count in (3, 11, 21, 101, 201, 1001):
        pp = parametric.projector_path(parametric.sweep_svd(diag2, np.linspace(0, 1, count), 1))
        witness = min(witness, pp.hs_increments.max())
    out.append(Check("parametric", "branching_discontinuity_witness", witness >= 1.0, 6, witness, 1.0))

    span = recon = 0.0
    for name in ("rot2", "heat3"):
        fam = families.analytic_family(name)
        sw = parametric.sweep_svd(fam, np.linspace(*fam.domain, 31), 2)
        al = parametric.align_frames(sw)
        for v0, v1, u1, c1, a in zip(sw.v_frames, al.v_frames, al.u_frames, al.cores, sw.items):
            span = max(span, np.linalg.norm(v0 @ v0.T - v1 @ v1.T))
            a_n = lowrank.truncate(svd(a), 2).approx
            recon = max(recon, np.linalg.norm(u1 @ c1 @ v1.T - a_n) / max(1.0, np.linalg.norm(a)))
    out.append(Check("parametric", "alignment_preserves_spans", span <= 1e-12, 2, span, 1e-12))
    out.append(Check("parametric", "alignment_preserves_approximant", recon <= 1e-12, 2, recon, 1e-12))

    c_grid = np.linspace(-1, 1, 2001)
    err = 0.0
    for xi in (1.0, 1.05, 1.1):
        got = parametric.grid_argmin(families.cubic_objective, c_grid, xi)["c_star"]
        err = max(err, abs(got - 1 / (np.sqrt(3) * xi)))
    for xi in (1.2, 1.5, 2.0):
        got = parametric.grid_argmin(families.cubic_objective, c_grid, xi)["c_star"]
        err = max(err, abs(got + 1.0))
    out.append(Check("parametric", "cubic_argmin_selector", err <= 1e-3, 6, err, 1e-3))
    return out


# ---------------------------------------------------------------- surrogate
CERTIFIED_FAMILIES = (
    ("heat3", {}),
    ("rot2", {}),
    ("diag2", {"domain": [0.0, 0.4]}),
    ("kl3", {}),
)


def _fit(fam, grid, target, n=1):
    if fam.value_kind == "ensemble":
        return surrogate.fit_projector(parametric.sweep_pod(fam, grid, n))
    sw = parametric.sweep_svd(fam, grid, n)
    if target == "projector":
        return surrogate.fit_projector(sw)
    return surrogate.fit_factors(parametric.align_frames(sw))


def suite_surrogate(rng, scale):
    out = []
    min_excess = np.inf
    realized = True
    worst_needed = 0.0
    for name, params in CERTIFIED_FAMILIES:
        fam = families.analytic_family(name, params)
        test = np.linspace(*fam.domain, 200)
        targets = ("projector",) if fam.value_kind == "ensemble" else ("projector", "factors")
        for target in targets:
            for eps in (0.1, 0.01):
                ok = False
                for h in (0.1, 0.02, 0.004):
                    rep = surrogate.certify(_fit(fam, _grid_with_step(fam.domain, h), target), fam, test, eps)
                    min_excess = min(min_excess, min(r["excess"] for r in rep.rows))
                    if rep.passed:
                        ok = True
                        worst_needed = max(worst_needed, rep.max_excess / eps)
                        break
                realized &= ok
    out.append(Check("surrogate", "excess_nonnegative", min_excess >= -1e-10, 4, -min_excess, 1e-10))
    out.append(Check("surrogate", "epsilon_realizable", bool(realized), 4, worst_needed, 1.0))

    retr = endp = 0.0
    for name, params in CERTIFIED_FAMILIES:
        fam = families.analytic_family(name, params)
        grid = np.linspace(*fam.domain, 11)
        m = _fit(fam, grid, "projector")
        for xi in rng.uniform(*fam.domain, 10 * scale):
            p = surrogate.eval_projector(m, xi)
            retr = max(
                retr,
                np.abs(p - p.T).max(),
                np.abs(p @ p - p).max(),
                abs(np.linalg.norm(p) - np.sqrt(m.n)),
            )
        for xi, stored in zip(grid, m.projectors):
            endp = max(endp, np.abs(surrogate.eval_projector(m, xi) - stored).max())
    out.append(Check("surrogate", "retraction_validity", retr <= 1e-10, 4, retr, 1e-10))
    out.append(Check("surrogate", "endpoint_consistency", endp <= 1e-12, 4, endp, 1e-12))
    return out


SUITES = (
    ("linalg_core", suite_linalg),
    ("lowrank", suite_lowrank),
    ("stochastic", suite_stochastic),
    ("parametric", suite_parametric),
    ("surrogate", suite_surrogate),
)


def run_all(seed=0, scale=1):
    """Run every suite with one generator; returns (checks, timings)."""
    rng = np.random.default_rng(seed)
    checks, timings = [], {}
    for name, fn in SUITES:
        t0 = time.perf_counter()
        checks.extend(fn(rng, scale))
        timings[name] = round(time.perf_counter() - t0, 3)
    return checks, timings
