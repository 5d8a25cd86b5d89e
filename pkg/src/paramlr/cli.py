"""Command-line front end.

Subcommands: ``sweep``, ``pod``, ``gap``, ``surrogate``, ``verify``, ``demo``.
Exit status is 0 on success, 1 on input/validation errors and 2 when a
verification or certificate fails. Every error prints one line to stderr
starting with ``paramlr: error:`` or ``paramlr: verification-failed:``.
"""

from __future__ import annotations

import argparse
import sys
import time
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import __version__, families, parametric, surrogate, verify
from .errors import ParamLRError, ValidationError
from .io import load_family, write_csv, write_report

COMMANDS = ("sweep", "pod", "gap", "surrogate", "verify", "demo")
EXIT_OK, EXIT_INPUT, EXIT_VERIFY = 0, 1, 2


@dataclass
class RunConfig:
    command: str
    input: str | None = None
    family: str | None = None
    n: int = 1
    grid: str | None = None
    gap_tol: float = 1e-8
    rank_tol: float = 1e-10
    eps: float = 0.01
    target: str = "projector"
    test_count: int = 200
    out: str = "."
    seed: int = 0
    scale: int = 1
    demo: str | None = None

    def validate(self):
        if self.command not in COMMANDS:
            raise ValidationError(f"unknown command {self.command!r}")
        if self.n < 1:
            raise ValidationError(f"--n must be >= 1, got {self.n}")
        if self.gap_tol < 0 or self.rank_tol < 0:
            raise ValidationError("tolerances must be nonnegative")
        if self.command == "surrogate" and not self.eps > 0:
            raise ValidationError(f"--eps must be positive, got {self.eps}")
        if self.command in ("sweep", "pod", "gap", "surrogate") and not (self.input or self.family):
            raise ValidationError("one of --input or --family is required")
        if self.test_count < 1:
            raise ValidationError("--test-count must be >= 1")

    def hashed(self):
        """Config fields that go into the hashed report content."""
        d = asdict(self)
        d.pop("out")
        return d


def parse_grid(text, domain):
    """``a:b:count`` or a comma-separated list; ``None`` gives 101 points on ``domain``."""
    if text is None:
        return parametric.make_grid(domain[0], domain[1], 101)
    try:
        if ":" in text:
            a, b, count = text.split(":")
            return parametric.make_grid(float(a), float(b), int(count))
        values = np.array([float(x) for x in text.split(",") if x.strip()])
    except ValueError as exc:
        raise ValidationError(f"bad --grid {text!r}: {exc}") from exc
    if values.size < 2:
        raise ValidationError("--grid list needs at least 2 values")
    return values


def _family(cfg):
    if cfg.input:
        path = Path(cfg.input)
        if not path.is_file():
            raise ValidationError(f"input file not found: {cfg.input}")
        return load_family(path)
    return families.analytic_family(cfg.family)


def _spectrum_rows(s, label):
    width = s.spectra.shape[1]
    header = ["xi"] + [f"{label}_{i + 1}" for i in range(width)] + [f"gap_{s.n}", "degenerate"]
    rows = [
        [float(xi)] + [float(x) for x in row] + [float(g), int(d)]
        for xi, row, g, d in zip(s.grid, s.spectra, s.gaps, s.degenerate)
    ]
    return header, rows


def _sweep(cfg, fam, grid):
    if fam.value_kind == "ensemble":
        return parametric.sweep_pod(fam, grid, cfg.n, gap_tol=cfg.gap_tol)
    return parametric.sweep_svd(fam, grid, cfg.n, gap_tol=cfg.gap_tol, rank_tol=cfg.rank_tol)


def _sweep_content(cfg, s):
    label = "sigma" if s.kind == "svd" else "lambda"
    return {
        "config": cfg.hashed(),
        "kind": s.kind,
        "n": s.n,
        "grid": s.grid.tolist(),
        label: s.spectra.tolist(),
        "gaps": s.gaps.tolist(),
        "degenerate_xis": s.degenerate_xis,
    }


def cmd_sweep(cfg, out, expect):
    fam = _family(cfg)
    if fam.value_kind != expect:
        other = "pod" if expect == "matrix" else "sweep"
        raise ValidationError(f"family is {fam.value_kind}-valued; use the '{other}' command")
    s = _sweep(cfg, fam, parse_grid(cfg.grid, fam.domain))
    header, rows = _spectrum_rows(s, "sigma" if s.kind == "svd" else "lambda")
    write_csv(out / f"{cfg.command}.csv", header, rows)
    write_report(out / f"{cfg.command}_report.json", _sweep_content(cfg, s))
    return EXIT_OK


def cmd_gap(cfg, out):
    fam = _family(cfg)
    s = _sweep(cfg, fam, parse_grid(cfg.grid, fam.domain))
    rep = parametric.gap_report(s)
    write_csv(
        out / "gap.csv",
        ["xi", "gap", "abs_gap", "signed_gap", "degenerate"],
        [[r["xi"], r["gap"], r["abs_gap"], r["signed_gap"], int(r["degenerate"])] for r in rep.rows],
    )
    write_report(out / "gap_report.json", {"config": cfg.hashed(), **rep.to_dict()})
    return EXIT_OK


def cmd_surrogate(cfg, out):
    fam = _family(cfg)
    if fam.kind != "analytic":
        raise ValidationError("surrogate certification needs an analytic family to evaluate off-grid")
    s = _sweep(cfg, fam, parse_grid(cfg.grid, fam.domain))
    if cfg.target == "factors":
        model = surrogate.fit_factors(parametric.align_frames(s))
    elif cfg.target == "projector":
        model = surrogate.fit_projector(s)
    else:
        raise ValidationError(f"--target must be 'projector' or 'factors', got {cfg.target!r}")
    test = np.linspace(fam.domain[0], fam.domain[1], cfg.test_count)
    report = surrogate.certify(model, fam, test, cfg.eps)
    (out / "model.json").write_text(model.dumps() + "\n", encoding="utf-8")
    write_report(out / "cert_report.json", {"config": cfg.hashed(), **report.to_dict()})
    if not report.passed:
        _fail(f"certificate: max_excess={report.max_excess:.6g} >= eps={cfg.eps:g}")
        return EXIT_VERIFY
    return EXIT_OK


def cmd_verify(cfg, out):
    checks, timings = verify.run_all(seed=cfg.seed, scale=cfg.scale)
    rows = [c.row() for c in checks]
    write_csv(
        out / "verify.csv",
        ["module", "name", "passed", "cases", "worst", "limit"],
        [[r["module"], r["name"], int(r["passed"]), r["cases"], float(r["worst"]), float(r["limit"])] for r in rows],
    )
    content = {"config": cfg.hashed(), "seed": cfg.seed, "checks": rows}
    write_report(out / "verify_report.json", content, {"timings_s": timings})
    for r in rows:
        print(f"{'PASS' if r['passed'] else 'FAIL'}  {r['module']}.{r['name']}  worst={r['worst']:.3e}  limit={r['limit']:.1e}")
    failed = [f"{r['module']}.{r['name']}" for r in rows if not r["passed"]]
    if failed:
        _fail(",".join(failed))
        return EXIT_VERIFY
    return EXIT_OK


def cmd_demo(cfg, out):
    name = cfg.demo or "diag2"
    if name == "diag2":
        fam = families.analytic_family("diag2")
        s = parametric.sweep_svd(fam, parse_grid(cfg.grid, fam.domain), 1, gap_tol=cfg.gap_tol)
        path = parametric.projector_path(s)
        header, rows = _spectrum_rows(s, "sigma")
        header += ["v1_x", "v1_y", "hs_increment"]
        inc = [0.0] + path.hs_increments.tolist()
        for row, v, d in zip(rows, s.v_frames, inc):
            row += [float(v[0, 0]), float(v[1, 0]), float(d)]
        write_csv(out / "demo_diag2.csv", header, rows)
        content = {"config": cfg.hashed(), **_sweep_content(cfg, s)}
    elif name == "cubic":
        c = np.linspace(*families.CUBIC_C_RANGE, 2001)
        xis = (1.0, 2.0 / np.sqrt(3.0), 2.0)
        prof = [[float(ci)] + [float(families.cubic_objective(x, ci)) for x in xis] for ci in c]
        write_csv(out / "demo_cubic_profiles.csv", ["c", "J_xi_1", "J_xi_2_over_sqrt3", "J_xi_2"], prof)
        xi_grid = parse_grid(cfg.grid, families.CUBIC_XI_RANGE)
        sel = [parametric.grid_argmin(families.cubic_objective, c, x) for x in xi_grid]
        write_csv(
            out / "demo_cubic_argmin.csv",
            ["xi", "c_star", "value"],
            [[float(x), r["c_star"], r["value"]] for x, r in zip(xi_grid, sel)],
        )
        content = {
            "config": cfg.hashed(),
            "xi": xi_grid.tolist(),
            "c_star": [r["c_star"] for r in sel],
        }
    else:
        raise ValidationError(f"unknown demo {name!r}; choose 'diag2' or 'cubic'")
    write_report(out / f"demo_{name}_report.json", content)
    return EXIT_OK


def _fail(msg):
    print(f"paramlr: verification-failed: {msg}", file=sys.stderr)


def run(cfg: RunConfig) -> int:
    """Execute one command; all files are written after computation."""
    try:
        cfg.validate()
        out = Path(cfg.out)
        out.mkdir(parents=True, exist_ok=True)
        if cfg.command in ("sweep", "pod"):
            return cmd_sweep(cfg, out, "matrix" if cfg.command == "sweep" else "ensemble")
        if cfg.command == "gap":
            return cmd_gap(cfg, out)
        if cfg.command == "surrogate":
            return cmd_surrogate(cfg, out)
        if cfg.command == "verify":
            return cmd_verify(cfg, out)
        return cmd_demo(cfg, out)
    except (ParamLRError, OSError) as exc:
        _error(exc)
        return EXIT_INPUT


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ValidationError(message)


def _error(msg):
    msg = " ".join(str(msg).split())
    print(f"paramlr: error: {msg}", file=sys.stderr)


def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--input", help="family JSON file")
    common.add_argument("--family", help=f"builtin family id ({', '.join(sorted(families.BUILTINS))})")
    common.add_argument("--n", type=int, default=1, help="target rank / POD dimension")
    common.add_argument("--grid", help="a:b:count or comma-separated xi values")
    common.add_argument("--gap-tol", type=float, default=1e-8)
    common.add_argument("--rank-tol", type=float, default=1e-10)
    common.add_argument("--eps", type=float, default=0.01, help="certificate tolerance")
    common.add_argument("--out", default=".", help="output directory")
    common.add_argument("--seed", type=int, default=0)

    parser = _Parser(prog="paramlr", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("sweep", parents=[common], help="parametric SVD sweep")
    sub.add_parser("pod", parents=[common], help="parametric POD sweep")
    sub.add_parser("gap", parents=[common], help="spectral gap / branching report")
    p = sub.add_parser("surrogate", parents=[common], help="fit and certify a surrogate")
    p.add_argument("--target", choices=("projector", "factors"), default="projector")
    p.add_argument("--test-count", type=int, default=200)
    p = sub.add_parser("verify", parents=[common], help="run every property suite")
    p.add_argument("--scale", type=int, default=1, help="multiply the number of random cases")
    p = sub.add_parser("demo", parents=[common], help="reproduce the worked examples as CSV")
    p.add_argument("demo", nargs="?", default="diag2", choices=("diag2", "cubic"))
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except ValidationError as exc:
        _error(exc)
        return EXIT_INPUT
    kw = {k: v for k, v in vars(args).items() if v is not None}
    t0 = time.perf_counter()
    status = run(RunConfig(**kw))
    if args.command == "verify":
        print(f"elapsed {time.perf_counter() - t0:.2f}s", file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
