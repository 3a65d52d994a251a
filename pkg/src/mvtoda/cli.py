"""Command-line front end: ``mvtoda build | verify | evolve``.

Machine-readable output goes to ``--out`` (or stdout); a short human summary
goes to stderr.  Exit codes: 0 all checks passed, 1 a check failed, 2 bad
configuration or a construction error.
"""
from __future__ import annotations

import argparse
import datetime
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__, diffop, mvop, suites, toda
from .config import RunConfig, hermite_params_for, load_config, symbol_for, weight_for
from .errors import ConfigError, MvtodaError, WindowError
from .export import dumps, family_to_dict, write_trajectory_csv
from .hermite import closed_form_operator2x2
from .presets import PRESETS, scalar_x2_operator, scalar_x_operator


def _header(cfg: RunConfig, command: str) -> Optional[dict]:
    if not cfg.header:
        return None
    return {"tool": "mvtoda", "version": __version__, "command": command,
            "created": datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")}


def _emit(cfg: RunConfig, payload: dict, command: str) -> None:
    hdr = _header(cfg, command)
    if hdr is not None:
        payload = {"header": hdr, **payload}
    text = dumps(payload)
    if cfg.out:
        Path(cfg.out).parent.mkdir(parents=True, exist_ok=True)
        Path(cfg.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _say(msg: str) -> None:
    print(msg, file=sys.stderr)


# ------------------------------------------------------------------- build


def cmd_build(cfg: RunConfig) -> int:
    w = weight_for(cfg)
    lam = symbol_for(cfg)
    rule = mvop.default_rule(w, cfg.nmax, w.exponent_degree, npoints=cfg.quad_points)
    fam = mvop.build_family(w, cfg.t, cfg.nmax, rule)
    op = diffop.compute_g(fam, lam, rule, check=False)
    conds = [float(np.linalg.cond(h)) for h in fam.norms]
    orth = mvop.orthogonality_residual(fam)
    summary = {"orthogonality_residual": orth, "recurrence_residual": mvop.recurrence_residual(fam),
               "norm_condition_numbers": conds,
               "weak_pearson_residual": diffop.weak_pearson_residual(op, fam.norms)}
    payload = {"config": cfg.to_dict(), "family": family_to_dict(fam), "operator": op.to_dict(),
               "summary": summary}
    _emit(cfg, payload, "build")
    _say(f"built P_0..P_{fam.nmax} for {w.description} at t={cfg.t:g} "
         f"({rule.scheme.value}, {rule.npoints} nodes)")
    _say(f"  orthogonality residual {orth:.2e}; max cond(H_n) {max(conds):.2e}")
    return 0


# ------------------------------------------------------------------ verify


def cmd_verify(cfg: RunConfig, suite: str = "all", g_builder=None) -> int:
    result = suites.run_suites(cfg, suite, g_builder)
    payload = {"config": cfg.to_dict(), "suite": suite, **result}
    _emit(cfg, payload, "verify")
    for name, recs in result["suites"].items():
        for rec in recs:
            if rec.get("skipped"):
                status = "SKIP"
            else:
                status = "PASS" if rec["passed"] else "FAIL"
            res = "" if rec["residual"] is None else f" {rec['residual']:.3e} <= {rec['threshold']:.1e}"
            _say(f"[{status}] {name}/{rec['name']}{res}")
    return 0 if result["passed"] else 1


# ------------------------------------------------------------------ evolve


def closed_form_seed(cfg: RunConfig, nmax: int, t: float):
    """Closed-form operator for the shipped flows, or ``None``."""
    wd = cfg.weight
    if wd.get("type", "hermite_A") != "hermite_A" or float(wd.get("deformation_scale", 1.0)) != 1.0:
        return None
    p = hermite_params_for(cfg)
    d = wd.get("deformation", "casimir")
    if p.N == 2 and d == "casimir":
        return closed_form_operator2x2(nmax, t, p.a[0])
    if p.N == 1 and d == "x":
        return scalar_x_operator(nmax, t)
    if p.N == 1 and d == "x2":
        return scalar_x2_operator(nmax, t)
    return None


def _band_gap(a: diffop.BandedDifferenceOperator, b: diffop.BandedDifferenceOperator, top: int) -> float:
    d = np.abs(a.coeff[:, : top + 1] - b.coeff[:, : top + 1])
    return float(np.nanmax(d)) if not np.isnan(d).all() else 0.0


def cmd_evolve(cfg: RunConfig) -> int:
    if cfg.steps < 1:
        raise ConfigError("t_grid.steps", "must be >= 1")
    lam = symbol_for(cfg)
    k = lam.degree
    w = weight_for(cfg)
    seed = closed_form_seed(cfg, cfg.nmax + 4 * k * cfg.steps + k, cfg.t0)
    if seed is not None:
        state0 = toda.LatticeState(cfg.t0, seed)
        source = "closed form"
    else:
        rule = mvop.default_rule(w, cfg.nmax, w.exponent_degree, npoints=cfg.quad_points)
        fam = mvop.build_family(w, cfg.t0, cfg.nmax, rule)
        state0 = toda.LatticeState.from_family(fam, lam, rule, with_norms=False)
        source = "quadrature"
    traj = toda.integrate(state0, cfg.t1, cfg.steps)
    end = traj[-1]

    rule = mvop.default_rule(w, cfg.nmax, w.exponent_degree, npoints=cfg.quad_points)
    ref = diffop.compute_g(mvop.build_family(w, cfg.t1, cfg.nmax, rule), lam, rule, check=False)
    top = min(end.window, cfg.nmax - k)
    checks = [suites.check("endpoint_vs_reorthogonalization", _band_gap(end.op, ref, top),
                           cfg.tol("evolve_endpoint"), window=top)]
    closed = closed_form_seed(cfg, top, cfg.t1)
    if closed is not None:
        checks.append(suites.check("endpoint_vs_closed_form", _band_gap(end.op, closed, top),
                                   cfg.tol("evolve_endpoint"), window=top))
    passed = all(c["passed"] for c in checks)
    report = {"config": cfg.to_dict(), "seed": source, "t0": cfg.t0, "t1": cfg.t1, "steps": cfg.steps,
              "final_window": end.window, "checks": checks, "passed": passed}

    if cfg.out:
        rows = write_trajectory_csv(cfg.out, traj, nmax=cfg.nmax)
        rep_path = str(Path(cfg.out).with_suffix(".report.json"))
        Path(rep_path).write_text(dumps({"header": _header(cfg, "evolve"), **report} if cfg.header else report),
                                  encoding="utf-8")
        _say(f"wrote {rows} rows to {cfg.out} and the endpoint report to {rep_path}")
    else:
        sys.stdout.write(dumps({"header": _header(cfg, "evolve"), **report} if cfg.header else report))
    for c in checks:
        _say(f"[{'PASS' if c['passed'] else 'FAIL'}] {c['name']} {c['residual']:.3e} <= {c['threshold']:.1e}")
    return 0 if passed else 1


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mvtoda",
        description="Matrix-valued orthogonal polynomials for deformed weights, their banded "
                    "difference operators and Toda-type flows.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--preset", choices=PRESETS, help="named weight (default hermite2)")
    common.add_argument("--config", metavar="PATH", help="JSON run configuration")
    common.add_argument("--nmax", type=int, help="highest polynomial degree")
    common.add_argument("--quad-points", type=int, dest="quad_points", help="quadrature nodes")
    common.add_argument("--t", type=float, help="deformation time for build and verify")
    common.add_argument("--a", type=float, nargs="+", dest="a_params", help="Hermite parameters a_1..a_{N-1}")
    common.add_argument("--deformation", choices=("casimir", "x", "x2"), help="deformation symbol")
    common.add_argument("--deformation-scale", type=float, dest="deformation_scale",
                        help="multiply the symbol by this factor")
    common.add_argument("--t0", type=float, help="start of the t grid")
    common.add_argument("--t1", type=float, help="end of the t grid")
    common.add_argument("--steps", type=int, help="number of RK4 steps")
    common.add_argument("--fd-h", type=float, dest="fd_h", help="finite-difference step")
    common.add_argument("--out", metavar="PATH", help="output file (default stdout)")
    common.add_argument("--no-header", action="store_false", dest="header", default=None,
                        help="omit the header with version and timestamp")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("build", parents=[common], help="build a family and export it as JSON")
    pv = sub.add_parser("verify", parents=[common], help="run invariant suites")
    pv.add_argument("--suite", choices=suites.SUITES + ("all",), default="all")
    sub.add_parser("evolve", parents=[common], help="integrate the band flow and write a CSV trajectory")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    keys = ("preset", "nmax", "quad_points", "t", "a_params", "deformation", "deformation_scale",
            "t0", "t1", "steps", "fd_h", "out", "header")
    return load_config(args.config, {k: getattr(args, k, None) for k in keys})


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        if args.command == "build":
            return cmd_build(cfg)
        if args.command == "verify":
            return cmd_verify(cfg, args.suite)
        return cmd_evolve(cfg)
    except WindowError as exc:
        _say(f"mvtoda {args.command}: window exhausted: {exc}")
        return 2
    except ConfigError as exc:
        _say(f"mvtoda {args.command}: {exc}")
        return 2
    except MvtodaError as exc:
        _say(f"mvtoda {args.command}: {type(exc).__name__}: {exc}")
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
