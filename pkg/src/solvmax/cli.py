"""Command-line entry point.

Exit codes: 0 success, 1 runtime or numerical failure (including a failed
verify report), 2 invalid configuration or arguments.
"""
from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import export
from .config import Config, load_config
from .errors import ConfigError, NotBracketGenerating, NotRegular, SolvmaxError
from .geodesic import exp_map, predicted_z_zeros
from .maxwell import first_maxwell_time
from .pendulum import PhasePoint, cap_time, classify_region, equilibria, period, portrait_grid, separatrices
from .verify import run_verify

EXIT_OK, EXIT_RUNTIME, EXIT_CONFIG = 0, 1, 2


class UsageError(Exception):
    pass


def _parse_lambda(text: Optional[str]) -> PhasePoint:
    if text is None:
        raise UsageError("--lambda phi,r is required")
    try:
        phi, r = (float(x) for x in text.split(","))
    except ValueError:
        raise UsageError(f"--lambda expects 'phi,r', got {text!r}") from None
    if not (math.isfinite(phi) and math.isfinite(r)):
        raise UsageError("--lambda must be finite")
    return PhasePoint(phi, r)


def _lambda_dict(lam: PhasePoint) -> dict:
    return {"phi": lam.phi, "r": lam.r}


def _period_dict(pr) -> dict:
    return {
        "tau": pr.value,
        "t1": pr.t1,
        "classification": pr.classification.value,
        "crossings": list(pr.crossings),
    }


def _emit(text: str, out: Optional[str]) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _cap(cfg: Config, spec) -> float:
    return cap_time(spec, cfg.tolerances.cap_factor)


# ------------------------------------------------------------------ commands


def cmd_classify(cfg: Config, args) -> int:
    spec = cfg.group()
    seps = separatrices(spec)
    eqs = [
        {
            "name": e.name,
            "phi": e.location.phi,
            "r": e.location.r,
            "type": e.type.value,
            "eigenvalues": [[float(np.real(v)), float(np.imag(v))] for v in e.eigenvalues],
        }
        for e in equilibria(spec)
    ]
    curves = [
        {
            "tag": c.tag,
            "source": c.source,
            "target": c.target,
            "arrival_distance": c.arrival_distance,
            "section_mismatch": c.section_mismatch,
            "strip_ok": c.strip_ok,
            "n_points": int(len(c.points)),
        }
        for c in seps.curves.values()
    ]
    report = {
        "config": cfg.to_dict(),
        "regime": spec.regime.value,
        "det_theta": spec.det_theta,
        "tr_theta": spec.tr_theta,
        "discriminant": spec.discriminant,
        "equilibria": eqs,
        "separatrices": curves,
    }
    _emit(export.dumps(report), args.out)
    return EXIT_OK


def cmd_portrait(cfg: Config, args) -> int:
    spec = cfg.group()
    g = cfg.grid
    phis = np.linspace(g.phi_min, g.phi_max, g.phi_n)
    rs = np.linspace(g.r_min, g.r_max, g.r_n)
    rows = portrait_grid(spec, phis, rs, cfg.tolerances.integrator(), _cap(cfg, spec))
    polylines = export.separatrix_polylines(separatrices(spec))
    if args.format == "json":
        doc = {
            "config": cfg.to_dict(),
            "grid": [dict(zip(export.PORTRAIT_HEADER, row)) for row in rows],
            "separatrices": polylines,
        }
        _emit(export.dumps(doc), args.out)
        return EXIT_OK
    _emit(export.csv_text(export.PORTRAIT_HEADER, rows), args.out)
    if args.out is not None:
        side = Path(args.out).with_suffix(".separatrices.json")
        side.write_text(export.dumps({"config": cfg.to_dict(), "separatrices": polylines}))
    return EXIT_OK


def cmd_geodesic(cfg: Config, args) -> int:
    lam = _parse_lambda(args.lam)
    if args.T is None or not args.T >= 0 or not math.isfinite(args.T):
        raise UsageError("--T must be a finite nonnegative number")
    spec = cfg.group()
    structure = cfg.structure(spec)
    tol = cfg.tolerances.integrator()
    g, traj = exp_map(spec, structure, lam, args.T, tol)
    n = args.samples if args.samples is not None else 201
    if args.format == "csv":
        _emit(export.csv_text(export.TRAJECTORY_HEADER, export.trajectory_rows(traj, n)), args.out)
        if args.out is None:
            return EXIT_OK
    pr = period(spec, lam, tol, _cap(cfg, spec))
    summary = {
        "config": cfg.to_dict(),
        "lambda": _lambda_dict(lam),
        "T": args.T,
        "endpoint": {"z": g.z, "w": [g.w[0], g.w[1]]},
        "z_zeros": [e.t for e in traj.z_zero_events],
        "period": _period_dict(pr),
        "predicted_z_zeros": list(predicted_z_zeros(pr, args.T)) if pr.finite and pr.t1 is not None else None,
        "events": [
            {"t": e.t, "kind": e.kind, "phi": e.state[0], "r": e.state[1], "z": e.state[2], "direction": e.direction}
            for e in sorted(traj.z_zero_events + traj.crossing_events, key=lambda e: e.t)
        ],
    }
    if args.format == "csv":
        Path(args.out).with_suffix(".summary.json").write_text(export.dumps(summary))
    else:
        _emit(export.dumps(summary), args.out)
    return EXIT_OK


def cmd_period(cfg: Config, args) -> int:
    lam = _parse_lambda(args.lam)
    spec = cfg.group()
    pr = period(spec, lam, cfg.tolerances.integrator(), _cap(cfg, spec))
    doc = {
        "config": cfg.to_dict(),
        "lambda": _lambda_dict(lam),
        "region": classify_region(spec, lam).value,
        **_period_dict(pr),
    }
    _emit(export.dumps(doc), args.out)
    return EXIT_OK


def cmd_maxwell(cfg: Config, args) -> int:
    lam = _parse_lambda(args.lam)
    spec = cfg.group()
    tol = cfg.tolerances.integrator()
    pr = period(spec, lam, tol, _cap(cfg, spec))
    res = first_maxwell_time(spec, lam, eps_line=cfg.tolerances.line, tol=tol, pr=pr)
    doc = {
        "config": cfg.to_dict(),
        "lambda": _lambda_dict(lam),
        "tau": pr.value,
        "t1_max": res.t1_max,
        "on_half_pi_line": res.on_half_pi_line,
        "classification": pr.classification.value,
    }
    _emit(export.dumps(doc), args.out)
    return EXIT_OK


def cmd_verify(cfg: Config, args) -> int:
    samples = args.samples if args.samples is not None else 100
    if samples < 1:
        raise UsageError("--samples must be positive")
    report = run_verify(cfg, seed=args.seed, samples=samples)
    _emit(export.dumps(report), args.out)
    return EXIT_OK if report["passed"] else EXIT_RUNTIME


COMMANDS = {
    "classify": cmd_classify,
    "portrait": cmd_portrait,
    "geodesic": cmd_geodesic,
    "period": cmd_period,
    "maxwell": cmd_maxwell,
    "verify": cmd_verify,
}

DEFAULT_FORMAT = {"portrait": "csv", "geodesic": "json"}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="solvmax", description="Geodesics, periods and Maxwell times on G(theta).")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", help="JSON config {theta, eta, tolerances, grid}")
    p.add_argument("--lambda", dest="lam", metavar="PHI,R", help="initial phase point")
    p.add_argument("--T", type=float, help="arc length")
    p.add_argument("--out", help="output path (default: stdout)")
    p.add_argument("--seed", type=int, default=0, help="seed for verify sampling (default 0)")
    p.add_argument("--samples", type=int, help="sample count (verify) or trajectory rows (geodesic)")
    p.add_argument("--format", choices=("json", "csv"), help="output format where both are offered")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _attach_lambda(argv: Sequence[str]) -> list[str]:
    # argparse would read "--lambda -1.5,0" as a missing value followed by an option
    out, it = [], iter(argv)
    for tok in it:
        if tok == "--lambda":
            nxt = next(it, None)
            out.append(tok if nxt is None else f"--lambda={nxt}")
        else:
            out.append(tok)
    return out


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    args = build_parser().parse_args(_attach_lambda(argv))
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    if args.format is None:
        args.format = DEFAULT_FORMAT.get(args.command, "json")
    if args.seed < 0 or args.seed >= 2**64:
        print("error: --seed must be an unsigned 64-bit integer", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = load_config(args.config)
        cfg.structure()  # validates theta and eta up front
        return COMMANDS[args.command](cfg, args)
    except (ConfigError, NotRegular, NotBracketGenerating, UsageError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SolvmaxError, OverflowError, ArithmeticError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
