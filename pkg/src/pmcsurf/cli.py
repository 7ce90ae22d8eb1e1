"""Command line entry point: ``pmcsurf verify|scan|mesh``."""

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__, harness, plotting

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def _global_flags(parser, default):
    parser.add_argument("--fd-step", type=float, default=default, help="finite-difference step for frame PDEs")
    parser.add_argument("--ode-step", type=float, default=default, help="ODE step for integrated families")
    parser.add_argument("--tol-scale", type=float, default=default, help="multiply every tolerance")
    parser.add_argument("-v", "--verbose", action="store_true", default=default)


def build_parser():
    p = argparse.ArgumentParser(prog="pmcsurf", description=__doc__)
    p.add_argument("--version", action="version", version=__version__)
    _global_flags(p, None)
    # flags are also accepted after the subcommand name
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, argparse.SUPPRESS)
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", parents=[common], help="run a verification suite")
    v.add_argument("--config", required=True, help="suite config (JSON) or a bundled config name")
    v.add_argument("--out", required=True, help="JSON report path; CSV rows and PNG figures go alongside")
    v.add_argument("--no-figures", action="store_true")

    s = sub.add_parser("scan", parents=[common], help="sweep a family over a parameter grid")
    s.add_argument("--family", required=True)
    s.add_argument("--params", required=True, help="e.g. 'k_alpha=0:2:0.25, k_beta=sqrt(1+k_alpha^2)'")
    s.add_argument("--out", required=True, help="CSV path")
    s.add_argument("--samples", type=int, default=3, help="chart samples per side for each point")

    m = sub.add_parser("mesh", parents=[common], help="export meshes for every surface of a config")
    m.add_argument("--config", required=True)
    m.add_argument("--format", required=True, choices=("obj_charts", "csv6d"))
    m.add_argument("--out", required=True, help="output directory")
    return p


def _resolve_config(name):
    path = Path(name)
    if not path.exists():
        bundled = harness.bundled_config(name)
        if bundled.is_file():
            return bundled
    return path


def _overrides(args):
    return {"fd_step": args.fd_step, "ode_step": args.ode_step, "tol_scale": args.tol_scale}


def cmd_verify(args):
    config = harness.load_config(_resolve_config(args.config), _overrides(args))
    report, rows = harness.run_suite(config)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    artifacts = []
    for i, (name, rs) in enumerate(rows.items()):
        if not rs:
            continue
        stem = out.with_name(f"{out.stem}_{i:02d}")
        harness.write_rows(stem.with_suffix(".csv"), rs)
        artifacts.append(str(stem.with_suffix(".csv")))
        if not args.no_figures:
            artifacts.append(str(plotting.surface_figure(name, rs, stem.with_suffix(".png"))))
    report["artifacts"] = artifacts
    harness.dump_report(report, out)
    for s in report["surfaces"]:
        verdict = "ERROR" if s["status"] == "error" else " ".join(
            f"{k}={'PASS' if c['pass'] else 'FAIL'}" for k, c in s["checks"].items())
        print(f"{s['name']}: {verdict}")
    summ = report["summary"]
    print(f"{summ['passed']}/{summ['checks']} checks passed, {summ['errors']} surface errors")
    return EXIT_OK if summ["all_pass"] else EXIT_FAIL


def cmd_scan(args):
    settings = {k: v for k, v in _overrides(args).items() if v is not None}
    rows = harness.scan_grid(args.family, args.params, args.out, nx=args.samples, ny=args.samples,
                             settings=settings)
    items = harness.parse_params(args.params)
    if rows and items:
        plotting.scan_figure(rows, items[0][0], Path(args.out).with_suffix(".png"))
    skipped = sum(r["status"] != "ok" for r in rows)
    print(f"{len(rows)} parameter points, {skipped} skipped -> {args.out}")
    return EXIT_OK


def cmd_mesh(args):
    config = harness.load_config(_resolve_config(args.config), _overrides(args))
    failures = 0
    for i, job in enumerate(config.surfaces):
        try:
            paths = harness.export_mesh(job.spec, job.nx, job.ny, args.format, args.out,
                                        name=f"{i:02d}_{job.name}", margin=job.margin)
        except harness._ERRORS as e:
            print(f"{job.name}: ERROR {e}")
            failures += 1
            continue
        for path in paths:
            print(path)
    return EXIT_FAIL if failures else EXIT_OK


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return {"verify": cmd_verify, "scan": cmd_scan, "mesh": cmd_mesh}[args.command](args)
    except harness.ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
