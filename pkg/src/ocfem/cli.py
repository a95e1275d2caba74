"""Command line driver: ``ocfem solve | reproduce | verify``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import checks
from .problems import BUILTIN, builtin, load_problem
from .study import MESH_FAMILIES, SolverFailure, mesh_sequence, run_study

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3

log = logging.getLogger("ocfem")


class ConfigError(Exception):
    pass


def resolve_problem(spec: str):
    if spec in BUILTIN:
        return builtin(spec)
    path = Path(spec)
    if not path.exists():
        raise ConfigError(f"unknown problem {spec!r}: not a built-in ({', '.join(BUILTIN)}) and no such file")
    try:
        doc = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read problem file {spec}: {exc}") from None
    try:
        return load_problem(doc, name=path.stem)
    except ValueError as exc:
        raise ConfigError(f"invalid problem file {spec}: {exc}") from None


def _emit(text: str, out: str | None):
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)
        log.info("wrote %s", out)
    else:
        sys.stdout.write(text)


def _study(problem, family, base, levels, args):
    try:
        meshes = mesh_sequence(family, base, levels, args.shift)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return run_study(problem, meshes, args.quad_order, args.gamma, args.max_iter, family)


def cmd_solve(args) -> int:
    problem = resolve_problem(args.problem)
    if args.mesh == "third-aligned":
        base = args.base_k if args.base_k is not None else (args.base if args.base is not None else 0)
    else:
        base = args.base if args.base is not None else 2
    table = _study(problem, args.mesh, base, args.levels, args)
    _emit(table.render(args.format), args.out)
    return EXIT_OK


def cmd_reproduce(args) -> int:
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    ext = {"csv": "csv", "markdown": "md", "dat": "dat"}[args.format]
    for key, (name, family, base, levels) in checks.STUDIES.items():
        table = _study(builtin(name), family, base, levels, args)
        path = outdir / f"{key}.{ext}"
        path.write_text(table.render(args.format))
        last = table.records[-1]
        rates = ", ".join(f"{k} {last.eoc[k]:.2f}" for k in ("L2", "Linf", "H1", "H2"))
        print(f"{key}: {name} on {family} meshes, {len(table.records)} levels -> {path} (final EOC: {rates})")
    return EXIT_OK


def cmd_verify(args) -> int:
    results = checks.run_all()
    for r in results:
        print(r.line())
    return EXIT_OK if all(r.passed for r in results) else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ocfem", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def solver_opts(sp):
        sp.add_argument("--quad-order", type=int, default=None,
                        help="Gauss points per load panel (default: $OCFEM_QUAD_ORDER or 6)")
        sp.add_argument("--gamma", type=float, default=1.0, help="PDAS active-set parameter")
        sp.add_argument("--max-iter", type=int, default=100, help="PDAS iteration limit")
        sp.add_argument("--shift", type=float, default=0.25,
                        help="relative interior-node shift for perturbed meshes")
        sp.add_argument("--format", choices=("csv", "markdown", "dat"), default="csv")

    s = sub.add_parser("solve", help="run one convergence study")
    s.add_argument("--problem", required=True, help=f"built-in name ({', '.join(BUILTIN)}) or JSON path")
    s.add_argument("--mesh", choices=MESH_FAMILIES, default="uniform")
    s.add_argument("--base", type=int, default=None, help="element count of the coarsest mesh")
    s.add_argument("--base-k", type=int, default=None,
                   help="third-aligned meshes: coarsest mesh has 3*2^k elements")
    s.add_argument("--levels", type=int, default=5)
    s.add_argument("--out", default=None, help="output file (default: stdout)")
    solver_opts(s)
    s.set_defaults(func=cmd_solve)

    r = sub.add_parser("reproduce", help="run the four benchmark studies and write their tables")
    r.add_argument("--outdir", default="tables")
    solver_opts(r)
    r.set_defaults(func=cmd_reproduce)

    v = sub.add_parser("verify", help="run the property checks and print pass/fail per check")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "levels", 1) < 1:
        print("error: --levels must be at least 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except ValueError as exc:
        # bad env overrides and similar configuration mistakes
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
