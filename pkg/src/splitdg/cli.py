"""Command-line driver.

Subcommands:
    run <config.json>               execute a configured case with monitors
    verify <suite>                  run invariant batteries (exit 0 iff pass)
    converge <config.json> ...      mesh- or degree-refinement study
    mesh audit <path>               per-element J range and metric residuals
    mesh write <out> ...            emit a built-in mesh as a mesh file
    basis dump --degree N           print basis tables as CSV

Exit codes: 0 ok, 1 check failure, 2 usage/config error, 3 runtime abort
(positivity loss).
"""

import argparse
import json
import sys

import numpy as np

from splitdg import mesh as mesh_mod, physics, runner, verify
from splitdg.config import ConfigError, RunConfig

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def _cmd_run(args):
    config = RunConfig.from_file(args.config)
    summary = runner.run_case(config, output_dir=args.output_dir)
    print(json.dumps(summary, indent=2))
    return EXIT_OK


def _cmd_verify(args):
    checks = verify.run_suite(args.suite, seed=args.seed)
    report = verify.format_report(checks)
    print(report)
    if args.report:
        with open(args.report, "w") as fh:
            fh.write(report + "\n")
    return EXIT_OK if all(c.ok for c in checks) else EXIT_CHECK_FAILED


def _cmd_converge(args):
    config = RunConfig.from_file(args.config)
    report = runner.convergence_study(config, args.levels, refine=args.refine)
    text = runner.format_convergence_report(report)
    print(text)
    if args.report:
        with open(args.report, "w") as fh:
            fh.write(text + "\n")
    return EXIT_OK


def _cmd_mesh_audit(args):
    mesh = mesh_mod.read_mesh_file(args.path)
    rows, summary = mesh_mod.audit(mesh)
    print("element,j_min,j_max,metric_residual,cross_residual")
    for r in rows:
        print(f"{r['element']},{r['j_min']!r},{r['j_max']!r},"
              f"{r['metric_residual']!r},{r['cross_residual']!r}")
    for key, val in summary.items():
        print(f"# {key}: {val}")
    return EXIT_OK


def _cmd_mesh_write(args):
    if args.builtin == "cartesian":
        mesh = mesh_mod.box_mesh(args.degree, tuple(args.cells))
    else:
        mesh = mesh_mod.warped_box_mesh(args.degree, tuple(args.cells), args.amplitude)
    mesh_mod.write_mesh_file(args.out, mesh)
    print(f"wrote {mesh.num_elements} elements at degree {args.degree} to {args.out}")
    return EXIT_OK


def _cmd_basis_dump(args):
    from splitdg import spectral

    b = spectral.build_basis(args.degree)
    print("# nodes and weights")
    print("j,node,weight,barycentric")
    for j in range(args.degree + 1):
        print(f"{j},{b.nodes[j]!s},{b.weights[j]!s},{b.bary[j]!s}")
    for name, mat in (("D", b.D), ("Q", b.Q)):
        print(f"# {name} matrix, row major")
        for row in np.asarray(mat):
            print(",".join(repr(float(v)) for v in row))
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="splitdg", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a configured case")
    p_run.add_argument("config")
    p_run.add_argument("--output-dir", default=None)
    p_run.set_defaults(func=_cmd_run)

    p_verify = sub.add_parser("verify", help="run an invariant battery")
    p_verify.add_argument("suite", choices=sorted(verify.SUITES) + ["all"])
    p_verify.add_argument("--seed", type=int, default=2024)
    p_verify.add_argument("--report", default=None)
    p_verify.set_defaults(func=_cmd_verify)

    p_conv = sub.add_parser("converge", help="convergence study")
    p_conv.add_argument("config")
    p_conv.add_argument("--levels", type=int, nargs="+", required=True)
    p_conv.add_argument("--refine", choices=("mesh", "degree"), default="mesh")
    p_conv.add_argument("--report", default=None)
    p_conv.set_defaults(func=_cmd_converge)

    p_mesh = sub.add_parser("mesh", help="mesh utilities")
    mesh_sub = p_mesh.add_subparsers(dest="mesh_command", required=True)
    p_audit = mesh_sub.add_parser("audit", help="print J range and metric residuals")
    p_audit.add_argument("path")
    p_audit.set_defaults(func=_cmd_mesh_audit)
    p_write = mesh_sub.add_parser("write", help="write a built-in mesh to a file")
    p_write.add_argument("out")
    p_write.add_argument("--builtin", choices=("cartesian", "warped_box"), default="warped_box")
    p_write.add_argument("--degree", type=int, default=4)
    p_write.add_argument("--cells", type=int, nargs=3, default=(4, 4, 4))
    p_write.add_argument("--amplitude", type=float, default=0.05)
    p_write.set_defaults(func=_cmd_mesh_write)

    p_basis = sub.add_parser("basis", help="basis utilities")
    basis_sub = p_basis.add_subparsers(dest="basis_command", required=True)
    p_dump = basis_sub.add_parser("dump", help="print basis tables as CSV")
    p_dump.add_argument("--degree", type=int, required=True)
    p_dump.set_defaults(func=_cmd_basis_dump)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except physics.PositivityError as err:  # subclasses ValueError: catch first
        print(f"runtime abort: {err}", file=sys.stderr)
        return EXIT_RUNTIME
    except (ConfigError, mesh_mod.MeshFileError, ValueError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
