"""Command line interface.

Subcommands::

    kuokit check       --config problem.toml [--out report.json] [--format json|csv|human]
                       [--alpha 0.25] [--seed 7]
    kuokit functionals --component "x1^2+x2^2" [--component ...] --point 1,2 [--point ...]
    kuokit sample      --config problem.toml [--out sample.json] [--format json|csv]
    kuokit arcs        --config problem.toml [--out orders.json] [--format json|human]

Exit codes for ``check``: 0 all requested checks hold, 1 some check fails,
2 some check is inconclusive (none fails), 3 execution error.  The
``KUOKIT_THREADS`` environment variable sizes the per-shell evaluation pool.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import replace

from .config import load_config
from .errors import KuokitError
from .functionals import (dual_apply, eta, eta_tilde, gram_det, jacobian_minor_sum,
                          kuo_distance, rabier_nu)
from .germs import PolyMap
from .report import emit_report, run_analysis
from .sampling import sample_shells
from .version import __version__


def _write(text: str, out_path):
    if out_path is None:
        sys.stdout.write(text)
    else:
        with open(out_path, "w") as fh:
            fh.write(text)


def _cmd_check(args) -> int:
    config = load_config(args.config)
    if args.alpha is not None:
        config = replace(config, alpha=args.alpha)
    if args.seed is not None:
        config = replace(config, seed=args.seed)
    report = run_analysis(config)
    _write(emit_report(report, args.format), args.out)
    return report.exit_code


def _parse_point(text: str):
    try:
        return [float(v) for v in text.split(",")]
    except ValueError as exc:
        raise KuokitError(f"bad point {text!r}; use comma-separated numbers") from exc


def _cmd_functionals(args) -> int:
    f = PolyMap.from_strings(args.component, n=args.n)
    rows = []
    for text in args.point:
        x = _parse_point(text)
        J = f.jacobian(x)
        row = {
            "point": x,
            "kappa": kuo_distance(J),
            "nu": rabier_nu(J),
            "eta": eta(J),
            "eta_tilde": eta_tilde(J),
            "gram_det": gram_det(J),
            "minor_sum": jacobian_minor_sum(f, x),
            "dual_e1": dual_apply(J, [1.0] + [0.0] * (f.p - 1)),
        }
        rows.append(row)
    if args.format == "json":
        _write(json.dumps({"germ": f.to_strings(), "values": rows},
                          indent=2, sort_keys=True) + "\n", args.out)
    else:
        lines = [f"germ f = ({', '.join(f.to_strings())})"]
        for row in rows:
            point = ", ".join(f"{c:g}" for c in row["point"])
            lines.append(f"  x = ({point})")
            for key in ("kappa", "nu", "eta", "eta_tilde", "gram_det", "minor_sum"):
                lines.append(f"      {key:10s} = {row[key]:.12g}")
        _write("\n".join(lines) + "\n", args.out)
    return 0


def _cmd_sample(args) -> int:
    config = load_config(args.config)
    if args.alpha is not None:
        config = replace(config, alpha=args.alpha)
    if args.seed is not None:
        config = replace(config, seed=args.seed)
    sample = sample_shells(config.sigma, config.alpha, config.n_shells,
                           config.per_shell, config.seed)
    if args.format == "json":
        _write(json.dumps(sample.to_dict(), indent=2, sort_keys=True) + "\n", args.out)
    else:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["shell", "rho", "distance"]
                        + [f"x{j + 1}" for j in range(sample.ambient_dim)])
        for k, shell in enumerate(sample.shells):
            for x, d in zip(shell.points, shell.distances):
                writer.writerow([k, f"{shell.rho:.17g}", f"{d:.17g}"]
                                + [f"{c:.17g}" for c in x])
        _write(buffer.getvalue(), args.out)
    return 0


def _cmd_arcs(args) -> int:
    config = load_config(args.config)
    if not config.arcs:
        raise KuokitError("config declares no [[arcs]] entries")
    from .report import _arc_rows
    rows = _arc_rows(config)
    if args.format == "json":
        _write(json.dumps({"arcs": rows}, indent=2, sort_keys=True) + "\n", args.out)
    else:
        lines = []
        for row in rows:
            lines.append(f"gamma(t) = ({', '.join(row['components'])})")
            for name, order in row["orders"].items():
                lines.append(f"    {name}: {order}")
        _write("\n".join(lines) + "\n", args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kuokit",
        description="Empirical checks of Kuo-type jet-sufficiency conditions "
                    "relative to a closed set Sigma.",
    )
    parser.add_argument("--version", action="version", version=f"kuokit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_check = sub.add_parser("check", help="run the configured condition checks")
    p_check.add_argument("--config", required=True, help="TOML or JSON problem config")
    p_check.add_argument("--out", default=None, help="output path (default stdout)")
    p_check.add_argument("--format", default="human", choices=("json", "csv", "human"))
    p_check.add_argument("--alpha", type=float, default=None, help="override sampling alpha")
    p_check.add_argument("--seed", type=int, default=None, help="override sampling seed")
    p_check.set_defaults(func=_cmd_check)

    p_fun = sub.add_parser("functionals", help="evaluate kappa/nu/eta/Gram at points")
    p_fun.add_argument("--component", action="append", required=True,
                       help="germ component expression (repeat for p > 1)")
    p_fun.add_argument("--n", type=int, default=None, help="ambient dimension")
    p_fun.add_argument("--point", action="append", required=True,
                       help="comma-separated coordinates (repeatable)")
    p_fun.add_argument("--out", default=None)
    p_fun.add_argument("--format", default="human", choices=("json", "human"))
    p_fun.set_defaults(func=_cmd_functionals)

    p_sample = sub.add_parser("sample", help="emit the shell sample only")
    p_sample.add_argument("--config", required=True)
    p_sample.add_argument("--out", default=None)
    p_sample.add_argument("--format", default="json", choices=("json", "csv"))
    p_sample.add_argument("--alpha", type=float, default=None)
    p_sample.add_argument("--seed", type=int, default=None)
    p_sample.set_defaults(func=_cmd_sample)

    p_arcs = sub.add_parser("arcs", help="fit asymptotic orders along configured arcs")
    p_arcs.add_argument("--config", required=True)
    p_arcs.add_argument("--out", default=None)
    p_arcs.add_argument("--format", default="human", choices=("json", "human"))
    p_arcs.set_defaults(func=_cmd_arcs)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except KuokitError as exc:
        print(f"kuokit: error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"kuokit: i/o error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
