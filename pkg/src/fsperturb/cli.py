"""Command-line front end.

    fsperturb certify --h0 H0.txt --w W.txt --lam0-index 1 [--a 0.1 --b 0.8]
    fsperturb solve   --h0 H0.txt --w W.txt --lam0-index 1 [--force] [--check] [--csv]
    fsperturb helium constants   [--index 5 | --nr N --rmax R] [--sphere product:L|lebedev:PATH]
    fsperturb helium bounds      --z 10 [--symmetry sym|antisym] [--rounding paper|full]
    fsperturb helium table1      [--csv]
    fsperturb helium convergence [--max-index 5] [--csv]

Exit codes: 0 success, 1 input error, 2 certification failure, 3 solver failure.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import certify, densela, fsmap, helium, quadrature
from .errors import FSError

EXIT_OK, EXIT_INPUT, EXIT_CERT, EXIT_SOLVER = 0, 1, 2, 3
DESK_MAX_INDEX = 5


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _add_problem_args(p):
    p.add_argument("--h0", required=True, help="matrix file for H0")
    p.add_argument("--w", required=True, help="matrix file for W")
    sel = p.add_mutually_exclusive_group(required=True)
    sel.add_argument("--lam0-index", type=int, help="i-th distinct eigenvalue of H0, ascending from 1")
    sel.add_argument("--lam0-value", type=float, help="eigenvalue of H0 to expand around")
    p.add_argument("--cluster-tol", type=float, default=1e-9, help="relative tolerance for merging eigenvalues")
    p.add_argument("--a", type=float, default=0.1)
    p.add_argument("--b", type=float, default=0.8)
    p.add_argument("--out", help="also write the output to this file")


def _add_grid_args(p, index_default=5):
    p.add_argument("--index", type=int, default=None,
                   help=f"row of the quadrature parameter table (1-12, default {index_default})")
    p.add_argument("--nr", type=int, help="radial points (explicit grid)")
    p.add_argument("--rmax", type=float, help="outer radius (explicit grid)")
    p.add_argument("--sphere", help="product:L or lebedev:PATH (PATH may be a bundled point count)")
    p.add_argument("--orientation", choices=("swapped", "literal"), default="swapped")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--max-index", type=int, default=5, help="largest table index run without --allow-large")
    p.add_argument("--allow-large", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fsperturb", description="Feshbach-Schur perturbation bounds")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("certify", help="check the perturbation conditions")
    _add_problem_args(p)

    p = sub.add_parser("solve", help="solve the fixed-point equations for every branch")
    _add_problem_args(p)
    p.add_argument("--force", action="store_true", help="iterate even if certification fails")
    p.add_argument("--check", action="store_true", help="compare with a full eigendecomposition of H")
    p.add_argument("--csv", action="store_true")

    hp = sub.add_parser("helium", help="helium-like ion constants and energy bounds")
    hsub = hp.add_subparsers(dest="helium_command", required=True, parser_class=_Parser)

    p = hsub.add_parser("constants")
    _add_grid_args(p)
    p.add_argument("--csv", action="store_true")
    p.add_argument("--out")

    p = hsub.add_parser("bounds")
    p.add_argument("--z", type=float, required=True)
    p.add_argument("--symmetry", choices=("sym", "antisym"), default="sym")
    p.add_argument("--rounding", choices=("paper", "full"), default="paper")
    _add_grid_args(p)
    p.add_argument("--csv", action="store_true")
    p.add_argument("--out")

    p = hsub.add_parser("table1")
    p.add_argument("--rounding", choices=("paper", "full"), default="paper")
    _add_grid_args(p)
    p.add_argument("--csv", action="store_true")
    p.add_argument("--out")

    p = hsub.add_parser("convergence")
    _add_grid_args(p)
    p.add_argument("--csv", action="store_true")
    p.add_argument("--out")
    return parser


def _emit(text: str, out: str | None):
    sys.stdout.write(text)
    if out:
        Path(out).write_text(text)


def _load_problem(args):
    H0 = densela.read_matrix(args.h0)
    W = densela.read_matrix(args.w)
    params = certify.CertifyParams(args.a, args.b)
    prob = fsmap.make_problem(H0, W, lam0_index=args.lam0_index, lam0_value=args.lam0_value,
                              cluster_tol=args.cluster_tol)
    return prob, params


def cmd_certify(args) -> int:
    prob, params = _load_problem(args)
    cert = certify.check_conditions(prob, params)
    _emit(cert.to_text(), args.out)
    return EXIT_OK if cert.valid else EXIT_CERT


SOLVE_HEADER = ("i", "lam_i", "iterations", "residual", "interval_low", "interval_high",
                "brute_force_lam", "in_interval")


def cmd_solve(args) -> int:
    prob, params = _load_problem(args)
    cert = certify.check_conditions(prob, params)
    if not cert.valid and not args.force:
        sys.stderr.write(cert.to_text())
        sys.stderr.write("certification failed; rerun with --force to iterate anyway\n")
        return EXIT_CERT
    lo, hi = certify.eigenvalue_enclosures(prob, params, cert, force=args.force).first_order
    truth = densela.sym_eig(prob.H).values if args.check else None
    rows, failed = [], False
    for i in range(1, prob.m + 1):
        try:
            sol = fsmap.solve_fixed_point(prob, i, params=params, cert=cert, force=args.force)
        except FSError as exc:
            failed = True
            rows.append((i, "nan", 0, "nan", lo, hi, "", f"error: {exc}"))
            continue
        bf = ""
        if truth is not None:
            bf = float(truth[int(np.argmin(np.abs(truth - sol.lam)))])
        rows.append((i, sol.lam, sol.iterations, sol.residual, lo, hi, bf, bool(lo <= sol.lam <= hi)))
    if args.csv:
        text = helium.rows_to_csv(SOLVE_HEADER, rows)
    else:
        lines = [f"lam0={prob.lam0!r} m={prob.m} gam0={prob.gam0!r} valid={str(cert.valid).lower()}"]
        for row in rows:
            lines.append("  ".join(f"{h}={helium._fmt(v)}" for h, v in zip(SOLVE_HEADER, row)))
        text = "\n".join(lines) + "\n"
    _emit(text, args.out)
    return EXIT_SOLVER if failed else EXIT_OK


def _index_guard(index: int, args):
    if index not in quadrature.GRID_TABLE:
        raise UsageError(f"--index must be in 1..{len(quadrature.GRID_TABLE)}, got {index}")
    if index > args.max_index and not args.allow_large:
        raise UsageError(f"index {index} exceeds --max-index {args.max_index}; the kernel sums cost "
                         f"O(N^2) in the grid size, pass --allow-large to run it anyway")


def _grid_from_args(args) -> tuple[quadrature.Grid, str]:
    sphere = quadrature.parse_sphere(args.sphere) if args.sphere else None
    if args.nr is not None or args.rmax is not None:
        if args.nr is None or args.rmax is None or args.index is not None:
            raise UsageError("an explicit grid needs both --nr and --rmax and no --index")
        sphere = sphere or quadrature.product_rule(12)
        return quadrature.build_grid(quadrature.GridSpec(args.nr, args.rmax, sphere)), \
            f"N_r={args.nr} R_max={args.rmax} sphere={sphere.name}"
    index = 5 if args.index is None else args.index
    _index_guard(index, args)
    return quadrature.build_grid(quadrature.indexed_spec(index, sphere)), f"index {index}"


def _constants_text(c: helium.HeliumConstants) -> str:
    return (f"# {c.source}\n"
            f"w1={c.w1!r}\nw2={c.w2!r}\nw1_as={c.w1_as!r}\nw2_as={c.w2_as!r}\n")


def cmd_helium(args) -> int:
    hc = args.helium_command
    if hc == "constants":
        grid, label = _grid_from_args(args)
        consts, _ = helium.compute_constants(grid, orientation=args.orientation, threads=args.threads,
                                             source=label)
        if args.csv:
            idx = args.index if args.index is not None else ("" if args.nr else 5)
            text = helium.convergence_csv([(idx, consts)])
        else:
            text = _constants_text(consts)
        _emit(text, args.out)
        return EXIT_OK

    if hc in ("bounds", "table1"):
        consts = None
        if args.rounding == "full":
            grid, label = _grid_from_args(args)
            consts, _ = helium.compute_constants(grid, orientation=args.orientation, threads=args.threads,
                                                 source=label)
        if hc == "table1":
            rows = helium.table1(rounding=args.rounding, constants=consts)
            if args.csv:
                text = helium.table1_csv(rows)
            else:
                text = "".join(
                    f"z={r.z}  main_part={-r.E_lead:.10g}  delta={r.delta_pct:.2f}%  err={r.err_pct:.3f}%  "
                    f"interval=[{r.lower:.10g}, {r.upper:.10g}]  E_exact={r.E_exact}  "
                    f"in_interval={str(r.in_interval).lower()}\n" for r in rows)
            _emit(text, args.out)
            return EXIT_OK
        enc = helium.energy_bounds(args.z, args.symmetry, consts, args.rounding)
        th = helium.thresholds(helium.ROUNDED_CONSTANTS if consts is None else consts)
        z_min = th.z_min_sym if args.symmetry == "sym" else th.z_min_as
        valid = args.z >= z_min
        if args.csv:
            text = helium.rows_to_csv(("z", "symmetry", "lower", "upper", "z_min", "valid"),
                                      [(enc.z, enc.symmetry, enc.lower, enc.upper, z_min, valid)])
        else:
            text = (f"z={helium._fmt(enc.z)} symmetry={enc.symmetry} "
                    f"interval=[{helium._fmt(enc.lower)}, {helium._fmt(enc.upper)}] "
                    f"c={helium._fmt(enc.c)} gam0={helium._fmt(enc.gam0)} w1={helium._fmt(enc.w1)} "
                    f"w2={helium._fmt(enc.w2)} k={helium._fmt(enc.k)} "
                    f"z_min={helium._fmt(z_min)} valid={str(valid).lower()}\n")
        _emit(text, args.out)
        return EXIT_OK

    # convergence
    top = args.max_index if args.index is None else args.index
    if top not in quadrature.GRID_TABLE:
        raise UsageError(f"index must be in 1..{len(quadrature.GRID_TABLE)}, got {top}")
    if top > DESK_MAX_INDEX and not args.allow_large:
        raise UsageError(f"indices above {DESK_MAX_INDEX} need --allow-large (requested up to {top})")
    sphere = quadrature.parse_sphere(args.sphere) if args.sphere else None
    results = helium.convergence(range(1, top + 1), sphere=sphere, orientation=args.orientation,
                                 threads=args.threads)
    if args.csv:
        text = helium.convergence_csv(results)
    else:
        text = "".join(f"index={i} w1={c.w1!r} w2={c.w2!r} w1_as={c.w1_as!r} w2_as={c.w2_as!r}\n"
                       for i, c in results)
    _emit(text, args.out)
    return EXIT_OK


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        handler = {"certify": cmd_certify, "solve": cmd_solve, "helium": cmd_helium}[args.command]
        return handler(args)
    except UsageError as exc:
        sys.stderr.write(f"{exc}\n")
        return EXIT_INPUT
    except (FSError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
