"""Command line entry point: ``kwcell <command> ...``.

Exit codes: 0 pass, 1 residual failure, 2 parse or usage error,
3 support mismatch, 4 failed precondition.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import families, io, level4, solver
from .cells import RELATIONS, U_RELATIONS, CellSystem, residual_trace_constraints, verify
from .eqs import equations
from .graph import fp_eigenvector
from .qarith import Params

EXIT_PASS, EXIT_FAIL, EXIT_PARSE, EXIT_SUPPORT, EXIT_PRECONDITION = 0, 1, 2, 3, 4
ALL_RELATIONS = RELATIONS + ("TrU1", "TrU1U2")


def _level4(k: int, params: Params) -> CellSystem:
    if k != 4:
        raise ValueError("the exceptional fixture exists only at k = 4")
    return level4.level4_cells(params)


FAMILIES = {
    "level4": _level4,
    "cc": families.cc_cells,
    "unfolded": families.unfolded_cells,
    "z4": families.z4_cells,
}


@dataclass(frozen=True)
class Config:
    tolerance: float = 1e-9
    relations: tuple[str, ...] = RELATIONS
    precision: str = "double"
    workers: int = 1

    def __post_init__(self) -> None:
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if not self.relations:
            raise ValueError("relation set must be non-empty")
        unknown = [r for r in self.relations if r not in ALL_RELATIONS]
        if unknown:
            raise ValueError(f"unknown relations: {', '.join(unknown)}")
        if self.precision not in ("double", "extended"):
            raise ValueError("precision must be 'double' or 'extended'")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")


class CommandError(Exception):
    def __init__(self, code: int, message: str) -> None:
        super().__init__(message)
        self.code = code


def _default_workers() -> int:
    value = os.environ.get("KWCELL_WORKERS", "1")
    try:
        return max(1, int(value))
    except ValueError:
        return 1


def _config(args: argparse.Namespace, default_relations: Sequence[str] = RELATIONS) -> Config:
    relations = tuple(r.strip() for r in args.relations.split(",") if r.strip()) if args.relations else tuple(default_relations)
    try:
        config = Config(args.tol, relations, args.precision, args.workers)
    except ValueError as exc:
        raise CommandError(EXIT_PARSE, str(exc)) from None
    if config.precision == "extended":
        raise CommandError(EXIT_PRECONDITION, "extended precision is not available: the linear algebra backend is double precision only")
    return config


def _load(args: argparse.Namespace) -> CellSystem:
    try:
        graph = io.read_graph(args.graph)
        doc = io.read_cells(args.cells)
    except io.ParseError as exc:
        raise CommandError(EXIT_PARSE, f"parse error: {exc}") from None
    except OSError as exc:
        raise CommandError(EXIT_PARSE, f"cannot read input: {exc}") from None
    params = doc.params if args.omega is None else doc.params.with_omega(args.omega)
    try:
        return io.build_cells(graph, doc, params)
    except io.SupportError as exc:
        raise CommandError(EXIT_SUPPORT, f"support mismatch: {exc}") from None
    except ValueError as exc:
        raise CommandError(EXIT_PRECONDITION, str(exc)) from None


def _emit(lines: list[str], report: str | None) -> None:
    text = "\n".join(lines) + "\n"
    sys.stdout.write(text)
    if report:
        Path(report).write_text(text)


def _report_lines(cells: CellSystem, config: Config) -> tuple[list[str], bool]:
    core = [r for r in config.relations if r in RELATIONS]
    if cells.b_cells is None and any(r not in U_RELATIONS for r in core):
        raise CommandError(EXIT_PRECONDITION, "B relations requested but the cells file has no B entries")
    report = verify(cells, core, config.tolerance, config.workers)
    results = list(report.results)
    trace = [r for r in config.relations if r in ("TrU1", "TrU1U2")]
    if trace:
        g2 = solver.fusion_matrix(cells, 2).rounded
        g3 = solver.fusion_matrix(cells, 3).rounded if "TrU1U2" in trace else None
        results += [r for r in residual_trace_constraints(cells, g2, g3, config.tolerance) if r.name in trace]
    report.results = results
    return report.lines(), report.passed


# -- commands ------------------------------------------------------------------------


def cmd_verify(args: argparse.Namespace) -> int:
    config = _config(args)
    cells = _load(args)
    lines, passed = _report_lines(cells, config)
    _emit(lines + [f"result\t{'PASS' if passed else 'FAIL'}"], args.report)
    return EXIT_PASS if passed else EXIT_FAIL


def cmd_solve_b(args: argparse.Namespace) -> int:
    config = _config(args, U_RELATIONS)
    cells = _load(args).with_b(None)
    pre = verify(cells, U_RELATIONS, config.tolerance, config.workers)
    if not pre.passed:
        _emit(pre.lines() + ["result\tU cells fail the precondition"], args.report)
        return EXIT_PRECONDITION
    try:
        result = solver.solve_b_cells(cells, check_u=False)
    except solver.NoSolutionError as exc:
        _emit([f"dimension\t0", f"result\t{exc}"], args.report)
        return EXIT_FAIL
    lines = [f"dimension\t{result.dimension}", f"gauge\t{result.gauge_note}"]
    if result.representative is None:
        _emit(lines + ["result\tno representative written"], args.report)
        return EXIT_PASS
    merged = cells.with_b(result.representative)
    io.write_cells(merged, args.out)
    check = verify(merged, ("RI", "BA", "N"), max(config.tolerance, 1e-8))
    _emit(lines + check.lines() + [f"written\t{args.out}"], args.report)
    return EXIT_PASS if check.passed else EXIT_FAIL


def cmd_gen_family(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    config = _config(args)
    builder = FAMILIES[args.family]
    omega = args.omega or 0
    try:
        cells = builder(args.k, Params(4, args.k, omega))
    except ValueError as exc:
        parser.error(f"{args.family} {args.k}: {exc}")
    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)
    io.write_graph(cells.graph, out / "graph.txt")
    io.write_cells(cells, out / "cells.txt")
    core = [r for r in config.relations if r in RELATIONS]
    if cells.b_cells is None:
        core = [r for r in core if r in U_RELATIONS]
    report = verify(cells, core, config.tolerance, config.workers)
    lines = [f"family\t{args.family}", f"k\t{args.k}", f"vertices\t{len(cells.graph.vertices)}", f"edges\t{len(cells.graph.edges)}"]
    lines += report.lines() + [f"result\t{'PASS' if report.passed else 'FAIL'}"]
    (out / "report.txt").write_text("\n".join(lines) + "\n")
    sys.stdout.write("\n".join(lines) + "\n")
    return EXIT_PASS if report.passed else EXIT_FAIL


def _partition(text: str) -> list[int]:
    try:
        parts = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError("partition must be comma-separated integers") from None
    if not parts or any(p <= 0 for p in parts):
        raise argparse.ArgumentTypeError("partition parts must be positive")
    return parts


def cmd_fusion(args: argparse.Namespace) -> int:
    _config(args)
    cells = _load(args)
    try:
        if len(args.partition) == 1:
            fm = solver.fusion_matrix(cells, args.partition[0])
        else:
            fm = solver.fusion_matrix_partition(cells, args.partition)
    except (ValueError, ZeroDivisionError) as exc:
        raise CommandError(EXIT_PRECONDITION, str(exc)) from None
    labels = [cells.graph.label(v) for v in cells.graph.vertices]
    lines = [f"partition\t{','.join(map(str, args.partition))}"]
    lines += io.matrix_lines(fm.rounded, labels)
    lines.append(f"max rounding delta\t{fm.max_deviation:.3e}")
    flagged = fm.max_deviation > 1e-4 or not fm.nonnegative
    if flagged:
        lines.append("warning\tentries are not all near nonnegative integers")
    _emit(lines, args.report)
    return EXIT_FAIL if flagged else EXIT_PASS


def cmd_braid(args: argparse.Namespace) -> int:
    config = _config(args)
    cells = _load(args)
    if args.strands < 2:
        raise CommandError(EXIT_PARSE, "need at least two strands")
    res = solver.braid_residuals(cells, args.strands)
    q = cells.params.q
    space, ys = solver.braid_generators(cells, args.strands, under=args.under)
    allowed = (-1.0, q**-2) if not args.under else (-1.0, q**2)
    spectrum = max((solver.spectrum_distance(y[key], allowed) for y in ys for key in space.blocks), default=0.0)
    tol = max(config.tolerance, 1e-8)
    lines = [f"strands\t{args.strands}", f"generator\t{'q U - 1' if args.under else 'q^-1 U - 1'}"]
    lines += [f"{name}\t{value:.3e}" for name, value in res.items()]
    lines.append(f"spectrum distance to {{-1, q^{'+2' if args.under else '-2'}}}\t{spectrum:.3e}")
    passed = all(v <= tol for v in res.values()) and spectrum <= 1e-6
    _emit(lines + [f"result\t{'PASS' if passed else 'FAIL'}"], args.report)
    return EXIT_PASS if passed else EXIT_FAIL


def cmd_export_eqs(args: argparse.Namespace) -> int:
    try:
        graph = io.read_graph(args.graph)
        params = Params(args.N, args.k, args.omega or 0)
    except io.ParseError as exc:
        raise CommandError(EXIT_PARSE, f"parse error: {exc}") from None
    except ValueError as exc:
        raise CommandError(EXIT_PARSE, str(exc)) from None
    try:
        fp = fp_eigenvector(graph)
    except (ValueError, RuntimeError) as exc:
        raise CommandError(EXIT_PRECONDITION, str(exc)) from None
    relations = tuple(r.strip() for r in args.relations.split(",")) if args.relations else RELATIONS
    text = "\n".join([f"# {io.dump_params(params)}", *equations(graph, params, fp, relations)]) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_PASS


# -- parser --------------------------------------------------------------------------


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tol", type=float, default=1e-9, help="residual tolerance (default 1e-9)")
    p.add_argument("--omega", type=int, default=None, help="omega index overriding the file's params")
    p.add_argument("--relations", default=None, help="comma-separated subset of " + ",".join(ALL_RELATIONS))
    p.add_argument("--workers", type=int, default=_default_workers(), help="worker threads (default $KWCELL_WORKERS or 1)")
    p.add_argument("--precision", choices=("double", "extended"), default="double")
    p.add_argument("--report", default=None, help="also write the report to this file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kwcell", description="Kazhdan-Wenzl cell system toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="evaluate relation residuals")
    p.add_argument("graph")
    p.add_argument("cells")
    _common(p)

    p = sub.add_parser("solve-b", help="solve the linear B-cell system")
    p.add_argument("graph")
    p.add_argument("cells", help="cells file (B entries, if any, are ignored)")
    p.add_argument("--out", required=True, help="merged cells file to write")
    _common(p)

    p = sub.add_parser("gen-family", help="write a closed-form family")
    p.add_argument("family", choices=sorted(FAMILIES))
    p.add_argument("k", type=int)
    p.add_argument("outdir")
    _common(p)

    p = sub.add_parser("fusion", help="fusion matrix of a fundamental object or partition")
    p.add_argument("graph")
    p.add_argument("cells")
    p.add_argument("--partition", type=_partition, default=[2], help="single integer i for Lambda_i, or a partition like 2,1")
    _common(p)

    p = sub.add_parser("braid", help="check the braid representation on path spaces")
    p.add_argument("graph")
    p.add_argument("cells")
    p.add_argument("--strands", type=int, default=3)
    p.add_argument("--under", action="store_true", help="use the inverse generator q U - 1")
    _common(p)

    p = sub.add_parser("export-eqs", help="write the polynomial system for a graph")
    p.add_argument("graph")
    p.add_argument("--N", type=int, default=4)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--out", default=None)
    _common(p)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    np.seterr(all="ignore")
    try:
        if args.command == "verify":
            return cmd_verify(args)
        if args.command == "solve-b":
            return cmd_solve_b(args)
        if args.command == "gen-family":
            return cmd_gen_family(args, parser)
        if args.command == "fusion":
            return cmd_fusion(args)
        if args.command == "braid":
            return cmd_braid(args)
        return cmd_export_eqs(args)
    except CommandError as exc:
        sys.stderr.write(f"kwcell: {exc}\n")
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
