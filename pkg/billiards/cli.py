"""
Command line front end.

    billiards [--table FILE] [--backend exact|float] [--json PATH] [--svg PATH] COMMAND ...

Exit codes: 0 success, 2 usage or malformed direction, 3 unreadable or invalid
table file, 4 numeric failure, 5 start position or direction outside the table.
"""
import argparse
import json
import logging
import math
import sys
from fractions import Fraction
from pathlib import Path
from typing import List, Optional, Sequence

from pydantic import BaseModel, ValidationError

from billiards.errors import (
    BilliardError,
    DirectionSyntaxError,
    PhasePointError,
    PolygonError,
    TableFileError,
)
from billiards.models import (
    Cylinder,
    GeneralizedDiagonal,
    LShapeReport,
    PhasePoint,
    RunConfig,
    UnfoldReport,
)
from billiards.modules import periodic, render, stats
from billiards.modules.flow import trace
from billiards.modules.geomcore import Direction, Point, Segment
from billiards.modules.polygon import Polygon, build_polygon, parse_coordinate, read_table, write_table
from billiards.modules.unfolding import (
    collinearity_residual,
    diagonal_links,
    enumerate_generalized_diagonals,
    fold,
    unfolded_hits,
)
from billiards.settings import settings_context

logger = logging.getLogger("billiards")

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_NUMERIC, EXIT_POSITION = 0, 2, 3, 4, 5

UNIT_SQUARE = [(0, 0), (1, 0), (1, 1), (0, 1)]

# multiples of π/4 with an exact integer direction
_EIGHTHS = [(1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1)]


def parse_direction(text: str, backend: str) -> Direction:
    """`dx:dy`, `p/q pi`, or (float backend only) a raw angle in radians."""
    raw = text.strip()
    try:
        if ":" in raw:
            dx, dy = (parse_coordinate(tok.strip(), backend) for tok in raw.split(":"))
            if dx == 0 and dy == 0:
                raise DirectionSyntaxError("direction must be nonzero")
            return Direction(dx, dy)
        if raw.endswith("pi"):
            turns = Fraction(raw[:-2].strip() or "1")
            if backend == "exact":
                quarters = turns * 4
                if quarters.denominator != 1:
                    raise DirectionSyntaxError(f"{raw!r} has no exact direction; use --backend float")
                dx, dy = _EIGHTHS[quarters.numerator % 8]
                return Direction(Fraction(dx), Fraction(dy))
            return Direction.from_angle(float(turns) * math.pi)
        if backend == "float":
            return Direction.from_angle(float(raw))
    except (ValueError, ZeroDivisionError, BilliardError) as exc:
        if isinstance(exc, DirectionSyntaxError):
            raise
        raise DirectionSyntaxError(f"cannot read direction {text!r}") from exc
    raise DirectionSyntaxError(f"cannot read direction {text!r}; expected dx:dy or p/q pi")


def parse_point(text: str, backend: str) -> Point:
    try:
        x, y = (parse_coordinate(tok.strip(), backend) for tok in text.split(","))
    except (ValueError, BilliardError) as exc:
        raise DirectionSyntaxError(f"cannot read position {text!r}; expected x,y") from exc
    return Point(x, y)


def _window(text: Optional[str]):
    if text is None:
        return None
    try:
        theta, delta = (float(tok) for tok in text.split(","))
    except ValueError as exc:
        raise DirectionSyntaxError(f"cannot read window {text!r}; expected theta,delta") from exc
    return theta, delta


def _epsilon(text: str) -> Fraction:
    try:
        eps = Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise DirectionSyntaxError(f"cannot read epsilon {text!r}") from exc
    if eps <= 0:
        raise DirectionSyntaxError("epsilon must be positive")
    return eps


def _load_table(config: RunConfig) -> Polygon:
    if config.polygon_path is None:
        return build_polygon(UNIT_SQUARE, backend=config.backend)
    return read_table(config.polygon_path, backend=config.backend)


def _emit(config: RunConfig, payload) -> None:
    if config.json_path is None:
        return
    if isinstance(payload, BaseModel):
        text = payload.model_dump_json(indent=2)
    else:
        text = json.dumps([item.model_dump(mode="json") for item in payload], indent=2)
    if str(config.json_path) == "-":
        print(text)
    else:
        Path(config.json_path).write_text(text + "\n", encoding="utf-8")


def _start(args, config: RunConfig) -> PhasePoint:
    return PhasePoint(q=parse_point(args.pos, config.backend), v=parse_direction(args.dir, config.backend))


def cmd_simulate(config: RunConfig, args) -> int:
    table = _load_table(config)
    start = _start(args, config)
    orbit = trace(table, start, args.links)
    for a, b in orbit.links:
        print(f"{a} -> {b}")
    for i, event in enumerate(orbit.events):
        if event.singular:
            print(f"singular event {i} at vertex {event.vertex_index} {event.hit}")
    if orbit.periodic is not None:
        print(f"periodic, {orbit.periodic.period_links} links, length {orbit.periodic.period_length:.6f}")
    else:
        print(f"not periodic within {len(orbit.events)} links, length {orbit.geometric_length:.6f}")
    _emit(config, orbit)
    if config.svg is not None:
        render.render_orbit(table, orbit, config.svg)
    return EXIT_OK


def cmd_unfold(config: RunConfig, args) -> int:
    table = _load_table(config)
    start = _start(args, config)
    corridor, points = unfolded_hits(table, start, args.n)
    segment = Segment(points[0], points[-1])
    residual = collinearity_residual(points)
    print(f"{len(corridor.copies)} copies, word {list(corridor.word)}, collinearity residual {residual:g}")
    _emit(config, UnfoldReport(corridor=corridor, segment=segment, links=tuple(fold(table, corridor, segment)), residual=residual))
    if config.svg is not None:
        render.render_unfolding(table, corridor, segment, config.svg)
    return EXIT_OK


def format_diagonal(d: GeneralizedDiagonal) -> str:
    word = ",".join(str(s) for s in d.word) or "-"
    return f"{d.link_count} {word} {d.direction.dx}:{d.direction.dy} {d.start_vertex}"


def cmd_diagonals(config: RunConfig, args) -> int:
    table = _load_table(config)
    diagonals = enumerate_generalized_diagonals(table, args.max_links)
    for d in diagonals:
        print(format_diagonal(d))
    _emit(config, diagonals)
    if config.svg is not None:
        render.render_segments(table, [link for d in diagonals for link in diagonal_links(table, d)], config.svg)
    return EXIT_OK


def cmd_periodic(config: RunConfig, args) -> int:
    table = _load_table(config)
    cylinders: List[Cylinder] = periodic.word_search(table, args.max_word, _window(args.window), args.budget)
    for c in cylinders:
        print(
            f"word {list(c.word)} direction {c.direction.dx}:{c.direction.dy} width {c.width:.6f} "
            f"links {c.period_links} length {c.period_length:.6f}"
        )
    _emit(config, cylinders)
    return EXIT_OK


def cmd_perp(config: RunConfig, args) -> int:
    table = _load_table(config)
    result = periodic.perp_scan(table, args.side, args.max_links, args.samples)
    print(
        f"side {result.side_index}: {result.periodic_samples} periodic, {result.singular_samples} singular, "
        f"{result.undecided_samples} undecided; singular feet {[str(f) for f in result.singular_feet]}"
    )
    _emit(config, result)
    return EXIT_OK


def cmd_exceptional(config: RunConfig, args) -> int:
    table = _load_table(config)
    report = periodic.exceptional_set_report(table, args.max_links, samples=args.samples, seed=config.seed)
    uncovered = [s.point for s in report.samples if not s.covered]
    print(
        f"{len(report.segments)} exceptional segments; {len(report.samples) - len(uncovered)} of {len(report.samples)} "
        f"samples covered by a perpendicular orbit"
    )
    _emit(config, report)
    if config.svg is not None:
        render.render_segments(table, report.segments, config.svg, points=report.candidate_points or ())
    return EXIT_OK


def cmd_welldist(config: RunConfig, args) -> int:
    table = _load_table(config)
    orbit = trace(table, _start(args, config), args.links)
    report = stats.discrepancy(table, orbit, _epsilon(args.eps))
    print(f"well_distributed {str(report.well_distributed).lower()}, sup {report.sup_discrepancy:.6f}")
    _emit(config, report)
    return EXIT_OK


def cmd_density(config: RunConfig, args) -> int:
    table = _load_table(config)
    orbit = trace(table, _start(args, config), args.links)
    report = stats.epsilon_dense(table, orbit, _epsilon(args.eps), surface=args.surface)
    if report.dense:
        print(f"dense at epsilon {args.eps} (grid spacing {report.grid_spacing})")
    else:
        print(f"not dense: witness {report.uncovered_witness} at distance {report.witness_distance:.6f}")
    _emit(config, report)
    if config.svg is not None:
        render.render_orbit(table, orbit, config.svg)
    return EXIT_OK


def cmd_lshape(config: RunConfig, args) -> int:
    table, orbit = periodic.lshape_orbit(args.k)
    overlap = stats.open_region_length(orbit, periodic.RIGHT_SQUARE)
    report = LShapeReport(
        k=args.k,
        links=orbit.periodic.period_links,
        period_length=orbit.periodic.period_length,
        avoids_right_square=overlap == 0,
        orbit=orbit,
    )
    print(f"k={args.k}: {report.links} links, length {report.period_length:.6f}, avoids right square: {report.avoids_right_square}")
    _emit(config, report)
    if config.svg is not None:
        render.render_orbit(table, orbit, config.svg, highlight=[(1, 0), (2, 0), (2, 1), (1, 1)])
    return EXIT_OK


def cmd_scan(config: RunConfig, args) -> int:
    table = _load_table(config)
    report = stats.scan_A_set(table, args.theta, args.delta, _epsilon(args.eps), args.grid, args.budget, args.max_word)
    print(
        f"covered {len(report.covered)} of {report.sampled} points ({report.coverage_fraction:.3f}) "
        f"with {len(report.strips)} strips after {report.nodes_expanded} nodes"
    )
    _emit(config, report)
    return EXIT_OK


def cmd_write_table(config: RunConfig, args) -> int:
    table = _load_table(config)
    print(write_table(table, args.out))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="billiards", description="Billiards in rational polygons.")
    parser.add_argument("-t", "--table", type=Path, default=None, help="polygon file [default: unit square]")
    parser.add_argument("--backend", choices=["exact", "float"], default="exact")
    parser.add_argument("--tol", type=float, default=1e-9, help="float-backend tolerance")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--json", dest="json_path", type=Path, default=None, help="write the report as JSON ('-' for stdout)")
    parser.add_argument("--svg", type=Path, default=None)
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    def orbit_args(p, links_default):
        p.add_argument("--pos", required=True, help="x,y")
        p.add_argument("--dir", required=True, help="dx:dy or p/q pi")
        p.add_argument("--links", type=int, default=links_default)

    p = sub.add_parser("simulate", help="trace an orbit")
    orbit_args(p, 100)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("unfold", help="unfold the first n links")
    p.add_argument("--pos", required=True)
    p.add_argument("--dir", required=True)
    p.add_argument("-n", type=int, default=4)
    p.set_defaults(func=cmd_unfold)

    p = sub.add_parser("diagonals", help="enumerate generalized diagonals")
    p.add_argument("--max-links", type=int, default=3)
    p.set_defaults(func=cmd_diagonals)

    p = sub.add_parser("periodic", help="search translation words for cylinders")
    p.add_argument("--max-word", type=int, default=8)
    p.add_argument("--window", default=None, help="theta,delta in radians")
    p.add_argument("--budget", type=int, default=None)
    p.set_defaults(func=cmd_periodic)

    p = sub.add_parser("perp", help="scan perpendicular orbits from one side")
    p.add_argument("--side", type=int, default=0)
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--max-links", type=int, default=200)
    p.set_defaults(func=cmd_perp)

    p = sub.add_parser("exceptional", help="sides whose perpendicular orbits cover interior points")
    p.add_argument("--samples", type=int, default=0)
    p.add_argument("--max-links", type=int, default=8)
    p.set_defaults(func=cmd_exceptional)

    p = sub.add_parser("welldist", help="discrepancy of an orbit over the disk basis")
    orbit_args(p, 1000)
    p.add_argument("--eps", required=True)
    p.set_defaults(func=cmd_welldist)

    p = sub.add_parser("density", help="epsilon-density of an orbit")
    orbit_args(p, 1000)
    p.add_argument("--eps", required=True)
    p.add_argument("--surface", action="store_true")
    p.set_defaults(func=cmd_density)

    p = sub.add_parser("lshape", help="periodic orbit avoiding the right-hand square")
    p.add_argument("-k", type=int, default=1)
    p.set_defaults(func=cmd_lshape)

    p = sub.add_parser("scan", help="cover the table with well-distributed periodic strips")
    p.add_argument("--theta", type=float, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--eps", required=True)
    p.add_argument("--grid", type=int, default=10)
    p.add_argument("--budget", type=int, default=20000)
    p.add_argument("--max-word", type=int, default=24)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("write-table", help="write the loaded table in the polygon file format")
    p.add_argument("out", type=Path)
    p.set_defaults(func=cmd_write_table)
    return parser


def _fail(code: int, exc: Exception) -> int:
    print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
    return code


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=[logging.WARNING, logging.INFO, logging.DEBUG][min(args.verbose, 2)],
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        config = RunConfig(
            backend=args.backend,
            tolerance=args.tol,
            polygon_path=args.table,
            seed=args.seed,
            svg=args.svg,
            json_path=args.json_path,
        )
        with settings_context(tolerance=config.tolerance):
            return args.func(config, args)
    except (DirectionSyntaxError, ValidationError) as exc:
        return _fail(EXIT_USAGE, exc)
    except (TableFileError, PolygonError) as exc:
        return _fail(EXIT_INPUT, exc)
    except PhasePointError as exc:
        return _fail(EXIT_POSITION, exc)
    except (BilliardError, ArithmeticError) as exc:
        return _fail(EXIT_NUMERIC, exc)
    except (ValueError, IndexError) as exc:
        return _fail(EXIT_USAGE, exc)


if __name__ == "__main__":
    sys.exit(main())
