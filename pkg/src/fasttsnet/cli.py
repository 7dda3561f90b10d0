"""``fasttsnet`` command line: layout, metrics and bench subcommands."""

from __future__ import annotations

import argparse
import logging
import sys
import warnings

from . import bench, layout_io
from .fixtures import generate, parse_uri
from .gradients import PRESETS
from .graph import Graph, GraphParseError, is_connected, largest_component, read_edge_list
from .metrics import evaluate
from .optimizer import LayoutConfig, NumericalError, run

EXIT_PARSE = 1
EXIT_EMPTY = 2
EXIT_NUMERICAL = 3

log = logging.getLogger("fasttsnet")


class EmptyGraphError(ValueError):
    pass


def load_graph(source: str, seed: int = 0) -> Graph:
    """Read an edge-list path or a ``gen:`` URI, keeping the largest component."""
    if source.startswith("gen:"):
        try:
            g = generate(parse_uri(source, seed))
        except ValueError as exc:
            raise GraphParseError(str(exc)) from None
    else:
        try:
            g = read_edge_list(source)
        except OSError as exc:
            raise GraphParseError(f"cannot read {source}: {exc}") from None
    if not is_connected(g):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            g = largest_component(g)
        log.warning("graph is disconnected; using its largest component (%d vertices)", g.n)
    if g.n < 2:
        raise EmptyGraphError("graph has fewer than two vertices after reduction")
    return g


def cmd_layout(args) -> int:
    try:
        g = load_graph(args.graph, args.seed)
    except GraphParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except EmptyGraphError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_EMPTY
    try:
        cfg = LayoutConfig(preset=args.algo, iterations=args.iterations, perplexity=args.perplexity,
                           theta=args.theta, epsilon=args.epsilon, seed=args.seed)
        res = run(g, cfg)
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    text = layout_io.format_layout(res.positions)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if args.svg:
        layout_io.write_svg(args.svg, g, res.positions)
    if args.trace:
        layout_io.write_trace(args.trace, res.trace)
    return 0


def cmd_metrics(args) -> int:
    try:
        g = load_graph(args.graph)
        X = layout_io.read_layout(args.layout)
    except (GraphParseError, layout_io.LayoutFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except EmptyGraphError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_EMPTY
    if len(X) != g.n:
        print(f"error: layout has {len(X)} vertices, graph has {g.n}", file=sys.stderr)
        return 1
    print(evaluate(g, X, args.r).to_json())
    return 0


def _split(text: str) -> list:
    return [t.strip() for t in text.split(",") if t.strip()]


def cmd_bench(args) -> int:
    algos = _split(args.algos)
    unknown = [a for a in algos if a not in PRESETS]
    if unknown:
        print(f"error: unknown algos {unknown}", file=sys.stderr)
        return 1
    seeds = [int(s) for s in _split(args.seeds)] or [0]
    sources = bench.file_sources(args.graphs)
    base = LayoutConfig(iterations=args.iterations, perplexity=args.perplexity)
    rows, failed = bench.run_sweep(sources, algos, seeds, base, metrics=not args.no_metrics)
    bench.write_csv(args.out, rows)
    for algo, slope in bench.slopes_by_algo(rows).items():
        print(f"slope {algo} {slope:.4f}")
    return 1 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fasttsnet", description="Fast tsNET graph layouts")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    lay = sub.add_parser("layout", help="compute a layout")
    lay.add_argument("--graph", required=True, help="edge-list path or gen: URI")
    lay.add_argument("--algo", choices=sorted(PRESETS), default="linear")
    lay.add_argument("--perplexity", type=float, default=40.0)
    lay.add_argument("--iterations", type=int, default=500)
    lay.add_argument("--theta", type=float, default=0.5)
    lay.add_argument("--epsilon", type=float, default=0.05)
    lay.add_argument("--seed", type=int, default=0)
    lay.add_argument("--out")
    lay.add_argument("--svg")
    lay.add_argument("--trace")
    lay.set_defaults(func=cmd_layout)

    met = sub.add_parser("metrics", help="score a layout")
    met.add_argument("--graph", required=True)
    met.add_argument("--layout", required=True)
    met.add_argument("--r", type=int, default=2)
    met.set_defaults(func=cmd_metrics)

    ben = sub.add_parser("bench", help="benchmark a directory of graphs")
    ben.add_argument("--graphs", required=True)
    ben.add_argument("--algos", default="exact,bh,fit,linear")
    ben.add_argument("--seeds", default="0")
    ben.add_argument("--out", required=True)
    ben.add_argument("--iterations", type=int, default=500)
    ben.add_argument("--perplexity", type=float, default=40.0)
    ben.add_argument("--no-metrics", action="store_true")
    ben.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
