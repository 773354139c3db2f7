import argparse
import logging
import sys
from typing import List, Optional

from dotenv import load_dotenv

from app.data.io import read_graph, serialize_edge_list, to_dot, to_json, to_json_lines, write_text
from app.services.bounds_service import BoundParams, BoundsService
from app.services.matching_service import MatchingService
from app.services.star_service import StarService
from app.services.transform_service import TransformService
from app.services.verifier_service import VerifierService
from app.utils.config import Settings, configure_logging
from app.utils.errors import GraphToolkitError

logger = logging.getLogger(__name__)

FORMATS = ("text", "json", "dot")


class Toolkit:
    """Services wired to one Settings instance."""

    def __init__(self, settings: Settings):
        self.settings = settings
        self.matching = MatchingService(settings)
        self.star = StarService(settings, self.matching)
        self.bounds = BoundsService(settings, self.matching, self.star)
        self.transform = TransformService(settings, self.matching, self.star)
        self.verifier = VerifierService(settings, self.matching, self.star, self.bounds)


def _emit_graph(args, graph, comment: str, matching=None) -> None:
    if args.format == "dot":
        write_text(args.out, to_dot(graph, highlight=matching))
    else:
        write_text(args.out, serialize_edge_list(graph, comment=comment))


def cmd_bound(toolkit: Toolkit, args) -> int:
    params = BoundParams(args.d, args.m)
    result = toolkit.bounds.e_bound(params)
    unique = toolkit.bounds.is_extremal_unique(params)
    if args.format == "json":
        payload = result.to_dict()
        payload["unique"] = unique
        sys.stdout.write(to_json(payload))
    else:
        sys.stdout.write(
            f"e({params.d},{params.m}) = {result.value}\n"
            f"t = {result.profile.t}\n"
            f"|J| = {result.profile.J_size}\n"
            f"unique = {str(unique).lower()}\n"
            f"trivial bound = {result.trivial}\n"
        )
    return 0


def cmd_construct(toolkit: Toolkit, args) -> int:
    params = BoundParams(args.d, args.m)
    graph = toolkit.bounds.construct_extremal(params)
    report = toolkit.verifier.is_member_F(graph, params.d, params.m)
    alternate = toolkit.bounds.alternate_extremal(params)
    comment = f"extremal graph for d={params.d}, m={params.m}: {graph.edge_count} edges"
    if args.format == "json":
        payload = {
            "n": graph.n,
            "edges": [e.as_list() for e in graph.edges],
            "edge_count": graph.edge_count,
            "membership": report.to_dict(),
            "unique": alternate is None,
            "alternate": None if alternate is None else [e.as_list() for e in alternate.edges],
        }
        write_text(args.out, to_json(payload))
    else:
        _emit_graph(args, graph, comment)
    stream = sys.stdout if args.out not in (None, "-") else sys.stderr
    stream.write(f"|E| = {graph.edge_count}\n{report.describe()}\n")
    if alternate is None:
        stream.write("unique = true\n")
    else:
        stream.write("unique = false\nalternate = " + " ".join(str(e) for e in alternate.edges) + "\n")
    return 0


def cmd_analyze(toolkit: Toolkit, args) -> int:
    graph = read_graph(args.path)
    matching = toolkit.matching.maximum_matching(graph)
    stars = toolkit.star.star_set(graph, matching)
    unsaturated = [v for v in range(graph.n) if not matching.is_saturated(v)]
    components = []
    for members in graph.components():
        sub, _ = graph.induced_subgraph(members)
        components.append(
            {
                "vertices": sorted(members),
                "factor_critical": toolkit.star.is_factor_critical(sub),
                "nu": toolkit.matching.nu(sub),
            }
        )
    if args.format == "dot":
        write_text(args.out, to_dot(graph, highlight=matching))
        return 0
    if args.format == "json":
        payload = {
            "n": graph.n,
            "edge_count": graph.edge_count,
            "delta": graph.max_degree(),
            "nu": len(matching),
            "matching": [e.as_list() for e in matching.sorted_edges()],
            "star": sorted(stars.vertices),
            "unsaturated": unsaturated,
            "components": components,
        }
        write_text(args.out, to_json(payload))
        return 0
    lines = [
        f"n = {graph.n}",
        f"|E| = {graph.edge_count}",
        f"Δ = {graph.max_degree()}",
        f"ν = {len(matching)}",
        "M = " + " ".join(str(e) for e in matching.sorted_edges()),
        "Star = {" + ", ".join(str(v) for v in sorted(stars.vertices)) + "}",
        "unsaturated = {" + ", ".join(str(v) for v in unsaturated) + "}",
    ]
    for component in components:
        flag = "factor-critical" if component["factor_critical"] else "not factor-critical"
        lines.append(f"component {component['vertices']}: ν = {component['nu']}, {flag}")
    write_text(args.out, "\n".join(lines) + "\n")
    return 0


def cmd_transform(toolkit: Toolkit, args) -> int:
    graph = read_graph(args.path)
    result = toolkit.transform.transform(graph, args.d, args.m)
    if args.steps:
        write_text(args.steps, to_json_lines(step.to_dict() for step in result.steps))
    if args.out:
        _emit_graph(args, result.final, f"transform fixpoint after {result.iterations} steps", result.matching)
    # the summary moves to stderr when the graph itself goes to stdout
    stream = sys.stderr if args.out == "-" else sys.stdout
    if args.format == "json":
        summary = {
            "steps": result.iterations,
            "edge_count": result.final.edge_count,
            "nu": len(result.matching),
            "decomposition": result.decomposition.to_dict(),
        }
        stream.write(to_json(summary))
    else:
        stream.write(
            f"steps = {result.iterations}\n"
            f"|E| = {result.final.edge_count}\n"
            f"t = {result.decomposition.t}\n"
            f"r = {result.decomposition.r_values}\n"
        )
    return 0


def cmd_verify(toolkit: Toolkit, args) -> int:
    report = toolkit.verifier.verify_bound(args.d, args.m, n_max=args.nmax, jobs=args.jobs)
    if args.format == "json":
        write_text(args.out, to_json(report.to_dict()))
    else:
        lines = [
            f"regime = {report.regime}",
            f"formula = {report.formula_value}",
            f"search = {report.search_value}",
            f"n_max = {report.n_max_searched}",
        ]
        if report.variant_count is not None:
            lines.append(f"variants = {report.variant_count}")
        if report.seeds:
            lines.append(f"seeds = {len(report.seeds)}")
        lines.append("ok" if report.ok else f"violation: {report.violation}")
        write_text(args.out, "\n".join(lines) + "\n")
    # a violation contradicts the bound itself
    return 0 if report.ok else 5


def cmd_random(toolkit: Toolkit, args) -> int:
    graph = toolkit.verifier.random_maximal_graph(args.d, args.m, args.n, args.seed)
    report = toolkit.verifier.is_member_F(graph, args.d, args.m)
    if args.format == "json":
        payload = {"n": graph.n, "edges": [e.as_list() for e in graph.edges], "membership": report.to_dict()}
        write_text(args.out, to_json(payload))
    else:
        _emit_graph(args, graph, f"random member of F({args.d},{args.m}), seed {args.seed}")
    sys.stderr.write(report.describe() + "\n")
    return 0


def cmd_table(toolkit: Toolkit, args) -> int:
    df = toolkit.bounds.bound_table(range(args.d_min, args.d_max + 1), range(args.m_min, args.m_max + 1))
    if args.format == "json":
        write_text(args.out, df.to_json(orient="records") + "\n")
    else:
        write_text(args.out, df.to_csv(index=False))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="app", description="Degree- and matching-capped extremal graphs")
    parser.add_argument("--verbose", action="store_true", help="debug logging on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, formats=FORMATS):
        p.add_argument("--format", choices=formats, default="text")
        p.add_argument("--out", default=None, help="output file, '-' for stdout")

    p = sub.add_parser("bound", help="closed-form e(d, m)")
    p.add_argument("d", type=int)
    p.add_argument("m", type=int)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(handler=cmd_bound)

    p = sub.add_parser("construct", help="extremal graph")
    p.add_argument("d", type=int)
    p.add_argument("m", type=int)
    common(p)
    p.set_defaults(handler=cmd_construct)

    p = sub.add_parser("analyze", help="matching and star structure of a graph")
    p.add_argument("path", help="edge-list file, '-' for stdin")
    common(p)
    p.set_defaults(handler=cmd_analyze)

    p = sub.add_parser("transform", help="rewrite a member of F(d, m) to claws and factor-critical blocks")
    p.add_argument("path", help="edge-list file, '-' for stdin")
    p.add_argument("d", type=int)
    p.add_argument("m", type=int)
    p.add_argument("--steps", default=None, help="JSON-lines step log")
    common(p)
    p.set_defaults(handler=cmd_transform)

    p = sub.add_parser("verify", help="check e(d, m) by search or sampling")
    p.add_argument("d", type=int)
    p.add_argument("m", type=int)
    p.add_argument("--nmax", type=int, default=None)
    p.add_argument("--jobs", type=int, default=None)
    common(p, formats=("text", "json"))
    p.set_defaults(handler=cmd_verify)

    p = sub.add_parser("random", help="random maximal member of F(d, m)")
    p.add_argument("d", type=int)
    p.add_argument("m", type=int)
    p.add_argument("n", type=int)
    p.add_argument("--seed", type=int, default=1)
    common(p)
    p.set_defaults(handler=cmd_random)

    p = sub.add_parser("table", help="bound values over a (d, m) grid")
    p.add_argument("--d-min", type=int, default=2)
    p.add_argument("--d-max", type=int, default=8)
    p.add_argument("--m-min", type=int, default=2)
    p.add_argument("--m-max", type=int, default=8)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", default=None)
    p.set_defaults(handler=cmd_table)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    load_dotenv()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        settings = Settings.from_env()
        configure_logging("DEBUG" if args.verbose else settings.log_level, stream=sys.stderr)
        return args.handler(Toolkit(settings), args)
    except GraphToolkitError as e:
        logger.error(f"Error running {args.command}: {str(e)}")
        sys.stderr.write(f"error: {e}\n")
        if e.details is not None and hasattr(e.details, "describe"):
            sys.stderr.write(e.details.describe() + "\n")
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
