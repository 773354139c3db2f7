import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Set

from jinja2 import Environment, FileSystemLoader, StrictUndefined

from app.data.graph import Edge, Graph, Matching
from app.utils.errors import GraphIOError, GraphParseError

logger = logging.getLogger(__name__)

templates_dir = Path(__file__).parent.parent / "templates"
_environment = Environment(
    loader=FileSystemLoader(str(templates_dir)),
    undefined=StrictUndefined,
    autoescape=False,
)


def parse_edge_list(text: str) -> Graph:
    """
    Parse the edge-list format.

    The first non-comment line holds the vertex count n; every following
    non-comment line is "u v" with distinct ids below n. Lines starting with
    '#' and blank lines are ignored.

    Args:
        text (str): File contents

    Returns:
        Graph: The parsed graph
    """
    n: Optional[int] = None
    seen: Set[Edge] = set()
    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if n is None:
            if len(fields) != 1:
                raise GraphParseError(f"expected the vertex count, got {line!r}", line_number)
            try:
                n = int(fields[0])
            except ValueError:
                raise GraphParseError(f"vertex count is not an integer: {fields[0]!r}", line_number)
            if n < 0:
                raise GraphParseError(f"negative vertex count {n}", line_number)
            continue
        if len(fields) != 2:
            raise GraphParseError(f"expected 'u v', got {line!r}", line_number)
        try:
            a, b = int(fields[0]), int(fields[1])
        except ValueError:
            raise GraphParseError(f"vertex ids are not integers: {line!r}", line_number)
        if a < 0 or b < 0 or a >= n or b >= n:
            raise GraphParseError(f"vertex id out of range 0..{n - 1}: {line!r}", line_number)
        if a == b:
            raise GraphParseError(f"self-loop on vertex {a}", line_number)
        edge = Edge.of(a, b)
        if edge in seen:
            raise GraphParseError(f"duplicate edge {edge}", line_number)
        seen.add(edge)
    if n is None:
        raise GraphParseError("missing vertex count", 1)
    return Graph.from_edges(n, ((e.u, e.v) for e in seen))


def serialize_edge_list(graph: Graph, comment: Optional[str] = None) -> str:
    lines: List[str] = []
    if comment:
        lines.extend(f"# {part}" for part in comment.splitlines())
    lines.append(str(graph.n))
    lines.extend(f"{e.u} {e.v}" for e in graph.edges)
    return "\n".join(lines) + "\n"


def to_dot(graph: Graph, highlight: Optional[Matching] = None, name: str = "G") -> str:
    """
    Render a graph as undirected DOT source.

    Args:
        graph (Graph): Graph to render
        highlight (Optional[Matching]): Matching whose edges get the matched style
        name (str): DOT graph name

    Returns:
        str: DOT source
    """
    matched = highlight.edges if highlight is not None else frozenset()
    template = _environment.get_template("graph.dot.j2")
    rendered = template.render(
        name=name,
        vertices=range(graph.n),
        edges=[{"u": e.u, "v": e.v, "matched": e in matched} for e in graph.edges],
    )
    return rendered if rendered.endswith("\n") else rendered + "\n"


def _decode(raw: bytes, source: str) -> str:
    try:
        return raw.decode("utf-8")
    except UnicodeDecodeError as e:
        line_number = raw[: e.start].count(b"\n") + 1
        logger.error(f"Error decoding graph from {source}: {str(e)}")
        raise GraphParseError(f"{source} is not valid UTF-8 (byte 0x{raw[e.start]:02x})", line_number)


def read_graph(path: str) -> Graph:
    """Read a UTF-8 graph from a file, or from stdin when path is '-'."""
    try:
        if path == "-":
            stream = getattr(sys.stdin, "buffer", None)
            text = _decode(stream.read(), "stdin") if stream is not None else sys.stdin.read()
        else:
            text = _decode(Path(path).read_bytes(), path)
    except OSError as e:
        logger.error(f"Error reading graph file {path}: {str(e)}")
        raise GraphIOError(f"cannot read {path}: {e}")
    return parse_edge_list(text)


def write_text(path: Optional[str], text: str) -> None:
    """Write text to a file, or to stdout when path is None or '-'."""
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    try:
        filepath = Path(path)
        filepath.parent.mkdir(parents=True, exist_ok=True)
        filepath.write_text(text, encoding="utf-8")
        logger.info(f"Successfully saved {filepath}")
    except OSError as e:
        logger.error(f"Error saving data to file: {str(e)}")
        raise GraphIOError(f"cannot write {path}: {e}")


def to_json(payload: Any) -> str:
    return json.dumps(payload, sort_keys=True) + "\n"


def to_json_lines(records: Iterable[Dict[str, Any]]) -> str:
    return "".join(json.dumps(record, sort_keys=True) + "\n" for record in records)
