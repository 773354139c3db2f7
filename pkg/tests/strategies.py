import random
from typing import Iterator, List, Tuple

import networkx as nx
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from app.data.graph import Graph

PROPERTY_SETTINGS = settings(
    max_examples=60,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture],
)


@st.composite
def graphs(draw, min_n: int = 0, max_n: int = 8, max_edges: int = 24) -> Graph:
    n = draw(st.integers(min_value=min_n, max_value=max_n))
    pairs: List[Tuple[int, int]] = [(a, b) for a in range(n) for b in range(a + 1, n)]
    if not pairs:
        return Graph.empty(n)
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True, max_size=max_edges))
    return Graph.from_edges(n, chosen)


@st.composite
def connected_graphs(draw, min_n: int = 1, max_n: int = 7) -> Graph:
    """Random spanning tree plus extra edges."""
    n = draw(st.integers(min_value=min_n, max_value=max_n))
    edges = set()
    for v in range(1, n):
        parent = draw(st.integers(min_value=0, max_value=v - 1))
        edges.add((parent, v))
    pairs = [(a, b) for a in range(n) for b in range(a + 1, n) if (a, b) not in edges]
    if pairs:
        edges.update(draw(st.lists(st.sampled_from(pairs), unique=True, max_size=8)))
    return Graph.from_edges(n, edges)


@st.composite
def relabelings(draw, graph: Graph) -> Graph:
    perm = draw(st.permutations(list(range(graph.n))))
    return graph.relabeled(perm)


def to_networkx(graph: Graph) -> nx.Graph:
    g = nx.Graph()
    g.add_nodes_from(range(graph.n))
    g.add_edges_from((e.u, e.v) for e in graph.edges)
    return g


def nx_nu(graph: Graph) -> int:
    return len(nx.max_weight_matching(to_networkx(graph), maxcardinality=True))


def all_labeled_graphs(n: int) -> Iterator[Graph]:
    """Every labeled graph on n vertices, one per edge subset."""
    pairs = [(a, b) for a in range(n) for b in range(a + 1, n)]
    for mask in range(1 << len(pairs)):
        yield Graph.from_edges(n, [p for i, p in enumerate(pairs) if mask >> i & 1])


def seeded_graphs(count: int, max_n: int, seed: int) -> Iterator[Graph]:
    """G(n, p) graphs with random n and p, reproducible from the seed."""
    rng = random.Random(seed)
    for _ in range(count):
        n = rng.randint(0, max_n)
        p = rng.random()
        yield Graph.from_edges(n, [(a, b) for a in range(n) for b in range(a + 1, n) if rng.random() < p])
