from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass
from typing import Iterator, List, Optional, Sequence, Tuple

from app.data.graph import Edge, Graph, Matching
from app.utils.config import Settings
from app.utils.errors import (
    ArgumentError,
    InternalInvariantError,
    PreconditionError,
    SizeLimitError,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AlternatingPath:
    """
    Simple path with a matching flag per edge.

    in_matching[i] describes the edge (vertices[i], vertices[i + 1]).
    """

    vertices: Tuple[int, ...]
    in_matching: Tuple[bool, ...]

    @classmethod
    def along(cls, matching: Matching, vertices: Sequence[int]) -> "AlternatingPath":
        """Path through the given vertices with flags read off the matching."""
        flags = tuple(
            Edge.of(a, b) in matching for a, b in zip(vertices, vertices[1:])
        )
        return cls(tuple(vertices), flags)

    @property
    def start(self) -> int:
        return self.vertices[0]

    @property
    def end(self) -> int:
        return self.vertices[-1]

    def __len__(self) -> int:
        """Number of edges."""
        return len(self.in_matching)

    def edges(self) -> List[Edge]:
        return [Edge.of(a, b) for a, b in zip(self.vertices, self.vertices[1:])]

    def reversed(self) -> "AlternatingPath":
        return type(self)(self.vertices[::-1], self.in_matching[::-1])

    def concat(self, other: "AlternatingPath") -> "AlternatingPath":
        """The ★ concatenation; the result has to be a path again."""
        if self.end != other.start:
            raise ArgumentError(f"Cannot concatenate: {self.end} != {other.start}")
        vertices = self.vertices + other.vertices[1:]
        if len(set(vertices)) != len(vertices):
            raise ArgumentError("Concatenation revisits a vertex; it is a walk, not a path")
        return AlternatingPath(vertices, self.in_matching + other.in_matching)

    def problems(self, graph: Graph, matching: Matching) -> List[str]:
        """Violations of the alternating-path invariants, empty when valid."""
        found: List[str] = []
        if not self.vertices:
            return ["path has no vertices"]
        if len(self.in_matching) != len(self.vertices) - 1:
            found.append("flag count differs from edge count")
            return found
        if len(set(self.vertices)) != len(self.vertices):
            found.append("vertices repeat")
        for (a, b), flag in zip(zip(self.vertices, self.vertices[1:]), self.in_matching):
            if not graph.has_edge(a, b):
                found.append(f"{a}-{b} is not an edge")
            elif (Edge.of(a, b) in matching) != flag:
                found.append(f"flag of {a}-{b} disagrees with the matching")
        for first, second in zip(self.in_matching, self.in_matching[1:]):
            if first == second:
                found.append("flags do not alternate")
                break
        return found


@dataclass(frozen=True)
class AugmentingPath(AlternatingPath):
    """Odd alternating path joining two unsaturated vertices."""

    def problems(self, graph: Graph, matching: Matching) -> List[str]:
        found = super().problems(graph, matching)
        if len(self) % 2 != 1:
            found.append("augmenting path must have an odd number of edges")
        if matching.is_saturated(self.start) or matching.is_saturated(self.end):
            found.append("augmenting path endpoints must be unsaturated")
        if self.in_matching and (self.in_matching[0] or self.in_matching[-1]):
            found.append("first and last edges must be non-matching")
        return found


def sorted_adjacency(graph: Graph) -> List[List[int]]:
    return [sorted(neighbors) for neighbors in graph.adjacency]


def _lca(base: List[int], mate: List[int], parent: List[int], a: int, b: int) -> int:
    seen = [False] * len(base)
    while True:
        a = base[a]
        seen[a] = True
        if mate[a] == -1:
            break
        a = parent[mate[a]]
    while True:
        b = base[b]
        if seen[b]:
            return b
        b = parent[mate[b]]


def _mark_blossom(
    base: List[int],
    mate: List[int],
    parent: List[int],
    in_blossom: List[bool],
    v: int,
    lca: int,
    child: int,
) -> None:
    while base[v] != lca:
        in_blossom[base[v]] = True
        in_blossom[base[mate[v]]] = True
        parent[v] = child
        child = mate[v]
        v = parent[mate[v]]


def _trace(parent: List[int], mate: List[int], end: int) -> List[int]:
    path = [end]
    v = end
    while True:
        even = parent[v]
        path.append(even)
        if mate[even] == -1:
            break
        v = mate[even]
        path.append(v)
    path.reverse()
    return path


def find_path_from(adj: Sequence[Sequence[int]], mate: List[int], root: int) -> Optional[List[int]]:
    """
    Edmonds' alternating-forest search with blossom shrinking from one exposed root.

    Neighbors are scanned in the order given, so sorted adjacency gives
    reproducible paths.

    Args:
        adj (Sequence[Sequence[int]]): Adjacency lists
        mate (List[int]): Current mates, -1 for unsaturated vertices
        root (int): Unsaturated start vertex

    Returns:
        Optional[List[int]]: Vertices of an augmenting path from root, or None
    """
    n = len(adj)
    even = [False] * n
    parent = [-1] * n
    base = list(range(n))
    even[root] = True
    queue = deque([root])
    while queue:
        v = queue.popleft()
        for to in adj[v]:
            if base[v] == base[to] or mate[v] == to:
                continue
            if to == root or (mate[to] != -1 and parent[mate[to]] != -1):
                lca = _lca(base, mate, parent, v, to)
                in_blossom = [False] * n
                _mark_blossom(base, mate, parent, in_blossom, v, lca, to)
                _mark_blossom(base, mate, parent, in_blossom, to, lca, v)
                for i in range(n):
                    if in_blossom[base[i]]:
                        base[i] = lca
                        if not even[i]:
                            even[i] = True
                            queue.append(i)
            elif parent[to] == -1:
                parent[to] = v
                if mate[to] == -1:
                    return _trace(parent, mate, to)
                even[mate[to]] = True
                queue.append(mate[to])
    return None


def flip_path(mate: List[int], path: Sequence[int]) -> None:
    """Augment the mate array in place along an augmenting path."""
    for i in range(0, len(path) - 1, 2):
        a, b = path[i], path[i + 1]
        mate[a] = b
        mate[b] = a


def greedy_mates(adj: Sequence[Sequence[int]]) -> List[int]:
    mate = [-1] * len(adj)
    for v, neighbors in enumerate(adj):
        if mate[v] != -1:
            continue
        for w in neighbors:
            if mate[w] == -1:
                mate[v] = w
                mate[w] = v
                break
    return mate


def maximum_mates(adj: Sequence[Sequence[int]], mate: Optional[List[int]] = None) -> List[int]:
    """Grow a mate array to a maximum matching; one pass over exposed roots suffices."""
    mate = greedy_mates(adj) if mate is None else list(mate)
    for root in range(len(adj)):
        if mate[root] == -1 and adj[root]:
            path = find_path_from(adj, mate, root)
            if path is not None:
                flip_path(mate, path)
    return mate


def mates_to_matching(mate: Sequence[int]) -> Matching:
    return Matching(frozenset(Edge(v, w) for v, w in enumerate(mate) if v < w))


class MatchingService:
    def __init__(self, settings: Optional[Settings] = None):
        self.settings = settings or Settings()

    def is_matching(self, graph: Graph, matching: Matching) -> bool:
        covered = set()
        for e in matching.edges:
            if not graph.has_edge(e.u, e.v):
                return False
            if e.u in covered or e.v in covered:
                return False
            covered.update((e.u, e.v))
        return True

    def _require_matching(self, graph: Graph, matching: Matching) -> None:
        if not self.is_matching(graph, matching):
            raise PreconditionError("Edge set is not a matching of the graph")

    def find_augmenting_path(self, graph: Graph, matching: Matching) -> Optional[AugmentingPath]:
        """
        Search for an augmenting path; by Berge's theorem one exists iff the matching is not maximum.

        Args:
            graph (Graph): Host graph
            matching (Matching): A matching of the graph

        Returns:
            Optional[AugmentingPath]: A path from the least exposed root that has one, else None
        """
        self._require_matching(graph, matching)
        adj = sorted_adjacency(graph)
        mate = matching.mates_array(graph.n)
        for root in range(graph.n):
            if mate[root] != -1 or not adj[root]:
                continue
            vertices = find_path_from(adj, mate, root)
            if vertices is None:
                continue
            path = AugmentingPath.along(matching, vertices)
            problems = path.problems(graph, matching)
            if problems:
                raise InternalInvariantError(f"Blossom search produced an invalid path: {problems}")
            return path
        return None

    def augment(self, matching: Matching, path: AugmentingPath) -> Matching:
        """
        Flip the matching along an augmenting path.

        Args:
            matching (Matching): Current matching
            path (AugmentingPath): Path augmenting for it

        Returns:
            Matching: Symmetric difference, one edge larger
        """
        edges = path.edges()
        if len(edges) % 2 != 1 or len(set(path.vertices)) != len(path.vertices):
            raise PreconditionError("Path is not augmenting: needs an odd number of edges on distinct vertices")
        if matching.is_saturated(path.start) or matching.is_saturated(path.end):
            raise PreconditionError("Path is not augmenting: an endpoint is saturated")
        for i, e in enumerate(edges):
            if (e in matching) != (i % 2 == 1):
                raise PreconditionError(f"Path is not augmenting: edge {e} breaks the alternation")
        result = matching.symmetric_difference(edges)
        if len(result) != len(matching) + 1:
            raise InternalInvariantError("Augmentation did not grow the matching by one")
        return result

    def maximum_matching(self, graph: Graph) -> Matching:
        # Greedy start, then one blossom search per exposed vertex in ascending order.
        mate = maximum_mates(sorted_adjacency(graph))
        return mates_to_matching(mate)

    def nu(self, graph: Graph) -> int:
        return len(self.maximum_matching(graph))

    def is_maximum(self, graph: Graph, matching: Matching) -> bool:
        return self.is_matching(graph, matching) and self.find_augmenting_path(graph, matching) is None

    def brute_force_maximum_matching(self, graph: Graph) -> Matching:
        """
        Exact maximum matching by branch and bound over vertex decisions.

        Independent of the blossom search; used as an oracle.

        Args:
            graph (Graph): Graph with at most brute_force_edge_cap edges

        Returns:
            Matching: A maximum matching
        """
        cap = self.settings.brute_force_edge_cap
        if graph.edge_count > cap:
            raise SizeLimitError(f"Brute-force matching capped at {cap} edges, got {graph.edge_count}")

        adjacency = [set(r) for r in graph.adjacency]
        best: List[Tuple[int, int]] = []
        chosen: List[Tuple[int, int]] = []

        def live_vertices(alive: set) -> List[int]:
            return [v for v in sorted(alive) if adjacency[v] & alive]

        def branch(alive: set) -> None:
            nonlocal best
            live = live_vertices(alive)
            if len(chosen) + len(live) // 2 <= len(best):
                return
            if not live:
                best = list(chosen)
                return
            v = live[0]
            for w in sorted(adjacency[v] & alive):
                chosen.append((v, w))
                branch(alive - {v, w})
                chosen.pop()
            branch(alive - {v})

        branch(set(range(graph.n)))
        return Matching.from_pairs(best)

    def iter_maximum_matchings(self, graph: Graph) -> Iterator[Matching]:
        """Every maximum matching, in lexicographic order of edge decisions."""
        cap = self.settings.brute_force_edge_cap
        if graph.edge_count > cap:
            raise SizeLimitError(f"Matching enumeration capped at {cap} edges, got {graph.edge_count}")
        target = self.nu(graph)
        edges = list(graph.edges)
        chosen: List[Edge] = []

        def walk(index: int, used: frozenset) -> Iterator[Matching]:
            if len(chosen) == target:
                yield Matching(frozenset(chosen))
                return
            if len(chosen) + (len(edges) - index) < target:
                return
            if index == len(edges):
                return
            e = edges[index]
            if e.u not in used and e.v not in used:
                chosen.append(e)
                yield from walk(index + 1, used | {e.u, e.v})
                chosen.pop()
            yield from walk(index + 1, used)

        yield from walk(0, frozenset())
